//! The 29 density features of one window.
//!
//! Data density is the share of records of a type among the `L` records of the
//! window; time density is the time those records consumed (the tick gap back to
//! the previous record) over the window span `T`. Pauses are gaps of at least one
//! minute, banded at 1-2, 2-5 and over 5 minutes; `effect_t` is the share of `T`
//! not spent in pauses over 5 minutes.
//!
//! All tallies are integer, so the prefix-sum [`FeatureIndex`] yields exactly the
//! same vectors as direct extraction.

use alloc::vec::Vec;
use core::ops::{Add, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::CommandMethod;
use crate::session::{EventCategory, SessionEvent};
use crate::ticks::MS_PER_MINUTE;
use crate::windows::WindowRange;

pub const FEATURE_COUNT: usize = 29;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "transsuccess_d",
    "add_d",
    "add_times_d",
    "delete_d",
    "delete_times_d",
    "modify_times_d",
    "command_d",
    "undo_d",
    "ribbon_d",
    "accelkey_d",
    "pushbutton_d",
    "idle1_2_d",
    "idle2_5_d",
    "idle_gt5_d",
    "transsuccess_t",
    "add_t",
    "add_times_t",
    "delete_t",
    "delete_times_t",
    "modify_times_t",
    "command_t",
    "undo_t",
    "ribbon_t",
    "accelkey_t",
    "pushbutton_t",
    "idle1_2_t",
    "idle2_5_t",
    "idle_gt5_t",
    "effect_t",
];

/// Record indicators that have both a data and a time density, in column order.
pub const INDICATORS: usize = 11;
const TRANSSUCCESS: usize = 0;
const ADD: usize = 1;
const ADD_TIMES: usize = 2;
const DELETE: usize = 3;
const DELETE_TIMES: usize = 4;
const MODIFY_TIMES: usize = 5;
const COMMAND: usize = 6;
const UNDO: usize = 7;
const RIBBON: usize = 8;
const ACCELKEY: usize = 9;
const PUSHBUTTON: usize = 10;

const TIME_OFFSET: usize = 14;
pub const EFFECT_T: usize = 28;
pub const IDLE_GT5_T: usize = 27;

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauseBand {
    NotAPause,
    Band1to2,
    Band2to5,
    BandOver5,
}

/// Bands are left-closed: 60 s, 120 s and 300 s open a new band.
pub fn classify_pause(gap_ms: u64) -> PauseBand {
    match gap_ms {
        g if g < MS_PER_MINUTE => PauseBand::NotAPause,
        g if g < 2 * MS_PER_MINUTE => PauseBand::Band1to2,
        g if g < 5 * MS_PER_MINUTE => PauseBand::Band2to5,
        _ => PauseBand::BandOver5,
    }
}

/// Time consumed by record `i`: its tick minus the previous record's, 0 for the
/// first record. A backwards step (overlapping sessions) counts as 0.
pub fn record_time(events: &[SessionEvent], i: usize) -> u64 {
    if i == 0 {
        0
    } else {
        events[i].tick.0.saturating_sub(events[i - 1].tick.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowStats {
    /// Record count `L`.
    pub len: u64,
    /// Span `T` in ms, the sum of record times.
    pub span_ms: u64,
    /// Per-indicator counts; add/delete hold summed component counts.
    pub counts: [u64; INDICATORS],
    pub times: [u64; INDICATORS],
    pub internal_commands: u64,
    pub internal_time: u64,
    /// Pause gap counts for the 1-2, 2-5 and >5 minute bands.
    pub pause_counts: [u64; 3],
    pub pause_sums: [u64; 3],
}

impl WindowStats {
    fn record(&mut self, category: EventCategory, rt: u64) {
        self.len += 1;
        self.span_ms += rt;
        let mut hit = |k: usize, amount: u64| {
            self.counts[k] += amount;
            self.times[k] += rt;
        };
        match category {
            EventCategory::TransactionSuccess => hit(TRANSSUCCESS, 1),
            EventCategory::ElementsAdded(n) => {
                hit(ADD, n as u64);
                hit(ADD_TIMES, 1);
            }
            EventCategory::ElementsDeleted(n) => {
                hit(DELETE, n as u64);
                hit(DELETE_TIMES, 1);
            }
            EventCategory::ElementsModified(_) => hit(MODIFY_TIMES, 1),
            EventCategory::Command { method, undo } => {
                hit(COMMAND, 1);
                if undo {
                    hit(UNDO, 1);
                }
                match method {
                    CommandMethod::Ribbon => hit(RIBBON, 1),
                    CommandMethod::AccelKey => hit(ACCELKEY, 1),
                    CommandMethod::Internal | CommandMethod::None => {
                        self.internal_commands += 1;
                        self.internal_time += rt;
                    }
                }
            }
            EventCategory::PushButton => hit(PUSHBUTTON, 1),
            EventCategory::OtherTransaction | EventCategory::KeyPress | EventCategory::OtherJrn => {}
        }
        let band = match classify_pause(rt) {
            PauseBand::NotAPause => return,
            PauseBand::Band1to2 => 0,
            PauseBand::Band2to5 => 1,
            PauseBand::BandOver5 => 2,
        };
        self.pause_counts[band] += 1;
        self.pause_sums[band] += rt;
    }

    pub fn of_events(events: &[SessionEvent]) -> Self {
        let mut stats = WindowStats::default();
        for i in 0..events.len() {
            stats.record(events[i].category, record_time(events, i));
        }
        stats
    }

    pub fn features(&self) -> Result<FeatureVector, FeatureError> {
        if self.len == 0 {
            return Err(FeatureError::EmptyWindow);
        }
        let l = self.len as f64;
        let t = self.span_ms as f64;
        let time = |x: u64| if self.span_ms == 0 { 0.0 } else { x as f64 / t };
        let mut v = [0.0; FEATURE_COUNT];
        for k in 0..INDICATORS {
            v[k] = self.counts[k] as f64 / l;
            v[TIME_OFFSET + k] = time(self.times[k]);
        }
        for b in 0..3 {
            v[INDICATORS + b] = self.pause_counts[b] as f64 / l;
            v[TIME_OFFSET + INDICATORS + b] = time(self.pause_sums[b]);
        }
        v[EFFECT_T] = if self.span_ms == 0 {
            1.0
        } else {
            (self.span_ms - self.pause_sums[2]) as f64 / t
        };
        Ok(FeatureVector(v))
    }
}

impl Add for WindowStats {
    type Output = WindowStats;

    fn add(mut self, rhs: WindowStats) -> WindowStats {
        self.len += rhs.len;
        self.span_ms += rhs.span_ms;
        for k in 0..INDICATORS {
            self.counts[k] += rhs.counts[k];
            self.times[k] += rhs.times[k];
        }
        self.internal_commands += rhs.internal_commands;
        self.internal_time += rhs.internal_time;
        for b in 0..3 {
            self.pause_counts[b] += rhs.pause_counts[b];
            self.pause_sums[b] += rhs.pause_sums[b];
        }
        self
    }
}

impl Sub for WindowStats {
    type Output = WindowStats;

    fn sub(mut self, rhs: WindowStats) -> WindowStats {
        self.len -= rhs.len;
        self.span_ms -= rhs.span_ms;
        for k in 0..INDICATORS {
            self.counts[k] -= rhs.counts[k];
            self.times[k] -= rhs.times[k];
        }
        self.internal_commands -= rhs.internal_commands;
        self.internal_time -= rhs.internal_time;
        for b in 0..3 {
            self.pause_counts[b] -= rhs.pause_counts[b];
            self.pause_sums[b] -= rhs.pause_sums[b];
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.0[i])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("window contains no records")]
    EmptyWindow,
    #[error("window {start}..{end} exceeds sequence of {len} records")]
    OutOfBounds { start: usize, end: usize, len: usize },
}

pub fn extract_features(events: &[SessionEvent]) -> Result<FeatureVector, FeatureError> {
    WindowStats::of_events(events).features()
}

/// Prefix sums of per-record tallies over a whole sequence; any window's stats
/// come out in O(1).
pub struct FeatureIndex {
    prefix: Vec<WindowStats>,
    categories: Vec<EventCategory>,
}

impl FeatureIndex {
    pub fn new(events: &[SessionEvent]) -> Self {
        let mut prefix = Vec::with_capacity(events.len() + 1);
        let mut acc = WindowStats::default();
        prefix.push(acc);
        for (i, e) in events.iter().enumerate() {
            acc.record(e.category, record_time(events, i));
            prefix.push(acc);
        }
        FeatureIndex { prefix, categories: events.iter().map(|e| e.category).collect() }
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn stats(&self, start: usize, end: usize) -> Result<WindowStats, FeatureError> {
        if end > self.len() || start > end {
            return Err(FeatureError::OutOfBounds { start, end, len: self.len() });
        }
        if start == end {
            return Err(FeatureError::EmptyWindow);
        }
        // the opening record keeps its counts but consumes no time
        let mut opening = WindowStats::default();
        opening.record(self.categories[start], 0);
        Ok(opening + (self.prefix[end] - self.prefix[start + 1]))
    }

    pub fn features(&self, window: &WindowRange) -> Result<FeatureVector, FeatureError> {
        self.stats(window.start, window.end)?.features()
    }
}

/// Features for many windows over one sequence, in window order.
pub fn extract_windows(
    events: &[SessionEvent],
    windows: &[WindowRange],
) -> Result<Vec<FeatureVector>, FeatureError> {
    let index = FeatureIndex::new(events);
    crate::par::map_range(windows.len(), |i| index.features(&windows[i]))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ticks::TickTime;
    use alloc::vec;

    fn ev(tick: u64, category: EventCategory) -> SessionEvent {
        SessionEvent { tick: TickTime(tick), category }
    }

    fn cmd(tick: u64, method: CommandMethod) -> SessionEvent {
        ev(tick, EventCategory::Command { method, undo: false })
    }

    #[test]
    fn record_time_rules() {
        let events = vec![ev(100, EventCategory::KeyPress), ev(250, EventCategory::KeyPress), ev(250, EventCategory::KeyPress)];
        assert_eq!(record_time(&events, 1), 150);
        assert_eq!(record_time(&events, 0), 0);
        assert_eq!(record_time(&events, 2), 0);
    }

    #[test]
    fn pause_bands() {
        assert_eq!(classify_pause(59_999), PauseBand::NotAPause);
        assert_eq!(classify_pause(60_000), PauseBand::Band1to2);
        assert_eq!(classify_pause(119_999), PauseBand::Band1to2);
        assert_eq!(classify_pause(120_000), PauseBand::Band2to5);
        assert_eq!(classify_pause(300_000), PauseBand::BandOver5);
    }

    #[test]
    fn command_density() {
        let mut events = Vec::new();
        for i in 0..100u64 {
            events.push(if i % 14 == 3 && i < 98 {
                cmd(i * 1000, CommandMethod::Ribbon)
            } else {
                ev(i * 1000, EventCategory::KeyPress)
            });
        }
        assert_eq!(events.iter().filter(|e| matches!(e.category, EventCategory::Command { .. })).count(), 7);
        let f = extract_features(&events).unwrap();
        assert_eq!(f.get("command_d"), Some(0.07));
    }

    #[test]
    fn zero_span_window() {
        let events = vec![cmd(5, CommandMethod::Ribbon), ev(5, EventCategory::ElementsAdded(3))];
        let f = extract_features(&events).unwrap();
        for (v, name) in f.0[TIME_OFFSET..EFFECT_T].iter().zip(&FEATURE_NAMES[TIME_OFFSET..]) {
            assert_eq!(*v, 0.0, "{name}");
        }
        assert_eq!(f.0[EFFECT_T], 1.0);
        assert_eq!(f.get("add_d"), Some(1.5));
    }

    #[test]
    fn long_pause_effect() {
        let events = vec![
            ev(0, EventCategory::KeyPress),
            ev(100_000, EventCategory::KeyPress),
            ev(500_000, EventCategory::KeyPress),
            ev(600_000, EventCategory::KeyPress),
        ];
        let f = extract_features(&events).unwrap();
        assert!((f.get("idle_gt5_t").unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.get("effect_t").unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // two 100 s gaps fall in the 1-2 minute band
        assert_eq!(f.get("idle1_2_d"), Some(0.5));
    }

    #[test]
    fn empty_window() {
        assert_eq!(extract_features(&[]), Err(FeatureError::EmptyWindow));
    }

    #[test]
    fn index_matches_direct() {
        let cats = [
            EventCategory::KeyPress,
            EventCategory::Command { method: CommandMethod::AccelKey, undo: true },
            EventCategory::ElementsDeleted(4),
            EventCategory::TransactionSuccess,
            EventCategory::PushButton,
        ];
        let mut tick = 0;
        let events: Vec<_> = (0..60)
            .map(|i| {
                tick += (i * 7919 % 400_000) as u64;
                ev(tick, cats[i % cats.len()])
            })
            .collect();
        let index = FeatureIndex::new(&events);
        for start in 0..events.len() {
            for end in start + 1..=events.len() {
                let w = WindowRange { start, end, short: false };
                assert_eq!(index.features(&w).unwrap(), extract_features(&events[start..end]).unwrap());
            }
        }
    }
}
