//! Cleaning of paired journal/tracker files and their merge into one session stream.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    CommandMethod, JournalKind, JournalRecord, TrackerKind, TrackerRecord, TRANSACTION_SUCCESSFUL,
};
use crate::ticks::TickTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    Journal,
    Tracker,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Journal => "Journal",
            Source::Tracker => "Tracker",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventCategory {
    /// `undo` is set when the first command detail mentions "cancel" or "undo".
    Command { method: CommandMethod, undo: bool },
    PushButton,
    TransactionSuccess,
    OtherTransaction,
    ElementsAdded(u32),
    ElementsDeleted(u32),
    ElementsModified(u32),
    KeyPress,
    OtherJrn,
}

impl EventCategory {
    pub fn source(self) -> Source {
        match self {
            EventCategory::ElementsAdded(_)
            | EventCategory::ElementsDeleted(_)
            | EventCategory::ElementsModified(_)
            | EventCategory::KeyPress => Source::Tracker,
            _ => Source::Journal,
        }
    }

    pub fn count(self) -> u32 {
        match self {
            EventCategory::ElementsAdded(n)
            | EventCategory::ElementsDeleted(n)
            | EventCategory::ElementsModified(n) => n,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SessionEvent {
    pub tick: TickTime,
    pub category: EventCategory,
}

impl SessionEvent {
    pub fn source(&self) -> Source {
        self.category.source()
    }
}

fn contains_ignore_ascii_case(haystack: &str, needle: &str) -> bool {
    let n = needle.len();
    haystack.len() >= n
        && haystack
            .as_bytes()
            .windows(n)
            .any(|w| w.eq_ignore_ascii_case(needle.as_bytes()))
}

/// Undo/cancel detection on the first command detail.
pub fn is_undo_detail(detail: &str) -> bool {
    contains_ignore_ascii_case(detail, "cancel") || contains_ignore_ascii_case(detail, "undo")
}

impl From<&JournalRecord> for SessionEvent {
    fn from(r: &JournalRecord) -> Self {
        let category = match r.kind {
            JournalKind::Command => EventCategory::Command {
                method: r.method,
                undo: r.details.first().is_some_and(|d| is_undo_detail(d)),
            },
            JournalKind::PushButton => EventCategory::PushButton,
            JournalKind::Transaction => {
                if r.details.first().is_some_and(|d| d == TRANSACTION_SUCCESSFUL) {
                    EventCategory::TransactionSuccess
                } else {
                    EventCategory::OtherTransaction
                }
            }
            JournalKind::OtherJrn => EventCategory::OtherJrn,
        };
        SessionEvent { tick: r.tick, category }
    }
}

impl From<&TrackerRecord> for SessionEvent {
    fn from(r: &TrackerRecord) -> Self {
        let category = match r.kind {
            TrackerKind::ElementsAdded => EventCategory::ElementsAdded(r.count),
            TrackerKind::ElementsDeleted => EventCategory::ElementsDeleted(r.count),
            TrackerKind::ElementsModified => EventCategory::ElementsModified(r.count),
            TrackerKind::KeyPress => EventCategory::KeyPress,
        };
        SessionEvent { tick: r.tick, category }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub designer_id: String,
    pub events: Vec<SessionEvent>,
}

impl Session {
    pub fn first_tick(&self) -> Option<TickTime> {
        self.events.first().map(|e| e.tick)
    }

    pub fn last_tick(&self) -> Option<TickTime> {
        self.events.last().map(|e| e.tick)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleaningPolicy {
    pub min_journal_bytes: u64,
    pub min_rows: usize,
    pub max_tracker_coverage_deficit: f64,
}

impl Default for CleaningPolicy {
    fn default() -> Self {
        CleaningPolicy { min_journal_bytes: 102_400, min_rows: 0, max_tracker_coverage_deficit: 0.5 }
    }
}

impl CleaningPolicy {
    pub fn validate(&self) -> Result<(), SessionError> {
        if !(self.max_tracker_coverage_deficit >= 0.0 && self.max_tracker_coverage_deficit <= 1.0) {
            return Err(SessionError::InvalidPolicy);
        }
        Ok(())
    }
}

/// What `clean` needs to know about one side of a pair.
#[derive(Clone, Copy, Debug)]
pub struct FileSummary {
    pub byte_size: u64,
    pub rows: usize,
    pub first_tick: Option<TickTime>,
    pub last_tick: Option<TickTime>,
}

impl FileSummary {
    pub fn from_ticks(byte_size: u64, ticks: impl IntoIterator<Item = TickTime>) -> Self {
        let mut rows = 0;
        let mut first = None;
        let mut last = None;
        for t in ticks {
            rows += 1;
            first = Some(first.map_or(t, |f: TickTime| f.min(t)));
            last = Some(last.map_or(t, |l: TickTime| l.max(t)));
        }
        FileSummary { byte_size, rows, first_tick: first, last_tick: last }
    }

    pub fn of_journal(byte_size: u64, records: &[JournalRecord]) -> Self {
        Self::from_ticks(byte_size, records.iter().map(|r| r.tick))
    }

    pub fn of_tracker(byte_size: u64, records: &[TrackerRecord]) -> Self {
        Self::from_ticks(byte_size, records.iter().map(|r| r.tick))
    }

    pub fn span_ms(&self) -> u64 {
        match (self.first_tick, self.last_tick) {
            (Some(f), Some(l)) => l.0 - f.0,
            _ => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    BelowSizeThreshold,
    BelowRowThreshold,
    TrackerCoverageDeficit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningDecision {
    pub accepted: bool,
    pub reasons: Vec<RejectReason>,
}

/// Accepts or rejects a journal/tracker pair. Never fails.
pub fn clean(journal: &FileSummary, tracker: &FileSummary, policy: &CleaningPolicy) -> CleaningDecision {
    let mut reasons = Vec::new();
    if journal.byte_size < policy.min_journal_bytes {
        reasons.push(RejectReason::BelowSizeThreshold);
    }
    if journal.rows + tracker.rows < policy.min_rows {
        reasons.push(RejectReason::BelowRowThreshold);
    }
    let journal_span = journal.span_ms() as f64;
    let tracker_span = tracker.span_ms() as f64;
    if journal_span > 0.0 && tracker_span < (1.0 - policy.max_tracker_coverage_deficit) * journal_span {
        reasons.push(RejectReason::TrackerCoverageDeficit);
    }
    CleaningDecision { accepted: reasons.is_empty(), reasons }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("session has no events")]
    EmptySession,
    #[error("{origin:?} ticks decrease at record {index}")]
    NonMonotone { origin: Source, index: usize },
    #[error("sessions are not in chronological order at position {index}")]
    SessionsNotChronological { index: usize },
    #[error("session {index} belongs to designer `{found}`, expected `{expected}`")]
    MixedDesigners { index: usize, expected: String, found: String },
    #[error("no sessions to concatenate")]
    NoSessions,
    #[error("cleaning coverage deficit must lie in [0, 1]")]
    InvalidPolicy,
}

fn first_inversion(ticks: impl Iterator<Item = TickTime>) -> Option<usize> {
    let mut prev: Option<TickTime> = None;
    for (i, t) in ticks.enumerate() {
        if prev.is_some_and(|p| t < p) {
            return Some(i);
        }
        prev = Some(t);
    }
    None
}

/// Stable merge by tick; journal events precede tracker events at equal ticks.
pub fn integrate(
    session_id: &str,
    designer_id: &str,
    journal: &[JournalRecord],
    tracker: &[TrackerRecord],
) -> Result<Session, SessionError> {
    if journal.is_empty() && tracker.is_empty() {
        return Err(SessionError::EmptySession);
    }
    if let Some(index) = first_inversion(journal.iter().map(|r| r.tick)) {
        return Err(SessionError::NonMonotone { origin: Source::Journal, index });
    }
    if let Some(index) = first_inversion(tracker.iter().map(|r| r.tick)) {
        return Err(SessionError::NonMonotone { origin: Source::Tracker, index });
    }
    let mut events = Vec::with_capacity(journal.len() + tracker.len());
    let (mut i, mut j) = (0, 0);
    while i < journal.len() && j < tracker.len() {
        if journal[i].tick <= tracker[j].tick {
            events.push(SessionEvent::from(&journal[i]));
            i += 1;
        } else {
            events.push(SessionEvent::from(&tracker[j]));
            j += 1;
        }
    }
    events.extend(journal[i..].iter().map(SessionEvent::from));
    events.extend(tracker[j..].iter().map(SessionEvent::from));
    Ok(Session { session_id: session_id.into(), designer_id: designer_id.into(), events })
}

/// All sessions of one designer laid end to end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignerSequence {
    pub designer_id: String,
    pub events: Vec<SessionEvent>,
    /// Index of the first event of every session after the first.
    pub boundaries: Vec<usize>,
    /// Session positions whose tick range overlaps the previous session.
    pub overlap_warnings: Vec<usize>,
}

impl DesignerSequence {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Concatenates one designer's sessions (already sorted by first tick).
///
/// Overlapping tick ranges are tolerated and recorded as warnings; a session
/// starting before its predecessor is an error.
pub fn concat_sessions(sessions: &[Session]) -> Result<DesignerSequence, SessionError> {
    let first = sessions.first().ok_or(SessionError::NoSessions)?;
    let designer_id = first.designer_id.clone();
    let mut events = Vec::with_capacity(sessions.iter().map(|s| s.events.len()).sum());
    let mut boundaries = Vec::new();
    let mut overlap_warnings = Vec::new();
    let mut prev: Option<(TickTime, TickTime)> = None;
    for (index, s) in sessions.iter().enumerate() {
        if s.designer_id != designer_id {
            return Err(SessionError::MixedDesigners {
                index,
                expected: designer_id,
                found: s.designer_id.clone(),
            });
        }
        let (Some(start), Some(end)) = (s.first_tick(), s.last_tick()) else {
            return Err(SessionError::EmptySession);
        };
        if let Some((pstart, pend)) = prev {
            if start < pstart {
                return Err(SessionError::SessionsNotChronological { index });
            }
            if start < pend {
                overlap_warnings.push(index);
            }
        }
        if index > 0 {
            boundaries.push(events.len());
        }
        events.extend_from_slice(&s.events);
        prev = Some((start, end));
    }
    Ok(DesignerSequence { designer_id, events, boundaries, overlap_warnings })
}
