//! Window-cropping augmentation over record sequences.
//!
//! A sequence of length `L` is cut into windows of `N` records at stride `s`;
//! adjacent windows share `N - s` records and every window inherits the
//! designer's score.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("window length must be at least 1")]
    ZeroLength,
    #[error("step {step} must lie in 1..={length}")]
    BadStep { step: usize, length: usize },
    #[error("designer `{0}` has no score")]
    MissingScore(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub length: usize,
    pub step: usize,
    #[serde(default = "default_keep_short")]
    pub keep_short: bool,
}

fn default_keep_short() -> bool {
    true
}

impl WindowConfig {
    pub fn new(length: usize, step: usize) -> Result<Self, WindowError> {
        let cfg = WindowConfig { length, step, keep_short: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_keep_short(mut self, keep: bool) -> Self {
        self.keep_short = keep;
        self
    }

    pub fn validate(&self) -> Result<(), WindowError> {
        if self.length == 0 {
            return Err(WindowError::ZeroLength);
        }
        if self.step == 0 || self.step > self.length {
            return Err(WindowError::BadStep { step: self.step, length: self.length });
        }
        Ok(())
    }

    pub fn overlap(&self) -> usize {
        self.length - self.step
    }

    /// Number of windows `make_windows` yields for a sequence of `len` records.
    pub fn count_for(&self, len: usize) -> usize {
        if len == 0 {
            0
        } else if len >= self.length {
            (len - self.length) / self.step + 1
        } else {
            usize::from(self.keep_short)
        }
    }
}

/// Half-open record range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowRange {
    pub start: usize,
    pub end: usize,
    /// Set when the sequence was shorter than the window length.
    pub short: bool,
}

impl WindowRange {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Windows over a sequence of `len` records. The tail past the last full
/// window is dropped. `config` is assumed valid.
pub fn make_windows(len: usize, config: &WindowConfig) -> Vec<WindowRange> {
    debug_assert!(config.validate().is_ok());
    if len == 0 {
        return Vec::new();
    }
    if len < config.length {
        return if config.keep_short {
            alloc::vec![WindowRange { start: 0, end: len, short: true }]
        } else {
            Vec::new()
        };
    }
    let count = (len - config.length) / config.step + 1;
    (0..count)
        .map(|i| {
            let start = i * config.step;
            WindowRange { start, end: start + config.length, short: false }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub designer_id: String,
    pub start: usize,
    pub end: usize,
    pub short: bool,
    pub label: i32,
}

/// Labels each window with its designer's score total.
pub fn attach_labels(
    ranges: &[(String, Vec<WindowRange>)],
    scores: &BTreeMap<String, i32>,
) -> Result<Vec<WindowSample>, WindowError> {
    let mut out = Vec::with_capacity(ranges.iter().map(|(_, r)| r.len()).sum());
    for (designer, windows) in ranges {
        let label = *scores.get(designer).ok_or_else(|| WindowError::MissingScore(designer.clone()))?;
        out.extend(windows.iter().map(|w| WindowSample {
            designer_id: designer.clone(),
            start: w.start,
            end: w.end,
            short: w.short,
            label,
        }));
    }
    Ok(out)
}
