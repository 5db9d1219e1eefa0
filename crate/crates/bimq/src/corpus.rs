//! Corpus directories: one folder per designer holding
//! `session_<k>.journal.txt` / `session_<k>.tracker.csv` pairs, plus top-level
//! `scores.csv`, `assessments.csv` and `ground_truth.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bimq_core::synth::{GeneratedDesigner, GroundTruth};

use crate::error::{read_text, write_json, write_text, Error, Result};
use crate::formats;

pub const SCORES_FILE: &str = "scores.csv";
pub const ASSESSMENTS_FILE: &str = "assessments.csv";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";
const JOURNAL_SUFFIX: &str = ".journal.txt";
const TRACKER_SUFFIX: &str = ".tracker.csv";

pub fn journal_name(k: usize) -> String {
    format!("session_{k}{JOURNAL_SUFFIX}")
}

pub fn tracker_name(k: usize) -> String {
    format!("session_{k}{TRACKER_SUFFIX}")
}

/// Writes a generated corpus. Existing files with the same names are replaced.
pub fn write_corpus(dir: &Path, designers: &[GeneratedDesigner], truth: &GroundTruth) -> Result<()> {
    const STAGE: &str = "synth";
    for d in designers {
        let ddir = dir.join(&d.truth.designer_id);
        for s in &d.sessions {
            write_text(STAGE, &ddir.join(journal_name(s.index)), &s.journal)?;
            write_text(STAGE, &ddir.join(tracker_name(s.index)), &s.tracker)?;
        }
    }
    let scores: Vec<_> = truth.designers.iter().map(|d| (d.designer_id.clone(), d.parts)).collect();
    write_text(STAGE, &dir.join(SCORES_FILE), &formats::write_scores(&scores))?;
    let assessments: Vec<_> = truth.designers.iter().map(|d| (d.designer_id.clone(), d.assessment)).collect();
    write_text(STAGE, &dir.join(ASSESSMENTS_FILE), &formats::write_assessments(&assessments))?;
    write_json(STAGE, &dir.join(GROUND_TRUTH_FILE), truth)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionPaths {
    pub index: usize,
    pub journal: PathBuf,
    pub tracker: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignerDir {
    pub designer_id: String,
    /// Ordered by session number.
    pub sessions: Vec<SessionPaths>,
}

fn session_number(name: &str, suffix: &str) -> Option<usize> {
    name.strip_prefix("session_")?.strip_suffix(suffix)?.parse().ok()
}

fn sorted_entries(stage: &'static str, dir: &Path) -> Result<Vec<(String, PathBuf, bool)>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::data(stage, dir, e))?;
    let mut out = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| Error::data(stage, dir, e))?;
        let is_dir = entry.file_type().map_err(|e| Error::data(stage, entry.path(), e))?.is_dir();
        out.push((entry.file_name().to_string_lossy().into_owned(), entry.path(), is_dir));
    }
    out.sort();
    Ok(out)
}

/// Lists designers (sorted by id) and their journal/tracker pairs. A journal
/// without its tracker, or the reverse, is a data error.
pub fn discover(stage: &'static str, dir: &Path) -> Result<Vec<DesignerDir>> {
    let mut designers = Vec::new();
    for (name, path, is_dir) in sorted_entries(stage, dir)? {
        if !is_dir || name.starts_with('.') {
            continue;
        }
        let mut journals = BTreeMap::new();
        let mut trackers = BTreeMap::new();
        for (file, fpath, _) in sorted_entries(stage, &path)? {
            if let Some(k) = session_number(&file, JOURNAL_SUFFIX) {
                journals.insert(k, fpath);
            } else if let Some(k) = session_number(&file, TRACKER_SUFFIX) {
                trackers.insert(k, fpath);
            }
        }
        if let Some(k) = journals.keys().find(|k| !trackers.contains_key(k)) {
            return Err(Error::data(stage, path.join(journal_name(*k)), "journal has no matching tracker file"));
        }
        if let Some(k) = trackers.keys().find(|k| !journals.contains_key(k)) {
            return Err(Error::data(stage, path.join(tracker_name(*k)), "tracker has no matching journal file"));
        }
        if journals.is_empty() {
            continue;
        }
        let sessions = journals
            .into_iter()
            .map(|(index, journal)| SessionPaths { index, journal, tracker: trackers.remove(&index).unwrap() })
            .collect();
        designers.push(DesignerDir { designer_id: name, sessions });
    }
    if designers.is_empty() {
        return Err(Error::data(stage, dir, "corpus contains no designer session files"));
    }
    Ok(designers)
}

/// Score totals keyed by designer id, from the corpus score sheet.
pub fn read_labels(stage: &'static str, corpus: &Path) -> Result<BTreeMap<String, i32>> {
    let path = corpus.join(SCORES_FILE);
    let text = read_text(stage, &path)?;
    let rows = formats::read_scores(&text).map_err(|e| Error::data(stage, &path, e))?;
    Ok(rows.into_iter().map(|(id, s)| (id, s.total)).collect())
}
