//! Parsers for the two raw behavior sources.
//!
//! Journal lines follow
//! `'C <DD-Mon-YYYY HH:MM:SS.mmm>; <DataType>[ "<Method>"] , "<Detail>"[ , "<Detail>"...]`
//! and only data types starting with `Jrn.`/`jrn.` are behavioral. Tracker files are
//! comma separated under the fixed header [`TRACKER_HEADER`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ticks::{from_ticks, parse_journal_timestamp, to_ticks, TickTime};

pub const TRACKER_HEADER: &str = "ticks,timestamp,record_type,count,payload";

/// Malformed-line samples kept per report.
pub const MAX_MALFORMED_SAMPLES: usize = 32;

pub const TRANSACTION_SUCCESSFUL: &str = "Transaction Successful";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JournalKind {
    Command,
    PushButton,
    Transaction,
    OtherJrn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommandMethod {
    Ribbon,
    AccelKey,
    Internal,
    None,
}

impl CommandMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandMethod::Ribbon => "Ribbon",
            CommandMethod::AccelKey => "AccelKey",
            CommandMethod::Internal => "Internal",
            CommandMethod::None => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub tick: TickTime,
    pub kind: JournalKind,
    pub method: CommandMethod,
    pub details: Vec<String>,
}

impl JournalRecord {
    /// Renders the record in journal grammar. `OtherJrn` records are written as `Jrn.Data`.
    pub fn to_line(&self) -> String {
        let data_type = match self.kind {
            JournalKind::Command => "Jrn.Command",
            JournalKind::PushButton => "Jrn.PushButton",
            JournalKind::Transaction => "Jrn.Transaction",
            JournalKind::OtherJrn => "Jrn.Data",
        };
        let method = match self.method {
            CommandMethod::None => None,
            m => Some(m.as_str()),
        };
        let details: Vec<&str> = self.details.iter().map(String::as_str).collect();
        format_journal_line(self.tick, data_type, method, &details)
    }
}

/// Formats one journal line. Details must not contain `"`.
pub fn format_journal_line(
    tick: TickTime,
    data_type: &str,
    method: Option<&str>,
    details: &[&str],
) -> String {
    let mut line = String::with_capacity(64);
    let _ = write!(line, "'C {}; {}", from_ticks(tick).journal_format(), data_type);
    if let Some(m) = method {
        let _ = write!(line, " \"{m}\"");
    }
    for d in details {
        let _ = write!(line, " , \"{d}\"");
    }
    line
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrackerKind {
    ElementsAdded,
    ElementsDeleted,
    ElementsModified,
    KeyPress,
}

impl TrackerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrackerKind::ElementsAdded => "ElementsAdded",
            TrackerKind::ElementsDeleted => "ElementsDeleted",
            TrackerKind::ElementsModified => "ElementsModified",
            TrackerKind::KeyPress => "KeyPress",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ElementsAdded" => TrackerKind::ElementsAdded,
            "ElementsDeleted" => TrackerKind::ElementsDeleted,
            "ElementsModified" => TrackerKind::ElementsModified,
            "KeyPress" => TrackerKind::KeyPress,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackerRecord {
    pub tick: TickTime,
    pub kind: TrackerKind,
    pub count: u32,
    pub payload: String,
}

impl TrackerRecord {
    pub fn to_line(&self) -> String {
        let mut line = String::with_capacity(48);
        let _ = write!(
            line,
            "{},{},{},{},{}",
            self.tick,
            from_ticks(self.tick).iso_format(),
            self.kind.as_str(),
            self.count,
            self.payload
        );
        line
    }
}

/// Serializes records to tracker text (header plus one line per record, `\n` terminated).
pub fn write_tracker(records: &[TrackerRecord]) -> String {
    let mut out = String::with_capacity(48 * (records.len() + 1));
    out.push_str(TRACKER_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineIssue {
    pub line: usize,
    pub reason: String,
}

/// Per-file accounting: `lines_kept + lines_skipped_irrelevant + lines_malformed == lines_total`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub lines_total: usize,
    pub lines_kept: usize,
    pub lines_skipped_irrelevant: usize,
    pub lines_malformed: usize,
    pub malformed_samples: Vec<LineIssue>,
    /// Non-fatal observations, e.g. unknown command methods read as `Internal`.
    pub notes: Vec<LineIssue>,
}

impl ParseReport {
    /// Fraction of lines that carried behavior data.
    pub fn relevance_ratio(&self) -> f64 {
        if self.lines_total == 0 {
            0.0
        } else {
            self.lines_kept as f64 / self.lines_total as f64
        }
    }

    pub fn merge(&mut self, other: &ParseReport) {
        self.lines_total += other.lines_total;
        self.lines_kept += other.lines_kept;
        self.lines_skipped_irrelevant += other.lines_skipped_irrelevant;
        self.lines_malformed += other.lines_malformed;
        for s in &other.malformed_samples {
            if self.malformed_samples.len() < MAX_MALFORMED_SAMPLES {
                self.malformed_samples.push(s.clone());
            }
        }
        for s in &other.notes {
            if self.notes.len() < MAX_MALFORMED_SAMPLES {
                self.notes.push(s.clone());
            }
        }
    }

    fn malformed(&mut self, line: usize, reason: impl fmt::Display) {
        self.lines_malformed += 1;
        if self.malformed_samples.len() < MAX_MALFORMED_SAMPLES {
            self.malformed_samples.push(LineIssue { line, reason: reason.to_string() });
        }
    }

    fn note(&mut self, line: usize, reason: impl fmt::Display) {
        if self.notes.len() < MAX_MALFORMED_SAMPLES {
            self.notes.push(LineIssue { line, reason: reason.to_string() });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("tracker header missing or wrong: expected `{TRACKER_HEADER}`")]
    MissingTrackerHeader,
}

enum LineClass {
    Irrelevant,
    Malformed(String),
    Journal(JournalRecord),
}

fn strip_eol(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

fn is_behavioral_type(token: &str) -> bool {
    token.starts_with("Jrn.") || token.starts_with("jrn.")
}

/// Splits ` "a" , "b" , "c"` into its quoted fragments.
fn quoted_fragments(mut rest: &str) -> Result<Vec<&str>, &'static str> {
    let mut out = Vec::new();
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            return Ok(out);
        }
        if out.is_empty() {
            // the leading comma is present when no method fragment precedes the details
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
            }
        } else {
            rest = rest.strip_prefix(',').ok_or("expected `,` between fragments")?.trim_start();
        }
        let body = rest.strip_prefix('"').ok_or("expected quoted fragment")?;
        let end = body.find('"').ok_or("unterminated quoted fragment")?;
        out.push(&body[..end]);
        rest = &body[end + 1..];
    }
}

fn classify_journal_line(line: &str, lineno: usize, report: &mut ParseReport) -> LineClass {
    let line = strip_eol(line);
    let Some((head, tail)) = line.split_once("; ") else {
        return if is_behavioral_type(line.trim_start()) {
            LineClass::Malformed("behavioral line without timestamp".into())
        } else {
            LineClass::Irrelevant
        };
    };
    let tail = tail.trim_start();
    let data_type = tail.split(' ').next().unwrap_or("");
    if !is_behavioral_type(data_type) {
        return LineClass::Irrelevant;
    }
    let Some(stamp) = head.strip_prefix("'C ") else {
        return LineClass::Malformed("missing `'C ` timestamp prefix".into());
    };
    let tick = match parse_journal_timestamp(stamp).and_then(|dt| to_ticks(&dt)) {
        Ok(t) => t,
        Err(e) => return LineClass::Malformed(alloc::format!("bad timestamp: {e}")),
    };
    let name = &data_type[4..];
    if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return LineClass::Malformed(alloc::format!("unknown kind token `{data_type}`"));
    }
    let kind = match name {
        "Command" => JournalKind::Command,
        "PushButton" => JournalKind::PushButton,
        "Transaction" => JournalKind::Transaction,
        _ => JournalKind::OtherJrn,
    };
    let fragments = match quoted_fragments(&tail[data_type.len()..]) {
        Ok(f) => f,
        Err(reason) => return LineClass::Malformed(reason.into()),
    };
    let (method, details) = match kind {
        JournalKind::Command => {
            let Some((m, rest)) = fragments.split_first() else {
                return LineClass::Malformed("command without method".into());
            };
            let method = match *m {
                "Ribbon" => CommandMethod::Ribbon,
                "AccelKey" => CommandMethod::AccelKey,
                "Internal" => CommandMethod::Internal,
                other => {
                    report.note(lineno, alloc::format!("unknown command method `{other}` read as Internal"));
                    CommandMethod::Internal
                }
            };
            (method, rest)
        }
        JournalKind::Transaction if fragments.is_empty() => {
            return LineClass::Malformed("transaction without status".into());
        }
        _ => (CommandMethod::None, &fragments[..]),
    };
    LineClass::Journal(JournalRecord {
        tick,
        kind,
        method,
        details: details.iter().map(|d| d.to_string()).collect(),
    })
}

/// Parses journal text lines. Never fails on content; every line is accounted
/// for in the report.
pub fn parse_journal<'a, I>(lines: I) -> (Vec<JournalRecord>, ParseReport)
where
    I: IntoIterator<Item = &'a str>,
{
    let mut records = Vec::new();
    let mut report = ParseReport::default();
    for (idx, line) in lines.into_iter().enumerate() {
        let lineno = idx + 1;
        report.lines_total += 1;
        match classify_journal_line(line, lineno, &mut report) {
            LineClass::Irrelevant => report.lines_skipped_irrelevant += 1,
            LineClass::Malformed(reason) => report.malformed(lineno, reason),
            LineClass::Journal(rec) => {
                report.lines_kept += 1;
                records.push(rec);
            }
        }
    }
    (records, report)
}

fn parse_tracker_line(line: &str) -> Result<TrackerRecord, String> {
    let mut fields = line.splitn(5, ',');
    let ticks = fields.next().unwrap_or("");
    let _timestamp = fields.next().ok_or("missing timestamp column")?;
    let kind = fields.next().ok_or("missing record_type column")?;
    let count = fields.next().ok_or("missing count column")?;
    let payload = fields.next().ok_or("missing payload column")?;
    let tick: u64 = ticks
        .parse()
        .map_err(|_| alloc::format!("non-integer tick `{ticks}`"))?;
    let kind = TrackerKind::parse(kind).ok_or_else(|| alloc::format!("unknown record_type `{kind}`"))?;
    let count: u32 = count
        .parse()
        .map_err(|_| alloc::format!("non-integer count `{count}`"))?;
    if count == 0 {
        return Err("count must be at least 1".into());
    }
    if kind == TrackerKind::KeyPress && count != 1 {
        return Err("KeyPress count must be 1".into());
    }
    Ok(TrackerRecord { tick: TickTime(tick), kind, count, payload: payload.to_string() })
}

/// Parses tracker text. The first line must be the exact header; blank lines and
/// bad rows are reported as malformed and skipped.
pub fn parse_tracker<'a, I>(lines: I) -> Result<(Vec<TrackerRecord>, ParseReport), IngestError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut iter = lines.into_iter();
    match iter.next() {
        Some(h) if strip_eol(h).trim_start_matches('\u{feff}') == TRACKER_HEADER => {}
        _ => return Err(IngestError::MissingTrackerHeader),
    }
    let mut records = Vec::new();
    let mut report = ParseReport { lines_total: 1, lines_skipped_irrelevant: 1, ..Default::default() };
    for (idx, line) in iter.enumerate() {
        let lineno = idx + 2;
        report.lines_total += 1;
        let line = strip_eol(line);
        if line.trim().is_empty() {
            report.malformed(lineno, "blank line");
            continue;
        }
        match parse_tracker_line(line) {
            Ok(r) => {
                report.lines_kept += 1;
                records.push(r);
            }
            Err(reason) => report.malformed(lineno, reason),
        }
    }
    Ok((records, report))
}
