//! Comma-separated tables exchanged between pipeline stages.
//!
//! Every reader checks the header exactly and reports the 1-based line number
//! of the first bad row. Floats are written in shortest round-trip form, so a
//! table read back yields bit-identical values.

use bimq_core::features::{FEATURE_COUNT, FEATURE_NAMES};
use bimq_core::ingest::CommandMethod;
use bimq_core::learn::Dataset;
use bimq_core::quality::{AssessmentInput, QualityScore};
use bimq_core::session::{EventCategory, SessionEvent, Source};
use bimq_core::TickTime;

pub const SESSION_HEADER: [&str; 5] = ["ticks", "source", "category", "method", "count"];
pub const WINDOWS_HEADER: [&str; 4] = ["designer_id", "start", "end", "label"];
pub const SCORES_HEADER: [&str; 6] =
    ["designer_id", "arch_completeness", "arch_accuracy", "arch_complexity", "struct_completeness", "total"];
pub const ASSESSMENT_HEADER: [&str; 5] =
    ["designer_id", "arch_completeness_delta", "arch_error_delta", "complexity_adjustment", "struct_delta"];
pub const BEESWARM_HEADER: [&str; 4] = ["sample_id", "feature", "phi", "feature_value"];
const FEATURE_KEYS: [&str; 3] = ["designer_id", "window_start", "label"];

/// A table-level failure: the 1-based line (0 for the whole file) and why.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableError {
    pub line: u64,
    pub message: String,
}

impl std::fmt::Display for TableError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for TableError {}

fn err(line: u64, message: impl Into<String>) -> TableError {
    TableError { line, message: message.into() }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("records are built from UTF-8 strings")
}

fn put<I, S>(w: &mut csv::Writer<Vec<u8>>, record: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(record).expect("writing to memory cannot fail");
}

/// Reads all records after checking the header. Yields `(line, record)`.
fn records(text: &str, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>, TableError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut rows = rdr.records();
    match rows.next() {
        None => return Err(err(0, "empty file, missing header")),
        Some(h) => {
            let h = h.map_err(|e| err(1, e.to_string()))?;
            if h.iter().ne(header.iter().copied()) {
                return Err(err(1, format!("expected header `{}`", header.join(","))));
            }
        }
    }
    for row in rows {
        let row = row.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != header.len() {
            return Err(err(line, format!("expected {} fields, found {}", header.len(), row.len())));
        }
        out.push((line, row));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(line: u64, row: &csv::StringRecord, i: usize, name: &str) -> Result<T, TableError> {
    let raw = &row[i];
    raw.parse().map_err(|_| err(line, format!("bad {name} `{raw}`")))
}

fn parse_method(s: &str) -> Option<CommandMethod> {
    Some(match s {
        "Ribbon" => CommandMethod::Ribbon,
        "AccelKey" => CommandMethod::AccelKey,
        "Internal" => CommandMethod::Internal,
        "" => CommandMethod::None,
        _ => return None,
    })
}

fn category_token(c: EventCategory) -> &'static str {
    match c {
        EventCategory::Command { undo: false, .. } => "Command",
        EventCategory::Command { undo: true, .. } => "UndoCommand",
        EventCategory::PushButton => "PushButton",
        EventCategory::TransactionSuccess => "TransactionSuccess",
        EventCategory::OtherTransaction => "OtherTransaction",
        EventCategory::ElementsAdded(_) => "ElementsAdded",
        EventCategory::ElementsDeleted(_) => "ElementsDeleted",
        EventCategory::ElementsModified(_) => "ElementsModified",
        EventCategory::KeyPress => "KeyPress",
        EventCategory::OtherJrn => "OtherJrn",
    }
}

fn parse_category(token: &str, method: CommandMethod, count: u32) -> Result<EventCategory, String> {
    let category = match token {
        "Command" | "UndoCommand" => {
            if method == CommandMethod::None {
                return Err("command without a method".into());
            }
            EventCategory::Command { method, undo: token == "UndoCommand" }
        }
        "PushButton" => EventCategory::PushButton,
        "TransactionSuccess" => EventCategory::TransactionSuccess,
        "OtherTransaction" => EventCategory::OtherTransaction,
        "ElementsAdded" => EventCategory::ElementsAdded(count),
        "ElementsDeleted" => EventCategory::ElementsDeleted(count),
        "ElementsModified" => EventCategory::ElementsModified(count),
        "KeyPress" => EventCategory::KeyPress,
        "OtherJrn" => EventCategory::OtherJrn,
        _ => return Err(format!("unknown category `{token}`")),
    };
    if !matches!(category, EventCategory::Command { .. }) && method != CommandMethod::None {
        return Err(format!("method on a non-command `{token}` event"));
    }
    if category.count() != count {
        return Err(format!("count {count} is not valid for `{token}`"));
    }
    if count == 0 {
        return Err("count must be at least 1".into());
    }
    Ok(category)
}

/// On-disk form of an integrated session.
pub fn write_session(events: &[SessionEvent]) -> String {
    let mut w = writer();
    put(&mut w, SESSION_HEADER);
    for e in events {
        let method = match e.category {
            EventCategory::Command { method, .. } => method.as_str(),
            _ => "",
        };
        put(
            &mut w,
            [
                e.tick.0.to_string().as_str(),
                e.source().as_str(),
                category_token(e.category),
                method,
                e.category.count().to_string().as_str(),
            ],
        );
    }
    finish(w)
}

pub fn read_session(text: &str) -> Result<Vec<SessionEvent>, TableError> {
    let mut events = Vec::new();
    for (line, row) in records(text, &SESSION_HEADER)? {
        let tick: u64 = field(line, &row, 0, "ticks")?;
        let source = match &row[1] {
            "Journal" => Source::Journal,
            "Tracker" => Source::Tracker,
            s => return Err(err(line, format!("unknown source `{s}`"))),
        };
        let method = parse_method(&row[3]).ok_or_else(|| err(line, format!("unknown method `{}`", &row[3])))?;
        let count: u32 = field(line, &row, 4, "count")?;
        let category = parse_category(&row[2], method, count).map_err(|m| err(line, m))?;
        if category.source() != source {
            return Err(err(line, format!("`{}` events come from the {} source", &row[2], category.source().as_str())));
        }
        events.push(SessionEvent { tick: TickTime(tick), category });
    }
    Ok(events)
}

/// One row of the window manifest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowRow {
    pub designer_id: String,
    pub start: usize,
    pub end: usize,
    pub label: i32,
}

pub fn write_windows(rows: &[WindowRow]) -> String {
    let mut w = writer();
    put(&mut w, WINDOWS_HEADER);
    for r in rows {
        put(&mut w, [r.designer_id.clone(), r.start.to_string(), r.end.to_string(), r.label.to_string()]);
    }
    finish(w)
}

pub fn read_windows(text: &str) -> Result<Vec<WindowRow>, TableError> {
    records(text, &WINDOWS_HEADER)?
        .into_iter()
        .map(|(line, row)| {
            let r = WindowRow {
                designer_id: row[0].to_string(),
                start: field(line, &row, 1, "start")?,
                end: field(line, &row, 2, "end")?,
                label: field(line, &row, 3, "label")?,
            };
            if r.end <= r.start {
                return Err(err(line, "window end must exceed its start"));
            }
            Ok(r)
        })
        .collect()
}

/// Key columns of a feature-matrix row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleKey {
    pub designer_id: String,
    pub window_start: usize,
    pub label: i32,
}

pub fn feature_header() -> Vec<&'static str> {
    FEATURE_KEYS.iter().chain(FEATURE_NAMES.iter()).copied().collect()
}

pub fn write_features(keys: &[SampleKey], data: &Dataset) -> String {
    assert_eq!(keys.len(), data.len(), "one key per feature row");
    let mut w = writer();
    put(&mut w, feature_header());
    for (k, row) in keys.iter().zip(data.rows()) {
        let mut rec = vec![k.designer_id.clone(), k.window_start.to_string(), k.label.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        put(&mut w, rec);
    }
    finish(w)
}

/// Reads a feature matrix; targets are the labels and groups the designer ids.
pub fn read_features(text: &str) -> Result<(Vec<SampleKey>, Dataset), TableError> {
    let header = feature_header();
    let rows = records(text, &header)?;
    let mut keys = Vec::with_capacity(rows.len());
    let mut x = Vec::with_capacity(rows.len() * FEATURE_COUNT);
    for (line, row) in &rows {
        let key = SampleKey {
            designer_id: row[0].to_string(),
            window_start: field(*line, row, 1, "window_start")?,
            label: field(*line, row, 2, "label")?,
        };
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            let v: f64 = field(*line, row, i + FEATURE_KEYS.len(), name)?;
            if !v.is_finite() {
                return Err(err(*line, format!("non-finite {name}")));
            }
            x.push(v);
        }
        keys.push(key);
    }
    let y = keys.iter().map(|k| k.label as f64).collect();
    let groups = keys.iter().map(|k| k.designer_id.clone()).collect();
    let data = Dataset::new(FEATURE_COUNT, x, y, groups).map_err(|e| err(0, e.to_string()))?;
    Ok((keys, data))
}

pub fn write_scores(rows: &[(String, QualityScore)]) -> String {
    let mut w = writer();
    put(&mut w, SCORES_HEADER);
    for (id, s) in rows {
        put(
            &mut w,
            [
                id.clone(),
                s.arch_completeness.to_string(),
                s.arch_accuracy.to_string(),
                s.arch_complexity.to_string(),
                s.struct_completeness.to_string(),
                s.total.to_string(),
            ],
        );
    }
    finish(w)
}

/// Reads a score sheet; the total must equal the sum of the four parts.
pub fn read_scores(text: &str) -> Result<Vec<(String, QualityScore)>, TableError> {
    let mut seen = std::collections::BTreeSet::new();
    records(text, &SCORES_HEADER)?
        .into_iter()
        .map(|(line, row)| {
            let s = QualityScore {
                arch_completeness: field(line, &row, 1, "arch_completeness")?,
                arch_accuracy: field(line, &row, 2, "arch_accuracy")?,
                arch_complexity: field(line, &row, 3, "arch_complexity")?,
                struct_completeness: field(line, &row, 4, "struct_completeness")?,
                total: field(line, &row, 5, "total")?,
            };
            if s.arch_completeness + s.arch_accuracy + s.arch_complexity + s.struct_completeness != s.total {
                return Err(err(line, "total is not the sum of the parts"));
            }
            if !seen.insert(row[0].to_string()) {
                return Err(err(line, format!("designer `{}` listed twice", &row[0])));
            }
            Ok((row[0].to_string(), s))
        })
        .collect()
}

pub fn write_assessments(rows: &[(String, AssessmentInput)]) -> String {
    let mut w = writer();
    put(&mut w, ASSESSMENT_HEADER);
    for (id, a) in rows {
        put(
            &mut w,
            [
                id.clone(),
                a.arch_completeness_delta.to_string(),
                a.arch_error_delta.to_string(),
                a.complexity_adjustment.to_string(),
                a.struct_delta.to_string(),
            ],
        );
    }
    finish(w)
}

/// Assessment rows as (line, designer id, input).
pub type AssessmentRows = Vec<(u64, String, AssessmentInput)>;

/// Reads an assessment file. Bad rows are returned separately so the rest
/// can still be scored.
pub fn read_assessments(text: &str) -> Result<(AssessmentRows, Vec<TableError>), TableError> {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (line, row) in records(text, &ASSESSMENT_HEADER)? {
        let parsed = (|| {
            Ok::<_, TableError>(AssessmentInput {
                arch_completeness_delta: field(line, &row, 1, "arch_completeness_delta")?,
                arch_error_delta: field(line, &row, 2, "arch_error_delta")?,
                complexity_adjustment: field(line, &row, 3, "complexity_adjustment")?,
                struct_delta: field(line, &row, 4, "struct_delta")?,
            })
        })();
        match parsed {
            Ok(a) => ok.push((line, row[0].to_string(), a)),
            Err(e) => bad.push(e),
        }
    }
    Ok((ok, bad))
}

/// One beeswarm point: a sample's attribution for one feature.
#[derive(Clone, Debug, PartialEq)]
pub struct BeeswarmRow {
    pub sample_id: usize,
    pub feature: &'static str,
    pub phi: f64,
    pub feature_value: f64,
}

pub fn write_beeswarm(rows: &[BeeswarmRow]) -> String {
    let mut w = writer();
    put(&mut w, BEESWARM_HEADER);
    for r in rows {
        put(&mut w, [r.sample_id.to_string(), r.feature.to_string(), r.phi.to_string(), r.feature_value.to_string()]);
    }
    finish(w)
}

/// Generic table writer for reports with string cells.
pub fn write_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = writer();
    put(&mut w, header);
    for r in rows {
        put(&mut w, r);
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn session_round_trip_covers_every_category() {
        let cats = [
            EventCategory::Command { method: CommandMethod::Ribbon, undo: false },
            EventCategory::Command { method: CommandMethod::AccelKey, undo: true },
            EventCategory::Command { method: CommandMethod::Internal, undo: false },
            EventCategory::PushButton,
            EventCategory::TransactionSuccess,
            EventCategory::OtherTransaction,
            EventCategory::ElementsAdded(4),
            EventCategory::ElementsDeleted(2),
            EventCategory::ElementsModified(7),
            EventCategory::KeyPress,
            EventCategory::OtherJrn,
        ];
        let events: Vec<_> =
            cats.iter().enumerate().map(|(i, &c)| SessionEvent { tick: TickTime(1000 + i as u64), category: c }).collect();
        let text = write_session(&events);
        assert!(text.starts_with("ticks,source,category,method,count\n1000,Journal,Command,Ribbon,1\n"));
        assert_eq!(read_session(&text).unwrap(), events);
    }

    #[test]
    fn session_rejects_inconsistent_rows() {
        let bad = "ticks,source,category,method,count\n5,Journal,ElementsAdded,,3\n";
        assert_eq!(read_session(bad).unwrap_err().line, 2);
        let bad = "ticks,source,category,method,count\n5,Tracker,KeyPress,,2\n";
        assert!(read_session(bad).is_err());
        let bad = "ticks,source,kind,method,count\n";
        assert_eq!(read_session(bad).unwrap_err().line, 1);
    }

    #[test]
    fn features_round_trip_bit_exact() {
        let mut row = [0.0; FEATURE_COUNT];
        for (i, v) in row.iter_mut().enumerate() {
            *v = (i as f64 + 0.1) / 3.0;
        }
        let data = Dataset::from_rows(&[row.to_vec(), row.map(|v| v * 1e-7).to_vec()], vec![70.0, 55.0], vec!["D1".into(), "D2".into()])
            .unwrap();
        let keys = vec![
            SampleKey { designer_id: "D1".into(), window_start: 0, label: 70 },
            SampleKey { designer_id: "D2".into(), window_start: 500, label: 55 },
        ];
        let text = write_features(&keys, &data);
        let (k2, d2) = read_features(&text).unwrap();
        assert_eq!(k2, keys);
        assert_eq!(d2, data);
    }

    #[test]
    fn score_sheet_checks_totals() {
        let ok = "designer_id,arch_completeness,arch_accuracy,arch_complexity,struct_completeness,total\nD1,20,20,20,10,70\n";
        assert_eq!(read_scores(ok).unwrap()[0].1.total, 70);
        let bad = "designer_id,arch_completeness,arch_accuracy,arch_complexity,struct_completeness,total\nD1,20,20,20,10,71\n";
        assert_eq!(read_scores(bad).unwrap_err().line, 2);
        let empty = "designer_id,arch_completeness,arch_accuracy,arch_complexity,struct_completeness,total\n";
        assert!(read_scores(empty).unwrap().is_empty());
    }
}
