//! Pipeline stages over persisted intermediates.
//!
//! Every stage reads its inputs from the run directory (or the corpus) and
//! writes its outputs back, so running the stages one by one gives exactly the
//! files `run` produces. Stage timings go to `timings.json`; every other file
//! is a pure function of the configuration and the corpus.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bimq_core::explain::{aggregate, background_rows, explain_rows, ExplainConfig};
use bimq_core::features::{FeatureIndex, FEATURE_NAMES};
use bimq_core::ingest::{parse_journal, parse_tracker, JournalRecord, ParseReport, TrackerRecord};
use bimq_core::learn::{
    compare_models, evaluate, fit_seed, split, Dataset, Leaderboard, LearnError, Model, ModelSpec, Predict,
    SplitConfig,
};
use bimq_core::quality;
use bimq_core::session::{clean, concat_sessions, integrate as merge, CleaningDecision, DesignerSequence, FileSummary, Session};
use bimq_core::sweep::{run_sweep, DesignerSeries, SweepResult, SweepSettings};
use bimq_core::windows::{make_windows, WindowConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::corpus::{self, DesignerDir};
use crate::error::{read_json, read_text, write_json, write_text, Error, Result};
use crate::formats::{self, BeeswarmRow, SampleKey, TableError, WindowRow};
use crate::model_file::ModelFile;

pub const CONFIG_FILE: &str = "config.json";
pub const PARSE_REPORTS_FILE: &str = "parse_reports.json";
pub const INTEGRATED_DIR: &str = "integrated";
pub const WINDOWS_FILE: &str = "windows.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const LEADERBOARD_JSON: &str = "leaderboard.json";
pub const LEADERBOARD_CSV: &str = "leaderboard.csv";
pub const MODEL_FILE: &str = "model.json";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const IMPORTANCE_FILE: &str = "importance.json";
pub const BEESWARM_FILE: &str = "beeswarm.csv";
pub const REPORT_FILE: &str = "report.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const SWEEP_JSON: &str = "sweep.json";
pub const SWEEP_CSV: &str = "sweep.csv";

/// Validates the configuration and makes sure its run directory exists.
pub fn prepare(cfg: &PipelineConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let dir = cfg.run_dir();
    write_json("setup", &dir.join(CONFIG_FILE), cfg)?;
    Ok(dir)
}

/// Merges one stage's wall time into `timings.json`.
pub fn record_timing(run_dir: &Path, stage: &str, seconds: f64) -> Result<()> {
    let path = run_dir.join(TIMINGS_FILE);
    let mut timings: BTreeMap<String, f64> =
        if path.exists() { read_json("timings", &path).unwrap_or_default() } else { BTreeMap::new() };
    timings.insert(stage.to_string(), seconds);
    write_json("timings", &path, &timings)
}

fn table_err(stage: &'static str, path: &Path, e: TableError) -> Error {
    Error::data(stage, path, e)
}

fn learn_err(stage: &'static str, e: LearnError) -> Error {
    Error::infeasible(stage, e)
}

// ---- integrate -------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    /// Path relative to the corpus root.
    pub file: String,
    pub report: ParseReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub designer_id: String,
    pub session: usize,
    pub journal_bytes: u64,
    pub journal_records: usize,
    pub tracker_records: usize,
    pub decision: CleaningDecision,
    /// Merged event count; zero when rejected.
    pub events: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrateSummary {
    pub totals: ParseReport,
    pub files: Vec<FileReport>,
    pub sessions: Vec<SessionOutcome>,
    pub designers_found: usize,
    /// Designers with at least one accepted session.
    pub designers_kept: Vec<String>,
}

struct DesignerIngest {
    files: Vec<FileReport>,
    sessions: Vec<SessionOutcome>,
    accepted: Vec<(usize, Session)>,
}

/// Records and reports of one session pair, plus the journal size in bytes.
pub type ParsedPair = (Vec<JournalRecord>, ParseReport, Vec<TrackerRecord>, ParseReport, u64);

/// Parses one journal/tracker pair from disk.
pub fn parse_pair(journal: &Path, tracker: &Path) -> Result<ParsedPair> {
    let jtext = read_text("ingest", journal)?;
    let (jrecs, jrep) = parse_journal(jtext.lines());
    let ttext = read_text("ingest", tracker)?;
    let (trecs, trep) = parse_tracker(ttext.lines()).map_err(|e| Error::data("ingest", tracker, e))?;
    Ok((jrecs, jrep, trecs, trep, jtext.len() as u64))
}

fn ingest_designer(cfg: &PipelineConfig, d: &DesignerDir) -> Result<DesignerIngest> {
    let mut out = DesignerIngest { files: Vec::new(), sessions: Vec::new(), accepted: Vec::new() };
    for s in &d.sessions {
        let (jrecs, jrep, trecs, trep, jbytes) = parse_pair(&s.journal, &s.tracker)?;
        out.files.push(FileReport { file: format!("{}/{}", d.designer_id, corpus::journal_name(s.index)), report: jrep });
        out.files.push(FileReport { file: format!("{}/{}", d.designer_id, corpus::tracker_name(s.index)), report: trep });
        let decision = clean(&FileSummary::of_journal(jbytes, &jrecs), &FileSummary::of_tracker(0, &trecs), &cfg.cleaning);
        let mut events = 0;
        if decision.accepted {
            let session = merge(&s.index.to_string(), &d.designer_id, &jrecs, &trecs)
                .map_err(|e| Error::data("sessionize", &s.journal, e))?;
            events = session.events.len();
            out.accepted.push((s.index, session));
        }
        out.sessions.push(SessionOutcome {
            designer_id: d.designer_id.clone(),
            session: s.index,
            journal_bytes: jbytes,
            journal_records: jrecs.len(),
            tracker_records: trecs.len(),
            decision,
            events,
        });
    }
    Ok(out)
}

fn session_file(run_dir: &Path, designer: &str, k: usize) -> PathBuf {
    run_dir.join(INTEGRATED_DIR).join(designer).join(format!("session_{k}.csv"))
}

/// Parses, cleans and merges every session, writing one integrated file per
/// accepted session and `parse_reports.json`.
pub fn integrate(cfg: &PipelineConfig) -> Result<IntegrateSummary> {
    let run_dir = prepare(cfg)?;
    let designers = corpus::discover("ingest", &cfg.corpus)?;
    let results: Vec<DesignerIngest> =
        designers.par_iter().map(|d| ingest_designer(cfg, d)).collect::<Result<_>>()?;

    let integrated = run_dir.join(INTEGRATED_DIR);
    if integrated.exists() {
        std::fs::remove_dir_all(&integrated).map_err(|e| Error::data("sessionize", &integrated, e))?;
    }
    let mut summary = IntegrateSummary {
        totals: ParseReport::default(),
        files: Vec::new(),
        sessions: Vec::new(),
        designers_found: designers.len(),
        designers_kept: Vec::new(),
    };
    for (d, r) in designers.iter().zip(results) {
        for f in &r.files {
            summary.totals.merge(&f.report);
        }
        if !r.accepted.is_empty() {
            summary.designers_kept.push(d.designer_id.clone());
        }
        r.accepted.par_iter().try_for_each(|(k, s)| {
            write_text("sessionize", &session_file(&run_dir, &d.designer_id, *k), &formats::write_session(&s.events))
        })?;
        summary.files.extend(r.files);
        summary.sessions.extend(r.sessions);
    }
    write_json("ingest", &run_dir.join(PARSE_REPORTS_FILE), &summary)?;
    if summary.designers_kept.is_empty() {
        return Err(Error::data("sessionize", &cfg.corpus, "every session was rejected by the cleaning policy"));
    }
    Ok(summary)
}

/// Reads the integrated sessions back, one merged sequence per designer,
/// in designer order.
pub fn load_sequences(run_dir: &Path) -> Result<Vec<DesignerSequence>> {
    const STAGE: &str = "sessionize";
    let root = run_dir.join(INTEGRATED_DIR);
    let summary: IntegrateSummary = read_json(STAGE, &run_dir.join(PARSE_REPORTS_FILE))?;
    summary
        .designers_kept
        .par_iter()
        .map(|id| {
            let mut ks: Vec<usize> = summary
                .sessions
                .iter()
                .filter(|s| &s.designer_id == id && s.decision.accepted)
                .map(|s| s.session)
                .collect();
            ks.sort_unstable();
            let sessions = ks
                .into_iter()
                .map(|k| {
                    let path = session_file(run_dir, id, k);
                    let events = formats::read_session(&read_text(STAGE, &path)?).map_err(|e| table_err(STAGE, &path, e))?;
                    Ok(Session { session_id: k.to_string(), designer_id: id.clone(), events })
                })
                .collect::<Result<Vec<_>>>()?;
            concat_sessions(&sessions).map_err(|e| Error::data(STAGE, root.join(id), e))
        })
        .collect()
}

// ---- windows ---------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub n_samples: usize,
    pub expected_samples: usize,
    pub per_designer: BTreeMap<String, usize>,
}

fn labels_for(cfg: &PipelineConfig, sequences: &[DesignerSequence]) -> Result<Vec<i32>> {
    let labels = corpus::read_labels("windows", &cfg.corpus)?;
    sequences
        .iter()
        .map(|s| {
            labels.get(&s.designer_id).copied().ok_or_else(|| {
                Error::data("windows", cfg.corpus.join(corpus::SCORES_FILE), format!("designer `{}` has no score", s.designer_id))
            })
        })
        .collect()
}

/// Crops every designer sequence and writes the labelled window manifest.
pub fn window(cfg: &PipelineConfig) -> Result<WindowSummary> {
    let run_dir = prepare(cfg)?;
    let sequences = load_sequences(&run_dir)?;
    let labels = labels_for(cfg, &sequences)?;
    let mut rows = Vec::new();
    let mut summary = WindowSummary { n_samples: 0, expected_samples: 0, per_designer: BTreeMap::new() };
    for (s, &label) in sequences.iter().zip(&labels) {
        let windows = make_windows(s.len(), &cfg.window);
        summary.expected_samples += cfg.window.count_for(s.len());
        summary.per_designer.insert(s.designer_id.clone(), windows.len());
        rows.extend(windows.iter().map(|w| WindowRow { designer_id: s.designer_id.clone(), start: w.start, end: w.end, label }));
    }
    summary.n_samples = rows.len();
    write_text("windows", &run_dir.join(WINDOWS_FILE), &formats::write_windows(&rows))?;
    if rows.is_empty() {
        return Err(Error::infeasible(
            "windows",
            format!("no sequence reaches the window length {} and short windows are disabled", cfg.window.length),
        ));
    }
    Ok(summary)
}

fn read_window_rows(run_dir: &Path) -> Result<Vec<WindowRow>> {
    let path = run_dir.join(WINDOWS_FILE);
    formats::read_windows(&read_text("features", &path)?).map_err(|e| table_err("features", &path, e))
}

// ---- features --------------------------------------------------------------

/// Computes the 29 features of every manifest window.
pub fn features(cfg: &PipelineConfig) -> Result<usize> {
    const STAGE: &str = "features";
    let run_dir = prepare(cfg)?;
    let sequences = load_sequences(&run_dir)?;
    let rows = read_window_rows(&run_dir)?;
    let indexes: BTreeMap<&str, FeatureIndex> =
        sequences.par_iter().map(|s| (s.designer_id.as_str(), FeatureIndex::new(&s.events))).collect();
    let manifest = run_dir.join(WINDOWS_FILE);
    let vectors = rows
        .par_iter()
        .map(|r| {
            let index = indexes
                .get(r.designer_id.as_str())
                .ok_or_else(|| Error::data(STAGE, &manifest, format!("no integrated sequence for `{}`", r.designer_id)))?;
            if r.end > index.len() {
                return Err(Error::data(STAGE, &manifest, format!("window {}..{} exceeds `{}`", r.start, r.end, r.designer_id)));
            }
            let range = bimq_core::windows::WindowRange { start: r.start, end: r.end, short: r.end - r.start < cfg.window.length };
            index.features(&range).map_err(|e| Error::data(STAGE, &manifest, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let keys: Vec<SampleKey> = rows
        .iter()
        .map(|r| SampleKey { designer_id: r.designer_id.clone(), window_start: r.start, label: r.label })
        .collect();
    let x = vectors.iter().flat_map(|v| v.as_slice().iter().copied()).collect();
    let y = keys.iter().map(|k| k.label as f64).collect();
    let groups = keys.iter().map(|k| k.designer_id.clone()).collect();
    let data = Dataset::new(FEATURE_NAMES.len(), x, y, groups).map_err(|e| Error::data(STAGE, &manifest, e))?;
    write_text(STAGE, &run_dir.join(FEATURES_FILE), &formats::write_features(&keys, &data))?;
    Ok(data.len())
}

pub fn load_features(stage: &'static str, run_dir: &Path) -> Result<(Vec<SampleKey>, Dataset)> {
    let path = run_dir.join(FEATURES_FILE);
    formats::read_features(&read_text(stage, &path)?).map_err(|e| table_err(stage, &path, e))
}

// ---- train -----------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub name: String,
    pub order: usize,
    pub train_rmse: Option<f64>,
    pub train_r2: Option<f64>,
    pub test_rmse: Option<f64>,
    pub test_r2: Option<f64>,
    /// First failure across seeds, if any seed failed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedLeaderboard {
    pub seed: u64,
    pub leaderboard: Leaderboard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub n_samples: usize,
    pub per_seed: Vec<SeedLeaderboard>,
    /// Ranked by mean test R², then mean test RMSE, then suite order; failed models last.
    pub mean: Vec<MeanRow>,
    pub chosen: String,
}

fn mean_rows(suite: &[ModelSpec], boards: &[SeedLeaderboard]) -> Vec<MeanRow> {
    let mut rows: Vec<MeanRow> = suite
        .iter()
        .enumerate()
        .map(|(order, spec)| {
            let name = spec.name();
            let mut sums = [0.0; 4];
            let mut error = None;
            for b in boards {
                let row = b.leaderboard.rows.iter().find(|r| r.order == order).expect("every model has a row");
                match &row.result {
                    Ok(s) => {
                        for (acc, v) in sums.iter_mut().zip([s.train_rmse, s.train_r2, s.test_rmse, s.test_r2]) {
                            *acc += v;
                        }
                    }
                    Err(e) => {
                        error.get_or_insert_with(|| format!("seed {}: {e}", b.seed));
                    }
                }
            }
            let n = boards.len() as f64;
            let m = |i: usize| error.is_none().then(|| sums[i] / n);
            MeanRow { name, order, train_rmse: m(0), train_r2: m(1), test_rmse: m(2), test_r2: m(3), error }
        })
        .collect();
    rows.sort_by(|a, b| match (a.test_r2, b.test_r2) {
        (Some(ra), Some(rb)) => rb
            .total_cmp(&ra)
            .then(a.test_rmse.unwrap().total_cmp(&b.test_rmse.unwrap()))
            .then(a.order.cmp(&b.order)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.order.cmp(&b.order),
    });
    rows
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn leaderboard_csv(summary: &TrainSummary) -> String {
    let mut rows = Vec::new();
    for b in &summary.per_seed {
        for (rank, r) in b.leaderboard.rows.iter().enumerate() {
            let (m, e) = match &r.result {
                Ok(s) => ([s.train_rmse, s.train_r2, s.test_rmse, s.test_r2].map(|v| v.to_string()), String::new()),
                Err(e) => (Default::default(), e.clone()),
            };
            let mut row = vec![b.seed.to_string(), (rank + 1).to_string(), r.name.clone()];
            row.extend(m);
            row.push(e);
            rows.push(row);
        }
    }
    for (rank, r) in summary.mean.iter().enumerate() {
        rows.push(vec![
            "mean".into(),
            (rank + 1).to_string(),
            r.name.clone(),
            fmt_opt(r.train_rmse),
            fmt_opt(r.train_r2),
            fmt_opt(r.test_rmse),
            fmt_opt(r.test_r2),
            r.error.clone().unwrap_or_default(),
        ]);
    }
    formats::write_table(&["seed", "rank", "model", "train_rmse", "train_r2", "test_rmse", "test_r2", "error"], &rows)
}

/// Fits the configured model on the primary split's training rows, seeded
/// exactly as the leaderboard seeds it.
pub fn fit_final(spec: &ModelSpec, data: &Dataset, split_cfg: &SplitConfig) -> Result<Model> {
    let (train, _) = split(data, split_cfg).map_err(|e| learn_err("train", e))?;
    spec.fit(&train, fit_seed(split_cfg.seed)).map_err(|e| learn_err("train", e))
}

/// Compares the suite over every seed, then persists the chosen model.
pub fn train(cfg: &PipelineConfig) -> Result<TrainSummary> {
    const STAGE: &str = "train";
    let run_dir = prepare(cfg)?;
    let (_, data) = load_features(STAGE, &run_dir)?;
    let per_seed = cfg
        .seeds
        .iter()
        .map(|&seed| {
            let split_cfg = SplitConfig { seed, ..cfg.split.clone() };
            let leaderboard = compare_models(&data, &cfg.models, &split_cfg).map_err(|e| learn_err(STAGE, e))?;
            Ok(SeedLeaderboard { seed, leaderboard })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_rows(&cfg.models, &per_seed);
    let chosen = match &cfg.explain.model {
        Some(name) => name.clone(),
        None => mean
            .iter()
            .find(|r| r.error.is_none())
            .map(|r| r.name.clone())
            .ok_or_else(|| Error::infeasible(STAGE, "every model failed on some seed"))?,
    };
    let summary = TrainSummary { n_samples: data.len(), per_seed, mean, chosen };
    write_json(STAGE, &run_dir.join(LEADERBOARD_JSON), &summary)?;
    write_text(STAGE, &run_dir.join(LEADERBOARD_CSV), &leaderboard_csv(&summary))?;

    let spec = cfg.models.iter().find(|m| m.name() == summary.chosen).expect("validated model name");
    let model = fit_final(spec, &data, &cfg.split)?;
    write_text(STAGE, &run_dir.join(MODEL_FILE), &ModelFile::from_model(&model).to_json())?;
    Ok(summary)
}

pub fn load_model(stage: &'static str, path: &Path) -> Result<Model> {
    let text = read_text(stage, path)?;
    ModelFile::from_json(&text).and_then(|f| f.to_model()).map_err(|e| Error::data(stage, path, e))
}

// ---- evaluate --------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub r2: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub model: String,
    pub split_seed: u64,
    pub train: Metrics,
    pub test: Metrics,
}

fn evaluation_of(model: &Model, data: &Dataset, split_cfg: &SplitConfig) -> Result<Evaluation> {
    const STAGE: &str = "evaluate";
    if model.n_features() != data.n_features {
        return Err(Error::usage(format!("model expects {} features, table has {}", model.n_features(), data.n_features)));
    }
    let (train, test) = split(data, split_cfg).map_err(|e| learn_err(STAGE, e))?;
    let m = |d: &Dataset| {
        let r = evaluate(model, d).map_err(|e| learn_err(STAGE, e))?;
        Ok::<_, Error>(Metrics { rmse: r.rmse, r2: r.r2, n: r.n_test })
    };
    Ok(Evaluation { model: model.name(), split_seed: split_cfg.seed, train: m(&train)?, test: m(&test)? })
}

/// Scores the persisted model on the primary split.
pub fn evaluate_stage(cfg: &PipelineConfig) -> Result<Evaluation> {
    let run_dir = prepare(cfg)?;
    let model = load_model("evaluate", &run_dir.join(MODEL_FILE))?;
    let (_, data) = load_features("evaluate", &run_dir)?;
    let ev = evaluation_of(&model, &data, &cfg.split)?;
    write_json("evaluate", &run_dir.join(EVALUATION_FILE), &ev)?;
    Ok(ev)
}

// ---- explain ---------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub rank: usize,
    pub feature: String,
    pub mean_abs_phi: f64,
    /// Pearson correlation between feature value and attribution.
    pub direction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub model: String,
    pub n_explained: usize,
    pub n_background: usize,
    pub max_local_accuracy_error: f64,
    pub ranking: Vec<ImportanceEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub designers_found: usize,
    pub designers_used: usize,
    pub sessions: usize,
    pub sessions_accepted: usize,
    pub lines_total: usize,
    pub lines_kept: usize,
    pub lines_malformed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub corpus: CorpusSummary,
    pub window: WindowConfig,
    pub samples: WindowSummary,
    pub leaderboard: Vec<MeanRow>,
    pub chosen_model: String,
    pub evaluation: Evaluation,
    pub importance: Vec<ImportanceEntry>,
    /// Wall-clock stage timings live in this file so the report stays reproducible.
    pub timings_file: String,
}

/// Attributes the persisted model's predictions and writes the importance
/// ranking, the beeswarm table and the run report.
pub fn explain(cfg: &PipelineConfig) -> Result<RunReport> {
    const STAGE: &str = "explain";
    let run_dir = prepare(cfg)?;
    let model = load_model(STAGE, &run_dir.join(MODEL_FILE))?;
    let (_, data) = load_features(STAGE, &run_dir)?;
    let (train, _) = split(&data, &cfg.split).map_err(|e| learn_err(STAGE, e))?;
    let background = background_rows(&train, cfg.explain.seed);
    let n = cfg.explain.max_rows.map_or(data.len(), |m| m.min(data.len()));
    let rows: Vec<Vec<f64>> = data.rows().take(n).map(<[f64]>::to_vec).collect();
    let ecfg = ExplainConfig { permutations: cfg.explain.permutations, seed: cfg.explain.seed };
    let explanations = explain_rows(&model, &rows, &background, &ecfg).map_err(|e| Error::infeasible(STAGE, e))?;
    let global = aggregate(&explanations, &rows).map_err(|e| Error::infeasible(STAGE, e))?;

    let ranking: Vec<ImportanceEntry> = global
        .ranking
        .iter()
        .enumerate()
        .map(|(rank, &f)| ImportanceEntry {
            rank: rank + 1,
            feature: FEATURE_NAMES[f].to_string(),
            mean_abs_phi: global.mean_abs[f],
            direction: global.direction[f],
        })
        .collect();
    let importance = Importance {
        model: model.name(),
        n_explained: rows.len(),
        n_background: background.len(),
        max_local_accuracy_error: explanations.iter().map(|e| e.local_accuracy_error()).fold(0.0, f64::max),
        ranking: ranking.clone(),
    };
    write_json(STAGE, &run_dir.join(IMPORTANCE_FILE), &importance)?;
    let bees: Vec<BeeswarmRow> = global
        .table
        .iter()
        .map(|e| BeeswarmRow { sample_id: e.sample, feature: FEATURE_NAMES[e.feature], phi: e.phi, feature_value: e.value })
        .collect();
    write_text(STAGE, &run_dir.join(BEESWARM_FILE), &formats::write_beeswarm(&bees))?;

    let ingest: IntegrateSummary = read_json(STAGE, &run_dir.join(PARSE_REPORTS_FILE))?;
    let trained: TrainSummary = read_json(STAGE, &run_dir.join(LEADERBOARD_JSON))?;
    let windows = read_window_rows(&run_dir)?;
    let sequences_len: BTreeMap<String, usize> = ingest
        .sessions
        .iter()
        .fold(BTreeMap::new(), |mut m, s| {
            if s.decision.accepted {
                *m.entry(s.designer_id.clone()).or_insert(0) += s.events;
            }
            m
        });
    let mut per_designer = BTreeMap::new();
    for w in &windows {
        *per_designer.entry(w.designer_id.clone()).or_insert(0) += 1;
    }
    let report = RunReport {
        config_hash: cfg.hash(),
        corpus: CorpusSummary {
            designers_found: ingest.designers_found,
            designers_used: ingest.designers_kept.len(),
            sessions: ingest.sessions.len(),
            sessions_accepted: ingest.sessions.iter().filter(|s| s.decision.accepted).count(),
            lines_total: ingest.totals.lines_total,
            lines_kept: ingest.totals.lines_kept,
            lines_malformed: ingest.totals.lines_malformed,
        },
        window: cfg.window,
        samples: WindowSummary {
            n_samples: windows.len(),
            expected_samples: sequences_len.values().map(|&l| cfg.window.count_for(l)).sum(),
            per_designer,
        },
        leaderboard: trained.mean,
        chosen_model: trained.chosen,
        evaluation: evaluation_of(&model, &data, &cfg.split)?,
        importance: ranking,
        timings_file: TIMINGS_FILE.to_string(),
    };
    write_json(STAGE, &run_dir.join(REPORT_FILE), &report)?;
    Ok(report)
}

// ---- whole run -------------------------------------------------------------

fn timed<T>(run_dir: &Path, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t0 = Instant::now();
    let out = f()?;
    record_timing(run_dir, stage, t0.elapsed().as_secs_f64())?;
    Ok(out)
}

/// Runs a single named stage and records its timing.
pub fn run_stage(cfg: &PipelineConfig, stage: Stage) -> Result<()> {
    let run_dir = prepare(cfg)?;
    match stage {
        Stage::Integrate => timed(&run_dir, "integrate", || integrate(cfg)).map(drop),
        Stage::Window => timed(&run_dir, "window", || window(cfg)).map(drop),
        Stage::Features => timed(&run_dir, "features", || features(cfg)).map(drop),
        Stage::Train => timed(&run_dir, "train", || train(cfg)).map(drop),
        Stage::Evaluate => timed(&run_dir, "evaluate", || evaluate_stage(cfg)).map(drop),
        Stage::Explain => timed(&run_dir, "explain", || explain(cfg)).map(drop),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Integrate,
    Window,
    Features,
    Train,
    Evaluate,
    Explain,
}

pub const STAGES: [Stage; 6] = [Stage::Integrate, Stage::Window, Stage::Features, Stage::Train, Stage::Evaluate, Stage::Explain];

/// ingest → sessionize → windows → features → learn → explain.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    for stage in STAGES {
        run_stage(cfg, stage)?;
    }
    read_json("run", &cfg.run_dir().join(REPORT_FILE))
}

// ---- sweep -----------------------------------------------------------------

/// Controlled-variable sweep over the configured grid.
pub fn sweep(cfg: &PipelineConfig) -> Result<SweepResult> {
    const STAGE: &str = "sweep";
    let run_dir = prepare(cfg)?;
    let sequences = load_sequences(&run_dir)?;
    let labels = labels_for(cfg, &sequences)?;
    let indexes: Vec<FeatureIndex> = sequences.par_iter().map(|s| FeatureIndex::new(&s.events)).collect();
    let series: Vec<DesignerSeries<'_>> = sequences
        .iter()
        .zip(&indexes)
        .zip(&labels)
        .map(|((s, index), &label)| DesignerSeries { designer_id: &s.designer_id, index, label })
        .collect();
    let settings = SweepSettings {
        models: cfg.sweep_models()?,
        seeds: cfg.sweep.seeds.clone(),
        split: cfg.split.clone(),
        keep_short: cfg.window.keep_short,
    };
    let result = timed(&run_dir, STAGE, || Ok(run_sweep(&series, &cfg.sweep.grid, &settings)))?;
    write_json(STAGE, &run_dir.join(SWEEP_JSON), &result)?;
    let mut rows = Vec::new();
    for p in &result.points {
        let base = vec![
            format!("{:?}", p.axis),
            p.length.to_string(),
            p.step.to_string(),
            p.n_samples.to_string(),
            p.expected_samples.to_string(),
        ];
        if p.models.is_empty() {
            let mut r = base.clone();
            r.extend([String::new(), String::new(), String::new(), p.infeasible.clone().unwrap_or_default()]);
            rows.push(r);
        }
        for m in &p.models {
            let mut r = base.clone();
            r.extend([m.model.clone(), fmt_opt(m.mean_test_r2), fmt_opt(m.mean_test_rmse), String::new()]);
            rows.push(r);
        }
    }
    let header =
        ["axis", "length", "step", "n_samples", "expected_samples", "model", "mean_test_r2", "mean_test_rmse", "infeasible"];
    write_text(STAGE, &run_dir.join(SWEEP_CSV), &formats::write_table(&header, &rows))?;
    Ok(result)
}

// ---- standalone tools ------------------------------------------------------

/// Parses the given journal (`*.journal.txt`) and tracker (`*.csv`) files.
pub fn parse_files(paths: &[PathBuf]) -> Result<Vec<FileReport>> {
    paths
        .iter()
        .map(|p| {
            let text = read_text("parse", p)?;
            let report = if p.extension().is_some_and(|e| e == "csv") {
                parse_tracker(text.lines()).map_err(|e| Error::data("parse", p, e))?.1
            } else {
                parse_journal(text.lines()).1
            };
            Ok(FileReport { file: p.display().to_string(), report })
        })
        .collect()
}

/// Applies the scoring rubric row by row. Invalid rows are reported with
/// their line numbers; the others still make it onto the sheet.
pub fn score_sheet(assessments: &str) -> Result<(String, Vec<TableError>), TableError> {
    let (rows, mut bad) = formats::read_assessments(assessments)?;
    let mut sheet = Vec::with_capacity(rows.len());
    for (line, id, a) in rows {
        match quality::score(&a) {
            Ok(s) => sheet.push((id, s)),
            Err(e) => bad.push(TableError { line, message: e.to_string() }),
        }
    }
    bad.sort_by_key(|e| e.line);
    Ok((formats::write_scores(&sheet), bad))
}
