use std::path::Path;

use bimq::config::PipelineConfig;
use bimq::corpus::write_corpus;
use bimq::pipeline::{self, Stage, STAGES};
use bimq_core::synth::{gen_corpus, GenConfig};
use bimq_core::windows::WindowConfig;

fn corpus(dir: &Path, designers: usize) {
    let mut gen = GenConfig::small();
    gen.n_designers = designers;
    let (d, t) = gen_corpus(&gen, 0).unwrap();
    write_corpus(dir, &d, &t).unwrap();
}

fn config(corpus: &Path, workspace: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::small();
    c.corpus = corpus.to_path_buf();
    c.workspace = workspace.to_path_buf();
    c.window = WindowConfig { length: 1_500, step: 500, keep_short: true };
    c.seeds = vec![0, 1];
    c.explain.max_rows = Some(40);
    c
}

fn read(dir: &Path, file: &str) -> Vec<u8> {
    std::fs::read(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

const OUTPUTS: [&str; 10] = [
    pipeline::PARSE_REPORTS_FILE,
    pipeline::WINDOWS_FILE,
    pipeline::FEATURES_FILE,
    pipeline::LEADERBOARD_JSON,
    pipeline::LEADERBOARD_CSV,
    pipeline::MODEL_FILE,
    pipeline::EVALUATION_FILE,
    pipeline::IMPORTANCE_FILE,
    pipeline::BEESWARM_FILE,
    pipeline::REPORT_FILE,
];

#[test]
fn staged_runs_match_the_full_pipeline_and_reruns_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus_dir = tmp.path().join("corpus");
    corpus(&corpus_dir, 10);

    let full = config(&corpus_dir, &tmp.path().join("a"));
    let report = pipeline::run_pipeline(&full).unwrap();
    assert_eq!(report.samples.n_samples, report.samples.expected_samples);
    assert_eq!(report.corpus.lines_malformed, 0);
    assert_eq!(report.importance.len(), 29);

    let staged = config(&corpus_dir, &tmp.path().join("b"));
    for stage in STAGES {
        pipeline::run_stage(&staged, stage).unwrap();
    }
    let again = config(&corpus_dir, &tmp.path().join("c"));
    pipeline::run_pipeline(&again).unwrap();
    for file in OUTPUTS {
        let reference = read(&full.run_dir(), file);
        assert!(reference == read(&staged.run_dir(), file), "staged {file} differs");
        assert!(reference == read(&again.run_dir(), file), "rerun {file} differs");
    }
    assert!(full.run_dir().join(pipeline::TIMINGS_FILE).exists());
}

#[test]
fn worker_count_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus_dir = tmp.path().join("corpus");
    corpus(&corpus_dir, 6);
    let mut outputs = Vec::new();
    for workers in [1, 4] {
        let cfg = config(&corpus_dir, &tmp.path().join(format!("w{workers}")));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        pool.install(|| pipeline::run_pipeline(&cfg)).unwrap();
        outputs.push(OUTPUTS.map(|f| read(&cfg.run_dir(), f)));
    }
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn empty_corpus_is_a_data_error_without_model_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus_dir = tmp.path().join("corpus");
    std::fs::create_dir_all(&corpus_dir).unwrap();
    let cfg = config(&corpus_dir, &tmp.path().join("ws"));
    let err = pipeline::run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    for file in [pipeline::FEATURES_FILE, pipeline::MODEL_FILE, pipeline::REPORT_FILE] {
        assert!(!cfg.run_dir().join(file).exists(), "{file} written");
    }
}

#[test]
fn later_stages_need_earlier_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus_dir = tmp.path().join("corpus");
    corpus(&corpus_dir, 2);
    let cfg = config(&corpus_dir, &tmp.path().join("ws"));
    assert_eq!(pipeline::run_stage(&cfg, Stage::Train).unwrap_err().exit_code(), 2);
}

#[test]
fn infeasible_windows_exit_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus_dir = tmp.path().join("corpus");
    corpus(&corpus_dir, 2);
    let mut cfg = config(&corpus_dir, &tmp.path().join("ws"));
    cfg.window = WindowConfig { length: 50_000, step: 1_000, keep_short: false };
    pipeline::run_stage(&cfg, Stage::Integrate).unwrap();
    assert_eq!(pipeline::run_stage(&cfg, Stage::Window).unwrap_err().exit_code(), 3);
}

#[test]
fn sweep_sample_counts_follow_the_window_formula() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus_dir = tmp.path().join("corpus");
    corpus(&corpus_dir, 6);
    let mut cfg = config(&corpus_dir, &tmp.path().join("ws"));
    cfg.sweep.grid.steps = vec![1_000, 3_000];
    cfg.sweep.grid.lengths = vec![1_000, 2_000];
    cfg.sweep.grid.fixed_step = 500;
    cfg.sweep.seeds = vec![0];
    pipeline::run_stage(&cfg, Stage::Integrate).unwrap();
    let result = pipeline::sweep(&cfg).unwrap();
    assert_eq!(result.points.len(), 4);
    for p in &result.points {
        assert_eq!(p.n_samples, p.expected_samples, "N={} s={}", p.length, p.step);
        assert_eq!(p.models.len(), 2);
    }
    assert!(cfg.run_dir().join(pipeline::SWEEP_CSV).exists());
}

#[test]
fn score_sheet_examples() {
    let (sheet, bad) = pipeline::score_sheet(
        "designer_id,arch_completeness_delta,arch_error_delta,complexity_adjustment,struct_delta\n\
         bench,0,0,0,0\nrow2,0,1,2,-1\nbad,0,0,40,0\n",
    )
    .unwrap();
    assert_eq!(bad.len(), 1);
    let lines: Vec<&str> = sheet.lines().collect();
    assert_eq!(lines[0], "designer_id,arch_completeness,arch_accuracy,arch_complexity,struct_completeness,total");
    assert_eq!(lines[1], "bench,20,20,20,10,70");
    assert_eq!(lines[2], "row2,20,18,22,8,68");
    assert_eq!(lines.len(), 3);
}
