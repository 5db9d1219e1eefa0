use std::path::Path;
use std::process::{Command, Output};

fn bimq(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bimq")).current_dir(cwd).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const SMALL_RUN: [&str; 10] =
    ["--preset", "small", "--window-length", "1500", "--window-step", "500", "--seeds", "0", "--max-explain-rows", "20"];

#[test]
fn synth_then_run_and_staged_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = bimq(dir, &["synth", "--preset", "small", "--out", "corpus", "--designers", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("corpus/D001/session_1.journal.txt").exists());
    assert!(dir.join("corpus/scores.csv").exists());

    let out = bimq(dir, &[&["run", "--workspace", "full"][..], &SMALL_RUN].concat());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("samples, best"));

    for stage in ["integrate", "window", "features", "train", "evaluate", "explain"] {
        let out = bimq(dir, &[&[stage, "--workspace", "staged", "--workers", "2"][..], &SMALL_RUN].concat());
        assert_eq!(code(&out), 0, "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let report = |ws: &str| {
        let run = std::fs::read_dir(dir.join(ws)).unwrap().next().unwrap().unwrap().path();
        std::fs::read(run.join("report.json")).unwrap()
    };
    assert!(report("full") == report("staged"));

    let out = bimq(dir, &["parse", "corpus/D001/session_1.journal.txt", "corpus/D001/session_1.tracker.csv"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"lines_malformed\": 0"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(code(&bimq(dir, &["--help"])), 0);
    assert_eq!(code(&bimq(dir, &["run", "--bogus"])), 1);
    assert_eq!(code(&bimq(dir, &["run", "--workers", "0"])), 1);
    assert_eq!(code(&bimq(dir, &["run", "--window-length", "10", "--window-step", "20"])), 1);
    assert_eq!(code(&bimq(dir, &["run", "--models", "SVM"])), 1);
    std::fs::create_dir(dir.join("empty")).unwrap();
    assert_eq!(code(&bimq(dir, &["run", "--corpus", "empty"])), 2);
    assert_eq!(code(&bimq(dir, &["run", "--corpus", "missing"])), 2);

    assert_eq!(code(&bimq(dir, &["synth", "--preset", "small", "--out", "c", "--designers", "2"])), 0);
    let out = bimq(dir, &["run", "--corpus", "c", "--preset", "small", "--window-length", "90000", "--keep-short", "false"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("cfg.json"), r#"{"window": {"length": 10, "step": 50}}"#).unwrap();
    // the file alone is invalid (step > length); the flag repairs it before validation
    assert_eq!(code(&bimq(dir, &["window", "--config", "cfg.json"])), 1);
    let out = bimq(dir, &["window", "--config", "cfg.json", "--window-step", "5", "--corpus", "nowhere"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(dir.join("bad.json"), r#"{"windw": {}}"#).unwrap();
    assert_eq!(code(&bimq(dir, &["run", "--config", "bad.json"])), 1);
}

#[test]
fn score_command() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("a.csv"),
        "designer_id,arch_completeness_delta,arch_error_delta,complexity_adjustment,struct_delta\nbench,0,0,0,0\nrow2,0,1,2,-1\n",
    )
    .unwrap();
    assert_eq!(code(&bimq(dir, &["score", "--input", "a.csv", "--output", "s.csv"])), 0);
    let sheet = std::fs::read_to_string(dir.join("s.csv")).unwrap();
    assert!(sheet.ends_with("bench,20,20,20,10,70\nrow2,20,18,22,8,68\n"), "{sheet}");

    std::fs::write(dir.join("empty.csv"), "designer_id,arch_completeness_delta,arch_error_delta,complexity_adjustment,struct_delta\n").unwrap();
    assert_eq!(code(&bimq(dir, &["score", "--input", "empty.csv", "--output", "e.csv"])), 0);
    assert_eq!(std::fs::read_to_string(dir.join("e.csv")).unwrap().lines().count(), 1);

    std::fs::write(dir.join("bad.csv"), "designer_id,arch_completeness_delta,arch_error_delta,complexity_adjustment,struct_delta\nx,0,0,30,0\n").unwrap();
    assert_eq!(code(&bimq(dir, &["score", "--input", "bad.csv", "--output", "b.csv"])), 2);
}
