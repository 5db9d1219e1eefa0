//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 infeasible configuration.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use bimq_core::features::FEATURE_COUNT;
use bimq_core::learn::ModelSpec;
use bimq_core::synth::{gen_corpus, GenConfig, Preset};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::PipelineConfig;
use crate::error::{read_text, write_text, Error, Result};
use crate::pipeline::{self, Stage};
use crate::corpus;

#[derive(Debug, Parser)]
#[command(name = "bimq", version, about = "Design-behaviour mining and quality regression over BIM logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Paper,
    Small,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Small => Preset::Small,
        }
    }
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base settings before the file and flags: `paper` or `small` scale.
    #[arg(long, global = true, value_enum)]
    preset: Option<PresetArg>,
    /// Upper bound on worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,
    /// Window length N in records.
    #[arg(long, global = true)]
    window_length: Option<usize>,
    /// Window step s in records.
    #[arg(long, global = true)]
    window_step: Option<usize>,
    /// Keep one short window for sequences shorter than N.
    #[arg(long, global = true)]
    keep_short: Option<bool>,
    #[arg(long, global = true)]
    min_journal_bytes: Option<u64>,
    #[arg(long, global = true)]
    min_rows: Option<usize>,
    #[arg(long, global = true)]
    max_coverage_deficit: Option<f64>,
    #[arg(long, global = true)]
    test_fraction: Option<f64>,
    /// Keep each designer's windows on one side of the split.
    #[arg(long, global = true)]
    grouped: Option<bool>,
    /// Seed of the split behind the persisted model.
    #[arg(long, global = true)]
    split_seed: Option<u64>,
    /// Leaderboard split seeds, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Model names for the suite, comma separated (OLS, Ridge, kNN, CART, Bagging, RandomForest, ExtraTrees).
    #[arg(long, global = true, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Model to persist and explain instead of the leaderboard winner.
    #[arg(long, global = true)]
    explain_model: Option<String>,
    #[arg(long, global = true)]
    permutations: Option<usize>,
    #[arg(long, global = true)]
    explain_seed: Option<u64>,
    #[arg(long, global = true)]
    max_explain_rows: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted behaviour/quality links.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        designers: Option<usize>,
    },
    /// Parse journal or tracker files and print their line accounting.
    Parse { files: Vec<PathBuf> },
    /// Parse, clean and merge every session of the corpus.
    Integrate,
    /// Crop designer sequences into labelled windows.
    Window,
    /// Compute the feature matrix of every window.
    Features,
    /// Score an assessment file into a score sheet.
    Score {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare the model suite and persist the chosen model.
    Train,
    /// Score the persisted model on the primary split.
    Evaluate,
    /// Controlled sweeps over window length and step.
    Sweep,
    /// Attribute predictions and write the run report.
    Explain,
    /// Every stage from integrate to explain.
    Run,
}

fn resolve_config(o: &GlobalOpts) -> Result<PipelineConfig> {
    let base = match o.preset {
        Some(PresetArg::Small) => PipelineConfig::small(),
        _ => PipelineConfig::default(),
    };
    let mut c = match &o.config {
        Some(path) => PipelineConfig::load_over(&base, path)?,
        None => base,
    };
    macro_rules! set {
        ($flag:expr => $($field:tt)+) => {
            if let Some(v) = $flag.clone() {
                c.$($field)+ = v;
            }
        };
    }
    set!(o.corpus => corpus);
    set!(o.workspace => workspace);
    set!(o.window_length => window.length);
    set!(o.window_step => window.step);
    set!(o.keep_short => window.keep_short);
    set!(o.min_journal_bytes => cleaning.min_journal_bytes);
    set!(o.min_rows => cleaning.min_rows);
    set!(o.max_coverage_deficit => cleaning.max_tracker_coverage_deficit);
    set!(o.test_fraction => split.test_fraction);
    set!(o.grouped => split.grouped);
    set!(o.split_seed => split.seed);
    set!(o.seeds => seeds);
    set!(o.permutations => explain.permutations);
    set!(o.explain_seed => explain.seed);
    if let Some(names) = &o.models {
        c.models = names
            .iter()
            .map(|n| ModelSpec::by_name(n, FEATURE_COUNT).ok_or_else(|| Error::usage(format!("unknown model `{n}`"))))
            .collect::<Result<_>>()?;
    }
    if o.explain_model.is_some() {
        c.explain.model = o.explain_model.clone();
    }
    if o.max_explain_rows.is_some() {
        c.explain.max_rows = o.max_explain_rows;
    }
    c.validate()?;
    Ok(c)
}

fn synth(o: &GlobalOpts, out: &Path, seed: u64, designers: Option<usize>) -> Result<()> {
    let mut gen = GenConfig::preset(o.preset.unwrap_or(PresetArg::Paper).into());
    if let Some(n) = designers {
        gen.n_designers = n;
    }
    let (generated, truth) = gen_corpus(&gen, seed).map_err(Error::usage)?;
    corpus::write_corpus(out, &generated, &truth)?;
    println!("synth: {} designers -> {}", generated.len(), out.display());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    let o = &cli.opts;
    match &cli.command {
        Command::Synth { out, seed, designers } => synth(o, out, *seed, *designers),
        Command::Parse { files } => {
            if files.is_empty() {
                return Err(Error::usage("parse needs at least one file"));
            }
            let reports = pipeline::parse_files(files)?;
            println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
            Ok(())
        }
        Command::Score { input, output } => {
            let text = read_text("score", input)?;
            let (sheet, bad) = pipeline::score_sheet(&text).map_err(|e| Error::data("score", input, e))?;
            write_text("score", output, &sheet)?;
            for e in &bad {
                eprintln!("bimq: score: {}: {e}", input.display());
            }
            match bad.first() {
                Some(e) => Err(Error::data("score", input, format!("{} invalid row(s), first at {e}", bad.len()))),
                None => Ok(()),
            }
        }
        Command::Integrate => stage(o, Stage::Integrate),
        Command::Window => stage(o, Stage::Window),
        Command::Features => stage(o, Stage::Features),
        Command::Train => stage(o, Stage::Train),
        Command::Evaluate => stage(o, Stage::Evaluate),
        Command::Explain => stage(o, Stage::Explain),
        Command::Sweep => {
            let cfg = resolve_config(o)?;
            let result = pipeline::sweep(&cfg)?;
            for p in &result.points {
                let r2: Vec<String> = p
                    .models
                    .iter()
                    .map(|m| format!("{}={}", m.model, m.mean_test_r2.map_or("-".into(), |v| format!("{v:.4}"))))
                    .collect();
                let note = p.infeasible.as_deref().map(|s| format!(" infeasible: {s}")).unwrap_or_default();
                println!("{:?} N={} s={} n={} {}{}", p.axis, p.length, p.step, p.n_samples, r2.join(" "), note);
            }
            println!("sweep -> {}", cfg.run_dir().join(pipeline::SWEEP_JSON).display());
            Ok(())
        }
        Command::Run => {
            let cfg = resolve_config(o)?;
            let report = pipeline::run_pipeline(&cfg)?;
            println!(
                "run: {} samples, best {} (test R2 {:.4}, RMSE {:.4}) -> {}",
                report.samples.n_samples,
                report.chosen_model,
                report.evaluation.test.r2,
                report.evaluation.test.rmse,
                cfg.run_dir().display()
            );
            Ok(())
        }
    }
}

fn stage(o: &GlobalOpts, stage: Stage) -> Result<()> {
    let cfg = resolve_config(o)?;
    pipeline::run_stage(&cfg, stage)?;
    println!("{stage:?} -> {}", cfg.run_dir().display());
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.opts.workers {
        Some(0) => Err(Error::usage("--workers must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(Error::usage)
            .and_then(|pool| pool.install(|| dispatch(&cli))),
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bimq: {e}");
            e.exit_code()
        }
    }
}
