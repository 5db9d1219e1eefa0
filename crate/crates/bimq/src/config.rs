//! Pipeline configuration and its content hash.

use std::path::{Path, PathBuf};

use bimq_core::features::FEATURE_COUNT;
use bimq_core::learn::{default_suite, ModelSpec, SplitConfig};
use bimq_core::session::CleaningPolicy;
use bimq_core::sweep::SweepGrid;
use bimq_core::windows::WindowConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainSettings {
    /// Leaderboard name of the model to explain; the best mean test R² when unset.
    pub model: Option<String>,
    /// Permutations per row for models without an exact algorithm.
    pub permutations: usize,
    pub seed: u64,
    /// Explain only the first rows of the feature matrix.
    pub max_rows: Option<usize>,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        ExplainSettings { model: None, permutations: 256, seed: 0, max_rows: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: SweepGrid,
    pub models: Vec<String>,
    pub seeds: Vec<u64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grid: SweepGrid {
                fixed_length: 30_000,
                steps: vec![500, 1_000, 2_500, 5_000, 10_000, 15_000],
                fixed_step: 1_000,
                lengths: vec![5_000, 10_000, 20_000, 30_000, 40_000],
            },
            models: vec!["ExtraTrees".into(), "Bagging".into()],
            seeds: vec![0, 1, 2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    /// Runs are written to `<workspace>/run-<hash>`.
    pub workspace: PathBuf,
    pub cleaning: CleaningPolicy,
    pub window: WindowConfig,
    pub models: Vec<ModelSpec>,
    /// Split used for the persisted model and its attributions.
    pub split: SplitConfig,
    /// Split seeds averaged on the leaderboard.
    pub seeds: Vec<u64>,
    pub explain: ExplainSettings,
    pub sweep: SweepConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: PathBuf::from("corpus"),
            workspace: PathBuf::from("workspace"),
            cleaning: CleaningPolicy::default(),
            window: WindowConfig { length: 30_000, step: 5_000, keep_short: true },
            models: default_suite(FEATURE_COUNT),
            split: SplitConfig::default(),
            seeds: vec![0, 1, 2, 3, 4],
            explain: ExplainSettings::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Settings scaled to the small synthetic preset: windows and sweep grid
    /// shrunk tenfold and the byte-size cleaning rule switched off, since
    /// short synthetic journals fall under it by construction.
    pub fn small() -> Self {
        PipelineConfig {
            cleaning: CleaningPolicy { min_journal_bytes: 0, ..CleaningPolicy::default() },
            window: WindowConfig { length: 3_000, step: 500, keep_short: true },
            sweep: SweepConfig {
                grid: SweepGrid {
                    fixed_length: 3_000,
                    steps: vec![100, 250, 500, 1_000, 2_000, 3_000],
                    fixed_step: 100,
                    lengths: vec![500, 1_000, 2_000, 3_000, 4_000],
                },
                ..SweepConfig::default()
            },
            ..PipelineConfig::default()
        }
    }

    /// Reads a JSON configuration file laid over `base`: keys present in the
    /// file replace the base values, objects merge recursively.
    pub fn load_over(base: &Self, path: &Path) -> Result<Self> {
        let bad = |e: &dyn std::fmt::Display| Error::usage(format!("{}: {e}", path.display()));
        let text = std::fs::read_to_string(path).map_err(|e| bad(&e))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
        let mut merged = serde_json::to_value(base).expect("configuration always serializes");
        merge(&mut merged, file);
        serde_json::from_value(merged).map_err(|e| bad(&e))
    }

    pub fn validate(&self) -> Result<()> {
        self.cleaning.validate().map_err(Error::usage)?;
        self.window.validate().map_err(Error::usage)?;
        if self.models.is_empty() {
            return Err(Error::usage("model suite is empty"));
        }
        if self.seeds.is_empty() {
            return Err(Error::usage("at least one leaderboard seed is required"));
        }
        if !(self.split.test_fraction > 0.0 && self.split.test_fraction < 1.0) {
            return Err(Error::usage("test_fraction must lie strictly between 0 and 1"));
        }
        if self.explain.permutations == 0 {
            return Err(Error::usage("explain.permutations must be at least 1"));
        }
        if let Some(name) = &self.explain.model {
            if !self.models.iter().any(|m| &m.name() == name) {
                return Err(Error::usage(format!("explain.model `{name}` is not in the model suite")));
            }
        }
        self.sweep_models()?;
        if self.sweep.seeds.is_empty() {
            return Err(Error::usage("at least one sweep seed is required"));
        }
        Ok(())
    }

    pub fn sweep_models(&self) -> Result<Vec<ModelSpec>> {
        self.sweep
            .models
            .iter()
            .map(|name| {
                self.models
                    .iter()
                    .find(|m| &m.name() == name)
                    .cloned()
                    .or_else(|| ModelSpec::by_name(name, FEATURE_COUNT))
                    .ok_or_else(|| Error::usage(format!("unknown sweep model `{name}`")))
            })
            .collect()
    }

    /// SHA-256 over the canonical JSON of everything except the workspace
    /// location, so the same analysis lands in the same run directory.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.workspace = PathBuf::new();
        let json = serde_json::to_string(&keyed).expect("configuration always serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn run_dir(&self) -> PathBuf {
        self.workspace.join(format!("run-{}", &self.hash()[..16]))
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}
