//! Controlled-variable sweeps over window length and step.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureIndex, FEATURE_COUNT};
use crate::learn::{compare_models, Dataset, ModelSpec, SplitConfig};
use crate::windows::{make_windows, WindowConfig, WindowSample};

/// One designer's merged sequence, ready for windowing.
pub struct DesignerSeries<'a> {
    pub designer_id: &'a str,
    pub index: &'a FeatureIndex,
    pub label: i32,
}

/// Windows every series and extracts one feature row per window.
pub fn window_dataset(series: &[DesignerSeries<'_>], config: &WindowConfig) -> Result<(Dataset, Vec<WindowSample>), String> {
    config.validate().map_err(|e| e.to_string())?;
    let mut samples = Vec::new();
    let mut x = Vec::new();
    for s in series {
        let windows = make_windows(s.index.len(), config);
        let rows = crate::par::map_range(windows.len(), |i| s.index.features(&windows[i]));
        for (w, row) in windows.iter().zip(rows) {
            let row = row.map_err(|e| alloc::format!("{}: {e}", s.designer_id))?;
            x.extend_from_slice(row.as_slice());
            samples.push(WindowSample {
                designer_id: s.designer_id.into(),
                start: w.start,
                end: w.end,
                short: w.short,
                label: s.label,
            });
        }
    }
    let y = samples.iter().map(|s| s.label as f64).collect();
    let groups = samples.iter().map(|s| s.designer_id.clone()).collect();
    let data = Dataset::new(FEATURE_COUNT, x, y, groups).map_err(|e| e.to_string())?;
    Ok((data, samples))
}

/// Analytic sample count for a grid point.
pub fn expected_samples(lengths: &[usize], config: &WindowConfig) -> usize {
    lengths.iter().map(|&l| config.count_for(l)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Window length fixed, step varies.
    Step,
    /// Step fixed, window length varies.
    Length,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub fixed_length: usize,
    pub steps: Vec<usize>,
    pub fixed_step: usize,
    pub lengths: Vec<usize>,
}

impl SweepGrid {
    pub fn points(&self) -> Vec<(Axis, usize, usize)> {
        let a = self.steps.iter().map(|&s| (Axis::Step, self.fixed_length, s));
        let b = self.lengths.iter().map(|&n| (Axis::Length, n, self.fixed_step));
        a.chain(b).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepModelResult {
    pub model: String,
    /// One entry per seed: (train RMSE, train R², test RMSE, test R²) or an error.
    pub per_seed: Vec<Result<[f64; 4], String>>,
    pub mean_test_r2: Option<f64>,
    pub mean_test_rmse: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: Axis,
    pub length: usize,
    pub step: usize,
    pub n_samples: usize,
    pub expected_samples: usize,
    pub infeasible: Option<String>,
    pub models: Vec<SweepModelResult>,
}

impl SweepPoint {
    pub fn mean_test_r2(&self, model: &str) -> Option<f64> {
        self.models.iter().find(|m| m.model == model).and_then(|m| m.mean_test_r2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub models: Vec<ModelSpec>,
    pub seeds: Vec<u64>,
    pub split: SplitConfig,
    pub keep_short: bool,
}

/// Runs every grid point; infeasible points are recorded and skipped.
pub fn run_sweep(series: &[DesignerSeries<'_>], grid: &SweepGrid, settings: &SweepSettings) -> SweepResult {
    let lengths: Vec<usize> = series.iter().map(|s| s.index.len()).collect();
    let points = grid
        .points()
        .into_iter()
        .map(|(axis, length, step)| {
            let mut point = SweepPoint {
                axis,
                length,
                step,
                n_samples: 0,
                expected_samples: 0,
                infeasible: None,
                models: Vec::new(),
            };
            let config = match WindowConfig::new(length, step) {
                Ok(c) => c.with_keep_short(settings.keep_short),
                Err(e) => {
                    point.infeasible = Some(e.to_string());
                    return point;
                }
            };
            point.expected_samples = expected_samples(&lengths, &config);
            let data = match window_dataset(series, &config) {
                Ok((d, _)) => d,
                Err(e) => {
                    point.infeasible = Some(e);
                    return point;
                }
            };
            point.n_samples = data.len();
            let n_test = libm::round(data.len() as f64 * settings.split.test_fraction) as usize;
            if data.len() < 3 || data.len().saturating_sub(n_test.max(1)) < 2 {
                point.infeasible = Some(alloc::format!("{} samples cannot give 2 train and 1 test rows", data.len()));
                return point;
            }
            point.models = settings
                .models
                .iter()
                .map(|spec| {
                    let per_seed: Vec<Result<[f64; 4], String>> = settings
                        .seeds
                        .iter()
                        .map(|&seed| {
                            let split = SplitConfig { seed, ..settings.split.clone() };
                            let lb = compare_models(&data, core::slice::from_ref(spec), &split).map_err(|e| e.to_string())?;
                            let row = &lb.rows[0];
                            let s = row.result.as_ref().map_err(Clone::clone)?;
                            Ok([s.train_rmse, s.train_r2, s.test_rmse, s.test_r2])
                        })
                        .collect();
                    let ok: Vec<&[f64; 4]> = per_seed.iter().filter_map(|r| r.as_ref().ok()).collect();
                    let mean = |k: usize| (!ok.is_empty()).then(|| ok.iter().map(|v| v[k]).sum::<f64>() / ok.len() as f64);
                    SweepModelResult { model: spec.name(), mean_test_r2: mean(3), mean_test_rmse: mean(2), per_seed }
                })
                .collect();
            point
        })
        .collect();
    SweepResult { points }
}
