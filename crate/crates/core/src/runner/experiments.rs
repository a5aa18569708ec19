use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{cross_validate, holdout_accuracy};
use crate::datasets::{self, Dataset};
use crate::learners::{training_accuracy, Learner, LearnerKind, LearnerSpec};
use crate::perturbation;
use crate::pv::{describe_learner, pv_validate_with, PvResult};
use crate::seed;
use crate::{Error, Result};

use super::config::{CellSeeds, CvConfig, ExperimentConfig, PreparedData, ScheduleConfig};

/// One (dataset, learner) cell of an experiment table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub dataset: String,
    pub n: usize,
    pub learner: String,
    #[serde(default)]
    pub learner_spec: Option<LearnerSpec>,
    pub pv_folded: Option<f64>,
    pub pv_raw_slope: Option<f64>,
    pub pv_r2: Option<f64>,
    /// Mean and population std of the per-repetition folded scores.
    pub pv_rep_mean: Option<f64>,
    pub pv_rep_std: Option<f64>,
    pub train_accuracy: Option<f64>,
    pub cv_mean: Option<f64>,
    pub cv_std: Option<f64>,
    /// Accuracy on the hold-out set; absent for small datasets.
    pub holdout_accuracy: Option<f64>,
    pub seeds: CellSeeds,
    pub error: Option<String>,
    /// Full curve with per-point seeds.
    #[serde(default)]
    pub pv: Option<PvResult>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentRow {
    fn empty(dataset: String, n: usize, learner: String, spec: Option<LearnerSpec>, seeds: CellSeeds) -> Self {
        Self {
            dataset,
            n,
            learner,
            learner_spec: spec,
            pv_folded: None,
            pv_raw_slope: None,
            pv_r2: None,
            pv_rep_mean: None,
            pv_rep_std: None,
            train_accuracy: None,
            cv_mean: None,
            cv_std: None,
            holdout_accuracy: None,
            seeds,
            error: None,
            pv: None,
            wall_time: Duration::ZERO,
        }
    }

    fn record_error(&mut self, what: &str, e: &Error) {
        let msg = format!("{what}: {e}");
        self.error = Some(match self.error.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    /// Maximum tree depth when the row's learner is a decision tree.
    pub fn max_depth(&self) -> Option<usize> {
        match self.learner_spec.as_ref()?.kind {
            LearnerKind::DecisionTree { max_depth } => max_depth,
            _ => None,
        }
    }
}

/// What to compute for each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSettings {
    pub schedule: ScheduleConfig,
    /// Cross-validation is skipped when `None`.
    pub cv: Option<CvConfig>,
}

impl CellSettings {
    pub fn from_config(config: &ExperimentConfig, with_cv: bool) -> Self {
        Self {
            schedule: config.schedule.clone(),
            cv: with_cv.then(|| config.cv.clone()),
        }
    }
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// PV, training accuracy, CV and hold-out accuracy of one learner on one
/// prepared dataset. Failures are recorded in the row, never returned.
pub fn evaluate_cell(
    learner: &dyn Learner,
    spec: Option<&LearnerSpec>,
    data: &PreparedData,
    seeds: CellSeeds,
    settings: &CellSettings,
) -> ExperimentRow {
    let start = Instant::now();
    let train = &data.train;
    let mut row = ExperimentRow::empty(
        train.name().to_owned(),
        train.n_samples(),
        learner.label(),
        spec.cloned(),
        seeds,
    );

    let schedule = settings.schedule.schedule(seeds.pv);
    match pv_validate_with(learner, describe_learner(learner, spec), train, &schedule) {
        Ok(pv) => {
            row.pv_folded = Some(pv.folded_score);
            row.pv_raw_slope = Some(pv.raw_slope_magnitude);
            row.pv_r2 = pv.r_squared;
            if let Some((m, s)) = mean_std(&pv.repetition_scores()) {
                row.pv_rep_mean = Some(m);
                row.pv_rep_std = Some(s);
            }
            row.train_accuracy = pv.clean_accuracy();
            row.pv = Some(pv);
        }
        Err(e) => row.record_error("pv", &e),
    }

    if row.train_accuracy.is_none() {
        match learner.fit(train).and_then(|m| training_accuracy(m.as_ref(), train)) {
            Ok(acc) => row.train_accuracy = Some(acc),
            Err(e) => row.record_error("train", &e),
        }
    }

    if let Some(cv) = &settings.cv {
        match cross_validate(learner, train, &cv.spec(seeds.cv)) {
            Ok(res) => {
                row.cv_mean = Some(res.mean);
                row.cv_std = Some(res.std);
            }
            Err(e) => row.record_error("cv", &e),
        }
    }

    if let Some(test) = &data.test {
        match holdout_accuracy(learner, train, test) {
            Ok(acc) => row.holdout_accuracy = Some(acc),
            Err(e) => row.record_error("holdout", &e),
        }
    }

    row.wall_time = start.elapsed();
    row
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        builder = builder.num_threads(j);
    }
    builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

type Prepared = std::result::Result<PreparedData, String>;

fn prepare_all(config: &ExperimentConfig, n_override: Option<usize>, force_holdout: bool) -> Vec<Prepared> {
    config
        .datasets
        .par_iter()
        .enumerate()
        .map(|(i, src)| {
            src.prepare(&config.seeds(i), &config.holdout, n_override, force_holdout)
                .map_err(|e| format!("dataset: {e}"))
        })
        .collect()
}

fn error_row(config: &ExperimentConfig, dataset_index: usize, learner: &LearnerSpec, msg: &str) -> ExperimentRow {
    let mut row = ExperimentRow::empty(
        config.datasets[dataset_index].display_name(),
        0,
        learner.label(),
        Some(learner.clone()),
        config.seeds(dataset_index),
    );
    row.error = Some(msg.to_owned());
    row
}

/// Every (dataset, learner) cell, in dataset-major config order.
fn run_grid(config: &ExperimentConfig, learners: &[LearnerSpec], settings: &CellSettings) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    if learners.is_empty() {
        return Err(Error::Config("no learners configured".into()));
    }
    for l in learners {
        l.validate()?;
    }
    thread_pool(config.jobs)?.install(|| {
        let prepared = prepare_all(config, None, false);
        let cells: Vec<(usize, usize)> = (0..prepared.len())
            .flat_map(|d| (0..learners.len()).map(move |l| (d, l)))
            .collect();
        Ok(cells
            .par_iter()
            .map(|&(d, l)| match &prepared[d] {
                Ok(data) => evaluate_cell(&learners[l], Some(&learners[l]), data, config.seeds(d), settings),
                Err(msg) => error_row(config, d, &learners[l], msg),
            })
            .collect())
    })
}

/// PV, training accuracy, CV and hold-out accuracy for every dataset and
/// learner of the config. Rows are sorted by dataset name, then learner.
pub fn run_model_selection(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let mut rows = run_grid(config, &config.learners, &CellSettings::from_config(config, true))?;
    rows.sort_by(|a, b| a.dataset.cmp(&b.dataset).then_with(|| a.learner.cmp(&b.learner)));
    Ok(rows)
}

/// Decision trees over a depth grid on every dataset. Rows are sorted by
/// dataset name and keep the grid order within a dataset.
pub fn run_hyperparam_sweep(config: &ExperimentConfig, max_depths: &[usize]) -> Result<Vec<ExperimentRow>> {
    if max_depths.is_empty() {
        return Err(Error::Config("empty depth grid".into()));
    }
    if max_depths.contains(&0) {
        return Err(Error::Config("depths must be >= 1".into()));
    }
    let learners: Vec<LearnerSpec> = max_depths.iter().map(|&d| LearnerSpec::decision_tree(Some(d))).collect();
    let mut rows = run_grid(config, &learners, &CellSettings::from_config(config, true))?;
    rows.sort_by(|a, b| a.dataset.cmp(&b.dataset));
    Ok(rows)
}

/// Learners for the sweeps: the depth grid when given, else the config's
/// learner list.
fn sweep_learners(config: &ExperimentConfig) -> Result<Vec<LearnerSpec>> {
    let learners: Vec<LearnerSpec> = if config.sweep.max_depths.is_empty() {
        config.learners.clone()
    } else {
        config
            .sweep
            .max_depths
            .iter()
            .map(|&d| LearnerSpec::decision_tree(Some(d)))
            .collect()
    };
    if learners.is_empty() {
        return Err(Error::Config("no learners configured".into()));
    }
    Ok(learners)
}

/// PV and hold-out accuracy on nested stratified subsamples of each
/// dataset. The hold-out set is fixed per dataset; every smaller sample is
/// a subset of every larger one. Rows are sorted by dataset name, then size.
pub fn run_size_sweep(config: &ExperimentConfig, sizes: &[usize]) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    if sizes.is_empty() {
        return Err(Error::Config("empty size grid".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("sizes must be strictly increasing, got {sizes:?}")));
    }
    let learners = sweep_learners(config)?;
    let largest = *sizes.last().expect("non-empty");
    let settings = CellSettings::from_config(config, false);

    thread_pool(config.jobs)?.install(|| {
        let prepared = prepare_all(config, Some(largest), true);
        let mut cells = Vec::new();
        for d in 0..prepared.len() {
            for (s, &size) in sizes.iter().enumerate() {
                for l in 0..learners.len() {
                    cells.push((d, s, size, l));
                }
            }
        }
        let mut rows: Vec<ExperimentRow> = cells
            .par_iter()
            .map(|&(d, _, size, l)| {
                let spec = &learners[l];
                let pool = match &prepared[d] {
                    Ok(p) => p,
                    Err(msg) => return error_row(config, d, spec, msg),
                };
                let seeds = config.seeds(d);
                match datasets::subsample(&pool.train, size, seeds.subsample) {
                    Ok(sub) => {
                        let data = PreparedData {
                            train: sub.with_name(pool.train.name()),
                            test: pool.test.clone(),
                        };
                        evaluate_cell(spec, Some(spec), &data, seeds, &settings)
                    }
                    Err(e) => {
                        let mut row = error_row(config, d, spec, &format!("subsample: {e}"));
                        row.dataset = pool.train.name().to_owned();
                        row.n = size;
                        row
                    }
                }
            })
            .collect();
        rows.sort_by(|a, b| a.dataset.cmp(&b.dataset).then(a.n.cmp(&b.n)));
        Ok(rows)
    })
}

/// Hold-out accuracy of a learner trained on `train` with each fraction of
/// labels flipped. The perturbation for grid entry `i` uses seed
/// `derive(seed, [i])`; `r = 0` trains on the clean sample.
pub fn noise_sensitivity(
    learner: &dyn Learner,
    train: &Dataset,
    test: &Dataset,
    grid: &[f64],
    seed_value: u64,
) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .enumerate()
        .map(|(i, &r)| {
            if !(0.0..=0.5).contains(&r) {
                return Err(Error::InvalidArgument(format!("training noise {r} outside [0, 0.5]")));
            }
            let acc = if r == 0.0 {
                holdout_accuracy(learner, train, test)?
            } else {
                let noisy = perturbation::perturb(train, r, seed::derive(seed_value, &[i as u64]))?;
                holdout_accuracy(learner, &noisy, test)?
            };
            Ok((r, acc))
        })
        .collect()
}

/// One point of a noise-sensitivity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub dataset: String,
    pub n: usize,
    pub learner: String,
    /// PV of the learner on the clean training sample.
    pub clean_pv_folded: Option<f64>,
    pub train_noise: f64,
    pub test_accuracy: Option<f64>,
    pub seed: u64,
    pub error: Option<String>,
}

/// Test accuracy under growing training-label noise, next to each
/// learner's clean PV. Rows follow dataset name, learner, then grid order.
pub fn run_noise_sensitivity(config: &ExperimentConfig, grid: &[f64]) -> Result<Vec<NoiseRow>> {
    config.validate()?;
    if grid.is_empty() {
        return Err(Error::Config("empty noise grid".into()));
    }
    if grid.iter().any(|r| !(0.0..=0.5).contains(r)) {
        return Err(Error::Config(format!("noise grid must lie in [0, 0.5], got {grid:?}")));
    }
    if config.learners.is_empty() {
        return Err(Error::Config("no learners configured".into()));
    }
    let settings = CellSettings::from_config(config, false);

    thread_pool(config.jobs)?.install(|| {
        let prepared = prepare_all(config, None, true);
        let cells: Vec<(usize, usize)> = (0..prepared.len())
            .flat_map(|d| (0..config.learners.len()).map(move |l| (d, l)))
            .collect();
        let mut rows: Vec<NoiseRow> = cells
            .par_iter()
            .flat_map_iter(|&(d, l)| {
                let spec = &config.learners[l];
                let seeds = config.seeds(d);
                let base = |dataset: String, n: usize| NoiseRow {
                    dataset,
                    n,
                    learner: spec.label(),
                    clean_pv_folded: None,
                    train_noise: 0.0,
                    test_accuracy: None,
                    seed: seeds.train_noise,
                    error: None,
                };
                let fail = |row: NoiseRow, msg: String| -> Vec<NoiseRow> {
                    grid.iter()
                        .map(|&r| NoiseRow {
                            train_noise: r,
                            error: Some(msg.clone()),
                            ..row.clone()
                        })
                        .collect()
                };
                let data = match &prepared[d] {
                    Ok(p) => p,
                    Err(msg) => return fail(base(config.datasets[d].display_name(), 0), msg.clone()),
                };
                let mut row = base(data.train.name().to_owned(), data.train.n_samples());
                let Some(test) = &data.test else {
                    return fail(row, "no hold-out set".into());
                };
                let schedule = settings.schedule.schedule(seeds.pv);
                match pv_validate_with(spec, describe_learner(spec, Some(spec)), &data.train, &schedule) {
                    Ok(pv) => row.clean_pv_folded = Some(pv.folded_score),
                    Err(e) => row.error = Some(format!("pv: {e}")),
                }
                match noise_sensitivity(spec, &data.train, test, grid, seeds.train_noise) {
                    Ok(curve) => curve
                        .into_iter()
                        .map(|(r, acc)| NoiseRow {
                            train_noise: r,
                            test_accuracy: Some(acc),
                            ..row.clone()
                        })
                        .collect(),
                    Err(e) => {
                        let msg = match &row.error {
                            Some(prev) => format!("{prev}; noise: {e}"),
                            None => format!("noise: {e}"),
                        };
                        fail(row, msg)
                    }
                }
            })
            .collect();
        rows.sort_by(|a, b| a.dataset.cmp(&b.dataset).then_with(|| a.learner.cmp(&b.learner)));
        Ok(rows)
    })
}

/// PV against training accuracy for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub dataset: String,
    pub n: usize,
    pub learner: String,
    pub train_accuracy: f64,
    pub pv_folded: f64,
}

/// Scatter points of every row that has both values.
pub fn emit_scatter(rows: &[ExperimentRow]) -> Vec<ScatterPoint> {
    rows.iter()
        .filter_map(|r| {
            Some(ScatterPoint {
                dataset: r.dataset.clone(),
                n: r.n,
                learner: r.learner.clone(),
                train_accuracy: r.train_accuracy?,
                pv_folded: r.pv_folded?,
            })
        })
        .collect()
}
