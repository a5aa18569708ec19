//! The perturbation validation score.
//!
//! For a schedule of noise degrees `r_0 = 0 < r_1 < ... < r_m`, the learner
//! is retrained on each perturbed sample `S_r` and its training accuracy is
//! measured against the labels it was trained on. The score is the
//! magnitude of the least-squares slope of accuracy on `r`, taken over every
//! (degree, repetition) point:
//!
//! ```text
//! PV = | Σ (r_i - r̄)(acc_i - acc̄) / Σ (r_i - r̄)² |
//! ```
//!
//! A learner that keeps predicting the clean labels loses exactly `r` of
//! its accuracy at degree `r`, so the ideal rate is 1. Rates above 1 mean
//! the injected noise also broke predictions on untouched samples and are
//! penalised symmetrically by [`fold`]: `1 - |PV - 1|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::learners::{training_accuracy, Learner, LearnerSpec};
use crate::perturbation;
use crate::seed;
use crate::{Error, Result};

/// Degrees used when none are given: the unperturbed sample plus three
/// perturbed ones.
pub const DEFAULT_DEGREES: [f64; 4] = [0.0, 0.1, 0.2, 0.3];
pub const DEFAULT_REPETITIONS: usize = 10;

fn default_true() -> bool {
    true
}

fn default_degrees() -> Vec<f64> {
    DEFAULT_DEGREES.to_vec()
}

fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    /// Strictly increasing, starting at 0, all below 1.
    #[serde(default = "default_degrees")]
    pub degrees: Vec<f64>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Whether the `r = 0` point enters the regression.
    #[serde(default = "default_true")]
    pub include_baseline: bool,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self {
            degrees: default_degrees(),
            repetitions: DEFAULT_REPETITIONS,
            master_seed: 0,
            include_baseline: true,
        }
    }
}

impl NoiseSchedule {
    pub fn new(degrees: Vec<f64>, repetitions: usize, master_seed: u64) -> Result<Self> {
        let schedule = Self {
            degrees,
            repetitions,
            master_seed,
            include_baseline: true,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Default degrees and repetitions with the given seed.
    pub fn with_seed(master_seed: u64) -> Self {
        Self {
            master_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        if self.degrees.first() != Some(&0.0) {
            return bad(format!("degrees must start at 0, got {:?}", self.degrees));
        }
        if self.degrees.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return bad(format!("degrees must be strictly increasing, got {:?}", self.degrees));
        }
        if self.degrees.iter().any(|&r| !(0.0..1.0).contains(&r)) {
            return bad(format!("degrees must lie in [0, 1), got {:?}", self.degrees));
        }
        let used = self.degrees.len() - usize::from(!self.include_baseline);
        if used < 2 {
            return bad("at least two noise degrees are needed to fit a slope".into());
        }
        Ok(())
    }

    pub fn max_degree(&self) -> f64 {
        *self.degrees.last().unwrap_or(&0.0)
    }

    /// Seed of the perturbation for one grid cell.
    pub fn cell_seed(&self, degree_index: usize, repetition: usize) -> u64 {
        seed::derive(self.master_seed, &[degree_index as u64, repetition as u64])
    }
}

/// One retraining: accuracy at degree `r` in repetition `rep`, produced by
/// the perturbation drawn from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    pub rep: usize,
    pub acc: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurve {
    pub points: Vec<CurvePoint>,
}

impl AccuracyCurve {
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            points: pairs
                .iter()
                .map(|&(r, acc)| CurvePoint { r, rep: 0, acc, seed: 0 })
                .collect(),
        }
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.r, p.acc)).collect()
    }

    /// Points of one repetition.
    pub fn repetition(&self, rep: usize) -> AccuracyCurve {
        Self {
            points: self.points.iter().filter(|p| p.rep == rep).copied().collect(),
        }
    }

    pub fn repetition_count(&self) -> usize {
        self.points.iter().map(|p| p.rep + 1).max().unwrap_or(0)
    }

    /// `(r, mean accuracy)` per degree, in ascending `r`.
    pub fn mean_by_degree(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        for p in &self.points {
            match out.iter_mut().find(|e| e.0 == p.r) {
                Some(e) => {
                    e.1 += p.acc;
                    e.2 += 1;
                }
                None => out.push((p.r, p.acc, 1)),
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.into_iter().map(|(r, s, n)| (r, s / n as f64)).collect()
    }
}

/// Closed-form ordinary least squares of `y` on `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` when `y` is constant.
    pub r_squared: Option<f64>,
}

pub fn ols(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "{} point(s), need at least two",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all noise degrees are identical".into()));
    }
    let slope = sxy / sxx;
    let r_squared = (syy > 0.0).then(|| (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0));
    Ok(LinearFit {
        slope,
        intercept: mean_y - slope * mean_x,
        r_squared,
    })
}

/// Magnitude of the least-squares slope over all points of the curve.
pub fn fit_slope(curve: &AccuracyCurve) -> Result<f64> {
    Ok(ols(&curve.pairs())?.slope.abs())
}

/// `1 - |x - 1|`: equal penalty for decrease rates below and above 1.
pub fn fold(raw_slope_magnitude: f64) -> f64 {
    1.0 - (raw_slope_magnitude - 1.0).abs()
}

/// R² of the least-squares fit; `None` for a constant curve.
pub fn linearity_diagnostic(curve: &AccuracyCurve) -> Option<f64> {
    ols(&curve.pairs()).ok().and_then(|f| f.r_squared)
}

/// Largest slope magnitude least squares can produce on this curve's
/// abscissae given its accuracy range: `(range / 2) Σ|r - r̄| / Σ(r - r̄)²`.
pub fn slope_bound(curve: &AccuracyCurve) -> f64 {
    let pairs = curve.pairs();
    let n = pairs.len() as f64;
    let mean_r = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let abs_dev: f64 = pairs.iter().map(|p| (p.0 - mean_r).abs()).sum();
    let sq_dev: f64 = pairs.iter().map(|p| (p.0 - mean_r).powi(2)).sum();
    let (lo, hi) = pairs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    (hi - lo) / 2.0 * abs_dev / sq_dev
}

/// Retrains `learner` on every perturbed sample of the schedule and
/// records training accuracy against the perturbed labels.
///
/// The `r = 0` cell is trained once and repeated for every repetition.
/// Cells run in parallel; each draws from its own derived seed and the
/// points come back in (degree, repetition) order regardless of scheduling.
pub fn build_curve(learner: &dyn Learner, data: &Dataset, schedule: &NoiseSchedule) -> Result<AccuracyCurve> {
    schedule.validate()?;
    perturbation::check_feasible(data, schedule.max_degree())?;

    let tag = |r: f64, repetition: usize| {
        move |e: Error| Error::Cell {
            r,
            repetition,
            source: Box::new(e),
        }
    };

    let baseline = if schedule.include_baseline {
        let model = learner.fit(data).map_err(tag(0.0, 0))?;
        Some(training_accuracy(model.as_ref(), data).map_err(tag(0.0, 0))?)
    } else {
        None
    };

    let cells: Vec<(usize, f64, usize)> = schedule
        .degrees
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > 0.0)
        .flat_map(|(di, &r)| (0..schedule.repetitions).map(move |rep| (di, r, rep)))
        .collect();

    let perturbed: Vec<Result<CurvePoint>> = cells
        .par_iter()
        .map(|&(di, r, rep)| {
            let seed = schedule.cell_seed(di, rep);
            let run = || -> Result<f64> {
                let noisy = perturbation::perturb(data, r, seed)?;
                let model = learner.fit(&noisy)?;
                training_accuracy(model.as_ref(), &noisy)
            };
            let acc = run().map_err(tag(r, rep))?;
            Ok(CurvePoint { r, rep, acc, seed })
        })
        .collect();

    let mut points = Vec::with_capacity(schedule.degrees.len() * schedule.repetitions);
    if let Some(acc) = baseline {
        points.extend((0..schedule.repetitions).map(|rep| CurvePoint {
            r: 0.0,
            rep,
            acc,
            seed: schedule.cell_seed(0, rep),
        }));
    }
    for p in perturbed {
        points.push(p?);
    }
    Ok(AccuracyCurve { points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvResult {
    pub learner: serde_json::Value,
    pub dataset: String,
    pub schedule: NoiseSchedule,
    #[serde(flatten)]
    pub curve: AccuracyCurve,
    #[serde(rename = "raw_slope")]
    pub raw_slope_magnitude: f64,
    #[serde(rename = "folded")]
    pub folded_score: f64,
    /// `null` when the curve is constant.
    #[serde(rename = "r2")]
    pub r_squared: Option<f64>,
    /// Raw slope above 1: noise changed predictions beyond the flipped labels.
    pub exceeds_unit_rate: bool,
}

impl PvResult {
    /// Folded score of each repetition fitted on its own points.
    pub fn repetition_scores(&self) -> Vec<f64> {
        (0..self.curve.repetition_count())
            .filter_map(|rep| fit_slope(&self.curve.repetition(rep)).ok())
            .map(fold)
            .collect()
    }

    /// Accuracy on the unperturbed sample, when it was measured.
    pub fn clean_accuracy(&self) -> Option<f64> {
        self.curve.points.iter().find(|p| p.r == 0.0).map(|p| p.acc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// JSON description of a learner for reports.
pub fn describe_learner(learner: &dyn Learner, spec: Option<&LearnerSpec>) -> serde_json::Value {
    match spec {
        Some(spec) => serde_json::to_value(spec).unwrap_or_else(|_| serde_json::json!(learner.label())),
        None => serde_json::json!({ "family": learner.label() }),
    }
}

/// Curve, slope, fold and diagnostic for one built-in learner.
pub fn pv_validate(spec: &LearnerSpec, data: &Dataset, schedule: &NoiseSchedule) -> Result<PvResult> {
    pv_validate_with(spec, describe_learner(spec, Some(spec)), data, schedule)
}

/// [`pv_validate`] for any [`Learner`].
pub fn pv_validate_with(
    learner: &dyn Learner,
    description: serde_json::Value,
    data: &Dataset,
    schedule: &NoiseSchedule,
) -> Result<PvResult> {
    let curve = build_curve(learner, data, schedule)?;
    let raw = fit_slope(&curve)?;
    Ok(PvResult {
        learner: description,
        dataset: data.name().to_owned(),
        schedule: schedule.clone(),
        r_squared: linearity_diagnostic(&curve),
        curve,
        raw_slope_magnitude: raw,
        folded_score: fold(raw),
        exceeds_unit_rate: raw > 1.0,
    })
}
