//! Per-class label flipping.
//!
//! For noise degree `r`, each class `c` with `n_c` members loses exactly
//! `round(r * n_c)` of them (half rounds up). Each chosen sample gets a
//! replacement label drawn uniformly from the other `k - 1` classes. In the
//! binary case the class histogram is therefore preserved exactly.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::datasets::{round_half_up, Dataset};
use crate::seed;
use crate::{Error, Result};

/// One relabelled sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flip {
    pub index: usize,
    pub from: usize,
    pub to: usize,
}

/// A replayable description of a perturbed sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub noise_degree: f64,
    pub seed: u64,
    pub n_samples: usize,
    pub class_count: usize,
    /// class id -> number of members relabelled.
    pub per_class_flip_counts: BTreeMap<usize, usize>,
    /// Sorted by index.
    pub flips: Vec<Flip>,
}

impl PerturbationPlan {
    pub fn flip_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.flips.iter().map(|f| f.index)
    }

    pub fn total_flips(&self) -> usize {
        self.flips.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Number of members of a class of size `class_size` flipped at degree `r`.
pub fn flip_count(r: f64, class_size: usize) -> usize {
    round_half_up(r * class_size as f64)
}

/// Checks that degree `r` is in `[0, 1)` and flips no class entirely.
pub fn check_feasible(dataset: &Dataset, r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!(
            "noise degree must be in [0, 1), got {r}"
        )));
    }
    for (class, &n_c) in dataset.class_counts().iter().enumerate() {
        if n_c > 0 && flip_count(r, n_c) >= n_c {
            return Err(Error::Infeasible(format!(
                "noise degree {r} would relabel all {n_c} members of class {class}"
            )));
        }
    }
    Ok(())
}

pub fn plan(dataset: &Dataset, r: f64, seed_value: u64) -> Result<PerturbationPlan> {
    check_feasible(dataset, r)?;
    let k = dataset.class_count();
    let mut rng = seed::rng(seed_value);
    let mut per_class_flip_counts = BTreeMap::new();
    let mut flips = Vec::new();
    for (class, mut members) in dataset.class_indices().into_iter().enumerate() {
        let count = flip_count(r, members.len());
        per_class_flip_counts.insert(class, count);
        if count == 0 {
            continue;
        }
        members.shuffle(&mut rng);
        for &index in &members[..count] {
            let draw = rng.random_range(0..k - 1);
            let to = if draw >= class { draw + 1 } else { draw };
            flips.push(Flip { index, from: class, to });
        }
    }
    flips.sort_unstable_by_key(|f| f.index);
    Ok(PerturbationPlan {
        noise_degree: r,
        seed: seed_value,
        n_samples: dataset.n_samples(),
        class_count: k,
        per_class_flip_counts,
        flips,
    })
}

/// The perturbed sample. Features are untouched.
pub fn apply(dataset: &Dataset, plan: &PerturbationPlan) -> Result<Dataset> {
    if plan.n_samples != dataset.n_samples() {
        return Err(Error::PlanMismatch(format!(
            "plan covers {} samples, dataset has {}",
            plan.n_samples,
            dataset.n_samples()
        )));
    }
    if plan.class_count != dataset.class_count() {
        return Err(Error::PlanMismatch(format!(
            "plan has {} classes, dataset has {}",
            plan.class_count,
            dataset.class_count()
        )));
    }
    let mut labels = dataset.labels().to_vec();
    for flip in &plan.flips {
        if flip.index >= labels.len() || labels[flip.index] != flip.from {
            return Err(Error::PlanMismatch(format!(
                "sample {} does not carry label {}",
                flip.index, flip.from
            )));
        }
        labels[flip.index] = flip.to;
    }
    dataset.with_labels(labels)
}

/// Convenience for `apply(dataset, &plan(dataset, r, seed)?)`.
pub fn perturb(dataset: &Dataset, r: f64, seed_value: u64) -> Result<Dataset> {
    apply(dataset, &plan(dataset, r, seed_value)?)
}
