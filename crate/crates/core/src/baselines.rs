//! Out-of-sample validators reported next to PV: k-fold cross-validation
//! accuracy and hold-out test accuracy.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::learners::{training_accuracy, Learner};
use crate::seed;
use crate::{Error, Result};

pub const DEFAULT_FOLDS: usize = 3;

fn default_folds() -> usize {
    DEFAULT_FOLDS
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSpec {
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_true")]
    pub stratified: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for CvSpec {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            stratified: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub per_fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl CvResult {
    fn from_folds(per_fold_accuracies: Vec<f64>) -> Self {
        let n = per_fold_accuracies.len() as f64;
        let mean = per_fold_accuracies.iter().sum::<f64>() / n;
        let var = per_fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        Self {
            per_fold_accuracies,
            mean,
            std: var.sqrt(),
        }
    }
}

/// Fold id of every sample.
///
/// Stratified: each class is shuffled and the classes are concatenated in
/// id order, then samples are dealt to folds round-robin. Per-class and
/// overall fold sizes differ by at most one. Unstratified: one shuffle of
/// all samples, dealt the same way.
pub fn assign_folds(data: &Dataset, cv: &CvSpec) -> Result<Vec<usize>> {
    if cv.folds < 2 {
        return Err(Error::InvalidArgument(format!("folds must be >= 2, got {}", cv.folds)));
    }
    if cv.folds > data.n_samples() {
        return Err(Error::Infeasible(format!(
            "{} folds for {} samples",
            cv.folds,
            data.n_samples()
        )));
    }
    let mut rng = seed::rng(cv.seed);
    let order: Vec<usize> = if cv.stratified {
        let mut order = Vec::with_capacity(data.n_samples());
        for (class, mut members) in data.class_indices().into_iter().enumerate() {
            if !members.is_empty() && members.len() < cv.folds {
                return Err(Error::Infeasible(format!(
                    "class {class} has {} members, fewer than {} folds",
                    members.len(),
                    cv.folds
                )));
            }
            members.shuffle(&mut rng);
            order.extend(members);
        }
        order
    } else {
        let mut all: Vec<usize> = (0..data.n_samples()).collect();
        all.shuffle(&mut rng);
        all
    };
    let mut folds = vec![0; data.n_samples()];
    for (pos, i) in order.into_iter().enumerate() {
        folds[i] = pos % cv.folds;
    }
    Ok(folds)
}

/// Trains on `k - 1` folds and scores the held-out fold, for every fold.
pub fn cross_validate(learner: &dyn Learner, data: &Dataset, cv: &CvSpec) -> Result<CvResult> {
    let assignment = assign_folds(data, cv)?;
    let accuracies: Vec<Result<f64>> = (0..cv.folds)
        .into_par_iter()
        .map(|fold| {
            let (test_idx, train_idx): (Vec<usize>, Vec<usize>) =
                (0..data.n_samples()).partition(|&i| assignment[i] == fold);
            holdout_accuracy(learner, &data.select(&train_idx), &data.select(&test_idx))
        })
        .collect();
    Ok(CvResult::from_folds(accuracies.into_iter().collect::<Result<_>>()?))
}

/// Accuracy on `test` of a model fitted on `train`.
pub fn holdout_accuracy(learner: &dyn Learner, train: &Dataset, test: &Dataset) -> Result<f64> {
    if train.n_features() != test.n_features() {
        return Err(Error::DimensionMismatch {
            expected: train.n_features(),
            actual: test.n_features(),
        });
    }
    let model = learner.fit(train)?;
    training_accuracy(model.as_ref(), test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate, Family, SyntheticSpec};
    use crate::fixtures::{MajorityLearner, OracleLearner};
    use crate::learners::LearnerSpec;

    fn moon(n: usize, seed: u64) -> Dataset {
        generate(&SyntheticSpec::new(Family::Moon, n, 0.2, seed)).unwrap()
    }

    #[test]
    fn folds_partition_the_data() {
        let data = moon(101, 1);
        let cv = CvSpec { folds: 3, stratified: true, seed: 4 };
        let folds = assign_folds(&data, &cv).unwrap();
        let mut sizes = [0usize; 3];
        let mut per_class = [[0usize; 2]; 3];
        for (i, &f) in folds.iter().enumerate() {
            sizes[f] += 1;
            per_class[f][data.labels()[i]] += 1;
        }
        assert_eq!(sizes.iter().sum::<usize>(), 101);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for c in 0..2 {
            let counts: Vec<usize> = per_class.iter().map(|f| f[c]).collect();
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn majority_on_balanced_two_folds() {
        let data = moon(100, 2);
        let cv = CvSpec { folds: 2, stratified: true, seed: 0 };
        let res = cross_validate(&MajorityLearner, &data, &cv).unwrap();
        // Each training half holds 25 + 25: the tie goes to class 0, which
        // is half of the held-out fold.
        assert_eq!(res.per_fold_accuracies, vec![0.5, 0.5]);
        assert!((res.mean - 0.5).abs() <= 1.0 / 100.0);
        assert_eq!(res.std, 0.0);
    }

    #[test]
    fn leave_one_out_matches_brute_force() {
        let data = moon(30, 3);
        let n = data.n_samples();
        let learner = LearnerSpec::knn(1);
        let cv = CvSpec { folds: n, stratified: false, seed: 9 };
        let res = cross_validate(&learner, &data, &cv).unwrap();

        // Explicit leave-one-out loop with its own nearest-neighbour search.
        let mut hits = 0;
        for held in 0..n {
            let q = data.row(held);
            let mut best = (f64::INFINITY, 0usize);
            for j in (0..n).filter(|&j| j != held) {
                let r = data.row(j);
                let d = (r[0] - q[0]).powi(2) + (r[1] - q[1]).powi(2);
                if d < best.0 {
                    best = (d, j);
                }
            }
            if data.labels()[best.1] == data.labels()[held] {
                hits += 1;
            }
        }
        assert!((res.mean - hits as f64 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn infeasible_folds() {
        let data = moon(10, 0);
        let cv = CvSpec { folds: 6, stratified: true, seed: 0 };
        assert!(matches!(assign_folds(&data, &cv), Err(Error::Infeasible(_))));
        let cv = CvSpec { folds: 1, stratified: true, seed: 0 };
        assert!(assign_folds(&data, &cv).is_err());
    }

    #[test]
    fn holdout_on_training_set_is_training_accuracy() {
        let data = moon(80, 5);
        let spec = LearnerSpec::decision_tree(Some(3));
        let model = crate::learners::train(&spec, &data).unwrap();
        let direct = training_accuracy(&model, &data).unwrap();
        assert_eq!(holdout_accuracy(&spec, &data, &data).unwrap(), direct);
    }

    #[test]
    fn oracle_holdout_is_perfect() {
        let train = moon(50, 6);
        let test = moon(200, 7);
        let oracle = OracleLearner::new(&[&train, &test]);
        assert_eq!(holdout_accuracy(&oracle, &train, &test).unwrap(), 1.0);
    }

    #[test]
    fn svm_generalizes_on_linear_data() {
        let train = generate(&SyntheticSpec::new(Family::Linear, 100, 0.0, 21)).unwrap();
        let test = generate(&SyntheticSpec::new(Family::Linear, 2000, 0.0, 22)).unwrap();
        // The clean generator is separated by x + y = 0 with a margin.
        let line_acc = (0..test.n_samples())
            .filter(|&i| usize::from(test.row(i)[0] + test.row(i)[1] > 0.0) == test.labels()[i])
            .count() as f64
            / 2000.0;
        assert_eq!(line_acc, 1.0);
        let acc = holdout_accuracy(&LearnerSpec::linear_svm(1.0, 200), &train, &test).unwrap();
        assert!(acc >= 0.9, "{acc}");
    }

    #[test]
    fn dimension_mismatch() {
        let a = moon(20, 0);
        let b = crate::datasets::load_csv(
            concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"),
            &crate::datasets::LabelColumn::Name("species".into()),
            true,
        )
        .unwrap();
        assert!(matches!(
            holdout_accuracy(&LearnerSpec::knn(1), &a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
