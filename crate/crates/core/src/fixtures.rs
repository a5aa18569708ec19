//! Reference learners with known perturbation behaviour.
//!
//! - [`OracleLearner`] ignores its training labels and answers with the
//!   ground truth it was built from, so its training accuracy on a
//!   perturbed sample is exactly `1 - (flipped fraction)`.
//! - [`MajorityLearner`] always predicts the most frequent training label.

use std::collections::HashMap;

use crate::datasets::{row_key, Dataset};
use crate::learners::{argmax_lowest, check_trainable, Learner, Predictor};
use crate::Result;

#[derive(Debug, Clone)]
pub struct OracleLearner {
    truth: HashMap<Vec<u64>, usize>,
    n_features: usize,
    class_count: usize,
}

impl OracleLearner {
    /// Ground truth is looked up by exact feature row. Later datasets
    /// override earlier ones on duplicate rows.
    pub fn new(truth: &[&Dataset]) -> Self {
        let first = truth.first().expect("at least one ground-truth dataset");
        let mut map = HashMap::new();
        for ds in truth {
            for i in 0..ds.n_samples() {
                map.insert(row_key(ds.row(i)), ds.labels()[i]);
            }
        }
        OracleLearner {
            truth: map,
            n_features: first.n_features(),
            class_count: first.class_count(),
        }
    }
}

impl Predictor for OracleLearner {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn class_count(&self) -> usize {
        self.class_count
    }

    /// Rows outside the ground truth get class 0.
    fn predict_row(&self, row: &[f64]) -> usize {
        self.truth.get(&row_key(row)).copied().unwrap_or(0)
    }
}

impl Learner for OracleLearner {
    fn label(&self) -> String {
        "oracle".to_owned()
    }

    fn fit(&self, data: &Dataset) -> Result<Box<dyn Predictor>> {
        check_trainable(data)?;
        Ok(Box::new(self.clone()))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityLearner;

#[derive(Debug, Clone, Copy)]
pub struct MajorityModel {
    class: usize,
    n_features: usize,
    class_count: usize,
}

impl Predictor for MajorityModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn class_count(&self) -> usize {
        self.class_count
    }

    fn predict_row(&self, _row: &[f64]) -> usize {
        self.class
    }
}

impl Learner for MajorityLearner {
    fn label(&self) -> String {
        "majority".to_owned()
    }

    fn fit(&self, data: &Dataset) -> Result<Box<dyn Predictor>> {
        check_trainable(data)?;
        Ok(Box::new(MajorityModel {
            class: argmax_lowest(&data.class_counts()),
            n_features: data.n_features(),
            class_count: data.class_count(),
        }))
    }
}
