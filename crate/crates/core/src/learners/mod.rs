//! Classifiers behind a uniform train / predict interface.
//!
//! [`LearnerSpec`] names one of five built-in families with its
//! hyperparameters; [`train`] turns it into a [`TrainedModel`]. Anything
//! implementing [`Learner`] can be validated, which is how the test
//! fixtures in [`crate::fixtures`] plug in.

mod knn;
mod linear;
mod naive_bayes;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

pub use knn::Knn;
pub use linear::LinearModel;
pub use naive_bayes::GaussianNb;
pub use tree::DecisionTree;

use crate::datasets::Dataset;
use crate::{Error, Result};

pub const DEFAULT_SVM_C: f64 = 1.0;
pub const DEFAULT_SVM_EPOCHS: usize = 200;
pub const DEFAULT_LOGREG_L2: f64 = 0.01;
pub const DEFAULT_LOGREG_EPOCHS: usize = 200;
pub const DEFAULT_KNN_K: usize = 5;

fn default_svm_c() -> f64 {
    DEFAULT_SVM_C
}
fn default_svm_epochs() -> usize {
    DEFAULT_SVM_EPOCHS
}
fn default_logreg_l2() -> f64 {
    DEFAULT_LOGREG_L2
}
fn default_logreg_epochs() -> usize {
    DEFAULT_LOGREG_EPOCHS
}
fn default_knn_k() -> usize {
    DEFAULT_KNN_K
}

/// Learner family and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LearnerKind {
    /// CART with Gini impurity. `None` grows until leaves are pure.
    DecisionTree {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_depth: Option<usize>,
    },
    GaussianNb,
    /// One-vs-rest hinge loss, Pegasos-style subgradient descent.
    LinearSvm {
        #[serde(default = "default_svm_c", alias = "C")]
        c: f64,
        #[serde(default = "default_svm_epochs")]
        epochs: usize,
    },
    /// One-vs-rest log loss with an L2 penalty, stochastic gradient descent.
    LogisticRegression {
        #[serde(default = "default_logreg_l2")]
        l2: f64,
        #[serde(default = "default_logreg_epochs")]
        epochs: usize,
    },
    Knn {
        #[serde(default = "default_knn_k")]
        k: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    #[serde(flatten)]
    pub kind: LearnerKind,
    #[serde(default)]
    pub train_seed: u64,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind) -> Self {
        Self { kind, train_seed: 0 }
    }

    pub fn decision_tree(max_depth: Option<usize>) -> Self {
        Self::new(LearnerKind::DecisionTree { max_depth })
    }

    pub fn gaussian_nb() -> Self {
        Self::new(LearnerKind::GaussianNb)
    }

    pub fn linear_svm(c: f64, epochs: usize) -> Self {
        Self::new(LearnerKind::LinearSvm { c, epochs })
    }

    pub fn logistic_regression(l2: f64, epochs: usize) -> Self {
        Self::new(LearnerKind::LogisticRegression { l2, epochs })
    }

    pub fn knn(k: usize) -> Self {
        Self::new(LearnerKind::Knn { k })
    }

    pub fn with_train_seed(mut self, seed: u64) -> Self {
        self.train_seed = seed;
        self
    }

    pub fn family(&self) -> &'static str {
        match self.kind {
            LearnerKind::DecisionTree { .. } => "decision_tree",
            LearnerKind::GaussianNb => "gaussian_nb",
            LearnerKind::LinearSvm { .. } => "linear_svm",
            LearnerKind::LogisticRegression { .. } => "logistic_regression",
            LearnerKind::Knn { .. } => "knn",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::Hyperparameter {
                family: self.family().to_owned(),
                reason,
            })
        };
        match self.kind {
            LearnerKind::DecisionTree { max_depth: Some(0) } => bad("max_depth must be >= 1".into()),
            LearnerKind::LinearSvm { c, .. } if !(c > 0.0 && c.is_finite()) => {
                bad(format!("C must be > 0, got {c}"))
            }
            LearnerKind::LinearSvm { epochs: 0, .. }
            | LearnerKind::LogisticRegression { epochs: 0, .. } => bad("epochs must be >= 1".into()),
            LearnerKind::LogisticRegression { l2, .. } if !(l2 >= 0.0 && l2.is_finite()) => {
                bad(format!("l2 must be >= 0, got {l2}"))
            }
            LearnerKind::Knn { k: 0 } => bad("k must be >= 1".into()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for LearnerSpec {
    /// `decision_tree(max_depth=10)`, `knn(k=1)`, `gaussian_nb`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family())?;
        match &self.kind {
            LearnerKind::DecisionTree { max_depth: Some(d) } => write!(f, "(max_depth={d})"),
            LearnerKind::DecisionTree { max_depth: None } | LearnerKind::GaussianNb => Ok(()),
            LearnerKind::LinearSvm { c, epochs } => write!(f, "(C={c},epochs={epochs})"),
            LearnerKind::LogisticRegression { l2, epochs } => write!(f, "(l2={l2},epochs={epochs})"),
            LearnerKind::Knn { k } => write!(f, "(k={k})"),
        }
    }
}

impl FromStr for LearnerSpec {
    type Err = Error;

    /// Parses `family[:key=value,...]`, e.g. `decision_tree:max_depth=3`,
    /// `linear_svm:C=0.5,epochs=100`, `knn:k=1,train_seed=4`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("expected key=value in learner spec, got {pair:?}"))
            })?;
            params.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        let family_err = |reason: String| Error::Hyperparameter {
            family: family.to_owned(),
            reason,
        };
        let mut take = |key: &str| params.remove(key);
        fn num<T: FromStr>(key: &str, v: Option<String>, family: &str) -> Result<Option<T>> {
            v.map(|v| {
                v.parse().map_err(|_| Error::Hyperparameter {
                    family: family.to_owned(),
                    reason: format!("cannot parse {key}={v}"),
                })
            })
            .transpose()
        }
        let train_seed = num("train_seed", take("train_seed"), family)?.unwrap_or(0);
        let kind = match family.trim() {
            "decision_tree" | "tree" => LearnerKind::DecisionTree {
                max_depth: num("max_depth", take("max_depth"), family)?,
            },
            "gaussian_nb" | "nb" => LearnerKind::GaussianNb,
            "linear_svm" | "svm" => {
                let c = take("C").or_else(|| take("c"));
                LearnerKind::LinearSvm {
                    c: num("C", c, family)?.unwrap_or(DEFAULT_SVM_C),
                    epochs: num("epochs", take("epochs"), family)?.unwrap_or(DEFAULT_SVM_EPOCHS),
                }
            }
            "logistic_regression" | "logreg" => LearnerKind::LogisticRegression {
                l2: num("l2", take("l2"), family)?.unwrap_or(DEFAULT_LOGREG_L2),
                epochs: num("epochs", take("epochs"), family)?.unwrap_or(DEFAULT_LOGREG_EPOCHS),
            },
            "knn" => LearnerKind::Knn {
                k: num("k", take("k"), family)?.unwrap_or(DEFAULT_KNN_K),
            },
            other => {
                return Err(Error::InvalidArgument(format!("unknown learner family {other:?}")))
            }
        };
        if let Some(key) = params.keys().next() {
            return Err(family_err(format!("unknown hyperparameter {key:?}")));
        }
        let spec = LearnerSpec { kind, train_seed };
        spec.validate()?;
        Ok(spec)
    }
}

/// A fitted classifier.
pub trait Predictor: Send + Sync {
    fn n_features(&self) -> usize;

    fn class_count(&self) -> usize;

    /// Class id for one feature row of length [`Predictor::n_features`].
    fn predict_row(&self, row: &[f64]) -> usize;

    fn predict(&self, features: &Array2<f64>) -> Result<Vec<usize>> {
        if features.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: features.ncols(),
            });
        }
        Ok(features
            .rows()
            .into_iter()
            .map(|row| with_slice(row, |r| self.predict_row(r)))
            .collect())
    }
}

fn with_slice<T>(row: ArrayView1<'_, f64>, f: impl FnOnce(&[f64]) -> T) -> T {
    match row.as_slice() {
        Some(s) => f(s),
        None => f(&row.to_vec()),
    }
}

/// Anything that can be trained on a dataset.
pub trait Learner: Send + Sync {
    /// Human-readable identifier used in reports.
    fn label(&self) -> String;

    fn fit(&self, data: &Dataset) -> Result<Box<dyn Predictor>>;
}

impl Learner for LearnerSpec {
    fn label(&self) -> String {
        self.to_string()
    }

    fn fit(&self, data: &Dataset) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(train(self, data)?))
    }
}

#[derive(Debug, Clone)]
pub enum ModelParams {
    Tree(DecisionTree),
    NaiveBayes(GaussianNb),
    Linear(LinearModel),
    Knn(Knn),
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub spec: LearnerSpec,
    pub params: ModelParams,
    class_count: usize,
    n_features: usize,
}

impl Predictor for TrainedModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn class_count(&self) -> usize {
        self.class_count
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        match &self.params {
            ModelParams::Tree(m) => m.predict_row(row),
            ModelParams::NaiveBayes(m) => m.predict_row(row),
            ModelParams::Linear(m) => m.predict_row(row),
            ModelParams::Knn(m) => m.predict_row(row),
        }
    }
}

/// Fits `spec` on `data`. Deterministic in `(spec, data)`.
pub fn train(spec: &LearnerSpec, data: &Dataset) -> Result<TrainedModel> {
    spec.validate()?;
    check_trainable(data)?;
    let params = match spec.kind {
        LearnerKind::DecisionTree { max_depth } => ModelParams::Tree(DecisionTree::fit(data, max_depth)),
        LearnerKind::GaussianNb => ModelParams::NaiveBayes(GaussianNb::fit(data)),
        LearnerKind::LinearSvm { c, epochs } => {
            ModelParams::Linear(LinearModel::fit_svm(data, c, epochs, spec.train_seed))
        }
        LearnerKind::LogisticRegression { l2, epochs } => {
            ModelParams::Linear(LinearModel::fit_logistic(data, l2, epochs, spec.train_seed))
        }
        LearnerKind::Knn { k } => ModelParams::Knn(Knn::fit(data, k)),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        params,
        class_count: data.class_count(),
        n_features: data.n_features(),
    })
}

/// Training needs at least one feature and two distinct labels.
pub fn check_trainable(data: &Dataset) -> Result<()> {
    if data.n_features() == 0 {
        return Err(Error::InvalidDataset("no feature columns".into()));
    }
    if data.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::SingleClass);
    }
    Ok(())
}

pub fn predict(model: &dyn Predictor, features: &Array2<f64>) -> Result<Vec<usize>> {
    model.predict(features)
}

/// Fraction of rows of `data` whose prediction equals the row's label.
pub fn training_accuracy(model: &dyn Predictor, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty dataset".into()));
    }
    let predicted = model.predict(data.features())?;
    let hits = predicted
        .iter()
        .zip(data.labels())
        .filter(|(p, y)| p == y)
        .count();
    Ok(hits as f64 / data.n_samples() as f64)
}

/// Lowest class id with the highest count.
pub(crate) fn argmax_lowest(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    best
}
