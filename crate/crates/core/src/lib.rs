//! Perturbation validation for classifiers.
//!
//! A learner is scored by how fast its training accuracy drops when a
//! growing fraction of the training labels is flipped and the model is
//! retrained. A learner that has captured the real structure loses roughly
//! one unit of accuracy per unit of injected noise; a memorizer keeps its
//! training accuracy and an underpowered learner had little to lose. The
//! least-squares slope of accuracy against noise degree is folded through
//! `1 - |slope - 1|` so that the score peaks at 1.
//!
//! Module map:
//!
//! - [`datasets`]: synthetic moon / circle / linear generators, CSV I/O,
//!   stratified splits and nested subsamples.
//! - [`learners`]: decision tree, Gaussian naive Bayes, linear SVM,
//!   logistic regression and k-nearest-neighbours behind one interface.
//! - [`perturbation`]: per-class label flipping plans.
//! - [`pv`]: accuracy-vs-noise curves, slope fit, folding and the R²
//!   linearity diagnostic.
//! - [`baselines`]: k-fold cross-validation and hold-out accuracy.
//! - [`runner`]: experiment grids, config files and result tables.
//!
//! ```
//! use pvkit::datasets::{generate, Family, SyntheticSpec};
//! use pvkit::learners::LearnerSpec;
//! use pvkit::pv::{pv_validate, NoiseSchedule};
//!
//! let data = generate(&SyntheticSpec::new(Family::Moon, 100, 0.0, 7)).unwrap();
//! let schedule = NoiseSchedule::new(vec![0.0, 0.1, 0.2, 0.3], 3, 42).unwrap();
//! let result = pv_validate(&LearnerSpec::knn(1), &data, &schedule).unwrap();
//! // 1-NN reproduces any labeling of distinct points, so its curve is flat.
//! assert_eq!(result.folded_score, 0.0);
//! ```

pub mod baselines;
pub mod datasets;
mod error;
pub mod fixtures;
pub mod learners;
pub mod perturbation;
pub mod pv;
pub mod runner;
pub mod seed;

pub use error::{Error, Result};
