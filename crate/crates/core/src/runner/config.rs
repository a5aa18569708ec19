use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::CvSpec;
use crate::datasets::{self, Dataset, Family, LabelColumn, SplitSpec, SyntheticSpec};
use crate::learners::LearnerSpec;
use crate::pv::{NoiseSchedule, DEFAULT_DEGREES, DEFAULT_REPETITIONS};
use crate::seed::{self, stream};
use crate::{Error, Result};

/// Hold-out test sets for synthetic data default to this many points.
pub const DEFAULT_TEST_SAMPLES: usize = 2000;
/// CSV datasets smaller than this are validated on the full data with no
/// hold-out part.
pub const DEFAULT_HOLDOUT_MIN_SAMPLES: usize = 2000;

fn default_true() -> bool {
    true
}
fn default_test_samples() -> usize {
    DEFAULT_TEST_SAMPLES
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_degrees() -> Vec<f64> {
    DEFAULT_DEGREES.to_vec()
}
fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}
fn default_folds() -> usize {
    crate::baselines::DEFAULT_FOLDS
}
fn default_test_fraction() -> f64 {
    0.5
}
fn default_min_samples() -> usize {
    DEFAULT_HOLDOUT_MIN_SAMPLES
}
fn default_label_column() -> LabelColumn {
    LabelColumn::default()
}

/// Where a dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic {
        family: Family,
        n_samples: usize,
        #[serde(default)]
        feature_noise: f64,
        #[serde(default)]
        label_flip: f64,
        /// Derived from the master seed when absent.
        #[serde(default)]
        seed: Option<u64>,
        /// Size of the fresh hold-out sample; 0 disables it.
        #[serde(default = "default_test_samples")]
        test_samples: usize,
    },
    Csv {
        path: PathBuf,
        #[serde(default = "default_label_column")]
        label_column: LabelColumn,
        #[serde(default = "default_true")]
        header: bool,
        /// Separate test file with the same columns.
        #[serde(default)]
        test_path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_degrees")]
    pub degrees: Vec<f64>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_true")]
    pub include_baseline: bool,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            degrees: default_degrees(),
            repetitions: default_repetitions(),
            include_baseline: true,
        }
    }
}

impl ScheduleConfig {
    pub fn schedule(&self, master_seed: u64) -> NoiseSchedule {
        NoiseSchedule {
            degrees: self.degrees.clone(),
            repetitions: self.repetitions,
            master_seed,
            include_baseline: self.include_baseline,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_true")]
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: default_folds(),
            stratified: true,
        }
    }
}

impl CvConfig {
    pub fn spec(&self, seed: u64) -> CvSpec {
        CvSpec {
            folds: self.folds,
            stratified: self.stratified,
            seed,
        }
    }
}

/// Hold-out policy for CSV datasets without a separate test file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoldoutConfig {
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Only datasets with at least this many rows are split.
    #[serde(default = "default_min_samples")]
    pub min_samples: usize,
}

impl Default for HoldoutConfig {
    fn default() -> Self {
        Self {
            test_fraction: default_test_fraction(),
            min_samples: default_min_samples(),
        }
    }
}

/// Grids for the sweep experiments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub max_depths: Vec<usize>,
    #[serde(default)]
    pub size_grid: Vec<usize>,
    #[serde(default)]
    pub noise_grid: Vec<f64>,
}

/// Everything an experiment run needs. Parsed from TOML; see
/// `configs/` in the crate for annotated examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every other seed is derived from it.
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub datasets: Vec<DatasetSource>,
    #[serde(default)]
    pub learners: Vec<LearnerSpec>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default)]
    pub holdout: HoldoutConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

impl ExperimentConfig {
    pub fn new(datasets: Vec<DatasetSource>, learners: Vec<LearnerSpec>) -> Self {
        Self {
            seed: 0,
            jobs: None,
            output_dir: default_output_dir(),
            datasets,
            learners,
            schedule: ScheduleConfig::default(),
            cv: CvConfig::default(),
            holdout: HoldoutConfig::default(),
            sweep: SweepConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML config. Relative dataset paths are resolved against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for ds in config.datasets.iter_mut() {
            if let DatasetSource::Csv { path, test_path, .. } = ds {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
                if let Some(tp) = test_path.as_mut().filter(|tp| tp.is_relative()) {
                    *tp = base.join(&*tp);
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets configured".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        self.schedule.schedule(0).validate()?;
        for learner in &self.learners {
            learner.validate()?;
        }
        Ok(())
    }

    pub fn seeds(&self, dataset_index: usize) -> CellSeeds {
        CellSeeds::new(self.seed, dataset_index)
    }
}

/// Disjoint seed sub-streams for one dataset of a run. Every learner on the
/// same dataset sees the same perturbations and folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSeeds {
    pub dataset: u64,
    pub pv: u64,
    pub cv: u64,
    pub holdout: u64,
    pub subsample: u64,
    pub train_noise: u64,
}

impl CellSeeds {
    pub fn new(master: u64, dataset_index: usize) -> Self {
        let at = |tag| seed::derive(master, &[dataset_index as u64, tag]);
        Self {
            dataset: at(stream::DATASET),
            pv: at(stream::PV),
            cv: at(stream::CV),
            holdout: at(stream::HOLDOUT),
            subsample: at(stream::SUBSAMPLE),
            train_noise: at(stream::TRAIN_NOISE),
        }
    }
}

/// Training data with an optional hold-out test set.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Option<Dataset>,
}

impl DatasetSource {
    /// Loads or generates the data. `n_override` replaces the synthetic
    /// sample size; `force_holdout` splits CSV data even when it is small.
    pub fn prepare(
        &self,
        seeds: &CellSeeds,
        holdout: &HoldoutConfig,
        n_override: Option<usize>,
        force_holdout: bool,
    ) -> Result<PreparedData> {
        match self {
            DatasetSource::Synthetic {
                family,
                n_samples,
                feature_noise,
                label_flip,
                seed,
                test_samples,
            } => {
                let seed = seed.unwrap_or(seeds.dataset);
                let n = n_override.unwrap_or(*n_samples);
                let spec = SyntheticSpec {
                    family: *family,
                    n_samples: n,
                    feature_noise: *feature_noise,
                    seed,
                    label_flip: *label_flip,
                };
                let train = datasets::generate(&spec)?;
                let test = if *test_samples > 0 {
                    let test_spec = SyntheticSpec {
                        n_samples: *test_samples,
                        seed: seed::derive(seed, &[stream::TEST_SET]),
                        label_flip: 0.0,
                        ..spec.clone()
                    };
                    Some(datasets::generate(&test_spec)?.with_name(format!("{}-test", spec.dataset_name())))
                } else {
                    None
                };
                Ok(PreparedData { train, test })
            }
            DatasetSource::Csv {
                path,
                label_column,
                header,
                test_path,
            } => {
                let data = datasets::load_csv(path, label_column, *header)?;
                if let Some(tp) = test_path {
                    let test = datasets::load_csv(tp, label_column, *header)?;
                    let test = test.align_labels_to(&data)?;
                    return Ok(PreparedData { train: data, test: Some(test) });
                }
                if force_holdout || data.n_samples() >= holdout.min_samples {
                    let spec = SplitSpec {
                        test_fraction: holdout.test_fraction,
                        stratified: true,
                        seed: seeds.holdout,
                    };
                    let (train, test) = datasets::split(&data, &spec)?;
                    return Ok(PreparedData { train, test: Some(test) });
                }
                Ok(PreparedData { train: data, test: None })
            }
        }
    }

    /// Name used in reports before the data is loaded.
    pub fn display_name(&self) -> String {
        match self {
            DatasetSource::Synthetic {
                family,
                n_samples,
                feature_noise,
                label_flip,
                ..
            } => SyntheticSpec {
                family: *family,
                n_samples: *n_samples,
                feature_noise: *feature_noise,
                seed: 0,
                label_flip: *label_flip,
            }
            .dataset_name(),
            DatasetSource::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 42
jobs = 2
output_dir = "out"

[schedule]
degrees = [0.0, 0.1, 0.2, 0.3]
repetitions = 3

[cv]
folds = 3

[[datasets]]
kind = "synthetic"
family = "moon"
n_samples = 100
feature_noise = 0.2

[[datasets]]
kind = "csv"
path = "data/iris.csv"
label_column = "species"

[[learners]]
family = "decision_tree"
max_depth = 10

[[learners]]
family = "linear_svm"
C = 1.0
epochs = 50

[sweep]
max_depths = [1, 2, 3]
"#;

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        c.validate().unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.datasets.len(), 2);
        assert_eq!(c.learners[0], LearnerSpec::decision_tree(Some(10)));
        assert_eq!(c.learners[1], LearnerSpec::linear_svm(1.0, 50));
        assert_eq!(c.schedule.repetitions, 3);
        assert_eq!(c.sweep.max_depths, vec![1, 2, 3]);
        assert_eq!(c.datasets[0].display_name(), "moon-100-noise0.2");
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = "datasets = []\nbogus = 1\n";
        assert!(ExperimentConfig::from_toml(bad).is_err());
    }

    #[test]
    fn empty_dataset_list_invalid() {
        let c = ExperimentConfig::from_toml("datasets = []").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn seed_streams_are_disjoint() {
        let s = CellSeeds::new(1, 0);
        let all = [s.dataset, s.pv, s.cv, s.holdout, s.subsample, s.train_noise];
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                assert_ne!(all[i], all[j]);
            }
        }
        assert_ne!(CellSeeds::new(1, 1).pv, s.pv);
    }

    #[test]
    fn synthetic_preparation() {
        let src = DatasetSource::Synthetic {
            family: Family::Linear,
            n_samples: 100,
            feature_noise: 0.2,
            label_flip: 0.0,
            seed: Some(5),
            test_samples: 2000,
        };
        let p = src.prepare(&CellSeeds::new(0, 0), &HoldoutConfig::default(), None, false).unwrap();
        assert_eq!(p.train.n_samples(), 100);
        assert_eq!(p.test.as_ref().unwrap().n_samples(), 2000);
        assert_ne!(p.train.row(0), p.test.as_ref().unwrap().row(0));
    }

    #[test]
    fn small_csv_has_no_holdout() {
        let src = DatasetSource::Csv {
            path: concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv").into(),
            label_column: LabelColumn::Name("species".into()),
            header: true,
            test_path: None,
        };
        let seeds = CellSeeds::new(0, 0);
        let p = src.prepare(&seeds, &HoldoutConfig::default(), None, false).unwrap();
        assert!(p.test.is_none());
        let p = src.prepare(&seeds, &HoldoutConfig::default(), None, true).unwrap();
        assert_eq!(p.test.unwrap().n_samples(), 75);
    }
}
