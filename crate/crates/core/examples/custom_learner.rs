//! Plug a user-defined learner into PV and cross-validation.
//!
//! cargo run --release --example custom_learner

use pvkit::baselines::{cross_validate, CvSpec};
use pvkit::datasets::{generate, Dataset, Family, SyntheticSpec};
use pvkit::learners::{check_trainable, Learner, Predictor};
use pvkit::pv::{pv_validate_with, NoiseSchedule};

/// Assigns each row to the class with the nearest mean.
struct NearestCentroid;

struct Centroids {
    means: Vec<Vec<f64>>,
}

impl Predictor for Centroids {
    fn n_features(&self) -> usize {
        self.means[0].len()
    }

    fn class_count(&self) -> usize {
        self.means.len()
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        let dist = |m: &Vec<f64>| m.iter().zip(row).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        (0..self.means.len())
            .min_by(|&a, &b| dist(&self.means[a]).total_cmp(&dist(&self.means[b])))
            .unwrap_or(0)
    }
}

impl Learner for NearestCentroid {
    fn label(&self) -> String {
        "nearest_centroid".into()
    }

    fn fit(&self, data: &Dataset) -> pvkit::Result<Box<dyn Predictor>> {
        check_trainable(data)?;
        let d = data.n_features();
        let mut means = vec![vec![0.0; d]; data.class_count()];
        let counts = data.class_counts();
        for i in 0..data.n_samples() {
            let c = data.labels()[i];
            for (m, x) in means[c].iter_mut().zip(data.row(i)) {
                *m += x / counts[c].max(1) as f64;
            }
        }
        Ok(Box::new(Centroids { means }))
    }
}

fn main() -> pvkit::Result<()> {
    for family in [Family::Linear, Family::Moon, Family::Circle] {
        let data = generate(&SyntheticSpec::new(family, 200, 0.2, 1))?;
        let pv = pv_validate_with(&NearestCentroid, "nearest_centroid".into(), &data, &NoiseSchedule::with_seed(2))?;
        let cv = cross_validate(&NearestCentroid, &data, &CvSpec::default())?;
        println!(
            "{:<22} pv={:.3} r2={} cv={:.3}",
            data.name(),
            pv.folded_score,
            pv.r_squared.map_or("-".into(), |r| format!("{r:.3}")),
            cv.mean
        );
    }
    Ok(())
}
