use std::f64::consts::PI;

use crate::datasets::Dataset;

/// Variance floor applied per class and feature.
pub const VAR_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with per-class diagonal covariances.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    /// `ln P(c)`, `-inf` for classes absent from training.
    log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(data: &Dataset) -> Self {
        let k = data.class_count();
        let d = data.n_features();
        let counts = data.class_counts();
        let mut means = vec![vec![0.0; d]; k];
        for i in 0..data.n_samples() {
            let c = data.labels()[i];
            for (m, x) in means[c].iter_mut().zip(data.row(i)) {
                *m += x;
            }
        }
        for (c, m) in means.iter_mut().enumerate() {
            if counts[c] > 0 {
                m.iter_mut().for_each(|v| *v /= counts[c] as f64);
            }
        }
        let mut variances = vec![vec![0.0; d]; k];
        for i in 0..data.n_samples() {
            let c = data.labels()[i];
            for ((v, x), m) in variances[c].iter_mut().zip(data.row(i)).zip(&means[c]) {
                *v += (x - m) * (x - m);
            }
        }
        for (c, var) in variances.iter_mut().enumerate() {
            let n_c = counts[c].max(1) as f64;
            var.iter_mut().for_each(|v| *v = (*v / n_c).max(VAR_FLOOR));
        }
        let n = data.n_samples() as f64;
        let log_priors = counts
            .iter()
            .map(|&c| if c == 0 { f64::NEG_INFINITY } else { (c as f64 / n).ln() })
            .collect();
        GaussianNb {
            log_priors,
            means,
            variances,
        }
    }

    pub fn log_joint(&self, row: &[f64]) -> Vec<f64> {
        self.log_priors
            .iter()
            .enumerate()
            .map(|(c, &prior)| {
                if prior == f64::NEG_INFINITY {
                    return prior;
                }
                let ll: f64 = row
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((x, m), v)| -0.5 * ((2.0 * PI * v).ln() + (x - m) * (x - m) / v))
                    .sum();
                prior + ll
            })
            .collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let scores = self.log_joint(row);
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = c;
            }
        }
        best
    }
}
