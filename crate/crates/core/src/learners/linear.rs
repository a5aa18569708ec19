use rand::seq::SliceRandom;

use crate::datasets::Dataset;
use crate::seed;

/// Initial learning rate of the logistic-regression SGD; the rate decays
/// as `ETA0 / (1 + t / n)`.
const LOGREG_ETA0: f64 = 0.5;

/// Linear decision functions over standardized features, one per class
/// (one-vs-rest), or a single function for binary problems.
#[derive(Debug, Clone)]
pub struct LinearModel {
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// `d` weights followed by the bias.
    weights: Vec<Vec<f64>>,
    class_count: usize,
}

struct Standardized {
    rows: Vec<f64>,
    mean: Vec<f64>,
    scale: Vec<f64>,
    d: usize,
}

impl Standardized {
    fn new(data: &Dataset) -> Self {
        let n = data.n_samples() as f64;
        let d = data.n_features();
        let mut mean = vec![0.0; d];
        for i in 0..data.n_samples() {
            for (m, x) in mean.iter_mut().zip(data.row(i)) {
                *m += x / n;
            }
        }
        let mut scale = vec![0.0; d];
        for i in 0..data.n_samples() {
            for ((s, x), m) in scale.iter_mut().zip(data.row(i)).zip(&mean) {
                *s += (x - m) * (x - m) / n;
            }
        }
        for s in scale.iter_mut() {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        let mut rows = Vec::with_capacity(data.n_samples() * d);
        for i in 0..data.n_samples() {
            rows.extend(data.row(i).iter().zip(&mean).zip(&scale).map(|((x, m), s)| (x - m) / s));
        }
        Standardized { rows, mean, scale, d }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }
}

fn score(w: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d]
}

/// Indices visited in each epoch, drawn once so every one-vs-rest
/// subproblem sees the same order.
fn epoch_orders(n: usize, epochs: usize, train_seed: u64) -> Vec<Vec<usize>> {
    let mut rng = seed::rng(train_seed);
    (0..epochs)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order
        })
        .collect()
}

/// Target classes of the one-vs-rest subproblems.
fn positive_classes(k: usize) -> Vec<usize> {
    if k == 2 {
        vec![1]
    } else {
        (0..k).collect()
    }
}

impl LinearModel {
    /// Hinge loss with `lambda = 1 / (C n)`, step `1 / (lambda t)` and the
    /// Pegasos projection onto the ball of radius `1 / sqrt(lambda)`. The
    /// bias is carried as a constant feature.
    pub fn fit_svm(data: &Dataset, c: f64, epochs: usize, train_seed: u64) -> Self {
        let x = Standardized::new(data);
        let n = data.n_samples();
        let lambda = 1.0 / (c * n as f64);
        let radius = 1.0 / lambda.sqrt();
        let orders = epoch_orders(n, epochs, train_seed);
        let weights = positive_classes(data.class_count())
            .into_iter()
            .map(|positive| {
                let mut w = vec![0.0; x.d + 1];
                let mut t = 0usize;
                for order in &orders {
                    for &i in order {
                        t += 1;
                        let eta = 1.0 / (lambda * t as f64);
                        let y = if data.labels()[i] == positive { 1.0 } else { -1.0 };
                        let margin = y * score(&w, x.row(i));
                        let shrink = 1.0 - eta * lambda;
                        w.iter_mut().for_each(|v| *v *= shrink);
                        if margin < 1.0 {
                            for (wj, xj) in w.iter_mut().zip(x.row(i)) {
                                *wj += eta * y * xj;
                            }
                            w[x.d] += eta * y;
                        }
                        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if norm > radius {
                            w.iter_mut().for_each(|v| *v *= radius / norm);
                        }
                    }
                }
                w
            })
            .collect();
        LinearModel {
            mean: x.mean,
            scale: x.scale,
            weights,
            class_count: data.class_count(),
        }
    }

    /// Log loss plus `l2 / 2 * |w|²` (bias unpenalized), plain SGD.
    pub fn fit_logistic(data: &Dataset, l2: f64, epochs: usize, train_seed: u64) -> Self {
        let x = Standardized::new(data);
        let n = data.n_samples();
        let orders = epoch_orders(n, epochs, train_seed);
        let weights = positive_classes(data.class_count())
            .into_iter()
            .map(|positive| {
                let mut w = vec![0.0; x.d + 1];
                let mut t = 0usize;
                for order in &orders {
                    for &i in order {
                        let eta = LOGREG_ETA0 / (1.0 + t as f64 / n as f64);
                        t += 1;
                        let y = if data.labels()[i] == positive { 1.0 } else { 0.0 };
                        let p = 1.0 / (1.0 + (-score(&w, x.row(i))).exp());
                        let g = p - y;
                        for (wj, xj) in w.iter_mut().zip(x.row(i)) {
                            *wj -= eta * (g * xj + l2 * *wj);
                        }
                        w[x.d] -= eta * g;
                    }
                }
                w
            })
            .collect();
        LinearModel {
            mean: x.mean,
            scale: x.scale,
            weights,
            class_count: data.class_count(),
        }
    }

    /// Decision values, one per one-vs-rest subproblem.
    pub fn decision_function(&self, row: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = row
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect();
        self.weights.iter().map(|w| score(w, &z)).collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let scores = self.decision_function(row);
        if self.class_count == 2 {
            return usize::from(scores[0] > 0.0);
        }
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = c;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate, load_csv, Family, LabelColumn, SyntheticSpec};

    fn accuracy(m: &LinearModel, data: &Dataset) -> f64 {
        let hits = (0..data.n_samples())
            .filter(|&i| m.predict_row(data.row(i)) == data.labels()[i])
            .count();
        hits as f64 / data.n_samples() as f64
    }

    /// Searches a grid of directions and all midpoint offsets for a line
    /// that separates the two classes exactly.
    fn find_separator(data: &Dataset) -> Option<(f64, f64)> {
        for step in 0..720 {
            let angle = step as f64 * std::f64::consts::PI / 360.0;
            let (ux, uy) = (angle.cos(), angle.sin());
            let mut proj: Vec<(f64, usize)> = (0..data.n_samples())
                .map(|i| (ux * data.row(i)[0] + uy * data.row(i)[1], data.labels()[i]))
                .collect();
            proj.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let n0 = proj.iter().filter(|p| p.1 == 0).count();
            if proj[..n0].iter().all(|p| p.1 == 0) && proj[n0 - 1].0 < proj[n0].0 {
                return Some((angle, (proj[n0 - 1].0 + proj[n0].0) / 2.0));
            }
        }
        None
    }

    #[test]
    fn svm_fits_separable_data() {
        let data = generate(&SyntheticSpec::new(Family::Linear, 100, 0.0, 12)).unwrap();
        assert!(find_separator(&data).is_some(), "oracle found no separating line");
        let svm = LinearModel::fit_svm(&data, 1.0, 200, 0);
        assert!(accuracy(&svm, &data) >= 0.95);
    }

    #[test]
    fn logistic_fits_separable_data() {
        let data = generate(&SyntheticSpec::new(Family::Linear, 100, 0.0, 12)).unwrap();
        let lr = LinearModel::fit_logistic(&data, 0.01, 100, 0);
        assert!(accuracy(&lr, &data) >= 0.95);
    }

    #[test]
    fn one_vs_rest_on_iris() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv");
        let iris = load_csv(path, &LabelColumn::Name("species".into()), true).unwrap();
        let svm = LinearModel::fit_svm(&iris, 1.0, 100, 1);
        let lr = LinearModel::fit_logistic(&iris, 0.001, 100, 1);
        assert_eq!(svm.weights.len(), 3);
        assert!(accuracy(&svm, &iris) > 0.85);
        assert!(accuracy(&lr, &iris) > 0.9);
    }

    #[test]
    fn constant_feature_is_harmless() {
        let mut rows = Vec::new();
        for i in 0..20 {
            rows.extend([3.0, i as f64]);
        }
        let labels = (0..20).map(|i| usize::from(i >= 10)).collect();
        let data = Dataset::new("c", ndarray::Array2::from_shape_vec((20, 2), rows).unwrap(), labels, 2).unwrap();
        let svm = LinearModel::fit_svm(&data, 1.0, 50, 0);
        assert!(svm.decision_function(&[3.0, 5.0]).iter().all(|v| v.is_finite()));
        assert_eq!(accuracy(&svm, &data), 1.0);
    }
}
