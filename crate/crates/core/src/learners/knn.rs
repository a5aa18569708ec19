use crate::datasets::Dataset;

use super::argmax_lowest;

/// Brute-force k-nearest-neighbours with Euclidean distance.
///
/// Equal distances are ordered by training index; a tied vote goes to the
/// lowest class id. `k` larger than the training set uses every sample.
#[derive(Debug, Clone)]
pub struct Knn {
    k: usize,
    rows: Vec<f64>,
    labels: Vec<usize>,
    n_features: usize,
    class_count: usize,
}

impl Knn {
    pub fn fit(data: &Dataset, k: usize) -> Self {
        Knn {
            k: k.min(data.n_samples()),
            rows: data.features().iter().copied().collect(),
            labels: data.labels().to_vec(),
            n_features: data.n_features(),
            class_count: data.class_count(),
        }
    }

    /// Training indices of the `k` nearest rows, nearest first.
    pub fn neighbours(&self, row: &[f64]) -> Vec<usize> {
        let d = self.n_features;
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .chunks_exact(d)
            .enumerate()
            .map(|(i, r)| (r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
            dist.truncate(self.k);
        }
        dist.sort_unstable_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.class_count];
        for i in self.neighbours(row) {
            votes[self.labels[i]] += 1;
        }
        argmax_lowest(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate, Family, SyntheticSpec};
    use ndarray::array;

    #[test]
    fn one_nn_memorizes_any_labeling() {
        let data = generate(&SyntheticSpec::new(Family::Circle, 60, 0.2, 1)).unwrap();
        let scrambled: Vec<usize> = (0..60).map(|i| (i * 7 / 3) % 2).collect();
        let data = data.with_labels(scrambled).unwrap();
        let knn = Knn::fit(&data, 1);
        for i in 0..60 {
            assert_eq!(knn.predict_row(data.row(i)), data.labels()[i]);
        }
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let data = Dataset::new("t", array![[-1.0], [1.0]], vec![1, 0], 2).unwrap();
        assert_eq!(Knn::fit(&data, 1).predict_row(&[0.0]), 1);
        // k=2: one vote each, lowest class wins.
        assert_eq!(Knn::fit(&data, 2).predict_row(&[0.0]), 0);
    }

    #[test]
    fn k_is_clamped() {
        let data = Dataset::new("t", array![[0.0], [1.0], [2.0]], vec![1, 0, 1], 2).unwrap();
        assert_eq!(Knn::fit(&data, 50).predict_row(&[0.0]), 1);
    }

    #[test]
    fn neighbours_match_full_sort() {
        let data = generate(&SyntheticSpec::new(Family::Moon, 50, 0.3, 4)).unwrap();
        let knn = Knn::fit(&data, 7);
        let q = [0.3, 0.1];
        let mut all: Vec<(f64, usize)> = (0..50)
            .map(|i| {
                let r = data.row(i);
                ((r[0] - q[0]).powi(2) + (r[1] - q[1]).powi(2), i)
            })
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let expected: Vec<usize> = all[..7].iter().map(|p| p.1).collect();
        assert_eq!(knn.neighbours(&q), expected);
    }
}
