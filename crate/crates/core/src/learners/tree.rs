use crate::datasets::Dataset;

use super::argmax_lowest;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        class: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART classification tree with Gini impurity.
///
/// Candidate thresholds are midpoints between consecutive distinct values.
/// Among equally good splits the lowest feature index wins, then the lowest
/// threshold. Impure nodes are split as long as some threshold exists, even
/// when the best split does not lower the impurity; an unbounded tree
/// therefore memorizes any sample whose rows are distinct.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    depth: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// `n * gini` for a node with the given class counts.
fn weighted_gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - sq / n as f64
}

impl DecisionTree {
    pub fn fit(data: &Dataset, max_depth: Option<usize>) -> Self {
        let k = data.class_count();
        let mut tree = DecisionTree {
            nodes: Vec::new(),
            depth: 0,
        };
        // (node slot, sample indices, depth)
        tree.nodes.push(Node::Leaf { class: 0 });
        let mut stack = vec![(0usize, (0..data.n_samples()).collect::<Vec<_>>(), 0usize)];
        while let Some((slot, idx, depth)) = stack.pop() {
            tree.depth = tree.depth.max(depth);
            let mut counts = vec![0usize; k];
            for &i in &idx {
                counts[data.labels()[i]] += 1;
            }
            let majority = argmax_lowest(&counts);
            let pure = counts[majority] == idx.len();
            let depth_left = max_depth.is_none_or(|d| depth < d);
            let split = if !pure && depth_left {
                best_split(data, &idx, &counts)
            } else {
                None
            };
            let Some(split) = split else {
                tree.nodes[slot] = Node::Leaf { class: majority };
                continue;
            };
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| data.row(i)[split.feature] <= split.threshold);
            let left = tree.nodes.len();
            let right = left + 1;
            tree.nodes.push(Node::Leaf { class: 0 });
            tree.nodes.push(Node::Leaf { class: 0 });
            tree.nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            stack.push((right, right_idx, depth + 1));
            stack.push((left, left_idx, depth + 1));
        }
        tree
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Depth of the deepest leaf; a stump has depth 1.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

fn best_split(data: &Dataset, idx: &[usize], counts: &[usize]) -> Option<BestSplit> {
    let n = idx.len();
    let k = counts.len();
    let mut best: Option<BestSplit> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0usize; k];
    let mut right = vec![0usize; k];
    for feature in 0..data.n_features() {
        sorted.clear();
        sorted.extend(idx.iter().map(|&i| (data.row(i)[feature], data.labels()[i])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(counts);
        for pos in 0..n - 1 {
            let (v, y) = sorted[pos];
            left[y] += 1;
            right[y] -= 1;
            let next = sorted[pos + 1].0;
            if v == next {
                continue;
            }
            let impurity = weighted_gini(&left, pos + 1) + weighted_gini(&right, n - pos - 1);
            if best.as_ref().is_none_or(|b| impurity < b.impurity - 1e-12) {
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                best = Some(BestSplit {
                    feature,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best
}
