//! Datasets: synthetic generators, CSV I/O, stratified splits and subsamples.
//!
//! A [`Dataset`] built through [`Dataset::new`], [`generate`] or
//! [`load_csv`] has every class in `0..k` represented. Parts produced by
//! [`split`] or [`Dataset::select`] keep the parent's class count but may
//! miss classes (an empty test part, a tiny fold).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

/// Inner-to-outer radius ratio of the circle family.
pub const CIRCLE_FACTOR: f64 = 0.5;

/// Blob centres of the linear family sit at `(-1, -1)` and `(1, 1)`.
const LINEAR_CENTER: f64 = 1.0;
/// Intrinsic standard deviation of each linear blob before jitter.
const LINEAR_SPREAD: f64 = 0.6;
/// Minimum distance from the separating line `x + y = 0` in the clean data.
const LINEAR_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    class_count: usize,
    name: String,
    label_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset and checks the full invariants: labels in range,
    /// finite features, `k >= 2`, every class present.
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        let ds = Self::from_parts(name.into(), features, labels, class_count, None)?;
        ds.check_all_classes_present()?;
        Ok(ds)
    }

    fn from_parts(
        name: String,
        features: Array2<f64>,
        labels: Vec<usize>,
        class_count: usize,
        label_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if class_count < 2 {
            return Err(Error::InvalidDataset(format!(
                "class count must be at least 2, got {class_count}"
            )));
        }
        if features.nrows() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} outside [0, {class_count})"
            )));
        }
        if let Some(((r, c), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature {v} at row {r}, column {c}"
            )));
        }
        let label_names =
            label_names.unwrap_or_else(|| (0..class_count).map(|c| c.to_string()).collect());
        // Row slices are taken straight from the backing buffer.
        let features = features.as_standard_layout().into_owned();
        Ok(Self {
            features,
            labels,
            class_count,
            name,
            label_names,
        })
    }

    fn check_all_classes_present(&self) -> Result<()> {
        let counts = self.class_counts();
        if counts.iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::SingleClass);
        }
        if let Some(missing) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidDataset(format!("class {missing} has no samples")));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Original label strings indexed by class id.
    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.features.as_slice().expect("standard layout")[i * d..(i + 1) * d]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Sample indices grouped by class, ascending within each class.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.class_count];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups
    }

    /// Same features and metadata with a replacement label vector.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::from_parts(
            self.name.clone(),
            self.features.clone(),
            labels,
            self.class_count,
            Some(self.label_names.clone()),
        )
    }

    /// Re-expresses the labels in the class ids of `reference`, matching by
    /// label name.
    pub fn align_labels_to(&self, reference: &Dataset) -> Result<Self> {
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                let name = &self.label_names[l];
                reference.label_names.iter().position(|n| n == name).ok_or_else(|| {
                    Error::InvalidDataset(format!("label {name:?} not present in reference data"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(
            self.name.clone(),
            self.features.clone(),
            labels,
            reference.class_count,
            Some(reference.label_names.clone()),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Rows at `indices`, in that order. The class count is kept even if
    /// some class ends up empty.
    pub fn select(&self, indices: &[usize]) -> Self {
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self {
            features,
            labels,
            class_count: self.class_count,
            name: self.name.clone(),
            label_names: self.label_names.clone(),
        }
    }

    /// True when no two feature rows are bit-identical.
    pub fn rows_distinct(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.n_samples());
        (0..self.n_samples()).all(|i| seen.insert(row_key(self.row(i))))
    }
}

pub(crate) fn row_key(row: &[f64]) -> Vec<u64> {
    // -0.0 and 0.0 are the same point.
    row.iter().map(|v| (v + 0.0).to_bits()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Moon,
    Circle,
    Linear,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Moon => "moon",
            Family::Circle => "circle",
            Family::Linear => "linear",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moon" | "moons" => Ok(Family::Moon),
            "circle" | "circles" => Ok(Family::Circle),
            "linear" => Ok(Family::Linear),
            other => Err(Error::InvalidArgument(format!(
                "unknown synthetic family {other:?} (expected moon, circle or linear)"
            ))),
        }
    }
}

/// Parameters of a synthetic two-class, two-feature dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub family: Family,
    pub n_samples: usize,
    /// Standard deviation of isotropic Gaussian jitter added to coordinates.
    #[serde(default)]
    pub feature_noise: f64,
    #[serde(default)]
    pub seed: u64,
    /// Fraction of labels flipped per class after generation. Zero keeps
    /// the generator's labels.
    #[serde(default)]
    pub label_flip: f64,
}

impl SyntheticSpec {
    pub fn new(family: Family, n_samples: usize, feature_noise: f64, seed: u64) -> Self {
        Self {
            family,
            n_samples,
            feature_noise,
            seed,
            label_flip: 0.0,
        }
    }

    /// `moon-100`, `linear-100-noise0.2`, ...
    pub fn dataset_name(&self) -> String {
        let mut name = format!("{}-{}", self.family, self.n_samples);
        if self.feature_noise > 0.0 {
            name.push_str(&format!("-noise{}", self.feature_noise));
        }
        if self.label_flip > 0.0 {
            name.push_str(&format!("-flip{}", self.label_flip));
        }
        name
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples < 4 {
            return Err(Error::InvalidArgument(format!(
                "n_samples must be at least 4, got {}",
                self.n_samples
            )));
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "feature_noise must be a finite value >= 0, got {}",
                self.feature_noise
            )));
        }
        if !(0.0..1.0).contains(&self.label_flip) {
            return Err(Error::InvalidArgument(format!(
                "label_flip must be in [0, 1), got {}",
                self.label_flip
            )));
        }
        Ok(())
    }
}

fn linspace(start: f64, stop: f64, n: usize, endpoint: bool) -> impl Iterator<Item = f64> {
    let div = if endpoint { n.saturating_sub(1).max(1) } else { n.max(1) } as f64;
    let step = (stop - start) / div;
    (0..n).map(move |i| start + step * i as f64)
}

/// Generates a balanced two-class dataset in two dimensions.
///
/// - moon: two interleaving half circles; class 0 is the upper arc of the
///   unit circle, class 1 the lower arc centred at `(1, 0.5)`.
/// - circle: class 0 on the unit circle, class 1 on a concentric circle of
///   radius [`CIRCLE_FACTOR`].
/// - linear: two Gaussian blobs around `(-1, -1)` and `(1, 1)`, truncated so
///   that the clean data keeps a margin around `x + y = 0`.
///
/// Class 0 gets `n / 2` points and class 1 the rest. Rows are shuffled and
/// then jittered with `N(0, feature_noise²)` on each coordinate.
pub fn generate(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let n0 = spec.n_samples / 2;
    let n1 = spec.n_samples - n0;
    let mut rng = seed::rng(spec.seed);

    let mut points: Vec<([f64; 2], usize)> = Vec::with_capacity(spec.n_samples);
    match spec.family {
        Family::Moon => {
            points.extend(linspace(0.0, PI, n0, true).map(|t| ([t.cos(), t.sin()], 0)));
            points.extend(
                linspace(0.0, PI, n1, true).map(|t| ([1.0 - t.cos(), 1.0 - t.sin() - 0.5], 1)),
            );
        }
        Family::Circle => {
            points.extend(linspace(0.0, 2.0 * PI, n0, false).map(|t| ([t.cos(), t.sin()], 0)));
            points.extend(
                linspace(0.0, 2.0 * PI, n1, false)
                    .map(|t| ([CIRCLE_FACTOR * t.cos(), CIRCLE_FACTOR * t.sin()], 1)),
            );
        }
        Family::Linear => {
            let blob = Normal::new(0.0, LINEAR_SPREAD).expect("valid spread");
            for (class, count, sign) in [(0usize, n0, -1.0), (1, n1, 1.0)] {
                let mut made = 0;
                while made < count {
                    let p = [
                        sign * LINEAR_CENTER + blob.sample(&mut rng),
                        sign * LINEAR_CENTER + blob.sample(&mut rng),
                    ];
                    if sign * (p[0] + p[1]) / 2f64.sqrt() >= LINEAR_MARGIN {
                        points.push((p, class));
                        made += 1;
                    }
                }
            }
        }
    }

    points.shuffle(&mut rng);
    if spec.feature_noise > 0.0 {
        let jitter = Normal::new(0.0, spec.feature_noise).expect("validated noise");
        for (p, _) in points.iter_mut() {
            p[0] += jitter.sample(&mut rng);
            p[1] += jitter.sample(&mut rng);
        }
    }

    let mut features = Array2::zeros((spec.n_samples, 2));
    let mut labels = Vec::with_capacity(spec.n_samples);
    for (i, (p, l)) in points.into_iter().enumerate() {
        features[[i, 0]] = p[0];
        features[[i, 1]] = p[1];
        labels.push(l);
    }
    let ds = Dataset::new(spec.dataset_name(), features, labels, 2)?;
    if spec.label_flip > 0.0 {
        let plan = crate::perturbation::plan(&ds, spec.label_flip, seed::derive(spec.seed, &[0xF11F]))?;
        return crate::perturbation::apply(&ds, &plan);
    }
    Ok(ds)
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".to_owned())
    }
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(s.parse::<usize>()
            .map(LabelColumn::Index)
            .unwrap_or_else(|_| LabelColumn::Name(s.to_owned())))
    }
}

/// Loads a comma-separated file. Every column except the label column must
/// be numeric. Labels are re-encoded to `0..k` in order of first appearance
/// and the original strings are kept in [`Dataset::label_names`].
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |source| Error::Csv {
        path: path.to_owned(),
        source,
    };

    let label_idx = match label_column {
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => {
            if !has_header {
                return Err(Error::InvalidArgument(format!(
                    "label column {name:?} given by name but the file has no header"
                )));
            }
            let headers = reader.headers().map_err(csv_err)?;
            headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::InvalidDataset(format!("label column {name:?} not found in {}", path.display()))
            })?
        }
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut width = None;
    let line_offset = if has_header { 2 } else { 1 };
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if label_idx >= record.len() {
            return Err(Error::InvalidDataset(format!(
                "label column {label_idx} missing at row {}",
                r + line_offset
            )));
        }
        let w = *width.get_or_insert(record.len());
        if w != record.len() {
            return Err(Error::InvalidDataset(format!(
                "row {} has {} columns, expected {w}",
                r + line_offset,
                record.len()
            )));
        }
        for (c, cell) in record.iter().enumerate() {
            if c == label_idx {
                let next = ids.len();
                let id = *ids.entry(cell.to_owned()).or_insert_with(|| {
                    names.push(cell.to_owned());
                    next
                });
                labels.push(id);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                    row: r + line_offset,
                    column: c,
                    value: cell.to_owned(),
                })?;
                values.push(v);
            }
        }
    }
    let n = labels.len();
    if n == 0 {
        return Err(Error::InvalidDataset(format!("{} has no data rows", path.display())));
    }
    if names.len() < 2 {
        return Err(Error::SingleClass);
    }
    let d = values.len() / n;
    let features = Array2::from_shape_vec((n, d), values)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_owned());
    let k = names.len();
    let ds = Dataset::from_parts(name, features, labels, k, Some(names))?;
    ds.check_all_classes_present()?;
    Ok(ds)
}

/// Writes `x0..x{d-1},label` with a header line. Labels are written as their
/// original names, floats in shortest round-trip form.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_owned(),
        source,
    })?;
    let csv_err = |source| Error::Csv {
        path: path.to_owned(),
        source,
    };
    let mut header: Vec<String> = (0..dataset.n_features()).map(|j| format!("x{j}")).collect();
    header.push("label".to_owned());
    writer.write_record(&header).map_err(csv_err)?;
    for i in 0..dataset.n_samples() {
        let mut record: Vec<String> = dataset.row(i).iter().map(|v| v.to_string()).collect();
        record.push(dataset.label_names[dataset.labels[i]].clone());
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    #[serde(default = "default_true")]
    pub stratified: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

pub(crate) fn round_half_up(x: f64) -> usize {
    // The epsilon absorbs products such as 0.15 * 10 = 1.4999999999999998.
    (x + 0.5 + 1e-9).floor() as usize
}

/// Splits into `(train, test)`. Both parts keep the input's row order.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&spec.test_fraction) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction must be in [0, 1), got {}",
            spec.test_fraction
        )));
    }
    let mut rng = seed::rng(spec.seed);
    let mut test_idx = Vec::new();
    if spec.stratified {
        for (class, mut members) in dataset.class_indices().into_iter().enumerate() {
            let take = round_half_up(spec.test_fraction * members.len() as f64);
            if !members.is_empty() && take >= members.len() {
                return Err(Error::Infeasible(format!(
                    "test_fraction {} leaves no training sample of class {class}",
                    spec.test_fraction
                )));
            }
            members.shuffle(&mut rng);
            test_idx.extend_from_slice(&members[..take]);
        }
    } else {
        let mut all: Vec<usize> = (0..dataset.n_samples()).collect();
        all.shuffle(&mut rng);
        let take = round_half_up(spec.test_fraction * all.len() as f64).min(all.len());
        test_idx.extend_from_slice(&all[..take]);
    }
    test_idx.sort_unstable();
    let mut in_test = vec![false; dataset.n_samples()];
    for &i in &test_idx {
        in_test[i] = true;
    }
    let train_idx: Vec<usize> = (0..dataset.n_samples()).filter(|&i| !in_test[i]).collect();
    Ok((dataset.select(&train_idx), dataset.select(&test_idx)))
}

/// A permutation of all rows whose every prefix is stratified: for each
/// prefix length `m` and class `c`, the count of `c` stays within one sample
/// of `m * n_c / n`.
///
/// Members of each class are shuffled, then the `j`-th member of class `c`
/// is scheduled at deadline `(j + δ) / n_c` with `δ = 1 / (2k - 2)` and
/// rows are emitted in deadline order (ties by class id). This is the
/// earliest-deadline schedule of Tijdeman's chairman assignment, whose
/// prefix discrepancy is at most `1 - δ`.
pub fn stratified_order(dataset: &Dataset, seed_value: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed_value);
    let mut groups = dataset.class_indices();
    for g in groups.iter_mut() {
        g.shuffle(&mut rng);
    }
    let scale = (2 * dataset.class_count() - 2) as u128;
    // (class, position within class); deadline = (scale * j + 1) / (scale * n_c).
    let mut slots: Vec<(usize, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(c, g)| (0..g.len()).map(move |j| (c, j)))
        .collect();
    slots.sort_by(|&(ca, ja), &(cb, jb)| {
        let na = groups[ca].len() as u128;
        let nb = groups[cb].len() as u128;
        let lhs = (scale * ja as u128 + 1) * nb;
        let rhs = (scale * jb as u128 + 1) * na;
        lhs.cmp(&rhs).then(ca.cmp(&cb))
    });
    slots.into_iter().map(|(c, j)| groups[c][j]).collect()
}

/// Stratified random subsample of `n_target` rows. For a fixed seed the
/// subsamples are nested: a smaller target is a prefix of a larger one.
pub fn subsample(dataset: &Dataset, n_target: usize, seed_value: u64) -> Result<Dataset> {
    if n_target < dataset.class_count() {
        return Err(Error::InvalidArgument(format!(
            "n_target {n_target} is below the class count {}",
            dataset.class_count()
        )));
    }
    if n_target > dataset.n_samples() {
        return Err(Error::InvalidArgument(format!(
            "n_target {n_target} exceeds the dataset size {}",
            dataset.n_samples()
        )));
    }
    let order = stratified_order(dataset, seed_value);
    let sub = dataset.select(&order[..n_target]);
    let name = format!("{}@{}", dataset.name(), n_target);
    Ok(sub.with_name(name))
}
