use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{Error, Result};

use super::config::ExperimentConfig;
use super::experiments::{ExperimentRow, NoiseRow, ScatterPoint};

/// A row type with a flat CSV rendering.
pub trait TableRow {
    fn header() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl TableRow for ExperimentRow {
    fn header() -> &'static [&'static str] {
        &[
            "dataset",
            "n",
            "learner",
            "pv_folded",
            "pv_raw_slope",
            "pv_r2",
            "pv_rep_mean",
            "pv_rep_std",
            "train_accuracy",
            "cv_mean",
            "cv_std",
            "holdout_accuracy",
            "pv_seed",
            "cv_seed",
            "error",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.dataset.clone(),
            self.n.to_string(),
            self.learner.clone(),
            opt(self.pv_folded),
            opt(self.pv_raw_slope),
            opt(self.pv_r2),
            opt(self.pv_rep_mean),
            opt(self.pv_rep_std),
            opt(self.train_accuracy),
            opt(self.cv_mean),
            opt(self.cv_std),
            opt(self.holdout_accuracy),
            self.seeds.pv.to_string(),
            self.seeds.cv.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

impl TableRow for NoiseRow {
    fn header() -> &'static [&'static str] {
        &[
            "dataset",
            "n",
            "learner",
            "clean_pv_folded",
            "train_noise",
            "test_accuracy",
            "seed",
            "error",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.dataset.clone(),
            self.n.to_string(),
            self.learner.clone(),
            opt(self.clean_pv_folded),
            num(self.train_noise),
            opt(self.test_accuracy),
            self.seed.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

impl TableRow for ScatterPoint {
    fn header() -> &'static [&'static str] {
        &["dataset", "n", "learner", "train_accuracy", "pv_folded"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.dataset.clone(),
            self.n.to_string(),
            self.learner.clone(),
            num(self.train_accuracy),
            num(self.pv_folded),
        ]
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_owned(),
        source,
    })
}

pub fn write_table<R: TableRow>(rows: &[R], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(R::header()).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.record()).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Rows plus the run configuration that produced them. The output
/// directory and worker count are left out; they do not affect results.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, R> {
    pub experiment: &'a str,
    pub config: serde_json::Value,
    pub rows: &'a [R],
}

impl<'a, R> Manifest<'a, R> {
    pub fn new(experiment: &'a str, config: &ExperimentConfig, rows: &'a [R]) -> Result<Self> {
        let mut config = serde_json::to_value(config)?;
        if let Some(map) = config.as_object_mut() {
            map.remove("output_dir");
            map.remove("jobs");
        }
        Ok(Self {
            experiment,
            config,
            rows,
        })
    }
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Per-cell wall-clock times, kept apart from the reproducible tables.
pub fn write_timings(rows: &[ExperimentRow], path: impl AsRef<Path>) -> Result<()> {
    struct Timing<'a>(&'a ExperimentRow);
    impl TableRow for Timing<'_> {
        fn header() -> &'static [&'static str] {
            &["dataset", "n", "learner", "wall_time_s"]
        }
        fn record(&self) -> Vec<String> {
            vec![
                self.0.dataset.clone(),
                self.0.n.to_string(),
                self.0.learner.clone(),
                format!("{:.6}", self.0.wall_time.as_secs_f64()),
            ]
        }
    }
    let timings: Vec<Timing<'_>> = rows.iter().map(Timing).collect();
    write_table(&timings, path)
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`, plus
/// `<stem>.timings.csv` for experiment rows. Returns the written paths.
pub fn save<R: TableRow + Serialize>(
    dir: impl AsRef<Path>,
    stem: &str,
    config: &ExperimentConfig,
    rows: &[R],
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_table(rows, &csv_path)?;
    write_json(&Manifest::new(stem, config, rows)?, &json_path)?;
    Ok(vec![csv_path, json_path])
}

/// [`save`] for experiment rows, with the timing side file.
pub fn save_experiment(
    dir: impl AsRef<Path>,
    stem: &str,
    config: &ExperimentConfig,
    rows: &[ExperimentRow],
) -> Result<Vec<PathBuf>> {
    let mut paths = save(&dir, stem, config, rows)?;
    let timing_path = dir.as_ref().join(format!("{stem}.timings.csv"));
    write_timings(rows, &timing_path)?;
    paths.push(timing_path);
    Ok(paths)
}

/// Reads the rows back from a JSON manifest written by [`save`].
pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<ExperimentRow>> {
    #[derive(serde::Deserialize)]
    struct Rows {
        rows: Vec<ExperimentRow>,
    }
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(serde_json::from_str::<Rows>(&text)?.rows)
}
