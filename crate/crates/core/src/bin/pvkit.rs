use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pvkit::baselines::{cross_validate, CvSpec};
use pvkit::datasets::{self, Family, LabelColumn, SyntheticSpec};
use pvkit::learners::LearnerSpec;
use pvkit::pv::{pv_validate, NoiseSchedule, DEFAULT_REPETITIONS};
use pvkit::runner::{self, report, ExperimentConfig, ExperimentRow};

#[derive(Parser)]
#[command(name = "pvkit", version, about = "Perturbation validation for classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset to CSV.
    Generate(GenerateArgs),
    /// PV of one learner on one CSV dataset.
    Pv(PvArgs),
    /// K-fold cross-validation accuracy of one learner.
    Cv(CvArgs),
    /// PV, CV and hold-out accuracy for every dataset and learner.
    Select(GridArgs),
    /// Decision-tree depth sweep.
    Sweep(SweepArgs),
    /// Nested-subsample size sweep.
    Size(SizeArgs),
    /// Hold-out accuracy under training-label noise.
    Noise(NoiseArgs),
    /// PV against training accuracy.
    Scatter(ScatterArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Gaussian feature jitter.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Fraction of labels flipped per class.
    #[arg(long, default_value_t = 0.0)]
    label_flip: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with numeric features and one label column.
    #[arg(long)]
    data: PathBuf,
    /// Label column, by header name or 0-based index.
    #[arg(long, default_value = "label")]
    label_column: LabelColumn,
    #[arg(long)]
    no_header: bool,
    /// `family[:key=value,...]`, e.g. `decision_tree:max_depth=3`.
    #[arg(long, default_value = "decision_tree")]
    learner: LearnerSpec,
}

impl DataArgs {
    fn load(&self) -> Result<datasets::Dataset> {
        datasets::load_csv(&self.data, &self.label_column, !self.no_header)
            .with_context(|| format!("loading {}", self.data.display()))
    }
}

#[derive(Args)]
struct PvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    reps: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3")]
    degrees: Vec<f64>,
    /// Leave the unperturbed point out of the regression.
    #[arg(long)]
    no_baseline: bool,
    /// Directory for `pv.json`; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    #[arg(long)]
    unstratified: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for `cv.json`; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

impl GridArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(reps) = self.reps {
            config.schedule.repetitions = reps;
        }
        if let Some(degrees) = &self.degrees {
            config.schedule.degrees = degrees.clone();
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        if self.jobs.is_some() {
            config.jobs = self.jobs;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Overrides `sweep.max_depths`.
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
}

#[derive(Args)]
struct SizeArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Overrides `sweep.size_grid`.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
}

#[derive(Args)]
struct NoiseArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Overrides `sweep.noise_grid`.
    #[arg(long, value_delimiter = ',')]
    noise_grid: Option<Vec<f64>>,
}

#[derive(Args)]
struct ScatterArgs {
    /// Run model selection from this config first.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    config: Option<PathBuf>,
    /// A `select.json` manifest from an earlier run.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: pvkit::Error| e.to_string())
}

fn write_or_print(json: &str, out: Option<&Path>, file: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(file);
            std::fs::write(&path, format!("{json}\n")).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn report_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn errored(rows: &[ExperimentRow]) -> bool {
    let failed: Vec<_> = rows.iter().filter(|r| r.failed()).collect();
    for r in &failed {
        eprintln!(
            "error: {} / {}: {}",
            r.dataset,
            r.learner,
            r.error.as_deref().unwrap_or_default()
        );
    }
    !failed.is_empty()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate(a) => {
            let spec = SyntheticSpec {
                family: a.family,
                n_samples: a.n,
                feature_noise: a.noise,
                seed: a.seed,
                label_flip: a.label_flip,
            };
            let ds = datasets::generate(&spec)?;
            std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
            let path = a.out.join(format!("{}.csv", spec.dataset_name()));
            datasets::write_csv(&ds, &path)?;
            println!("{}", path.display());
            Ok(false)
        }
        Command::Pv(a) => {
            let data = a.data.load()?;
            let schedule = NoiseSchedule {
                degrees: a.degrees,
                repetitions: a.reps,
                master_seed: a.seed,
                include_baseline: !a.no_baseline,
            };
            let result = pv_validate(&a.data.learner, &data, &schedule)?;
            write_or_print(&result.to_json()?, a.out.as_deref(), "pv.json")?;
            eprintln!(
                "{} on {}: folded={} raw_slope={} r2={}",
                a.data.learner,
                data.name(),
                result.folded_score,
                result.raw_slope_magnitude,
                result.r_squared.map_or("n/a".to_owned(), |r| r.to_string())
            );
            Ok(false)
        }
        Command::Cv(a) => {
            let data = a.data.load()?;
            let spec = CvSpec {
                folds: a.folds,
                stratified: !a.unstratified,
                seed: a.seed,
            };
            let result = cross_validate(&a.data.learner, &data, &spec)?;
            let json = serde_json::to_string_pretty(&serde_json::json!({
                "learner": a.data.learner,
                "dataset": data.name(),
                "cv": spec,
                "result": result,
            }))?;
            write_or_print(&json, a.out.as_deref(), "cv.json")?;
            Ok(false)
        }
        Command::Select(a) => {
            let config = a.load()?;
            let rows = runner::run_model_selection(&config)?;
            report_paths(&report::save_experiment(&config.output_dir, "select", &config, &rows)?);
            Ok(errored(&rows))
        }
        Command::Sweep(a) => {
            let config = a.grid.load()?;
            let depths = a.depths.unwrap_or_else(|| config.sweep.max_depths.clone());
            let rows = runner::run_hyperparam_sweep(&config, &depths)?;
            report_paths(&report::save_experiment(&config.output_dir, "sweep", &config, &rows)?);
            Ok(errored(&rows))
        }
        Command::Size(a) => {
            let config = a.grid.load()?;
            let sizes = a.sizes.unwrap_or_else(|| config.sweep.size_grid.clone());
            let rows = runner::run_size_sweep(&config, &sizes)?;
            report_paths(&report::save_experiment(&config.output_dir, "size", &config, &rows)?);
            Ok(errored(&rows))
        }
        Command::Noise(a) => {
            let config = a.grid.load()?;
            let grid = a.noise_grid.unwrap_or_else(|| config.sweep.noise_grid.clone());
            let rows = runner::run_noise_sensitivity(&config, &grid)?;
            report_paths(&report::save(&config.output_dir, "noise", &config, &rows)?);
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("error: {failed} noise rows failed");
            }
            Ok(failed > 0)
        }
        Command::Scatter(a) => {
            let (config, rows) = match (&a.config, &a.input) {
                (Some(path), _) => {
                    let grid = GridArgs {
                        config: path.clone(),
                        seed: a.seed,
                        reps: a.reps,
                        degrees: a.degrees.clone(),
                        out: a.out.clone(),
                        jobs: a.jobs,
                    };
                    let config = grid.load()?;
                    let rows = runner::run_model_selection(&config)?;
                    (config, rows)
                }
                (None, Some(input)) => {
                    let rows = report::read_rows(input)?;
                    let mut config = ExperimentConfig::new(Vec::new(), Vec::new());
                    config.output_dir = a.out.clone().unwrap_or_else(|| PathBuf::from("results"));
                    (config, rows)
                }
                (None, None) => bail!("either --config or --input is required"),
            };
            let points = runner::emit_scatter(&rows);
            report_paths(&report::save(&config.output_dir, "scatter", &config, &points)?);
            Ok(errored(&rows))
        }
    }
}

fn main() -> ExitCode {
    // Exit code 2 is reserved for failed grid cells.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            // Library errors already embed their source in the message.
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
