//! Model-selection grid from a TOML config, written to CSV and JSON.
//!
//! cargo run --release --example model_selection [-- path/to/config.toml]

use pvkit::runner::{report, run_model_selection, ExperimentConfig};

fn main() -> pvkit::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/select.toml").to_owned());
    let mut config = ExperimentConfig::load(&path)?;
    config.output_dir = std::env::temp_dir().join("pvkit-select");

    let rows = run_model_selection(&config)?;
    println!("{:<22} {:<42} {:>6} {:>6} {:>6} {:>6}", "dataset", "learner", "pv", "train", "cv", "test");
    let fmt = |v: Option<f64>| v.map_or("-".to_owned(), |x| format!("{x:.3}"));
    for r in &rows {
        println!(
            "{:<22} {:<42} {:>6} {:>6} {:>6} {:>6}",
            r.dataset,
            r.learner,
            fmt(r.pv_folded),
            fmt(r.train_accuracy),
            fmt(r.cv_mean),
            fmt(r.holdout_accuracy)
        );
    }
    for p in report::save_experiment(&config.output_dir, "select", &config, &rows)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
