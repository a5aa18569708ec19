//! PV, CV and training accuracy of decision trees as the depth grows.
//!
//! cargo run --release --example depth_sweep

use pvkit::datasets::{Family, LabelColumn};
use pvkit::runner::{run_hyperparam_sweep, DatasetSource, ExperimentConfig};

fn main() -> pvkit::Result<()> {
    let config = ExperimentConfig::new(
        vec![
            DatasetSource::Synthetic {
                family: Family::Moon,
                n_samples: 100,
                feature_noise: 0.0,
                label_flip: 0.0,
                seed: None,
                test_samples: 0,
            },
            DatasetSource::Csv {
                path: concat!(env!("CARGO_MANIFEST_DIR"), "/data/breast_cancer.csv").into(),
                label_column: LabelColumn::Name("diagnosis".into()),
                header: true,
                test_path: None,
            },
        ],
        Vec::new(),
    );
    let depths: Vec<usize> = (1..=12).collect();
    let rows = run_hyperparam_sweep(&config, &depths)?;

    let mut current = String::new();
    for r in &rows {
        if r.dataset != current {
            current = r.dataset.clone();
            println!("\n{current}\n depth  pv (mean ± std)   train    cv");
        }
        let bar = "#".repeat((r.pv_rep_mean.unwrap_or(0.0) * 40.0) as usize);
        println!(
            " {:>5}  {:.3} ± {:.3}   {:.3}  {:.3}  {bar}",
            r.max_depth().unwrap_or(0),
            r.pv_rep_mean.unwrap_or(f64::NAN),
            r.pv_rep_std.unwrap_or(f64::NAN),
            r.train_accuracy.unwrap_or(f64::NAN),
            r.cv_mean.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
