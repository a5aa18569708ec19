//! PV and hold-out accuracy of a deep tree on nested samples of growing
//! size.
//!
//! cargo run --release --example size_sweep

use pvkit::datasets::Family;
use pvkit::learners::LearnerSpec;
use pvkit::runner::{run_size_sweep, DatasetSource, ExperimentConfig};

fn main() -> pvkit::Result<()> {
    for family in [Family::Moon, Family::Linear] {
        let mut config = ExperimentConfig::new(
            vec![DatasetSource::Synthetic {
                family,
                n_samples: 10_000,
                feature_noise: 0.0,
                label_flip: 0.0,
                seed: None,
                test_samples: 2000,
            }],
            vec![LearnerSpec::decision_tree(Some(10))],
        );
        config.schedule.repetitions = 5;
        let rows = run_size_sweep(&config, &[100, 300, 1000, 3000, 10_000])?;
        println!("{family}, decision_tree(max_depth=10)\n      n     pv   test");
        for r in &rows {
            println!(
                " {:>6}  {:.3}  {:.3}",
                r.n,
                r.pv_folded.unwrap_or(f64::NAN),
                r.holdout_accuracy.unwrap_or(f64::NAN)
            );
        }
        println!();
    }
    Ok(())
}
