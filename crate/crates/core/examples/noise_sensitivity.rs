//! How test accuracy degrades when training labels are noisy, next to each
//! learner's clean-data PV.
//!
//! cargo run --release --example noise_sensitivity

use pvkit::datasets::Family;
use pvkit::learners::LearnerSpec;
use pvkit::runner::{run_noise_sensitivity, DatasetSource, ExperimentConfig};

fn main() -> pvkit::Result<()> {
    let config = ExperimentConfig::new(
        vec![DatasetSource::Synthetic {
            family: Family::Moon,
            n_samples: 1000,
            feature_noise: 0.1,
            label_flip: 0.0,
            seed: None,
            test_samples: 2000,
        }],
        vec![
            LearnerSpec::knn(1),
            LearnerSpec::knn(15),
            LearnerSpec::decision_tree(Some(3)),
            LearnerSpec::decision_tree(None),
            LearnerSpec::gaussian_nb(),
        ],
    );
    let grid = [0.0, 0.1, 0.2, 0.3, 0.4];
    let rows = run_noise_sensitivity(&config, &grid)?;

    print!("{:<30} {:>6}", "learner", "pv");
    for r in grid {
        print!(" {:>6}", format!("r={r}"));
    }
    println!();
    for chunk in rows.chunks(grid.len()) {
        print!("{:<30} {:>6.3}", chunk[0].learner, chunk[0].clean_pv_folded.unwrap_or(f64::NAN));
        for row in chunk {
            print!(" {:>6.3}", row.test_accuracy.unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
