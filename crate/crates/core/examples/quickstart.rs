//! PV scores of the built-in learners on one small synthetic dataset.
//!
//! cargo run --release --example quickstart

use pvkit::datasets::{generate, Family, SyntheticSpec};
use pvkit::learners::LearnerSpec;
use pvkit::pv::{pv_validate, NoiseSchedule};

fn main() -> pvkit::Result<()> {
    let data = generate(&SyntheticSpec::new(Family::Moon, 100, 0.2, 1))?;
    let schedule = NoiseSchedule::with_seed(42);

    let learners = [
        LearnerSpec::decision_tree(Some(10)),
        LearnerSpec::decision_tree(Some(3)),
        LearnerSpec::knn(1),
        LearnerSpec::knn(5),
        LearnerSpec::gaussian_nb(),
        LearnerSpec::linear_svm(1.0, 200),
        LearnerSpec::logistic_regression(0.01, 200),
    ];

    println!("{:<42} {:>7} {:>7} {:>6} {:>9}", "learner", "folded", "slope", "r2", "train acc");
    for spec in &learners {
        let res = pv_validate(spec, &data, &schedule)?;
        let r2 = res.r_squared.map_or("-".to_owned(), |r| format!("{r:.3}"));
        println!(
            "{:<42} {:>7.3} {:>7.3} {:>6} {:>9.3}",
            spec.to_string(),
            res.folded_score,
            res.raw_slope_magnitude,
            r2,
            res.clean_accuracy().unwrap_or(f64::NAN),
        );
    }

    // Mean accuracy per noise degree for one learner.
    let res = pv_validate(&LearnerSpec::decision_tree(Some(3)), &data, &schedule)?;
    println!("\ndecision_tree(max_depth=3) curve:");
    for (r, acc) in res.curve.mean_by_degree() {
        println!("  r={r:.1}  acc={acc:.3}");
    }
    Ok(())
}
