//! PV next to cross-validation and training accuracy on a CSV dataset.
//!
//! cargo run --release --example cross_validation

use pvkit::baselines::{cross_validate, CvSpec};
use pvkit::datasets::{load_csv, LabelColumn};
use pvkit::learners::{train, training_accuracy, LearnerSpec};
use pvkit::pv::{pv_validate, NoiseSchedule};

fn main() -> pvkit::Result<()> {
    let data = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/breast_cancer.csv"),
        &LabelColumn::Name("diagnosis".into()),
        true,
    )?;
    let cv = CvSpec { folds: 3, stratified: true, seed: 0 };
    let schedule = NoiseSchedule::with_seed(0);

    println!("{:<42} {:>8} {:>12} {:>6}", "learner", "train", "cv", "pv");
    for spec in [
        LearnerSpec::decision_tree(Some(2)),
        LearnerSpec::decision_tree(None),
        LearnerSpec::knn(1),
        LearnerSpec::knn(7),
        LearnerSpec::gaussian_nb(),
        LearnerSpec::linear_svm(1.0, 200),
    ] {
        let model = train(&spec, &data)?;
        let ta = training_accuracy(&model, &data)?;
        let res = cross_validate(&spec, &data, &cv)?;
        let pv = pv_validate(&spec, &data, &schedule)?;
        println!(
            "{:<42} {:>8.3} {:>6.3}±{:.3} {:>6.3}",
            spec.to_string(),
            ta,
            res.mean,
            res.std,
            pv.folded_score
        );
    }
    Ok(())
}
