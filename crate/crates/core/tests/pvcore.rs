use pvkit::datasets::{generate, Family, SyntheticSpec};
use pvkit::fixtures::{MajorityLearner, OracleLearner};
use pvkit::learners::LearnerSpec;
use pvkit::pv::{build_curve, pv_validate, pv_validate_with, slope_bound, NoiseSchedule};
use pvkit::Error;

fn schedule(seed: u64) -> NoiseSchedule {
    NoiseSchedule::new(vec![0.0, 0.1, 0.2, 0.3], 10, seed).unwrap()
}

#[test]
fn one_nn_curve_is_flat() {
    let data = generate(&SyntheticSpec::new(Family::Moon, 100, 0.0, 1)).unwrap();
    let curve = build_curve(&LearnerSpec::knn(1), &data, &schedule(2)).unwrap();
    assert_eq!(curve.points.len(), 40);
    assert!(curve.points.iter().all(|p| p.acc == 1.0));
}

#[test]
fn oracle_accuracy_is_one_minus_r() {
    let data = generate(&SyntheticSpec::new(Family::Circle, 1000, 0.1, 3)).unwrap();
    let oracle = OracleLearner::new(&[&data]);
    let curve = build_curve(&oracle, &data, &schedule(4)).unwrap();
    // Balanced classes of 500: round(500 r) flips each, so exactly r of all labels.
    for p in &curve.points {
        assert!((p.acc - (1.0 - p.r)).abs() < 1e-12, "{p:?}");
    }
    let res = pv_validate_with(&oracle, "oracle".into(), &data, &schedule(4)).unwrap();
    assert!((res.raw_slope_magnitude - 1.0).abs() < 1e-12);
    assert!((res.folded_score - 1.0).abs() < 1e-12);
}

#[test]
fn majority_stays_at_half() {
    let data = generate(&SyntheticSpec::new(Family::Moon, 200, 0.2, 5)).unwrap();
    let curve = build_curve(&MajorityLearner, &data, &schedule(6)).unwrap();
    // Per-class flips keep the classes balanced.
    assert!(curve.points.iter().all(|p| p.acc == 0.5));
}

#[test]
fn linear_learner_beats_deep_tree_on_linear_data() {
    let data = generate(&SyntheticSpec::new(Family::Linear, 100, 0.0, 7)).unwrap();
    let svm = pv_validate(&LearnerSpec::linear_svm(1.0, 200), &data, &schedule(8)).unwrap();
    let tree = pv_validate(&LearnerSpec::decision_tree(Some(10)), &data, &schedule(8)).unwrap();
    assert!(svm.folded_score > tree.folded_score, "{} vs {}", svm.folded_score, tree.folded_score);
}

#[test]
fn raw_slope_respects_bound() {
    let data = generate(&SyntheticSpec::new(Family::Moon, 120, 0.3, 9)).unwrap();
    for spec in [LearnerSpec::gaussian_nb(), LearnerSpec::decision_tree(Some(2)), LearnerSpec::knn(5)] {
        let res = pv_validate(&spec, &data, &schedule(10)).unwrap();
        assert!(res.raw_slope_magnitude <= slope_bound(&res.curve) + 1e-12);
        assert!(res.folded_score <= 1.0);
    }
}

#[test]
fn same_seed_same_result() {
    let data = generate(&SyntheticSpec::new(Family::Linear, 80, 0.2, 11)).unwrap();
    let spec = LearnerSpec::logistic_regression(0.01, 50);
    let a = pv_validate(&spec, &data, &schedule(12)).unwrap();
    let b = pv_validate(&spec, &data, &schedule(12)).unwrap();
    assert_eq!(a, b);
    let c = pv_validate(&spec, &data, &schedule(13)).unwrap();
    assert_ne!(a.curve, c.curve);
}

#[test]
fn infeasible_degree_is_rejected() {
    let data = generate(&SyntheticSpec::new(Family::Moon, 10, 0.0, 1)).unwrap();
    let s = NoiseSchedule::new(vec![0.0, 0.5, 0.95], 1, 0).unwrap();
    assert!(matches!(
        pv_validate(&LearnerSpec::gaussian_nb(), &data, &s),
        Err(Error::Infeasible(_))
    ));
}

#[test]
fn without_baseline_uses_perturbed_points_only() {
    let data = generate(&SyntheticSpec::new(Family::Circle, 100, 0.1, 2)).unwrap();
    let mut s = schedule(3);
    s.include_baseline = false;
    let res = pv_validate(&LearnerSpec::gaussian_nb(), &data, &s).unwrap();
    assert_eq!(res.curve.points.len(), 30);
    assert!(res.curve.points.iter().all(|p| p.r > 0.0));
    assert_eq!(res.clean_accuracy(), None);
}
