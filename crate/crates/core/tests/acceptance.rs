//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvkit::datasets::{self, generate, Dataset, Family, LabelColumn, SyntheticSpec};
use pvkit::fixtures::{MajorityLearner, OracleLearner};
use pvkit::learners::{train, training_accuracy, LearnerSpec};
use pvkit::perturbation;
use pvkit::pv::{fit_slope, fold, pv_validate, pv_validate_with, AccuracyCurve, NoiseSchedule};
use pvkit::runner::{
    run_hyperparam_sweep, run_model_selection, run_noise_sensitivity, run_size_sweep, DatasetSource,
    ExperimentConfig,
};
use pvkit::seed;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn synthetic(family: Family, n: usize, sigma: f64, test_samples: usize) -> DatasetSource {
    DatasetSource::Synthetic {
        family,
        n_samples: n,
        feature_noise: sigma,
        label_flip: 0.0,
        seed: None,
        test_samples,
    }
}

fn cancer() -> DatasetSource {
    DatasetSource::Csv {
        path: concat!(env!("CARGO_MANIFEST_DIR"), "/data/breast_cancer.csv").into(),
        label_column: LabelColumn::Name("diagnosis".into()),
        header: true,
        test_path: None,
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

// ---------------------------------------------------------------- 1

fn closed_form_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn slope_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(2..=8);
        let reps = rng.random_range(1..=5);
        let mut degrees: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.99)).collect();
        degrees[0] = 0.0;
        degrees.sort_by(f64::total_cmp);
        degrees.dedup();
        if degrees.len() < 2 {
            degrees = vec![0.0, 0.5];
        }
        let mut pairs = Vec::new();
        for &r in &degrees {
            for _ in 0..reps {
                pairs.push((r, rng.random_range(0.0..=1.0)));
            }
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let got = fit_slope(&AccuracyCurve::from_pairs(&pairs)).map_err(|e| e.to_string())?;
        worst = worst.max((got - closed_form_slope(&xs, &ys).abs()).abs());
    }
    check(worst <= 1e-10, format!("max |diff| = {worst:e} over 1000 curves"))
}

// ---------------------------------------------------------------- 2

fn fold_rule() -> Outcome {
    let at = fold(1.2);
    if at != 0.8 {
        return Err(format!("fold(1.2) = {at}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d: f64 = rng.random_range(0.0..1.0);
        worst = worst.max((fold(1.0 + d) - fold(1.0 - d)).abs());
    }
    check(
        worst <= 4.0 * f64::EPSILON,
        format!("fold(1.2) = 0.8; max |fold(1+d) - fold(1-d)| = {worst:e} over 100 d"),
    )
}

// ---------------------------------------------------------------- 3

fn balanced_binary(n: usize, seed_value: u64) -> Dataset {
    generate(&SyntheticSpec::new(Family::Circle, n, 0.1, seed_value)).expect("circle")
}

fn degenerate_anchors() -> Outcome {
    let mut knn_worst = 0.0f64;
    for master in 0..10u64 {
        let data = generate(&SyntheticSpec::new(Family::Moon, 100, 0.0, seed::derive(master, &[1])))
            .map_err(|e| e.to_string())?;
        let schedule = NoiseSchedule::with_seed(seed::derive(master, &[3]));
        let pv = pv_validate(&LearnerSpec::knn(1), &data, &schedule).map_err(|e| e.to_string())?;
        knn_worst = knn_worst.max(pv.folded_score);
    }

    let data = balanced_binary(100, 5);
    let schedule = NoiseSchedule::with_seed(6);
    let majority = pv_validate_with(&MajorityLearner, "majority".into(), &data, &schedule)
        .map_err(|e| e.to_string())?
        .folded_score;

    let data = balanced_binary(1000, 7);
    let oracle = pv_validate_with(&OracleLearner::new(&[&data]), "oracle".into(), &data, &schedule)
        .map_err(|e| e.to_string())?
        .folded_score;

    check(
        knn_worst <= 0.02 && majority <= 0.02 && oracle >= 0.99,
        format!("knn(k=1) max {knn_worst:.4} over 10 seeds, majority {majority:.4}, oracle {oracle:.4}"),
    )
}

// ---------------------------------------------------------------- 4

fn model_selection_ranks() -> Outcome {
    let learners = vec![
        LearnerSpec::decision_tree(Some(10)),
        LearnerSpec::knn(3),
        LearnerSpec::gaussian_nb(),
        LearnerSpec::linear_svm(1.0, 200),
        LearnerSpec::logistic_regression(0.01, 200),
    ];
    let mut scores: Vec<Vec<f64>> = vec![Vec::new(); learners.len()];
    for master in 0..10u64 {
        let mut config = ExperimentConfig::new(vec![synthetic(Family::Linear, 100, 0.2, 0)], learners.clone());
        config.seed = master;
        let rows = run_model_selection(&config).map_err(|e| e.to_string())?;
        for (i, spec) in learners.iter().enumerate() {
            let label = spec.to_string();
            let row = rows.iter().find(|r| r.learner == label).expect("row per learner");
            scores[i].push(row.pv_folded.ok_or_else(|| format!("{label}: {:?}", row.error))?);
        }
    }
    let medians: Vec<(String, f64)> = learners
        .iter()
        .zip(&scores)
        .map(|(l, s)| (l.family().to_owned(), median(s.clone())))
        .collect();
    let mut ranked = medians.clone();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let top: Vec<&str> = ranked[..2].iter().map(|(f, _)| f.as_str()).collect();
    let detail = ranked
        .iter()
        .map(|(f, m)| format!("{f}={m:.4}"))
        .collect::<Vec<_>>()
        .join(" ");
    check(
        top.contains(&"gaussian_nb") && top.contains(&"linear_svm"),
        format!("median folded PV: {detail}"),
    )
}

// ---------------------------------------------------------------- 5

/// Centered moving average; the window is truncated at both ends.
fn smooth3(v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(v.len() - 1);
            mean(&v[lo..=hi])
        })
        .collect()
}

/// Number of strict local maxima after merging runs of equal values.
fn local_maxima(v: &[f64]) -> usize {
    let mut runs: Vec<f64> = Vec::new();
    for &x in v {
        if runs.last() != Some(&x) {
            runs.push(x);
        }
    }
    (0..runs.len())
        .filter(|&i| (i == 0 || runs[i] > runs[i - 1]) && (i + 1 == runs.len() || runs[i] > runs[i + 1]))
        .count()
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

fn depth_sweep_shape() -> Outcome {
    let depths: Vec<usize> = (1..=12).collect();
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, source) in [
        ("moon-100", synthetic(Family::Moon, 100, 0.0, 0)),
        ("breast_cancer", cancer()),
    ] {
        let config = ExperimentConfig::new(vec![source], Vec::new());
        let rows = run_hyperparam_sweep(&config, &depths).map_err(|e| e.to_string())?;
        let curve: Vec<f64> = rows
            .iter()
            .map(|r| r.pv_rep_mean.ok_or_else(|| format!("{name}: {:?}", r.error)))
            .collect::<Result<_, _>>()?;
        let peak = argmax(&curve);
        let rises_then_falls = peak > 0 && peak + 1 < curve.len() && curve[peak] > curve[0] && curve[peak] > curve[curve.len() - 1];
        let smoothed = smooth3(&curve);
        let maxima = local_maxima(&smoothed);
        ok &= rises_then_falls && maxima == 1;
        notes.push(format!(
            "{name}: peak depth {} ({:.3}), smoothed maxima {maxima} at depth {}",
            depths[peak],
            curve[peak],
            depths[argmax(&smoothed)]
        ));
    }
    check(ok, notes.join("; "))
}

// ---------------------------------------------------------------- 6

fn size_effect() -> Outcome {
    let mut pv_small = Vec::new();
    let mut pv_large = Vec::new();
    let mut ta_small = Vec::new();
    let mut ta_large = Vec::new();
    for master in 0..10u64 {
        let mut config = ExperimentConfig::new(
            vec![synthetic(Family::Moon, 10_000, 0.0, 2000)],
            vec![LearnerSpec::decision_tree(Some(10))],
        );
        config.seed = master;
        let rows = run_size_sweep(&config, &[100, 10_000]).map_err(|e| e.to_string())?;
        let get = |n: usize| rows.iter().find(|r| r.n == n).expect("size row");
        let (s, l) = (get(100), get(10_000));
        pv_small.push(s.pv_folded.ok_or("missing pv")?);
        pv_large.push(l.pv_folded.ok_or("missing pv")?);
        ta_small.push(s.holdout_accuracy.ok_or("missing holdout")?);
        ta_large.push(l.holdout_accuracy.ok_or("missing holdout")?);
    }
    let pv_gap = mean(&pv_large) - mean(&pv_small);
    let ta_gap = (mean(&ta_large) - mean(&ta_small)).abs();
    check(
        pv_gap >= 0.1 && ta_gap <= 0.05,
        format!(
            "PV {:.3} -> {:.3} (gap {pv_gap:.3}), TA {:.4} -> {:.4} (gap {ta_gap:.4}) over 10 seeds",
            mean(&pv_small),
            mean(&pv_large),
            mean(&ta_small),
            mean(&ta_large)
        ),
    )
}

// ---------------------------------------------------------------- 7

fn noise_sensitivity() -> Outcome {
    let knn = LearnerSpec::knn(1);
    let tree = LearnerSpec::decision_tree(Some(3));
    let mut knn_drops = Vec::new();
    let mut tree_drops = Vec::new();
    for master in 0..10u64 {
        let mut config = ExperimentConfig::new(
            vec![synthetic(Family::Moon, 1000, 0.0, 2000)],
            vec![knn.clone(), tree.clone()],
        );
        config.seed = master;
        config.schedule.repetitions = 1;
        let rows = run_noise_sensitivity(&config, &[0.0, 0.3]).map_err(|e| e.to_string())?;
        let drop = |label: String| {
            let acc = |r: f64| {
                rows.iter()
                    .find(|row| row.learner == label && row.train_noise == r)
                    .and_then(|row| row.test_accuracy)
                    .expect("noise row")
            };
            acc(0.0) - acc(0.3)
        };
        knn_drops.push(drop(knn.to_string()));
        tree_drops.push(drop(tree.to_string()));
    }
    let wins = knn_drops.iter().zip(&tree_drops).filter(|(k, t)| k > t).count();
    check(
        mean(&knn_drops) > mean(&tree_drops),
        format!(
            "mean TA drop knn(k=1) {:.4} vs decision_tree(max_depth=3) {:.4}; knn larger in {wins}/10 seeds",
            mean(&knn_drops),
            mean(&tree_drops)
        ),
    )
}

// ---------------------------------------------------------------- 8

fn linearity() -> Outcome {
    let data = generate(&SyntheticSpec::new(Family::Linear, 1000, 0.0, 8)).map_err(|e| e.to_string())?;
    let schedule = NoiseSchedule::with_seed(9);
    let mut notes = Vec::new();
    let mut ok = true;
    for spec in [LearnerSpec::gaussian_nb(), LearnerSpec::linear_svm(1.0, 200)] {
        let pv = pv_validate(&spec, &data, &schedule).map_err(|e| e.to_string())?;
        let r2 = pv.r_squared.unwrap_or(0.0);
        ok &= r2 >= 0.9;
        notes.push(format!("{} R2 = {r2:.4}", spec.family()));
    }
    check(ok, notes.join(", "))
}

// ---------------------------------------------------------------- 9

const REPRO_CONFIG: &str = r#"
seed = 1
[schedule]
repetitions = 3

[[datasets]]
kind = "synthetic"
family = "moon"
n_samples = 100
feature_noise = 0.2
test_samples = 500

[[datasets]]
kind = "csv"
path = "iris.csv"
label_column = "species"

[[learners]]
family = "decision_tree"
max_depth = 4

[[learners]]
family = "linear_svm"
epochs = 50

[[learners]]
family = "knn"
k = 3
"#;

fn run_cli(args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pvkit"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "pvkit {args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("c.toml");
    std::fs::write(&config, REPRO_CONFIG).map_err(|e| e.to_string())?;
    std::fs::copy(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"), dir.path().join("iris.csv"))
        .map_err(|e| e.to_string())?;
    let config = config.to_str().expect("utf-8 path");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_cli(&["select", "--config", config, "--seed", "42", "--out", a.to_str().unwrap()])?;
    run_cli(&["select", "--config", config, "--seed", "42", "--out", b.to_str().unwrap()])?;
    let mut same = true;
    for file in ["select.csv", "select.json"] {
        same &= read(&a.join(file))? == read(&b.join(file))?;
    }
    let lines = String::from_utf8(read(&a.join("select.csv"))?).map_err(|e| e.to_string())?.lines().count();
    check(same, format!("select.csv ({lines} lines) and select.json byte-identical across two runs"))
}

// ---------------------------------------------------------------- 10

fn cli_round_trip() -> Outcome {
    use serde_json::Value;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path().to_str().unwrap();
    let out = run_cli(&["generate", "--family", "moon", "--n", "200", "--noise", "0.2", "--seed", "4", "--out", d])?;
    let csv_path = String::from_utf8(out.stdout).map_err(|e| e.to_string())?.trim().to_owned();
    run_cli(&[
        "pv", "--data", &csv_path, "--learner", "decision_tree:max_depth=4", "--seed", "11", "--reps", "4",
        "--degrees", "0,0.1,0.2,0.3", "--out", d,
    ])?;
    let json: Value = serde_json::from_slice(&read(&dir.path().join("pv.json"))?).map_err(|e| e.to_string())?;

    let mut problems = Vec::new();
    let expect = |ok: bool, what: &str, problems: &mut Vec<String>| {
        if !ok {
            problems.push(what.to_owned());
        }
    };
    expect(json["learner"]["family"].is_string(), "learner.family", &mut problems);
    expect(json["dataset"].is_string(), "dataset", &mut problems);
    expect(json["schedule"]["degrees"].is_array(), "schedule.degrees", &mut problems);
    expect(json["schedule"]["repetitions"].is_u64(), "schedule.repetitions", &mut problems);
    expect(json["schedule"]["master_seed"].is_u64(), "schedule.master_seed", &mut problems);
    expect(json["schedule"]["include_baseline"].is_boolean(), "schedule.include_baseline", &mut problems);
    expect(json["raw_slope"].is_f64(), "raw_slope", &mut problems);
    expect(json["folded"].is_f64(), "folded", &mut problems);
    expect(json["r2"].is_f64() || json["r2"].is_null(), "r2", &mut problems);
    expect(json["exceeds_unit_rate"].is_boolean(), "exceeds_unit_rate", &mut problems);
    let points = json["points"].as_array().cloned().unwrap_or_default();
    expect(points.len() == 16, "16 points", &mut problems);
    for p in &points {
        let ok = p["r"].is_f64() && p["rep"].is_u64() && p["acc"].is_f64() && p["seed"].is_u64();
        expect(ok, "point fields r/rep/acc/seed", &mut problems);
    }
    if !problems.is_empty() {
        return Err(format!("schema violations: {}", problems.join(", ")));
    }

    // Replay every perturbed cell from its recorded seed alone.
    let data = datasets::load_csv(&csv_path, &LabelColumn::default(), true).map_err(|e| e.to_string())?;
    let spec: LearnerSpec = serde_json::from_value(json["learner"].clone()).map_err(|e| e.to_string())?;
    let mut replayed = 0;
    for p in points.iter().filter(|p| p["r"].as_f64() != Some(0.0)) {
        let r = p["r"].as_f64().unwrap();
        let noisy = perturbation::perturb(&data, r, p["seed"].as_u64().unwrap()).map_err(|e| e.to_string())?;
        let model = train(&spec, &noisy).map_err(|e| e.to_string())?;
        let acc = training_accuracy(&model, &noisy).map_err(|e| e.to_string())?;
        if acc != p["acc"].as_f64().unwrap() {
            return Err(format!("cell r={r} rep={} replayed to {acc}, recorded {}", p["rep"], p["acc"]));
        }
        replayed += 1;
    }
    check(replayed == 12, format!("schema valid; {replayed} perturbed cells replayed exactly"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "slope oracle", Duration::from_secs(1), slope_oracle),
        (2, "fold rule", Duration::from_secs(1), fold_rule),
        (3, "degenerate anchors", Duration::from_secs(30), degenerate_anchors),
        (4, "model-selection ranks", Duration::from_secs(300), model_selection_ranks),
        (5, "depth sweep shape", Duration::from_secs(300), depth_sweep_shape),
        (6, "training size effect", Duration::from_secs(600), size_effect),
        (7, "noise sensitivity", Duration::from_secs(300), noise_sensitivity),
        (8, "linearity", Duration::from_secs(120), linearity),
        (9, "reproducibility", Duration::from_secs(600), reproducibility),
        (10, "cli round trip", Duration::from_secs(600), cli_round_trip),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > limit => Err(format!("{d}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(d) => println!("criterion {id:>2} PASS  {name}: {d} [{elapsed:.2?}]"),
            Err(d) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {d} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
