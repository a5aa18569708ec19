//! PV against training accuracy for every cell of a model-selection run.
//!
//! cargo run --release --example scatter

use pvkit::datasets::Family;
use pvkit::learners::LearnerSpec;
use pvkit::runner::{emit_scatter, report, run_model_selection, DatasetSource, ExperimentConfig};

fn main() -> pvkit::Result<()> {
    let datasets = [Family::Moon, Family::Circle, Family::Linear]
        .into_iter()
        .map(|family| DatasetSource::Synthetic {
            family,
            n_samples: 200,
            feature_noise: 0.1,
            label_flip: 0.0,
            seed: None,
            test_samples: 0,
        })
        .collect();
    let learners = vec![
        LearnerSpec::decision_tree(Some(2)),
        LearnerSpec::decision_tree(Some(10)),
        LearnerSpec::knn(1),
        LearnerSpec::knn(9),
        LearnerSpec::gaussian_nb(),
        LearnerSpec::linear_svm(1.0, 100),
    ];
    let mut config = ExperimentConfig::new(datasets, learners);
    config.schedule.repetitions = 5;
    let points = emit_scatter(&run_model_selection(&config)?);

    // Text plot: x = training accuracy in [0.5, 1], y = PV in [0, 1].
    let (w, h) = (50usize, 16usize);
    let mut grid = vec![vec![' '; w + 1]; h + 1];
    for p in &points {
        let x = (((p.train_accuracy - 0.5) / 0.5).clamp(0.0, 1.0) * w as f64).round() as usize;
        let y = h - (p.pv_folded.clamp(0.0, 1.0) * h as f64).round() as usize;
        grid[y][x] = if grid[y][x] == ' ' { '*' } else { '#' };
    }
    println!("pv");
    for row in grid {
        println!("|{}", row.into_iter().collect::<String>());
    }
    println!("+{}\n 0.5{:>w$}", "-".repeat(w + 1), "1.0 train acc", w = w - 1);

    let path = std::env::temp_dir().join("pvkit-scatter.csv");
    report::write_table(&points, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
