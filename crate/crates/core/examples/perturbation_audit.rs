//! Inspect exactly which labels a perturbation flips, save the plan, and
//! replay it.
//!
//! cargo run --release --example perturbation_audit

use pvkit::datasets::{generate, Family, SyntheticSpec};
use pvkit::perturbation::{apply, flip_count, plan, PerturbationPlan};

fn main() -> pvkit::Result<()> {
    let data = generate(&SyntheticSpec::new(Family::Linear, 25, 0.1, 4))?;
    println!("class sizes {:?}", data.class_counts());
    for r in [0.1, 0.2, 0.3] {
        let per_class: Vec<usize> = data.class_counts().iter().map(|&c| flip_count(r, c)).collect();
        println!("r={r}: flips per class {per_class:?}");
    }

    let p = plan(&data, 0.2, 99)?;
    println!("\nplan at r=0.2, seed 99: {} flips", p.total_flips());
    for f in &p.flips {
        println!("  sample {:>2}: {} -> {}", f.index, f.from, f.to);
    }

    let json = p.to_json()?;
    let restored = PerturbationPlan::from_json(&json)?;
    let noisy = apply(&data, &restored)?;
    let changed = data.labels().iter().zip(noisy.labels()).filter(|(a, b)| a != b).count();
    println!("replayed from JSON: {changed} labels changed, features untouched = {}", noisy.features() == data.features());

    // A plan only applies to the dataset it was drawn for.
    let other = generate(&SyntheticSpec::new(Family::Linear, 30, 0.1, 4))?;
    if let Err(e) = apply(&other, &restored) {
        println!("applying to another dataset: {e}");
    }
    Ok(())
}
