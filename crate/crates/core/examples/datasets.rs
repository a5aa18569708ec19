//! Synthetic generators, CSV round trips, stratified splits and nested
//! subsamples.
//!
//! cargo run --release --example datasets

use pvkit::datasets::{
    generate, load_csv, split, stratified_order, subsample, write_csv, Family, LabelColumn, SplitSpec,
    SyntheticSpec,
};

fn main() -> pvkit::Result<()> {
    for family in [Family::Moon, Family::Circle, Family::Linear] {
        let spec = SyntheticSpec::new(family, 200, 0.2, 7);
        let ds = generate(&spec)?;
        println!("{:<22} n={} classes={:?}", ds.name(), ds.n_samples(), ds.class_counts());
    }

    // Label noise baked into the generated data.
    let flipped = SyntheticSpec {
        label_flip: 0.1,
        ..SyntheticSpec::new(Family::Moon, 200, 0.0, 7)
    };
    println!("{:<22} n={}", generate(&flipped)?.name(), flipped.n_samples);

    let dir = std::env::temp_dir().join("pvkit-datasets-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let ds = generate(&SyntheticSpec::new(Family::Circle, 120, 0.1, 3))?;
    let path = dir.join("circle.csv");
    write_csv(&ds, &path)?;
    let back = load_csv(&path, &LabelColumn::default(), true)?;
    println!("\nwrote and re-read {}: features equal = {}", path.display(), back.features() == ds.features());

    let iris = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"),
        &LabelColumn::Name("species".into()),
        true,
    )?;
    println!("iris labels: {:?}", iris.label_names());

    let (train, test) = split(&iris, &SplitSpec { test_fraction: 0.3, stratified: true, seed: 1 })?;
    println!("stratified 70/30 split: train {:?}, test {:?}", train.class_counts(), test.class_counts());

    let order = stratified_order(&iris, 5);
    println!("first 9 rows of the stratified order: {:?}", &order[..9]);
    for n in [15, 30, 60] {
        let sub = subsample(&iris, n, 5)?;
        println!("subsample {n:>2}: {:?}", sub.class_counts());
    }
    Ok(())
}
