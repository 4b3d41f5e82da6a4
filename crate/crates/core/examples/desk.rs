//! Trains the model on desk-scale synthetic data and prints test metrics
//! next to a k-means baseline.
//!
//! `cargo run --release -p vadesc-core --example desk -- [seed] [epochs]`

use std::time::Instant;

use vadesc_core::baselines::kmeans_fit;
use vadesc_core::data::{fit_preprocess, gen_synthetic, preprocess, train_test_split, SyntheticConfig};
use vadesc_core::metrics::{clustering_accuracy, concordance_index};
use vadesc_core::{fit, predict, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(300);

    let (data, _) = gen_synthetic(&SyntheticConfig::desk_scale(seed))?;
    let (train, test) = train_test_split(&data, 0.3, seed, true)?;
    let (train, stats) = fit_preprocess(&train)?;
    let test = preprocess(&test, &stats)?;

    let config = TrainConfig {
        hidden_layers: vec![64, 64],
        epochs,
        seed,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let out = fit(&train, &config)?;
    let seconds = start.elapsed().as_secs_f64();

    let truth = test.labels().expect("synthetic data is labelled");
    let p = predict(&out.params, test.features(), Some((test.times(), test.events())))?;
    let risk: Vec<f64> = p.median_time.iter().map(|t| -t).collect();
    let ci = concordance_index(test.times(), test.events(), &risk)?.unwrap_or(f64::NAN);
    let km = kmeans_fit(train.features(), config.num_clusters, 10, seed)?;

    println!("seed {seed}, {epochs} epochs in {seconds:.1}s");
    println!("acc {:.3}", clustering_accuracy(truth, &p.labels)?);
    println!("acc without time {:.3}", clustering_accuracy(truth, &p.labels_no_time())?);
    println!("ci {ci:.3}");
    println!("kmeans acc {:.3}", clustering_accuracy(truth, &km.assign(test.features())?)?);
    Ok(())
}
