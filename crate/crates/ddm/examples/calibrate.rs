//! Trains one decision model at a given trade-off and prints the
//! held-out prediction histogram plus timing — the quick way to eyeball
//! convergence for a hyperparameter choice.
//!
//! Usage: calibrate <trade_off> <seed> [min_cost_override] [init_scale] [epochs]

use std::time::Instant;

use vp_datasets::{gen_request_corpus, CorpusConfig};
use vp_ddm::{train, TrainingConfig};
use vp_dialect::register_ftp_dialects;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trade_off: f64 = args.get(1).expect("trade_off").parse().unwrap();
    let seed: u64 = args.get(2).expect("seed").parse().unwrap();
    let override_min: f64 = args.get(3).map_or(0.0, |s| s.parse().unwrap());
    let init_scale: f64 = args.get(4).map_or(1.0, |s| s.parse().unwrap());

    let registry = register_ftp_dialects();
    let mut costs: Vec<f64> = registry.iter().map(|d| d.cost()).collect();
    if override_min > 0.0 {
        costs[0] = override_min;
    }
    let min_index = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();

    let corpus = gen_request_corpus(&CorpusConfig {
        size: 60_000,
        seed: 1234,
        ..CorpusConfig::default()
    })
    .unwrap();
    let (train_half, held_out) = corpus.split_at(50_000);

    let mut config = TrainingConfig::for_trade_off(trade_off);
    config.seed = seed;
    config.init_scale = init_scale;
    if let Some(epochs) = args.get(5) {
        config.epochs = epochs.parse().unwrap();
    }

    let start = Instant::now();
    let (model, report) = train(train_half, &costs, &config).unwrap();
    let train_seconds = start.elapsed().as_secs_f64();

    let eval_start = Instant::now();
    let mut histogram = vec![0usize; costs.len()];
    for request in &held_out[..10_000] {
        histogram[model.predict_dialect(request).index()] += 1;
    }
    let eval_seconds = eval_start.elapsed().as_secs_f64();

    println!(
        "a={trade_off} seed={seed} init_scale={init_scale} epochs={} [{train_seconds:.1}s train, {eval_seconds:.2}s eval]",
        config.epochs
    );
    println!(
        "objective first={:.4} last={:.4}",
        report.epoch_objectives.first().unwrap(),
        report.epoch_objectives.last().unwrap()
    );
    let shares: Vec<f64> = histogram.iter().map(|&c| c as f64 / 100.0).collect();
    for (i, share) in shares.iter().enumerate() {
        println!("  D{:<2} {:>6.2}%{}", i + 1, share, if i == min_index { "  <- min cost" } else { "" });
    }
    let mut sorted = shares.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let nonzero = shares.iter().filter(|&&s| s > 0.0).count();
    println!(
        "top={:.2}% second={:.2}% ratio={:.3} nonzero={nonzero} min_cost_share={:.2}%",
        sorted[0],
        sorted[1],
        if sorted[1] > 0.0 { sorted[0] / sorted[1] } else { f64::INFINITY },
        shares[min_index]
    );
}
