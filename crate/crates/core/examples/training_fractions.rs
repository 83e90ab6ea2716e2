//! Accuracy when only part of each training fold is used.
//!
//! cargo run --release --example training_fractions -- [snr_db]

use sgfb::eval::{fraction_experiment, EvalConfig, PipelineConfig};
use sgfb::io::{generate_synthetic, SynthConfig};

fn main() -> sgfb::Result<()> {
    let snr_db: f64 = std::env::args().nth(1).map_or(-15.0, |s| s.parse().expect("snr_db"));
    let d = generate_synthetic(&SynthConfig { snr_db, ..SynthConfig::default() })?;
    let eval = EvalConfig { repeats: 5, ..EvalConfig::default() };
    let fr = fraction_experiment(&d, &PipelineConfig::default(), &eval)?;
    println!("fraction  repeats  acc mean  acc std");
    for r in &fr.rows {
        println!("{:>8}  {:>7}  {:>8.4}  {:>7.4}", r.fraction, r.repeats, r.summary.acc.0, r.summary.acc.1);
    }
    Ok(())
}
