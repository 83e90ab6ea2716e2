//! Compares the coupled multi-band coder with two uncoupled baselines:
//! all bands concatenated into one block, and a single 8-30 Hz band.
//!
//! cargo run --release --example baselines -- [snr_db] [amplitude_jitter] [seed]

use sgfb::eval::{kfold_cv, EvalConfig, Method, PipelineConfig};
use sgfb::filterbank::BandSpec;
use sgfb::io::{generate_synthetic, SynthConfig};

fn main() -> sgfb::Result<()> {
    let mut args = std::env::args().skip(1);
    let snr_db: f64 = args.next().map_or(-15.0, |s| s.parse().expect("snr_db"));
    let amplitude_jitter: f64 = args.next().map_or(1.0, |s| s.parse().expect("amplitude_jitter"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let d = generate_synthetic(&SynthConfig { snr_db, amplitude_jitter, seed, ..SynthConfig::default() })?;
    let eval = EvalConfig::default();

    let pipelines = [
        ("sgfb, 9 bands", PipelineConfig::default()),
        ("src, 9 bands concatenated", PipelineConfig { method: Method::Src, ..PipelineConfig::default() }),
        (
            "src, 8-30 Hz",
            PipelineConfig { bands: vec![BandSpec::new(8.0, 30.0)], method: Method::Src, ..PipelineConfig::default() },
        ),
    ];
    println!("snr {snr_db} dB, jitter {amplitude_jitter}, seed {seed}, {}-fold", eval.folds);
    for (name, p) in &pipelines {
        let cv = kfold_cv(&d, p, &eval)?;
        let s = cv.summary;
        println!("{name:<28} acc {:.4} +/- {:.4}  ties {}", s.acc.0, s.acc.1, cv.flags.ties);
    }
    Ok(())
}
