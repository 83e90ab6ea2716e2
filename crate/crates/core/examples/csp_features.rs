//! Fits per-band CSP on a synthetic recording and shows the log-variance
//! features that separate the two classes.
//!
//! cargo run --example csp_features -- [snr_db]

use sgfb::csp::{CspConfig, CspModel, EegEpoch};
use sgfb::eval::prepare_trials;
use sgfb::filterbank::default_bands;
use sgfb::io::{generate_synthetic, SynthConfig};

fn main() -> sgfb::Result<()> {
    let snr_db: f64 = std::env::args().nth(1).map_or(20.0, |s| s.parse().expect("snr_db"));
    let d = generate_synthetic(&SynthConfig { snr_db, ..SynthConfig::default() })?;
    let prep = prepare_trials(&d, &default_bands(), (1.0, 2.0))?;
    let trials: Vec<&[EegEpoch]> = prep.bands.iter().map(|t| t.as_slice()).collect();
    let model = CspModel::fit(&trials, &CspConfig::default())?;
    println!("{} channels, {} filter pairs per band", d.channels(), model.m_pairs);

    let feats = trials.iter().map(|t| model.extract_features(t)).collect::<sgfb::Result<Vec<_>>>()?;
    println!("band        first eigenvalue  last eigenvalue  class gap of first feature");
    for (b, band) in default_bands().iter().enumerate() {
        let mean = |class| {
            let v: Vec<f64> = feats.iter().zip(&prep.labels).filter(|(_, l)| **l == class).map(|(f, _)| f.per_band[b][0]).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let ev = &model.eigenvalues[b];
        println!(
            "{:>4}-{:<4} Hz  {:>15.4}  {:>15.4}  {:>+10.3}",
            band.low_hz,
            band.high_hz,
            ev[0],
            ev[ev.len() - 1],
            mean(1) - mean(2)
        );
    }
    Ok(())
}
