//! Ten-fold cross-validation of the default pipeline, printed as a report.
//!
//! cargo run --release --example cross_validation -- [snr_db]

use sgfb::eval::{kfold_cv, push_cv, EvalConfig, PipelineConfig};
use sgfb::io::{generate_synthetic, Report, SynthConfig};

fn main() -> sgfb::Result<()> {
    let snr_db: f64 = std::env::args().nth(1).map_or(-20.0, |s| s.parse().expect("snr_db"));
    let d = generate_synthetic(&SynthConfig { snr_db, ..SynthConfig::default() })?;
    let cv = kfold_cv(&d, &PipelineConfig::default(), &EvalConfig::default())?;
    let mut report = Report::new();
    push_cv(&mut report, &cv);
    print!("{}", report.to_text()?);
    Ok(())
}
