//! Mutual coherence between the per-band dictionaries of one training set.
//!
//! cargo run --example coherence

use sgfb::eval::{prepare_trials, FoldModel, PipelineConfig};
use sgfb::io::{generate_synthetic, SynthConfig};
use sgfb::sgfb::mutual_coherence;

fn main() -> sgfb::Result<()> {
    let cfg = PipelineConfig::default();
    let d = generate_synthetic(&SynthConfig::default())?;
    let prep = prepare_trials(&d, &cfg.bands, (1.0, 2.0))?;
    let train: Vec<usize> = (0..prep.len()).collect();
    let dict = FoldModel::fit(&prep, &train, &cfg)?.dictionary;

    let b = dict.band_count();
    print!("      ");
    for j in 0..b {
        print!(" {:>5}", cfg.bands[j].low_hz);
    }
    println!();
    for i in 0..b {
        print!("{:>5} ", cfg.bands[i].low_hz);
        for j in 0..b {
            print!(" {:5.3}", mutual_coherence(&dict.blocks[i], &dict.blocks[j])?);
        }
        println!();
    }
    Ok(())
}
