//! Designs the default 9-band bank and prints each band's response.
//!
//! cargo run --example filter_bank -- [fs_hz]

use sgfb::filterbank::{apply_zero_phase, default_bands, design_bandpass};

fn main() -> sgfb::Result<()> {
    let fs: f64 = std::env::args().nth(1).map_or(100.0, |s| s.parse().expect("fs_hz"));
    println!("band        sections  low edge dB  center dB  high edge dB  low/2 dB  high*2 dB");
    for band in default_bands() {
        let f = design_bandpass(band, fs)?;
        let db = |hz: f64| if hz < fs / 2.0 { format!("{:9.2}", f.magnitude_db(hz, fs)) } else { "        -".into() };
        println!(
            "{:>4}-{:<4} Hz {:>6}  {}    {}  {}     {}  {}",
            band.low_hz,
            band.high_hz,
            f.sections.len(),
            db(band.low_hz),
            db(band.center_hz()),
            db(band.high_hz),
            db(band.low_hz / 2.0),
            db(band.high_hz * 2.0),
        );
    }

    // A 10 Hz tone survives the 8-12 Hz band and vanishes from 20-24 Hz.
    let tone: Vec<f64> = (0..(4.0 * fs) as usize).map(|i| (2.0 * std::f64::consts::PI * 10.0 * i as f64 / fs).sin()).collect();
    let rms = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    for band in [default_bands()[1], default_bands()[4]] {
        let out = apply_zero_phase(&design_bandpass(band, fs)?, &tone)?;
        println!("10 Hz tone through {}-{} Hz: rms {:.4} -> {:.4}", band.low_hz, band.high_hz, rms(&tone), rms(&out));
    }
    Ok(())
}
