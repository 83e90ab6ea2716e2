//! Synthetic two-class motor-imagery recordings.
//!
//! Background activity is pink noise from independent sources, mixed across
//! channels by a fixed random matrix. Each trial additionally carries a
//! narrow-band rhythm projected through a class-specific spatial pattern, so
//! the classes differ in the spatial distribution of band power.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::csp::EegEpoch;
use crate::error::{Error, Result};
use crate::filterbank::{design_bandpass, BandSpec};
use crate::numerics::{norm2, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub channels: usize,
    pub trials_per_class: usize,
    pub fs_hz: f64,
    pub duration_s: f64,
    pub cue_offset_s: f64,
    /// Band of the class-specific rhythm.
    pub erd_band_hz: (f64, f64),
    /// Rhythm power over background power, averaged over channels.
    pub snr_db: f64,
    /// Standard deviation of the per-trial log gain of the rhythm.
    pub amplitude_jitter: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            channels: 8,
            trials_per_class: 50,
            fs_hz: 100.0,
            duration_s: 3.0,
            cue_offset_s: 0.5,
            erd_band_hz: (8.0, 12.0),
            snr_db: 20.0,
            amplitude_jitter: 0.0,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn samples(&self) -> usize {
        (self.duration_s * self.fs_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.channels < 2 {
            return bad(format!("synthetic data needs at least 2 channels, got {}", self.channels));
        }
        if self.trials_per_class < 2 {
            return bad(format!("trials_per_class must be >= 2, got {}", self.trials_per_class));
        }
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) || (self.fs_hz as f32) as f64 != self.fs_hz {
            return bad(format!("fs_hz must be a positive f32-representable rate, got {}", self.fs_hz));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if !(self.cue_offset_s.is_finite() && self.cue_offset_s >= 0.0 && self.cue_offset_s < self.duration_s)
            || (self.cue_offset_s as f32) as f64 != self.cue_offset_s
        {
            return bad(format!("cue_offset_s must lie in [0, duration) and be f32-representable, got {}", self.cue_offset_s));
        }
        let (lo, hi) = self.erd_band_hz;
        if !(lo > 0.0 && lo < hi && hi < self.fs_hz / 2.0) {
            return bad(format!("erd band {lo}-{hi} Hz must lie inside (0, {})", self.fs_hz / 2.0));
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        if !(self.amplitude_jitter.is_finite() && self.amplitude_jitter >= 0.0) {
            return bad(format!("amplitude_jitter must be >= 0, got {}", self.amplitude_jitter));
        }
        Ok(())
    }
}

/// Pink noise by Kellet's three-pole approximation; the first second is discarded.
fn pink_noise(rng: &mut ChaCha8Rng, len: usize, burn_in: usize) -> Vec<f64> {
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(len);
    for i in 0..len + burn_in {
        let w: f64 = rng.sample(StandardNormal);
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        if i >= burn_in {
            out.push(b0 + b1 + b2 + w * 0.1848);
        }
    }
    out
}

fn unit_random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let s = norm2(&v);
    v.into_iter().map(|x| x / s).collect()
}

fn variance(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64
}

/// Generates a dataset; trials alternate between class 1 and class 2.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ch = cfg.channels;
    let samples = cfg.samples();
    let burn_in = cfg.fs_hz.ceil() as usize;

    let mixing = Matrix::from_fn(ch, ch, |_, _| rng.sample(StandardNormal));
    let p1 = unit_random(&mut rng, ch);
    // Second pattern: orthogonal to the first.
    let raw = unit_random(&mut rng, ch);
    let proj: f64 = raw.iter().zip(&p1).map(|(a, b)| a * b).sum();
    let p2: Vec<f64> = raw.iter().zip(&p1).map(|(a, b)| a - proj * b).collect();
    let n2 = norm2(&p2);
    let p2: Vec<f64> = p2.into_iter().map(|x| x / n2).collect();

    let rhythm = design_bandpass(BandSpec::new(cfg.erd_band_hz.0, cfg.erd_band_hz.1).with_order(4), cfg.fs_hz)?;
    let gain = (ch as f64 * 10f64.powf(cfg.snr_db / 10.0)).sqrt();

    let mut trials = Vec::with_capacity(2 * cfg.trials_per_class);
    for i in 0..2 * cfg.trials_per_class {
        let label = 1 + (i % 2) as u8;
        let sources: Vec<Vec<f64>> = (0..ch).map(|_| pink_noise(&mut rng, samples, burn_in)).collect();
        let mut background = Matrix::from_fn(ch, samples, |r, t| (0..ch).map(|k| mixing[(r, k)] * sources[k][t]).sum());
        let power = (0..ch).map(|r| variance(background.row(r))).sum::<f64>() / ch as f64;
        let s = 1.0 / power.sqrt();
        for r in 0..ch {
            background.row_mut(r).iter_mut().for_each(|v| *v *= s);
        }

        let white: Vec<f64> = (0..samples + burn_in).map(|_| rng.sample(StandardNormal)).collect();
        let mut osc = rhythm.apply(&white).split_off(burn_in);
        let sd = variance(&osc).sqrt();
        let jitter: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.amplitude_jitter;
        let amp = gain * jitter.exp() / sd;
        osc.iter_mut().for_each(|v| *v *= amp);

        let pattern = if label == 1 { &p1 } else { &p2 };
        let data = Matrix::from_fn(ch, samples, |r, t| {
            let v = background[(r, t)] + pattern[r] * osc[t];
            (v as f32) as f64
        });
        trials.push(EegEpoch::new(data, cfg.fs_hz, label)?);
    }
    Dataset::new(
        format!("synth-{}", cfg.seed),
        cfg.fs_hz,
        ["class1".into(), "class2".into()],
        cfg.cue_offset_s,
        trials,
    )
}
