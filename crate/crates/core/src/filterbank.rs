//! Butterworth band-pass filter bank.
//!
//! Each band is an analog Butterworth low-pass prototype, shifted to a
//! band-pass, then discretized with the bilinear transform using pre-warped
//! band edges. The result is stored as cascaded second-order sections and
//! applied forward-backward for zero phase.

use std::f64::consts::PI;

use crate::csp::EegEpoch;
use crate::error::{Error, Result};

/// Default prototype order for each band.
pub const DEFAULT_ORDER: usize = 5;

/// One band of the bank, in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
}

impl BandSpec {
    pub fn new(low_hz: f64, high_hz: f64) -> Self {
        BandSpec { low_hz, high_hz, order: DEFAULT_ORDER }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    /// Geometric center, the frequency of unit gain.
    pub fn center_hz(&self) -> f64 {
        (self.low_hz * self.high_hz).sqrt()
    }

    pub fn validate(&self, fs_hz: f64) -> Result<()> {
        if self.order < 1 {
            return Err(Error::Parameter(format!("filter order must be >= 1, got {}", self.order)));
        }
        let nyquist = fs_hz / 2.0;
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(Error::Design(format!("sampling rate {fs_hz} Hz is not positive")));
        }
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz) {
            return Err(Error::Design(format!(
                "band {}-{} Hz must satisfy 0 < low < high",
                self.low_hz, self.high_hz
            )));
        }
        if self.high_hz >= nyquist {
            return Err(Error::Design(format!(
                "band edge {} Hz is at or above Nyquist ({nyquist} Hz)",
                self.high_hz
            )));
        }
        Ok(())
    }
}

/// The nine contiguous 4 Hz bands covering 4-40 Hz.
pub fn default_bands() -> Vec<BandSpec> {
    (1..=9).map(|k| BandSpec::new(4.0 * k as f64, 4.0 * (k + 1) as f64)).collect()
}

/// A biquad `(b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, w: f64) -> (f64, f64) {
        // z⁻¹ = e^{-jw}
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        let num = (self.b[0] + self.b[1] * c1 + self.b[2] * c2, self.b[1] * s1 + self.b[2] * s2);
        let den = (1.0 + self.a[0] * c1 + self.a[1] * c2, self.a[0] * s1 + self.a[1] * s2);
        let d = den.0 * den.0 + den.1 * den.1;
        ((num.0 * den.0 + num.1 * den.1) / d, (num.1 * den.0 - num.0 * den.1) / d)
    }

    /// Largest pole magnitude.
    pub fn pole_radius(&self) -> f64 {
        let (a1, a2) = (self.a[0], self.a[1]);
        let disc = a1 * a1 - 4.0 * a2;
        if disc < 0.0 {
            a2.sqrt()
        } else {
            let r = disc.sqrt();
            ((-a1 + r) / 2.0).abs().max(((-a1 - r) / 2.0).abs())
        }
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }
}

/// IIR filter realized as cascaded second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct IirFilter {
    pub sections: Vec<Biquad>,
}

impl IirFilter {
    /// Order of the realized transfer function.
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    /// Length of the reflected padding used by [`apply_zero_phase`].
    pub fn padding(&self) -> usize {
        3 * self.order()
    }

    /// `|H(e^{j2πf/fs})|` of a single pass.
    pub fn magnitude(&self, freq_hz: f64, fs_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / fs_hz;
        self.sections
            .iter()
            .map(|s| {
                let (re, im) = s.response(w);
                (re * re + im * im).sqrt()
            })
            .product()
    }

    pub fn magnitude_db(&self, freq_hz: f64, fs_hz: f64) -> f64 {
        20.0 * self.magnitude(freq_hz, fs_hz).log10()
    }

    /// Causal single-pass filtering with the given initial section states.
    fn run(&self, x: &mut [f64], steady_start: bool) {
        for s in &self.sections {
            let [b0, b1, b2] = s.b;
            let [a1, a2] = s.a;
            // Steady state for a constant input equal to the first sample.
            let (mut z1, mut z2) = match x.first() {
                Some(&x0) if steady_start => {
                    let y0 = s.dc_gain() * x0;
                    let z2 = b2 * x0 - a2 * y0;
                    (b1 * x0 - a1 * y0 + z2, z2)
                }
                _ => (0.0, 0.0),
            };
            for v in x.iter_mut() {
                let xn = *v;
                let yn = b0 * xn + z1;
                z1 = b1 * xn - a1 * yn + z2;
                z2 = b2 * xn - a2 * yn;
                *v = yn;
            }
        }
    }

    /// Plain causal filtering from rest.
    pub fn apply(&self, signal: &[f64]) -> Vec<f64> {
        let mut out = signal.to_vec();
        self.run(&mut out, false);
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Complex {
    re: f64,
    im: f64,
}

impl Complex {
    fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
    fn div(self, o: Complex) -> Complex {
        let d = o.re * o.re + o.im * o.im;
        Complex::new((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)
    }
    fn scale(self, s: f64) -> Complex {
        Complex::new(self.re * s, self.im * s)
    }
    fn sqrt(self) -> Complex {
        let r = (self.re * self.re + self.im * self.im).sqrt();
        let re = ((r + self.re) / 2.0).max(0.0).sqrt();
        let im = ((r - self.re) / 2.0).max(0.0).sqrt();
        Complex::new(re, if self.im < 0.0 { -im } else { im })
    }
    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Designs one Butterworth band-pass as second-order sections.
///
/// Each section has zeros at `z = ±1` and one conjugate pole pair, and is
/// scaled to unit gain at the pre-warped band center so the cascade has the
/// analog prototype's unit passband gain and `1/√2` at both edges.
pub fn design_bandpass(spec: BandSpec, fs_hz: f64) -> Result<IirFilter> {
    spec.validate(fs_hz)?;
    let n = spec.order;
    let fs2 = 2.0 * fs_hz;
    let w1 = fs2 * (PI * spec.low_hz / fs_hz).tan();
    let w2 = fs2 * (PI * spec.high_hz / fs_hz).tan();
    let bw = w2 - w1;
    let w0_sq = w1 * w2;

    // Analog band-pass poles with positive imaginary part (one per conjugate pair),
    // plus stray real poles when the band is wide enough to produce them.
    let mut upper: Vec<Complex> = Vec::with_capacity(n);
    let mut real: Vec<f64> = Vec::new();
    for k in 0..n {
        let angle = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
        let p = Complex::new(angle.cos(), angle.sin()).scale(bw / 2.0);
        let root = p.mul(p).sub(Complex::new(w0_sq, 0.0)).sqrt();
        for q in [p.add(root), p.sub(root)] {
            if q.im.abs() <= 1e-12 * q.abs() {
                real.push(q.re);
            } else if q.im > 0.0 {
                upper.push(q);
            }
        }
    }
    if !real.len().is_multiple_of(2) {
        return Err(Error::Design("odd number of real poles".into()));
    }
    real.sort_by(f64::total_cmp);

    let bilinear = |s: Complex| Complex::new(fs2, 0.0).add(s).div(Complex::new(fs2, 0.0).sub(s));
    let center = 2.0 * (w0_sq.sqrt() / fs2).atan();

    let mut sections = Vec::with_capacity(n);
    let mut push = |a1: f64, a2: f64| {
        let mut sec = Biquad { b: [1.0, 0.0, -1.0], a: [a1, a2] };
        let (re, im) = sec.response(center);
        let g = 1.0 / (re * re + im * im).sqrt();
        sec.b = [g, 0.0, -g];
        sections.push(sec);
    };
    for p in &upper {
        let z = bilinear(*p);
        push(-2.0 * z.re, z.re * z.re + z.im * z.im);
    }
    for pair in real.chunks(2) {
        let za = bilinear(Complex::new(pair[0], 0.0)).re;
        let zb = bilinear(Complex::new(pair[1], 0.0)).re;
        push(-(za + zb), za * zb);
    }
    let filter = IirFilter { sections };
    if filter.sections.iter().any(|s| !(s.pole_radius() < 1.0 - 1e-6)) {
        return Err(Error::Design(format!(
            "unstable design for band {}-{} Hz at {fs_hz} Hz",
            spec.low_hz, spec.high_hz
        )));
    }
    Ok(filter)
}

/// Forward-backward filtering with odd-reflection edge padding.
///
/// The output has zero phase and the squared single-pass magnitude.
pub fn apply_zero_phase(filter: &IirFilter, signal: &[f64]) -> Result<Vec<f64>> {
    let pad = filter.padding();
    if signal.len() <= pad {
        return Err(Error::SignalTooShort { len: signal.len(), required: pad });
    }
    let n = signal.len();
    let (first, last) = (signal[0], signal[n - 1]);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * first - signal[i]));
    ext.extend_from_slice(signal);
    ext.extend((1..=pad).map(|i| 2.0 * last - signal[n - 1 - i]));

    filter.run(&mut ext, true);
    ext.reverse();
    filter.run(&mut ext, true);
    ext.reverse();
    Ok(ext[pad..pad + n].to_vec())
}

/// Designed filters for an ordered list of bands at one sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub bands: Vec<BandSpec>,
    pub fs_hz: f64,
    pub filters: Vec<IirFilter>,
}

impl FilterBank {
    pub fn new(bands: Vec<BandSpec>, fs_hz: f64) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::Parameter("filter bank needs at least one band".into()));
        }
        let filters = bands.iter().map(|&b| design_bandpass(b, fs_hz)).collect::<Result<Vec<_>>>()?;
        Ok(FilterBank { bands, fs_hz, filters })
    }

    pub fn with_default_bands(fs_hz: f64) -> Result<Self> {
        FilterBank::new(default_bands(), fs_hz)
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }
}

/// Splits an epoch into one zero-phase filtered epoch per band, in band order.
pub fn split_subbands(epoch: &EegEpoch, bank: &FilterBank) -> Result<Vec<EegEpoch>> {
    if (epoch.fs_hz - bank.fs_hz).abs() > 1e-9 * bank.fs_hz {
        return Err(Error::Parameter(format!(
            "epoch sampled at {} Hz but filter bank designed for {} Hz",
            epoch.fs_hz, bank.fs_hz
        )));
    }
    bank.filters
        .iter()
        .map(|f| {
            let rows = (0..epoch.channels())
                .map(|c| apply_zero_phase(f, epoch.data.row(c)))
                .collect::<Result<Vec<_>>>()?;
            let data = crate::numerics::Matrix::from_rows(&rows)?;
            Ok(EegEpoch { data, fs_hz: epoch.fs_hz, label: epoch.label })
        })
        .collect()
}
