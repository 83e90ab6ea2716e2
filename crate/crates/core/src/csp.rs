//! Common spatial patterns, trained per band, with log-variance features.

use crate::error::{Error, Result};
use crate::numerics::{dot, sym_eig, whiten, Matrix};

/// Class label, `1` or `2`.
pub type ClassId = u8;

/// Default number of filter pairs per band.
pub const DEFAULT_M_PAIRS: usize = 16;
/// Default covariance shrinkage toward the scaled identity.
pub const DEFAULT_SHRINKAGE: f64 = 1e-4;
/// Variance floor applied before taking logs.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// One trial: channels × samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EegEpoch {
    pub data: Matrix,
    pub fs_hz: f64,
    pub label: ClassId,
}

impl EegEpoch {
    pub fn new(data: Matrix, fs_hz: f64, label: ClassId) -> Result<Self> {
        if data.rows() < 2 || data.cols() < 2 {
            return Err(Error::Dimension(format!(
                "epoch needs at least 2 channels and 2 samples, got {}x{}",
                data.rows(),
                data.cols()
            )));
        }
        if !data.is_finite() {
            return Err(Error::NonFinite("epoch data".into()));
        }
        if !(label == 1 || label == 2) {
            return Err(Error::Parameter(format!("label {label} is not 1 or 2")));
        }
        Ok(EegEpoch { data, fs_hz, label })
    }

    pub fn channels(&self) -> usize {
        self.data.rows()
    }

    pub fn samples(&self) -> usize {
        self.data.cols()
    }

    /// Samples `[start, end)` of every channel.
    pub fn crop(&self, start: usize, end: usize) -> Result<EegEpoch> {
        if !(start < end && end <= self.samples()) {
            return Err(Error::Parameter(format!(
                "window [{start}, {end}) outside epoch of {} samples",
                self.samples()
            )));
        }
        let data = Matrix::from_fn(self.channels(), end - start, |r, c| self.data[(r, start + c)]);
        EegEpoch::new(data, self.fs_hz, self.label)
    }

    /// Copy with every channel's mean removed.
    pub fn centered(&self) -> EegEpoch {
        let mut data = self.data.clone();
        for r in 0..data.rows() {
            let row = data.row_mut(r);
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            row.iter_mut().for_each(|v| *v -= mean);
        }
        EegEpoch { data, fs_hz: self.fs_hz, label: self.label }
    }
}

/// `X·Xᵀ / trace(X·Xᵀ)`.
pub fn normalized_covariance(x: &Matrix) -> Result<Matrix> {
    if !x.is_finite() {
        return Err(Error::NonFinite("epoch data".into()));
    }
    let xxt = x.gram_rows();
    let tr = xxt.trace();
    if !(tr > 0.0) {
        return Err(Error::ZeroTrace);
    }
    Ok(xxt.scale(1.0 / tr))
}

/// Mean of the trace-normalized covariances of the mean-removed trials of `class`.
pub fn class_covariance(trials: &[&EegEpoch], class: ClassId) -> Result<Matrix> {
    let members: Vec<&&EegEpoch> = trials.iter().filter(|t| t.label == class).collect();
    let first = members.first().ok_or(Error::EmptyClass(class))?;
    let n = first.channels();
    let mut acc = Matrix::zeros(n, n);
    for t in &members {
        if t.channels() != n {
            return Err(Error::Dimension(format!("trial with {} channels, expected {n}", t.channels())));
        }
        acc = acc.add(&normalized_covariance(&t.centered().data)?)?;
    }
    Ok(acc.scale(1.0 / members.len() as f64))
}

/// `(1−γ)·Σ + γ·(trace(Σ)/n)·I`.
pub fn shrink(sigma: &Matrix, gamma: f64) -> Matrix {
    let n = sigma.rows();
    let target = sigma.trace() / n as f64;
    Matrix::from_fn(n, n, |i, j| {
        let v = (1.0 - gamma) * sigma[(i, j)];
        if i == j {
            v + gamma * target
        } else {
            v
        }
    })
}

/// Spatial filters and their generalized eigenvalues for one band.
#[derive(Debug, Clone, PartialEq)]
pub struct CspFit {
    /// channels × 2M: M largest-λ columns, then M smallest-λ columns.
    pub filters: Matrix,
    /// λ for `Σ1·w = λ·(Σ1+Σ2)·w`, aligned with the columns of `filters`.
    pub eigenvalues: Vec<f64>,
}

/// Solves `Σ1·w = λ·(Σ1+Σ2)·w` by whitening the composite covariance.
///
/// Each returned column satisfies `wᵀ(Σ1+Σ2)w = 1` for the shrunk matrices.
pub fn fit_csp(sigma1: &Matrix, sigma2: &Matrix, m_pairs: usize, shrinkage: f64) -> Result<CspFit> {
    let n = sigma1.rows();
    if !sigma1.is_square() || sigma1.rows() != sigma2.rows() || !sigma2.is_square() {
        return Err(Error::Dimension("class covariances must be square and of equal size".into()));
    }
    if m_pairs == 0 || 2 * m_pairs > n {
        return Err(Error::Parameter(format!("2M = {} filters requested for {n} channels", 2 * m_pairs)));
    }
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(Error::Parameter(format!("shrinkage {shrinkage} outside [0, 1]")));
    }
    let s1 = shrink(sigma1, shrinkage);
    let s2 = shrink(sigma2, shrinkage);
    let composite = s1.add(&s2)?;
    let p = whiten(&composite)?;
    let whitened = p.matmul(&s1)?.matmul(&p.transpose())?;
    // Round-off can leave the product a hair asymmetric.
    let whitened = Matrix::from_fn(n, n, |i, j| 0.5 * (whitened[(i, j)] + whitened[(j, i)]));
    let eig = sym_eig(&whitened)?;
    let all = p.transpose().matmul(&eig.eigenvectors)?;

    let picks: Vec<usize> = (0..m_pairs).chain(n - m_pairs..n).collect();
    Ok(CspFit {
        filters: all.select_cols(&picks),
        eigenvalues: picks.iter().map(|&i| eig.eigenvalues[i]).collect(),
    })
}

/// CSP settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CspConfig {
    pub m_pairs: usize,
    pub shrinkage: f64,
}

impl Default for CspConfig {
    fn default() -> Self {
        CspConfig { m_pairs: DEFAULT_M_PAIRS, shrinkage: DEFAULT_SHRINKAGE }
    }
}

impl CspConfig {
    /// Pairs actually used for `channels` channels.
    pub fn effective_pairs(&self, channels: usize) -> usize {
        self.m_pairs.min(channels / 2).max(1)
    }
}

/// Per-band spatial filters, in filter-bank order.
#[derive(Debug, Clone, PartialEq)]
pub struct CspModel {
    pub per_band: Vec<Matrix>,
    pub eigenvalues: Vec<Vec<f64>>,
    pub m_pairs: usize,
    pub band_count: usize,
}

impl CspModel {
    /// Trains one CSP per band. `trials[i][b]` is trial `i` filtered into band `b`.
    pub fn fit(trials: &[&[EegEpoch]], cfg: &CspConfig) -> Result<CspModel> {
        let band_count = trials.first().map_or(0, |t| t.len());
        if band_count == 0 {
            return Err(Error::Parameter("no training trials".into()));
        }
        if trials.iter().any(|t| t.len() != band_count) {
            return Err(Error::Dimension("trials disagree on band count".into()));
        }
        let channels = trials[0][0].channels();
        let m_pairs = cfg.effective_pairs(channels);
        let mut per_band = Vec::with_capacity(band_count);
        let mut eigenvalues = Vec::with_capacity(band_count);
        for b in 0..band_count {
            let band: Vec<&EegEpoch> = trials.iter().map(|t| &t[b]).collect();
            let s1 = class_covariance(&band, 1)?;
            let s2 = class_covariance(&band, 2)?;
            let fit = fit_csp(&s1, &s2, m_pairs, cfg.shrinkage)?;
            per_band.push(fit.filters);
            eigenvalues.push(fit.eigenvalues);
        }
        Ok(CspModel { per_band, eigenvalues, m_pairs, band_count })
    }

    pub fn feature_len(&self) -> usize {
        2 * self.m_pairs
    }

    /// Log-variance features of one trial's band epochs.
    pub fn extract_features(&self, band_epochs: &[EegEpoch]) -> Result<FeatureVector> {
        if band_epochs.len() != self.band_count {
            return Err(Error::Dimension(format!(
                "{} band epochs for a {}-band model",
                band_epochs.len(),
                self.band_count
            )));
        }
        let mut per_band = Vec::with_capacity(self.band_count);
        let mut floored = 0;
        for (w, epoch) in self.per_band.iter().zip(band_epochs) {
            if epoch.channels() != w.rows() {
                return Err(Error::Dimension(format!(
                    "epoch has {} channels, model expects {}",
                    epoch.channels(),
                    w.rows()
                )));
            }
            let (z, f) = log_variance_features(w, &epoch.data);
            floored += f;
            per_band.push(z);
        }
        Ok(FeatureVector { per_band, label: Some(band_epochs[0].label), floored })
    }
}

/// `log(var(wᵀX))` per column of `w`, with the biased variance after mean
/// removal. Returns the features and how many variances hit the floor.
pub fn log_variance_features(w: &Matrix, x: &Matrix) -> (Vec<f64>, usize) {
    let samples = x.cols();
    let mut floored = 0;
    let z = (0..w.cols())
        .map(|m| {
            let filt = w.col(m);
            let mut proj = vec![0.0; samples];
            for (c, &wc) in filt.iter().enumerate() {
                for (p, &v) in proj.iter_mut().zip(x.row(c)) {
                    *p += wc * v;
                }
            }
            let mean = proj.iter().sum::<f64>() / samples as f64;
            let var = proj.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / samples as f64;
            if var < VARIANCE_FLOOR {
                floored += 1;
            }
            var.max(VARIANCE_FLOOR).ln()
        })
        .collect();
    (z, floored)
}

/// Features of one trial, one vector of length 2M per band.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub per_band: Vec<Vec<f64>>,
    pub label: Option<ClassId>,
    /// Variances clamped to [`VARIANCE_FLOOR`].
    pub floored: usize,
}

impl FeatureVector {
    pub fn new(per_band: Vec<Vec<f64>>, label: Option<ClassId>) -> Self {
        FeatureVector { per_band, label, floored: 0 }
    }

    pub fn band_count(&self) -> usize {
        self.per_band.len()
    }

    /// All bands concatenated in band order.
    pub fn flatten(&self) -> Vec<f64> {
        self.per_band.concat()
    }
}

/// Rayleigh quotient `wᵀΣ1w / wᵀΣ2w`.
pub fn rayleigh_quotient(w: &[f64], sigma1: &Matrix, sigma2: &Matrix) -> f64 {
    let a = dot(w, &sigma1.matvec(w).expect("shape"));
    let b = dot(w, &sigma2.matvec(w).expect("shape"));
    a / b
}
