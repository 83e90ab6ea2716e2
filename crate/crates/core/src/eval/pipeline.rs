//! Per-fold training and prediction.

use std::time::Instant;

use rayon::prelude::*;

use crate::csp::{ClassId, CspConfig, CspModel, EegEpoch, FeatureVector};
use crate::error::{Error, Result};
use crate::filterbank::{default_bands, split_subbands, BandSpec, FilterBank};
use crate::io::Dataset;
use crate::numerics::Matrix;
use crate::sgfb::{build_dictionary, cap_norm, classify, normalize_columns, BandDictionary, SgfbHyperparams, SgfbSolver, SparseCode};

/// How test trials are coded against the training dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// One dictionary block per band, coupled across bands.
    Sgfb,
    /// All bands' features concatenated into one block, no coupling.
    Src,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sgfb => "sgfb",
            Method::Src => "src",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub bands: Vec<BandSpec>,
    pub csp: CspConfig,
    pub hp: SgfbHyperparams,
    pub method: Method,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bands: default_bands(),
            csp: CspConfig::default(),
            hp: SgfbHyperparams::default(),
            method: Method::Sgfb,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self, fs_hz: f64) -> Result<()> {
        if self.bands.is_empty() {
            return Err(Error::Parameter("no bands configured".into()));
        }
        for b in &self.bands {
            b.validate(fs_hz)?;
        }
        if self.csp.m_pairs == 0 {
            return Err(Error::Parameter("m_pairs must be >= 1".into()));
        }
        if !(self.csp.shrinkage.is_finite() && (0.0..1.0).contains(&self.csp.shrinkage)) {
            return Err(Error::Parameter(format!("shrinkage must lie in [0, 1), got {}", self.csp.shrinkage)));
        }
        self.hp.validate()
    }
}

/// Band-filtered, windowed trials of a dataset.
///
/// Filtering acts on each trial alone, so computing it once for all trials
/// leaks nothing between folds.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTrials {
    /// `bands[i][b]`: trial `i` in band `b`, cropped to the window.
    pub bands: Vec<Vec<EegEpoch>>,
    pub labels: Vec<ClassId>,
    pub window_samples: (usize, usize),
    pub filter_seconds: f64,
}

/// Window `[start_s, end_s)` relative to the cue, in samples from trial start.
pub fn window_samples(dataset: &Dataset, window: (f64, f64)) -> Result<(usize, usize)> {
    let (w0, w1) = window;
    if !(w0.is_finite() && w1.is_finite() && w0 < w1) {
        return Err(Error::Parameter(format!("window {w0}-{w1} s is empty")));
    }
    let to_sample = |t: f64| ((dataset.cue_offset_s + t) * dataset.fs_hz).round();
    let (s0, s1) = (to_sample(w0), to_sample(w1));
    if s0 < 0.0 || s1 > dataset.samples() as f64 || s1 - s0 < 2.0 {
        return Err(Error::Parameter(format!(
            "window {w0}-{w1} s after a {} s cue does not fit a {} s trial",
            dataset.cue_offset_s,
            dataset.duration_s()
        )));
    }
    Ok((s0 as usize, s1 as usize))
}

pub fn prepare_trials(dataset: &Dataset, bands: &[BandSpec], window: (f64, f64)) -> Result<PreparedTrials> {
    let (s0, s1) = window_samples(dataset, window)?;
    let bank = FilterBank::new(bands.to_vec(), dataset.fs_hz)?;
    let start = Instant::now();
    let filtered = dataset
        .trials
        .par_iter()
        .map(|t| split_subbands(t, &bank)?.iter().map(|e| e.crop(s0, s1)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(PreparedTrials {
        bands: filtered,
        labels: dataset.labels(),
        window_samples: (s0, s1),
        filter_seconds: start.elapsed().as_secs_f64(),
    })
}

impl PreparedTrials {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Copy with trial `i` taken from position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> PreparedTrials {
        PreparedTrials {
            bands: perm.iter().map(|&p| self.bands[p].clone()).collect(),
            labels: perm.iter().map(|&p| self.labels[p]).collect(),
            window_samples: self.window_samples,
            filter_seconds: self.filter_seconds,
        }
    }
}

/// Wall-clock seconds spent per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub filtering: f64,
    pub csp: f64,
    pub dictionary: f64,
    pub solve: f64,
}

impl StageTimings {
    pub fn add(&mut self, o: &StageTimings) {
        self.filtering += o.filtering;
        self.csp += o.csp;
        self.dictionary += o.dictionary;
        self.solve += o.solve;
    }
}

/// Everything learned from one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldModel {
    pub csp: CspModel,
    pub dictionary: BandDictionary,
    pub method: Method,
    /// Training trial indices, ascending.
    pub train: Vec<usize>,
    /// Training variances clamped to the floor.
    pub floored: usize,
    pub timings: StageTimings,
    solver: SgfbSolver,
}

/// Outcome for one test trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub class: ClassId,
    pub tie: bool,
    pub converged: bool,
    pub kkt: f64,
    pub degenerate_steps: usize,
}

fn fnv1a(hash: &mut u64, bytes: &[u8]) {
    for &b in bytes {
        *hash ^= b as u64;
        *hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
}

fn hash_matrix(hash: &mut u64, m: &Matrix) {
    fnv1a(hash, &(m.rows() as u64).to_le_bytes());
    fnv1a(hash, &(m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        fnv1a(hash, &v.to_bits().to_le_bytes());
    }
}

impl FoldModel {
    /// Trains CSP and builds the dictionary from the listed trials.
    pub fn fit(prep: &PreparedTrials, train: &[usize], cfg: &PipelineConfig) -> Result<FoldModel> {
        let mut train = train.to_vec();
        train.sort_unstable();
        train.dedup();
        let mut timings = StageTimings::default();

        let start = Instant::now();
        let trials: Vec<&[EegEpoch]> = train.iter().map(|&i| prep.bands[i].as_slice()).collect();
        let csp = CspModel::fit(&trials, &cfg.csp)?;
        timings.csp = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let mut floored = 0;
        let feats: Vec<FeatureVector> = trials
            .iter()
            .map(|t| {
                let f = csp.extract_features(t)?;
                floored += f.floored;
                Ok(match cfg.method {
                    Method::Sgfb => f,
                    Method::Src => FeatureVector::new(vec![f.flatten()], f.label),
                })
            })
            .collect::<Result<_>>()?;
        let dictionary = normalize_columns(&build_dictionary(&feats, &train)?);
        let solver = SgfbSolver::new(&dictionary);
        timings.dictionary = start.elapsed().as_secs_f64();
        Ok(FoldModel { csp, dictionary, method: cfg.method, train, floored, timings, solver })
    }

    /// FNV-1a hash of the spatial filters and the dictionary.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325;
        for (w, ev) in self.csp.per_band.iter().zip(&self.csp.eigenvalues) {
            hash_matrix(&mut h, w);
            for v in ev {
                fnv1a(&mut h, &v.to_bits().to_le_bytes());
            }
        }
        for b in &self.dictionary.blocks {
            hash_matrix(&mut h, b);
        }
        fnv1a(&mut h, &self.dictionary.column_class);
        for t in &self.dictionary.column_trial {
            fnv1a(&mut h, &(*t as u64).to_le_bytes());
        }
        h
    }

    /// Norm-capped test vectors of one trial, one per dictionary block, and
    /// the number of floored variances.
    pub fn encode(&self, band_epochs: &[EegEpoch]) -> Result<(Vec<Vec<f64>>, usize)> {
        let f = self.csp.extract_features(band_epochs)?;
        let mut y = match self.method {
            Method::Sgfb => f.per_band,
            Method::Src => vec![f.flatten()],
        };
        for v in &mut y {
            cap_norm(v);
        }
        Ok((y, f.floored))
    }

    pub fn predict_encoded(&self, y: &[Vec<f64>], hp: &SgfbHyperparams) -> Result<Prediction> {
        let code = self.solver.solve(y, hp)?;
        self.prediction(y, &code)
    }

    /// Predictions along a hyperparameter path, each solve started from the
    /// previous solution.
    pub fn predict_path(&self, y: &[Vec<f64>], path: &[SgfbHyperparams]) -> Result<Vec<Prediction>> {
        let mut prev: Option<Matrix> = None;
        let mut out = Vec::with_capacity(path.len());
        for hp in path {
            let code = self.solver.solve_from(y, hp, prev.as_ref())?;
            out.push(self.prediction(y, &code)?);
            prev = Some(code.coeffs);
        }
        Ok(out)
    }

    fn prediction(&self, y: &[Vec<f64>], code: &SparseCode) -> Result<Prediction> {
        let c = classify(y, &self.dictionary, code)?;
        Ok(Prediction {
            class: c.class,
            tie: c.tie,
            converged: code.converged,
            kkt: code.max_kkt_violation,
            degenerate_steps: code.degenerate_steps,
        })
    }

    pub fn predict(&self, band_epochs: &[EegEpoch], hp: &SgfbHyperparams) -> Result<Prediction> {
        self.predict_encoded(&self.encode(band_epochs)?.0, hp)
    }
}
