//! Run configuration files.
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! list = 1, 2, 3
//! bands = 4-8, 8-12
//! ```
//!
//! Unknown sections and keys are rejected so typos fail loudly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::csp::CspConfig;
use crate::error::{Error, Result};
use crate::eval::{EvalConfig, Method, PipelineConfig};
use crate::filterbank::{BandSpec, DEFAULT_ORDER};
use crate::io::SynthConfig;
use crate::sgfb::SgfbHyperparams;

const KNOWN: &[(&str, &[&str])] = &[
    ("dataset", &["path"]),
    (
        "synth",
        &[
            "channels",
            "trials_per_class",
            "fs_hz",
            "duration_s",
            "cue_offset_s",
            "erd_band_hz",
            "snr_db",
            "amplitude_jitter",
            "seed",
        ],
    ),
    ("filterbank", &["bands", "order"]),
    ("csp", &["m_pairs", "shrinkage"]),
    ("window", &["start_s", "end_s"]),
    ("sgfb", &["method", "lambda", "lambda1", "max_outer_iters", "tol"]),
    (
        "eval",
        &["folds", "inner_folds", "seed", "lambda_grid", "lambda1_grid", "train_fraction", "fractions", "repeats"],
    ),
    ("output", &["path", "timings"]),
];

/// `section.key → (value, line)` after syntax checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
    sections: Vec<String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let syntax = |message: String| Error::ConfigSyntax { line: no, message };
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| syntax(format!("unterminated section header {line:?}")))?;
                let name = name.trim();
                if !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(syntax(format!("unknown section [{name}]")));
                }
                if raw.sections.iter().any(|s| s == name) {
                    return Err(syntax(format!("section [{name}] appears twice")));
                }
                raw.sections.push(name.to_string());
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| syntax(format!("expected 'key = value', found {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.as_deref().ok_or_else(|| syntax(format!("key '{key}' outside any section")))?;
            let allowed = KNOWN.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(syntax(format!("unknown key '{key}' in [{sec}]")));
            }
            if value.is_empty() {
                return Err(syntax(format!("key '{key}' has no value")));
            }
            let full = format!("{sec}.{key}");
            if raw.entries.contains_key(&full) {
                return Err(syntax(format!("duplicate key '{full}'")));
            }
            raw.entries.insert(full, (value.to_string(), no));
        }
        Ok(raw)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.iter().any(|s| s == name)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn value_error(&self, key: &str, message: String) -> Error {
        let line = self.entries.get(key).map_or(0, |(_, l)| *l);
        Error::ConfigValue { key: key.to_string(), message: format!("{message} (line {line})") }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| self.value_error(key, format!("{v:?} is not {what}"))))
            .transpose()
    }

    fn float(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.parsed::<f64>(key, "a number")?.unwrap_or(default);
        if !v.is_finite() {
            return Err(self.value_error(key, "must be finite".into()));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parsed::<usize>(key, "a non-negative integer")?.unwrap_or(default))
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.parsed::<u64>(key, "a non-negative integer")?.unwrap_or(default))
    }

    fn boolean(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(self.value_error(key, format!("{v:?} is not true or false"))),
        }
    }

    fn float_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| self.value_error(key, format!("{:?} is not a number", s.trim())))
                })
                .collect(),
        }
    }

    fn range(&self, key: &str, text: &str) -> Result<(f64, f64)> {
        let bad = || self.value_error(key, format!("{text:?} is not a range like 8-12"));
        let (lo, hi) = text.trim().split_once('-').ok_or_else(bad)?;
        let lo = lo.trim().parse::<f64>().map_err(|_| bad())?;
        let hi = hi.trim().parse::<f64>().map_err(|_| bad())?;
        Ok((lo, hi))
    }
}

/// Where the trials come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synthetic(SynthConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: DataSource,
    pub pipeline: PipelineConfig,
    pub eval: EvalConfig,
    pub output: Option<PathBuf>,
    pub timings: bool,
}

/// `[synth]` with defaults for missing keys.
pub fn synth_from(raw: &RawConfig) -> Result<SynthConfig> {
    let d = SynthConfig::default();
    let erd_band_hz = match raw.get("synth.erd_band_hz") {
        Some(v) => raw.range("synth.erd_band_hz", v)?,
        None => d.erd_band_hz,
    };
    let cfg = SynthConfig {
        channels: raw.count("synth.channels", d.channels)?,
        trials_per_class: raw.count("synth.trials_per_class", d.trials_per_class)?,
        fs_hz: raw.float("synth.fs_hz", d.fs_hz)?,
        duration_s: raw.float("synth.duration_s", d.duration_s)?,
        cue_offset_s: raw.float("synth.cue_offset_s", d.cue_offset_s)?,
        erd_band_hz,
        snr_db: raw.float("synth.snr_db", d.snr_db)?,
        amplitude_jitter: raw.float("synth.amplitude_jitter", d.amplitude_jitter)?,
        seed: raw.u64("synth.seed", d.seed)?,
    };
    cfg.validate().map_err(|e| Error::ConfigValue { key: "synth".into(), message: e.to_string() })?;
    Ok(cfg)
}

impl RunConfig {
    /// Builds and validates a run configuration. Relative dataset and output
    /// paths are resolved against `base_dir`.
    pub fn from_raw(raw: &RawConfig, base_dir: &Path) -> Result<RunConfig> {
        let source = match (raw.get("dataset.path"), raw.has_section("synth")) {
            (Some(_), true) => {
                return Err(Error::ConfigValue {
                    key: "dataset.path".into(),
                    message: "give either [dataset] path or a [synth] section, not both".into(),
                })
            }
            (Some(p), false) => DataSource::File(base_dir.join(p)),
            (None, true) => DataSource::Synthetic(synth_from(raw)?),
            (None, false) => return Err(Error::MissingKey("dataset.path".into())),
        };

        let order = raw.count("filterbank.order", DEFAULT_ORDER)?;
        let bands = match raw.get("filterbank.bands") {
            None => crate::filterbank::default_bands().into_iter().map(|b| b.with_order(order)).collect(),
            Some(v) => v
                .split(',')
                .map(|s| raw.range("filterbank.bands", s).map(|(lo, hi)| BandSpec::new(lo, hi).with_order(order)))
                .collect::<Result<Vec<_>>>()?,
        };

        let dc = CspConfig::default();
        let csp = CspConfig {
            m_pairs: raw.count("csp.m_pairs", dc.m_pairs)?,
            shrinkage: raw.float("csp.shrinkage", dc.shrinkage)?,
        };

        let dh = SgfbHyperparams::default();
        let hp = SgfbHyperparams {
            lambda: raw.float("sgfb.lambda", dh.lambda)?,
            lambda1: raw.float("sgfb.lambda1", dh.lambda1)?,
            max_outer_iters: raw.count("sgfb.max_outer_iters", dh.max_outer_iters)?,
            tol: raw.float("sgfb.tol", dh.tol)?,
        };
        let method = match raw.get("sgfb.method").unwrap_or("sgfb") {
            "sgfb" => Method::Sgfb,
            "src" => Method::Src,
            other => return Err(raw.value_error("sgfb.method", format!("{other:?} is not sgfb or src"))),
        };

        let de = EvalConfig::default();
        let eval = EvalConfig {
            folds: raw.count("eval.folds", de.folds)?,
            inner_folds: raw.count("eval.inner_folds", de.inner_folds)?,
            lambda_grid: raw.float_list("eval.lambda_grid", &de.lambda_grid)?,
            lambda1_grid: raw.float_list("eval.lambda1_grid", &de.lambda1_grid)?,
            train_fraction: raw.float("eval.train_fraction", de.train_fraction)?,
            fractions: raw.float_list("eval.fractions", &de.fractions)?,
            repeats: raw.count("eval.repeats", de.repeats)?,
            window: (raw.float("window.start_s", de.window.0)?, raw.float("window.end_s", de.window.1)?),
            seed: raw.u64("eval.seed", de.seed)?,
        };

        let cfg = RunConfig {
            source,
            pipeline: PipelineConfig { bands, csp, hp, method },
            eval,
            output: raw.get("output.path").map(|p| base_dir.join(p)),
            timings: raw.boolean("output.timings", false)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_raw(&RawConfig::parse(&text)?, base)
    }

    /// Checks everything that can be checked before any data is read.
    pub fn validate(&self) -> Result<()> {
        let as_config = |key: &str, e: Error| Error::ConfigValue { key: key.into(), message: e.to_string() };
        self.eval.validate().map_err(|e| as_config("eval", e))?;
        let fs = match &self.source {
            DataSource::Synthetic(s) => Some(s.fs_hz),
            DataSource::File(_) => None,
        };
        // Band edges against Nyquist need the sampling rate; for files that
        // check runs right after the header is read.
        let probe = fs.unwrap_or(f64::MAX);
        self.pipeline.validate(probe).map_err(|e| as_config("pipeline", e))?;
        if let DataSource::Synthetic(s) = &self.source {
            let (w0, w1) = self.eval.window;
            if s.cue_offset_s + w0 < 0.0 || s.cue_offset_s + w1 > s.duration_s {
                return Err(as_config(
                    "window",
                    Error::Parameter(format!("window {w0}-{w1} s does not fit the synthetic trial")),
                ));
            }
            if s.trials_per_class < self.eval.folds {
                return Err(as_config(
                    "eval.folds",
                    Error::Parameter(format!("{} folds but {} trials per class", self.eval.folds, s.trials_per_class)),
                ));
            }
        }
        Ok(())
    }

    /// Canonical `key = value` echo of every setting, defaults included.
    pub fn echo(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut e: Vec<(String, String)> = Vec::new();
        match &self.source {
            DataSource::File(p) => {
                let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
                e.push(("dataset.file".into(), name));
            }
            DataSource::Synthetic(s) => {
                e.push(("synth.channels".into(), s.channels.to_string()));
                e.push(("synth.trials_per_class".into(), s.trials_per_class.to_string()));
                e.push(("synth.fs_hz".into(), s.fs_hz.to_string()));
                e.push(("synth.duration_s".into(), s.duration_s.to_string()));
                e.push(("synth.cue_offset_s".into(), s.cue_offset_s.to_string()));
                e.push(("synth.erd_band_hz".into(), format!("{}-{}", s.erd_band_hz.0, s.erd_band_hz.1)));
                e.push(("synth.snr_db".into(), s.snr_db.to_string()));
                e.push(("synth.amplitude_jitter".into(), s.amplitude_jitter.to_string()));
                e.push(("synth.seed".into(), s.seed.to_string()));
            }
        }
        let p = &self.pipeline;
        let bands: Vec<String> = p.bands.iter().map(|b| format!("{}-{}", b.low_hz, b.high_hz)).collect();
        e.push(("filterbank.bands".into(), bands.join(" ")));
        e.push(("filterbank.order".into(), p.bands[0].order.to_string()));
        e.push(("filterbank.phase".into(), "zero (forward-backward)".into()));
        e.push(("csp.m_pairs".into(), p.csp.m_pairs.to_string()));
        e.push(("csp.shrinkage".into(), p.csp.shrinkage.to_string()));
        e.push((
            "csp.covariance".into(),
            "per-trial centered and trace-normalized then averaged per class".into(),
        ));
        e.push(("window.start_s".into(), self.eval.window.0.to_string()));
        e.push(("window.end_s".into(), self.eval.window.1.to_string()));
        e.push(("sgfb.method".into(), p.method.name().into()));
        e.push(("sgfb.lambda".into(), p.hp.lambda.to_string()));
        e.push(("sgfb.lambda1".into(), p.hp.lambda1.to_string()));
        e.push(("sgfb.max_outer_iters".into(), p.hp.max_outer_iters.to_string()));
        e.push(("sgfb.tol".into(), format!("{:e}", p.hp.tol)));
        e.push(("eval.folds".into(), self.eval.folds.to_string()));
        e.push(("eval.inner_folds".into(), self.eval.inner_folds.to_string()));
        e.push(("eval.seed".into(), self.eval.seed.to_string()));
        e.push(("eval.lambda_grid".into(), list(&self.eval.lambda_grid)));
        e.push(("eval.lambda1_grid".into(), list(&self.eval.lambda1_grid)));
        e.push(("eval.train_fraction".into(), self.eval.train_fraction.to_string()));
        e.push(("eval.fractions".into(), list(&self.eval.fractions)));
        e.push(("eval.repeats".into(), self.eval.repeats.to_string()));
        e
    }
}
