//! Cross-validation, hyperparameter search and training-size experiments.
//!
//! Work units (folds, grid points, repeats) run on the rayon pool and are
//! collected by index, so results do not depend on scheduling.

mod metrics;
mod pipeline;

pub use metrics::{compute_metrics, mean_std, metrics_from, Confusion, MetricSummary, Metrics};
pub use pipeline::{
    prepare_trials, window_samples, FoldModel, Method, PipelineConfig, Prediction, PreparedTrials, StageTimings,
};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

use crate::csp::ClassId;
use crate::error::{Error, Result};
use crate::io::{Dataset, Report};
use crate::sgfb::SgfbHyperparams;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub folds: usize,
    /// Folds of the inner cross-validation used by the grid search.
    pub inner_folds: usize,
    pub lambda_grid: Vec<f64>,
    pub lambda1_grid: Vec<f64>,
    /// Fraction of each training fold kept in a plain cross-validation.
    pub train_fraction: f64,
    pub fractions: Vec<f64>,
    pub repeats: usize,
    /// Seconds relative to the cue.
    pub window: (f64, f64),
    pub seed: u64,
}

fn steps(from: usize, to: usize) -> Vec<f64> {
    (from..=to).map(|k| k as f64 / 10.0).collect()
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 10,
            inner_folds: 10,
            lambda_grid: steps(1, 9),
            lambda1_grid: steps(1, 4),
            train_fraction: 1.0,
            fractions: vec![0.3, 0.5, 0.7, 1.0],
            repeats: 10,
            window: (1.0, 2.0),
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 || self.inner_folds < 2 {
            return Err(Error::Parameter(format!(
                "folds and inner_folds must be >= 2, got {} and {}",
                self.folds, self.inner_folds
            )));
        }
        for (name, grid) in [("lambda_grid", &self.lambda_grid), ("lambda1_grid", &self.lambda1_grid)] {
            if grid.is_empty() {
                return Err(Error::Parameter(format!("{name} is empty")));
            }
            if grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Parameter(format!("{name} values must be finite and >= 0")));
            }
        }
        let frac_ok = |f: f64| f > 0.0 && f <= 1.0;
        if !frac_ok(self.train_fraction) || !self.fractions.iter().all(|&f| frac_ok(f)) {
            return Err(Error::Parameter("fractions must lie in (0, 1]".into()));
        }
        if self.fractions.is_empty() {
            return Err(Error::Parameter("fractions list is empty".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Parameter("repeats must be >= 1".into()));
        }
        if !(self.window.0.is_finite() && self.window.1.is_finite() && self.window.0 < self.window.1) {
            return Err(Error::Parameter(format!("window {}-{} s is empty", self.window.0, self.window.1)));
        }
        Ok(())
    }
}

/// Mixes `tags` into `seed` (splitmix64 finalizer per tag).
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(seed, |s, &t| {
        let mut z = s ^ t.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    })
}

/// Stratified fold id for every trial.
///
/// Each class is shuffled and dealt round-robin; the second class starts
/// where the first left off so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[ClassId], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Folds(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let mut offset = 0;
    for class in [1, 2] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(Error::Folds(format!("class {class} has {} trials, fewer than {k} folds", idx.len())));
        }
        idx.shuffle(&mut rng);
        for (j, &i) in idx.iter().enumerate() {
            fold[i] = (offset + j) % k;
        }
        offset = (offset + idx.len()) % k;
    }
    Ok(fold)
}

/// Solver and feature-extraction warnings aggregated over test trials.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Flags {
    pub floored_features: usize,
    pub zero_columns: usize,
    pub ties: usize,
    pub unconverged: usize,
    pub degenerate_steps: usize,
    pub max_kkt: f64,
}

impl Flags {
    fn merge(&mut self, o: &Flags) {
        self.floored_features += o.floored_features;
        self.zero_columns += o.zero_columns;
        self.ties += o.ties;
        self.unconverged += o.unconverged;
        self.degenerate_steps += o.degenerate_steps;
        self.max_kkt = self.max_kkt.max(o.max_kkt);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub test: Vec<usize>,
    pub train_size: usize,
    pub hp: SgfbHyperparams,
    pub metrics: Metrics,
    pub fingerprint: u64,
    pub flags: Flags,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub summary: MetricSummary,
    pub flags: Flags,
    pub timings: StageTimings,
}

impl CvResult {
    fn from_folds(folds: Vec<FoldResult>, filter_seconds: f64) -> Result<CvResult> {
        let metrics: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
        let summary = MetricSummary::from_metrics(&metrics)?;
        let mut flags = Flags::default();
        let mut timings = StageTimings { filtering: filter_seconds, ..Default::default() };
        for f in &folds {
            flags.merge(&f.flags);
            timings.add(&f.timings);
        }
        Ok(CvResult { folds, summary, flags, timings })
    }

    pub fn mean_acc(&self) -> f64 {
        self.summary.acc.0
    }
}

/// Scores a fitted model on test trials with one hyperparameter setting.
fn evaluate(model: &FoldModel, prep: &PreparedTrials, test: &[usize], hp: &SgfbHyperparams) -> Result<(Confusion, Flags, f64)> {
    let start = Instant::now();
    let mut confusion = Confusion::default();
    let mut flags = Flags { floored_features: model.floored, zero_columns: model.dictionary.zero_columns.len(), ..Default::default() };
    for &i in test {
        let (y, floored) = model.encode(&prep.bands[i])?;
        let p = model.predict_encoded(&y, hp)?;
        confusion.record(prep.labels[i], p.class);
        flags.floored_features += floored;
        flags.ties += p.tie as usize;
        flags.unconverged += !p.converged as usize;
        flags.degenerate_steps += p.degenerate_steps;
        flags.max_kkt = flags.max_kkt.max(p.kkt);
    }
    Ok((confusion, flags, start.elapsed().as_secs_f64()))
}

fn split(fold_of: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..fold_of.len()).partition(|&i| fold_of[i] != fold)
}

/// Stratified subsample keeping `round(fraction · count)` trials of each class.
fn subsample(train: &[usize], labels: &[ClassId], fraction: f64, seed: u64) -> Vec<usize> {
    if fraction >= 1.0 {
        return train.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = Vec::new();
    for class in [1, 2] {
        let mut idx: Vec<usize> = train.iter().copied().filter(|&i| labels[i] == class).collect();
        let keep = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len());
        idx.shuffle(&mut rng);
        kept.extend_from_slice(&idx[..keep]);
    }
    kept.sort_unstable();
    kept
}

fn check_sampling(labels: &[ClassId], fraction: f64, folds: usize) -> Result<()> {
    for class in [1, 2] {
        let n = labels.iter().filter(|&&l| l == class).count();
        let kept = (fraction * n as f64).floor() as usize;
        if kept < folds {
            return Err(Error::Sampling(format!(
                "fraction {fraction} keeps {kept} of {n} class {class} trials, fewer than {folds} folds"
            )));
        }
    }
    Ok(())
}

fn cv_on_prepared(
    prep: &PreparedTrials,
    pipeline: &PipelineConfig,
    folds: usize,
    fold_seed: u64,
    fraction: f64,
    sample_seed: u64,
) -> Result<CvResult> {
    let fold_of = stratified_folds(&prep.labels, folds, fold_seed)?;
    let results = (0..folds)
        .into_par_iter()
        .map(|f| {
            let (train, test) = split(&fold_of, f);
            let train = subsample(&train, &prep.labels, fraction, derive_seed(sample_seed, &[f as u64]));
            let model = FoldModel::fit(prep, &train, pipeline)?;
            let (confusion, flags, solve) = evaluate(&model, prep, &test, &pipeline.hp)?;
            Ok(FoldResult {
                fold: f,
                train_size: train.len(),
                test,
                hp: pipeline.hp,
                metrics: metrics_from(confusion)?,
                fingerprint: model.fingerprint(),
                flags,
                timings: StageTimings { solve, ..model.timings },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CvResult::from_folds(results, prep.filter_seconds)
}

/// Stratified k-fold cross-validation with fixed hyperparameters.
pub fn kfold_cv(dataset: &Dataset, pipeline: &PipelineConfig, eval: &EvalConfig) -> Result<CvResult> {
    eval.validate()?;
    pipeline.validate(dataset.fs_hz)?;
    let prep = prepare_trials(dataset, &pipeline.bands, eval.window)?;
    if eval.train_fraction < 1.0 {
        check_sampling(&prep.labels, eval.train_fraction, eval.folds)?;
    }
    cv_on_prepared(&prep, pipeline, eval.folds, eval.seed, eval.train_fraction, derive_seed(eval.seed, &[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Outer folds, each scored with the point chosen on its training data.
    pub outer: CvResult,
    pub lambda_grid: Vec<f64>,
    pub lambda1_grid: Vec<f64>,
    /// `surface[i][j]`: mean inner accuracy at `(λ_i, λ1_j)`, averaged over outer folds.
    pub surface: Vec<Vec<f64>>,
    /// Maximizer of `surface`.
    pub best: (f64, f64),
}

/// Index of the best grid cell; ties go to larger λ, then smaller λ1.
fn argmax_grid(surface: &[Vec<f64>], lambdas: &[f64], lambda1s: &[f64]) -> (usize, usize) {
    let mut best = (0, 0);
    for i in 0..lambdas.len() {
        for j in 0..lambda1s.len() {
            let (bi, bj) = best;
            let (v, bv) = (surface[i][j], surface[bi][bj]);
            let better = v > bv
                || (v == bv && (lambdas[i] > lambdas[bi] || (lambdas[i] == lambdas[bi] && lambda1s[j] < lambda1s[bj])));
            if better {
                best = (i, j);
            }
        }
    }
    best
}

/// Inner-CV accuracy at every grid point, using only `train`.
fn inner_surface(
    prep: &PreparedTrials,
    train: &[usize],
    pipeline: &PipelineConfig,
    eval: &EvalConfig,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let labels: Vec<ClassId> = train.iter().map(|&i| prep.labels[i]).collect();
    let fold_of = stratified_folds(&labels, eval.inner_folds, seed)?;
    let (nl, nl1) = (eval.lambda_grid.len(), eval.lambda1_grid.len());
    let per_fold = (0..eval.inner_folds)
        .into_par_iter()
        .map(|f| {
            let (tr, te) = split(&fold_of, f);
            let tr: Vec<usize> = tr.iter().map(|&k| train[k]).collect();
            let te: Vec<usize> = te.iter().map(|&k| train[k]).collect();
            let model = FoldModel::fit(prep, &tr, pipeline)?;
            let encoded = te.iter().map(|&i| Ok((model.encode(&prep.bands[i])?.0, prep.labels[i]))).collect::<Result<Vec<_>>>()?;
            let mut acc = vec![vec![0.0; nl1]; nl];
            for (j, &lambda1) in eval.lambda1_grid.iter().enumerate() {
                let path: Vec<SgfbHyperparams> =
                    eval.lambda_grid.iter().map(|&lambda| SgfbHyperparams { lambda, lambda1, ..pipeline.hp }).collect();
                for (y, label) in &encoded {
                    for (i, p) in model.predict_path(y, &path)?.iter().enumerate() {
                        acc[i][j] += (p.class == *label) as usize as f64;
                    }
                }
            }
            for a in acc.iter_mut().flatten() {
                *a /= encoded.len() as f64;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let k = per_fold.len() as f64;
    Ok((0..nl).map(|i| (0..nl1).map(|j| per_fold.iter().map(|a| a[i][j]).sum::<f64>() / k).collect()).collect())
}

/// Nested cross-validation over the `(λ, λ1)` grid.
pub fn grid_search(dataset: &Dataset, pipeline: &PipelineConfig, eval: &EvalConfig) -> Result<GridResult> {
    eval.validate()?;
    pipeline.validate(dataset.fs_hz)?;
    let prep = prepare_trials(dataset, &pipeline.bands, eval.window)?;
    let fold_of = stratified_folds(&prep.labels, eval.folds, eval.seed)?;
    let outer = (0..eval.folds)
        .into_par_iter()
        .map(|f| {
            let (train, test) = split(&fold_of, f);
            let surface = inner_surface(&prep, &train, pipeline, eval, derive_seed(eval.seed, &[2, f as u64]))?;
            let (i, j) = argmax_grid(&surface, &eval.lambda_grid, &eval.lambda1_grid);
            let hp = SgfbHyperparams { lambda: eval.lambda_grid[i], lambda1: eval.lambda1_grid[j], ..pipeline.hp };
            let model = FoldModel::fit(&prep, &train, pipeline)?;
            let (confusion, flags, solve) = evaluate(&model, &prep, &test, &hp)?;
            let result = FoldResult {
                fold: f,
                train_size: train.len(),
                test,
                hp,
                metrics: metrics_from(confusion)?,
                fingerprint: model.fingerprint(),
                flags,
                timings: StageTimings { solve, ..model.timings },
            };
            Ok((result, surface))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = outer.len() as f64;
    let (nl, nl1) = (eval.lambda_grid.len(), eval.lambda1_grid.len());
    let surface: Vec<Vec<f64>> =
        (0..nl).map(|i| (0..nl1).map(|j| outer.iter().map(|(_, s)| s[i][j]).sum::<f64>() / k).collect()).collect();
    let (bi, bj) = argmax_grid(&surface, &eval.lambda_grid, &eval.lambda1_grid);
    let folds = outer.into_iter().map(|(r, _)| r).collect();
    Ok(GridResult {
        outer: CvResult::from_folds(folds, prep.filter_seconds)?,
        lambda_grid: eval.lambda_grid.clone(),
        lambda1_grid: eval.lambda1_grid.clone(),
        surface,
        best: (eval.lambda_grid[bi], eval.lambda1_grid[bj]),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionRow {
    pub fraction: f64,
    pub repeats: usize,
    /// Mean and spread over repeats of the per-repeat mean metrics.
    pub summary: MetricSummary,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionResult {
    pub rows: Vec<FractionRow>,
    pub timings: StageTimings,
}

/// Cross-validation with each training fold subsampled to every fraction.
///
/// Repeat `r` draws new folds; repeat 0 uses the configured seed directly,
/// so fraction 1.0 with one repeat reproduces [`kfold_cv`].
pub fn fraction_experiment(dataset: &Dataset, pipeline: &PipelineConfig, eval: &EvalConfig) -> Result<FractionResult> {
    eval.validate()?;
    pipeline.validate(dataset.fs_hz)?;
    let prep = prepare_trials(dataset, &pipeline.bands, eval.window)?;
    for &f in &eval.fractions {
        check_sampling(&prep.labels, f, eval.folds)?;
    }
    let units: Vec<(usize, usize)> =
        (0..eval.fractions.len()).flat_map(|fi| (0..eval.repeats).map(move |r| (fi, r))).collect();
    let runs = units
        .par_iter()
        .map(|&(fi, r)| {
            let fold_seed = if r == 0 { eval.seed } else { derive_seed(eval.seed, &[3, r as u64]) };
            let sample_seed = derive_seed(eval.seed, &[4, fi as u64, r as u64]);
            cv_on_prepared(&prep, pipeline, eval.folds, fold_seed, eval.fractions[fi], sample_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut timings = StageTimings { filtering: prep.filter_seconds, ..Default::default() };
    let mut rows = Vec::with_capacity(eval.fractions.len());
    for (fi, &fraction) in eval.fractions.iter().enumerate() {
        let mine: Vec<&CvResult> = runs[fi * eval.repeats..(fi + 1) * eval.repeats].iter().collect();
        let mut flags = Flags::default();
        for cv in &mine {
            flags.merge(&cv.flags);
            timings.add(&StageTimings { filtering: 0.0, ..cv.timings });
        }
        let accs: Vec<f64> = mine.iter().map(|cv| cv.summary.acc.0).collect();
        let sens: Vec<f64> = mine.iter().filter_map(|cv| cv.summary.sen.map(|s| s.0)).collect();
        let spes: Vec<f64> = mine.iter().filter_map(|cv| cv.summary.spe.map(|s| s.0)).collect();
        let summary = MetricSummary {
            acc: mean_std(&accs).ok_or(Error::EmptyEvaluation)?,
            sen: mean_std(&sens),
            spe: mean_std(&spes),
        };
        rows.push(FractionRow { fraction, repeats: eval.repeats, summary, flags });
    }
    Ok(FractionResult { rows, timings })
}

fn f4(v: f64) -> String {
    format!("{v:.4}")
}

fn opt4(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), f4)
}

fn pair4(v: Option<(f64, f64)>) -> [String; 2] {
    match v {
        Some((m, s)) => [f4(m), f4(s)],
        None => ["undefined".into(), "undefined".into()],
    }
}

fn flag_entries(flags: &Flags) -> Vec<(String, String)> {
    vec![
        ("floored_features".into(), flags.floored_features.to_string()),
        ("zero_columns".into(), flags.zero_columns.to_string()),
        ("residual_ties".into(), flags.ties.to_string()),
        ("unconverged_solves".into(), flags.unconverged.to_string()),
        ("degenerate_active_sets".into(), flags.degenerate_steps.to_string()),
        ("max_kkt_violation".into(), format!("{:.3e}", flags.max_kkt)),
    ]
}

/// Appends a `timings` section.
pub fn push_timings(report: &mut Report, t: &StageTimings) {
    report.push_kv(
        "timings",
        [
            ("filtering_s", format!("{:.3}", t.filtering)),
            ("csp_s", format!("{:.3}", t.csp)),
            ("dictionary_s", format!("{:.3}", t.dictionary)),
            ("solve_s", format!("{:.3}", t.solve)),
        ],
    );
}

/// Appends per-fold metrics, a summary and the degeneracy flags.
pub fn push_cv(report: &mut Report, cv: &CvResult) {
    let rows = cv
        .folds
        .iter()
        .map(|f| {
            let c = f.metrics.confusion;
            vec![
                f.fold.to_string(),
                f.train_size.to_string(),
                f.test.len().to_string(),
                f.hp.lambda.to_string(),
                f.hp.lambda1.to_string(),
                c.tp.to_string(),
                c.tn.to_string(),
                c.fp.to_string(),
                c.fn_.to_string(),
                f4(f.metrics.acc),
                opt4(f.metrics.sen),
                opt4(f.metrics.spe),
                format!("{:016x}", f.fingerprint),
            ]
        })
        .collect();
    report.push_table(
        "folds",
        &["fold", "train", "test", "lambda", "lambda1", "tp", "tn", "fp", "fn", "acc", "sen", "spe", "model_hash"],
        rows,
    );
    let [sen_m, sen_s] = pair4(cv.summary.sen);
    let [spe_m, spe_s] = pair4(cv.summary.spe);
    report.push_kv(
        "summary",
        [
            ("acc_mean", f4(cv.summary.acc.0)),
            ("acc_std", f4(cv.summary.acc.1)),
            ("sen_mean", sen_m),
            ("sen_std", sen_s),
            ("spe_mean", spe_m),
            ("spe_std", spe_s),
        ],
    );
    report.push_kv("flags", flag_entries(&cv.flags));
}

/// Appends the accuracy surface, the selected point and the outer folds.
pub fn push_grid(report: &mut Report, g: &GridResult) {
    let mut header = vec!["lambda".to_string()];
    header.extend(g.lambda1_grid.iter().map(|l| format!("lambda1={l}")));
    let rows = g
        .lambda_grid
        .iter()
        .zip(&g.surface)
        .map(|(l, row)| std::iter::once(l.to_string()).chain(row.iter().map(|&v| f4(v))).collect())
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    report.push_table("surface", &header_refs, rows);
    report.push_kv("selected", [("lambda", g.best.0.to_string()), ("lambda1", g.best.1.to_string())]);
    push_cv(report, &g.outer);
}

/// Appends the fraction table and the merged flags.
pub fn push_fractions(report: &mut Report, fr: &FractionResult) {
    let mut flags = Flags::default();
    let rows = fr
        .rows
        .iter()
        .map(|r| {
            flags.merge(&r.flags);
            let [sen_m, sen_s] = pair4(r.summary.sen);
            let [spe_m, spe_s] = pair4(r.summary.spe);
            vec![
                r.fraction.to_string(),
                r.repeats.to_string(),
                f4(r.summary.acc.0),
                f4(r.summary.acc.1),
                sen_m,
                sen_s,
                spe_m,
                spe_s,
            ]
        })
        .collect();
    report.push_table(
        "fractions",
        &["fraction", "repeats", "acc_mean", "acc_std", "sen_mean", "sen_std", "spe_mean", "spe_std"],
        rows,
    );
    report.push_kv("flags", flag_entries(&flags));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{generate_synthetic, SynthConfig};

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<ClassId> = (0..20).map(|i| 1 + (i % 2) as u8).collect();
        let f = stratified_folds(&labels, 10, 3).unwrap();
        for k in 0..10 {
            let members: Vec<usize> = (0..20).filter(|&i| f[i] == k).collect();
            assert_eq!(members.len(), 2);
            assert_ne!(labels[members[0]], labels[members[1]]);
        }
        assert_eq!(f, stratified_folds(&labels, 10, 3).unwrap());
        assert!(matches!(stratified_folds(&labels[..8], 5, 0), Err(Error::Folds(_))));
    }

    #[test]
    fn uneven_classes_stay_balanced() {
        let labels: Vec<ClassId> = (0..23).map(|i| if i < 13 { 1 } else { 2 }).collect();
        let f = stratified_folds(&labels, 4, 1).unwrap();
        let sizes: Vec<usize> = (0..4).map(|k| f.iter().filter(|&&x| x == k).count()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{sizes:?}");
        for class in [1, 2] {
            let per: Vec<usize> = (0..4).map(|k| (0..23).filter(|&i| f[i] == k && labels[i] == class).count()).collect();
            assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn grid_argmax_tie_rule() {
        let s = vec![vec![0.9, 0.9], vec![0.9, 0.8]];
        assert_eq!(argmax_grid(&s, &[0.1, 0.2], &[0.1, 0.2]), (1, 0));
        let s = vec![vec![0.9, 0.9], vec![0.5, 0.8]];
        assert_eq!(argmax_grid(&s, &[0.1, 0.2], &[0.1, 0.2]), (0, 0));
    }

    #[test]
    fn subsample_counts() {
        let labels: Vec<ClassId> = (0..20).map(|i| 1 + (i % 2) as u8).collect();
        let train: Vec<usize> = (0..20).collect();
        let s = subsample(&train, &labels, 0.3, 5);
        assert_eq!(s.iter().filter(|&&i| labels[i] == 1).count(), 3);
        assert_eq!(s.iter().filter(|&&i| labels[i] == 2).count(), 3);
        assert_eq!(subsample(&train, &labels, 1.0, 5), train);
        assert!(matches!(check_sampling(&labels, 0.1, 5), Err(Error::Sampling(_))));
    }

    #[test]
    fn config_validation() {
        assert!(EvalConfig::default().validate().is_ok());
        for bad in [
            EvalConfig { folds: 1, ..Default::default() },
            EvalConfig { lambda_grid: vec![], ..Default::default() },
            EvalConfig { fractions: vec![0.0], ..Default::default() },
            EvalConfig { window: (2.0, 1.0), ..Default::default() },
            EvalConfig { repeats: 0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn small_cv_runs_and_is_deterministic() {
        let d = generate_synthetic(&SynthConfig { trials_per_class: 6, channels: 4, ..Default::default() }).unwrap();
        let eval = EvalConfig { folds: 3, ..Default::default() };
        let p = PipelineConfig::default();
        let a = kfold_cv(&d, &p, &eval).unwrap();
        let b = kfold_cv(&d, &p, &eval).unwrap();
        assert_eq!(a.folds.len(), 3);
        assert_eq!(a.folds.iter().map(|f| f.test.len()).sum::<usize>(), 12);
        let strip = |cv: &CvResult| cv.folds.iter().map(|f| (f.metrics, f.fingerprint)).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn window_must_fit() {
        let d = generate_synthetic(&SynthConfig { trials_per_class: 2, channels: 2, ..Default::default() }).unwrap();
        assert_eq!(window_samples(&d, (1.0, 2.0)).unwrap(), (150, 250));
        assert!(matches!(window_samples(&d, (1.0, 3.0)), Err(Error::Parameter(_))));
        assert!(matches!(window_samples(&d, (-1.0, 0.0)), Err(Error::Parameter(_))));
    }
}
