use crate::csp::ClassId;
use crate::error::{Error, Result};

/// Binary confusion counts with class 1 as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn record(&mut self, truth: ClassId, predicted: ClassId) {
        match (truth == 1, predicted == 1) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

/// Accuracy, sensitivity and specificity. A ratio with a zero denominator
/// is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub confusion: Confusion,
    pub acc: f64,
    pub sen: Option<f64>,
    pub spe: Option<f64>,
}

pub fn compute_metrics(tp: usize, tn: usize, fp: usize, fn_: usize) -> Result<Metrics> {
    let c = Confusion { tp, tn, fp, fn_ };
    metrics_from(c)
}

pub fn metrics_from(c: Confusion) -> Result<Metrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(Metrics {
        confusion: c,
        acc: (c.tp + c.tn) as f64 / total as f64,
        sen: ratio(c.tp, c.tp + c.fn_),
        spe: ratio(c.tn, c.tn + c.fp),
    })
}

/// Mean and sample standard deviation; `None` for an empty list.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, std))
}

/// Mean and spread of metrics over folds or repeats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub acc: (f64, f64),
    /// Over the entries where sensitivity is defined.
    pub sen: Option<(f64, f64)>,
    pub spe: Option<(f64, f64)>,
}

impl MetricSummary {
    pub fn from_metrics(ms: &[Metrics]) -> Result<Self> {
        let accs: Vec<f64> = ms.iter().map(|m| m.acc).collect();
        let sens: Vec<f64> = ms.iter().filter_map(|m| m.sen).collect();
        let spes: Vec<f64> = ms.iter().filter_map(|m| m.spe).collect();
        Ok(MetricSummary { acc: mean_std(&accs).ok_or(Error::EmptyEvaluation)?, sen: mean_std(&sens), spe: mean_std(&spes) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let m = compute_metrics(70, 70, 0, 0).unwrap();
        assert_eq!((m.acc, m.sen, m.spe), (1.0, Some(1.0), Some(1.0)));
        let m = compute_metrics(9, 8, 2, 1).unwrap();
        assert!((m.acc - 0.85).abs() < 1e-15);
        assert!((m.sen.unwrap() - 0.9).abs() < 1e-15);
        assert!((m.spe.unwrap() - 0.8).abs() < 1e-15);
        let m = compute_metrics(0, 70, 0, 70).unwrap();
        assert_eq!((m.acc, m.sen, m.spe), (0.5, Some(0.0), Some(1.0)));
    }

    #[test]
    fn undefined_and_empty() {
        let m = compute_metrics(0, 5, 1, 0).unwrap();
        assert_eq!(m.sen, None);
        assert!(matches!(compute_metrics(0, 0, 0, 0), Err(Error::EmptyEvaluation)));
    }

    #[test]
    fn record_orientation() {
        let mut c = Confusion::default();
        c.record(1, 1);
        c.record(1, 2);
        c.record(2, 1);
        c.record(2, 2);
        c.record(2, 2);
        assert_eq!(c, Confusion { tp: 1, fn_: 1, fp: 1, tn: 2 });
    }

    #[test]
    fn summary() {
        let ms = [compute_metrics(1, 1, 0, 0).unwrap(), compute_metrics(0, 1, 1, 0).unwrap()];
        let s = MetricSummary::from_metrics(&ms).unwrap();
        assert_eq!(s.acc.0, 0.75);
        assert!((s.acc.1 - (0.125f64).sqrt()).abs() < 1e-15);
        assert_eq!(s.sen, Some((1.0, 0.0)));
    }

    proptest! {
        #[test]
        fn accuracy_is_weighted_sen_spe(tp in 0usize..50, tn in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
            prop_assume!(tp + fn_ > 0 && tn + fp > 0);
            let m = compute_metrics(tp, tn, fp, fn_).unwrap();
            let p = (tp + fn_) as f64;
            let n = (tn + fp) as f64;
            let acc = (m.sen.unwrap() * p + m.spe.unwrap() * n) / (p + n);
            prop_assert!((acc - m.acc).abs() <= 1e-12);
        }
    }
}
