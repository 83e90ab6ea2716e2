use crate::csp::{ClassId, FeatureVector};
use crate::error::{Error, Result};
use crate::numerics::{dot, norm2, Matrix};

/// Per-band dictionaries whose columns are training feature vectors.
///
/// All blocks share the same column layout: class 1 columns first, then
/// class 2, each in the order the trials were supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDictionary {
    /// One `2M × N` block per band.
    pub blocks: Vec<Matrix>,
    pub column_class: Vec<ClassId>,
    pub column_trial: Vec<usize>,
    /// Factor applied to each column by [`normalize_columns`]; 1 when untouched.
    pub column_scales: Vec<Vec<f64>>,
    /// `(band, column)` pairs that were all-zero at normalization time.
    pub zero_columns: Vec<(usize, usize)>,
}

impl BandDictionary {
    /// Assembles a dictionary from blocks and column metadata.
    pub fn from_parts(blocks: Vec<Matrix>, column_class: Vec<ClassId>, column_trial: Vec<usize>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::Parameter("dictionary needs at least one band".into()))?;
        let (rows, cols) = (first.rows(), first.cols());
        if blocks.iter().any(|b| b.rows() != rows || b.cols() != cols) {
            return Err(Error::Dimension("dictionary blocks differ in shape".into()));
        }
        if column_class.len() != cols || column_trial.len() != cols {
            return Err(Error::Dimension(format!(
                "{cols} columns but {} class ids and {} trial ids",
                column_class.len(),
                column_trial.len()
            )));
        }
        let column_scales = vec![vec![1.0; cols]; blocks.len()];
        Ok(BandDictionary { blocks, column_class, column_trial, column_scales, zero_columns: Vec::new() })
    }

    pub fn band_count(&self) -> usize {
        self.blocks.len()
    }

    /// Feature length per band (2M).
    pub fn rows(&self) -> usize {
        self.blocks[0].rows()
    }

    /// Number of training columns.
    pub fn columns(&self) -> usize {
        self.blocks[0].cols()
    }

    /// Largest column norm over all blocks.
    pub fn max_column_norm(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| (0..b.cols()).map(move |c| norm2(&b.col(c))))
            .fold(0.0, f64::max)
    }
}

/// Builds the per-band dictionary from labeled training features.
///
/// `trial_ids[i]` is recorded as the source trial of `features[i]`.
pub fn build_dictionary(features: &[FeatureVector], trial_ids: &[usize]) -> Result<BandDictionary> {
    if features.len() != trial_ids.len() {
        return Err(Error::Dimension(format!("{} features but {} trial ids", features.len(), trial_ids.len())));
    }
    let first = features.first().ok_or(Error::EmptyClass(1))?;
    let bands = first.band_count();
    let len = first.per_band.first().map_or(0, Vec::len);
    if bands == 0 || len == 0 {
        return Err(Error::Dimension("empty feature vector".into()));
    }
    for f in features {
        if f.band_count() != bands || f.per_band.iter().any(|z| z.len() != len) {
            return Err(Error::Dimension("feature vectors disagree on band count or length".into()));
        }
        match f.label {
            Some(1) | Some(2) => {}
            Some(l) => return Err(Error::Parameter(format!("label {l} is not 1 or 2"))),
            None => return Err(Error::Parameter("training feature vector without a label".into())),
        }
    }
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by_key(|&i| features[i].label);
    for class in [1, 2] {
        if !features.iter().any(|f| f.label == Some(class)) {
            return Err(Error::EmptyClass(class));
        }
    }
    let blocks = (0..bands)
        .map(|b| Matrix::from_fn(len, order.len(), |r, c| features[order[c]].per_band[b][r]))
        .collect();
    let column_class = order.iter().map(|&i| features[i].label.unwrap_or(1)).collect();
    let column_trial = order.iter().map(|&i| trial_ids[i]).collect();
    BandDictionary::from_parts(blocks, column_class, column_trial)
}

/// Scales `v` down to unit norm if its norm exceeds 1. Returns the factor used.
pub fn cap_norm(v: &mut [f64]) -> f64 {
    let n = norm2(v);
    if n > 1.0 {
        let s = 1.0 / n;
        v.iter_mut().for_each(|x| *x *= s);
        s
    } else {
        1.0
    }
}

/// Caps every column norm at 1; shorter columns are left alone.
pub fn normalize_columns(dict: &BandDictionary) -> BandDictionary {
    let mut out = dict.clone();
    out.zero_columns.clear();
    for (b, block) in out.blocks.iter_mut().enumerate() {
        for c in 0..block.cols() {
            let mut col = block.col(c);
            if col.iter().all(|&v| v == 0.0) {
                out.zero_columns.push((b, c));
            }
            let s = cap_norm(&mut col);
            out.column_scales[b][c] *= s;
            block.set_col(c, &col);
        }
    }
    out
}

/// Largest absolute inner product between a column of `left` and one of `right`.
pub fn mutual_coherence(left: &Matrix, right: &Matrix) -> Result<f64> {
    if left.rows() != right.rows() {
        return Err(Error::Dimension(format!("row counts {} and {} differ", left.rows(), right.rows())));
    }
    let lt = left.transpose();
    let rt = right.transpose();
    let mut best: f64 = 0.0;
    for j in 0..lt.rows() {
        for k in 0..rt.rows() {
            best = best.max(dot(lt.row(j), rt.row(k)).abs());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fv(bands: &[&[f64]], label: ClassId) -> FeatureVector {
        FeatureVector::new(bands.iter().map(|b| b.to_vec()).collect(), Some(label))
    }

    #[test]
    fn build_orders_class_one_first() {
        let feats = vec![fv(&[&[1.0, 2.0], &[3.0, 4.0]], 2), fv(&[&[5.0, 6.0], &[7.0, 8.0]], 1)];
        let d = build_dictionary(&feats, &[10, 11]).unwrap();
        assert_eq!(d.band_count(), 2);
        assert_eq!((d.rows(), d.columns()), (2, 2));
        assert_eq!(d.column_class, vec![1, 2]);
        assert_eq!(d.column_trial, vec![11, 10]);
        assert_eq!(d.blocks[0], Matrix::from_rows(&[vec![5.0, 1.0], vec![6.0, 2.0]]).unwrap());
        assert_eq!(d.blocks[1], Matrix::from_rows(&[vec![7.0, 3.0], vec![8.0, 4.0]]).unwrap());
    }

    #[test]
    fn build_requires_both_classes() {
        let feats = vec![fv(&[&[1.0, 2.0]], 1)];
        assert!(matches!(build_dictionary(&feats, &[0]), Err(Error::EmptyClass(2))));
    }

    #[test]
    fn build_round_trips_random_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let feats: Vec<FeatureVector> = (0..9)
            .map(|i| {
                let bands = (0..3).map(|_| (0..4).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
                FeatureVector::new(bands, Some(1 + (i % 2) as u8))
            })
            .collect();
        let ids: Vec<usize> = (100..109).collect();
        let d = build_dictionary(&feats, &ids).unwrap();
        assert!(d.column_class.windows(2).all(|w| w[0] <= w[1]));
        for c in 0..d.columns() {
            let src = &feats[d.column_trial[c] - 100];
            assert_eq!(src.label, Some(d.column_class[c]));
            for b in 0..3 {
                assert_eq!(d.blocks[b].col(c), src.per_band[b]);
            }
        }
    }

    #[test]
    fn normalize_examples() {
        let block = Matrix::from_rows(&[vec![3.0, 0.3, 0.0], vec![4.0, 0.4, 0.0]]).unwrap();
        let d = BandDictionary::from_parts(vec![block], vec![1, 2, 2], vec![0, 1, 2]).unwrap();
        let n = normalize_columns(&d);
        let c0 = n.blocks[0].col(0);
        assert!((c0[0] - 0.6).abs() <= 1e-15 && (c0[1] - 0.8).abs() <= 1e-15);
        assert_eq!(n.blocks[0].col(1), vec![0.3, 0.4]);
        assert_eq!(n.blocks[0].col(2), vec![0.0, 0.0]);
        assert_eq!(n.column_scales[0], vec![0.2, 1.0, 1.0]);
        assert_eq!(n.zero_columns, vec![(0, 2)]);
    }

    #[test]
    fn coherence_examples() {
        let i = Matrix::identity(3);
        assert_eq!(mutual_coherence(&i, &i).unwrap(), 1.0);
        let e1 = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e2 = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(mutual_coherence(&e1, &e2).unwrap(), 0.0);
        assert!(matches!(mutual_coherence(&i, &e2), Err(Error::Dimension(_))));
    }

    fn random_normalized(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
        for c in 0..cols {
            let mut col = m.col(c);
            let n = norm2(&col);
            col.iter_mut().for_each(|v| *v /= n);
            m.set_col(c, &col);
        }
        m
    }

    #[test]
    fn coherence_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let l = random_normalized(&mut rng, 4, 3);
            let r = random_normalized(&mut rng, 4, 3);
            let mut best: f64 = 0.0;
            for j in 0..3 {
                for k in 0..3 {
                    let ip: f64 = (0..4).map(|i| l[(i, j)] * r[(i, k)]).sum();
                    best = best.max(ip.abs());
                }
            }
            assert!((mutual_coherence(&l, &r).unwrap() - best).abs() <= 1e-15);
        }
    }

    proptest! {
        #[test]
        fn normalized_columns_are_capped(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let blocks = (0..2).map(|_| Matrix::from_fn(rows, cols, |_, _| rng.random_range(-3.0..3.0))).collect();
            let d = BandDictionary::from_parts(blocks, vec![1; cols], (0..cols).collect()).unwrap();
            prop_assert!(normalize_columns(&d).max_column_norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn coherence_symmetric_and_bounded(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = random_normalized(&mut rng, 5, 4);
            let r = random_normalized(&mut rng, 5, 3);
            let a = mutual_coherence(&l, &r).unwrap();
            let b = mutual_coherence(&r, &l).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
        }
    }
}
