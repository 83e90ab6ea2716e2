//! Multi-band sparse representation and residual classification.
//!
//! Training features of every band form one dictionary block per band. A
//! test trial is coded jointly across bands by minimizing
//!
//! ```text
//! F(u) = Σ_b ½‖y_b − D_b u_b‖² + λ Σ_b ‖u_b‖₁ + (λ1/2)·Tr(u M uᵀ)
//! ```
//!
//! where `u` is `N × B` (one column per band) and `M = (I − 11ᵀ/B)²` pulls
//! the band columns toward their mean. The trial is assigned to the class
//! whose coefficients reconstruct it best.

mod dictionary;
mod fss;
mod solver;

pub use dictionary::{build_dictionary, cap_norm, mutual_coherence, normalize_columns, BandDictionary};
pub use solver::{sgfb_solve, SgfbSolver, SparseCode};

use crate::csp::ClassId;
use crate::error::{Error, Result};
use crate::numerics::{dot, Matrix};

/// Tolerance of the optimality check on returned codes.
pub const TOL_KKT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgfbHyperparams {
    /// ℓ1 weight.
    pub lambda: f64,
    /// Weight of the cross-band centering penalty.
    pub lambda1: f64,
    pub max_outer_iters: usize,
    /// Relative objective decrease below which the sweeps stop.
    pub tol: f64,
}

impl Default for SgfbHyperparams {
    fn default() -> Self {
        SgfbHyperparams { lambda: 0.3, lambda1: 0.1, max_outer_iters: 200, tol: 1e-8 }
    }
}

impl SgfbHyperparams {
    pub fn new(lambda: f64, lambda1: f64) -> Self {
        SgfbHyperparams { lambda, lambda1, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Parameter(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.lambda1.is_finite() && self.lambda1 >= 0.0) {
            return Err(Error::Parameter(format!("lambda1 must be finite and >= 0, got {}", self.lambda1)));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::Parameter("max_outer_iters must be >= 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Parameter(format!("tol must be finite and >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// `(I − (1/B)·11ᵀ)²` for `B` bands.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringMatrix(Matrix);

impl CenteringMatrix {
    pub fn new(bands: usize) -> Self {
        let p = Matrix::from_fn(bands, bands, |i, j| if i == j { 1.0 } else { 0.0 } - 1.0 / bands as f64);
        CenteringMatrix(p.matmul(&p).expect("square"))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

fn check_code_shape(u: &Matrix, y_bands: &[Vec<f64>], dict: &BandDictionary) -> Result<()> {
    if u.rows() != dict.columns() || u.cols() != dict.band_count() || y_bands.len() != dict.band_count() {
        return Err(Error::Dimension(format!(
            "code {}x{} and {} band vectors for a {}-column, {}-band dictionary",
            u.rows(),
            u.cols(),
            y_bands.len(),
            dict.columns(),
            dict.band_count()
        )));
    }
    if y_bands.iter().any(|y| y.len() != dict.rows()) {
        return Err(Error::Dimension(format!("band vectors must have length {}", dict.rows())));
    }
    Ok(())
}

/// `Tr(u M uᵀ)` with the explicit centering matrix.
pub fn centering_penalty(u: &Matrix) -> f64 {
    let m = CenteringMatrix::new(u.cols());
    let um = u.matmul(m.matrix()).expect("shape");
    dot(um.as_slice(), u.as_slice())
}

/// `Σ_i ‖u_i − ū‖²` over the columns `u_i` of `u`.
pub fn centered_spread(u: &Matrix) -> f64 {
    let bands = u.cols();
    (0..u.rows())
        .map(|k| {
            let row = u.row(k);
            let mean = row.iter().sum::<f64>() / bands as f64;
            row.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        })
        .sum()
}

/// Evaluates the multi-band objective at `u` (`N × B`).
pub fn objective_value(u: &Matrix, y_bands: &[Vec<f64>], dict: &BandDictionary, hp: &SgfbHyperparams) -> Result<f64> {
    check_code_shape(u, y_bands, dict)?;
    let mut fit = 0.0;
    for (b, (block, y)) in dict.blocks.iter().zip(y_bands).enumerate() {
        let recon = block.matvec(&u.col(b))?;
        fit += 0.5 * y.iter().zip(&recon).map(|(a, r)| (a - r).powi(2)).sum::<f64>();
    }
    let l1: f64 = u.as_slice().iter().map(|v| v.abs()).sum();
    Ok(fit + hp.lambda * l1 + 0.5 * hp.lambda1 * centering_penalty(u))
}

/// Outcome of residual classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: ClassId,
    /// Reconstruction residual using only class 1 and class 2 coefficients.
    pub residuals: [f64; 2],
    /// Both residuals equal; the smaller class id was chosen.
    pub tie: bool,
}

fn decide(residuals: [f64; 2]) -> Classification {
    let [r1, r2] = residuals;
    let tie = (r1 - r2).abs() <= 1e-12 * r1.max(r2);
    let class = if tie || r1 < r2 { 1 } else { 2 };
    Classification { class, residuals, tie }
}

/// Assigns the class whose coefficients give the smallest stacked residual
/// `sqrt(Σ_b ‖y_b − D_b δ_l(u_b)‖²)`.
pub fn classify(y_bands: &[Vec<f64>], dict: &BandDictionary, code: &SparseCode) -> Result<Classification> {
    check_code_shape(&code.coeffs, y_bands, dict)?;
    let mut residuals = [0.0; 2];
    for (slot, class) in residuals.iter_mut().zip([1u8, 2]) {
        let mut total = 0.0;
        for (b, (block, y)) in dict.blocks.iter().zip(y_bands).enumerate() {
            let kept: Vec<f64> = (0..dict.columns())
                .map(|k| if dict.column_class[k] == class { code.coeffs[(k, b)] } else { 0.0 })
                .collect();
            let recon = block.matvec(&kept)?;
            total += y.iter().zip(&recon).map(|(a, r)| (a - r).powi(2)).sum::<f64>();
        }
        *slot = total.sqrt();
    }
    Ok(decide(residuals))
}

/// Single-band ℓ1 code of `y` over the columns of `x` (no coupling).
pub fn src_solve(y: &[f64], x: &Matrix, lambda: f64) -> Result<Vec<f64>> {
    let hp = SgfbHyperparams { lambda, lambda1: 0.0, ..Default::default() };
    let code = SgfbSolver::from_blocks(vec![x.clone()]).solve(&[y.to_vec()], &hp)?;
    Ok(code.band(0))
}

/// Residual classification of a single-band code.
pub fn src_classify(y: &[f64], x: &Matrix, column_class: &[ClassId], coeffs: &[f64]) -> Result<Classification> {
    if column_class.len() != x.cols() || coeffs.len() != x.cols() || y.len() != x.rows() {
        return Err(Error::Dimension("src_classify shapes disagree".into()));
    }
    let mut residuals = [0.0; 2];
    for (slot, class) in residuals.iter_mut().zip([1u8, 2]) {
        let kept: Vec<f64> =
            coeffs.iter().zip(column_class).map(|(&c, &l)| if l == class { c } else { 0.0 }).collect();
        let recon = x.matvec(&kept)?;
        *slot = y.iter().zip(&recon).map(|(a, r)| (a - r).powi(2)).sum::<f64>().sqrt();
    }
    Ok(decide(residuals))
}

/// One coefficient row active with the same sign in two bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossBandGap {
    pub row: usize,
    pub bands: (usize, usize),
    /// `|u_ik − u_jk|`.
    pub gap: f64,
    /// `‖r_i − r_j‖ / ((B − 1)·λ1)`.
    pub bound: f64,
}

/// Coefficient gaps between bands, paired with the residual-difference bound.
///
/// Only rows that are nonzero with equal sign in both bands are reported.
/// Returns an empty list when `λ1 = 0` or there is a single band.
pub fn cross_band_gaps(
    y_bands: &[Vec<f64>],
    dict: &BandDictionary,
    code: &SparseCode,
    hp: &SgfbHyperparams,
) -> Result<Vec<CrossBandGap>> {
    check_code_shape(&code.coeffs, y_bands, dict)?;
    let bands = dict.band_count();
    if bands < 2 || hp.lambda1 == 0.0 {
        return Ok(Vec::new());
    }
    let residuals: Vec<Vec<f64>> = dict
        .blocks
        .iter()
        .zip(y_bands)
        .enumerate()
        .map(|(b, (block, y))| {
            let recon = block.matvec(&code.band(b))?;
            Ok(y.iter().zip(&recon).map(|(a, r)| a - r).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..bands {
        for j in (i + 1)..bands {
            let diff: f64 =
                residuals[i].iter().zip(&residuals[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let bound = diff / ((bands - 1) as f64 * hp.lambda1);
            for k in 0..dict.columns() {
                let (si, sj) = (code.sign(k, i), code.sign(k, j));
                if si != 0 && si == sj {
                    let gap = (code.coeffs[(k, i)] - code.coeffs[(k, j)]).abs();
                    out.push(CrossBandGap { row: k, bands: (i, j), gap, bound });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dict(rng: &mut ChaCha8Rng, bands: usize, rows: usize, cols: usize) -> BandDictionary {
        let blocks = (0..bands).map(|_| Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))).collect();
        let classes = (0..cols).map(|k| if k < cols / 2 { 1 } else { 2 }).collect();
        normalize_columns(&BandDictionary::from_parts(blocks, classes, (0..cols).collect()).unwrap())
    }

    fn random_y(rng: &mut ChaCha8Rng, bands: usize, rows: usize) -> Vec<Vec<f64>> {
        (0..bands).map(|_| (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn centering_matrix_is_projector() {
        for b in 1..6 {
            let m = CenteringMatrix::new(b);
            let m = m.matrix();
            assert!(m.matmul(m).unwrap().max_abs_diff(m) <= 1e-12);
            assert_eq!(m.asymmetry(), 0.0);
            for r in 0..b {
                assert!(m.row(r).iter().sum::<f64>().abs() <= 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn trace_form_equals_spread(seed in any::<u64>(), rows in 1usize..8, bands in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = Matrix::from_fn(rows, bands, |_, _| rng.random_range(-2.0..2.0));
            prop_assert!((centered_spread(&u) - centering_penalty(&u)).abs() <= 1e-10);
        }
    }

    #[test]
    fn objective_at_zero_is_half_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_dict(&mut rng, 3, 4, 6);
        let y = random_y(&mut rng, 3, 4);
        let f = objective_value(&Matrix::zeros(6, 3), &y, &d, &SgfbHyperparams::new(0.5, 0.2)).unwrap();
        let e: f64 = y.iter().map(|v| 0.5 * v.iter().map(|x| x * x).sum::<f64>()).sum();
        assert!((f - e).abs() <= 1e-15);
    }

    #[test]
    fn large_lambda_gives_zero_code() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_dict(&mut rng, 2, 4, 6);
        let y = random_y(&mut rng, 2, 4);
        let threshold = d
            .blocks
            .iter()
            .zip(&y)
            .map(|(b, yb)| b.tr_matvec(yb).unwrap().iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max);
        let code = sgfb_solve(&y, &d, &SgfbHyperparams::new(threshold, 0.0)).unwrap();
        assert!(code.coeffs.as_slice().iter().all(|&v| v == 0.0));
        assert!(code.converged);
    }

    #[test]
    fn orthonormal_blocks_without_penalties_give_projection() {
        // Rotation matrices are square and orthonormal.
        let rot = |a: f64| Matrix::from_rows(&[vec![a.cos(), -a.sin()], vec![a.sin(), a.cos()]]).unwrap();
        let d = BandDictionary::from_parts(vec![rot(0.3), rot(1.1)], vec![1, 2], vec![0, 1]).unwrap();
        let y = vec![vec![0.4, -0.7], vec![0.2, 0.5]];
        let code = sgfb_solve(&y, &d, &SgfbHyperparams::new(0.0, 0.0)).unwrap();
        for b in 0..2 {
            let expected = d.blocks[b].tr_matvec(&y[b]).unwrap();
            for (got, want) in code.band(b).iter().zip(&expected) {
                assert!((got - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn solve_satisfies_kkt_and_monotone_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..20 {
            let bands = 1 + trial % 4;
            let d = random_dict(&mut rng, bands, 4, 12);
            let y = random_y(&mut rng, bands, 4);
            let hp = SgfbHyperparams::new(0.05 + 0.01 * trial as f64, 0.1 * (trial % 3) as f64);
            let code = sgfb_solve(&y, &d, &hp).unwrap();
            assert!(code.converged, "kkt {}", code.max_kkt_violation);
            assert!(code.is_monotone(), "{:?}", code.objective_trace);
            let f = objective_value(&code.coeffs, &y, &d, &hp).unwrap();
            assert!((f - code.objective).abs() <= 1e-10 * (1.0 + f.abs()));
            for (k, s) in code.signs.iter().enumerate() {
                let v = code.coeffs.as_slice()[k];
                assert_eq!(*s, if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 });
            }
        }
    }

    #[test]
    fn warm_start_reaches_same_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = random_dict(&mut rng, 3, 5, 14);
        let y = random_y(&mut rng, 3, 5);
        let solver = SgfbSolver::new(&d);
        let first = solver.solve(&y, &SgfbHyperparams::new(0.05, 0.2)).unwrap();
        let hp = SgfbHyperparams::new(0.15, 0.2);
        let cold = solver.solve(&y, &hp).unwrap();
        let warm = solver.solve_from(&y, &hp, Some(&first.coeffs)).unwrap();
        assert!(warm.converged && warm.is_monotone());
        assert!((warm.objective - cold.objective).abs() <= 1e-10);
        assert!(solver.solve_from(&y, &hp, Some(&Matrix::zeros(14, 2))).is_err());
    }

    #[test]
    fn one_band_matches_src() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random_dict(&mut rng, 1, 5, 9);
        let y = random_y(&mut rng, 1, 5);
        let hp = SgfbHyperparams::new(0.1, 0.0);
        let code = sgfb_solve(&y, &d, &hp).unwrap();
        let theta = src_solve(&y[0], &d.blocks[0], 0.1).unwrap();
        let u = Matrix::from_fn(9, 1, |k, _| theta[k]);
        let f_src = objective_value(&u, &y, &d, &hp).unwrap();
        assert!((f_src - code.objective).abs() <= 1e-8);
    }

    #[test]
    fn self_representation_picks_own_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_dict(&mut rng, 3, 6, 10);
        let k = 2; // class 1 column
        let y: Vec<Vec<f64>> = d.blocks.iter().map(|b| b.col(k)).collect();
        let code = sgfb_solve(&y, &d, &SgfbHyperparams::new(1e-4, 0.0)).unwrap();
        let c = classify(&y, &d, &code).unwrap();
        assert_eq!(c.class, 1);
        assert!(c.residuals[0] <= 1e-3);
        assert!(!c.tie);

        let theta = src_solve(&y[0], &d.blocks[0], 1e-4).unwrap();
        let c = src_classify(&y[0], &d.blocks[0], &d.column_class, &theta).unwrap();
        assert_eq!(c.class, 1);
    }

    #[test]
    fn empty_code_ties_toward_class_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = random_dict(&mut rng, 2, 4, 6);
        let y = random_y(&mut rng, 2, 4);
        let code = sgfb_solve(&y, &d, &SgfbHyperparams::new(100.0, 0.0)).unwrap();
        let c = classify(&y, &d, &code).unwrap();
        let stacked: f64 = y.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).sum::<f64>().sqrt();
        assert!(c.tie);
        assert_eq!(c.class, 1);
        assert!((c.residuals[0] - stacked).abs() <= 1e-15);
        assert_eq!(c.residuals[0], c.residuals[1]);

        let theta = src_solve(&y[0], &d.blocks[0], 100.0).unwrap();
        assert!(theta.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exact_cross_band_identity_holds() {
        // At the optimum, λ1·(u_ik − u_jk) = d_ikᵀr_i − d_jkᵀr_j for rows active
        // with equal sign, with one dictionary per band.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let d = random_dict(&mut rng, 3, 4, 8);
            let y = random_y(&mut rng, 3, 4);
            let hp = SgfbHyperparams::new(0.05, 0.3);
            let code = sgfb_solve(&y, &d, &hp).unwrap();
            let r: Vec<Vec<f64>> = (0..3)
                .map(|b| {
                    let recon = d.blocks[b].matvec(&code.band(b)).unwrap();
                    y[b].iter().zip(&recon).map(|(a, c)| a - c).collect()
                })
                .collect();
            for g in cross_band_gaps(&y, &d, &code, &hp).unwrap() {
                let (i, j) = g.bands;
                let ci = dot(&d.blocks[i].col(g.row), &r[i]);
                let cj = dot(&d.blocks[j].col(g.row), &r[j]);
                let lhs = hp.lambda1 * (code.coeffs[(g.row, i)] - code.coeffs[(g.row, j)]);
                assert!((lhs - (ci - cj)).abs() <= 2.0 * TOL_KKT);
            }
        }
    }

    #[test]
    fn strong_coupling_pulls_bands_together() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = random_dict(&mut rng, 3, 4, 6);
        let y = random_y(&mut rng, 3, 4);
        let code = sgfb_solve(&y, &d, &SgfbHyperparams::new(0.05, 1e6)).unwrap();
        let mean: Vec<f64> = (0..6).map(|k| code.coeffs.row(k).iter().sum::<f64>() / 3.0).collect();
        for b in 0..3 {
            let dev: Vec<f64> = code.band(b).iter().zip(&mean).map(|(u, m)| u - m).collect();
            assert!(norm2(&dev) <= 1e-3 * (1.0 + norm2(&mean)));
        }
    }

    #[test]
    fn hyperparameter_and_shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = random_dict(&mut rng, 2, 3, 4);
        let y = random_y(&mut rng, 2, 3);
        assert!(matches!(sgfb_solve(&y, &d, &SgfbHyperparams::new(-1.0, 0.0)), Err(Error::Parameter(_))));
        assert!(matches!(sgfb_solve(&y, &d, &SgfbHyperparams::new(0.1, f64::NAN)), Err(Error::Parameter(_))));
        assert!(matches!(sgfb_solve(&y[..1], &d, &SgfbHyperparams::default()), Err(Error::Dimension(_))));
        assert!(matches!(
            objective_value(&Matrix::zeros(3, 2), &y, &d, &SgfbHyperparams::default()),
            Err(Error::Dimension(_))
        ));
    }
}
