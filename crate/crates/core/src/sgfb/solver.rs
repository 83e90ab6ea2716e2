use crate::error::{Error, Result};
use crate::numerics::{dot, Matrix};

use super::fss::{feature_sign_search, FssOptions, Quadratic, ShiftedGram};
use super::{BandDictionary, CenteringMatrix, SgfbHyperparams, TOL_KKT};

/// Solution of one multi-band sparse coding problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    /// `N × B`; column `b` is the code for band `b`.
    pub coeffs: Matrix,
    /// Entrywise sign of `coeffs`, row-major like `coeffs`.
    pub signs: Vec<i8>,
    /// Final objective value.
    pub objective: f64,
    /// Block coordinate sweeps performed.
    pub iterations: usize,
    /// Objective after initialization, each sweep, and the joint refinement if it ran.
    pub objective_trace: Vec<f64>,
    /// Largest violation of the subgradient optimality conditions.
    pub max_kkt_violation: f64,
    /// True when `max_kkt_violation <= TOL_KKT`.
    pub converged: bool,
    /// Singular active blocks met along the way.
    pub degenerate_steps: usize,
}

impl SparseCode {
    pub fn sign(&self, row: usize, band: usize) -> i8 {
        self.signs[row * self.coeffs.cols() + band]
    }

    /// Coefficients of band `b`.
    pub fn band(&self, b: usize) -> Vec<f64> {
        self.coeffs.col(b)
    }

    pub fn nonzeros(&self) -> usize {
        self.signs.iter().filter(|s| **s != 0).count()
    }

    /// True when the objective never increased between recorded iterates.
    pub fn is_monotone(&self) -> bool {
        self.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()))
    }
}

/// Joint quadratic over all bands, indexed `band · N + column`.
struct CoupledQuadratic<'a> {
    grams: &'a [Matrix],
    dty: &'a [Vec<f64>],
    centering: &'a Matrix,
    lambda1: f64,
    n: usize,
}

impl Quadratic for CoupledQuadratic<'_> {
    fn dim(&self) -> usize {
        self.n * self.grams.len()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let (bi, ki) = (i / self.n, i % self.n);
        let (bj, kj) = (j / self.n, j % self.n);
        let mut v = if bi == bj { self.grams[bi][(ki, kj)] } else { 0.0 };
        if ki == kj {
            v += self.lambda1 * self.centering[(bi, bj)];
        }
        v
    }

    fn linear(&self, i: usize) -> f64 {
        self.dty[i / self.n][i % self.n]
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let bands = self.grams.len();
        let n = self.n;
        let mut g = vec![0.0; n * bands];
        for b in 0..bands {
            let xb = &x[b * n..(b + 1) * n];
            let gb = &mut g[b * n..(b + 1) * n];
            for (gi, di) in gb.iter_mut().zip(&self.dty[b]) {
                *gi = -di;
            }
            for (k, &xk) in xb.iter().enumerate() {
                if xk != 0.0 {
                    for (gi, &a) in gb.iter_mut().zip(self.grams[b].row(k)) {
                        *gi += a * xk;
                    }
                }
            }
            for j in 0..bands {
                let m = self.lambda1 * self.centering[(b, j)];
                if m != 0.0 {
                    for (gi, &xj) in gb.iter_mut().zip(&x[j * n..(j + 1) * n]) {
                        *gi += m * xj;
                    }
                }
            }
        }
        g
    }
}

/// Precomputed Gram matrices for repeated solves against one dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct SgfbSolver {
    blocks: Vec<Matrix>,
    grams: Vec<Matrix>,
    centering: CenteringMatrix,
}

impl SgfbSolver {
    pub fn new(dict: &BandDictionary) -> Self {
        SgfbSolver::from_blocks(dict.blocks.clone())
    }

    /// Solver over bare dictionary blocks (no class metadata needed).
    pub fn from_blocks(blocks: Vec<Matrix>) -> Self {
        let grams = blocks.iter().map(Matrix::gram_cols).collect();
        let centering = CenteringMatrix::new(blocks.len());
        SgfbSolver { blocks, grams, centering }
    }

    pub fn band_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn columns(&self) -> usize {
        self.blocks[0].cols()
    }

    fn check_inputs(&self, y_bands: &[Vec<f64>], hp: &SgfbHyperparams) -> Result<()> {
        hp.validate()?;
        if y_bands.len() != self.blocks.len() {
            return Err(Error::Dimension(format!(
                "{} band vectors for a {}-band dictionary",
                y_bands.len(),
                self.blocks.len()
            )));
        }
        let rows = self.blocks[0].rows();
        for y in y_bands {
            if y.len() != rows {
                return Err(Error::Dimension(format!("band vector of length {}, expected {rows}", y.len())));
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("test sample".into()));
            }
        }
        Ok(())
    }

    /// Objective from per-band codes; residual form, used for the trace.
    fn objective(&self, codes: &[Vec<f64>], y_bands: &[Vec<f64>], hp: &SgfbHyperparams) -> f64 {
        let bands = codes.len();
        let n = codes[0].len();
        let mut fit = 0.0;
        let mut l1 = 0.0;
        for b in 0..bands {
            let mut r = y_bands[b].clone();
            for (k, &u) in codes[b].iter().enumerate() {
                if u != 0.0 {
                    l1 += u.abs();
                    for (ri, row) in r.iter_mut().zip(0..self.blocks[b].rows()) {
                        *ri -= self.blocks[b][(row, k)] * u;
                    }
                }
            }
            fit += 0.5 * dot(&r, &r);
        }
        let mut spread = 0.0;
        for k in 0..n {
            let mean = codes.iter().map(|c| c[k]).sum::<f64>() / bands as f64;
            spread += codes.iter().map(|c| (c[k] - mean).powi(2)).sum::<f64>();
        }
        fit + hp.lambda * l1 + 0.5 * hp.lambda1 * spread
    }

    fn kkt(&self, codes: &[Vec<f64>], dty: &[Vec<f64>], hp: &SgfbHyperparams) -> f64 {
        let q = CoupledQuadratic {
            grams: &self.grams,
            dty,
            centering: self.centering.matrix(),
            lambda1: hp.lambda1,
            n: codes[0].len(),
        };
        let x = codes.concat();
        kkt_violation(&q.gradient(&x), &x, hp.lambda)
    }

    /// Minimizes `Σ_b ½‖y_b − D_b u_b‖² + λ‖u‖₁ + (λ1/2)·Tr(u M uᵀ)`.
    ///
    /// Runs block coordinate descent over the band columns, each block by
    /// feature-sign search with the coupling to the other bands folded into
    /// the linear term. If the sweeps stall before the optimality conditions
    /// hold, a joint feature-sign search over all bands finishes the job from
    /// the block-wise iterate.
    pub fn solve(&self, y_bands: &[Vec<f64>], hp: &SgfbHyperparams) -> Result<SparseCode> {
        self.solve_from(y_bands, hp, None)
    }

    /// [`SgfbSolver::solve`] starting from `start` (`N × B`) instead of zero.
    pub fn solve_from(&self, y_bands: &[Vec<f64>], hp: &SgfbHyperparams, start: Option<&Matrix>) -> Result<SparseCode> {
        self.check_inputs(y_bands, hp)?;
        let bands = self.blocks.len();
        let n = self.columns();
        if let Some(s) = start {
            if s.rows() != n || s.cols() != bands {
                return Err(Error::Dimension(format!("start is {}x{}, expected {n}x{bands}", s.rows(), s.cols())));
            }
        }
        let dty: Vec<Vec<f64>> =
            self.blocks.iter().zip(y_bands).map(|(d, y)| d.tr_matvec(y)).collect::<Result<_>>()?;
        let m = self.centering.matrix();
        let opts = FssOptions::default();

        let mut codes = match start {
            Some(s) => (0..bands).map(|b| s.col(b)).collect(),
            None => vec![vec![0.0; n]; bands],
        };
        let mut trace = vec![self.objective(&codes, y_bands, hp)];
        let mut degenerate_steps = 0;
        let mut iterations = 0;
        while iterations < hp.max_outer_iters {
            iterations += 1;
            for b in 0..bands {
                let mut lin = dty[b].clone();
                for j in (0..bands).filter(|&j| j != b) {
                    let mij = hp.lambda1 * m[(b, j)];
                    if mij != 0.0 {
                        for (l, &u) in lin.iter_mut().zip(&codes[j]) {
                            *l -= mij * u;
                        }
                    }
                }
                let q = ShiftedGram { gram: &self.grams[b], shift: hp.lambda1 * m[(b, b)], lin };
                degenerate_steps += feature_sign_search(&q, hp.lambda, &mut codes[b], opts).degenerate_steps;
            }
            let f = self.objective(&codes, y_bands, hp);
            let prev = *trace.last().expect("trace starts non-empty");
            if !f.is_finite() {
                trace.push(f);
                return Err(Error::Numeric { iteration: iterations, message: "objective is not finite".into(), trace });
            }
            trace.push(f);
            if prev - f <= hp.tol * prev.abs().max(1.0) {
                break;
            }
        }

        let mut violation = self.kkt(&codes, &dty, hp);
        if violation > 1e-2 * TOL_KKT && bands > 1 {
            let q = CoupledQuadratic { grams: &self.grams, dty: &dty, centering: m, lambda1: hp.lambda1, n };
            let mut x = codes.concat();
            degenerate_steps += feature_sign_search(&q, hp.lambda, &mut x, opts).degenerate_steps;
            for (b, code) in codes.iter_mut().enumerate() {
                code.copy_from_slice(&x[b * n..(b + 1) * n]);
            }
            let f = self.objective(&codes, y_bands, hp);
            if !f.is_finite() {
                trace.push(f);
                return Err(Error::Numeric { iteration: iterations, message: "objective is not finite".into(), trace });
            }
            trace.push(f);
            violation = self.kkt(&codes, &dty, hp);
        }

        let coeffs = Matrix::from_fn(n, bands, |k, b| codes[b][k]);
        let signs = coeffs.as_slice().iter().map(|&v| if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 }).collect();
        Ok(SparseCode {
            objective: *trace.last().expect("non-empty"),
            coeffs,
            signs,
            iterations,
            objective_trace: trace,
            max_kkt_violation: violation,
            converged: violation <= TOL_KKT,
            degenerate_steps,
        })
    }
}

/// Largest violation of the ℓ1 optimality conditions given the smooth gradient.
pub(crate) fn kkt_violation(grad: &[f64], x: &[f64], lambda: f64) -> f64 {
    x.iter()
        .zip(grad)
        .map(|(&xi, &gi)| {
            if xi != 0.0 {
                (gi + lambda * xi.signum()).abs()
            } else {
                (gi.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// One-shot solve; see [`SgfbSolver::solve`].
pub fn sgfb_solve(y_bands: &[Vec<f64>], dict: &BandDictionary, hp: &SgfbHyperparams) -> Result<SparseCode> {
    SgfbSolver::new(dict).solve(y_bands, hp)
}
