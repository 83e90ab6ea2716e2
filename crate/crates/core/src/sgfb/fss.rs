//! Feature-sign search for `min ½xᵀAx − bᵀx + λ‖x‖₁` with `A` positive
//! semi-definite.
//!
//! The solver keeps an active set with a sign guess per coefficient, solves
//! the sign-fixed quadratic on the active set in closed form, and moves to
//! the best point on the segment toward that solution, checking every point
//! where a coefficient changes sign. When the active block is singular the
//! step follows a null direction of the block instead, which leaves the
//! quadratic part linear and makes the exact line search a scan over sign
//! changes.

use crate::numerics::{dot, sym_eig, Cholesky, Matrix};

/// Access to the quadratic part of the objective.
pub(crate) trait Quadratic {
    fn dim(&self) -> usize;
    /// `A[i][j]`.
    fn entry(&self, i: usize, j: usize) -> f64;
    /// `b[i]`.
    fn linear(&self, i: usize) -> f64;
    /// `A·x − b`, the gradient of the smooth part.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn select(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), idx.len(), |r, c| self.entry(idx[r], idx[c]))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FssOptions {
    /// Optimality tolerance on the subgradient conditions.
    pub tol: f64,
    /// Cap on feature-sign steps.
    pub max_steps: usize,
}

impl Default for FssOptions {
    fn default() -> Self {
        FssOptions { tol: 1e-10, max_steps: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FssOutcome {
    pub converged: bool,
    pub steps: usize,
    pub degenerate_steps: usize,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sign-fixed quadratic restricted to the active set.
struct ActiveProblem {
    a: Matrix,
    b: Vec<f64>,
    lambda: f64,
}

impl ActiveProblem {
    /// True objective (with `|x|`) for a point supported on the active set.
    fn value(&self, x: &[f64]) -> f64 {
        let ax = self.a.matvec(x).expect("active shape");
        x.iter()
            .zip(&ax)
            .zip(&self.b)
            .map(|((xi, axi), bi)| 0.5 * xi * axi - bi * xi + self.lambda * xi.abs())
            .sum()
    }
}

/// Minimizes the objective in place, warm-starting from `x`.
pub(crate) fn feature_sign_search<Q: Quadratic>(q: &Q, lambda: f64, x: &mut [f64], opts: FssOptions) -> FssOutcome {
    let n = q.dim();
    debug_assert_eq!(x.len(), n);
    let mut theta: Vec<f64> = x.iter().map(|&v| sign(v)).collect();
    let mut active: Vec<usize> = (0..n).filter(|&i| x[i] != 0.0).collect();
    let mut in_active: Vec<bool> = x.iter().map(|&v| v != 0.0).collect();
    let mut grad = q.gradient(x);
    let mut outcome = FssOutcome { converged: false, steps: 0, degenerate_steps: 0 };

    loop {
        let nonzero_optimal = active.iter().all(|&i| (grad[i] + lambda * theta[i]).abs() <= opts.tol);
        if nonzero_optimal {
            // Most violating zero coefficient.
            let mut pick: Option<(usize, f64)> = None;
            for i in 0..n {
                if !in_active[i] {
                    let g = grad[i].abs();
                    if pick.is_none_or(|(_, best)| g > best) {
                        pick = Some((i, g));
                    }
                }
            }
            match pick {
                Some((i, g)) if g > lambda + opts.tol => {
                    theta[i] = -sign(grad[i]);
                    active.push(i);
                    in_active[i] = true;
                }
                _ => {
                    outcome.converged = true;
                    return outcome;
                }
            }
        }
        if outcome.steps >= opts.max_steps {
            return outcome;
        }
        outcome.steps += 1;

        let problem = ActiveProblem {
            a: q.select(&active),
            b: active.iter().map(|&i| q.linear(i)).collect(),
            lambda,
        };
        let current: Vec<f64> = active.iter().map(|&i| x[i]).collect();
        let f_current = problem.value(&current);
        let next = match Cholesky::new(&problem.a) {
            Ok(chol) => {
                let rhs: Vec<f64> = problem.b.iter().zip(&active).map(|(b, &i)| b - lambda * theta[i]).collect();
                Some(segment_search(&problem, &current, &chol.solve(&rhs)))
            }
            Err(_) => {
                outcome.degenerate_steps += 1;
                null_direction_search(&problem, &current)
            }
        };
        let Some(next) = next else {
            return outcome;
        };
        let f_next = problem.value(&next);
        let shrinks = next.iter().filter(|v| **v == 0.0).count() > current.iter().filter(|v| **v == 0.0).count();
        let tiny = 1e-13 * (1.0 + f_current.abs());
        if f_next > f_current + tiny || (f_next >= f_current - tiny && next == current && !shrinks) {
            // No progress: round-off floor for this active set.
            return outcome;
        }
        for (&i, &v) in active.iter().zip(&next) {
            x[i] = v;
            theta[i] = sign(v);
        }
        active.retain(|&i| x[i] != 0.0);
        for (flag, &v) in in_active.iter_mut().zip(x.iter()) {
            *flag = v != 0.0;
        }
        grad = q.gradient(x);
    }
}

/// Best point of the segment `current → target`, including every point
/// where a coefficient crosses zero.
///
/// Along the segment the quadratic part is a parabola in the step length,
/// so each candidate costs one pass for the ℓ1 term.
fn segment_search(problem: &ActiveProblem, current: &[f64], target: &[f64]) -> Vec<f64> {
    let delta: Vec<f64> = current.iter().zip(target).map(|(c, g)| g - c).collect();
    let ac = problem.a.matvec(current).expect("active shape");
    let ad = problem.a.matvec(&delta).expect("active shape");
    let c_ac = dot(current, &ac);
    let c_ad = dot(current, &ad);
    let d_ad = dot(&delta, &ad);
    let (b_c, b_d) = (dot(&problem.b, current), dot(&problem.b, &delta));
    let smooth = |t: f64| 0.5 * c_ac + t * c_ad + 0.5 * t * t * d_ad - b_c - t * b_d;
    let l1 = |p: &[f64]| problem.lambda * p.iter().map(|v| v.abs()).sum::<f64>();

    let mut best_t = 1.0;
    let mut best_zero = None;
    let mut best_value = smooth(1.0) + l1(target);
    let mut point = vec![0.0; current.len()];
    for k in 0..current.len() {
        if current[k] * target[k] < 0.0 {
            let t = current[k] / (current[k] - target[k]);
            for ((p, c), d) in point.iter_mut().zip(current).zip(&delta) {
                *p = c + t * d;
            }
            point[k] = 0.0;
            let v = smooth(t) + l1(&point);
            if v < best_value {
                best_value = v;
                best_t = t;
                best_zero = Some(k);
            }
        }
    }
    let mut best: Vec<f64> = current.iter().zip(&delta).map(|(c, d)| c + best_t * d).collect();
    match best_zero {
        Some(k) => best[k] = 0.0,
        None => best.copy_from_slice(target),
    }
    best
}

/// Exact line search along a null direction of a singular active block.
///
/// The quadratic term is constant along the direction, so the objective is
/// piecewise linear and its minimum over the ray sits at a sign change.
fn null_direction_search(problem: &ActiveProblem, current: &[f64]) -> Option<Vec<f64>> {
    let eig = sym_eig(&problem.a).ok()?;
    let last = eig.eigenvalues.len() - 1;
    let d = eig.eigenvectors.col(last);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for dir in [1.0, -1.0] {
        for k in 0..current.len() {
            if current[k] == 0.0 || d[k] == 0.0 {
                continue;
            }
            let t = -current[k] / (dir * d[k]);
            if t <= 0.0 {
                continue;
            }
            let mut point: Vec<f64> = current.iter().zip(&d).map(|(c, dk)| c + t * dir * dk).collect();
            point[k] = 0.0;
            let v = problem.value(&point);
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, point));
            }
        }
    }
    best.map(|(_, p)| p)
}

/// `A = G + shift·I`, `b = lin`.
pub(crate) struct ShiftedGram<'a> {
    pub gram: &'a Matrix,
    pub shift: f64,
    pub lin: Vec<f64>,
}

impl Quadratic for ShiftedGram<'_> {
    fn dim(&self) -> usize {
        self.lin.len()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let g = self.gram[(i, j)];
        if i == j {
            g + self.shift
        } else {
            g
        }
    }

    fn linear(&self, i: usize) -> f64 {
        self.lin[i]
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = x.iter().zip(&self.lin).map(|(xi, bi)| self.shift * xi - bi).collect();
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (gi, &a) in g.iter_mut().zip(self.gram.row(j)) {
                    *gi += a * xj;
                }
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kkt(q: &ShiftedGram, lambda: f64, x: &[f64]) -> f64 {
        let g = q.gradient(x);
        x.iter()
            .zip(&g)
            .map(|(&xi, &gi)| if xi != 0.0 { (gi + lambda * sign(xi)).abs() } else { (gi.abs() - lambda).max(0.0) })
            .fold(0.0, f64::max)
    }

    #[test]
    fn solves_soft_threshold_on_identity() {
        let gram = Matrix::identity(3);
        let q = ShiftedGram { gram: &gram, shift: 0.0, lin: vec![2.0, -0.5, -3.0] };
        let mut x = vec![0.0; 3];
        let out = feature_sign_search(&q, 1.0, &mut x, FssOptions::default());
        assert!(out.converged);
        assert_eq!(x, vec![1.0, 0.0, -2.0]);
    }

    #[test]
    fn handles_rank_deficient_gram() {
        // Four columns in two dimensions: every active set above two is singular.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let d = Matrix::from_fn(2, 4, |_, _| rng.random_range(-1.0..1.0));
            let gram = d.gram_cols();
            let y = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let q = ShiftedGram { gram: &gram, shift: 0.0, lin: d.tr_matvec(&y).unwrap() };
            let mut x = vec![0.0; 4];
            let out = feature_sign_search(&q, 0.05, &mut x, FssOptions::default());
            assert!(out.converged, "{out:?}");
            assert!(kkt(&q, 0.05, &x) <= 1e-8);
        }
    }

    #[test]
    fn warm_start_from_wrong_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = Matrix::from_fn(6, 5, |_, _| rng.random_range(-1.0..1.0));
        let gram = d.gram_cols();
        let y: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q = ShiftedGram { gram: &gram, shift: 0.1, lin: d.tr_matvec(&y).unwrap() };
        let mut cold = vec![0.0; 5];
        feature_sign_search(&q, 0.1, &mut cold, FssOptions::default());
        let mut warm: Vec<f64> = cold.iter().map(|v| -v + 0.3).collect();
        let out = feature_sign_search(&q, 0.1, &mut warm, FssOptions::default());
        assert!(out.converged);
        for (a, b) in cold.iter().zip(&warm) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}
