//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the solver; the oracles work from the raw
//! dictionary blocks with their own linear algebra.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sgfb::numerics::Matrix;

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `rows × cols` Gaussian matrix with unit-norm columns.
pub fn random_block(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::from_fn(rows, cols, |_, _| gaussian(rng));
    for c in 0..cols {
        let col = m.col(c);
        let n = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        m.set_col(c, &col.iter().map(|v| v / n).collect::<Vec<_>>());
    }
    m
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v = random_vec(rng, n);
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / s).collect()
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let b = Matrix::from_fn(n, n, |_, _| gaussian(rng));
    Matrix::from_fn(n, n, |i, j| (0..n).map(|k| b[(i, k)] * b[(j, k)]).sum::<f64>() + if i == j { 0.1 } else { 0.0 })
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Gaussian elimination with partial pivoting. `None` when a pivot falls
/// below `1e-12` times the largest entry.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// `(I − 11ᵀ/B)²`, formed by explicit multiplication.
pub fn centering_squared(bands: usize) -> Vec<Vec<f64>> {
    let c: Vec<Vec<f64>> =
        (0..bands).map(|i| (0..bands).map(|j| if i == j { 1.0 } else { 0.0 } - 1.0 / bands as f64).collect()).collect();
    (0..bands).map(|i| (0..bands).map(|j| (0..bands).map(|k| c[i][k] * c[k][j]).sum()).collect()).collect()
}

/// `Σ_k Σ_b (u_kb − mean_b u_kb)²`, i.e. each row's spread about its mean.
pub fn row_spread(u: &Matrix) -> f64 {
    (0..u.rows())
        .map(|k| {
            let row = u.row(k);
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            row.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        })
        .sum()
}

/// `Tr(u M uᵀ)` with `M` from [`centering_squared`].
pub fn trace_form(u: &Matrix) -> f64 {
    let m = centering_squared(u.cols());
    let mut t = 0.0;
    for k in 0..u.rows() {
        for i in 0..u.cols() {
            for j in 0..u.cols() {
                t += u[(k, i)] * m[i][j] * u[(k, j)];
            }
        }
    }
    t
}

/// Multi-band objective `Σ ½‖y_b − D_b u_b‖² + λ‖u‖₁ + (λ1/2)·spread(u)`.
pub fn objective(blocks: &[Matrix], y: &[Vec<f64>], u: &Matrix, lambda: f64, lambda1: f64) -> f64 {
    let mut f = 0.0;
    for (b, (d, yb)) in blocks.iter().zip(y).enumerate() {
        for r in 0..d.rows() {
            let recon: f64 = (0..d.cols()).map(|k| d[(r, k)] * u[(k, b)]).sum();
            f += 0.5 * (yb[r] - recon).powi(2);
        }
    }
    f + lambda * u.as_slice().iter().map(|v| v.abs()).sum::<f64>() + 0.5 * lambda1 * row_spread(u)
}

/// Gradient of the smooth part, `N × B`.
pub fn smooth_gradient(blocks: &[Matrix], y: &[Vec<f64>], u: &Matrix, lambda1: f64) -> Matrix {
    let (n, bands) = (u.rows(), u.cols());
    let m = centering_squared(bands);
    Matrix::from_fn(n, bands, |k, b| {
        let d = &blocks[b];
        let fit: f64 = (0..d.rows())
            .map(|r| {
                let recon: f64 = (0..n).map(|l| d[(r, l)] * u[(l, b)]).sum();
                d[(r, k)] * (recon - y[b][r])
            })
            .sum();
        fit + lambda1 * (0..bands).map(|c| u[(k, c)] * m[c][b]).sum::<f64>()
    })
}

/// Largest violation of the ℓ1 subgradient optimality conditions.
pub fn kkt_violation(blocks: &[Matrix], y: &[Vec<f64>], u: &Matrix, lambda: f64, lambda1: f64) -> f64 {
    let g = smooth_gradient(blocks, y, u, lambda1);
    g.as_slice()
        .iter()
        .zip(u.as_slice())
        .map(|(&g, &x)| if x != 0.0 { (g + lambda * x.signum()).abs() } else { (g.abs() - lambda).max(0.0) })
        .fold(0.0, f64::max)
}

/// Exact minimizer by enumerating every sign pattern of every coefficient.
///
/// For a pattern `s` on support `A` the stationarity condition is the linear
/// system `H_AA x_A = g_A − λ s_A`; a sign-consistent solution is a candidate
/// and the best candidate is the global minimum. Cost is `3^(N·B)` solves, so
/// keep `N·B` near 10. Returns `(objective, u)`.
pub fn exhaustive_minimum(blocks: &[Matrix], y: &[Vec<f64>], lambda: f64, lambda1: f64) -> (f64, Matrix) {
    let bands = blocks.len();
    let n = blocks[0].cols();
    let dim = n * bands;
    let m = centering_squared(bands);
    // Variable index b·N + k.
    let mut h = vec![vec![0.0; dim]; dim];
    let mut g = vec![0.0; dim];
    for b in 0..bands {
        let d = &blocks[b];
        for k in 0..n {
            g[b * n + k] = (0..d.rows()).map(|r| d[(r, k)] * y[b][r]).sum();
            for l in 0..n {
                h[b * n + k][b * n + l] = (0..d.rows()).map(|r| d[(r, k)] * d[(r, l)]).sum();
            }
        }
        for c in 0..bands {
            for k in 0..n {
                h[b * n + k][c * n + k] += lambda1 * m[b][c];
            }
        }
    }
    let to_matrix = |x: &[f64]| Matrix::from_fn(n, bands, |k, b| x[b * n + k]);

    let mut best_x = vec![0.0; dim];
    let mut best = objective(blocks, y, &to_matrix(&best_x), lambda, lambda1);
    let patterns = 3usize.pow(dim as u32);
    let mut signs = vec![0i8; dim];
    for code in 1..patterns {
        let mut c = code;
        for s in signs.iter_mut() {
            *s = (c % 3) as i8 - 1;
            c /= 3;
        }
        let active: Vec<usize> = (0..dim).filter(|&i| signs[i] != 0).collect();
        let a = active.iter().map(|&i| active.iter().map(|&j| h[i][j]).collect()).collect();
        let rhs = active.iter().map(|&i| g[i] - lambda * signs[i] as f64).collect();
        let Some(xa) = gauss_solve(a, rhs) else { continue };
        if xa.iter().zip(&active).any(|(v, &i)| v.signum() as i8 != signs[i] || *v == 0.0) {
            continue;
        }
        let mut x = vec![0.0; dim];
        for (v, &i) in xa.iter().zip(&active) {
            x[i] = *v;
        }
        let f = objective(blocks, y, &to_matrix(&x), lambda, lambda1);
        if f < best {
            best = f;
            best_x = x;
        }
    }
    (best, to_matrix(&best_x))
}

/// `|H(e^{jw})|` of a biquad cascade, evaluated from its coefficients.
pub fn cascade_magnitude(filter: &sgfb::filterbank::IirFilter, freq_hz: f64, fs_hz: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * freq_hz / fs_hz;
    let poly = |c: [f64; 3]| {
        let re = c[0] + c[1] * w.cos() + c[2] * (2.0 * w).cos();
        let im = -(c[1] * w.sin() + c[2] * (2.0 * w).sin());
        (re * re + im * im).sqrt()
    };
    filter.sections.iter().map(|s| poly(s.b) / poly([1.0, s.a[0], s.a[1]])).product()
}
