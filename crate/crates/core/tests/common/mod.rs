//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the library's numerical routines: decompositions
//! are plain Jacobi sweeps, residuals are scalar loops.

#![allow(dead_code)]
// Oracles are written as explicit index loops on purpose.
#![allow(clippy::needless_range_loop)]

pub mod suite;

use gsbm_core::{DenseMatrix, SymMatrix};
pub use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dense(n_rows: usize, n_cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(n_rows, n_cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::from_upper(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Symmetric 0/1 matrix with zero diagonal.
pub fn random_binary(n: usize, p: f64, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::from_upper(n, |i, j| if i != j && rng.gen::<f64>() < p { 1.0 } else { 0.0 })
}

/// Rows of `m` as owned vectors.
pub fn to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.n_rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `Ω⊙(A − L − S − Sᵀ)` by explicit loops.
pub fn residual_loop(a: &SymMatrix, omega: &SymMatrix, l: &DenseMatrix, s: &DenseMatrix) -> Vec<Vec<f64>> {
    let n = a.n();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = omega.get(i, j) * (a.get(i, j) - l.get(i, j) - s.get(i, j) - s.get(j, i));
        }
    }
    out
}

/// Singular values and vectors by one-sided Jacobi rotations.
pub struct Svd {
    /// Descending.
    pub sigma: Vec<f64>,
    /// Left singular vectors, `u[k]` pairs with `sigma[k]`.
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

pub fn jacobi_svd(m: &DenseMatrix) -> Svd {
    let (rows, cols) = (m.n_rows(), m.n_cols());
    // Columns of the working matrix and of the accumulated rotation.
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| m.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = w[p].iter().map(|x| x * x).sum();
                let beta: f64 = w[q].iter().map(|x| x * x).sum();
                let gamma: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let (x, y) = (w[p][k], w[q][k]);
                    w[p][k] = c * x - s * y;
                    w[q][k] = s * x + c * y;
                }
                for k in 0..cols {
                    let (x, y) = (v[p][k], v[q][k]);
                    v[p][k] = c * x - s * y;
                    v[q][k] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..cols).collect();
    let sig: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    order.sort_by(|&a, &b| sig[b].total_cmp(&sig[a]));
    let sigma = order.iter().map(|&k| sig[k]).collect();
    let u = order
        .iter()
        .map(|&k| w[k].iter().map(|x| if sig[k] > 0.0 { x / sig[k] } else { 0.0 }).collect())
        .collect();
    let v = order.iter().map(|&k| v[k].clone()).collect();
    Svd { sigma, u, v }
}

pub fn nuclear_oracle(m: &DenseMatrix) -> f64 {
    jacobi_svd(m).sigma.iter().sum()
}

/// Eigenvalues (descending) and eigenvectors by cyclic two-sided Jacobi.
pub fn jacobi_eigen(m: &SymMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.n();
    let mut a = to_rows(m.as_dense());
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = order.iter().map(|&k| a[k][k]).collect();
    let vectors = order.iter().map(|&k| (0..n).map(|i| v[i][k]).collect()).collect();
    (values, vectors)
}

/// Flips `x` so its first coordinate above `1e-8·max|x|` is positive.
pub fn fix_sign(x: &mut [f64]) -> bool {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
            return true;
        }
    }
    false
}

/// Minimum of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Smooth part `½‖Ω⊙(A − L − S − Sᵀ)‖² + ε/2(‖L‖² + ‖S‖²)` by loops.
pub fn smooth_part(a: &SymMatrix, omega: &SymMatrix, s: &DenseMatrix, l: &DenseMatrix, eps: f64) -> f64 {
    let r = residual_loop(a, omega, l, s);
    let fit: f64 = r.iter().flatten().map(|x| x * x).sum::<f64>() / 2.0;
    let ridge: f64 = l.as_slice().iter().chain(s.as_slice()).map(|x| x * x).sum::<f64>() * eps / 2.0;
    fit + ridge
}

pub fn group_norm_loop(s: &DenseMatrix) -> f64 {
    (0..s.n_cols())
        .map(|j| (0..s.n_rows()).map(|i| s.get(i, j).powi(2)).sum::<f64>().sqrt())
        .sum()
}
