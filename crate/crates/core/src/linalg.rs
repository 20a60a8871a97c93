//! Dense matrix primitives used by the solver and the post-fit analysis.
//!
//! Everything here is deterministic: iterative routines start from a fixed
//! seeded block (or a caller-provided warm start) and never consult a clock
//! or thread-local RNG.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GsbmError, Result};

/// Default stopping tolerance for the dominant singular pair.
pub const DEFAULT_SVD_TOL: f64 = 1e-9;
/// Default iteration cap for the dominant singular pair.
pub const DEFAULT_SVD_MAX_ITER: usize = 1000;

const START_SEED: u64 = 0x5E_ED0F_B10C;
const POWER_BLOCK: usize = 4;
const SIGN_EPS: f64 = 1e-8;

/// Row-major dense matrix of 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(GsbmError::shape(
                format!("{} entries", n_rows * n_cols),
                format!("{} entries", data.len()),
            ));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(GsbmError::NonFinite {
                row: pos / n_cols.max(1),
                col: pos % n_cols.max(1),
            });
        }
        Ok(DenseMatrix { n_rows, n_cols, data })
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { n_rows, n_cols, data }
    }

    /// Outer product `a bᵀ`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j])
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n_cols, self.n_rows, |i, j| self.get(j, i))
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Frobenius inner product `Σ_ij M_ij N_ij`.
    pub fn dot(&self, other: &DenseMatrix) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest `|M_ij − M_ji|`; infinite for non-square matrices.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.n_rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.n_rows;
        (0..n).all(|i| ((i + 1)..n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn scale(&self, c: f64) -> Self {
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn zip_map(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.shape(), other.shape());
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `y = M x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `y = Mᵀ x`, accumulated row by row.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_rows);
        let mut y = vec![0.0; self.n_cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (yj, &mij) in y.iter_mut().zip(self.row(i)) {
                *yj += mij * xi;
            }
        }
        y
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_rows, self.n_cols, &self.data)
    }
}

/// Square matrix whose entries satisfy `M_ij = M_ji` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DenseMatrix);

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix(DenseMatrix::zeros(n, n))
    }

    /// Wraps a dense matrix after checking exact symmetry.
    pub fn try_from_dense(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(GsbmError::shape("square matrix", format!("{}x{}", m.n_rows(), m.n_cols())));
        }
        if !m.is_exactly_symmetric() {
            return Err(GsbmError::NotSymmetric(m.max_asymmetry()));
        }
        Ok(SymMatrix(m))
    }

    /// Builds a symmetric matrix from its upper triangle (diagonal included).
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        SymMatrix(m)
    }

    /// Averages a square matrix with its transpose.
    pub fn symmetrize(m: &DenseMatrix) -> Self {
        let n = m.n_rows();
        Self::from_upper(n, |i, j| 0.5 * (m.get(i, j) + m.get(j, i)))
    }

    pub(crate) fn from_dense_unchecked(m: DenseMatrix) -> Self {
        debug_assert!(m.is_exactly_symmetric());
        SymMatrix(m)
    }

    pub fn n(&self) -> usize {
        self.0.n_rows()
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_dense(self) -> DenseMatrix {
        self.0
    }

    /// Sets `(i, j)` and `(j, i)` together.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.0.set(i, j, v);
        self.0.set(j, i, v);
    }
}

impl std::ops::Deref for SymMatrix {
    type Target = DenseMatrix;

    fn deref(&self) -> &DenseMatrix {
        &self.0
    }
}

fn require_square(name: &str, m: &DenseMatrix, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(GsbmError::shape(
            format!("{name}: {n}x{n}"),
            format!("{name}: {}x{}", m.n_rows(), m.n_cols()),
        ));
    }
    Ok(())
}

pub(crate) fn check_same_size(a: &SymMatrix, omega: &SymMatrix, l: &DenseMatrix, s: &DenseMatrix) -> Result<usize> {
    let n = a.n();
    require_square("Omega", omega, n)?;
    require_square("L", l, n)?;
    require_square("S", s, n)?;
    Ok(n)
}

/// `Ω ⊙ (A − L − S − Sᵀ)`.
///
/// `S_ij + S_ji` is summed before subtracting so the result is bitwise
/// symmetric whenever `L` is.
pub fn masked_residual(a: &SymMatrix, omega: &SymMatrix, l: &DenseMatrix, s: &DenseMatrix) -> Result<DenseMatrix> {
    let n = check_same_size(a, omega, l, s)?;
    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let w = omega.get(i, j);
            if w != 0.0 {
                let sym_s = s.get(i, j) + s.get(j, i);
                r.set(i, j, w * (a.get(i, j) - l.get(i, j) - sym_s));
            }
        }
    }
    Ok(r)
}

/// Euclidean norm of every column.
pub fn column_norms(m: &DenseMatrix) -> Vec<f64> {
    let mut acc = vec![0.0; m.n_cols()];
    for i in 0..m.n_rows() {
        for (a, x) in acc.iter_mut().zip(m.row(i)) {
            *a += x * x;
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

/// `‖M‖_{2,1} = Σ_j ‖M_{·,j}‖₂`.
pub fn group_norm_21(m: &DenseMatrix) -> f64 {
    column_norms(m).into_iter().sum()
}

/// Sum of singular values (dense SVD).
pub fn nuclear_norm(m: &DenseMatrix) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    m.to_nalgebra().singular_values().iter().sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Flips `v` so that its first non-negligible coordinate is positive.
/// Returns whether a flip happened.
pub fn canonical_sign(v: &mut [f64]) -> bool {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return false;
    }
    match v.iter().find(|x| x.abs() > SIGN_EPS * scale) {
        Some(&first) if first < 0.0 => {
            v.iter_mut().for_each(|x| *x = -*x);
            true
        }
        _ => false,
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    if n > 0 {
        e[k.min(n - 1)] = 1.0;
    }
    e
}

/// Dominant singular triple of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularPair {
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Block iterations used.
    pub iterations: usize,
    /// Final `‖Mᵀu − σv‖₂`.
    pub residual: f64,
}

/// Largest singular value and its singular vectors, by block power
/// iteration on `MᵀM` with Rayleigh-Ritz extraction.
///
/// Stops once `‖Mᵀu − σv‖₂ ≤ tol·max(1, σ)`; `Mv = σu` holds by
/// construction. The sign is fixed so that the first non-negligible
/// coordinate of `u` is positive. A zero matrix yields `(0, e₁, e₁)`.
pub fn top_singular_pair(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<SingularPair> {
    top_singular_pair_from(m, tol, max_iter, None)
}

/// [`top_singular_pair`] with an optional warm-start right vector, placed
/// first in the starting block.
pub fn top_singular_pair_from(m: &DenseMatrix, tol: f64, max_iter: usize, start: Option<&[f64]>) -> Result<SingularPair> {
    if !(tol > 0.0) {
        return Err(GsbmError::Config(format!("svd tolerance must be > 0, got {tol}")));
    }
    let (n_rows, n_cols) = m.shape();
    if n_rows == 0 || n_cols == 0 {
        return Err(GsbmError::shape("non-empty matrix", format!("{n_rows}x{n_cols}")));
    }
    if m.is_zero() {
        return Ok(SingularPair {
            sigma: 0.0,
            u: unit(n_rows, 0),
            v: unit(n_cols, 0),
            iterations: 0,
            residual: 0.0,
        });
    }

    let block = POWER_BLOCK.min(n_cols).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut q: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n_cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    if let Some(s) = start {
        if s.len() == n_cols && norm2(s) > 0.0 {
            q[0] = s.to_vec();
        }
    }
    orthonormalize(&mut q, &mut rng);

    let mut last_residual = f64::INFINITY;
    for iter in 1..=max_iter {
        // B = M Q, Ritz problem on H = BᵀB = Qᵀ MᵀM Q.
        let b: Vec<Vec<f64>> = q.iter().map(|col| m.matvec(col)).collect();
        let h = DMatrix::from_fn(block, block, |i, j| dot(&b[i], &b[j]));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));

        let combine = |cols: &[Vec<f64>], k: usize| -> Vec<f64> {
            let len = cols[0].len();
            let mut out = vec![0.0; len];
            for (c, col) in cols.iter().enumerate() {
                let w = eig.eigenvectors[(c, order[k])];
                for (o, x) in out.iter_mut().zip(col) {
                    *o += w * x;
                }
            }
            out
        };
        let ritz_v: Vec<Vec<f64>> = (0..block).map(|k| combine(&q, k)).collect();
        let ritz_mv: Vec<Vec<f64>> = (0..block).map(|k| combine(&b, k)).collect();

        let sigma = norm2(&ritz_mv[0]);
        let z: Vec<Vec<f64>> = ritz_mv.iter().map(|x| m.matvec_t(x)).collect();
        if sigma == 0.0 {
            // Start block fell in the null space; restart from fresh vectors.
            q = (0..block)
                .map(|_| (0..n_cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            orthonormalize(&mut q, &mut rng);
            continue;
        }
        let v = &ritz_v[0];
        let residual = z[0]
            .iter()
            .zip(v)
            .map(|(mtu, vi)| {
                let d = mtu / sigma - sigma * vi;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        last_residual = residual;
        if residual <= tol * sigma.max(1.0) {
            let mut u: Vec<f64> = ritz_mv[0].iter().map(|x| x / sigma).collect();
            let mut v = v.clone();
            let vn = norm2(&v);
            v.iter_mut().for_each(|x| *x /= vn);
            if canonical_sign(&mut u) {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok(SingularPair {
                sigma,
                u,
                v,
                iterations: iter,
                residual,
            });
        }
        q = z;
        orthonormalize(&mut q, &mut rng);
    }
    Err(GsbmError::Convergence {
        what: "dominant singular pair",
        iterations: max_iter,
        residual: last_residual,
    })
}

/// Top singular pair from a full dense SVD, with the same sign convention as
/// [`top_singular_pair`]. `iterations` is 0.
pub fn dense_top_singular_pair(m: &DenseMatrix) -> Result<SingularPair> {
    let (n_rows, n_cols) = m.shape();
    if n_rows == 0 || n_cols == 0 {
        return Err(GsbmError::shape("non-empty matrix", format!("{n_rows}x{n_cols}")));
    }
    if m.is_zero() {
        return Ok(SingularPair {
            sigma: 0.0,
            u: unit(n_rows, 0),
            v: unit(n_cols, 0),
            iterations: 0,
            residual: 0.0,
        });
    }
    let svd = m
        .to_nalgebra()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(GsbmError::Convergence {
            what: "dense singular value decomposition",
            iterations: 0,
            residual: f64::NAN,
        })?;
    let k = svd.singular_values.imax();
    let sigma = svd.singular_values[k];
    let u_mat = svd.u.as_ref().expect("requested u");
    let vt = svd.v_t.as_ref().expect("requested v");
    let mut u: Vec<f64> = u_mat.column(k).iter().copied().collect();
    let mut v: Vec<f64> = vt.row(k).iter().copied().collect();
    if canonical_sign(&mut u) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let mtu = m.matvec_t(&u);
    let residual = mtu.iter().zip(&v).map(|(a, b)| (a - sigma * b).powi(2)).sum::<f64>().sqrt();
    Ok(SingularPair {
        sigma,
        u,
        v,
        iterations: 0,
        residual,
    })
}

/// Power iterations attempted before [`top_singular_pair_or_dense`] switches
/// to a dense decomposition: `max(100, n)`, roughly where the two cost the same.
pub fn power_budget(n: usize) -> usize {
    n.max(100)
}

/// [`top_singular_pair_from`] with at most `min(max_iter, power_budget(n))`
/// iterations, then a dense decomposition when the iteration stalls on a
/// tight cluster of leading singular values. A symmetric input uses the
/// eigendecomposition (`u = x`, `v = sign(λ)·x` for the eigenpair of largest
/// `|λ|`).
pub fn top_singular_pair_or_dense(m: &DenseMatrix, tol: f64, max_iter: usize, start: Option<&[f64]>) -> Result<SingularPair> {
    let budget = max_iter.min(power_budget(m.n_rows().max(m.n_cols())));
    match top_singular_pair_from(m, tol, budget, start) {
        Err(GsbmError::Convergence { iterations, .. }) => {
            let mut pair = if m.is_exactly_symmetric() {
                dense_symmetric_top_pair(m)?
            } else {
                dense_top_singular_pair(m)?
            };
            pair.iterations = iterations;
            Ok(pair)
        }
        other => other,
    }
}

fn dense_symmetric_top_pair(m: &DenseMatrix) -> Result<SingularPair> {
    let eig = SymmetricEigen::try_new(m.to_nalgebra(), f64::EPSILON, 0).ok_or(GsbmError::Convergence {
        what: "dense symmetric eigendecomposition",
        iterations: 0,
        residual: f64::NAN,
    })?;
    let k = eig.eigenvalues.iamax();
    let lambda = eig.eigenvalues[k];
    let mut u: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    canonical_sign(&mut u);
    let sign = if lambda < 0.0 { -1.0 } else { 1.0 };
    let v: Vec<f64> = u.iter().map(|x| sign * x).collect();
    let sigma = lambda.abs();
    let mtu = m.matvec_t(&u);
    let residual = mtu.iter().zip(&v).map(|(a, b)| (a - sigma * b).powi(2)).sum::<f64>().sqrt();
    Ok(SingularPair {
        sigma,
        u,
        v,
        iterations: 0,
        residual,
    })
}

/// Modified Gram-Schmidt (two passes). Columns that collapse are replaced by
/// fresh random directions so the block keeps full rank.
fn orthonormalize(cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    for k in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let original = norm2(&cols[k]);
            for _ in 0..2 {
                for p in 0..k {
                    let (head, tail) = cols.split_at_mut(k);
                    let proj = dot(&head[p], &tail[0]);
                    for (x, q) in tail[0].iter_mut().zip(&head[p]) {
                        *x -= proj * q;
                    }
                }
            }
            let nrm = norm2(&cols[k]);
            if nrm > 1e-10 * original.max(f64::MIN_POSITIVE) && nrm > 1e-300 {
                cols[k].iter_mut().for_each(|x| *x /= nrm);
                break;
            }
            attempts += 1;
            let len = cols[k].len();
            cols[k] = if attempts > 8 {
                unit(len, k)
            } else {
                (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
        }
    }
}

/// One eigenpair of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// The eigenvalue is (numerically) repeated, so the vector is only one
    /// representative of its eigenspace.
    pub degenerate: bool,
}

/// Full symmetric eigendecomposition, eigenvalues in decreasing order,
/// vectors sign-normalised.
pub fn symmetric_eigen(m: &SymMatrix, tol: f64) -> Result<Vec<EigenPair>> {
    let n = m.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::try_new(m.to_nalgebra(), f64::EPSILON, 10_000 * n.max(1)).ok_or(GsbmError::Convergence {
        what: "symmetric eigendecomposition",
        iterations: 10_000 * n,
        residual: f64::NAN,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let scale = values.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let gap_tol = 1e-8 * scale;

    let mut pairs = Vec::with_capacity(n);
    for (rank, &k) in order.iter().enumerate() {
        let mut vector: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        canonical_sign(&mut vector);
        let value = values[rank];
        let residual = norm2(
            &m.matvec(&vector)
                .iter()
                .zip(&vector)
                .map(|(mv, v)| mv - value * v)
                .collect::<Vec<_>>(),
        );
        if residual > tol * scale {
            return Err(GsbmError::Convergence {
                what: "symmetric eigendecomposition",
                iterations: 1,
                residual,
            });
        }
        let below = rank + 1 < n && (values[rank] - values[rank + 1]).abs() <= gap_tol;
        let above = rank > 0 && (values[rank - 1] - values[rank]).abs() <= gap_tol;
        pairs.push(EigenPair {
            value,
            vector,
            degenerate: below || above,
        });
    }
    Ok(pairs)
}

/// Unit eigenvector of the `k`-th largest eigenvalue (1-based).
pub fn eigenvector_k(m: &SymMatrix, k: usize, tol: f64) -> Result<EigenPair> {
    let n = m.n();
    if k == 0 || k > n {
        return Err(GsbmError::Input(format!("eigen index k={k} outside 1..={n}")));
    }
    let mut pairs = symmetric_eigen(m, tol)?;
    Ok(pairs.swap_remove(k - 1))
}

/// Eigenvectors of the `k` largest eigenvalues, in decreasing order.
pub fn top_eigenvectors(m: &SymMatrix, k: usize, tol: f64) -> Result<Vec<EigenPair>> {
    if k > m.n() {
        return Err(GsbmError::Input(format!("k={k} exceeds matrix size {}", m.n())));
    }
    let mut pairs = symmetric_eigen(m, tol)?;
    pairs.truncate(k);
    Ok(pairs)
}
