//! Mixed coordinate gradient descent on the ridge-augmented objective
//!
//! ```text
//! Φ_ε(S, L, R) = ½‖Ω⊙(A − L − S − Sᵀ)‖²_F + λ₁R + λ₂‖S‖_{2,1} + ε/2 (‖L‖²_F + ‖S‖²_F)
//! ```
//!
//! subject to `‖L‖_* ≤ R ≤ R̄`. Each iteration takes a proximal gradient step
//! on the column-sparse block `S`, refreshes the radius bound
//! `R̄ = Φ_ε(S_new, L, R)/λ₁`, and then a conditional-gradient step on
//! `(L, R)` whose direction is the closed-form linear minimisation oracle over
//! the nuclear-norm ball. Both half-steps are descent steps, so `Φ_ε` is
//! non-increasing along the trajectory.
//!
//! Box constraints on `S` and `L` are not imposed here; scores are clamped at
//! prediction time.

use serde::{Deserialize, Serialize};

use crate::error::{GsbmError, Result};
use crate::linalg::{
    column_norms, group_norm_21, masked_residual, nuclear_norm, top_singular_pair_or_dense, DenseMatrix, SingularPair, SymMatrix,
    DEFAULT_SVD_MAX_ITER, DEFAULT_SVD_TOL,
};

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_REL_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 500;

/// Penalties, ridge weight and stopping rule for [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Nuclear-norm penalty λ₁ (must be > 0 to fit).
    pub lambda1: f64,
    /// Column-group penalty λ₂.
    pub lambda2: f64,
    /// Ridge weight ε.
    pub epsilon: f64,
    /// Proximal step η, at most `1/(2+ε)`.
    pub eta: f64,
    pub max_iters: usize,
    /// Stop once the relative decrease of Φ_ε falls below this.
    pub rel_tol: f64,
    pub svd_tol: f64,
    pub svd_max_iter: usize,
}

impl SolverConfig {
    /// Defaults for everything except the two penalties.
    pub fn new(lambda1: f64, lambda2: f64) -> Self {
        SolverConfig {
            lambda1,
            lambda2,
            epsilon: DEFAULT_EPSILON,
            eta: 1.0 / (2.0 + DEFAULT_EPSILON),
            max_iters: DEFAULT_MAX_ITERS,
            rel_tol: DEFAULT_REL_TOL,
            svd_tol: DEFAULT_SVD_TOL,
            svd_max_iter: DEFAULT_SVD_MAX_ITER,
        }
    }

    /// Changes ε and resets η to its largest admissible value `1/(2+ε)`.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self.eta = 1.0 / (2.0 + epsilon);
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GsbmError::Config(msg));
        if !(self.lambda1.is_finite() && self.lambda1 > 0.0) {
            return bad(format!("lambda1 must be finite and > 0, got {}", self.lambda1));
        }
        if !(self.lambda2.is_finite() && self.lambda2 >= 0.0) {
            return bad(format!("lambda2 must be finite and >= 0, got {}", self.lambda2));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        let eta_max = 1.0 / (2.0 + self.epsilon);
        if !(self.eta > 0.0 && self.eta <= eta_max * (1.0 + 1e-12)) {
            return bad(format!("eta must lie in (0, 1/(2+eps)] = (0, {eta_max}], got {}", self.eta));
        }
        if !(self.rel_tol > 0.0) {
            return bad(format!("rel_tol must be > 0, got {}", self.rel_tol));
        }
        if !(self.svd_tol > 0.0) {
            return bad(format!("svd_tol must be > 0, got {}", self.svd_tol));
        }
        if self.max_iters == 0 || self.svd_max_iter == 0 {
            return bad("iteration caps must be >= 1".into());
        }
        Ok(())
    }
}

/// Diagnostics of a single iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub t: usize,
    /// Φ_ε(S⁽ᵗ⁾, L⁽ᵗ⁻¹⁾, R⁽ᵗ⁻¹⁾), the value right after the S step.
    pub phi_after_prox: f64,
    pub r_bar: f64,
    /// Largest singular value of the L-gradient.
    pub sigma1: f64,
    pub r_tilde: f64,
    pub beta: f64,
    /// Φ_ε at the end of the iteration.
    pub phi: f64,
    pub svd_iterations: usize,
}

/// Iterate `(S, L, R)` with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub l: SymMatrix,
    pub s: DenseMatrix,
    pub r: f64,
    pub t: usize,
    pub phi: f64,
    pub last_step: Option<StepLog>,
    warm_start: Option<Vec<f64>>,
}

impl SolverState {
    /// `(L, S, R, t) = (0, 0, 0, 0)`.
    pub fn initial(a: &SymMatrix, omega: &SymMatrix, cfg: &SolverConfig) -> Result<Self> {
        let n = a.n();
        let l = SymMatrix::zeros(n);
        let s = DenseMatrix::zeros(n, n);
        let phi = objective_phi(a, omega, &s, &l, 0.0, cfg)?;
        Ok(SolverState {
            l,
            s,
            r: 0.0,
            t: 0,
            phi,
            last_step: None,
            warm_start: None,
        })
    }
}

/// Output of [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub l_hat: SymMatrix,
    pub s_hat: DenseMatrix,
    /// Final radius `R`.
    pub radius: f64,
    /// Φ_ε at initialisation followed by its value after every iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub config: SolverConfig,
    /// Original node labels, index-aligned with the matrices.
    pub labels: Vec<String>,
    /// Per-iteration diagnostics (not persisted by the fit file format).
    pub steps: Vec<StepLog>,
}

impl FitResult {
    pub fn n(&self) -> usize {
        self.l_hat.n()
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }
}

fn penalty_terms(s: &DenseMatrix, l: &DenseMatrix, cfg: &SolverConfig) -> f64 {
    cfg.lambda2 * group_norm_21(s) + 0.5 * cfg.epsilon * (l.frobenius_norm_sq() + s.frobenius_norm_sq())
}

fn phi_from_residual(resid: &DenseMatrix, s: &DenseMatrix, l: &DenseMatrix, r: f64, cfg: &SolverConfig) -> f64 {
    0.5 * resid.frobenius_norm_sq() + cfg.lambda1 * r + penalty_terms(s, l, cfg)
}

/// `F(S, L) = ½‖Ω⊙(A − L − S − Sᵀ)‖²_F + λ₁‖L‖_* + λ₂‖S‖_{2,1}` (no ridge term).
pub fn objective_f(a: &SymMatrix, omega: &SymMatrix, s: &DenseMatrix, l: &DenseMatrix, cfg: &SolverConfig) -> Result<f64> {
    let resid = masked_residual(a, omega, l, s)?;
    let nuc = if cfg.lambda1 == 0.0 { 0.0 } else { nuclear_norm(l) };
    Ok(0.5 * resid.frobenius_norm_sq() + cfg.lambda1 * nuc + cfg.lambda2 * group_norm_21(s))
}

/// Augmented objective Φ_ε(S, L, R). `R` is taken as given, even if it is
/// smaller than `‖L‖_*`.
pub fn objective_phi(
    a: &SymMatrix,
    omega: &SymMatrix,
    s: &DenseMatrix,
    l: &DenseMatrix,
    r: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let resid = masked_residual(a, omega, l, s)?;
    Ok(phi_from_residual(&resid, s, l, r, cfg))
}

/// Gradient in `S` of the smooth part: `−2Ω⊙(A − L − S − Sᵀ) + εS`.
pub fn grad_s(a: &SymMatrix, omega: &SymMatrix, s: &DenseMatrix, l: &DenseMatrix, cfg: &SolverConfig) -> Result<DenseMatrix> {
    let resid = masked_residual(a, omega, l, s)?;
    Ok(resid.zip_map(s, |r, sv| -2.0 * r + cfg.epsilon * sv))
}

/// Gradient in `L` of the smooth part: `−Ω⊙(A − L − S − Sᵀ) + εL`.
pub fn grad_l(a: &SymMatrix, omega: &SymMatrix, s: &DenseMatrix, l: &DenseMatrix, cfg: &SolverConfig) -> Result<DenseMatrix> {
    let resid = masked_residual(a, omega, l, s)?;
    Ok(resid.zip_map(l, |r, lv| -r + cfg.epsilon * lv))
}

/// Column-wise soft thresholding: column `j` is scaled by `(1 − τ/‖M_{·,j}‖₂)₊`.
pub fn column_soft_threshold(m: &DenseMatrix, tau: f64) -> DenseMatrix {
    let factors: Vec<f64> = column_norms(m)
        .into_iter()
        .map(|c| if c <= tau { 0.0 } else { 1.0 - tau / c })
        .collect();
    let mut out = m.clone();
    let n_cols = m.n_cols();
    for (k, x) in out.as_mut_slice().iter_mut().enumerate() {
        *x *= factors[k % n_cols];
    }
    out
}

/// Proximal step on `S`: `Tc_{ηλ₂}(S − η G_S)`.
pub fn prox_s_update(s_prev: &DenseMatrix, g_s: &DenseMatrix, cfg: &SolverConfig) -> DenseMatrix {
    let moved = s_prev.zip_map(g_s, |s, g| s - cfg.eta * g);
    column_soft_threshold(&moved, cfg.eta * cfg.lambda2)
}

/// `R̄ = Φ/λ₁`, an upper bound on the nuclear norm of any minimiser.
pub fn upper_bound_r(phi_prev: f64, cfg: &SolverConfig) -> Result<f64> {
    if !(cfg.lambda1 > 0.0) {
        return Err(GsbmError::Config(format!(
            "lambda1 must be > 0 for the radius bound, got {}",
            cfg.lambda1
        )));
    }
    Ok(phi_prev / cfg.lambda1)
}

/// Frank-Wolfe direction for the `(L, R)` block.
#[derive(Debug, Clone, PartialEq)]
pub struct LmoDirection {
    pub l_tilde: DenseMatrix,
    pub r_tilde: f64,
    pub sigma1: f64,
    pub pair: SingularPair,
}

/// Minimises `⟨Z, G_L⟩ + λ₁R` over `‖Z‖_* ≤ R ≤ R̄`.
///
/// The answer is `(0, 0)` when `λ₁ ≥ σ₁(G_L)` and `(−R̄ u₁v₁ᵀ, R̄)` otherwise.
/// For a symmetric gradient the rank-one atom is replaced by its symmetric
/// part, which has the same inner product with `G_L` and no larger nuclear
/// norm, and keeps `L` exactly symmetric.
pub fn lmo_direction(g_l: &DenseMatrix, r_bar: f64, cfg: &SolverConfig, svd_tol: f64) -> Result<LmoDirection> {
    lmo_direction_from(g_l, r_bar, cfg, svd_tol, None)
}

fn lmo_direction_from(
    g_l: &DenseMatrix,
    r_bar: f64,
    cfg: &SolverConfig,
    svd_tol: f64,
    warm: Option<&[f64]>,
) -> Result<LmoDirection> {
    if !(r_bar >= 0.0) {
        return Err(GsbmError::Input(format!("radius bound must be >= 0, got {r_bar}")));
    }
    let pair = top_singular_pair_or_dense(g_l, svd_tol, cfg.svd_max_iter, warm)?;
    let n = g_l.n_rows();
    if cfg.lambda1 >= pair.sigma {
        return Ok(LmoDirection {
            l_tilde: DenseMatrix::zeros(n, g_l.n_cols()),
            r_tilde: 0.0,
            sigma1: pair.sigma,
            pair,
        });
    }
    let (u, v) = (&pair.u, &pair.v);
    let l_tilde = if g_l.is_exactly_symmetric() {
        DenseMatrix::from_fn(n, n, |i, j| -r_bar * (0.5 * (u[i] * v[j] + v[i] * u[j])))
    } else {
        DenseMatrix::from_fn(n, g_l.n_cols(), |i, j| -r_bar * (u[i] * v[j]))
    };
    Ok(LmoDirection {
        l_tilde,
        r_tilde: r_bar,
        sigma1: pair.sigma,
        pair,
    })
}

/// Step length for the conditional-gradient update:
///
/// `β = min{1, (⟨L − L̃, G_L⟩ + λ₁(R − R̃)) / ((1+ε)‖L̃ − L‖²_F)}`, clipped to
/// `[0, 1]`. Returns 0 when `L̃ = L`.
pub fn step_size(
    l_prev: &DenseMatrix,
    r_prev: f64,
    l_tilde: &DenseMatrix,
    r_tilde: f64,
    g_l: &DenseMatrix,
    cfg: &SolverConfig,
) -> f64 {
    let diff = l_prev.sub(l_tilde);
    let denom = (1.0 + cfg.epsilon) * diff.frobenius_norm_sq();
    if denom == 0.0 {
        return 0.0;
    }
    let numer = diff.dot(g_l) + cfg.lambda1 * (r_prev - r_tilde);
    (numer / denom).clamp(0.0, 1.0)
}

/// One MCGD iteration.
pub fn mcgd_iterate(state: &SolverState, a: &SymMatrix, omega: &SymMatrix, cfg: &SolverConfig) -> Result<SolverState> {
    let l_prev = state.l.as_dense();

    // Proximal step on S.
    let g_s = grad_s(a, omega, &state.s, l_prev, cfg)?;
    let s_new = prox_s_update(&state.s, &g_s, cfg);

    // Radius bound from the post-prox objective.
    let resid_mid = masked_residual(a, omega, l_prev, &s_new)?;
    let phi_mid = phi_from_residual(&resid_mid, &s_new, l_prev, state.r, cfg);
    let r_bar = upper_bound_r(phi_mid, cfg)?;

    // Conditional-gradient step on (L, R).
    let g_l = resid_mid.zip_map(l_prev, |r, lv| -r + cfg.epsilon * lv);
    let dir = lmo_direction_from(&g_l, r_bar, cfg, cfg.svd_tol, state.warm_start.as_deref())?;
    let beta = step_size(l_prev, state.r, &dir.l_tilde, dir.r_tilde, &g_l, cfg);

    let (l_new, r_new) = if beta > 0.0 {
        let l = l_prev.zip_map(&dir.l_tilde, |lp, lt| lp + beta * (lt - lp));
        (SymMatrix::from_dense_unchecked(l), state.r + beta * (dir.r_tilde - state.r))
    } else {
        (state.l.clone(), state.r)
    };

    let phi = objective_phi(a, omega, &s_new, &l_new, r_new, cfg)?;
    let t = state.t + 1;
    Ok(SolverState {
        l: l_new,
        s: s_new,
        r: r_new,
        t,
        phi,
        last_step: Some(StepLog {
            t,
            phi_after_prox: phi_mid,
            r_bar,
            sigma1: dir.sigma1,
            r_tilde: dir.r_tilde,
            beta,
            phi,
            svd_iterations: dir.pair.iterations,
        }),
        warm_start: if dir.sigma1 > 0.0 { Some(dir.pair.v) } else { None },
    })
}

fn validate_inputs(a: &SymMatrix, omega: &SymMatrix) -> Result<()> {
    let n = a.n();
    if omega.n() != n {
        return Err(GsbmError::shape(
            format!("Omega: {n}x{n}"),
            format!("Omega: {0}x{0}", omega.n()),
        ));
    }
    for i in 0..n {
        if omega.get(i, i) != 0.0 {
            return Err(GsbmError::Input(format!("mask diagonal must be zero (node {i})")));
        }
        for j in 0..n {
            let w = omega.get(i, j);
            if w != 0.0 && w != 1.0 {
                return Err(GsbmError::Input(format!("mask entry ({i},{j}) = {w} is not 0/1")));
            }
        }
    }
    Ok(())
}

/// Runs MCGD from the zero initialisation until the relative decrease of
/// Φ_ε drops below `rel_tol` or `max_iters` is reached.
pub fn fit(a: &SymMatrix, omega: &SymMatrix, cfg: &SolverConfig) -> Result<FitResult> {
    cfg.validate()?;
    validate_inputs(a, omega)?;
    let mut state = SolverState::initial(a, omega, cfg)?;
    let mut trace = vec![state.phi];
    let mut steps = Vec::new();
    let mut converged = false;

    while state.t < cfg.max_iters {
        let prev = state.phi;
        state = mcgd_iterate(&state, a, omega, cfg).map_err(|e| GsbmError::Solver {
            iteration: state.t + 1,
            source: Box::new(e),
        })?;
        trace.push(state.phi);
        steps.extend(state.last_step);
        if prev <= 0.0 || (prev - state.phi) / prev < cfg.rel_tol {
            converged = true;
            break;
        }
    }

    let n = a.n();
    Ok(FitResult {
        l_hat: state.l,
        s_hat: state.s,
        radius: state.r,
        objective_trace: trace,
        iterations: state.t,
        converged,
        config: *cfg,
        labels: (0..n).map(|i| i.to_string()).collect(),
        steps,
    })
}
