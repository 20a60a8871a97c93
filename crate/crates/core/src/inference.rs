//! Post-fit analysis: penalty selection, outlier extraction with its
//! optimality certificate, link prediction, spectral community assignment
//! and the constant-density baseline.

use serde::{Deserialize, Serialize};

use crate::error::{GsbmError, Result};
use crate::linalg::{column_norms, eigenvector_k, top_eigenvectors, EigenPair, SymMatrix};
use crate::solver::FitResult;

/// Multiplier of `√d̄` for λ₁ in the high-probability penalty choice.
pub const THEORY_C1: f64 = 84.0;
/// Multiplier of `√d̄` for λ₂ in the high-probability penalty choice.
pub const THEORY_C2: f64 = 19.0;

/// Tolerance used when reading the eigenvector for community labels.
pub const EIGEN_TOL: f64 = 1e-8;

/// Average observed degree `Σ_ij Ω_ij A_ij / n`.
pub fn average_observed_degree(a: &SymMatrix, omega: &SymMatrix) -> Result<f64> {
    let n = a.n();
    if omega.n() != n {
        return Err(GsbmError::shape(format!("{n}x{n}"), format!("{0}x{0}", omega.n())));
    }
    if n == 0 || omega.is_zero() {
        return Err(GsbmError::Config("mask has no observed entries".into()));
    }
    let observed_edges: f64 = a.as_slice().iter().zip(omega.as_slice()).map(|(x, w)| x * w).sum();
    Ok(observed_edges / n as f64)
}

/// Penalties of the form `λ = C·√d̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub lambda1: f64,
    pub lambda2: f64,
    pub avg_degree: f64,
    /// No observed edges: both penalties are zero and the fit is trivial.
    pub empty_graph: bool,
}

/// `λ₁ = c1·√d̄`, `λ₂ = c2·√d̄`.
pub fn scaled_lambdas(a: &SymMatrix, omega: &SymMatrix, c1: f64, c2: f64) -> Result<Lambdas> {
    let d = average_observed_degree(a, omega)?;
    let root = d.sqrt();
    Ok(Lambdas {
        lambda1: c1 * root,
        lambda2: c2 * root,
        avg_degree: d,
        empty_graph: d == 0.0,
    })
}

/// Plug-in penalties `λ₁ = 84√d̄`, `λ₂ = 19√d̄`, with `d̄` the average
/// observed degree (not rescaled by the sampling rate).
pub fn default_lambdas(a: &SymMatrix, omega: &SymMatrix) -> Result<Lambdas> {
    scaled_lambdas(a, omega, THEORY_C1, THEORY_C2)
}

/// How a penalty is chosen on the command line or in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PenaltyChoice {
    /// High-probability constants (84 for λ₁, 19 for λ₂) times `√d̄`.
    Auto,
    /// `C·√d̄`.
    Multiplier(f64),
    /// Used as is.
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    Nuclear,
    Group,
}

impl PenaltyChoice {
    pub fn resolve(&self, which: Penalty, avg_degree: f64) -> f64 {
        match *self {
            PenaltyChoice::Auto => {
                let c = match which {
                    Penalty::Nuclear => THEORY_C1,
                    Penalty::Group => THEORY_C2,
                };
                c * avg_degree.sqrt()
            }
            PenaltyChoice::Multiplier(c) => c * avg_degree.sqrt(),
            PenaltyChoice::Value(v) => v,
        }
    }
}

impl std::str::FromStr for PenaltyChoice {
    type Err = GsbmError;

    /// `auto`, `c<mult>` (e.g. `c10`) or a plain number.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || GsbmError::Config(format!("bad penalty `{s}` (expected auto, cX or a number)"));
        let choice = if s.eq_ignore_ascii_case("auto") {
            PenaltyChoice::Auto
        } else if let Some(rest) = s.strip_prefix('c').or_else(|| s.strip_prefix('C')) {
            PenaltyChoice::Multiplier(rest.parse().map_err(|_| bad())?)
        } else {
            PenaltyChoice::Value(s.parse().map_err(|_| bad())?)
        };
        match choice {
            PenaltyChoice::Multiplier(x) | PenaltyChoice::Value(x) if !(x.is_finite() && x >= 0.0) => Err(bad()),
            c => Ok(c),
        }
    }
}

impl std::fmt::Display for PenaltyChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PenaltyChoice::Auto => f.write_str("auto"),
            PenaltyChoice::Multiplier(c) => write!(f, "c{c}"),
            PenaltyChoice::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Support of `Ŝ` plus the column statistic that characterises it at an
/// exact optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    pub detected: Vec<usize>,
    pub column_norms: Vec<f64>,
    /// `‖Ω_{·,j} ⊙ (A_{·,j} − L̂_{·,j} − Ŝ_{j,·})₊‖₂`
    pub certificate_lhs: Vec<f64>,
    /// `λ₂/2`
    pub threshold: f64,
    pub zero_tol: f64,
}

impl OutlierReport {
    pub fn is_detected(&self, j: usize) -> bool {
        self.column_norms[j] > self.zero_tol
    }

    pub fn certificate_flags(&self) -> Vec<bool> {
        self.certificate_lhs.iter().map(|&x| x > self.threshold).collect()
    }

    /// Fraction of nodes on which support and certificate agree.
    pub fn certificate_agreement(&self) -> f64 {
        let n = self.column_norms.len();
        if n == 0 {
            return 1.0;
        }
        let flags = self.certificate_flags();
        let agree = (0..n).filter(|&j| self.is_detected(j) == flags[j]).count();
        agree as f64 / n as f64
    }
}

/// `1e-10·√n`: the prox step writes exact zeros, this only absorbs rounding.
pub fn default_zero_tol(n: usize) -> f64 {
    1e-10 * (n as f64).sqrt()
}

fn check_fit_shape(fit: &FitResult, a: &SymMatrix, omega: &SymMatrix) -> Result<()> {
    let n = fit.n();
    if a.n() != n || omega.n() != n {
        return Err(GsbmError::shape(
            format!("graph on {n} nodes"),
            format!("A {0}x{0}, Omega {1}x{1}", a.n(), omega.n()),
        ));
    }
    Ok(())
}

/// Per-column `‖Ω_{·,j} ⊙ (A_{·,j} − L̂_{·,j} − Ŝ_{j,·})₊‖₂`.
pub fn certificate_lhs(fit: &FitResult, a: &SymMatrix, omega: &SymMatrix) -> Result<Vec<f64>> {
    check_fit_shape(fit, a, omega)?;
    let n = fit.n();
    let mut acc = vec![0.0; n];
    for i in 0..n {
        for (j, a_ij) in acc.iter_mut().enumerate() {
            if omega.get(i, j) == 0.0 {
                continue;
            }
            let r = a.get(i, j) - fit.l_hat.get(i, j) - fit.s_hat.get(j, i);
            if r > 0.0 {
                *a_ij += r * r;
            }
        }
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

/// Estimated outliers `{ j : ‖Ŝ_{·,j}‖₂ > zero_tol }`, with the certificate
/// evaluated against `λ₂/2` from the fit's own configuration.
pub fn detect_outliers(fit: &FitResult, a: &SymMatrix, omega: &SymMatrix, zero_tol: Option<f64>) -> Result<OutlierReport> {
    let zero_tol = zero_tol.unwrap_or_else(|| default_zero_tol(fit.n()));
    let norms = column_norms(&fit.s_hat);
    let detected = norms
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > zero_tol)
        .map(|(j, _)| j)
        .collect();
    Ok(OutlierReport {
        detected,
        column_norms: norms,
        certificate_lhs: certificate_lhs(fit, a, omega)?,
        threshold: 0.5 * fit.config.lambda2,
        zero_tol,
    })
}

/// Per-node flag `lhs_j > λ₂/2 + tol`.
pub fn kkt_certificate(fit: &FitResult, a: &SymMatrix, omega: &SymMatrix, lambda2: f64, tol: f64) -> Result<Vec<bool>> {
    let threshold = 0.5 * lambda2 + tol;
    Ok(certificate_lhs(fit, a, omega)?.into_iter().map(|x| x > threshold).collect())
}

/// Scores for unordered node pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub pairs: Vec<(usize, usize)>,
    pub scores: Vec<f64>,
}

fn check_pairs(pairs: &[(usize, usize)], n: usize) -> Result<()> {
    for &(i, j) in pairs {
        if i == j {
            return Err(GsbmError::Input(format!("diagonal pair ({i},{j}) cannot be scored")));
        }
        if i >= n || j >= n {
            return Err(GsbmError::Input(format!("pair ({i},{j}) out of range for {n} nodes")));
        }
    }
    Ok(())
}

/// Unobserved off-diagonal dyads `(i, j)`, `i < j`.
pub fn unobserved_pairs(omega: &SymMatrix) -> Vec<(usize, usize)> {
    let n = omega.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if omega.get(i, j) == 0.0 {
                out.push((i, j));
            }
        }
    }
    out
}

/// `clamp_[0,1](L̂_ij + Ŝ_ij + Ŝ_ji)`; `L̂` is read as `(L̂_ij + L̂_ji)/2` so
/// scores are symmetric even for a slightly asymmetric loaded fit.
pub fn predict_links(fit: &FitResult, pairs: &[(usize, usize)]) -> Result<Prediction> {
    check_pairs(pairs, fit.n())?;
    let (l, s) = (&fit.l_hat, &fit.s_hat);
    let scores = pairs
        .iter()
        .map(|&(i, j)| {
            let lij = 0.5 * (l.get(i, j) + l.get(j, i));
            (lij + (s.get(i, j) + s.get(j, i))).clamp(0.0, 1.0)
        })
        .collect();
    Ok(Prediction {
        pairs: pairs.to_vec(),
        scores,
    })
}

/// Observed edge density `Σ Ω⊙A / Σ Ω` for every queried pair.
pub fn baseline_average_degree(a: &SymMatrix, omega: &SymMatrix, pairs: &[(usize, usize)]) -> Result<Prediction> {
    check_pairs(pairs, a.n())?;
    let observed: f64 = omega.as_slice().iter().sum();
    if observed == 0.0 {
        return Err(GsbmError::Config("mask has no observed entries".into()));
    }
    let edges: f64 = a.as_slice().iter().zip(omega.as_slice()).map(|(x, w)| x * w).sum();
    let density = edges / observed;
    Ok(Prediction {
        pairs: pairs.to_vec(),
        scores: vec![density; pairs.len()],
    })
}

/// Two-way split from the signs of the second eigenvector of `L̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Communities {
    /// `Some(0)` for positive coordinates, `Some(1)` for negative ones,
    /// `None` for nodes reported as outliers.
    pub labels: Vec<Option<usize>>,
    pub eigenvalue: f64,
    /// The second eigenvalue is repeated, so the split is arbitrary.
    pub degenerate: bool,
}

/// Labels every non-outlier node by the sign of its coordinate in the
/// eigenvector of the second-largest eigenvalue of `L̂` (for symmetric `L̂`
/// the transpose makes no difference).
pub fn spectral_communities(fit: &FitResult, outliers: &[usize]) -> Result<Communities> {
    let pair: EigenPair = eigenvector_k(&fit.l_hat, 2, EIGEN_TOL)?;
    let labels = pair
        .vector
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if outliers.contains(&i) {
                None
            } else if x >= 0.0 {
                Some(0)
            } else {
                Some(1)
            }
        })
        .collect();
    Ok(Communities {
        labels,
        eigenvalue: pair.value,
        degenerate: pair.degenerate,
    })
}

/// Leading `k` eigenvectors of `L̂`, for callers that cluster with more than
/// two groups themselves.
pub fn spectral_embedding(fit: &FitResult, k: usize) -> Result<Vec<EigenPair>> {
    top_eigenvectors(&fit.l_hat, k, EIGEN_TOL)
}

/// Misclassified nodes between two 2-way labelings, minimised over the label
/// swap. Nodes unlabeled on either side are skipped.
pub fn two_way_misclassified(estimated: &[Option<usize>], truth: &[Option<usize>]) -> usize {
    let (mut same, mut swapped) = (0, 0);
    for (e, t) in estimated.iter().zip(truth) {
        if let (Some(e), Some(t)) = (*e, *t) {
            let (e, t) = (e.min(1), t.min(1));
            if e != t {
                same += 1;
            }
            if 1 - e != t {
                swapped += 1;
            }
        }
    }
    same.min(swapped)
}
