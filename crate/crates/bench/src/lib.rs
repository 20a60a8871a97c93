//! Fixtures shared by the solver benchmarks.

use gsbm_core::inference::scaled_lambdas;
use gsbm_core::sim::{build_ground_truth, sample_adjacency, sample_mask};
use gsbm_core::{OutlierConfig, SbmConfig, SolverConfig, SymMatrix};

/// Seeded planted problem: three communities (0.5 / 0.2), `s` hubs with
/// `π_hub = 0.5`, dyads observed with probability `p_observe`.
pub struct Problem {
    pub a: SymMatrix,
    pub omega: SymMatrix,
    pub cfg: SolverConfig,
}

impl Problem {
    /// `c1`, `c2` are the penalty multipliers of `√d̄`.
    pub fn planted(n: usize, s: usize, p_observe: f64, c1: f64, c2: f64, seed: u64) -> Problem {
        let sbm = SbmConfig {
            n_inliers: n - s,
            k_communities: 3,
            p_in: 0.5,
            p_out: 0.2,
            seed,
        };
        let truth = build_ground_truth(&sbm, &OutlierConfig::hubs(s, 0.5)).expect("valid config");
        let a = sample_adjacency(&truth, seed);
        let omega = sample_mask(n, p_observe, seed).expect("valid probability");
        let lam = scaled_lambdas(&a, &omega, c1, c2).expect("non-empty mask");
        Problem {
            cfg: SolverConfig::new(lam.lambda1, lam.lambda2),
            a,
            omega,
        }
    }
}
