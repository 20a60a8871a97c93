//! Synthetic networks: balanced stochastic block model inliers plus hub or
//! mixed-membership outliers, Bernoulli adjacency sampling and uniform
//! missing-data masks.
//!
//! Node layout: inliers occupy indices `0..n_inliers`, outliers the `s`
//! indices after them.
//!
//! Randomness comes from `ChaCha8Rng` seeded through [`derive_seed`], so a
//! given `(seed, stream, index)` triple produces the same numbers on every
//! platform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GsbmError, Result};
use crate::linalg::{DenseMatrix, SymMatrix};

/// Named sub-streams so that generating, say, a mask never consumes numbers
/// meant for the adjacency draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Communities = 1,
    Outliers = 2,
    Adjacency = 3,
    Mask = 4,
    Replication = 5,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic seed for sub-stream `stream`, item `index`, of `base`.
/// Chained SplitMix64 finalisers, so nearby inputs give unrelated seeds.
pub fn derive_seed(base: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream as u64) ^ index)
}

pub fn rng_for(base: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, stream, index))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub n_inliers: usize,
    pub k_communities: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl SbmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_communities == 0 {
            return Err(GsbmError::Config("k_communities must be >= 1".into()));
        }
        if !(0.0 <= self.p_out && self.p_out <= self.p_in && self.p_in <= 1.0) {
            return Err(GsbmError::Config(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierKind {
    Hub,
    Mixed,
}

impl std::str::FromStr for OutlierKind {
    type Err = GsbmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hub" | "hubs" => Ok(OutlierKind::Hub),
            "mixed" | "mix" => Ok(OutlierKind::Mixed),
            other => Err(GsbmError::Config(format!("unknown outlier kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for OutlierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutlierKind::Hub => "hub",
            OutlierKind::Mixed => "mixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierConfig {
    pub kind: OutlierKind,
    pub s: usize,
    /// Hubs connect with probability drawn uniformly from `[pi_hub, 1]`.
    pub pi_hub: f64,
    /// Mixed-membership outliers connect to their two communities with this
    /// probability (and with `p_out` elsewhere).
    pub pi_mix: f64,
}

impl OutlierConfig {
    pub fn none() -> Self {
        OutlierConfig {
            kind: OutlierKind::Hub,
            s: 0,
            pi_hub: 0.0,
            pi_mix: 0.0,
        }
    }

    pub fn hubs(s: usize, pi_hub: f64) -> Self {
        OutlierConfig {
            kind: OutlierKind::Hub,
            s,
            pi_hub,
            pi_mix: 0.0,
        }
    }

    pub fn mixed(s: usize, pi_mix: f64) -> Self {
        OutlierConfig {
            kind: OutlierKind::Mixed,
            s,
            pi_hub: 0.0,
            pi_mix,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("pi_hub", self.pi_hub), ("pi_mix", self.pi_mix)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GsbmError::Config(format!("{name} must be in [0,1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Simulator output with everything needed to score an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Edge probabilities `E[A]` (zero diagonal).
    pub p: SymMatrix,
    pub l_star: SymMatrix,
    pub s_star: DenseMatrix,
    /// Community of each inlier, indexed by node.
    pub communities: Vec<usize>,
    /// For mixed-membership outliers, the two communities they attach to.
    pub outlier_communities: Vec<Vec<usize>>,
    pub outliers: Vec<usize>,
    pub sbm: SbmConfig,
    pub outlier_config: OutlierConfig,
}

impl GroundTruth {
    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn inliers(&self) -> std::ops::Range<usize> {
        0..self.sbm.n_inliers
    }
}

/// Balanced community labels: sizes differ by at most one, assigned by index
/// and then shuffled.
pub fn balanced_labels(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|i| i * k / n.max(1)).collect();
    labels.shuffle(rng);
    labels
}

pub fn build_ground_truth(sbm: &SbmConfig, out: &OutlierConfig) -> Result<GroundTruth> {
    sbm.validate()?;
    out.validate()?;
    let n_in = sbm.n_inliers;
    let n = n_in + out.s;
    let k = sbm.k_communities;

    let communities = balanced_labels(n_in, k, &mut rng_for(sbm.seed, Stream::Communities, 0));

    let l_star = SymMatrix::from_upper(n, |i, j| {
        if i >= n_in || j >= n_in {
            0.0
        } else if communities[i] == communities[j] {
            sbm.p_in
        } else {
            sbm.p_out
        }
    });

    let mut s_star = DenseMatrix::zeros(n, n);
    let mut outlier_communities = Vec::with_capacity(out.s);
    let mut rng = rng_for(sbm.seed, Stream::Outliers, 0);
    for j in n_in..n {
        let chosen: Vec<usize> = match out.kind {
            OutlierKind::Hub => Vec::new(),
            OutlierKind::Mixed => {
                let mut all: Vec<usize> = (0..k).collect();
                all.shuffle(&mut rng);
                all.truncate(2.min(k));
                all.sort_unstable();
                all
            }
        };
        // Column j holds the outlier's probabilities toward inliers and toward
        // earlier outliers (upper triangle only, so S* + S*ᵀ counts each dyad once).
        for i in 0..j {
            let prob = match out.kind {
                OutlierKind::Hub => out.pi_hub + (1.0 - out.pi_hub) * rng.gen::<f64>(),
                OutlierKind::Mixed => {
                    if communities.get(i).is_some_and(|c| chosen.contains(c)) {
                        out.pi_mix
                    } else {
                        sbm.p_out
                    }
                }
            };
            s_star.set(i, j, prob);
        }
        outlier_communities.push(chosen);
    }

    let p = SymMatrix::from_upper(n, |i, j| {
        if i == j {
            0.0
        } else {
            l_star.get(i, j) + (s_star.get(i, j) + s_star.get(j, i))
        }
    });

    Ok(GroundTruth {
        p,
        l_star,
        s_star,
        communities,
        outlier_communities,
        outliers: (n_in..n).collect(),
        sbm: *sbm,
        outlier_config: *out,
    })
}

/// Independent Bernoulli draws over the upper triangle, mirrored.
fn bernoulli_sym(n: usize, rng: &mut ChaCha8Rng, mut prob: impl FnMut(usize, usize) -> f64) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < prob(i, j) {
                m.set_sym(i, j, 1.0);
            }
        }
    }
    m
}

/// `A_ij ~ Bernoulli(P_ij)` for `i < j`, symmetric with zero diagonal.
pub fn sample_adjacency(truth: &GroundTruth, seed: u64) -> SymMatrix {
    let mut rng = rng_for(seed, Stream::Adjacency, 0);
    bernoulli_sym(truth.n(), &mut rng, |i, j| truth.p.get(i, j))
}

/// Uniform observation mask: each dyad observed independently with
/// probability `p_observe`; zero diagonal.
pub fn sample_mask(n: usize, p_observe: f64, seed: u64) -> Result<SymMatrix> {
    if !(0.0..=1.0).contains(&p_observe) {
        return Err(GsbmError::Config(format!("p_observe must be in [0,1], got {p_observe}")));
    }
    let mut rng = rng_for(seed, Stream::Mask, 0);
    Ok(bernoulli_sym(n, &mut rng, |_, _| p_observe))
}
