//! Seeded replication runner for detection and link-prediction experiments.
//!
//! Replication `r` of an experiment draws every random quantity from seeds
//! derived from `(base_seed, r)`, so replications are independent of each
//! other and of the order (or thread) they run on. Aggregates are reduced in
//! replication order.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GsbmError, Result};
use crate::inference::{
    baseline_average_degree, detect_outliers, predict_links, unobserved_pairs, Penalty, PenaltyChoice, Prediction,
};
use crate::linalg::SymMatrix;
use crate::sim::{build_ground_truth, derive_seed, sample_adjacency, sample_mask, OutlierConfig, OutlierKind, SbmConfig, Stream};
use crate::solver::{fit, SolverConfig};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "GSBM_THREADS";

/// Detection experiments: `λ₁ = C₁√d̄`, `λ₂ = C₂√d̄` with these multipliers.
pub const DETECTION_C1: f64 = 6.0;
pub const DETECTION_C2: f64 = 2.15;
/// Link-prediction experiments use a lighter nuclear penalty so that the
/// community components of `L̂` survive shrinkage.
pub const PREDICTION_C1: f64 = 1.4;
pub const PREDICTION_C2: f64 = 2.15;

/// Penalties used by a scenario unless overridden.
pub fn default_penalties(scenario: Scenario) -> (PenaltyChoice, PenaltyChoice) {
    match scenario {
        Scenario::Hub | Scenario::Mixed => (
            PenaltyChoice::Multiplier(DETECTION_C1),
            PenaltyChoice::Multiplier(DETECTION_C2),
        ),
        Scenario::Prediction => (
            PenaltyChoice::Multiplier(PREDICTION_C1),
            PenaltyChoice::Multiplier(PREDICTION_C2),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Hub,
    Mixed,
    /// Link prediction under missing data; the outlier type comes from the
    /// outlier configuration.
    Prediction,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::Hub => "hub",
            Scenario::Mixed => "mixed",
            Scenario::Prediction => "prediction",
        })
    }
}

impl std::str::FromStr for Scenario {
    type Err = GsbmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hub" | "hubs" => Ok(Scenario::Hub),
            "mixed" => Ok(Scenario::Mixed),
            "prediction" | "predict" => Ok(Scenario::Prediction),
            other => Err(GsbmError::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub sbm: SbmConfig,
    pub outlier: OutlierConfig,
    pub p_observe: f64,
    pub replications: usize,
    pub base_seed: u64,
    /// Non-penalty solver settings; the penalties below replace
    /// `lambda1`/`lambda2` per replication.
    pub solver: SolverConfig,
    pub lambda1: PenaltyChoice,
    pub lambda2: PenaltyChoice,
    /// Worker threads; `None` reads `GSBM_THREADS`, then uses all cores.
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    /// Three balanced communities of 200 inliers (`p_in = 0.5`,
    /// `p_out = 0.2`), 20 replications, the scenario's default penalties.
    /// Observation is full except for prediction, which hides 20% of dyads.
    pub fn desk(scenario: Scenario, outlier: OutlierConfig, base_seed: u64) -> Self {
        let (lambda1, lambda2) = default_penalties(scenario);
        ExperimentSpec {
            scenario,
            sbm: SbmConfig {
                n_inliers: 200,
                k_communities: 3,
                p_in: 0.5,
                p_out: 0.2,
                seed: base_seed,
            },
            outlier,
            p_observe: if scenario == Scenario::Prediction { 0.8 } else { 1.0 },
            replications: 20,
            base_seed,
            solver: SolverConfig::new(1.0, 1.0),
            lambda1,
            lambda2,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(GsbmError::Config("replications must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p_observe) {
            return Err(GsbmError::Config(format!(
                "p_observe must be in [0,1], got {}",
                self.p_observe
            )));
        }
        self.sbm.validate()?;
        self.outlier.validate()
    }

    /// The `π` parameter relevant for the outlier kind.
    pub fn signal(&self) -> f64 {
        match self.outlier.kind {
            OutlierKind::Hub => self.outlier.pi_hub,
            OutlierKind::Mixed => self.outlier.pi_mix,
        }
    }
}

/// `(power, fdr)` of a detected set against the true outliers.
///
/// power = |D ∩ T| / |T| (1 when both are empty, 0 when only `T` is),
/// fdr = |D \ T| / max(1, |D|).
pub fn detection_metrics(detected: &[usize], truth: &[usize], n: usize) -> Result<(f64, f64)> {
    if let Some(&bad) = detected.iter().chain(truth).find(|&&j| j >= n) {
        return Err(GsbmError::Input(format!("node {bad} out of range for {n} nodes")));
    }
    let hits = detected.iter().filter(|j| truth.contains(j)).count();
    let power = if truth.is_empty() {
        if detected.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        hits as f64 / truth.len() as f64
    };
    let false_hits = detected.len() - hits;
    let fdr = false_hits as f64 / detected.len().max(1) as f64;
    Ok((power, fdr))
}

/// Mean squared error of scores against the true probabilities.
pub fn prediction_error(pred: &Prediction, truth_p: &SymMatrix) -> Result<f64> {
    if pred.pairs.len() != pred.scores.len() {
        return Err(GsbmError::Input("pairs and scores differ in length".into()));
    }
    if pred.pairs.is_empty() {
        return Err(GsbmError::Input("no pairs to score".into()));
    }
    let n = truth_p.n();
    let mut sum = 0.0;
    for (&(i, j), &score) in pred.pairs.iter().zip(&pred.scores) {
        if i >= n || j >= n {
            return Err(GsbmError::Input(format!("pair ({i},{j}) out of range")));
        }
        let d = score - truth_p.get(i, j);
        sum += d * d;
    }
    Ok(sum / pred.pairs.len() as f64)
}

/// One replication's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRow {
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub power: f64,
    pub fdr: f64,
    pub n_detected: usize,
    pub pred_mse_model: Option<f64>,
    pub pred_mse_baseline: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: Scenario,
    pub kind: OutlierKind,
    pub s: usize,
    pub signal: f64,
    pub p_observe: f64,
    pub power: f64,
    pub fdr: f64,
    pub pred_mse_model: Option<f64>,
    pub pred_mse_baseline: Option<f64>,
    pub failures: usize,
    pub per_rep: Vec<RepRow>,
}

fn failed_row(rep: usize, seed: u64, n: usize, err: &GsbmError) -> RepRow {
    RepRow {
        rep,
        seed,
        n,
        lambda1: f64::NAN,
        lambda2: f64::NAN,
        power: f64::NAN,
        fdr: f64::NAN,
        n_detected: 0,
        pred_mse_model: None,
        pred_mse_baseline: None,
        iterations: 0,
        converged: false,
        final_objective: f64::NAN,
        error: Some(err.to_string()),
    }
}

/// Generates, fits and scores replication `rep`.
pub fn run_replication(spec: &ExperimentSpec, rep: usize) -> RepRow {
    let seed = derive_seed(spec.base_seed, Stream::Replication, rep as u64);
    let n = spec.sbm.n_inliers + spec.outlier.s;
    match replicate(spec, rep, seed) {
        Ok(row) => row,
        Err(e) => failed_row(rep, seed, n, &e),
    }
}

fn replicate(spec: &ExperimentSpec, rep: usize, seed: u64) -> Result<RepRow> {
    let sbm = SbmConfig { seed, ..spec.sbm };
    let truth = build_ground_truth(&sbm, &spec.outlier)?;
    let n = truth.n();
    let a = sample_adjacency(&truth, seed);
    let omega = sample_mask(n, spec.p_observe, seed)?;

    let d = crate::inference::average_observed_degree(&a, &omega)?;
    let mut cfg = spec.solver;
    cfg.lambda1 = spec.lambda1.resolve(Penalty::Nuclear, d);
    cfg.lambda2 = spec.lambda2.resolve(Penalty::Group, d);
    let fitted = fit(&a, &omega, &cfg)?;

    let report = detect_outliers(&fitted, &a, &omega, None)?;
    let (power, fdr) = detection_metrics(&report.detected, &truth.outliers, n)?;

    let missing = unobserved_pairs(&omega);
    let (pred_mse_model, pred_mse_baseline) = if missing.is_empty() {
        (None, None)
    } else {
        let model = prediction_error(&predict_links(&fitted, &missing)?, &truth.p)?;
        let base = prediction_error(&baseline_average_degree(&a, &omega, &missing)?, &truth.p)?;
        (Some(model), Some(base))
    };

    Ok(RepRow {
        rep,
        seed,
        n,
        lambda1: cfg.lambda1,
        lambda2: cfg.lambda2,
        power,
        fdr,
        n_detected: report.detected.len(),
        pred_mse_model,
        pred_mse_baseline,
        iterations: fitted.iterations,
        converged: fitted.converged,
        final_objective: fitted.final_objective(),
        error: None,
    })
}

/// Worker count: explicit value, else `GSBM_THREADS`, else all cores.
pub fn worker_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Aggregates rows (in the given order) into a report.
pub fn aggregate(spec: &ExperimentSpec, mut rows: Vec<RepRow>) -> MetricsReport {
    rows.sort_by_key(|r| r.rep);
    let ok: Vec<&RepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    MetricsReport {
        scenario: spec.scenario,
        kind: spec.outlier.kind,
        s: spec.outlier.s,
        signal: spec.signal(),
        p_observe: spec.p_observe,
        power: mean(ok.iter().map(|r| r.power)).unwrap_or(f64::NAN),
        fdr: mean(ok.iter().map(|r| r.fdr)).unwrap_or(f64::NAN),
        pred_mse_model: mean(ok.iter().filter_map(|r| r.pred_mse_model)),
        pred_mse_baseline: mean(ok.iter().filter_map(|r| r.pred_mse_baseline)),
        failures: rows.len() - ok.len(),
        per_rep: rows,
    }
}

/// Runs every replication (in parallel) and aggregates in replication order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<MetricsReport> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(spec.workers))
        .build()
        .map_err(|e| GsbmError::Config(format!("cannot build worker pool: {e}")))?;
    let rows: Vec<RepRow> = pool.install(|| {
        (0..spec.replications)
            .into_par_iter()
            .map(|rep| run_replication(spec, rep))
            .collect()
    });
    Ok(aggregate(spec, rows))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub const SUMMARY_HEADER: &str = "scenario,kind,s,pi,p_observe,replications,failures,power,fdr,pred_mse_model,pred_mse_baseline";

pub const REPS_HEADER: &str = "scenario,kind,s,pi,rep,seed,n,lambda1,lambda2,power,fdr,n_detected,\
pred_mse_model,pred_mse_baseline,iterations,converged,final_objective,error";

impl MetricsReport {
    pub fn summary_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.kind,
            self.s,
            self.signal,
            self.p_observe,
            self.per_rep.len(),
            self.failures,
            self.power,
            self.fdr,
            opt(self.pred_mse_model),
            opt(self.pred_mse_baseline)
        )
    }

    pub fn rep_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.per_rep {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.scenario,
                self.kind,
                self.s,
                self.signal,
                r.rep,
                r.seed,
                r.n,
                r.lambda1,
                r.lambda2,
                r.power,
                r.fdr,
                r.n_detected,
                opt(r.pred_mse_model),
                opt(r.pred_mse_baseline),
                r.iterations,
                r.converged,
                r.final_objective,
                r.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
            );
        }
        out
    }
}

/// `summary.csv` content for a set of reports.
pub fn summary_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.summary_row());
        out.push('\n');
    }
    out
}

/// `reps.csv` content for a set of reports.
pub fn reps_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from(REPS_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.rep_rows());
    }
    out
}
