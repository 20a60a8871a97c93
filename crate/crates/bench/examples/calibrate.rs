//! Grid over penalty multipliers on calibration seeds.
//!
//! Usage: `calibrate <kind> <s> <pi> <reps> <c1,...> <c2,...> [p_observe]`

use std::time::Instant;

use gsbm_core::harness::{run_experiment, ExperimentSpec, Scenario};
use gsbm_core::{OutlierConfig, OutlierKind, PenaltyChoice};

const CALIBRATION_SEED: u64 = 0xCA11_B4A7E;

fn list(arg: &str) -> Vec<f64> {
    arg.split(',').map(|t| t.parse().expect("number")).collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kind: OutlierKind = args[1].parse().expect("hub|mixed");
    let s: usize = args[2].parse().unwrap();
    let pi: f64 = args[3].parse().unwrap();
    let reps: usize = args[4].parse().unwrap();
    let p_observe: f64 = args.get(7).map(|a| a.parse().unwrap()).unwrap_or(1.0);
    let outlier = match kind {
        OutlierKind::Hub => OutlierConfig::hubs(s, pi),
        OutlierKind::Mixed => OutlierConfig::mixed(s, pi),
    };
    for c1 in list(&args[5]) {
        for c2 in list(&args[6]) {
            let scenario = if p_observe < 1.0 {
                Scenario::Prediction
            } else if kind == OutlierKind::Hub {
                Scenario::Hub
            } else {
                Scenario::Mixed
            };
            let mut spec = ExperimentSpec::desk(scenario, outlier, CALIBRATION_SEED);
            spec.replications = reps;
            spec.p_observe = p_observe;
            spec.workers = Some(1);
            spec.lambda1 = PenaltyChoice::Multiplier(c1);
            spec.lambda2 = PenaltyChoice::Multiplier(c2);
            if let Ok(t) = std::env::var("REL_TOL") {
                spec.solver = spec.solver.with_rel_tol(t.parse().unwrap());
            }
            if let Ok(t) = std::env::var("MAX_ITERS") {
                spec.solver = spec.solver.with_max_iters(t.parse().unwrap());
            }
            let t = Instant::now();
            let r = run_experiment(&spec).expect("experiment");
            let iters: f64 = r.per_rep.iter().map(|x| x.iterations as f64).sum::<f64>() / reps as f64;
            let conv = r.per_rep.iter().filter(|x| x.converged).count();
            let wins = r
                .per_rep
                .iter()
                .filter(|x| matches!((x.pred_mse_model, x.pred_mse_baseline), (Some(m), Some(b)) if m < b))
                .count();
            println!(
                "c1={c1} c2={c2} power={:.3} fdr={:.3} mse={:?} base={:?} wins={wins} iters={iters:.0} conv={conv}/{reps} fail={} {:.1}s",
                r.power, r.fdr, r.pred_mse_model, r.pred_mse_baseline, r.failures, t.elapsed().as_secs_f64()
            );
        }
    }
}
