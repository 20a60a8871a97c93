use gsbm_core::harness::{run_experiment, DETECTION_C1, DETECTION_C2, PREDICTION_C1, PREDICTION_C2};
use gsbm_core::inference::{
    baseline_average_degree, default_lambdas, detect_outliers, kkt_certificate, predict_links, scaled_lambdas,
    spectral_communities, two_way_misclassified, unobserved_pairs,
};
use gsbm_core::sim::{build_ground_truth, sample_adjacency, sample_mask};
use gsbm_core::{fit, ExperimentSpec, OutlierConfig, SbmConfig, Scenario, SolverConfig, SymMatrix};

const SEED: u64 = 0x1F3E_2024;

fn full_mask(n: usize) -> SymMatrix {
    SymMatrix::from_upper(n, |i, j| if i == j { 0.0 } else { 1.0 })
}

#[test]
fn theory_penalties_examples() {
    // Ring where every node has degree 4.
    let n = 12;
    let a = SymMatrix::from_upper(n, |i, j| {
        let d = (j + n - i) % n;
        if d == 1 || d == 2 || d == n - 1 || d == n - 2 {
            1.0
        } else {
            0.0
        }
    });
    let lam = default_lambdas(&a, &full_mask(n)).unwrap();
    assert!((lam.lambda1 - 168.0).abs() < 1e-12 && (lam.lambda2 - 38.0).abs() < 1e-12);
    let empty = default_lambdas(&SymMatrix::zeros(n), &full_mask(n)).unwrap();
    assert!(empty.empty_graph && empty.lambda1 == 0.0 && empty.lambda2 == 0.0);
    assert!(default_lambdas(&a, &SymMatrix::zeros(n)).is_err());
}

#[test]
fn hub_outliers_detected_at_desk_scale() {
    let mut spec = ExperimentSpec::desk(Scenario::Hub, OutlierConfig::hubs(5, 0.8), SEED);
    spec.workers = Some(1);
    let report = run_experiment(&spec).unwrap();
    println!("power {:.3} fdr {:.3}", report.power, report.fdr);
    assert_eq!(report.failures, 0);
    assert!(report.power >= 0.85 && report.fdr <= 0.2);
}

#[test]
fn inliers_rarely_flagged() {
    let mut spec = ExperimentSpec::desk(Scenario::Hub, OutlierConfig::none(), SEED + 1);
    spec.workers = Some(1);
    let report = run_experiment(&spec).unwrap();
    let rate = report.per_rep.iter().map(|r| r.n_detected as f64 / r.n as f64).sum::<f64>() / report.per_rep.len() as f64;
    println!("mean false-flag rate {rate:.4}");
    assert!(rate <= 0.05);
}

#[test]
fn certificate_agrees_with_support() {
    let (mut agree, mut total) = (0, 0);
    for seed in 0..20 {
        let sbm = SbmConfig {
            n_inliers: 27,
            k_communities: 3,
            p_in: 0.5,
            p_out: 0.2,
            seed: SEED + seed,
        };
        let truth = build_ground_truth(&sbm, &OutlierConfig::hubs(3, 0.8)).unwrap();
        let a = sample_adjacency(&truth, SEED + seed);
        let omega = full_mask(30);
        let lam = scaled_lambdas(&a, &omega, DETECTION_C1, DETECTION_C2).unwrap();
        let cfg = SolverConfig::new(lam.lambda1, lam.lambda2)
            .with_rel_tol(1e-10)
            .with_max_iters(100_000);
        let f = fit(&a, &omega, &cfg).unwrap();
        assert!(f.converged);
        let report = detect_outliers(&f, &a, &omega, None).unwrap();
        let flags = kkt_certificate(&f, &a, &omega, cfg.lambda2, 0.0).unwrap();
        agree += (0..30).filter(|&j| flags[j] == report.is_detected(j)).count();
        total += 30;
    }
    let rate = agree as f64 / total as f64;
    println!("agreement {rate:.3}");
    assert!(rate >= 0.95);
}

#[test]
fn two_communities_recovered_by_sign() {
    for seed in 0..10 {
        let sbm = SbmConfig {
            n_inliers: 100,
            k_communities: 2,
            p_in: 0.5,
            p_out: 0.1,
            seed: SEED + seed,
        };
        let truth = build_ground_truth(&sbm, &OutlierConfig::none()).unwrap();
        let a = sample_adjacency(&truth, SEED + seed);
        let omega = full_mask(100);
        let lam = scaled_lambdas(&a, &omega, PREDICTION_C1, PREDICTION_C2).unwrap();
        let f = fit(&a, &omega, &SolverConfig::new(lam.lambda1, lam.lambda2)).unwrap();
        let outliers = detect_outliers(&f, &a, &omega, None).unwrap().detected;
        let comm = spectral_communities(&f, &outliers).unwrap();
        let truth_labels: Vec<Option<usize>> = truth.communities.iter().map(|&c| Some(c)).collect();
        let wrong = two_way_misclassified(&comm.labels, &truth_labels);
        let labelled = comm.labels.iter().filter(|l| l.is_some()).count();
        let agreement = 1.0 - wrong as f64 / 100.0;
        assert!(
            labelled >= 95 && agreement >= 0.95,
            "seed {seed}: agreement {agreement}, {labelled} labelled"
        );
    }
}

#[test]
fn prediction_beats_density_baseline() {
    for seed in 0..20 {
        let sbm = SbmConfig {
            n_inliers: 100,
            k_communities: 2,
            p_in: 0.5,
            p_out: 0.1,
            seed: SEED + seed,
        };
        let truth = build_ground_truth(&sbm, &OutlierConfig::none()).unwrap();
        let a = sample_adjacency(&truth, SEED + seed);
        let omega = sample_mask(100, 0.8, SEED + seed).unwrap();
        let lam = scaled_lambdas(&a, &omega, PREDICTION_C1, PREDICTION_C2).unwrap();
        let f = fit(&a, &omega, &SolverConfig::new(lam.lambda1, lam.lambda2)).unwrap();
        let pairs = unobserved_pairs(&omega);
        let mse = |scores: &[f64]| {
            pairs
                .iter()
                .zip(scores)
                .map(|(&(i, j), s)| (s - truth.p.get(i, j)).powi(2))
                .sum::<f64>()
                / pairs.len() as f64
        };
        let model = mse(&predict_links(&f, &pairs).unwrap().scores);
        let base = mse(&baseline_average_degree(&a, &omega, &pairs).unwrap().scores);
        assert!(model < base, "seed {seed}: model {model} vs baseline {base}");
    }
}
