mod common;

use std::collections::BTreeSet;

use common::*;
use gsbm_core::harness::{aggregate, detection_metrics, run_experiment, run_replication, summary_csv};
use gsbm_core::inference::{detect_outliers, predict_links};
use gsbm_core::linalg::{group_norm_21, masked_residual, symmetric_eigen};
use gsbm_core::{DenseMatrix, ExperimentSpec, FitResult, OutlierConfig, Scenario, SolverConfig, SymMatrix};
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| DenseMatrix::from_vec(n, n, v).unwrap())
}

fn sym(n: usize) -> impl Strategy<Value = SymMatrix> {
    matrix(n).prop_map(|m| SymMatrix::symmetrize(&m))
}

fn binary(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(any::<bool>(), n * n)
        .prop_map(move |v| SymMatrix::from_upper(n, |i, j| if i != j && v[i * n + j] { 1.0 } else { 0.0 }))
}

fn fit_of(l: SymMatrix, s: DenseMatrix) -> FitResult {
    let n = l.n();
    FitResult {
        l_hat: l,
        s_hat: s,
        radius: 0.0,
        objective_trace: vec![0.0],
        iterations: 0,
        converged: true,
        config: SolverConfig::new(1.0, 1.0),
        labels: (0..n).map(|i| i.to_string()).collect(),
        steps: Vec::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_is_affine_in_parameters(a in binary(5), omega in binary(5), l1 in matrix(5), l2 in matrix(5), s in matrix(5), c in -3.0f64..3.0) {
        // R(L1 + c·L2) = R(L1) + c·(R(L2) − R(0)).
        let zero = DenseMatrix::zeros(5, 5);
        let r = |l: &DenseMatrix| masked_residual(&a, &omega, l, &s).unwrap();
        let lhs = r(&l1.add(&l2.scale(c)));
        let rhs = r(&l1).add(&r(&l2).sub(&r(&zero)).scale(c));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn group_norm_is_a_norm(x in matrix(5), y in matrix(5), c in -4.0f64..4.0) {
        prop_assert!(group_norm_21(&x.add(&y)) <= group_norm_21(&x) + group_norm_21(&y) + 1e-12);
        prop_assert!((group_norm_21(&x.scale(c)) - c.abs() * group_norm_21(&x)).abs() <= 1e-12);
    }

    #[test]
    fn eigenvalues_bound_rayleigh_quotients(m in sym(6), v in prop::collection::vec(-1.0f64..1.0, 6)) {
        prop_assume!(norm(&v) > 1e-3);
        let eig = symmetric_eigen(&m, 1e-10).unwrap();
        let mv = m.as_dense().matvec(&v);
        let q = v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>();
        prop_assert!(q <= eig[0].value + 1e-9 && q >= eig[5].value - 1e-9);
    }

    #[test]
    fn detection_thresholding_is_monotone(s in matrix(6), scale in -3i32..3) {
        let f = fit_of(SymMatrix::zeros(6), s);
        let a = SymMatrix::zeros(6);
        let omega = SymMatrix::zeros(6);
        let base = 0.5;
        let tight = detect_outliers(&f, &a, &omega, Some(base * 10f64.powi(scale))).unwrap();
        let loose = detect_outliers(&f, &a, &omega, Some(base * 10f64.powi(scale + 1))).unwrap();
        let (t, l): (BTreeSet<_>, BTreeSet<_>) = (tight.detected.into_iter().collect(), loose.detected.into_iter().collect());
        prop_assert!(l.is_subset(&t));
        for j in t.difference(&l) {
            let norm_j = tight.column_norms[*j];
            prop_assert!(norm_j > base * 10f64.powi(scale) && norm_j <= base * 10f64.powi(scale + 1));
        }
    }

    #[test]
    fn scores_symmetric_and_in_unit_interval(l in sym(6), s in matrix(6), i in 0usize..6, j in 0usize..6) {
        prop_assume!(i != j);
        let f = fit_of(l, s);
        let p = predict_links(&f, &[(i, j), (j, i)]).unwrap();
        prop_assert_eq!(p.scores[0], p.scores[1]);
        prop_assert!((0.0..=1.0).contains(&p.scores[0]));
    }

    #[test]
    fn detection_metrics_match_set_arithmetic(d in prop::collection::btree_set(0usize..30, 0..12), t in prop::collection::btree_set(0usize..30, 0..12)) {
        let dv: Vec<usize> = d.iter().copied().collect();
        let tv: Vec<usize> = t.iter().copied().collect();
        let (power, fdr) = detection_metrics(&dv, &tv, 30).unwrap();
        let hits = d.intersection(&t).count() as f64;
        let want_power = if t.is_empty() { if d.is_empty() { 1.0 } else { 0.0 } } else { hits / t.len() as f64 };
        let want_fdr = d.difference(&t).count() as f64 / d.len().max(1) as f64;
        prop_assert_eq!(power, want_power);
        prop_assert_eq!(fdr, want_fdr);
    }
}

fn small_spec() -> ExperimentSpec {
    let mut spec = ExperimentSpec::desk(Scenario::Prediction, OutlierConfig::hubs(2, 0.5), 77);
    spec.sbm.n_inliers = 40;
    spec.replications = 4;
    spec
}

#[test]
fn replication_order_does_not_matter() {
    let spec = small_spec();
    let forward: Vec<_> = (0..4).map(|r| run_replication(&spec, r)).collect();
    let backward: Vec<_> = (0..4).rev().map(|r| run_replication(&spec, r)).collect();
    assert_eq!(aggregate(&spec, forward), aggregate(&spec, backward));
}

#[test]
fn experiments_are_deterministic_across_thread_counts() {
    let mut one = small_spec();
    one.workers = Some(1);
    let mut three = small_spec();
    three.workers = Some(3);
    let (r1, r3) = (run_experiment(&one).unwrap(), run_experiment(&three).unwrap());
    assert_eq!(summary_csv(std::slice::from_ref(&r1)), summary_csv(std::slice::from_ref(&r3)));
    assert_eq!(r1.per_rep, r3.per_rep);
}
