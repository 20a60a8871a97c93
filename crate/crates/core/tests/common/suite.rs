//! Oracle-equivalence checks over random small instances. Each returns a
//! one-line summary on success and the first discrepancy on failure.

use gsbm_core::linalg::{top_singular_pair, DenseMatrix};
use gsbm_core::solver::{grad_l, grad_s, lmo_direction, prox_s_update, step_size};
use gsbm_core::{SolverConfig, SymMatrix};
use rand::Rng;

use super::*;

pub type Check = std::result::Result<String, String>;

pub const INSTANCES: usize = 100;

fn size(rng: &mut ChaCha8Rng) -> usize {
    rng.gen_range(6..=8)
}

fn instance(seed: u64) -> (ChaCha8Rng, usize, SymMatrix, SymMatrix) {
    let mut r = rng(seed);
    let n = size(&mut r);
    let a = random_binary(n, 0.5, &mut r);
    let omega = random_binary(n, 0.8, &mut r);
    (r, n, a, omega)
}

/// Prox step against a per-column one-dimensional search of
/// `‖x − v‖²/(2η) + λ₂‖x‖` along `x = t·v/‖v‖`, `t ∈ [0, ‖v‖]`.
pub fn prox_vs_scalar_search() -> Check {
    let mut worst = 0.0f64;
    for k in 0..INSTANCES {
        let mut r = rng(1000 + k as u64);
        let n = size(&mut r);
        let s_prev = random_dense(n, n, &mut r);
        let g = random_dense(n, n, &mut r).scale(3.0);
        let cfg = SolverConfig::new(1.0, r.gen_range(0.1..4.0));
        let out = prox_s_update(&s_prev, &g, &cfg);
        for j in 0..n {
            let v: Vec<f64> = (0..n).map(|i| s_prev.get(i, j) - cfg.eta * g.get(i, j)).collect();
            let vn = norm(&v);
            let h = |t: f64| (t - vn).powi(2) / (2.0 * cfg.eta) + cfg.lambda2 * t;
            let t = golden_min(h, 0.0, vn);
            for i in 0..n {
                let want = if vn > 0.0 { t * v[i] / vn } else { 0.0 };
                let d = (out.get(i, j) - want).abs();
                worst = worst.max(d);
                if d > 1e-6 {
                    return Err(format!("instance {k} col {j}: prox {} vs search {want}", out.get(i, j)));
                }
            }
            // The implementation is no worse than nearby points off the ray.
            let col: Vec<f64> = (0..n).map(|i| out.get(i, j)).collect();
            let obj =
                |x: &[f64]| x.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (2.0 * cfg.eta) + cfg.lambda2 * norm(x);
            let base = obj(&col);
            for _ in 0..10 {
                let probe: Vec<f64> = col.iter().map(|x| x + r.gen_range(-1e-3..1e-3)).collect();
                if obj(&probe) < base - 1e-12 {
                    return Err(format!("instance {k} col {j}: perturbation improves the prox objective"));
                }
            }
        }
    }
    Ok(format!("{INSTANCES} instances, max deviation {worst:.1e}"))
}

/// LMO output against 200 random feasible `(Z, R)` with `‖Z‖_* ≤ R ≤ R̄`.
pub fn lmo_vs_random_feasible() -> Check {
    let mut worst_gap = f64::NEG_INFINITY;
    for k in 0..INSTANCES {
        let mut r = rng(2000 + k as u64);
        let n = size(&mut r);
        let g = if k % 2 == 0 {
            random_sym(n, &mut r).into_dense().scale(2.0)
        } else {
            random_dense(n, n, &mut r).scale(2.0)
        };
        let sigma1 = jacobi_svd(&g).sigma[0];
        let lambda1 = r.gen_range(0.2..1.5) * sigma1;
        let r_bar = r.gen_range(0.0..5.0);
        let cfg = SolverConfig::new(lambda1, 1.0);
        let dir = lmo_direction(&g, r_bar, &cfg, 1e-12).map_err(|e| e.to_string())?;
        let value = dir.l_tilde.dot(&g) + lambda1 * dir.r_tilde;
        let nuc = nuclear_oracle(&dir.l_tilde);
        if nuc > dir.r_tilde + 1e-9 || dir.r_tilde > r_bar + 1e-12 {
            return Err(format!("instance {k}: infeasible direction ‖L̃‖_*={nuc}, R̃={}", dir.r_tilde));
        }
        let exact = (r_bar * (lambda1 - sigma1)).min(0.0);
        if (value - exact).abs() > 1e-8 * (1.0 + exact.abs()) {
            return Err(format!("instance {k}: value {value} vs closed-form minimum {exact}"));
        }
        for c in 0..200 {
            let radius = r.gen_range(0.0..=r_bar);
            let z = if c % 2 == 0 {
                let x: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
                DenseMatrix::outer(&x, &y)
            } else {
                random_dense(n, n, &mut r)
            };
            let zn = nuclear_oracle(&z);
            let z = if zn > 0.0 {
                z.scale(r.gen_range(0.0..=1.0) * radius / zn)
            } else {
                z
            };
            let cand = z.dot(&g) + lambda1 * radius;
            worst_gap = worst_gap.max(value - cand);
            if value > cand + 1e-9 {
                return Err(format!("instance {k}: candidate {c} beats the LMO ({cand} < {value})"));
            }
        }
    }
    Ok(format!(
        "{INSTANCES} instances x 200 candidates, worst margin {worst_gap:.1e}"
    ))
}

/// Step size against a 50-point grid on the quadratic upper model
/// `β(⟨D, G⟩ + λ₁(R̃ − R)) + (1+ε)β²‖D‖²/2`, `D = L̃ − L`, plus descent of the
/// true objective at the returned step.
pub fn step_vs_grid_search() -> Check {
    let mut clamped = 0;
    for k in 0..INSTANCES {
        let (mut r, n, a, omega) = instance(3000 + k as u64);
        let lambda1 = r.gen_range(0.2..2.0);
        let cfg = SolverConfig::new(lambda1, r.gen_range(0.1..1.0));
        let l = SymMatrix::from_upper(n, |_, _| r.gen_range(-0.5..0.5)).into_dense();
        let s = random_dense(n, n, &mut r).scale(0.2);
        let r_prev = nuclear_oracle(&l) * r.gen_range(1.0..1.5);
        let g = grad_l(&a, &omega, &s, &l, &cfg).map_err(|e| e.to_string())?;
        let r_bar = r_prev + r.gen_range(0.0..3.0);
        let dir = lmo_direction(&g, r_bar, &cfg, 1e-12).map_err(|e| e.to_string())?;
        let beta = step_size(&l, r_prev, &dir.l_tilde, dir.r_tilde, &g, &cfg);
        if !(0.0..=1.0).contains(&beta) {
            return Err(format!("instance {k}: beta {beta} outside [0,1]"));
        }
        if beta == 1.0 || beta == 0.0 {
            clamped += 1;
        }
        let d = dir.l_tilde.sub(&l);
        let lin = d.dot(&g) + lambda1 * (dir.r_tilde - r_prev);
        let quad = (1.0 + cfg.epsilon) * d.frobenius_norm_sq();
        let model = |b: f64| b * lin + 0.5 * quad * b * b;
        let at = model(beta);
        for p in 0..50 {
            let b = p as f64 / 49.0;
            if at > model(b) + 1e-9 {
                return Err(format!(
                    "instance {k}: model at beta={beta} is {at}, grid point {b} gives {}",
                    model(b)
                ));
            }
        }
        let phi = |b: f64| {
            let lb = l.add(&d.scale(b));
            let rb = r_prev + b * (dir.r_tilde - r_prev);
            smooth_part(&a, &omega, &s, &lb, cfg.epsilon) + lambda1 * rb + cfg.lambda2 * group_norm_loop(&s)
        };
        if phi(beta) > phi(0.0) + 1e-9 {
            return Err(format!(
                "instance {k}: objective rises along the step ({} > {})",
                phi(beta),
                phi(0.0)
            ));
        }
    }
    Ok(format!("{INSTANCES} instances ({clamped} clamped)"))
}

/// Both gradients against central differences of the smooth part.
pub fn gradients_vs_finite_differences() -> Check {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for k in 0..INSTANCES {
        let (mut r, n, a, omega) = instance(4000 + k as u64);
        let cfg = SolverConfig::new(1.0, 1.0).with_epsilon(r.gen_range(1e-4..0.5));
        let l = SymMatrix::from_upper(n, |_, _| r.gen_range(-1.0..1.0)).into_dense();
        let s = random_dense(n, n, &mut r);
        let gs = grad_s(&a, &omega, &s, &l, &cfg).map_err(|e| e.to_string())?;
        let gl = grad_l(&a, &omega, &s, &l, &cfg).map_err(|e| e.to_string())?;
        for i in 0..n {
            for j in 0..n {
                let bump = |m: &DenseMatrix, delta: f64| {
                    let mut c = m.clone();
                    c.set(i, j, m.get(i, j) + delta);
                    c
                };
                let fd_s = (smooth_part(&a, &omega, &bump(&s, h), &l, cfg.epsilon)
                    - smooth_part(&a, &omega, &bump(&s, -h), &l, cfg.epsilon))
                    / (2.0 * h);
                let fd_l = (smooth_part(&a, &omega, &s, &bump(&l, h), cfg.epsilon)
                    - smooth_part(&a, &omega, &s, &bump(&l, -h), cfg.epsilon))
                    / (2.0 * h);
                let ds = (fd_s - gs.get(i, j)).abs();
                let dl = (fd_l - gl.get(i, j)).abs();
                worst = worst.max(ds).max(dl);
                if ds > 1e-6 || dl > 1e-6 {
                    return Err(format!(
                        "instance {k} ({i},{j}): grad_s {} vs {fd_s}, grad_l {} vs {fd_l}",
                        gs.get(i, j),
                        gl.get(i, j)
                    ));
                }
            }
        }
    }
    Ok(format!("{INSTANCES} instances, max deviation {worst:.1e}"))
}

/// Dominant singular pair against the Jacobi SVD.
pub fn singular_pair_vs_dense_svd() -> Check {
    let mut worst = 0.0f64;
    for k in 0..INSTANCES {
        let mut r = rng(5000 + k as u64);
        let n = size(&mut r);
        let m = random_dense(n, n, &mut r);
        let pair = top_singular_pair(&m, 1e-12, 100_000).map_err(|e| e.to_string())?;
        let svd = jacobi_svd(&m);
        let mut u = svd.u[0].clone();
        let mut v = svd.v[0].clone();
        if fix_sign(&mut u) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let ds = (pair.sigma - svd.sigma[0]).abs();
        let mut dp = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                dp = dp.max((pair.u[i] * pair.v[j] - u[i] * v[j]).abs());
            }
        }
        worst = worst.max(ds).max(dp);
        if ds > 1e-8 || dp > 1e-8 {
            return Err(format!(
                "instance {k}: sigma {} vs {}, max |u1v1' diff| {dp:.2e}",
                pair.sigma, svd.sigma[0]
            ));
        }
        let du: f64 = pair.u.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if du > 1e-8 {
            return Err(format!("instance {k}: sign convention differs (|u diff| {du:.2e})"));
        }
    }
    Ok(format!("{INSTANCES} instances, max deviation {worst:.1e}"))
}
