#![allow(dead_code)]

use fraxion::{oar_effect, tumor_effect, ProblemParams, Protocol};
use proptest::prelude::*;
use rand::Rng;

/// Log-uniform draw on `[lo, hi)`.
pub fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// Clinically shaped instances: α in [0.01, 0.5], β in [0.001, 0.1], doses
/// in [0.5, 10.5] Gy.
pub fn params() -> impl Strategy<Value = ProblemParams<f64>> {
    (
        log_uniform(0.01, 0.5),
        log_uniform(0.001, 0.1),
        log_uniform(0.01, 0.5),
        log_uniform(0.001, 0.1),
        0.05..1.0_f64,
        0.5..2.5_f64,
        0.5..8.0_f64,
    )
        .prop_map(|(at, bt, a0, b0, delta, d_min, width)| {
            ProblemParams::from_values(at, bt, a0, b0, delta, d_min, d_min + width).unwrap()
        })
}

/// Instance plus a P1 budget with ρ₀ in [1, 200].
pub fn p1_instance() -> impl Strategy<Value = (ProblemParams<f64>, f64)> {
    (params(), log_uniform(1.0, 200.0))
        .prop_map(|(p, rho)| (p, rho * p.phi_oar(p.bounds.d_min())))
}

/// Instance plus a P2 floor with ρ_T in [1, 200].
pub fn p2_instance() -> impl Strategy<Value = (ProblemParams<f64>, f64)> {
    (params(), log_uniform(1.0, 200.0))
        .prop_map(|(p, rho)| (p, rho * p.phi_tumor(p.bounds.d_min())))
}

fn random_doses<R: Rng>(rng: &mut R, p: &ProblemParams<f64>, n: u64) -> Vec<f64> {
    let b = p.bounds;
    (0..n).map(|_| rng.gen_range(b.d_min()..=b.d_max())).collect()
}

/// Random protocol with `n` fractions and E_OAR ≤ γ, pulled toward d_min
/// along a line when needed. Requires `n·φ₀(d_min) ≤ γ`.
pub fn random_p1_feasible<R: Rng>(rng: &mut R, p: &ProblemParams<f64>, gamma: f64, n: u64) -> Protocol<f64> {
    let d_min = p.bounds.d_min();
    let doses = random_doses(rng, p, n);
    let at = |t: f64| {
        let d: Vec<f64> = doses.iter().map(|&d| d_min + t * (d - d_min)).collect();
        Protocol::from_doses(&d).unwrap()
    };
    if oar_effect(p, &at(1.0)) <= gamma {
        return at(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if oar_effect(p, &at(mid)) <= gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo)
}

/// Random protocol with `n` fractions and E_T ≥ γ_T, pushed toward d_max.
/// Requires `n·φ_T(d_max) ≥ γ_T`.
pub fn random_p2_feasible<R: Rng>(rng: &mut R, p: &ProblemParams<f64>, gamma: f64, n: u64) -> Protocol<f64> {
    let d_max = p.bounds.d_max();
    let doses = random_doses(rng, p, n);
    let at = |t: f64| {
        let d: Vec<f64> = doses.iter().map(|&d| d + t * (d_max - d)).collect();
        Protocol::from_doses(&d).unwrap()
    };
    if tumor_effect(&p.tumor, &at(0.0)) >= gamma {
        return at(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if tumor_effect(&p.tumor, &at(mid)) >= gamma {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    at(hi)
}
