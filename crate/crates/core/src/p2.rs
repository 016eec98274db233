//! Palliative problem: minimize the OAR effect while keeping the tumor
//! effect at or above γ_T, doses in `[d_min, d_max]`.
//!
//! Mirrors the healing problem with the roles of the tissues swapped: the
//! floor is active on `[λ_T, ρ_T)` and the sign of ω_δ again decides between
//! equal fractions and the boundary structure.

use crate::error::{invalid, FraxionError, Result};
use crate::p1::{boundary_mix, pick, snapped_uniform};
use crate::protocol::Protocol;
use crate::radiobiology::{
    oar_effect, p2_thresholds, tumor_effect, ProblemParams, Regime, Thresholds,
};
use crate::report::{Alternate, CaseLabel, P2Case, SolutionReport, SolverConfig};
use crate::scalar::{as_integer, to_count, tolerant_ceil, tolerant_floor, unit_scale, Scalar};

/// Optimal protocol for a fixed fraction count N ≥ λ_T.
pub fn solve_p2_fixed<T: Scalar>(
    params: &ProblemParams<T>,
    gamma_t: T,
    n: u64,
) -> Result<Protocol<T>> {
    if n == 0 {
        return Err(invalid("fraction count must be >= 1"));
    }
    let thr = p2_thresholds(params, gamma_t)?;
    let b = &params.bounds;
    let count = T::from_count(n);
    if count < thr.lambda - T::integrality_tol() * unit_scale(thr.lambda) {
        return Err(FraxionError::InfeasibleN {
            n,
            reason: format!("N below lambda_T = {}: even all-d_max misses the floor", thr.lambda),
        });
    }
    if count >= thr.rho - T::integrality_tol() * unit_scale(thr.rho) {
        return Protocol::uniform(n, b.d_min());
    }
    match params.regime() {
        Regime::Hyper | Regime::Neutral => snapped_uniform(&params.tumor, T::one(), b, n, gamma_t),
        Regime::Hypo => {
            boundary_mix(&params.tumor, T::one(), b, gamma_t, n)?.to_protocol(b, n)
        }
    }
}

/// Solves the palliative problem with the default [`SolverConfig`].
pub fn solve_p2<T: Scalar>(params: &ProblemParams<T>, gamma_t: T) -> Result<SolutionReport<T>> {
    solve_p2_with(params, gamma_t, &SolverConfig::default())
}

/// Solves the palliative problem.
pub fn solve_p2_with<T: Scalar>(
    params: &ProblemParams<T>,
    gamma_t: T,
    cfg: &SolverConfig,
) -> Result<SolutionReport<T>> {
    let thr = p2_thresholds(params, gamma_t)?;
    let b = &params.bounds;
    let one = T::one();
    let report = |case, protocol: Protocol<T>, alternates| {
        finish(params, gamma_t, thr, case, protocol, alternates)
    };

    if thr.rho <= one + T::integrality_tol() {
        return report(P2Case::SingleMinForced, Protocol::uniform(1, b.d_min())?, vec![]);
    }
    if thr.rho > T::from_count(cfg.n_cap) {
        return Err(FraxionError::CapExceeded {
            rho: thr.rho.to_f64().unwrap_or(f64::INFINITY),
            cap: cfg.n_cap,
        });
    }

    let lo = tolerant_ceil(thr.lambda);
    let hi = tolerant_floor(thr.rho);
    let rho_int = as_integer(thr.rho);
    let all_min_at_ceil = || Protocol::uniform(to_count(tolerant_ceil(thr.rho)), b.d_min());

    if lo > hi {
        return report(P2Case::EmptyWindowAllMin, all_min_at_ceil()?, vec![]);
    }
    if lo == hi && rho_int.is_some() {
        // [λ_T, ρ_T) ∩ ℕ is empty: the ρ_T minimum fractions are the only candidates.
        return report(P2Case::AllMinForced, all_min_at_ceil()?, vec![]);
    }
    // From here the window [λ_T, ρ_T) ∩ ℕ = {lo, …} is non-empty.
    let single_window = lo == hi;

    match params.regime() {
        Regime::Hyper => {
            if let Some(r) = rho_int {
                if r >= T::lit(2.0) {
                    let p = Protocol::uniform(to_count(r), b.d_min())?;
                    return report(P2Case::HyperAllMinInteger, p, vec![]);
                }
            }
            let n1 = to_count(hi);
            let uniform = snapped_uniform(&params.tumor, one, b, n1, gamma_t)?;
            let candidates = vec![(n1, uniform), (n1 + 1, Protocol::uniform(n1 + 1, b.d_min())?)];
            let (best, alternates) = pick(candidates, |p| oar_effect(params, p), false);
            report(P2Case::HyperCompared, best.1, alternates)
        }
        Regime::Hypo => {
            let n = to_count(lo);
            let mix = boundary_mix(&params.tumor, one, b, gamma_t, n)?.to_protocol(b, n)?;
            if single_window {
                let m = to_count(tolerant_ceil(thr.rho));
                let candidates = vec![(n, mix), (m, Protocol::uniform(m, b.d_min())?)];
                let (best, alternates) = pick(candidates, |p| oar_effect(params, p), false);
                report(P2Case::HypoStructure, best.1, alternates)
            } else {
                report(P2Case::HypoStructure, mix, vec![])
            }
        }
        Regime::Neutral => {
            let first = to_count(lo);
            let last = to_count(hi);
            let p = snapped_uniform(&params.tumor, one, b, first, gamma_t)?;
            let mut alternates = Vec::new();
            for n in (first + 1..=last).take(cfg.max_alternates) {
                let protocol = snapped_uniform(&params.tumor, one, b, n, gamma_t)?;
                alternates.push(Alternate { n, protocol });
            }
            report(P2Case::OmegaZeroFamily, p, alternates)
        }
    }
}

fn finish<T: Scalar>(
    params: &ProblemParams<T>,
    gamma_t: T,
    thresholds: Thresholds<T>,
    case: P2Case,
    protocol: Protocol<T>,
    alternates: Vec<Alternate<T>>,
) -> Result<SolutionReport<T>> {
    let e_oar = oar_effect(params, &protocol);
    let e_t = tumor_effect(&params.tumor, &protocol);
    Ok(SolutionReport {
        case: CaseLabel::P2(case),
        n_opt: protocol.fractions(),
        objective_primary: e_oar,
        objective_secondary: e_t,
        constraint_active: (e_t - gamma_t).abs() <= T::feasibility_tol() * unit_scale(gamma_t),
        thresholds,
        alternates,
        protocol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiobiology::p2_thresholds;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn p2x(delta: f64) -> ProblemParams<f64> {
        ProblemParams::from_values(0.05, 0.005, 0.04, 0.02, delta, 1.0, 6.0).unwrap()
    }

    fn groups(p: &Protocol<f64>) -> Vec<(u64, f64)> {
        p.groups().iter().map(|g| (g.count, g.dose)).collect()
    }

    #[test]
    fn hyper_compared_picks_uniform() {
        let r = solve_p2(&p2x(1.0), 4.0).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::HyperCompared));
        assert_eq!(r.n_opt, 72);
        assert!(close(r.protocol.min_dose(), 1.00926, 5e-5));
        assert!(close(r.objective_primary, 4.373, 2e-3));
        assert!(r.constraint_active);
    }

    #[test]
    fn hyper_compared_picks_all_min() {
        let r = solve_p2(&p2x(1.0), 4.014).unwrap();
        assert_eq!(r.n_opt, 73);
        assert_eq!(groups(&r.protocol), vec![(73, 1.0)]);
        assert!(close(r.objective_primary, 4.38, 1e-9));
        assert!(!r.constraint_active);
    }

    #[test]
    fn hypo_structure_examples() {
        let r = solve_p2(&p2x(0.1), 4.35).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::HypoStructure));
        assert_eq!(r.n_opt, 10);
        let g = groups(&r.protocol);
        assert_eq!(g[0], (1, 1.0));
        assert!(close(g[1].1, 5.77, 5e-3));
        assert_eq!(g[2], (8, 6.0));
        assert!(close(r.objective_primary, 0.2835, 5e-4));

        let r = solve_p2(&p2x(0.1), 4.375).unwrap();
        assert_eq!(groups(&r.protocol), vec![(1, 1.0), (9, 6.0)]);
    }

    #[test]
    fn tiny_floor_is_one_min_fraction() {
        let r = solve_p2(&p2x(0.1), 0.05).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::SingleMinForced));
        assert_eq!(groups(&r.protocol), vec![(1, 1.0)]);
        let r = solve_p2(&p2x(0.1), 0.055).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::SingleMinForced));
    }

    #[test]
    fn integer_rho_hyper() {
        // ρ_T = 20 exactly, λ_T well below.
        let gamma = 20.0 * 0.055;
        let r = solve_p2(&p2x(1.0), gamma).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::HyperAllMinInteger));
        assert_eq!(groups(&r.protocol), vec![(20, 1.0)]);
    }

    #[test]
    fn empty_window_gap_rule() {
        // Bounds [1.9, 2] with λ_T = 5.2: ρ_T ≈ 5.52, no integer in [5.2, 5.72].
        let params = ProblemParams::<f64>::from_values(0.05, 0.005, 0.04, 0.02, 1.0, 1.9, 2.0).unwrap();
        let gamma = 5.2 * params.phi_tumor(2.0);
        let t = p2_thresholds(&params, gamma).unwrap();
        assert!(t.lambda.ceil() > t.rho.floor());
        let r = solve_p2(&params, gamma).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::EmptyWindowAllMin));
        assert_eq!(groups(&r.protocol), vec![(6, 1.9)]);
    }

    #[test]
    fn integer_rho_with_empty_half_open_window() {
        // ⌈λ_T⌉ = ⌊ρ_T⌋ = ρ_T = 6.
        let params = ProblemParams::from_values(0.05, 0.005, 0.04, 0.02, 1.0, 1.9, 2.0).unwrap();
        let gamma = 6.0 * params.phi_tumor(1.9);
        let r = solve_p2(&params, gamma).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::AllMinForced));
        assert_eq!(groups(&r.protocol), vec![(6, 1.9)]);
    }

    #[test]
    fn single_window_hypo_beats_all_min() {
        // ⌈λ_T⌉ = ⌊ρ_T⌋ = 1 with ρ_T ≈ 1.82: one interior fraction is cheaper
        // for the OAR than two minimum fractions.
        let params = p2x(0.1);
        let r = solve_p2(&params, 0.1).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::HypoStructure));
        assert_eq!(r.n_opt, 1);
        assert!(close(r.protocol.min_dose(), 1.7082039324993692, 1e-12));
        assert!(r.objective_primary < 2.0 * params.phi_oar(1.0));
    }

    #[test]
    fn single_window_hyper_compares() {
        let params = p2x(1.0);
        let r = solve_p2(&params, 0.1).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::HyperCompared));
        // 2 × 1 Gy costs 0.12 < 0.1267 for one 1.708 Gy fraction.
        assert_eq!(groups(&r.protocol), vec![(2, 1.0)]);
    }

    #[test]
    fn neutral_family() {
        let params = p2x(0.2);
        let r = solve_p2(&params, 2.0).unwrap();
        assert_eq!(r.case, CaseLabel::P2(P2Case::OmegaZeroFamily));
        let t = p2_thresholds(&params, 2.0).unwrap();
        assert_eq!(r.n_opt as f64, t.lambda.ceil());
        assert_eq!(r.alternates.len() as f64, t.rho.floor() - t.lambda.ceil());
        for alt in &r.alternates {
            assert!(close(oar_effect(&params, &alt.protocol), r.objective_primary, 1e-9));
        }
    }

    #[test]
    fn fixed_n_examples() {
        let p = solve_p2_fixed(&p2x(0.1), 4.35, 11).unwrap();
        let g = groups(&p);
        assert_eq!(g[0], (2, 1.0));
        assert!(close(g[1].1, 5.247, 5e-4));
        assert_eq!(g[2], (8, 6.0));
        assert!(close(oar_effect(&p2x(0.1), &p), 0.2845, 5e-4));

        let p = solve_p2_fixed(&p2x(1.0), 4.0, 73).unwrap();
        assert_eq!(groups(&p), vec![(73, 1.0)]);
        let p = solve_p2_fixed(&p2x(1.0), 4.0, 500).unwrap();
        assert_eq!(groups(&p), vec![(500, 1.0)]);

        assert!(matches!(
            solve_p2_fixed(&p2x(1.0), 4.0, 8),
            Err(FraxionError::InfeasibleN { n: 8, .. })
        ));
    }
}
