//! Healing problem: maximize the tumor effect with the OAR effect capped at
//! γ_OAR and every dose in `[d_min, d_max]`.
//!
//! For a fixed fraction count N the problem is trivial below λ₀ (all d_max).
//! Inside `(λ₀, ρ₀]` the budget is active and the objective reduces to a
//! multiple of the total dose whose sign is the sign of ω_δ. Maximizing the
//! total dose on the budget surface gives equal fractions; minimizing it gives
//! the boundary structure of [`boundary_mix`]. [`solve_p1`] then picks N from
//! the thresholds without scanning the whole range.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FraxionError, Result};
use crate::protocol::{DoseGroup, Protocol};
use crate::radiobiology::{
    oar_effect, p1_thresholds, phi, tumor_effect, uniform_dose_for_budget, DoseBounds,
    ProblemParams, Radiosensitivity, Regime, Thresholds,
};
use crate::report::{Alternate, CaseLabel, P1Case, SolutionReport, SolverConfig};
use crate::scalar::{as_integer, to_count, tolerant_ceil, tolerant_floor, unit_scale, Scalar};

/// K fractions at d_min, an optional interior dose, the rest at d_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMix<T> {
    pub k: u64,
    pub interior: Option<T>,
}

impl<T: Scalar> BoundaryMix<T> {
    /// Expands to an `n`-fraction protocol.
    pub fn to_protocol(&self, bounds: &DoseBounds<T>, n: u64) -> Result<Protocol<T>> {
        let mid = u64::from(self.interior.is_some());
        let top = n
            .checked_sub(self.k + mid)
            .ok_or_else(|| FraxionError::Internal(format!("K = {} exceeds N = {n}", self.k)))?;
        let mut groups = vec![DoseGroup::new(self.k, bounds.d_min())];
        if let Some(d) = self.interior {
            groups.push(DoseGroup::new(1, d));
        }
        groups.push(DoseGroup::new(top, bounds.d_max()));
        Protocol::bounded(groups, bounds)
    }
}

/// Minimum-total-dose protocol on `{n·φ-sum = gamma}` within `bounds`, where
/// φ is `phi(sens, scale, ·)`.
///
/// Computes `M = (n·φ(d_max) − γ)/(φ(d_max) − φ(d_min))`. An integral M gives
/// `M×d_min + (n−M)×d_max`; otherwise `K = ⌊M⌋` and the single interior dose
/// solves `φ(d*) = γ − K·φ(d_min) − (n−K−1)·φ(d_max)`.
pub fn boundary_mix<T: Scalar>(
    sens: &Radiosensitivity<T>,
    scale: T,
    bounds: &DoseBounds<T>,
    gamma: T,
    n: u64,
) -> Result<BoundaryMix<T>> {
    if n == 0 {
        return Err(invalid("fraction count must be >= 1"));
    }
    let f_min = phi(sens, scale, bounds.d_min());
    let f_max = phi(sens, scale, bounds.d_max());
    let count = T::from_count(n);
    let slack = T::feasibility_tol() * unit_scale(gamma);
    if gamma < count * f_min - slack || gamma > count * f_max + slack {
        return Err(FraxionError::InfeasibleN {
            n,
            reason: format!(
                "target {gamma} outside [{}, {}] reachable with {n} bounded fractions",
                count * f_min,
                count * f_max
            ),
        });
    }

    let m = (count * f_max - gamma) / (f_max - f_min);
    if let Some(r) = as_integer(m) {
        let k = to_count(r.max(T::zero()).min(count));
        return Ok(BoundaryMix { k, interior: None });
    }
    if m < T::zero() {
        return Ok(BoundaryMix { k: 0, interior: None });
    }
    if m > count {
        return Ok(BoundaryMix { k: n, interior: None });
    }

    let k = to_count(m.floor());
    let k_t = T::from_count(k);
    let residual = gamma - k_t * f_min - (count - k_t - T::one()) * f_max;
    let d = sens.dose_for_effect(scale, residual.max(T::zero()));
    let snap = T::snap_tol();
    if (d - bounds.d_min()).abs() <= snap * unit_scale(bounds.d_min()) {
        return Ok(BoundaryMix { k: k + 1, interior: None });
    }
    if (d - bounds.d_max()).abs() <= snap * unit_scale(bounds.d_max()) {
        return Ok(BoundaryMix { k, interior: None });
    }
    if !bounds.contains(d) {
        return Err(FraxionError::Internal(format!(
            "interior dose {d} outside [{}, {}] for K = {k}",
            bounds.d_min(),
            bounds.d_max()
        )));
    }
    Ok(BoundaryMix { k, interior: Some(d) })
}

/// Uniform protocol `n × d` with `n·φ(d) = gamma`, snapped into the bounds.
pub(crate) fn snapped_uniform<T: Scalar>(
    sens: &Radiosensitivity<T>,
    scale: T,
    bounds: &DoseBounds<T>,
    n: u64,
    gamma: T,
) -> Result<Protocol<T>> {
    let d = uniform_dose_for_budget(sens, scale, n, gamma)?;
    let snap = T::snap_tol();
    let d = if d < bounds.d_min() && bounds.d_min() - d <= snap * unit_scale(bounds.d_min()) {
        bounds.d_min()
    } else if d > bounds.d_max() && d - bounds.d_max() <= snap * unit_scale(bounds.d_max()) {
        bounds.d_max()
    } else {
        d
    };
    if !bounds.contains(d) {
        return Err(FraxionError::Internal(format!(
            "uniform dose {d} for N = {n} outside [{}, {}]",
            bounds.d_min(),
            bounds.d_max()
        )));
    }
    Protocol::uniform(n, d)
}

fn is_active<T: Scalar>(value: T, gamma: T) -> bool {
    (value - gamma).abs() <= T::feasibility_tol() * unit_scale(gamma)
}

fn check_cap<T: Scalar>(rho: T, cfg: &SolverConfig) -> Result<()> {
    if rho > T::from_count(cfg.n_cap) {
        return Err(FraxionError::CapExceeded {
            rho: rho.to_f64().unwrap_or(f64::INFINITY),
            cap: cfg.n_cap,
        });
    }
    Ok(())
}

/// Optimal protocol for a fixed fraction count N, `1 ≤ N ≤ ρ₀`.
pub fn solve_p1_fixed<T: Scalar>(
    params: &ProblemParams<T>,
    gamma_oar: T,
    n: u64,
) -> Result<Protocol<T>> {
    if n == 0 {
        return Err(invalid("fraction count must be >= 1"));
    }
    let thr = p1_thresholds(params, gamma_oar)?;
    let b = &params.bounds;
    let count = T::from_count(n);
    if count > thr.rho + T::integrality_tol() * unit_scale(thr.rho) {
        return Err(FraxionError::InfeasibleN {
            n,
            reason: format!("N exceeds rho0 = {}: minimum doses already overrun the budget", thr.rho),
        });
    }
    // Unclamped ratio: with γ < φ₀(d_max) not even one d_max fraction fits.
    let all_max_ratio = gamma_oar / params.phi_oar(b.d_max());
    if count <= all_max_ratio + T::integrality_tol() * unit_scale(all_max_ratio) {
        return Protocol::uniform(n, b.d_max());
    }
    match params.regime() {
        Regime::Hyper | Regime::Neutral => {
            snapped_uniform(&params.oar, params.delta(), b, n, gamma_oar)
        }
        Regime::Hypo => boundary_mix(&params.oar, params.delta(), b, gamma_oar, n)?
            .to_protocol(b, n),
    }
}

/// Solves the healing problem with the default [`SolverConfig`].
pub fn solve_p1<T: Scalar>(params: &ProblemParams<T>, gamma_oar: T) -> Result<SolutionReport<T>> {
    solve_p1_with(params, gamma_oar, &SolverConfig::default())
}

/// Solves the healing problem.
pub fn solve_p1_with<T: Scalar>(
    params: &ProblemParams<T>,
    gamma_oar: T,
    cfg: &SolverConfig,
) -> Result<SolutionReport<T>> {
    let thr = p1_thresholds(params, gamma_oar)?;
    let b = &params.bounds;
    let one = T::one();
    let tol = T::integrality_tol();

    if thr.rho < one - tol {
        return Err(FraxionError::Infeasible {
            gamma: gamma_oar.to_f64().unwrap_or(f64::NAN),
            single_min_effect: params.phi_oar(b.d_min()).to_f64().unwrap_or(f64::NAN),
            rho: thr.rho.to_f64().unwrap_or(f64::NAN),
        });
    }
    check_cap(thr.rho, cfg)?;

    let report = |case, protocol: Protocol<T>, alternates| {
        finish(params, gamma_oar, thr, CaseLabel::P1(case), protocol, alternates)
    };

    if (thr.rho - one).abs() <= tol {
        return report(P1Case::SingleMinForced, Protocol::uniform(1, b.d_min())?, vec![]);
    }
    let n_hi = tolerant_floor(thr.rho);
    if n_hi < T::lit(2.0) {
        let d0 = params.oar.dose_for_effect(params.delta(), gamma_oar);
        let dose = if d0 >= b.d_max() { b.d_max() } else { d0.max(b.d_min()) };
        return report(P1Case::SingleDose, Protocol::uniform(1, dose)?, vec![]);
    }
    let n_lo = tolerant_floor(thr.lambda);
    if n_lo == n_hi {
        let n = to_count(n_lo);
        return report(P1Case::AllMaxWindow, Protocol::uniform(n, b.d_max())?, vec![]);
    }

    match params.regime() {
        Regime::Hyper => {
            let n = to_count(n_hi);
            let p = snapped_uniform(&params.oar, params.delta(), b, n, gamma_oar)?;
            report(P1Case::HyperUniform, p, vec![])
        }
        Regime::Hypo => {
            let n1 = to_count(tolerant_ceil(thr.lambda));
            let mix = boundary_mix(&params.oar, params.delta(), b, gamma_oar, n1)?;
            let mut candidates = vec![(n1, mix.to_protocol(b, n1)?)];
            let n2 = to_count(n_lo);
            let all_max_fits = T::from_count(n2) * params.phi_oar(b.d_max())
                <= gamma_oar + T::feasibility_tol() * unit_scale(gamma_oar);
            if n2 != n1 && all_max_fits {
                candidates.push((n2, Protocol::uniform(n2, b.d_max())?));
            }
            let (best, alternates) = pick(candidates, |p| tumor_effect(&params.tumor, p), true);
            report(P1Case::HypoCompared, best.1, alternates)
        }
        Regime::Neutral => {
            let first = to_count(tolerant_ceil(thr.lambda));
            let last = to_count(n_hi);
            let p = snapped_uniform(&params.oar, params.delta(), b, last, gamma_oar)?;
            let mut alternates = Vec::new();
            for n in (first..last).take(cfg.max_alternates) {
                let protocol = snapped_uniform(&params.oar, params.delta(), b, n, gamma_oar)?;
                alternates.push(Alternate { n, protocol });
            }
            report(P1Case::OmegaZeroFamily, p, alternates)
        }
    }
}

/// Chooses the best candidate by `objective` (maximized when `maximize`).
/// Ties within the tie tolerance go to the smaller N; the others become
/// alternates.
pub(crate) fn pick<T: Scalar>(
    mut candidates: Vec<(u64, Protocol<T>)>,
    objective: impl Fn(&Protocol<T>) -> T,
    maximize: bool,
) -> ((u64, Protocol<T>), Vec<Alternate<T>>) {
    candidates.sort_by_key(|c| c.0);
    let scored: Vec<(T, (u64, Protocol<T>))> =
        candidates.into_iter().map(|c| (objective(&c.1), c)).collect();
    let better = |a: T, b: T| if maximize { a > b } else { a < b };
    let mut best_idx = 0;
    for (i, (v, _)) in scored.iter().enumerate().skip(1) {
        let bv = scored[best_idx].0;
        let tied = (*v - bv).abs() <= T::tie_tol() * unit_scale(bv);
        if !tied && better(*v, bv) {
            best_idx = i;
        }
    }
    let best_val = scored[best_idx].0;
    let mut alternates = Vec::new();
    let mut best = None;
    for (i, (v, c)) in scored.into_iter().enumerate() {
        if i == best_idx {
            best = Some(c);
        } else if (v - best_val).abs() <= T::tie_tol() * unit_scale(best_val) {
            alternates.push(Alternate {
                n: c.0,
                protocol: c.1,
            });
        }
    }
    (best.expect("non-empty candidates"), alternates)
}

fn finish<T: Scalar>(
    params: &ProblemParams<T>,
    gamma_oar: T,
    thresholds: Thresholds<T>,
    case: CaseLabel,
    protocol: Protocol<T>,
    alternates: Vec<Alternate<T>>,
) -> Result<SolutionReport<T>> {
    let e_t = tumor_effect(&params.tumor, &protocol);
    let e_oar = oar_effect(params, &protocol);
    Ok(SolutionReport {
        case,
        n_opt: protocol.fractions(),
        objective_primary: e_t,
        objective_secondary: e_oar,
        constraint_active: is_active(e_oar, gamma_oar),
        thresholds,
        alternates,
        protocol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn p11(delta: f64) -> ProblemParams<f64> {
        ProblemParams::from_values(0.05, 0.005, 0.04, 0.02, delta, 1.0, 6.0).unwrap()
    }

    fn p12() -> ProblemParams<f64> {
        ProblemParams::from_values(0.08, 0.02, 0.01, 0.001, 1.0, 1.0, 6.0).unwrap()
    }

    fn groups(p: &Protocol<f64>) -> Vec<(u64, f64)> {
        p.groups().iter().map(|g| (g.count, g.dose)).collect()
    }

    #[test]
    fn hyper_uniform_example() {
        let r = solve_p1(&p11(0.3), 0.78).unwrap();
        assert_eq!(r.case, CaseLabel::P1(P1Case::HyperUniform));
        assert_eq!(r.n_opt, 56);
        assert!(r.protocol.is_uniform());
        assert!(close(r.protocol.min_dose(), 1.008, 5e-4));
        assert!(close(r.objective_primary, 3.107, 2e-3));
        assert!(close(r.objective_secondary, 0.78, 1e-12));
        assert!(r.constraint_active);
    }

    #[test]
    fn hypo_example() {
        let r = solve_p1(&p11(0.1), 0.22).unwrap();
        assert_eq!(r.case, CaseLabel::P1(P1Case::HypoCompared));
        assert_eq!(r.n_opt, 8);
        let g = groups(&r.protocol);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0], (1, 1.0));
        assert_eq!(g[1].0, 1);
        assert!(close(g[1].1, 5.588, 5e-4));
        assert_eq!(g[2], (6, 6.0));
        assert!(close(r.objective_primary, 3.37, 5e-3));
    }

    #[test]
    fn small_budget_stays_hyper() {
        let r = solve_p1(&p11(0.3), 0.1).unwrap();
        assert_eq!(r.n_opt, 7);
        assert!(r.protocol.is_uniform());
        assert!(close(r.protocol.min_dose(), 1.031, 5e-4));
    }

    #[test]
    fn candidate_flip_examples() {
        let r = solve_p1(&p12(), 0.961).unwrap();
        assert_eq!(r.n_opt, 10);
        assert_eq!(groups(&r.protocol), vec![(10, 6.0)]);
        assert!(close(r.objective_primary, 12.0, 1e-9));

        let r = solve_p1(&p12(), 0.971).unwrap();
        assert_eq!(r.n_opt, 11);
        assert_eq!(groups(&r.protocol), vec![(1, 1.0), (10, 6.0)]);
        assert!(close(r.objective_primary, 12.1, 1e-9));
    }

    #[test]
    fn infeasible_budget() {
        let params = p11(0.3);
        let gamma = 0.9 * params.phi_oar(1.0);
        assert!(matches!(
            solve_p1(&params, gamma),
            Err(FraxionError::Infeasible { .. })
        ));
    }

    #[test]
    fn single_fraction_cases() {
        let params = p11(0.3);
        let r = solve_p1(&params, params.phi_oar(1.0)).unwrap();
        assert_eq!(r.case, CaseLabel::P1(P1Case::SingleMinForced));
        assert_eq!(groups(&r.protocol), vec![(1, 1.0)]);

        let r = solve_p1(&params, 1.5 * params.phi_oar(1.0)).unwrap();
        assert_eq!(r.case, CaseLabel::P1(P1Case::SingleDose));
        assert_eq!(r.n_opt, 1);
        assert!(r.constraint_active);
        assert!(close(params.phi_oar(r.protocol.min_dose()), 1.5 * params.phi_oar(1.0), 1e-15));

        // Root above d_max: capped, constraint slack.
        let wide = ProblemParams::from_values(0.05, 0.005, 0.04, 0.02, 0.3, 1.0, 1.2).unwrap();
        let r = solve_p1(&wide, 1.9 * wide.phi_oar(1.0)).unwrap();
        assert_eq!(groups(&r.protocol), vec![(1, 1.2)]);
        assert!(!r.constraint_active);
    }

    #[test]
    fn all_max_window() {
        // λ₀ = 3.2, ρ₀ just below 4 → ⌊λ₀⌋ = ⌊ρ₀⌋ = 3.
        let params = ProblemParams::<f64>::from_values(0.05, 0.005, 0.04, 0.02, 1.0, 1.9, 2.0).unwrap();
        let gamma = 3.2 * params.phi_oar(2.0);
        let t = p1_thresholds(&params, gamma).unwrap();
        assert_eq!(t.rho.floor(), 3.0);
        let r = solve_p1(&params, gamma).unwrap();
        assert_eq!(r.case, CaseLabel::P1(P1Case::AllMaxWindow));
        assert_eq!(groups(&r.protocol), vec![(3, 2.0)]);
    }

    #[test]
    fn neutral_family_lists_alternates() {
        let params = p11(0.2);
        let r = solve_p1(&params, 0.5).unwrap();
        assert_eq!(r.case, CaseLabel::P1(P1Case::OmegaZeroFamily));
        let t = p1_thresholds(&params, 0.5).unwrap();
        assert_eq!(r.n_opt as f64, t.rho.floor());
        let first = t.lambda.ceil() as u64;
        assert_eq!(r.alternates.len() as u64, r.n_opt - first);
        for alt in &r.alternates {
            assert!(close(oar_effect(&params, &alt.protocol), 0.5, 1e-12));
            assert!(close(tumor_effect(&params.tumor, &alt.protocol), r.objective_primary, 1e-9));
        }
    }

    #[test]
    fn clamped_lambda_drops_infeasible_all_max_candidate() {
        // γ < φ₀(d_max): λ₀ clamps to 1 but one d_max fraction overruns the budget.
        let params = p11(0.1);
        let r = solve_p1(&params, 0.02).unwrap();
        assert_eq!(r.n_opt, 1);
        assert!(oar_effect(&params, &r.protocol) <= 0.02 + 1e-12);
        assert!(r.constraint_active);
        let p = solve_p1_fixed(&params, 0.02, 1).unwrap();
        assert!(p.max_dose() < 6.0);
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = SolverConfig {
            n_cap: 50,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_p1_with(&p11(0.3), 0.78, &cfg),
            Err(FraxionError::CapExceeded { cap: 50, .. })
        ));
    }

    #[test]
    fn fixed_n_examples() {
        let p = solve_p1_fixed(&p11(0.1), 0.22, 7).unwrap();
        assert_eq!(groups(&p), vec![(7, 6.0)]);

        let p = solve_p1_fixed(&p11(0.1), 0.22, 9).unwrap();
        let g = groups(&p);
        assert_eq!(g[0], (2, 1.0));
        assert_eq!(g[1].0, 1);
        assert!(close(g[1].1, 4.9, 5e-3));
        assert_eq!(g[2], (6, 6.0));

        let p = solve_p1_fixed(&p12(), 0.961, 11).unwrap();
        let g = groups(&p);
        assert_eq!(g[0], (1, 1.0));
        assert!(close(g[1].1, 5.53565, 5e-5));
        assert_eq!(g[2], (9, 6.0));

        assert!(matches!(
            solve_p1_fixed(&p11(0.1), 0.22, 53),
            Err(FraxionError::InfeasibleN { n: 53, .. })
        ));
    }

    #[test]
    fn boundary_mix_examples() {
        let unit = Radiosensitivity::new(2.0, 1.0).unwrap();
        let b = DoseBounds::new(1.0, 3.0).unwrap();
        let mix = boundary_mix(&unit, 1.0, &b, 12.0, 2).unwrap();
        assert_eq!(mix.k, 1);
        assert!(close(mix.interior.unwrap(), 10f64.sqrt() - 1.0, 1e-12));

        let p = p12();
        let mix = boundary_mix(&p.oar, 1.0, &p.bounds, 0.971, 11).unwrap();
        assert_eq!(mix, BoundaryMix { k: 1, interior: None });

        let t = p11(1.0);
        let mix = boundary_mix(&t.tumor, 1.0, &t.bounds, 4.375, 10).unwrap();
        assert_eq!(mix, BoundaryMix { k: 1, interior: None });

        assert!(matches!(
            boundary_mix(&unit, 1.0, &b, 31.0, 2),
            Err(FraxionError::InfeasibleN { .. })
        ));
        assert!(matches!(
            boundary_mix(&unit, 1.0, &b, 5.0, 2),
            Err(FraxionError::InfeasibleN { .. })
        ));
    }

    #[test]
    fn boundary_mix_extremes_snap_to_corners() {
        let unit = Radiosensitivity::new(2.0, 1.0).unwrap();
        let b = DoseBounds::new(1.0, 3.0).unwrap();
        assert_eq!(
            boundary_mix(&unit, 1.0, &b, 30.0, 2).unwrap(),
            BoundaryMix { k: 0, interior: None }
        );
        assert_eq!(
            boundary_mix(&unit, 1.0, &b, 6.0, 2).unwrap(),
            BoundaryMix { k: 2, interior: None }
        );
        assert_eq!(
            boundary_mix(&unit, 1.0, &b, 18.0, 2).unwrap(),
            BoundaryMix { k: 1, interior: None }
        );
    }
}
