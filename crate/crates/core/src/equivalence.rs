//! Biologically equivalent treatments: the minimum-total-dose protocol for a
//! prescribed tumor effect, and uniform BED conversion.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::p1::boundary_mix;
use crate::protocol::Protocol;
use crate::radiobiology::{phi, tumor_effect, DoseBounds, Radiosensitivity, Thresholds};
use crate::report::{CaseLabel, P2Case, SolutionReport};
use crate::scalar::{to_count, tolerant_ceil, unit_scale, Scalar};

/// Find the lowest-total-dose protocol with tumor effect `target_effect`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceQuery<T> {
    pub tumor: Radiosensitivity<T>,
    pub bounds: DoseBounds<T>,
    target_effect: T,
}

impl<T: Scalar> EquivalenceQuery<T> {
    pub fn new(tumor: Radiosensitivity<T>, bounds: DoseBounds<T>, target_effect: T) -> Result<Self> {
        if !target_effect.is_finite() || target_effect <= T::zero() {
            return Err(invalid(format!("target effect must be finite and > 0, got {target_effect}")));
        }
        Ok(Self {
            tumor,
            bounds,
            target_effect,
        })
    }

    pub fn target_effect(&self) -> T {
        self.target_effect
    }
}

/// Minimum total dose over all N and bounded doses with `E_T = γ_T`.
///
/// The total dose is linear, so this is the ω_δ < 0 structure on φ_T at
/// N = ⌈λ_T⌉. When no N reaches γ_T exactly the result is ⌈ρ_T⌉ minimum
/// fractions, which overshoot the target (`constraint_active` is false).
/// `thresholds.omega` is −∞: a linear objective is the β₀ → 0 limit.
pub fn min_total_dose<T: Scalar>(query: &EquivalenceQuery<T>) -> Result<SolutionReport<T>> {
    let EquivalenceQuery {
        tumor,
        bounds,
        target_effect: gamma,
    } = *query;
    let f_min = phi(&tumor, T::one(), bounds.d_min());
    let f_max = phi(&tumor, T::one(), bounds.d_max());
    let thresholds = Thresholds {
        lambda: (gamma / f_max).max(T::one()),
        rho: (gamma / f_min).max(T::one()),
        omega: T::neg_infinity(),
    };
    let tol = T::integrality_tol();

    let (case, protocol) = if gamma <= f_min * (T::one() + T::feasibility_tol()) {
        (P2Case::SingleMinForced, Protocol::uniform(1, bounds.d_min())?)
    } else {
        let lo = tolerant_ceil(thresholds.lambda);
        if lo <= thresholds.rho + tol * unit_scale(thresholds.rho) {
            let n = to_count(lo);
            let mix = boundary_mix(&tumor, T::one(), &bounds, gamma, n)?;
            (P2Case::HypoStructure, mix.to_protocol(&bounds, n)?)
        } else {
            let n = to_count(tolerant_ceil(thresholds.rho));
            (P2Case::EmptyWindowAllMin, Protocol::uniform(n, bounds.d_min())?)
        }
    };

    let e_t = tumor_effect(&tumor, &protocol);
    Ok(SolutionReport {
        case: CaseLabel::P3(case),
        n_opt: protocol.fractions(),
        objective_primary: protocol.total_dose(),
        objective_secondary: e_t,
        constraint_active: (e_t - gamma).abs() <= T::feasibility_tol() * unit_scale(gamma),
        thresholds,
        alternates: Vec::new(),
        protocol,
    })
}

/// Uniform conversion: the dose `d̃` with `n_target·φ_T(d̃) = n·φ_T(d)`.
pub fn bed_uniform<T: Scalar>(tumor: &Radiosensitivity<T>, n: u64, d: T, n_target: u64) -> Result<T> {
    if n == 0 || n_target == 0 {
        return Err(invalid("fraction counts must be >= 1"));
    }
    if !d.is_finite() || d <= T::zero() {
        return Err(invalid(format!("dose must be finite and > 0, got {d}")));
    }
    if n == n_target {
        return Ok(d);
    }
    let effect = T::from_count(n) * phi(tumor, T::one(), d);
    Ok(tumor.dose_for_effect(T::one(), effect / T::from_count(n_target)))
}

/// A uniform conversion together with its bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BedConversion<T> {
    pub dose: T,
    /// `None` when no bounds were supplied.
    pub within_bounds: Option<bool>,
}

/// [`bed_uniform`] plus a flag telling whether `d̃` respects `bounds`.
/// Out-of-bounds doses are reported, not rejected.
pub fn bed_uniform_checked<T: Scalar>(
    tumor: &Radiosensitivity<T>,
    n: u64,
    d: T,
    n_target: u64,
    bounds: Option<&DoseBounds<T>>,
) -> Result<BedConversion<T>> {
    let dose = bed_uniform(tumor, n, d, n_target)?;
    Ok(BedConversion {
        dose,
        within_bounds: bounds.map(|b| b.contains(dose)),
    })
}

/// `|E_T(p) − E_T(q)| ≤ tol·max(1, E_T(p))`.
pub fn effects_equal<T: Scalar>(
    tumor: &Radiosensitivity<T>,
    p: &Protocol<T>,
    q: &Protocol<T>,
    tol: T,
) -> bool {
    let ep = tumor_effect(tumor, p);
    let eq = tumor_effect(tumor, q);
    (ep - eq).abs() <= tol * unit_scale(ep)
}
