//! Linear-quadratic model arithmetic.
//!
//! A fraction of dose `d` applied to a tissue with radiosensitivity `(α, β)`
//! contributes `α·d + β·d²` to the log cell kill. The organ at risk receives
//! the spared dose `δ·d`, so its per-fraction effect is `α₀δ·d + β₀δ²·d²`.
//! Both cases are [`phi`] with a dose `scale` of 1 or δ.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::protocol::Protocol;
use crate::scalar::{positive_root, Scalar};

fn require_positive<T: Scalar>(name: &str, x: T) -> Result<()> {
    if !x.is_finite() || x <= T::zero() {
        return Err(invalid(format!("{name} must be finite and > 0, got {x}")));
    }
    Ok(())
}

/// The `(α, β)` pair of one tissue, in Gy⁻¹ and Gy⁻².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radiosensitivity<T> {
    alpha: T,
    beta: T,
}

impl<T: Scalar> Radiosensitivity<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        require_positive("alpha", alpha)?;
        require_positive("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// α/β in Gy.
    pub fn ratio(&self) -> T {
        self.alpha / self.beta
    }

    /// Per-fraction effect of dose `r` scaled by `scale`; see [`phi`].
    pub fn effect_of(&self, scale: T, r: T) -> T {
        phi(self, scale, r)
    }

    /// Dose `r ≥ 0` with `effect_of(scale, r) = target`, for `target ≥ 0`.
    pub fn dose_for_effect(&self, scale: T, target: T) -> T {
        positive_root(self.beta * scale * scale, self.alpha * scale, target)
    }
}

/// Admissible per-fraction dose interval `[d_min, d_max]` in Gy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoseBounds<T> {
    d_min: T,
    d_max: T,
}

impl<T: Scalar> DoseBounds<T> {
    pub fn new(d_min: T, d_max: T) -> Result<Self> {
        require_positive("d_min", d_min)?;
        require_positive("d_max", d_max)?;
        if d_min >= d_max {
            return Err(invalid(format!("d_min ({d_min}) must be < d_max ({d_max})")));
        }
        Ok(Self { d_min, d_max })
    }

    pub fn d_min(&self) -> T {
        self.d_min
    }

    pub fn d_max(&self) -> T {
        self.d_max
    }

    pub fn contains(&self, d: T) -> bool {
        d >= self.d_min && d <= self.d_max
    }
}

/// Tumor and OAR radiosensitivities, sparing factor and dose bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams<T> {
    pub tumor: Radiosensitivity<T>,
    pub oar: Radiosensitivity<T>,
    delta: T,
    pub bounds: DoseBounds<T>,
}

impl<T: Scalar> ProblemParams<T> {
    pub fn new(
        tumor: Radiosensitivity<T>,
        oar: Radiosensitivity<T>,
        delta: T,
        bounds: DoseBounds<T>,
    ) -> Result<Self> {
        if !delta.is_finite() || delta <= T::zero() || delta > T::one() {
            return Err(invalid(format!("delta must lie in (0, 1], got {delta}")));
        }
        Ok(Self {
            tumor,
            oar,
            delta,
            bounds,
        })
    }

    /// Shorthand taking raw numbers in the order α_T, β_T, α₀, β₀, δ, d_min, d_max.
    #[allow(clippy::too_many_arguments)]
    pub fn from_values(
        alpha_t: T,
        beta_t: T,
        alpha_0: T,
        beta_0: T,
        delta: T,
        d_min: T,
        d_max: T,
    ) -> Result<Self> {
        Self::new(
            Radiosensitivity::new(alpha_t, beta_t)?,
            Radiosensitivity::new(alpha_0, beta_0)?,
            delta,
            DoseBounds::new(d_min, d_max)?,
        )
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// φ₀(r) = α₀δr + β₀δ²r².
    pub fn phi_oar(&self, r: T) -> T {
        phi(&self.oar, self.delta, r)
    }

    /// φ_T(r) = α_T r + β_T r².
    pub fn phi_tumor(&self, r: T) -> T {
        phi(&self.tumor, T::one(), r)
    }

    /// Sign of ω_δ after the zero gate.
    pub fn regime(&self) -> Regime {
        Regime::classify(self)
    }
}

/// Which fractionation regime the sign of ω_δ selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// ω_δ > 0: many small fractions.
    Hyper,
    /// ω_δ < 0: few large fractions.
    Hypo,
    /// ω_δ = 0 within tolerance: objective and constraint are proportional.
    Neutral,
}

impl Regime {
    /// Zero gate: `|ω| ≤ tol·(α_T/β_T + α₀/(β₀δ))`.
    pub fn classify<T: Scalar>(params: &ProblemParams<T>) -> Self {
        let tumor_ratio = params.tumor.ratio();
        let oar_ratio = params.oar.ratio() / params.delta;
        let w = tumor_ratio - oar_ratio;
        if w.abs() <= T::omega_zero_tol() * (tumor_ratio + oar_ratio) {
            Regime::Neutral
        } else if w > T::zero() {
            Regime::Hyper
        } else {
            Regime::Hypo
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Regime::Hyper => 1,
            Regime::Hypo => -1,
            Regime::Neutral => 0,
        }
    }
}

/// λ, ρ and ω_δ for one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds<T> {
    pub lambda: T,
    pub rho: T,
    pub omega: T,
}

/// `α·scale·r + β·scale²·r²`.
pub fn phi<T: Scalar>(sens: &Radiosensitivity<T>, scale: T, r: T) -> T {
    let s = scale * r;
    sens.alpha * s + sens.beta * s * s
}

fn accumulate<T: Scalar>(sens: &Radiosensitivity<T>, scale: T, p: &Protocol<T>) -> T {
    p.groups().iter().fold(T::zero(), |acc, g| {
        acc + T::from_count(g.count) * phi(sens, scale, g.dose)
    })
}

/// α·Σdᵢ + β·Σdᵢ², the tumor effect E_T.
pub fn tumor_effect<T: Scalar>(sens: &Radiosensitivity<T>, p: &Protocol<T>) -> T {
    accumulate(sens, T::one(), p)
}

/// α₀δ·Σdᵢ + β₀δ²·Σdᵢ², the OAR effect E_OAR.
pub fn oar_effect<T: Scalar>(params: &ProblemParams<T>, p: &Protocol<T>) -> T {
    accumulate(&params.oar, params.delta, p)
}

/// Accumulated survival probability exp(−E_T).
pub fn survival_fraction<T: Scalar>(sens: &Radiosensitivity<T>, p: &Protocol<T>) -> T {
    (-tumor_effect(sens, p)).exp()
}

/// ω_δ = α_T/β_T − α₀/(β₀δ), in Gy.
pub fn omega<T: Scalar>(params: &ProblemParams<T>) -> T {
    params.tumor.ratio() - params.oar.ratio() / params.delta
}

/// λ₀ = max{1, γ/φ₀(d_max)} and ρ₀ = γ/φ₀(d_min).
///
/// ρ₀ is deliberately left unclamped: ρ₀ < 1 is the infeasibility signal.
pub fn p1_thresholds<T: Scalar>(params: &ProblemParams<T>, gamma_oar: T) -> Result<Thresholds<T>> {
    require_positive("gamma_oar", gamma_oar)?;
    Ok(Thresholds {
        lambda: (gamma_oar / params.phi_oar(params.bounds.d_max)).max(T::one()),
        rho: gamma_oar / params.phi_oar(params.bounds.d_min),
        omega: omega(params),
    })
}

/// λ_T = max{1, γ_T/φ_T(d_max)} and ρ_T = max{1, γ_T/φ_T(d_min)}.
pub fn p2_thresholds<T: Scalar>(params: &ProblemParams<T>, gamma_t: T) -> Result<Thresholds<T>> {
    require_positive("gamma_t", gamma_t)?;
    Ok(Thresholds {
        lambda: (gamma_t / params.phi_tumor(params.bounds.d_max)).max(T::one()),
        rho: (gamma_t / params.phi_tumor(params.bounds.d_min)).max(T::one()),
        omega: omega(params),
    })
}

/// The dose `d > 0` with `n·phi(sens, scale, d) = gamma`.
///
/// Bound membership is the caller's concern.
pub fn uniform_dose_for_budget<T: Scalar>(
    sens: &Radiosensitivity<T>,
    scale: T,
    n: u64,
    gamma: T,
) -> Result<T> {
    if n == 0 {
        return Err(invalid("fraction count must be >= 1"));
    }
    require_positive("gamma", gamma)?;
    require_positive("scale", scale)?;
    Ok(sens.dose_for_effect(scale, gamma / T::from_count(n)))
}
