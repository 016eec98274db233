use serde::{Deserialize, Serialize};

use crate::protocol::Protocol;
use crate::radiobiology::Thresholds;

/// Row of the P1 decision tree that produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum P1Case {
    Infeasible,
    /// ρ₀ = 1: a single minimum-dose fraction.
    SingleMinForced,
    /// ρ₀ ∈ (1, 2): a single fraction at min{d_max, d̄₀}.
    SingleDose,
    /// ⌊λ₀⌋ = ⌊ρ₀⌋: every feasible N is saturated at d_max.
    AllMaxWindow,
    /// ω_δ > 0: ⌊ρ₀⌋ equal fractions.
    HyperUniform,
    /// ω_δ < 0: best of (⌈λ₀⌉, boundary structure) and (⌊λ₀⌋, all d_max).
    HypoCompared,
    /// ω_δ = 0: every active protocol is optimal.
    OmegaZeroFamily,
}

/// Row of the P2 decision tree that produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum P2Case {
    /// ρ_T = 1: a single minimum-dose fraction meets the floor.
    SingleMinForced,
    /// ρ_T ∈ ℕ with no integer in [λ_T, ρ_T): ρ_T minimum-dose fractions.
    AllMinForced,
    /// ω_δ > 0 and ρ_T ∈ ℕ, ρ_T ≥ 2.
    HyperAllMinInteger,
    /// ω_δ > 0, ρ_T ∉ ℕ: best of (⌊ρ_T⌋, uniform) and (⌈ρ_T⌉, all d_min).
    HyperCompared,
    /// ω_δ < 0: ⌈λ_T⌉ fractions with boundary structure.
    HypoStructure,
    /// ω_δ = 0: every active protocol is optimal.
    OmegaZeroFamily,
    /// ⌈λ_T⌉ > ⌊ρ_T⌋: no integer in the window, ⌈ρ_T⌉ minimum-dose fractions.
    EmptyWindowAllMin,
}

/// Decision tree label of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "problem", content = "case", rename_all = "lowercase")]
pub enum CaseLabel {
    P1(P1Case),
    P2(P2Case),
    /// Minimum total dose; the label reuses the P2 rows.
    P3(P2Case),
}

impl CaseLabel {
    pub fn name(&self) -> &'static str {
        match self {
            CaseLabel::P1(c) => match c {
                P1Case::Infeasible => "Infeasible",
                P1Case::SingleMinForced => "SingleMinForced",
                P1Case::SingleDose => "SingleDose",
                P1Case::AllMaxWindow => "AllMaxWindow",
                P1Case::HyperUniform => "HyperUniform",
                P1Case::HypoCompared => "HypoCompared",
                P1Case::OmegaZeroFamily => "OmegaZeroFamily",
            },
            CaseLabel::P2(c) | CaseLabel::P3(c) => match c {
                P2Case::SingleMinForced => "SingleMinForced",
                P2Case::AllMinForced => "AllMinForced",
                P2Case::HyperAllMinInteger => "HyperAllMinInteger",
                P2Case::HyperCompared => "HyperCompared",
                P2Case::HypoStructure => "HypoStructure",
                P2Case::OmegaZeroFamily => "OmegaZeroFamily",
                P2Case::EmptyWindowAllMin => "EmptyWindowAllMin",
            },
        }
    }
}

/// A co-optimal (or tied) alternative to the reported protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: crate::Scalar + Serialize",
    deserialize = "T: crate::Scalar + Deserialize<'de>"
))]
pub struct Alternate<T> {
    pub n: u64,
    pub protocol: Protocol<T>,
}

/// Outcome of one analytic solve.
///
/// `objective_primary` is the optimized quantity (E_T for P1, E_OAR for P2,
/// total dose for P3) and `objective_secondary` the other effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: crate::Scalar + Serialize",
    deserialize = "T: crate::Scalar + Deserialize<'de>"
))]
pub struct SolutionReport<T> {
    pub case: CaseLabel,
    pub n_opt: u64,
    pub protocol: Protocol<T>,
    pub objective_primary: T,
    pub objective_secondary: T,
    pub constraint_active: bool,
    pub thresholds: Thresholds<T>,
    pub alternates: Vec<Alternate<T>>,
}

/// Solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Largest ρ accepted before refusing with `CapExceeded`.
    pub n_cap: u64,
    /// Upper limit on alternates listed for the ω_δ = 0 family.
    pub max_alternates: usize,
}

impl SolverConfig {
    pub const DEFAULT_N_CAP: u64 = 1_000_000_000;
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_cap: Self::DEFAULT_N_CAP,
            max_alternates: 10_000,
        }
    }
}
