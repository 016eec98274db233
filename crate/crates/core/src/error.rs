use thiserror::Error;

/// Errors raised by the solvers, the equivalence tools and the oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FraxionError {
    /// An input violates a domain invariant.
    #[error("invalid input: {0}")]
    Validation(String),

    /// The OAR budget is below the effect of a single minimum-dose fraction.
    #[error("infeasible: budget {gamma} is below the single minimum-dose effect {single_min_effect} (rho = {rho})")]
    Infeasible {
        gamma: f64,
        single_min_effect: f64,
        rho: f64,
    },

    /// No bound-respecting protocol with this fraction count meets the constraint.
    #[error("infeasible fraction count {n}: {reason}")]
    InfeasibleN { n: u64, reason: String },

    /// The threshold exceeds the configured fraction-count cap.
    #[error("fraction count threshold {rho} exceeds the cap {cap}")]
    CapExceeded { rho: f64, cap: u64 },

    /// A computed quantity contradicts the case analysis that produced it.
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Exhaustive search requested above the configured cutoff.
    #[error("fraction count {n} exceeds the exhaustive search cutoff {max}")]
    TooLarge { n: u64, max: u64 },

    /// The dose grid contains no point satisfying the constraint.
    #[error("no feasible grid point for n = {n} (refine the grid step)")]
    NoFeasibleGridPoint { n: u64 },
}

pub type Result<T, E = FraxionError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> FraxionError {
    FraxionError::Validation(msg.into())
}
