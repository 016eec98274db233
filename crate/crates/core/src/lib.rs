//! Optimal radiotherapy fractionation under the linear-quadratic model.
//!
//! Given tumor and organ-at-risk radiosensitivities, a sparing factor δ and
//! per-fraction dose bounds, the solvers return the optimal number of
//! fractions and doses in closed form:
//!
//! * [`solve_p1`] maximizes the tumor effect under an OAR budget.
//! * [`solve_p2`] minimizes the OAR effect under a tumor-effect floor.
//! * [`min_total_dose`] finds the cheapest protocol with a given tumor effect.
//!
//! [`oracle`] checks any of these by grid search over small instances.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases
//! fix the common case.
//!
//! ```
//! use fraxion::{solve_p1, ProblemParams64};
//!
//! let params = ProblemParams64::from_values(0.05, 0.005, 0.04, 0.02, 0.3, 1.0, 6.0)?;
//! let report = solve_p1(&params, 0.78)?;
//! assert_eq!(report.n_opt, 56);
//! # Ok::<(), fraxion::FraxionError>(())
//! ```

pub mod equivalence;
pub mod error;
pub mod oracle;
pub mod p1;
pub mod p2;
pub mod protocol;
pub mod radiobiology;
pub mod report;
pub mod scalar;

pub use equivalence::{
    bed_uniform, bed_uniform_checked, effects_equal, min_total_dose, BedConversion,
    EquivalenceQuery,
};
pub use error::{FraxionError, Result};
pub use oracle::{
    grid_best_fixed_n, oracle_solve, verify, Diagnostics, OracleConfig, OracleProblem,
    OracleResult,
};
pub use p1::{boundary_mix, solve_p1, solve_p1_fixed, solve_p1_with, BoundaryMix};
pub use p2::{solve_p2, solve_p2_fixed, solve_p2_with};
pub use protocol::{format_sig, DoseGroup, Protocol};
pub use radiobiology::{
    oar_effect, omega, p1_thresholds, p2_thresholds, phi, survival_fraction, tumor_effect,
    uniform_dose_for_budget, DoseBounds, ProblemParams, Radiosensitivity, Regime, Thresholds,
};
pub use report::{Alternate, CaseLabel, P1Case, P2Case, SolutionReport, SolverConfig};
pub use scalar::{positive_root, Scalar};

pub type Radiosensitivity64 = Radiosensitivity<f64>;
pub type DoseBounds64 = DoseBounds<f64>;
pub type ProblemParams64 = ProblemParams<f64>;
pub type Protocol64 = Protocol<f64>;
pub type SolutionReport64 = SolutionReport<f64>;
pub type EquivalenceQuery64 = EquivalenceQuery<f64>;
pub type OracleConfig64 = OracleConfig<f64>;
pub type OracleProblem64 = OracleProblem<f64>;
pub type OracleResult64 = OracleResult<f64>;
