//! Scalar abstraction shared by every solver.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the solvers can run on.
///
/// Besides the arithmetic, each implementation carries the comparison
/// tolerances used by the branch predicates. They are relative tolerances and
/// scale with the magnitude of the compared quantities.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative tolerance for "is this value an integer" tests (K and ρ_T ∈ ℕ).
    fn integrality_tol() -> Self;
    /// Relative gate for treating the regime discriminant as zero.
    fn omega_zero_tol() -> Self;
    /// Distance from a bound within which an interior dose snaps onto it.
    fn snap_tol() -> Self;
    /// Relative tolerance for declaring two candidate objectives tied.
    fn tie_tol() -> Self;
    /// Relative tolerance for feasibility and constraint activity checks.
    fn feasibility_tol() -> Self;

    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a fraction count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }
}

impl Scalar for f64 {
    fn integrality_tol() -> Self {
        1e-9
    }
    fn omega_zero_tol() -> Self {
        1e-12
    }
    fn snap_tol() -> Self {
        1e-9
    }
    fn tie_tol() -> Self {
        1e-12
    }
    fn feasibility_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn integrality_tol() -> Self {
        1e-5
    }
    fn omega_zero_tol() -> Self {
        1e-6
    }
    fn snap_tol() -> Self {
        1e-4
    }
    fn tie_tol() -> Self {
        1e-6
    }
    fn feasibility_tol() -> Self {
        1e-5
    }
}

/// `max(1, |x|)`, the scale used for relative comparisons.
pub(crate) fn unit_scale<T: Scalar>(x: T) -> T {
    x.abs().max(T::one())
}

/// Nearest integer when `x` lies within the integrality tolerance of one.
pub(crate) fn as_integer<T: Scalar>(x: T) -> Option<T> {
    let r = x.round();
    if (x - r).abs() <= T::integrality_tol() * unit_scale(x) {
        Some(r)
    } else {
        None
    }
}

/// Floor that treats near-integers as exact.
pub(crate) fn tolerant_floor<T: Scalar>(x: T) -> T {
    as_integer(x).unwrap_or_else(|| x.floor())
}

/// Ceiling that treats near-integers as exact.
pub(crate) fn tolerant_ceil<T: Scalar>(x: T) -> T {
    as_integer(x).unwrap_or_else(|| x.ceil())
}

/// Integral scalar to a count. Callers guarantee `x` is a non-negative integer
/// within range.
pub(crate) fn to_count<T: Scalar>(x: T) -> u64 {
    x.to_u64().expect("integral count in range")
}

/// Positive root of `a·x² + b·x = c` for `a, b > 0`, `c ≥ 0`.
///
/// Uses `2c / (b + sqrt(b² + 4ac))`, which avoids the cancellation of the
/// textbook form when `4ac ≪ b²`.
pub fn positive_root<T: Scalar>(a: T, b: T, c: T) -> T {
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    (two * c) / (b + (b * b + four * a * c).sqrt())
}
