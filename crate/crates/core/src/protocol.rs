//! Run-length encoded dose schedules.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::radiobiology::DoseBounds;
use crate::scalar::Scalar;

/// `count` fractions delivered at `dose` Gy each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoseGroup<T> {
    pub count: u64,
    pub dose: T,
}

impl<T> DoseGroup<T> {
    pub fn new(count: u64, dose: T) -> Self {
        Self { count, dose }
    }
}

/// A fractionation schedule stored as run-length groups.
///
/// Canonical form: groups sorted by strictly increasing dose, every count
/// positive, at least one fraction in total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DoseGroup<T>>", into = "Vec<DoseGroup<T>>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct Protocol<T> {
    groups: Vec<DoseGroup<T>>,
}

impl<T: Scalar> Protocol<T> {
    /// Canonicalizes arbitrary groups. Zero-count groups are dropped and equal
    /// doses merged; doses must be finite and positive.
    pub fn new(groups: impl IntoIterator<Item = DoseGroup<T>>) -> Result<Self> {
        let mut groups: Vec<_> = groups.into_iter().filter(|g| g.count > 0).collect();
        for g in &groups {
            if !g.dose.is_finite() || g.dose <= T::zero() {
                return Err(invalid(format!("dose {} must be finite and positive", g.dose)));
            }
        }
        groups.sort_by(|a, b| a.dose.partial_cmp(&b.dose).expect("finite doses"));
        let mut merged: Vec<DoseGroup<T>> = Vec::with_capacity(groups.len());
        for g in groups {
            match merged.last_mut() {
                Some(last) if last.dose == g.dose => {
                    last.count = last
                        .count
                        .checked_add(g.count)
                        .ok_or_else(|| invalid("fraction count overflow"))?;
                }
                _ => merged.push(g),
            }
        }
        if merged.is_empty() {
            return Err(invalid("protocol needs at least one fraction"));
        }
        Ok(Self { groups: merged })
    }

    /// Like [`Protocol::new`] but also requires every dose within `bounds`.
    pub fn bounded(
        groups: impl IntoIterator<Item = DoseGroup<T>>,
        bounds: &DoseBounds<T>,
    ) -> Result<Self> {
        let p = Self::new(groups)?;
        p.check_bounds(bounds)?;
        Ok(p)
    }

    /// `n` identical fractions of `dose`.
    pub fn uniform(n: u64, dose: T) -> Result<Self> {
        Self::new([DoseGroup::new(n, dose)])
    }

    /// Builds a protocol from an explicit per-fraction dose list.
    pub fn from_doses(doses: &[T]) -> Result<Self> {
        Self::new(doses.iter().map(|&d| DoseGroup::new(1, d)))
    }

    pub fn check_bounds(&self, bounds: &DoseBounds<T>) -> Result<()> {
        for g in &self.groups {
            if !bounds.contains(g.dose) {
                return Err(invalid(format!(
                    "dose {} outside [{}, {}]",
                    g.dose,
                    bounds.d_min(),
                    bounds.d_max()
                )));
            }
        }
        Ok(())
    }

    pub fn groups(&self) -> &[DoseGroup<T>] {
        &self.groups
    }

    /// Number of fractions N.
    pub fn fractions(&self) -> u64 {
        self.groups.iter().map(|g| g.count).sum()
    }

    pub fn total_dose(&self) -> T {
        self.groups
            .iter()
            .fold(T::zero(), |acc, g| acc + T::from_count(g.count) * g.dose)
    }

    /// Number of fractions whose dose lies strictly inside the bounds.
    pub fn interior_fractions(&self, bounds: &DoseBounds<T>) -> u64 {
        self.groups
            .iter()
            .filter(|g| g.dose > bounds.d_min() && g.dose < bounds.d_max())
            .map(|g| g.count)
            .sum()
    }

    pub fn is_uniform(&self) -> bool {
        self.groups.len() == 1
    }

    pub fn min_dose(&self) -> T {
        self.groups[0].dose
    }

    pub fn max_dose(&self) -> T {
        self.groups[self.groups.len() - 1].dose
    }

    /// Every fraction as an explicit dose, in non-decreasing order.
    pub fn expand(&self) -> Vec<T> {
        self.groups
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.dose, g.count as usize))
            .collect()
    }

    /// Renders with the given number of significant digits, e.g.
    /// `1×1.00000 + 6×6.00000 Gy`.
    pub fn render(&self, significant: usize) -> String {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| format!("{}×{}", g.count, format_sig(g.dose, significant)))
            .collect();
        format!("{} Gy", parts.join(" + "))
    }
}

impl<T: Scalar> fmt::Display for Protocol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(6))
    }
}

impl<T: Scalar> TryFrom<Vec<DoseGroup<T>>> for Protocol<T> {
    type Error = crate::FraxionError;

    fn try_from(groups: Vec<DoseGroup<T>>) -> Result<Self> {
        Self::new(groups)
    }
}

impl<T> From<Protocol<T>> for Vec<DoseGroup<T>> {
    fn from(p: Protocol<T>) -> Self {
        p.groups
    }
}

/// Formats `x` with `significant` significant digits in plain notation.
pub fn format_sig<T: Scalar>(x: T, significant: usize) -> String {
    let v = x.to_f64().unwrap_or(f64::NAN);
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let significant = significant.max(1);
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (significant as i64 - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}
