//! Problem files: one TOML document per instance.

use std::fmt;
use std::path::Path;

use fraxion::{DoseBounds, EquivalenceQuery, ProblemParams, Radiosensitivity};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    P1,
    P2,
    P3,
    Bed,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::P1 => "p1",
            ProblemKind::P2 => "p2",
            ProblemKind::P3 => "p3",
            ProblemKind::Bed => "bed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TissueFields {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BedFields {
    pub n: u64,
    pub d: f64,
    pub n_target: u64,
}

/// Field order is the canonical serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub problem_kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub tumor: TissueFields,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oar: Option<TissueFields>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bed: Option<BedFields>,
}

fn missing(kind: ProblemKind, field: &str) -> CliError {
    CliError::Validation(format!("problem_kind = \"{kind}\" requires `{field}`"))
}

fn forbidden(kind: ProblemKind, field: &str) -> CliError {
    CliError::Validation(format!("`{field}` is not allowed for problem_kind = \"{kind}\""))
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: Self = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem file serializes")
    }

    /// Checks field presence per kind and every domain invariant.
    pub fn validate(&self) -> Result<(), CliError> {
        let kind = self.problem_kind;
        let require = |present: bool, field: &str| if present { Ok(()) } else { Err(missing(kind, field)) };
        let reject = |present: bool, field: &str| if present { Err(forbidden(kind, field)) } else { Ok(()) };
        match kind {
            ProblemKind::P1 | ProblemKind::P2 => {
                require(self.oar.is_some(), "oar")?;
                require(self.delta.is_some(), "delta")?;
                require(self.d_min.is_some(), "d_min")?;
                require(self.d_max.is_some(), "d_max")?;
                require(self.gamma.is_some(), "gamma")?;
                reject(self.bed.is_some(), "bed")?;
                self.params()?;
                self.gamma_value()?;
            }
            ProblemKind::P3 => {
                reject(self.oar.is_some(), "oar")?;
                reject(self.delta.is_some(), "delta")?;
                reject(self.bed.is_some(), "bed")?;
                require(self.d_min.is_some(), "d_min")?;
                require(self.d_max.is_some(), "d_max")?;
                require(self.gamma.is_some(), "gamma")?;
                self.query()?;
            }
            ProblemKind::Bed => {
                reject(self.oar.is_some(), "oar")?;
                reject(self.delta.is_some(), "delta")?;
                reject(self.gamma.is_some(), "gamma")?;
                require(self.bed.is_some(), "bed")?;
                if self.d_min.is_some() != self.d_max.is_some() {
                    return Err(CliError::Validation("`d_min` and `d_max` must be given together".into()));
                }
                self.tumor()?;
                self.bounds_opt()?;
                let b = self.bed.expect("checked");
                if b.n == 0 || b.n_target == 0 {
                    return Err(CliError::Validation("bed.n and bed.n_target must be >= 1".into()));
                }
                if !b.d.is_finite() || b.d <= 0.0 {
                    return Err(CliError::Validation(format!("bed.d must be > 0, got {}", b.d)));
                }
            }
        }
        Ok(())
    }

    pub fn tumor(&self) -> Result<Radiosensitivity<f64>, CliError> {
        Ok(Radiosensitivity::new(self.tumor.alpha, self.tumor.beta)?)
    }

    pub fn bounds_opt(&self) -> Result<Option<DoseBounds<f64>>, CliError> {
        match (self.d_min, self.d_max) {
            (Some(lo), Some(hi)) => Ok(Some(DoseBounds::new(lo, hi)?)),
            _ => Ok(None),
        }
    }

    pub fn bounds(&self) -> Result<DoseBounds<f64>, CliError> {
        self.bounds_opt()?.ok_or_else(|| missing(self.problem_kind, "d_min"))
    }

    pub fn params(&self) -> Result<ProblemParams<f64>, CliError> {
        let kind = self.problem_kind;
        let oar = self.oar.ok_or_else(|| missing(kind, "oar"))?;
        Ok(ProblemParams::new(
            self.tumor()?,
            Radiosensitivity::new(oar.alpha, oar.beta)?,
            self.delta.ok_or_else(|| missing(kind, "delta"))?,
            self.bounds()?,
        )?)
    }

    pub fn gamma_value(&self) -> Result<f64, CliError> {
        let g = self.gamma.ok_or_else(|| missing(self.problem_kind, "gamma"))?;
        if !g.is_finite() || g <= 0.0 {
            return Err(CliError::Validation(format!("gamma must be finite and > 0, got {g}")));
        }
        Ok(g)
    }

    pub fn query(&self) -> Result<EquivalenceQuery<f64>, CliError> {
        Ok(EquivalenceQuery::new(self.tumor()?, self.bounds()?, self.gamma_value()?)?)
    }
}
