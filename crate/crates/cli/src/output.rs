//! Number formatting and shared JSON pieces.

use std::str::FromStr;

use fraxion::{format_sig, Protocol, Regime};
use serde_json::{json, Value};

/// Significant digits for rendered numbers, or full `f64` precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Significant(usize),
    Full,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Significant(6)
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(Precision::Full);
        }
        match s.parse::<usize>() {
            Ok(k @ 1..=17) => Ok(Precision::Significant(k)),
            _ => Err(format!("expected 1..=17 or `full`, got `{s}`")),
        }
    }
}

impl Precision {
    pub fn text(self, x: f64) -> String {
        match self {
            Precision::Full => format!("{x}"),
            Precision::Significant(k) => format_sig(x, k),
        }
    }

    /// JSON number; non-finite values become null.
    pub fn num(self, x: f64) -> Value {
        let v = match self {
            Precision::Full => x,
            Precision::Significant(k) => format_sig(x, k).parse().unwrap_or(x),
        };
        if v.is_finite() {
            json!(v)
        } else {
            Value::Null
        }
    }

    pub fn protocol(self, p: &Protocol<f64>) -> Value {
        Value::Array(
            p.groups()
                .iter()
                .map(|g| json!({ "count": g.count, "dose": self.num(g.dose) }))
                .collect(),
        )
    }

    pub fn protocol_text(self, p: &Protocol<f64>) -> String {
        match self {
            Precision::Significant(k) => p.render(k),
            Precision::Full => {
                let parts: Vec<String> = p.groups().iter().map(|g| format!("{}×{}", g.count, g.dose)).collect();
                format!("{} Gy", parts.join(" + "))
            }
        }
    }
}

pub fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Hyper => "hyper",
        Regime::Hypo => "hypo",
        Regime::Neutral => "neutral",
    }
}

/// Left-aligned `key  value` lines.
pub fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }
    out
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_parsing() {
        assert_eq!("full".parse::<Precision>(), Ok(Precision::Full));
        assert_eq!("4".parse::<Precision>(), Ok(Precision::Significant(4)));
        assert!("0".parse::<Precision>().is_err());
        assert!("x".parse::<Precision>().is_err());
    }

    #[test]
    fn numbers_are_rounded_to_significant_digits() {
        let p = Precision::default();
        assert_eq!(p.num(1.0092521257733), json!(1.00925));
        assert_eq!(p.num(f64::NEG_INFINITY), Value::Null);
        assert_eq!(Precision::Full.num(0.1 + 0.2), json!(0.30000000000000004));
    }
}
