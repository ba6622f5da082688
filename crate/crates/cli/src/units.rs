//! Unit-suffixed quantities: `"596 hz"`, `"30 per_gamma"`, `"6.6 ms"`.
//!
//! Bare numbers are taken as angular rates (rad/s) or seconds, or as
//! dimensionless values when the config has no `[cavity].gamma`.

use std::f64::consts::PI;

use toml::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Rate,
    Time,
}

/// Reference rates that relative units resolve against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub gamma: f64,
    pub kappa: Option<f64>,
    /// Absolute units (`hz`, `ms`, ...) are only meaningful when `gamma` was
    /// given in rad/s.
    pub physical: bool,
}

fn factor(unit: &str, dim: Dimension, scales: &Scales, key: &str) -> CliResult<f64> {
    let relative = |rate: Option<f64>, name: &str| -> CliResult<f64> {
        let r = rate.ok_or_else(|| CliError::config(key, format!("`{name}` is not known at this point")))?;
        Ok(match dim {
            Dimension::Rate => r,
            Dimension::Time => 1.0 / r,
        })
    };
    let absolute = |f: f64| -> CliResult<f64> {
        if scales.physical {
            Ok(f)
        } else {
            Err(CliError::config(
                key,
                format!("unit `{unit}` needs [cavity].gamma in rad/s"),
            ))
        }
    };
    match (dim, unit) {
        (_, "per_gamma") => relative(Some(scales.gamma), "gamma"),
        (_, "per_kappa") => relative(scales.kappa, "kappa"),
        (Dimension::Rate, "rad_s" | "per_s") => absolute(1.0),
        (Dimension::Rate, "hz") => absolute(2.0 * PI),
        (Dimension::Rate, "khz") => absolute(2.0 * PI * 1e3),
        (Dimension::Rate, "mhz") => absolute(2.0 * PI * 1e6),
        (Dimension::Rate, "ghz") => absolute(2.0 * PI * 1e9),
        (Dimension::Time, "s") => absolute(1.0),
        (Dimension::Time, "ms") => absolute(1e-3),
        (Dimension::Time, "us") => absolute(1e-6),
        (Dimension::Time, "ns") => absolute(1e-9),
        _ => Err(CliError::config(
            key,
            format!("unknown unit `{unit}` for a {dim:?}").to_lowercase(),
        )),
    }
}

/// Splits `"<number> <unit>"`; a bare number string has an empty unit.
pub fn split_quantity(text: &str) -> Option<(f64, &str)> {
    let mut parts = text.split_whitespace();
    let number = parts.next()?.parse::<f64>().ok()?;
    let unit = parts.next().unwrap_or("");
    if parts.next().is_some() {
        return None;
    }
    Some((number, unit))
}

pub fn quantity(value: &Value, key: &str, dim: Dimension, scales: &Scales) -> CliResult<f64> {
    let v = match value {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        Value::String(s) => {
            let (number, unit) =
                split_quantity(s).ok_or_else(|| CliError::config(key, format!("cannot parse quantity `{s}`")))?;
            if unit.is_empty() {
                number
            } else {
                number * factor(unit, dim, scales, key)?
            }
        }
        other => {
            return Err(CliError::config(
                key,
                format!("expected a number or quantity, got {}", other.type_str()),
            ))
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(key, "value must be finite"))
    }
}
