//! Grid sweeps, argmax location and golden-section refinement.
//!
//! Cells are evaluated in parallel into fixed slots, so results never depend
//! on scheduling. Failed cells become NaN, are logged and never win a maximum.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, GateError, Result};
use crate::params::{Method, Scheme};
use crate::scattering::cooperativity_limited_fidelity;
use crate::simple_exchange::f_pi_limit;

/// Relative coordinate tolerance of the refinement.
pub const REFINE_TOLERANCE: f64 = 1e-4;

/// Maximum alternating rounds for 2-D refinement.
pub const MAX_ROUNDS: usize = 50;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_GOLDEN_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

/// One swept coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn new(name: impl Into<String>, start: f64, end: f64, points: usize, scale: Scale) -> Result<Self> {
        let axis = Self {
            name: name.into(),
            start,
            end,
            points,
            scale,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn linear(name: impl Into<String>, start: f64, end: f64, points: usize) -> Result<Self> {
        Self::new(name, start, end, points, Scale::Linear)
    }

    pub fn log(name: impl Into<String>, start: f64, end: f64, points: usize) -> Result<Self> {
        Self::new(name, start, end, points, Scale::Log)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(invalid(
                "points",
                format!("axis `{}` needs at least 2 points", self.name),
            ));
        }
        if !self.start.is_finite() || !self.end.is_finite() || self.start >= self.end {
            return Err(invalid(
                "range",
                format!("axis `{}` range must be finite and ordered", self.name),
            ));
        }
        if self.scale == Scale::Log && self.start <= 0.0 {
            return Err(invalid("range", format!("log axis `{}` must be positive", self.name)));
        }
        Ok(())
    }

    /// Coordinate in which the grid is uniform.
    fn to_uniform(&self, x: f64) -> f64 {
        match self.scale {
            Scale::Linear => x,
            Scale::Log => x.ln(),
        }
    }

    fn at_uniform(&self, u: f64) -> f64 {
        match self.scale {
            Scale::Linear => u,
            Scale::Log => u.exp(),
        }
    }

    pub fn value(&self, k: usize) -> f64 {
        if k == 0 {
            return self.start;
        }
        if k + 1 == self.points {
            return self.end;
        }
        let (a, b) = (self.to_uniform(self.start), self.to_uniform(self.end));
        self.at_uniform(a + (b - a) * k as f64 / (self.points - 1) as f64)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }

    fn step(&self) -> f64 {
        (self.to_uniform(self.end) - self.to_uniform(self.start)) / (self.points - 1) as f64
    }
}

/// What is swept and with which evaluator; hashed into the result metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub label: String,
    pub scheme: Scheme,
    pub method: Method,
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<String, f64>,
}

impl SweepSpec {
    pub fn new(label: impl Into<String>, scheme: Scheme, method: Method, axes: Vec<Axis>) -> Result<Self> {
        let spec = Self {
            label: label.into(),
            scheme,
            method,
            axes,
            fixed: BTreeMap::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_fixed(mut self, name: impl Into<String>, value: f64) -> Self {
        self.fixed.insert(name.into(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(invalid("axes", "sweeps take one or two axes"));
        }
        self.axes.iter().try_for_each(Axis::validate)
    }

    pub fn cells(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    /// Grid indices of a flat cell, first axis slowest.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (d, axis) in self.axes.iter().enumerate().rev() {
            idx[d] = flat % axis.points;
            flat /= axis.points;
        }
        idx
    }

    pub fn coords(&self, idx: &[usize]) -> Vec<f64> {
        self.axes.iter().zip(idx).map(|(a, &k)| a.value(k)).collect()
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn config_hash(&self) -> String {
        config_hash(self)
    }
}

/// SHA-256 hex digest of the JSON encoding of any serializable config.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// A failed cell and the evaluator's message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMaximum {
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub label: String,
    pub scheme: Scheme,
    pub method: Method,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub grid: Vec<Vec<f64>>,
    /// Row-major values, first axis slowest; NaN marks a failed cell.
    pub values: Vec<f64>,
    pub maximum: Option<GridMaximum>,
    pub errors: Vec<CellError>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn value_at(&self, idx: &[usize]) -> f64 {
        let mut flat = 0;
        for (axis, &k) in self.axes.iter().zip(idx) {
            flat = flat * axis.points + k;
        }
        self.values[flat]
    }

    /// Deterministic JSON encoding; NaN cells appear as `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sweep result serializes")
    }
}

fn cell<F>(spec: &SweepSpec, evaluator: &F, flat: usize) -> std::result::Result<f64, String>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let coords = spec.coords(&spec.unflatten(flat));
    match evaluator(&coords) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("non-finite value {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn assemble(spec: &SweepSpec, outcomes: Vec<std::result::Result<f64, String>>) -> SweepResult {
    let mut values = Vec::with_capacity(outcomes.len());
    let mut errors = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(v) => values.push(v),
            Err(message) => {
                values.push(f64::NAN);
                errors.push(CellError { index, message });
            }
        }
    }
    // Strict comparison: the lowest index wins ties.
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    let maximum = best.map(|(i, value)| {
        let index = spec.unflatten(i);
        GridMaximum {
            coords: spec.coords(&index),
            index,
            value,
        }
    });
    SweepResult {
        axes: spec.axes.clone(),
        grid: spec.axes.iter().map(Axis::values).collect(),
        values,
        maximum,
        errors,
        metadata: SweepMetadata {
            label: spec.label.clone(),
            scheme: spec.scheme,
            method: spec.method,
            config_hash: spec.config_hash(),
        },
    }
}

/// Evaluates every grid cell on the rayon pool.
pub fn run_sweep<F>(spec: &SweepSpec, evaluator: F) -> Result<SweepResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    spec.validate()?;
    let outcomes: Vec<_> = (0..spec.cells())
        .into_par_iter()
        .map(|i| cell(spec, &evaluator, i))
        .collect();
    Ok(assemble(spec, outcomes))
}

/// Single-threaded [`run_sweep`].
pub fn run_sweep_serial<F>(spec: &SweepSpec, evaluator: F) -> Result<SweepResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    spec.validate()?;
    let outcomes: Vec<_> = (0..spec.cells()).map(|i| cell(spec, &evaluator, i)).collect();
    Ok(assemble(spec, outcomes))
}

/// Golden-section maximization of `f` on `[a, b]` until the bracket is
/// narrower than `tol`. Returns the best point seen.
pub fn golden_section_max<F>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let score = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (score(x1), score(x2));
    let mut best = if f2 > f1 { (x2, f2) } else { (x1, f1) };
    for _ in 0..MAX_GOLDEN_ITERATIONS {
        if hi - lo <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = score(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = score(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

/// Refined maximum location and value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedMaximum {
    pub coords: Vec<f64>,
    pub value: f64,
}

/// Golden-section refinement around the best grid cell; alternating 1-D
/// searches for two axes. Never returns less than the best grid value.
pub fn refine_max<F>(result: &SweepResult, evaluator: F) -> Result<RefinedMaximum>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let best = result.maximum.as_ref().ok_or(GateError::EmptySweep)?;
    let on_boundary = result
        .axes
        .iter()
        .zip(&best.index)
        .any(|(axis, &k)| k == 0 || k + 1 == axis.points);
    if on_boundary {
        let mut flat = 0;
        for (axis, &k) in result.axes.iter().zip(&best.index) {
            flat = flat * axis.points + k;
        }
        return Err(GateError::BoundaryMaximum(flat));
    }

    let axes = &result.axes;
    let mut u: Vec<f64> = axes.iter().zip(&best.coords).map(|(a, &x)| a.to_uniform(x)).collect();
    let mut value = best.value;
    let eval_at = |u: &[f64]| -> f64 {
        let x: Vec<f64> = axes.iter().zip(u).map(|(a, &v)| a.at_uniform(v)).collect();
        match evaluator(&x) {
            Ok(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    };

    let rounds = if axes.len() == 1 { 1 } else { MAX_ROUNDS };
    for _ in 0..rounds {
        let mut moved = false;
        for d in 0..axes.len() {
            let axis = &axes[d];
            let (lo_lim, hi_lim) = (axis.to_uniform(axis.start), axis.to_uniform(axis.end));
            let lo = (u[d] - axis.step()).max(lo_lim);
            let hi = (u[d] + axis.step()).min(hi_lim);
            let tol = match axis.scale {
                Scale::Log => REFINE_TOLERANCE,
                Scale::Linear => REFINE_TOLERANCE * u[d].abs().max(axis.step()),
            };
            let (ud, vd) = golden_section_max(
                |t| {
                    let mut trial = u.clone();
                    trial[d] = t;
                    eval_at(&trial)
                },
                lo,
                hi,
                tol,
            );
            if vd > value {
                if (ud - u[d]).abs() > tol {
                    moved = true;
                }
                u[d] = ud;
                value = vd;
            }
        }
        if !moved {
            break;
        }
    }
    Ok(RefinedMaximum {
        coords: axes.iter().zip(&u).map(|(a, &v)| a.at_uniform(v)).collect(),
        value,
    })
}

/// Cooperativity-limited maxima of the three schemes with every error term
/// zeroed, plus the large-C asymptotes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub cooperativity: f64,
    pub scattering: f64,
    pub simple_exchange: f64,
    pub raman: f64,
    /// `1 - 5/(4C)`.
    pub scattering_asymptote: f64,
    /// `1 - pi/sqrt C`.
    pub exchange_asymptote: f64,
}

/// `max_Delta (F_pi + 1)/2` of the adiabatic exchange limit, also the Raman
/// limit along its ridge.
pub fn exchange_limited_fidelity(cooperativity: f64) -> f64 {
    if cooperativity.is_infinite() {
        return 1.0;
    }
    // In units of kappa; the optimum sits near sqrt(C)/2.
    let centre = 0.5 * cooperativity.sqrt();
    let (_, f_pi) = golden_section_max(
        |u| f_pi_limit(cooperativity, 1.0, u.exp()),
        (centre / 20.0).ln(),
        (centre * 20.0).ln(),
        1e-10,
    );
    0.5 * (f_pi + 1.0)
}

pub fn cooperativity_scaling(cooperativities: &[f64]) -> Result<Vec<ScalingRow>> {
    cooperativities
        .iter()
        .map(|&c| {
            if c.is_nan() || c < 1.0 {
                return Err(invalid("cooperativity", format!("must be >= 1, got {c}")));
            }
            let exchange = exchange_limited_fidelity(c);
            Ok(ScalingRow {
                cooperativity: c,
                scattering: cooperativity_limited_fidelity(c),
                simple_exchange: exchange,
                raman: exchange,
                scattering_asymptote: 1.0 - 5.0 / (4.0 * c),
                exchange_asymptote: 1.0 - PI / c.sqrt(),
            })
        })
        .collect()
}
