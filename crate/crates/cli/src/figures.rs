//! Figure data sets.
//!
//! A figure is a base configuration plus an ordered list of columns. Axis
//! columns span the grid (first axis slowest). Every other column is computed
//! per row from the base configuration with `set` and `set_from` overrides
//! applied, so the CSV comment block is enough to recompute any cell.

use std::collections::BTreeMap;

use cavity_gate::sweep::{cooperativity_scaling, refine_max, run_sweep_serial, Axis, Scale, SweepSpec};
use cavity_gate::{GateError, Method, Scheme};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::config::{set_path, GateConfig, MethodArg, SchemeArg};
use crate::error::{CliError, CliResult};
use crate::output::{parse_csv, render_csv, round_sig, CsvDocument};

pub const FIGURE_NAMES: &[&str] = &[
    "fig2a", "fig2b", "fig2c", "fig4", "fig6a", "fig6b", "fig7", "fig8a", "fig8b",
];

/// Points of the knob grid searched before golden-section refinement.
const KNOB_POINTS: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    /// Grid coordinate.
    Axis,
    /// Per-row optimum of `target` maximizing the scheme's fidelity.
    Knob,
    /// Output of the gate evaluator.
    Evaluated,
    /// Closed-form cooperativity limit or its asymptote.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    #[default]
    Fidelity,
    GateTime,
    CooperativityLimit,
    Asymptote,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Column {
    pub kind: Option<ColumnKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<Quantity>,
    /// Constant overrides keyed by dotted config path.
    #[serde(default, skip_serializing_if = "Table::is_empty")]
    pub set: Table,
    /// Overrides taken from earlier columns: path -> `"<column> [unit]"`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub set_from: BTreeMap<String, String>,
    /// Config path a knob column optimizes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
}

impl Column {
    fn axis(start: f64, end: f64, points: usize, log: bool) -> Self {
        Self {
            kind: Some(ColumnKind::Axis),
            start: Some(start),
            end: Some(end),
            points: Some(points),
            scale: Some(if log { "log" } else { "linear" }.into()),
            ..Self::default()
        }
    }

    fn evaluated(scheme: &str, method: &str) -> Self {
        Self {
            kind: Some(ColumnKind::Evaluated),
            scheme: Some(scheme.into()),
            method: Some(method.into()),
            ..Self::default()
        }
    }

    fn derived(scheme: &str, quantity: Quantity) -> Self {
        Self {
            kind: Some(ColumnKind::Derived),
            scheme: Some(scheme.into()),
            quantity: Some(quantity),
            ..Self::default()
        }
    }

    fn knob(scheme: &str, method: &str, target: &str, unit: &str, start: f64, end: f64) -> Self {
        Self {
            kind: Some(ColumnKind::Knob),
            scheme: Some(scheme.into()),
            method: Some(method.into()),
            target: Some(target.into()),
            unit: Some(unit.into()),
            start: Some(start),
            end: Some(end),
            points: Some(KNOB_POINTS),
            scale: Some("log".into()),
            ..Self::default()
        }
    }

    fn quantity(mut self, q: Quantity) -> Self {
        self.quantity = Some(q);
        self
    }

    fn set(mut self, path: &str, value: impl Into<Value>) -> Self {
        self.set.insert(path.into(), value.into());
        self
    }

    fn set_from(mut self, path: &str, source: &str) -> Self {
        self.set_from.insert(path.into(), source.into());
        self
    }

    fn kind(&self, name: &str) -> CliResult<ColumnKind> {
        self.kind
            .ok_or_else(|| CliError::config(format!("figure.columns.{name}.kind"), "missing"))
    }

    fn scheme_arg(&self, name: &str) -> CliResult<SchemeArg> {
        let key = format!("figure.columns.{name}.scheme");
        let s = self
            .scheme
            .as_deref()
            .ok_or_else(|| CliError::config(&key, "missing"))?;
        SchemeArg::parse(s).ok_or_else(|| CliError::config(key, format!("unknown scheme `{s}`")))
    }

    fn method_arg(&self, name: &str) -> CliResult<MethodArg> {
        let key = format!("figure.columns.{name}.method");
        let s = self
            .method
            .as_deref()
            .ok_or_else(|| CliError::config(&key, "missing"))?;
        MethodArg::parse(s).ok_or_else(|| CliError::config(key, format!("unknown method `{s}`")))
    }

    fn axis_spec(&self, name: &str) -> CliResult<Axis> {
        let key = |k: &str| format!("figure.columns.{name}.{k}");
        let start = self.start.ok_or_else(|| CliError::config(key("start"), "missing"))?;
        let end = self.end.ok_or_else(|| CliError::config(key("end"), "missing"))?;
        let points = self.points.ok_or_else(|| CliError::config(key("points"), "missing"))?;
        let scale = match self.scale.as_deref() {
            None | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => return Err(CliError::config(key("scale"), format!("unknown scale `{other}`"))),
        };
        Axis::new(name, start, end, points, scale).map_err(|e| CliError::config(key("start"), e.to_string()))
    }
}

/// A complete figure definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub name: String,
    pub title: String,
    pub base: Table,
    pub columns: Vec<(String, Column)>,
}

fn base(text: &str) -> Table {
    text.parse().expect("built-in figure config parses")
}

/// Core method tag for a CLI method on `scheme`.
pub fn core_method(scheme: Scheme, method: MethodArg) -> Method {
    match (scheme, method) {
        (_, MethodArg::Analytic) => Method::Analytic,
        (Scheme::Scattering, MethodArg::Numeric) => Method::NumericAmplitude,
        (_, MethodArg::Numeric) => Method::NonHermitian,
        (_, MethodArg::Lindblad) => Method::Lindblad,
    }
}

const SCATTERING_BASE: &str = r#"
[cavity]
cooperativity = 4000
g_over_kappa = 0.1

[decoherence]
gamma_eff = "1e-5 per_gamma"

[scheme.scattering]
delta_eps_a = 0
delta_eps_b = 0
"#;

const EXCHANGE_BASE: &str = r#"
[cavity]
cooperativity = 8000
g_over_kappa = 0.1

[decoherence]
gamma_eff = 0

[scheme.simple_exchange]
delta_eg = "inf"
delta_eps = 0

[scheme.raman]
detuning = "1 per_kappa"
omega_over_delta = 0.05
"#;

const REGIMES: &[(&str, f64)] = &[("gk0.01", 0.01), ("gk0.5", 0.5), ("gk10", 10.0)];

fn fig2a() -> Figure {
    let mut columns = vec![("T_gamma".to_string(), Column::axis(0.05, 50.0, 121, true))];
    for &(tag, gk) in REGIMES {
        for method in ["numeric", "analytic"] {
            columns.push((
                format!("F_{method}_{tag}"),
                Column::evaluated("scattering", method)
                    .set("cavity.g_over_kappa", gk)
                    .set("scheme.scattering.delta_p", "30 per_gamma")
                    .set_from("scheme.scattering.gate_time", "T_gamma per_gamma"),
            ));
        }
    }
    Figure {
        name: "fig2a".into(),
        title: "scattering gate fidelity against gate time".into(),
        base: base(SCATTERING_BASE),
        columns,
    }
}

fn fig2b() -> Figure {
    let mut columns = vec![("delta_p_over_gamma".to_string(), Column::axis(0.0, 100.0, 101, false))];
    for &(tag, gk) in REGIMES {
        for method in ["numeric", "analytic"] {
            columns.push((
                format!("F_{method}_{tag}"),
                Column::evaluated("scattering", method)
                    .set("cavity.g_over_kappa", gk)
                    .set("scheme.scattering.gate_time", "2 per_gamma")
                    .set_from("scheme.scattering.delta_p", "delta_p_over_gamma per_gamma"),
            ));
        }
    }
    Figure {
        name: "fig2b".into(),
        title: "scattering gate fidelity against photon detuning".into(),
        base: base(SCATTERING_BASE),
        columns,
    }
}

fn fig2c() -> Figure {
    let mut columns = vec![("g_over_kappa".to_string(), Column::axis(1e-3, 1e2, 101, true))];
    for (tag, dp) in [("dp0", "0 per_gamma"), ("dp30", "30 per_gamma")] {
        for method in ["numeric", "analytic"] {
            columns.push((
                format!("F_{method}_{tag}"),
                Column::evaluated("scattering", method)
                    .set("scheme.scattering.gate_time", "2 per_gamma")
                    .set("scheme.scattering.delta_p", dp)
                    .set_from("cavity.g_over_kappa", "g_over_kappa"),
            ));
        }
    }
    Figure {
        name: "fig2c".into(),
        title: "scattering gate fidelity against cavity regime".into(),
        base: base(SCATTERING_BASE),
        columns,
    }
}

fn fig4() -> Figure {
    let exchange = |method: &str, gk: f64| {
        Column::evaluated("simple_exchange", method)
            .set("cavity.g_over_kappa", gk)
            .set_from("scheme.simple_exchange.delta", "Delta_over_kappa per_kappa")
    };
    Figure {
        name: "fig4".into(),
        title: "simple exchange gate fidelity against cavity detuning".into(),
        base: base(EXCHANGE_BASE),
        columns: vec![
            ("Delta_over_kappa".into(), Column::axis(0.1, 1e4, 201, true)),
            ("F_numeric_weak".into(), exchange("numeric", 0.1)),
            ("F_numeric_strong".into(), exchange("numeric", 10.0)),
            ("F_analytic".into(), exchange("analytic", 0.1)),
        ],
    }
}

fn fig6a() -> Figure {
    Figure {
        name: "fig6a".into(),
        title: "Raman gate fidelity against two-photon and laser detuning".into(),
        base: base(EXCHANGE_BASE),
        columns: vec![
            ("delta_over_kappa".into(), Column::axis(0.1, 1e3, 121, true)),
            ("Delta_over_kappa".into(), Column::axis(0.1, 1e3, 121, true)),
            (
                "F_numeric".into(),
                Column::evaluated("raman", "numeric")
                    .set_from("scheme.raman.two_photon", "delta_over_kappa per_kappa")
                    .set_from("scheme.raman.detuning", "Delta_over_kappa per_kappa"),
            ),
        ],
    }
}

fn fig6b() -> Figure {
    let raman = |method: &str, ratio: f64| {
        Column::evaluated("raman", method)
            .set("scheme.raman.omega_over_delta", ratio)
            .set_from("scheme.raman.detuning", "Delta_over_kappa per_kappa")
    };
    Figure {
        name: "fig6b".into(),
        title: "Raman gate fidelity along the optimal two-photon detuning".into(),
        base: base(EXCHANGE_BASE),
        columns: vec![
            ("Delta_over_kappa".into(), Column::axis(0.1, 1e3, 121, true)),
            ("F_numeric_omega0.05".into(), raman("numeric", 0.05)),
            ("F_numeric_omega0.2".into(), raman("numeric", 0.2)),
            ("F_analytic_omega0.05".into(), raman("analytic", 0.05)),
        ],
    }
}

fn fig7() -> Figure {
    let limit = |scheme: &str, q: Quantity| Column::derived(scheme, q).set_from("cavity.cooperativity", "C");
    Figure {
        name: "fig7".into(),
        title: "cooperativity-limited fidelity".into(),
        base: base("[cavity]\ncooperativity = 1\ng_over_kappa = 0.1\n"),
        columns: vec![
            ("C".into(), Column::axis(1.0, 1e6, 121, true)),
            ("F_scattering".into(), limit("scattering", Quantity::CooperativityLimit)),
            (
                "F_simple_exchange".into(),
                limit("simple_exchange", Quantity::CooperativityLimit),
            ),
            ("F_raman".into(), limit("raman", Quantity::CooperativityLimit)),
            ("asymptote_scattering".into(), limit("scattering", Quantity::Asymptote)),
            (
                "asymptote_exchange".into(),
                limit("simple_exchange", Quantity::Asymptote),
            ),
        ],
    }
}

/// Per-decoherence-rate optimum of each scheme; panel (a) reports the
/// fidelity and panel (b) the gate time at the optimum.
fn fig8(panel: char) -> Figure {
    let gamma = "Gamma_over_gamma per_gamma";
    let knobs = [
        (
            "scattering",
            "T_opt_scattering",
            Column::knob(
                "scattering",
                "analytic",
                "scheme.scattering.gate_time",
                "per_gamma",
                1e-3,
                1e2,
            ),
            "scheme.scattering.gate_time",
            "per_gamma",
        ),
        (
            "simple_exchange",
            "Delta_opt_simple_exchange",
            Column::knob(
                "simple_exchange",
                "analytic",
                "scheme.simple_exchange.delta",
                "per_kappa",
                0.1,
                1e4,
            ),
            "scheme.simple_exchange.delta",
            "per_kappa",
        ),
        (
            "raman",
            "delta_opt_raman",
            Column::knob("raman", "analytic", "scheme.raman.two_photon", "per_kappa", 0.1, 1e4),
            "scheme.raman.two_photon",
            "per_kappa",
        ),
    ];
    let (name, title, quantity, prefix) = match panel {
        'a' => (
            "fig8a",
            "maximum fidelity against decoherence rate",
            Quantity::Fidelity,
            "F_max",
        ),
        _ => (
            "fig8b",
            "optimal gate time against decoherence rate",
            Quantity::GateTime,
            "T",
        ),
    };
    let mut columns = vec![("Gamma_over_gamma".to_string(), Column::axis(1e-5, 10.0, 31, true))];
    for (scheme, knob_name, knob, target, unit) in knobs {
        columns.push((knob_name.into(), knob.set_from("decoherence.gamma_eff", gamma)));
        columns.push((
            format!("{prefix}_{scheme}"),
            Column::evaluated(scheme, "analytic")
                .quantity(quantity)
                .set_from("decoherence.gamma_eff", gamma)
                .set_from(target, &format!("{knob_name} {unit}")),
        ));
    }
    let mut base = base(EXCHANGE_BASE);
    base.get_mut("scheme")
        .and_then(Value::as_table_mut)
        .expect("base has schemes")
        .insert("scattering".into(), Value::Table(Table::new()));
    Figure {
        name: name.into(),
        title: title.into(),
        base,
        columns,
    }
}

pub fn figure(name: &str) -> Option<Figure> {
    Some(match name {
        "fig2a" => fig2a(),
        "fig2b" => fig2b(),
        "fig2c" => fig2c(),
        "fig4" => fig4(),
        "fig6a" => fig6a(),
        "fig6b" => fig6b(),
        "fig7" => fig7(),
        "fig8a" => fig8('a'),
        "fig8b" => fig8('b'),
        _ => return None,
    })
}

fn source_value(header: &[String], row: &[f64], source: &str, key: &str) -> CliResult<Value> {
    let mut parts = source.split_whitespace();
    let column = parts.next().ok_or_else(|| CliError::config(key, "empty source"))?;
    let unit = parts.next();
    let idx = header
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::config(key, format!("no column `{column}`")))?;
    let x = *row
        .get(idx)
        .ok_or_else(|| CliError::config(key, format!("column `{column}` is not computed yet")))?;
    if !x.is_finite() {
        return Err(CliError::Evaluator(GateError::Unsupported(format!(
            "column `{column}` has no value in this row"
        ))));
    }
    Ok(match unit {
        Some(u) => Value::String(format!("{} {u}", crate::output::format_value(x))),
        None => Value::Float(x),
    })
}

/// Configuration of one cell: base config with the column's overrides.
/// `row` holds the values of the columns to the left.
pub fn cell_table(base: &Table, name: &str, column: &Column, header: &[String], row: &[f64]) -> CliResult<Table> {
    let mut table = base.clone();
    table.remove("figure");
    for (path, value) in &column.set {
        set_path(&mut table, path, value.clone())?;
    }
    for (path, source) in &column.set_from {
        let key = format!("figure.columns.{name}.set_from.{path}");
        set_path(&mut table, path, source_value(header, row, source, &key)?)?;
    }
    Ok(table)
}

fn evaluate_table(table: Table, scheme: SchemeArg, method: MethodArg, quantity: Quantity) -> CliResult<f64> {
    let config = GateConfig::from_table(table)?;
    let result = config.evaluate(scheme.scheme(), method)?;
    Ok(match quantity {
        Quantity::GateTime => result.gate_time,
        _ => result.fidelity,
    })
}

fn derived_value(table: Table, scheme: SchemeArg, quantity: Quantity) -> CliResult<f64> {
    let config = GateConfig::from_table(table)?;
    let row = cooperativity_scaling(&[config.cavity.cooperativity()])?[0];
    Ok(match (scheme, quantity) {
        (SchemeArg::Scattering, Quantity::Asymptote) => row.scattering_asymptote,
        (_, Quantity::Asymptote) => row.exchange_asymptote,
        (SchemeArg::Scattering, _) => row.scattering,
        (SchemeArg::SimpleExchange, _) => row.simple_exchange,
        (SchemeArg::Raman, _) => row.raman,
    })
}

fn to_gate_error(e: CliError) -> GateError {
    match e {
        CliError::Evaluator(g) => g,
        other => GateError::Unsupported(other.to_string()),
    }
}

/// Value of a non-axis cell given the values to its left.
pub fn cell_value(base: &Table, name: &str, column: &Column, header: &[String], row: &[f64]) -> CliResult<f64> {
    let table = cell_table(base, name, column, header, row)?;
    match column.kind(name)? {
        ColumnKind::Axis => Err(CliError::config(
            format!("figure.columns.{name}"),
            "axis columns are inputs",
        )),
        ColumnKind::Evaluated => evaluate_table(
            table,
            column.scheme_arg(name)?,
            column.method_arg(name)?,
            column.quantity.unwrap_or_default(),
        ),
        ColumnKind::Derived => derived_value(table, column.scheme_arg(name)?, column.quantity.unwrap_or_default()),
        ColumnKind::Knob => knob_value(table, name, column),
    }
}

/// Maximizes the fidelity over the knob's range with a grid search and
/// golden-section refinement; an optimum on the range edge is kept as is.
fn knob_value(table: Table, name: &str, column: &Column) -> CliResult<f64> {
    let scheme = column.scheme_arg(name)?;
    let method = column.method_arg(name)?;
    let target = column
        .target
        .clone()
        .ok_or_else(|| CliError::config(format!("figure.columns.{name}.target"), "missing"))?;
    let unit = column.unit.clone().unwrap_or_default();
    let axis = column.axis_spec(name)?;
    let spec = SweepSpec::new(name, scheme.scheme(), core_method(scheme.scheme(), method), vec![axis])?;
    let evaluator = |x: &[f64]| -> cavity_gate::Result<f64> {
        let mut t = table.clone();
        let text = format!("{} {unit}", crate::output::format_value(x[0]));
        set_path(&mut t, &target, Value::String(text.trim().to_string())).map_err(to_gate_error)?;
        evaluate_table(t, scheme, method, Quantity::Fidelity).map_err(to_gate_error)
    };
    let grid = run_sweep_serial(&spec, evaluator)?;
    let best = match refine_max(&grid, evaluator) {
        Ok(r) => r.coords[0],
        Err(GateError::BoundaryMaximum(_)) => grid.maximum.as_ref().expect("boundary implies a maximum").coords[0],
        Err(e) => return Err(e.into()),
    };
    Ok(best)
}

/// A cell that could not be evaluated: (flat row index, column, message).
pub type Failure = (usize, String, String);

/// Computed figure: header, rows and the comment block describing them.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub comment: String,
    pub failures: Vec<Failure>,
}

impl FigureData {
    pub fn to_csv(&self) -> String {
        render_csv(&self.comment, &self.header, &self.rows)
    }
}

impl Figure {
    /// The comment block: base config plus the `[figure]` description.
    pub fn comment(&self) -> String {
        let mut table = self.base.clone();
        let mut columns = Table::new();
        for (name, col) in &self.columns {
            columns.insert(name.clone(), Value::try_from(col).expect("column serializes"));
        }
        let mut fig = Table::new();
        fig.insert("name".into(), Value::String(self.name.clone()));
        fig.insert("title".into(), Value::String(self.title.clone()));
        fig.insert("columns".into(), Value::Table(columns));
        table.insert("figure".into(), Value::Table(fig));
        toml::to_string(&table).expect("figure table serializes")
    }

    fn axes(&self) -> CliResult<Vec<Axis>> {
        self.columns
            .iter()
            .filter(|(_, c)| c.kind == Some(ColumnKind::Axis))
            .map(|(n, c)| c.axis_spec(n))
            .collect()
    }

    /// Axis ranges for the run manifest.
    pub fn ranges(&self) -> CliResult<serde_json::Value> {
        Ok(serde_json::to_value(self.axes()?).expect("axes serialize"))
    }

    pub fn compute(&self) -> CliResult<FigureData> {
        let axes = self.axes()?;
        let header: Vec<String> = self.columns.iter().map(|(n, _)| n.clone()).collect();
        let n_axes = axes.len();
        if self.columns[..n_axes]
            .iter()
            .any(|(_, c)| c.kind != Some(ColumnKind::Axis))
        {
            return Err(CliError::config("figure.columns", "axis columns must come first"));
        }
        let cells: usize = axes.iter().map(|a| a.points).product();
        let rows: Vec<(Vec<f64>, Vec<Failure>)> = (0..cells)
            .into_par_iter()
            .map(|flat| {
                let mut idx = vec![0; n_axes];
                let mut rest = flat;
                for (d, axis) in axes.iter().enumerate().rev() {
                    idx[d] = rest % axis.points;
                    rest /= axis.points;
                }
                let mut row: Vec<f64> = axes.iter().zip(&idx).map(|(a, &k)| round_sig(a.value(k))).collect();
                let mut failures = Vec::new();
                for (name, col) in &self.columns[n_axes..] {
                    let v = match cell_value(&self.base, name, col, &header, &row) {
                        Ok(v) => round_sig(v),
                        Err(e) => {
                            failures.push((flat, name.clone(), e.to_string()));
                            f64::NAN
                        }
                    };
                    row.push(v);
                }
                (row, failures)
            })
            .collect();
        let mut data = FigureData {
            header,
            rows: Vec::with_capacity(cells),
            comment: self.comment(),
            failures: Vec::new(),
        };
        for (row, f) in rows {
            data.rows.push(row);
            data.failures.extend(f);
        }
        Ok(data)
    }
}

/// A figure CSV read back: base config and column definitions.
#[derive(Debug, Clone)]
pub struct FigureCsv {
    pub base: Table,
    pub columns: BTreeMap<String, Column>,
    pub document: CsvDocument,
}

impl FigureCsv {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let document = parse_csv(text, origin)?;
        let base: Table = document
            .comment
            .parse()
            .map_err(|e: toml::de::Error| CliError::config(format!("{origin}: comment block"), e.message()))?;
        let columns =
            base.get("figure")
                .and_then(|f| f.get("columns"))
                .and_then(Value::as_table)
                .ok_or_else(|| CliError::config("figure.columns", "missing from the comment block"))?
                .iter()
                .map(|(name, v)| {
                    let col: Column = v.clone().try_into().map_err(|e: toml::de::Error| {
                        CliError::config(format!("figure.columns.{name}"), e.message())
                    })?;
                    Ok((name.clone(), col))
                })
                .collect::<CliResult<_>>()?;
        Ok(Self {
            base,
            columns,
            document,
        })
    }

    pub fn column(&self, name: &str) -> CliResult<&Column> {
        self.columns
            .get(name)
            .ok_or_else(|| CliError::config(format!("figure.columns.{name}"), "no such column"))
    }

    fn locate(&self, name: &str, row: usize) -> CliResult<(usize, &[f64])> {
        let idx = self
            .document
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::config(format!("figure.columns.{name}"), "not in the header"))?;
        let values = self
            .document
            .rows
            .get(row)
            .ok_or_else(|| CliError::config("row", format!("only {} data rows", self.document.rows.len())))?;
        Ok((idx, &values[..idx]))
    }

    /// Configuration that reproduces the cell at (`row`, `name`).
    pub fn cell_config(&self, name: &str, row: usize) -> CliResult<Table> {
        let (_, left) = self.locate(name, row)?;
        cell_table(&self.base, name, self.column(name)?, &self.document.header, left)
    }

    /// Recomputes the cell at (`row`, `name`).
    pub fn recompute(&self, name: &str, row: usize) -> CliResult<f64> {
        let (_, left) = self.locate(name, row)?;
        cell_value(&self.base, name, self.column(name)?, &self.document.header, left)
    }

    pub fn column_scheme(&self, name: &str) -> CliResult<SchemeArg> {
        self.column(name)?.scheme_arg(name)
    }

    pub fn column_method(&self, name: &str) -> CliResult<MethodArg> {
        self.column(name)?.method_arg(name)
    }

    pub fn column_kind(&self, name: &str) -> CliResult<ColumnKind> {
        self.column(name)?.kind(name)
    }

    pub fn column_quantity(&self, name: &str) -> CliResult<Quantity> {
        Ok(self.column(name)?.quantity.unwrap_or_default())
    }
}
