//! Subcommand implementations. Results go to stdout or files; warnings and
//! diagnostics go to stderr.

use std::fs;
use std::path::{Path, PathBuf};

use cavity_gate::case_study::{run_case_study, CaseStudyParams};
use cavity_gate::sweep::{refine_max, run_sweep, Axis, Scale, SweepSpec};
use cavity_gate::{GateError, GateResult};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use toml::{Table, Value};

use crate::config::{set_path, GateConfig, MethodArg, SchemeArg};
use crate::error::{CliError, CliResult};
use crate::figures::{cell_value, core_method, figure, Column, ColumnKind, FigureCsv, Quantity, FIGURE_NAMES};
use crate::output::{format_value, round_sig, RunManifest, SCHEMA_VERSION};
use crate::units::{quantity, Dimension, Scales};

#[derive(Debug, Parser)]
#[command(
    name = "cavity-gate",
    version,
    about = "Fidelity models for cavity-mediated phase-flip gates"
)]
#[command(
    after_help = "Exit codes: 0 success, 2 config or usage error, 3 evaluator error, 4 output not writable.\n\
Set CAVITY_GATE_THREADS to cap the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one gate and print the result as JSON.
    Evaluate(EvaluateArgs),
    /// Write the data behind a figure as CSV.
    Figure(FigureArgs),
    /// Compare the three schemes on the ytterbium platform.
    Casestudy(CaseStudyArgs),
    /// Sweep one or two config keys over a grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Gate scheme; taken from the column when evaluating a figure cell.
    #[arg(value_enum)]
    pub scheme: Option<SchemeArg>,
    /// TOML config, or a figure CSV together with --column and --row.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Column of a figure CSV to recompute.
    #[arg(long, requires = "row")]
    pub column: Option<String>,
    /// Zero-based data row of a figure CSV.
    #[arg(long, requires = "column")]
    pub row: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// One of fig2a, fig2b, fig2c, fig4, fig6a, fig6b, fig7, fig8a, fig8b, or `all`.
    pub name: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CaseStudyArgs {
    /// Qubit coherence time, e.g. `30 ms`; bare numbers are seconds.
    #[arg(long = "t2", alias = "T2")]
    pub t2: Option<String>,
    #[arg(long)]
    pub cooperativity: Option<f64>,
    #[arg(long)]
    pub g_over_kappa: Option<f64>,
    /// Emitter decay rate, e.g. `596 hz`; bare numbers are rad/s.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Excited/ground splitting difference, e.g. `0.2 ghz`.
    #[arg(long)]
    pub delta_eg: Option<String>,
    /// Optical pure dephasing rate, e.g. `9e3 per_s`.
    #[arg(long)]
    pub optical_dephasing: Option<String>,
    #[arg(long)]
    pub omega_over_delta: Option<f64>,
    /// Directory for casestudy.json and its manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "analytic")]
    pub method: MethodArg,
    /// `key:start:end:points[:log][:unit]` with a dotted config key; give one or two.
    #[arg(long = "axis", required = true)]
    pub axes: Vec<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Refine the best grid cell with golden-section search.
    #[arg(long)]
    pub refine: bool,
}

pub fn warn(messages: &[String]) {
    for m in messages {
        eprintln!("warning: {m}");
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::config(path.display().to_string(), e.to_string()))
}

/// JSON record of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub scheme: &'static str,
    pub method: &'static str,
    pub fidelity: f64,
    /// In `time_unit`.
    pub gate_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate_time_s: Option<f64>,
    pub time_unit: &'static str,
    pub success_probability: f64,
    pub clamped: bool,
    pub gamma_eff: f64,
    pub config_hash: String,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl EvaluateReport {
    fn new(config: &GateConfig, scheme: SchemeArg, method: MethodArg, r: GateResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: "evaluate",
            scheme: scheme.scheme().name(),
            method: method.name(),
            fidelity: r.fidelity,
            gate_time: r.gate_time,
            gate_time_s: config.physical.then_some(r.gate_time),
            time_unit: if config.physical { "s" } else { "1/gamma" },
            success_probability: r.success_probability,
            clamped: r.clamped,
            gamma_eff: config.gamma_eff(scheme.scheme()),
            config_hash: config.hash(),
            warnings: r.warnings,
        }
    }
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<EvaluateReport> {
    let text = read(&args.config)?;
    let (table, scheme, method) = match (&args.column, args.row) {
        (Some(column), Some(row)) => {
            let csv = FigureCsv::parse(&text, &args.config.display().to_string())?;
            let kind = csv.column_kind(column)?;
            if !matches!(kind, ColumnKind::Evaluated | ColumnKind::Derived) {
                return Err(CliError::config(
                    format!("figure.columns.{column}"),
                    "only evaluated and derived columns can be recomputed",
                ));
            }
            let scheme = csv.column_scheme(column)?;
            if args.scheme.is_some_and(|s| s != scheme) {
                return Err(CliError::config("scheme", "does not match the column's scheme"));
            }
            if kind == ColumnKind::Derived {
                return derived_report(&csv, column, row, scheme);
            }
            let method = csv.column_method(column)?;
            if args.method.is_some_and(|m| m != method) {
                return Err(CliError::config("method", "does not match the column's method"));
            }
            (csv.cell_config(column, row)?, scheme, method)
        }
        _ => {
            let table: Table = text
                .parse()
                .map_err(|e: toml::de::Error| CliError::config(args.config.display().to_string(), e.message()))?;
            let scheme = args
                .scheme
                .ok_or_else(|| CliError::config("scheme", "required unless --column is given"))?;
            (table, scheme, args.method.unwrap_or(MethodArg::Analytic))
        }
    };
    let config = GateConfig::from_table(table)?;
    let result = config.evaluate(scheme.scheme(), method)?;
    Ok(EvaluateReport::new(&config, scheme, method, result))
}

/// Derived columns carry a closed-form limit; reported in the evaluate schema
/// with the gate time left at zero.
fn derived_report(csv: &FigureCsv, column: &str, row: usize, scheme: SchemeArg) -> CliResult<EvaluateReport> {
    let config = GateConfig::from_table(csv.cell_config(column, row)?)?;
    let value = csv.recompute(column, row)?;
    let label = match csv.column_quantity(column)? {
        Quantity::Asymptote => "asymptote",
        _ => "cooperativity_limit",
    };
    Ok(EvaluateReport {
        schema_version: SCHEMA_VERSION,
        command: "evaluate",
        scheme: scheme.scheme().name(),
        method: label,
        fidelity: value,
        gate_time: 0.0,
        gate_time_s: None,
        time_unit: if config.physical { "s" } else { "1/gamma" },
        success_probability: 1.0,
        clamped: false,
        gamma_eff: 0.0,
        config_hash: config.hash(),
        warnings: Vec::new(),
    })
}

pub fn run_figure(args: &FigureArgs) -> CliResult<Vec<PathBuf>> {
    let names: Vec<&str> = if args.name == "all" {
        FIGURE_NAMES.to_vec()
    } else if FIGURE_NAMES.contains(&args.name.as_str()) {
        vec![args.name.as_str()]
    } else {
        return Err(CliError::config(
            "name",
            format!(
                "unknown figure `{}`; expected one of {}",
                args.name,
                FIGURE_NAMES.join(", ")
            ),
        ));
    };
    let mut written = Vec::new();
    for name in names {
        let fig = figure(name).expect("name checked above");
        let data = fig.compute()?;
        if !data.failures.is_empty() {
            eprintln!("warning: {name}: {} cells could not be evaluated", data.failures.len());
            for (row, col, msg) in data.failures.iter().take(5) {
                eprintln!("warning:   row {row}, {col}: {msg}");
            }
        }
        let mut manifest = RunManifest::new(format!("figure {name}"), cavity_gate::sweep::config_hash(&data.comment));
        manifest.details = json!({ "axes": fig.ranges()?, "failed_cells": data.failures.len() });
        manifest.write(args.out.join(format!("{name}.csv")), &data.to_csv())?;
        let manifest = manifest.finish(args.out.join(format!("{name}.manifest.json")))?;
        written.extend(manifest.outputs);
    }
    Ok(written)
}

fn case_quantity(text: &str, key: &str, dim: Dimension) -> CliResult<f64> {
    let scales = Scales {
        gamma: CaseStudyParams::ytterbium().gamma,
        kappa: None,
        physical: true,
    };
    quantity(&Value::String(text.into()), key, dim, &scales)
}

pub fn case_study_params(args: &CaseStudyArgs) -> CliResult<CaseStudyParams> {
    let mut p = CaseStudyParams::ytterbium();
    if let Some(t2) = &args.t2 {
        p.t2 = case_quantity(t2, "t2", Dimension::Time)?;
    }
    if let Some(g) = &args.gamma {
        p.gamma = case_quantity(g, "gamma", Dimension::Rate)?;
    }
    if let Some(d) = &args.delta_eg {
        p.delta_eg = case_quantity(d, "delta_eg", Dimension::Rate)?;
    }
    if let Some(d) = &args.optical_dephasing {
        p.optical_dephasing = case_quantity(d, "optical_dephasing", Dimension::Rate)?;
    }
    if let Some(c) = args.cooperativity {
        p.cooperativity = c;
    }
    if let Some(r) = args.g_over_kappa {
        p.g_over_kappa = r;
    }
    if let Some(r) = args.omega_over_delta {
        p.omega_over_delta = r;
    }
    Ok(p)
}

pub fn casestudy(args: &CaseStudyArgs) -> CliResult<serde_json::Value> {
    let params = case_study_params(args)?;
    let report = run_case_study(&params).map_err(|e| match e {
        GateError::InvalidParameter { name, reason } => CliError::config(name, reason),
        other => CliError::Evaluator(other),
    })?;
    for e in &report.entries {
        warn(
            &e.warnings
                .iter()
                .map(|w| format!("{}: {w}", e.scheme.name()))
                .collect::<Vec<_>>(),
        );
    }
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "casestudy",
        "params": report.params,
        "entries": report.entries,
    });
    if let Some(dir) = &args.out {
        let mut manifest = RunManifest::new("casestudy", cavity_gate::sweep::config_hash(&report.params));
        let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
        manifest.write(dir.join("casestudy.json"), &text)?;
        manifest.finish(dir.join("casestudy.manifest.json"))?;
    }
    Ok(doc)
}

/// Parsed `--axis key:start:end:points[:log][:unit]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisArg {
    pub key: String,
    pub axis: Axis,
    pub unit: Option<String>,
}

pub fn parse_axis(text: &str) -> CliResult<AxisArg> {
    let err = |m: &str| CliError::config(format!("--axis {text}"), m.to_string());
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() < 4 || parts.len() > 6 {
        return Err(err("expected key:start:end:points[:log][:unit]"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("`{s}` is not a number")));
    let (start, end) = (num(parts[1])?, num(parts[2])?);
    let points: usize = parts[3].parse().map_err(|_| err("points must be an integer"))?;
    let mut scale = Scale::Linear;
    let mut unit = None;
    for extra in &parts[4..] {
        match *extra {
            "log" => scale = Scale::Log,
            "linear" => scale = Scale::Linear,
            u => unit = Some(u.to_string()),
        }
    }
    let axis = Axis::new(parts[0], start, end, points, scale).map_err(|e| err(&e.to_string()))?;
    Ok(AxisArg {
        key: parts[0].to_string(),
        axis,
        unit,
    })
}

/// Sweep as a figure: axis columns plus one evaluated column, so the CSV
/// carries the same comment block and round-trips like a figure.
fn sweep_figure(scheme: SchemeArg, method: MethodArg, axes: &[AxisArg]) -> (Vec<String>, Column) {
    let mut column = Column {
        kind: Some(ColumnKind::Evaluated),
        scheme: Some(scheme_name(scheme).into()),
        method: Some(method.name().into()),
        ..Column::default()
    };
    let mut header = Vec::new();
    for a in axes {
        let source = match &a.unit {
            Some(u) => format!("{} {u}", a.key),
            None => a.key.clone(),
        };
        column.set_from.insert(a.key.clone(), source);
        header.push(a.key.clone());
    }
    header.push("F".into());
    (header, column)
}

fn scheme_name(s: SchemeArg) -> &'static str {
    match s {
        SchemeArg::Scattering => "scattering",
        SchemeArg::SimpleExchange => "simple_exchange",
        SchemeArg::Raman => "raman",
    }
}

fn axis_column(a: &AxisArg) -> Column {
    Column {
        kind: Some(ColumnKind::Axis),
        start: Some(a.axis.start),
        end: Some(a.axis.end),
        points: Some(a.axis.points),
        scale: Some(if a.axis.scale == Scale::Log { "log" } else { "linear" }.into()),
        unit: a.unit.clone(),
        ..Column::default()
    }
}

pub fn sweep(args: &SweepArgs) -> CliResult<serde_json::Value> {
    if args.axes.is_empty() || args.axes.len() > 2 {
        return Err(CliError::config("--axis", "give one or two axes"));
    }
    let axes = args.axes.iter().map(|a| parse_axis(a)).collect::<CliResult<Vec<_>>>()?;
    let text = read(&args.config)?;
    let mut base: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::config(args.config.display().to_string(), e.message()))?;
    base.remove("figure");
    // Validate the base and every axis key before spending time on the grid.
    GateConfig::from_table(base.clone())?;
    for a in &axes {
        let mut t = base.clone();
        let v = match &a.unit {
            Some(u) => Value::String(format!("{} {u}", format_value(a.axis.start))),
            None => Value::Float(a.axis.start),
        };
        set_path(&mut t, &a.key, v)?;
        GateConfig::from_table(t)?;
    }

    let (header, column) = sweep_figure(args.scheme, args.method, &axes);
    let scheme = args.scheme.scheme();
    let spec = SweepSpec::new(
        format!("sweep {}", scheme.name()),
        scheme,
        core_method(scheme, args.method),
        axes.iter().map(|a| a.axis.clone()).collect(),
    )?;
    let evaluator = |x: &[f64]| -> cavity_gate::Result<f64> {
        let row: Vec<f64> = x.iter().map(|&v| round_sig(v)).collect();
        cell_value(&base, "F", &column, &header, &row).map_err(|e| match e {
            CliError::Evaluator(g) => g,
            other => GateError::Unsupported(other.to_string()),
        })
    };
    let result = run_sweep(&spec, evaluator)?;
    for e in &result.errors {
        eprintln!("warning: cell {}: {}", e.index, e.message);
    }
    let refined = if args.refine {
        match refine_max(&result, evaluator) {
            Ok(r) => Some(r),
            Err(e @ GateError::BoundaryMaximum(_)) => {
                eprintln!("warning: {e}; widen the axis range");
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let mut rows = Vec::with_capacity(result.values.len());
    for (flat, &v) in result.values.iter().enumerate() {
        let mut row = spec.coords(&spec.unflatten(flat));
        row.iter_mut().for_each(|x| *x = round_sig(*x));
        row.push(round_sig(v));
        rows.push(row);
    }
    let mut table = base.clone();
    let mut columns = Table::new();
    for a in &axes {
        columns.insert(
            a.key.clone(),
            Value::try_from(axis_column(a)).expect("column serializes"),
        );
    }
    columns.insert("F".into(), Value::try_from(&column).expect("column serializes"));
    let mut fig = Table::new();
    fig.insert("name".into(), Value::String("sweep".into()));
    fig.insert("columns".into(), Value::Table(columns));
    table.insert("figure".into(), Value::Table(fig));
    let comment = toml::to_string(&table).expect("sweep table serializes");

    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "result": result,
        "refined": refined,
    });
    let mut manifest = RunManifest::new(format!("sweep {}", scheme.name()), spec.config_hash());
    manifest.details = json!({ "axes": spec.axes });
    manifest.write(
        args.out.join("sweep.csv"),
        &crate::output::render_csv(&comment, &header, &rows),
    )?;
    manifest.write(
        args.out.join("sweep.json"),
        &(serde_json::to_string_pretty(&summary).expect("sweep serializes") + "\n"),
    )?;
    manifest.finish(args.out.join("sweep.manifest.json"))?;
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "maximum": summary["result"]["maximum"],
        "refined": summary["refined"],
        "failed_cells": result.errors.len(),
    }))
}
