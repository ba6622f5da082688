//! TOML gate configurations and their translation to evaluator inputs.
//!
//! ```toml
//! [cavity]
//! cooperativity = 50000
//! g_over_kappa = 0.1
//! gamma = "596 hz"
//!
//! [decoherence]
//! t2 = "6.6 ms"
//!
//! [scheme.simple_exchange]
//! delta_eg = "0.2 ghz"
//! ```

use cavity_gate::lindblad::{exchange_model, raman_model};
use cavity_gate::raman::{fidelity_analytic_raman, fidelity_numeric_raman, gate_time_raman, RamanConfig};
use cavity_gate::scattering::{
    fidelity_analytic, fidelity_numeric_with_nodes, optimal_gate_time, PhotonPulse, ScatteringConfig, DEFAULT_NODES,
};
use cavity_gate::simple_exchange::{
    fidelity_closed_form, fidelity_numeric_exchange, optimal_detuning, ExchangeConfig, ResonantPair, Splitting,
};
use cavity_gate::sweep::config_hash;
use cavity_gate::{CavitySystem, DecoherenceSpec, GateError, GateResult, Scheme};
use clap::ValueEnum;
use serde::Serialize;
use toml::{Table, Value};

use crate::error::{CliError, CliResult};
use crate::units::{quantity, Dimension, Scales};

/// Evaluation route selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Analytic,
    Numeric,
    Lindblad,
}

impl MethodArg {
    pub fn name(&self) -> &'static str {
        match self {
            MethodArg::Analytic => "analytic",
            MethodArg::Numeric => "numeric",
            MethodArg::Lindblad => "lindblad",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, false).ok()
    }
}

/// Scheme names as used in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SchemeArg {
    Scattering,
    #[value(alias = "simple-exchange")]
    SimpleExchange,
    Raman,
}

impl SchemeArg {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeArg::Scattering => Scheme::Scattering,
            SchemeArg::SimpleExchange => Scheme::SimpleExchange,
            SchemeArg::Raman => Scheme::Raman,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, false).ok()
    }
}

const CAVITY_KEYS: &[&str] = &["g", "kappa", "gamma", "cooperativity", "g_over_kappa"];
const DECOHERENCE_KEYS: &[&str] = &[
    "qubit_relaxation",
    "qubit_dephasing",
    "optical_dephasing",
    "shelving_decay",
    "t2",
    "gamma_eff",
];
const SCATTERING_KEYS: &[&str] = &["gate_time", "sigma_p", "delta_p", "delta_eps_a", "delta_eps_b", "nodes"];
const EXCHANGE_KEYS: &[&str] = &[
    "delta",
    "delta_eg",
    "delta_eps",
    "mode",
    "g_up_a",
    "g_down_b",
    "g_up_b",
    "gate_time",
];
const RAMAN_KEYS: &[&str] = &[
    "detuning",
    "two_photon",
    "omega_over_delta",
    "detuning_mismatch",
    "two_photon_mismatch",
    "match_drive",
    "gate_time",
];
/// Sections the evaluator ignores; figure and sweep metadata live here.
const PASSIVE_SECTIONS: &[&str] = &["figure", "sweep"];

fn section<'a>(table: &'a Table, path: &str) -> CliResult<Option<&'a Table>> {
    let mut current = table;
    let mut found = None;
    for (i, part) in path.split('.').enumerate() {
        match current.get(part) {
            None => return Ok(None),
            Some(Value::Table(t)) => {
                current = t;
                found = Some(t);
            }
            Some(_) => {
                let key: Vec<_> = path.split('.').take(i + 1).collect();
                return Err(CliError::config(key.join("."), "expected a table"));
            }
        }
    }
    Ok(found)
}

fn check_keys(table: Option<&Table>, path: &str, allowed: &[&str]) -> CliResult<()> {
    if let Some(t) = table {
        for key in t.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::config(format!("{path}.{key}"), "unknown key"));
            }
        }
    }
    Ok(())
}

fn check_layout(table: &Table) -> CliResult<()> {
    for (key, value) in table {
        match key.as_str() {
            "cavity" | "decoherence" | "scheme" => {
                if !value.is_table() {
                    return Err(CliError::config(key.as_str(), "expected a table"));
                }
            }
            k if PASSIVE_SECTIONS.contains(&k) => {}
            _ => return Err(CliError::config(key.as_str(), "unknown section")),
        }
    }
    if let Some(schemes) = section(table, "scheme")? {
        for (name, value) in schemes {
            if SchemeArg::parse(name).is_none() {
                return Err(CliError::config(format!("scheme.{name}"), "unknown scheme"));
            }
            if !value.is_table() {
                return Err(CliError::config(format!("scheme.{name}"), "expected a table"));
            }
        }
    }
    check_keys(section(table, "cavity")?, "cavity", CAVITY_KEYS)?;
    check_keys(section(table, "decoherence")?, "decoherence", DECOHERENCE_KEYS)?;
    check_keys(
        section(table, "scheme.scattering")?,
        "scheme.scattering",
        SCATTERING_KEYS,
    )?;
    check_keys(
        section(table, "scheme.simple_exchange")?,
        "scheme.simple_exchange",
        EXCHANGE_KEYS,
    )?;
    check_keys(section(table, "scheme.raman")?, "scheme.raman", RAMAN_KEYS)?;
    Ok(())
}

/// A validated configuration with the cavity and decoherence resolved.
#[derive(Debug, Clone)]
pub struct GateConfig {
    pub table: Table,
    pub cavity: CavitySystem,
    pub decoherence: DecoherenceSpec,
    pub gamma_eff_override: Option<f64>,
    /// `true` when `[cavity].gamma` was given, so times are in seconds.
    pub physical: bool,
}

/// Resolved quantities of one scheme section.
struct Section<'a> {
    table: Option<&'a Table>,
    path: &'static str,
    scales: Scales,
}

impl Section<'_> {
    fn key(&self, name: &str) -> String {
        format!("{}.{name}", self.path)
    }

    fn get(&self, name: &str) -> Option<&Value> {
        self.table.and_then(|t| t.get(name))
    }

    fn quantity(&self, name: &str, dim: Dimension) -> CliResult<Option<f64>> {
        self.get(name)
            .map(|v| quantity(v, &self.key(name), dim, &self.scales))
            .transpose()
    }

    fn rate_or(&self, name: &str, default: f64) -> CliResult<f64> {
        Ok(self.quantity(name, Dimension::Rate)?.unwrap_or(default))
    }

    fn number_or(&self, name: &str, default: f64) -> CliResult<f64> {
        match self.get(name) {
            None => Ok(default),
            Some(Value::Float(x)) => Ok(*x),
            Some(Value::Integer(i)) => Ok(*i as f64),
            Some(Value::String(s)) => s
                .trim()
                .parse()
                .map_err(|_| CliError::config(self.key(name), format!("expected a number, got `{s}`"))),
            Some(_) => Err(CliError::config(self.key(name), "expected a number")),
        }
    }

    fn string(&self, name: &str) -> CliResult<Option<&str>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(CliError::config(self.key(name), "expected a string")),
        }
    }
}

fn keyed(key: String) -> impl FnOnce(GateError) -> CliError {
    move |e| match e {
        GateError::InvalidParameter { reason, .. } => CliError::config(key, reason),
        other => CliError::Evaluator(other),
    }
}

impl GateConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| {
            let message = e.message().to_string();
            CliError::config("<toml>", message)
        })?;
        Self::from_table(table)
    }

    pub fn from_table(table: Table) -> CliResult<Self> {
        check_layout(&table)?;
        let cav = section(&table, "cavity")?;
        let get = |k: &str| cav.and_then(|t| t.get(k));

        let bootstrap = Scales {
            gamma: 1.0,
            kappa: None,
            physical: true,
        };
        let (gamma, physical) = match get("gamma") {
            Some(v) => {
                if let Value::String(s) = v {
                    if s.contains("per_") {
                        return Err(CliError::config("cavity.gamma", "gamma cannot be relative"));
                    }
                }
                (quantity(v, "cavity.gamma", Dimension::Rate, &bootstrap)?, true)
            }
            None => (1.0, false),
        };
        let scales = Scales {
            gamma,
            kappa: None,
            physical,
        };
        let plain = |k: &str| -> CliResult<Option<f64>> {
            get(k)
                .map(|v| quantity(v, &format!("cavity.{k}"), Dimension::Rate, &scales))
                .transpose()
        };
        let cavity = match (
            plain("cooperativity")?,
            plain("g_over_kappa")?,
            plain("g")?,
            plain("kappa")?,
        ) {
            (Some(c), Some(r), None, None) => CavitySystem::from_cooperativity(c, r, gamma),
            (None, None, Some(g), Some(k)) => CavitySystem::new(g, k, gamma),
            _ => {
                return Err(CliError::config(
                    "cavity",
                    "give either cooperativity and g_over_kappa, or g and kappa",
                ))
            }
        }
        .map_err(keyed("cavity".into()))?;

        let scales = Scales {
            kappa: Some(cavity.kappa()),
            ..scales
        };
        let deco = Section {
            table: section(&table, "decoherence")?,
            path: "decoherence",
            scales,
        };
        let rate = |k: &str| -> CliResult<f64> {
            let v = deco.rate_or(k, 0.0)?;
            if v < 0.0 {
                return Err(CliError::config(deco.key(k), "must be >= 0"));
            }
            Ok(v)
        };
        let t2 = deco.quantity("t2", Dimension::Time)?;
        if let Some(t) = t2 {
            if t <= 0.0 {
                return Err(CliError::config("decoherence.t2", "must be > 0"));
            }
        }
        let decoherence = DecoherenceSpec {
            qubit_relaxation: rate("qubit_relaxation")?,
            qubit_dephasing: rate("qubit_dephasing")?,
            optical_dephasing: rate("optical_dephasing")?,
            shelving_decay: rate("shelving_decay")?,
            t2,
        };
        let gamma_eff_override = match deco.get("gamma_eff") {
            Some(_) => Some(rate("gamma_eff")?),
            None => None,
        };
        Ok(Self {
            table,
            cavity,
            decoherence,
            gamma_eff_override,
            physical,
        })
    }

    pub fn scales(&self) -> Scales {
        Scales {
            gamma: self.cavity.gamma(),
            kappa: Some(self.cavity.kappa()),
            physical: self.physical,
        }
    }

    fn scheme_section(&self, scheme: Scheme) -> CliResult<Section<'_>> {
        let path = match scheme {
            Scheme::Scattering => "scheme.scattering",
            Scheme::SimpleExchange => "scheme.simple_exchange",
            Scheme::Raman => "scheme.raman",
        };
        Ok(Section {
            table: section(&self.table, path)?,
            path,
            scales: self.scales(),
        })
    }

    /// Effective decoherence rate for `scheme`; an explicit `gamma_eff` wins.
    pub fn gamma_eff(&self, scheme: Scheme) -> f64 {
        self.gamma_eff_override
            .unwrap_or_else(|| self.decoherence.effective_rate(scheme))
    }

    pub fn hash(&self) -> String {
        config_hash(&self.table)
    }

    pub fn scattering(&self) -> CliResult<(ScatteringConfig, usize)> {
        let s = self.scheme_section(Scheme::Scattering)?;
        let gamma_eff = self.gamma_eff(Scheme::Scattering);
        let delta_p = s.rate_or("delta_p", 0.0)?;
        let pulse = match (
            s.quantity("gate_time", Dimension::Time)?,
            s.quantity("sigma_p", Dimension::Rate)?,
        ) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    s.key("gate_time"),
                    "give gate_time or sigma_p, not both",
                ))
            }
            (Some(t), None) => PhotonPulse::from_gate_time(t, delta_p).map_err(keyed(s.key("gate_time")))?,
            (None, Some(sp)) => PhotonPulse::new(sp, delta_p).map_err(keyed(s.key("sigma_p")))?,
            (None, None) => {
                let t = optimal_gate_time(self.cavity.cooperativity(), self.cavity.gamma(), gamma_eff)
                    .map_err(|_| CliError::config(s.key("gate_time"), "required when the decoherence rate is zero"))?;
                PhotonPulse::from_gate_time(t, delta_p).map_err(keyed(s.key("gate_time")))?
            }
        };
        let cfg = ScatteringConfig::new(
            self.cavity,
            pulse,
            s.rate_or("delta_eps_a", 0.0)?,
            s.rate_or("delta_eps_b", 0.0)?,
            gamma_eff,
        )
        .map_err(keyed(s.path.to_string()))?;
        let nodes = s.number_or("nodes", DEFAULT_NODES as f64)?;
        if nodes < 2.0 || nodes.fract() != 0.0 {
            return Err(CliError::config(s.key("nodes"), "must be an integer >= 2"));
        }
        Ok((cfg, nodes as usize))
    }

    /// Exchange configuration and the gate time to evaluate at.
    pub fn exchange(&self) -> CliResult<(ExchangeConfig, f64)> {
        let s = self.scheme_section(Scheme::SimpleExchange)?;
        let cav = self.cavity;
        let delta = s.rate_or("delta", optimal_detuning(&cav))?;
        let splitting = match s.get("delta_eg") {
            None => Splitting::Infinite,
            Some(Value::String(x)) if matches!(x.trim(), "inf" | "infinite") => Splitting::Infinite,
            Some(_) => {
                let v = s.quantity("delta_eg", Dimension::Rate)?.unwrap_or(f64::INFINITY);
                Splitting::finite(v).map_err(keyed(s.key("delta_eg")))?
            }
        };
        let mode = match s.string("mode")? {
            None | Some("opposite_spin") => ResonantPair::OppositeSpin,
            Some("same_spin") => ResonantPair::SameSpin,
            Some(other) => {
                return Err(CliError::config(
                    s.key("mode"),
                    format!("expected opposite_spin or same_spin, got `{other}`"),
                ))
            }
        };
        let cfg = ExchangeConfig::new(
            cav,
            delta,
            splitting,
            s.rate_or("delta_eps", 0.0)?,
            self.gamma_eff(Scheme::SimpleExchange),
        )
        .map_err(keyed(s.path.to_string()))?
        .with_couplings(
            s.rate_or("g_up_a", cav.g())?,
            s.rate_or("g_down_b", cav.g())?,
            s.rate_or("g_up_b", cav.g())?,
        )
        .map_err(keyed(s.path.to_string()))?
        .with_mode(mode);
        let t = match s.quantity("gate_time", Dimension::Time)? {
            Some(t) if t > 0.0 => t,
            Some(_) => return Err(CliError::config(s.key("gate_time"), "must be > 0")),
            None => cfg.gate_time()?,
        };
        Ok((cfg, t))
    }

    pub fn raman(&self) -> CliResult<(RamanConfig, f64)> {
        let s = self.scheme_section(Scheme::Raman)?;
        let cav = self.cavity;
        let detuning = s.rate_or("detuning", cav.kappa())?;
        let two_photon = s.rate_or("two_photon", 0.5 * cav.kappa() * cav.cooperativity().sqrt())?;
        let ratio = s.number_or("omega_over_delta", 1.0 / 20.0)?;
        let mut cfg = RamanConfig::symmetric(cav, detuning, two_photon, ratio, self.gamma_eff(Scheme::Raman))
            .map_err(keyed(s.path.to_string()))?;
        let dm = s.rate_or("detuning_mismatch", 0.0)?;
        let tm = s.rate_or("two_photon_mismatch", 0.0)?;
        cfg.detuning_a = detuning + 0.5 * dm;
        cfg.detuning_b = detuning - 0.5 * dm;
        cfg.two_photon_a = two_photon + 0.5 * tm;
        cfg.two_photon_b = two_photon - 0.5 * tm;
        cfg.omega_a = ratio * cfg.detuning_a.abs();
        cfg.omega_b = ratio * cfg.detuning_b.abs();
        cfg.validate().map_err(keyed(s.path.to_string()))?;
        match s.get("match_drive") {
            None | Some(Value::Boolean(false)) => {}
            Some(Value::Boolean(true)) => cfg = cfg.with_matched_drive()?,
            Some(_) => return Err(CliError::config(s.key("match_drive"), "expected a boolean")),
        }
        let t = match s.quantity("gate_time", Dimension::Time)? {
            Some(t) if t > 0.0 => t,
            Some(_) => return Err(CliError::config(s.key("gate_time"), "must be > 0")),
            None => gate_time_raman(&cfg)?,
        };
        Ok((cfg, t))
    }

    fn has_key(&self, scheme: Scheme, key: &str) -> bool {
        self.scheme_section(scheme)
            .map(|s| s.get(key).is_some())
            .unwrap_or(false)
    }

    /// Evaluates `scheme` with `method`; notes on validity go into the
    /// result's warnings.
    pub fn evaluate(&self, scheme: Scheme, method: MethodArg) -> CliResult<GateResult> {
        let mut notes = Vec::new();
        if method == MethodArg::Analytic && scheme != Scheme::Scattering && self.has_key(scheme, "gate_time") {
            notes.push("gate_time is ignored by the analytic route, which uses the pi-phase time".to_string());
        }
        let result = match (scheme, method) {
            (Scheme::Scattering, MethodArg::Analytic) => fidelity_analytic(&self.scattering()?.0),
            (Scheme::Scattering, MethodArg::Numeric) => {
                let (cfg, nodes) = self.scattering()?;
                fidelity_numeric_with_nodes(&cfg, nodes)?
            }
            (Scheme::Scattering, MethodArg::Lindblad) => {
                return Err(GateError::Unsupported(
                    "the master-equation oracle covers only the exchange schemes".into(),
                )
                .into())
            }
            (Scheme::SimpleExchange, MethodArg::Analytic) => fidelity_closed_form(&self.exchange()?.0)?,
            (Scheme::SimpleExchange, MethodArg::Numeric) => {
                let (cfg, t) = self.exchange()?;
                fidelity_numeric_exchange(&cfg, t)?
            }
            (Scheme::SimpleExchange, MethodArg::Lindblad) => {
                let (cfg, t) = self.exchange()?;
                let mut model = exchange_model(&cfg)?;
                model.gate_time = t;
                model.fidelity_lindblad()?
            }
            (Scheme::Raman, MethodArg::Analytic) => fidelity_analytic_raman(&self.raman()?.0)?,
            (Scheme::Raman, MethodArg::Numeric) => {
                let (cfg, t) = self.raman()?;
                fidelity_numeric_raman(&cfg, t)?
            }
            (Scheme::Raman, MethodArg::Lindblad) => {
                let (cfg, t) = self.raman()?;
                let mut model = raman_model(&cfg)?;
                model.gate_time = t;
                model.fidelity_lindblad()?
            }
        };
        if result.clamped {
            notes.push("fidelity clamped to [0, 1]: inputs are outside the model's validity".to_string());
        }
        let mut warnings = result.warnings.clone();
        warnings.extend(notes);
        Ok(result.with_warnings(warnings))
    }
}

/// Sets `value` at a dotted path such as `scheme.raman.detuning`, creating
/// intermediate tables.
pub fn set_path(table: &mut Table, path: &str, value: Value) -> CliResult<()> {
    let parts: Vec<&str> = path.split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut current = table;
    for (i, part) in parents.iter().enumerate() {
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(parts[..=i].join("."), "expected a table"))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    const YB: &str = r#"
[cavity]
cooperativity = 50000
g_over_kappa = 0.1
gamma = "596 hz"

[decoherence]
t2 = "6.6 ms"
optical_dephasing = "9e3 per_s"

[scheme.scattering]
gate_time = "1 per_gamma"
delta_p = "30 per_gamma"

[scheme.simple_exchange]
delta_eg = "0.2 ghz"
"#;

    #[test]
    fn ytterbium_scattering() {
        let c = GateConfig::parse(YB).unwrap();
        let r = c.evaluate(Scheme::Scattering, MethodArg::Analytic).unwrap();
        assert!((r.fidelity - 0.98).abs() < 1e-3);
        assert!((r.gate_time - 267e-6).abs() < 1e-6);
        assert!((c.gamma_eff(Scheme::SimpleExchange) - (1.0 / 13.2e-3 + 4500.0)).abs() < 1e-9);
    }

    #[test]
    fn ytterbium_exchange() {
        let c = GateConfig::parse(YB).unwrap();
        let r = c.evaluate(Scheme::SimpleExchange, MethodArg::Analytic).unwrap();
        assert!((r.fidelity - 0.952).abs() < 1e-3);
        assert!((r.gate_time / 7.5e-6 - 1.0).abs() < 0.01);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = GateConfig::parse("[cavity]\ncooperativity = 10\ng_over_kappa = 0.1\ncolour = 3\n").unwrap_err();
        assert!(matches!(err, CliError::Config { ref key, .. } if key == "cavity.colour"));
        let err = GateConfig::parse("[cavity]\ncooperativity = 10\ng_over_kappa = 0.1\n[scheme.bogus]\n").unwrap_err();
        assert!(matches!(err, CliError::Config { ref key, .. } if key == "scheme.bogus"));
        let err = GateConfig::parse("[cavity]\ncooperativity = 10\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn dimensionless_defaults() {
        let c = GateConfig::parse("[cavity]\ncooperativity = 8000\ng_over_kappa = 0.1\n").unwrap();
        assert!(!c.physical);
        assert_eq!(c.cavity.gamma(), 1.0);
        let (cfg, t) = c.exchange().unwrap();
        assert!((cfg.delta / c.cavity.kappa() - 0.5 * 8000f64.sqrt()).abs() < 1e-9);
        assert!((t - 2.0 * PI / 8000f64.sqrt()).abs() < 1e-12);
        let err = c.evaluate(Scheme::Scattering, MethodArg::Analytic).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = c.evaluate(Scheme::Scattering, MethodArg::Lindblad).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn set_path_creates_tables() {
        let mut t = Table::new();
        set_path(&mut t, "scheme.raman.detuning", Value::String("2 per_kappa".into())).unwrap();
        assert_eq!(t["scheme"]["raman"]["detuning"].as_str(), Some("2 per_kappa"));
        set_path(&mut t, "scheme.raman.detuning.x", Value::Float(1.0)).unwrap_err();
    }
}
