//! Shared physical parameters: cavity/emitter rates, decoherence budget and
//! the result record every scheme reports.
//!
//! All rates are angular frequencies in one common unit. If `gamma` is given
//! in rad/s, gate times come out in seconds; if everything is expressed in
//! units of `gamma`, times are in units of `1/gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Result};

/// Cavity coupling `g`, cavity decay `kappa` and emitter decay `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavitySystem {
    g: f64,
    kappa: f64,
    gamma: f64,
}

impl CavitySystem {
    pub fn new(g: f64, kappa: f64, gamma: f64) -> Result<Self> {
        Ok(Self {
            g: require_positive("g", g)?,
            kappa: require_positive("kappa", kappa)?,
            gamma: require_positive("gamma", gamma)?,
        })
    }

    /// Builds the system with a prescribed cooperativity and regime `g/kappa`.
    ///
    /// From `C = 4 g^2 / (kappa gamma)` and `g = r kappa` it follows that
    /// `kappa = C gamma / (4 r^2)`.
    pub fn from_cooperativity(cooperativity: f64, g_over_kappa: f64, gamma: f64) -> Result<Self> {
        require_positive("cooperativity", cooperativity)?;
        require_positive("g_over_kappa", g_over_kappa)?;
        require_positive("gamma", gamma)?;
        let kappa = cooperativity * gamma / (4.0 * g_over_kappa * g_over_kappa);
        Self::new(g_over_kappa * kappa, kappa, gamma)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `C = 4 g^2 / (kappa gamma)`.
    pub fn cooperativity(&self) -> f64 {
        4.0 * self.g * self.g / (self.kappa * self.gamma)
    }

    pub fn g_over_kappa(&self) -> f64 {
        self.g / self.kappa
    }

    /// Multiplies every rate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        require_positive("factor", factor)?;
        Self::new(self.g * factor, self.kappa * factor, self.gamma * factor)
    }

    /// Rates expressed in units of `gamma`, together with the `gamma` needed
    /// to convert back.
    pub fn to_dimensionless(&self) -> (Self, f64) {
        let unit = self.gamma;
        let reduced = Self {
            g: self.g / unit,
            kappa: self.kappa / unit,
            gamma: 1.0,
        };
        (reduced, unit)
    }
}

pub fn cooperativity(sys: &CavitySystem) -> f64 {
    sys.cooperativity()
}

/// Which gate protocol a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Scattering,
    SimpleExchange,
    Raman,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Scattering => "scattering",
            Scheme::SimpleExchange => "simple_exchange",
            Scheme::Raman => "raman",
        }
    }
}

/// Decoherence processes outside cavity loss and spontaneous emission.
///
/// Rates are in the same angular units as [`CavitySystem`]. A coherence time
/// `t2` contributes `1/(2 T2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceSpec {
    pub qubit_relaxation: f64,
    pub qubit_dephasing: f64,
    pub optical_dephasing: f64,
    pub shelving_decay: f64,
    pub t2: Option<f64>,
}

impl DecoherenceSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_t2(t2: f64) -> Result<Self> {
        require_positive("t2", t2)?;
        Ok(Self {
            t2: Some(t2),
            ..Self::default()
        })
    }

    pub fn with_optical_dephasing(mut self, rate: f64) -> Result<Self> {
        self.optical_dephasing = require_non_negative("optical_dephasing", rate)?;
        Ok(self)
    }

    pub fn with_shelving_decay(mut self, rate: f64) -> Result<Self> {
        self.shelving_decay = require_non_negative("shelving_decay", rate)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        require_non_negative("qubit_relaxation", self.qubit_relaxation)?;
        require_non_negative("qubit_dephasing", self.qubit_dephasing)?;
        require_non_negative("optical_dephasing", self.optical_dephasing)?;
        require_non_negative("shelving_decay", self.shelving_decay)?;
        if let Some(t2) = self.t2 {
            require_positive("t2", t2)?;
        }
        Ok(())
    }

    /// Qubit-only floor shared by every scheme: `gamma_rel/8 + gamma_deph/4`,
    /// raised to `1/(2 T2)` when a coherence time is given.
    pub fn qubit_rate(&self) -> f64 {
        let from_rates = self.qubit_relaxation / 8.0 + self.qubit_dephasing / 4.0;
        match self.t2 {
            Some(t2) => from_rates.max(1.0 / (2.0 * t2)),
            None => from_rates,
        }
    }

    /// Effective decoherence rate for `scheme`.
    pub fn effective_rate(&self, scheme: Scheme) -> f64 {
        let base = self.qubit_rate();
        match scheme {
            Scheme::Scattering => base,
            Scheme::SimpleExchange => base + self.optical_dephasing / 2.0,
            Scheme::Raman => base + self.shelving_decay / 8.0,
        }
    }
}

pub fn effective_gamma(spec: &DecoherenceSpec, scheme: Scheme) -> f64 {
    spec.effective_rate(scheme)
}

/// Evaluation route that produced a [`GateResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    NumericAmplitude,
    NonHermitian,
    Lindblad,
}

/// Fidelity and duration of one gate evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub fidelity: f64,
    pub gate_time: f64,
    pub success_probability: f64,
    pub method: Method,
    /// Set when the raw fidelity fell outside `[0, 1]` and was clamped.
    pub clamped: bool,
    /// Out-of-validity notes; never serialized with the result.
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl GateResult {
    pub fn new(raw_fidelity: f64, gate_time: f64, success_probability: f64, method: Method) -> Self {
        let fidelity = raw_fidelity.clamp(0.0, 1.0);
        Self {
            fidelity,
            gate_time,
            success_probability: success_probability.clamp(0.0, 1.0),
            method,
            clamped: fidelity != raw_fidelity,
            warnings: Vec::new(),
        }
    }

    pub fn with_warnings(mut self, warnings: Vec<String>) -> Self {
        self.warnings = warnings;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_cooperativity() {
        let sys = CavitySystem::new(1.0, 4.0, 1.0).unwrap();
        assert_eq!(sys.cooperativity(), 1.0);
    }

    #[test]
    fn cooperativity_round_trip() {
        for (c, r, gamma) in [(4000.0, 0.1, 1.0), (50_000.0, 0.1, 2.0 * PI * 596.0)] {
            let sys = CavitySystem::from_cooperativity(c, r, gamma).unwrap();
            assert!((sys.cooperativity() - c).abs() / c < 1e-12);
            assert!((sys.g_over_kappa() - r).abs() / r < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_rates() {
        assert!(CavitySystem::new(0.0, 1.0, 1.0).is_err());
        assert!(CavitySystem::new(1.0, -1.0, 1.0).is_err());
        assert!(CavitySystem::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn t2_only_gives_half_inverse() {
        let spec = DecoherenceSpec::from_t2(6.6e-3).unwrap();
        let rate = spec.effective_rate(Scheme::Scattering);
        assert!((rate - 75.7575).abs() < 0.01);
        assert!((rate - 75.8).abs() < 0.05);
    }

    #[test]
    fn simple_exchange_adds_optical_dephasing() {
        let spec = DecoherenceSpec::from_t2(6.6e-3)
            .unwrap()
            .with_optical_dephasing(9.0e3)
            .unwrap();
        let rate = spec.effective_rate(Scheme::SimpleExchange);
        assert!((rate - 4.58e3).abs() < 5.0, "{rate}");
        // Optical dephasing plays no role in the other schemes.
        assert_eq!(spec.effective_rate(Scheme::Scattering), 1.0 / (2.0 * 6.6e-3));
    }

    #[test]
    fn raman_adds_eighth_of_shelving_decay() {
        let spec = DecoherenceSpec::none().with_shelving_decay(8.0).unwrap();
        assert_eq!(spec.effective_rate(Scheme::Raman), 1.0);
    }

    #[test]
    fn no_decoherence_is_zero() {
        for scheme in [Scheme::Scattering, Scheme::SimpleExchange, Scheme::Raman] {
            assert_eq!(DecoherenceSpec::none().effective_rate(scheme), 0.0);
        }
    }

    #[test]
    fn clamping_sets_flag() {
        let r = GateResult::new(1.2, 1.0, 1.0, Method::Analytic);
        assert_eq!(r.fidelity, 1.0);
        assert!(r.clamped);
        let r = GateResult::new(0.5, 1.0, 1.0, Method::Analytic);
        assert!(!r.clamped);
    }
}
