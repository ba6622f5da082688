//! Simple virtual-photon exchange gate.
//!
//! Emitter A is excited, and its excitation is exchanged with emitter B
//! through a detuned cavity. When the opposite-spin transitions are resonant,
//! only the `|ud>` branch completes a full exchange cycle and picks up a
//! pi phase relative to `|uu>`.

use std::f64::consts::PI;

use crate::dense::{propagate, ComplexMatrix, StateVector, C64};
use crate::error::{invalid, require_finite, require_non_negative, require_positive, GateError, Result};
use crate::params::{CavitySystem, GateResult, Method};

/// Difference between the excited-state and ground-state splittings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Splitting {
    Finite(f64),
    /// Spectator transitions are infinitely far away and never interact.
    Infinite,
}

impl Splitting {
    pub fn finite(value: f64) -> Result<Self> {
        Ok(Self::Finite(require_non_negative("delta_eg", value)?))
    }

    pub fn value(&self) -> f64 {
        match self {
            Splitting::Finite(v) => *v,
            Splitting::Infinite => f64::INFINITY,
        }
    }
}

/// Which pair of transitions is brought into resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResonantPair {
    /// `|u>-|e2>` of A with `|d>-|e1>` of B; the `|ud>` branch flips.
    #[default]
    OppositeSpin,
    /// `|u>-|e2>` of both emitters; the `|uu>` branch flips.
    SameSpin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeConfig {
    pub cavity: CavitySystem,
    /// Coupling of A's `|u>-|e2>` transition.
    pub g_up_a: f64,
    /// Coupling of B's `|d>-|e1>` transition.
    pub g_down_b: f64,
    /// Coupling of B's `|u>-|e2>` transition.
    pub g_up_b: f64,
    /// Cavity detuning of emitter A.
    pub delta: f64,
    pub splitting: Splitting,
    /// Error in the tuning of emitter B.
    pub delta_eps: f64,
    pub gamma_eff: f64,
    pub mode: ResonantPair,
}

impl ExchangeConfig {
    /// All three transitions couple with the cavity's `g`.
    pub fn new(cavity: CavitySystem, delta: f64, splitting: Splitting, delta_eps: f64, gamma_eff: f64) -> Result<Self> {
        if let Splitting::Finite(v) = splitting {
            require_non_negative("delta_eg", v)?;
        }
        Ok(Self {
            cavity,
            g_up_a: cavity.g(),
            g_down_b: cavity.g(),
            g_up_b: cavity.g(),
            delta: require_positive("delta", delta)?,
            splitting,
            delta_eps: require_finite("delta_eps", delta_eps)?,
            gamma_eff: require_non_negative("gamma_eff", gamma_eff)?,
            mode: ResonantPair::OppositeSpin,
        })
    }

    /// Ideal splitting, no tuning error, detuning `kappa sqrt(C) / 2`.
    pub fn at_optimal_detuning(cavity: CavitySystem, gamma_eff: f64) -> Result<Self> {
        Self::new(cavity, optimal_detuning(&cavity), Splitting::Infinite, 0.0, gamma_eff)
    }

    pub fn with_couplings(mut self, g_up_a: f64, g_down_b: f64, g_up_b: f64) -> Result<Self> {
        self.g_up_a = require_non_negative("g_up_a", g_up_a)?;
        self.g_down_b = require_non_negative("g_down_b", g_down_b)?;
        self.g_up_b = require_non_negative("g_up_b", g_up_b)?;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: ResonantPair) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = require_positive("delta", delta)?;
        Ok(self)
    }

    /// Couplings of the resonant pair: A's `|u>` and B's partner transition.
    fn resonant_couplings(&self) -> (f64, f64) {
        match self.mode {
            ResonantPair::OppositeSpin => (self.g_up_a, self.g_down_b),
            ResonantPair::SameSpin => (self.g_up_a, self.g_up_b),
        }
    }

    /// Time for a pi phase with the resonant pair.
    pub fn gate_time(&self) -> Result<f64> {
        let (ga, gb) = self.resonant_couplings();
        gate_time_exchange(self.delta, ga, gb)
    }
}

/// `2 Delta = kappa sqrt(C)`.
pub fn optimal_detuning(cavity: &CavitySystem) -> f64 {
    0.5 * cavity.kappa() * cavity.cooperativity().sqrt()
}

/// `Delta_B = Delta + (g_uA^2 - g_dB^2)/Delta - delta_eg`: the tuning that puts
/// B's `|d>-|e1>` transition on resonance with A's `|u>-|e2>` after Stark shifts.
pub fn tune_delta_b(delta: f64, g_up_a: f64, g_down_b: f64, splitting: Splitting) -> Result<f64> {
    require_positive("delta", delta)?;
    match splitting {
        Splitting::Infinite => Err(GateError::IdealSplitting),
        Splitting::Finite(d_eg) => Ok(delta + (g_up_a * g_up_a - g_down_b * g_down_b) / delta - d_eg),
    }
}

/// `T = pi Delta / (g_uA g_dB)`.
pub fn gate_time_exchange(delta: f64, g_up_a: f64, g_down_b: f64) -> Result<f64> {
    require_positive("delta", delta)?;
    require_positive("g_up_a", g_up_a)?;
    require_positive("g_down_b", g_down_b)?;
    Ok(PI * delta / (g_up_a * g_down_b))
}

/// Single-excitation blocks. `up_down` has basis `{|e2 d 0>, |u d 1>, |u e1 0>}`
/// and `up_up` has basis `{|e2 u 0>, |u u 1>, |u e2 0>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeHamiltonians {
    pub up_down: ComplexMatrix,
    pub up_up: ComplexMatrix,
    pub up_down_eff: ComplexMatrix,
    pub up_up_eff: ComplexMatrix,
}

fn block(g1: f64, delta: f64, g2: f64, last: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, g1, 0.0], &[g1, delta, g2], &[0.0, g2, last]]).expect("3x3 block")
}

fn with_decay(h: &ComplexMatrix, rates: &[f64]) -> ComplexMatrix {
    let mut out = h.clone();
    for (i, r) in rates.iter().enumerate() {
        out[(i, i)] -= C64::new(0.0, 0.5 * r);
    }
    out
}

/// Builds both blocks in the frame where B is detuned by the Stark-corrected
/// resonance condition plus `delta_eps`. An infinite splitting decouples the
/// off-resonant third state.
pub fn build_hamiltonians(config: &ExchangeConfig) -> Result<ExchangeHamiltonians> {
    let d = config.delta;
    let (ga, gdb, gub) = (config.g_up_a, config.g_down_b, config.g_up_b);
    let eps = config.delta_eps;
    let (up_down, up_up) = match config.mode {
        ResonantPair::OppositeSpin => {
            // Delta_A - Delta_B - delta_eg with the tuned Delta_B.
            let resonant = -(ga * ga - gdb * gdb) / d - eps;
            let spectator = match config.splitting {
                Splitting::Finite(d_eg) => Some(d_eg + resonant),
                Splitting::Infinite => None,
            };
            let up_down = block(ga, d, gdb, resonant);
            let up_up = match spectator {
                Some(last) => block(ga, d, gub, last),
                None => block(ga, d, 0.0, 0.0),
            };
            (up_down, up_up)
        }
        ResonantPair::SameSpin => {
            let resonant = -(ga * ga - gub * gub) / d - eps;
            let up_up = block(ga, d, gub, resonant);
            let up_down = match config.splitting {
                Splitting::Finite(d_eg) => block(ga, d, gdb, resonant - d_eg),
                Splitting::Infinite => block(ga, d, 0.0, 0.0),
            };
            (up_down, up_up)
        }
    };
    let (gamma, kappa) = (config.cavity.gamma(), config.cavity.kappa());
    let rates = [gamma, kappa, gamma];
    Ok(ExchangeHamiltonians {
        up_down_eff: with_decay(&up_down, &rates),
        up_up_eff: with_decay(&up_up, &rates),
        up_down,
        up_up,
    })
}

/// No-jump amplitudes `(<e2 u 0|e^{-iTH_uu}|e2 u 0>, <e2 d 0|e^{-iTH_ud}|e2 d 0>)`
/// and the no-jump probability for `(|uu> + |ud>)/sqrt 2`.
pub fn branch_amplitudes(config: &ExchangeConfig, t: f64) -> Result<(C64, C64, f64)> {
    require_positive("gate_time", t)?;
    let h = build_hamiltonians(config)?;
    let start = StateVector::basis(3, 0);
    let uu = propagate(&h.up_up_eff, &start, t)?;
    let ud = propagate(&h.up_down_eff, &start, t)?;
    let p = 0.5 * (uu.norm_sqr() + ud.norm_sqr());
    Ok((uu.amplitude(0), ud.amplitude(0), p))
}

/// `F_pi = |A - B| / 2` from exact propagation of the two blocks.
pub fn f_pi_numeric(config: &ExchangeConfig, t: f64) -> Result<f64> {
    let (a, b, _) = branch_amplitudes(config, t)?;
    Ok(0.5 * (a - b).norm())
}

/// `F = (F_pi + 1)/2 - Gamma T` from the non-Hermitian propagation.
pub fn fidelity_numeric_exchange(config: &ExchangeConfig, t: f64) -> Result<GateResult> {
    let (a, b, p) = branch_amplitudes(config, t)?;
    let f_pi = 0.5 * (a - b).norm();
    let f = 0.5 * (f_pi + 1.0) - config.gamma_eff * t;
    Ok(GateResult::new(f, t, p, Method::NonHermitian))
}

/// Same as [`fidelity_numeric_exchange`] at the pi-phase time.
pub fn fidelity_numeric_at_gate_time(config: &ExchangeConfig) -> Result<GateResult> {
    fidelity_numeric_exchange(config, config.gate_time()?)
}

/// Adiabatic closed form for equal couplings:
/// `F_pi = e^{-2 pi Delta/(C kappa) - pi kappa/(2 Delta)} |e^{i 4 pi g^2/(Delta delta_eg)}
///  + cosh(pi kappa/(2 Delta)) e^{-i pi Delta_eps Delta/g^2}| / 2`.
pub fn f_pi_closed_form(config: &ExchangeConfig) -> f64 {
    let cav = &config.cavity;
    let (c, kappa) = (cav.cooperativity(), cav.kappa());
    let (ga, gb) = config.resonant_couplings();
    let g2 = ga * gb;
    let d = config.delta;
    let envelope = (-2.0 * PI * d / (c * kappa) - PI * kappa / (2.0 * d)).exp();
    let spectator = match config.splitting {
        Splitting::Finite(d_eg) => C64::new(0.0, 4.0 * PI * g2 / (d * d_eg)).exp(),
        Splitting::Infinite => C64::new(1.0, 0.0),
    };
    let resonant = C64::new(0.0, -PI * config.delta_eps * d / g2).exp() * (PI * kappa / (2.0 * d)).cosh();
    0.5 * envelope * (spectator + resonant).norm()
}

/// Ideal-splitting, zero-error limit `e^{-2 pi Delta/(C kappa) - pi kappa/(2 Delta)} cosh^2(pi kappa/(4 Delta))`.
pub fn f_pi_limit(cooperativity: f64, kappa: f64, delta: f64) -> f64 {
    (-2.0 * PI * delta / (cooperativity * kappa) - PI * kappa / (2.0 * delta)).exp()
        * (PI * kappa / (4.0 * delta)).cosh().powi(2)
}

/// `(F_pi + 1)/2 - Gamma T` with the closed-form `F_pi`.
pub fn fidelity_closed_form(config: &ExchangeConfig) -> Result<GateResult> {
    let t = config.gate_time()?;
    let f = 0.5 * (f_pi_closed_form(config) + 1.0) - config.gamma_eff * t;
    let mut warnings = Vec::new();
    let (ga, gb) = config.resonant_couplings();
    if (ga - gb).abs() > 1e-9 * ga.max(gb) {
        warnings.push("closed form assumes equal couplings".to_string());
    }
    if config.delta < config.cavity.kappa() {
        warnings.push("detuning below kappa: outside the adiabatic regime".to_string());
    }
    Ok(GateResult::new(f, t, 1.0, Method::Analytic).with_warnings(warnings))
}

/// Optimal gate time `2 pi / (gamma sqrt(C))` at `2 Delta = kappa sqrt(C)`.
pub fn optimal_gate_time_exchange(cavity: &CavitySystem) -> f64 {
    2.0 * PI / (cavity.gamma() * cavity.cooperativity().sqrt())
}

/// Large-cooperativity expansion of the maximum fidelity:
/// `1 - pi/sqrt C - (3 pi^2/32)[(T_o Delta_eps/2 pi)^2 + (2 pi/(T_o delta_eg))^2 - 12/C] - Gamma T_o`.
pub fn max_fidelity_exchange(
    cavity: &CavitySystem,
    splitting: Splitting,
    delta_eps: f64,
    gamma_eff: f64,
) -> Result<GateResult> {
    require_finite("delta_eps", delta_eps)?;
    require_non_negative("gamma_eff", gamma_eff)?;
    let c = cavity.cooperativity();
    let t = optimal_gate_time_exchange(cavity);
    let spectator = match splitting {
        Splitting::Finite(d_eg) if d_eg > 0.0 => (2.0 * PI / (t * d_eg)).powi(2),
        Splitting::Finite(_) => return Err(invalid("delta_eg", "must be > 0 for the expansion")),
        Splitting::Infinite => 0.0,
    };
    let tuning = (t * delta_eps / (2.0 * PI)).powi(2);
    let f = 1.0 - PI / c.sqrt() - 3.0 * PI * PI / 32.0 * (tuning + spectator - 12.0 / c) - gamma_eff * t;
    let mut warnings = Vec::new();
    if c < 100.0 {
        warnings.push(format!("cooperativity {c} is not large"));
    }
    Ok(GateResult::new(f, t, 1.0, Method::Analytic).with_warnings(warnings))
}
