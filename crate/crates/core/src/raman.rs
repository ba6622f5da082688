//! Raman-assisted virtual-photon exchange gate.
//!
//! Both emitters are driven off-resonantly so that a cavity-assisted Raman
//! transition swaps `|ud>` with `|du>` and back, returning with a pi phase.
//! Qubit B's `|u>` is shelved to `|s>` beforehand, so the `|us>` branch only
//! sees Stark and Lamb shifts. The two optical transitions need not match.

use std::f64::consts::PI;

use crate::dense::{propagate, ComplexMatrix, StateVector, C64};
use crate::error::{require_finite, require_non_negative, require_positive, GateError, Result};
use crate::params::{CavitySystem, GateResult, Method};
use crate::simple_exchange::f_pi_limit;

/// Above this drive ratio the adiabatic picture is no longer trusted.
pub const ADIABATIC_DRIVE_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanConfig {
    pub cavity: CavitySystem,
    pub g_a: f64,
    pub g_b: f64,
    /// Laser detunings `Delta_A`, `Delta_B` from the optical transitions.
    pub detuning_a: f64,
    pub detuning_b: f64,
    /// Two-photon detunings `delta_A`, `delta_B` from the cavity.
    pub two_photon_a: f64,
    pub two_photon_b: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub gamma_eff: f64,
}

impl RamanConfig {
    /// Equal couplings and laser detunings, two-photon resonance, drive
    /// `Omega = ratio * Delta` on both emitters.
    pub fn symmetric(
        cavity: CavitySystem,
        detuning: f64,
        two_photon: f64,
        omega_over_delta: f64,
        gamma_eff: f64,
    ) -> Result<Self> {
        require_positive("detuning", detuning)?;
        require_positive("two_photon_detuning", two_photon)?;
        require_non_negative("omega_over_delta", omega_over_delta)?;
        let omega = omega_over_delta * detuning;
        let cfg = Self {
            cavity,
            g_a: cavity.g(),
            g_b: cavity.g(),
            detuning_a: detuning,
            detuning_b: detuning,
            two_photon_a: two_photon,
            two_photon_b: two_photon,
            omega_a: omega,
            omega_b: omega,
            gamma_eff: require_non_negative("gamma_eff", gamma_eff)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Ridge configuration `2 delta = kappa sqrt(C)`.
    pub fn on_ridge(cavity: CavitySystem, detuning: f64, omega_over_delta: f64, gamma_eff: f64) -> Result<Self> {
        Self::symmetric(
            cavity,
            detuning,
            optimal_two_photon_detuning(&cavity),
            omega_over_delta,
            gamma_eff,
        )
    }

    pub fn validate(&self) -> Result<()> {
        require_non_negative("g_a", self.g_a)?;
        require_non_negative("g_b", self.g_b)?;
        require_finite("detuning_a", self.detuning_a)?;
        require_finite("detuning_b", self.detuning_b)?;
        require_finite("two_photon_a", self.two_photon_a)?;
        require_finite("two_photon_b", self.two_photon_b)?;
        require_non_negative("omega_a", self.omega_a)?;
        require_non_negative("omega_b", self.omega_b)?;
        require_non_negative("gamma_eff", self.gamma_eff)?;
        require_positive("two_photon_detuning", self.two_photon())?;
        Ok(())
    }

    /// Replaces `Omega_B` by the value that compensates unequal couplings and
    /// detunings.
    pub fn with_matched_drive(mut self) -> Result<Self> {
        self.omega_b = match_omega_b(&self)?.exact;
        Ok(self)
    }

    /// Mean laser detuning `(Delta_A + Delta_B)/2`.
    pub fn detuning(&self) -> f64 {
        0.5 * (self.detuning_a + self.detuning_b)
    }

    /// `|Delta_A - Delta_B|`.
    pub fn detuning_mismatch(&self) -> f64 {
        (self.detuning_a - self.detuning_b).abs()
    }

    /// Mean two-photon detuning.
    pub fn two_photon(&self) -> f64 {
        0.5 * (self.two_photon_a + self.two_photon_b)
    }

    /// `|delta_A - delta_B|`.
    pub fn two_photon_mismatch(&self) -> f64 {
        (self.two_photon_a - self.two_photon_b).abs()
    }

    pub fn gate_time(&self) -> Result<f64> {
        gate_time_raman(self)
    }
}

/// `2 delta = kappa sqrt(C)`.
pub fn optimal_two_photon_detuning(cavity: &CavitySystem) -> f64 {
    0.5 * cavity.kappa() * cavity.cooperativity().sqrt()
}

/// Drive-matching result: exact relation and its weak-coupling approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedDrive {
    pub exact: f64,
    pub approximate: f64,
}

/// `Omega_B = Omega_A sqrt((g_A^2 + delta Delta_A)/(g_B^2 + delta Delta_B))`,
/// approximately `Omega_A sqrt(Delta_A/Delta_B)`.
pub fn match_omega_b(config: &RamanConfig) -> Result<MatchedDrive> {
    let d = config.two_photon();
    let num = config.g_a * config.g_a + d * config.detuning_a;
    let den = config.g_b * config.g_b + d * config.detuning_b;
    require_positive("g_A^2 + delta Delta_A", num)?;
    require_positive("g_B^2 + delta Delta_B", den)?;
    let ratio = config.detuning_a / config.detuning_b;
    Ok(MatchedDrive {
        exact: config.omega_a * (num / den).sqrt(),
        approximate: if ratio > 0.0 {
            config.omega_a * ratio.sqrt()
        } else {
            f64::NAN
        },
    })
}

/// `T = pi (g_A^2 Delta_A + g_B^2 Delta_B + delta Delta_A Delta_B) / (g_A g_B Omega_A Omega_B)`.
pub fn gate_time_raman(config: &RamanConfig) -> Result<f64> {
    require_positive("g_a", config.g_a)?;
    require_positive("g_b", config.g_b)?;
    require_positive("omega_a", config.omega_a)?;
    require_positive("omega_b", config.omega_b)?;
    let (ga, gb) = (config.g_a, config.g_b);
    let (da, db) = (config.detuning_a, config.detuning_b);
    let num = ga * ga * da + gb * gb * db + config.two_photon() * da * db;
    let t = PI * num / (ga * gb * config.omega_a * config.omega_b);
    require_positive("gate_time", t)
}

/// `T_o = (Delta/Omega)^2 2 pi / (gamma sqrt C)`.
pub fn optimal_gate_time_raman(cavity: &CavitySystem, omega_over_delta: f64) -> Result<f64> {
    require_positive("omega_over_delta", omega_over_delta)?;
    Ok(2.0 * PI / (omega_over_delta.powi(2) * cavity.gamma() * cavity.cooperativity().sqrt()))
}

/// `up_down` has basis `{|ud0>, |ed0>, |dd1>, |de0>, |du0>}` and `up_up` has
/// basis `{|us0>, |es0>, |ds1>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RamanHamiltonians {
    pub up_down: ComplexMatrix,
    pub up_up: ComplexMatrix,
    pub up_down_eff: ComplexMatrix,
    pub up_up_eff: ComplexMatrix,
}

fn with_decay(h: &ComplexMatrix, rates: &[f64]) -> ComplexMatrix {
    let mut out = h.clone();
    for (i, r) in rates.iter().enumerate() {
        out[(i, i)] -= C64::new(0.0, 0.5 * r);
    }
    out
}

pub fn build_raman_hamiltonians(config: &RamanConfig) -> Result<RamanHamiltonians> {
    config.validate()?;
    let (oa, ob) = (config.omega_a, config.omega_b);
    let (ga, gb) = (config.g_a, config.g_b);
    let (da, db) = (config.detuning_a, config.detuning_b);
    let (sa, sb) = (config.two_photon_a, config.two_photon_b);
    let up_down = ComplexMatrix::from_real_rows(&[
        &[0.0, oa, 0.0, 0.0, 0.0],
        &[oa, da, ga, 0.0, 0.0],
        &[0.0, ga, -sa, gb, 0.0],
        &[0.0, 0.0, gb, db + (sb - sa), ob],
        &[0.0, 0.0, 0.0, ob, sb - sa],
    ])?;
    let up_up = ComplexMatrix::from_real_rows(&[&[0.0, oa, 0.0], &[oa, da, ga], &[0.0, ga, -sa]])?;
    let (gamma, kappa) = (config.cavity.gamma(), config.cavity.kappa());
    Ok(RamanHamiltonians {
        up_down_eff: with_decay(&up_down, &[0.0, gamma, kappa, gamma, 0.0]),
        up_up_eff: with_decay(&up_up, &[0.0, gamma, kappa]),
        up_down,
        up_up,
    })
}

/// No-jump amplitudes `(<us0|..|us0>, <ud0|..|ud0>)` after time `t` and the
/// no-jump probability for `(|us> + |ud>)/sqrt 2`.
pub fn branch_amplitudes(config: &RamanConfig, t: f64) -> Result<(C64, C64, f64)> {
    require_positive("gate_time", t)?;
    let h = build_raman_hamiltonians(config)?;
    let uu = propagate(&h.up_up_eff, &StateVector::basis(3, 0), t)?;
    let ud = propagate(&h.up_down_eff, &StateVector::basis(5, 0), t)?;
    let p = 0.5 * (uu.norm_sqr() + ud.norm_sqr());
    Ok((uu.amplitude(0), ud.amplitude(0), p))
}

/// `(|A - B|/2 + 1)/2 - Gamma t` from exact propagation of both blocks.
pub fn fidelity_numeric_raman(config: &RamanConfig, t: f64) -> Result<GateResult> {
    let (a, b, p) = branch_amplitudes(config, t)?;
    let f_pi = 0.5 * (a - b).norm();
    let f = 0.5 * (f_pi + 1.0) - config.gamma_eff * t;
    Ok(GateResult::new(f, t, p, Method::NonHermitian).with_warnings(adiabatic_warnings(config)))
}

/// [`fidelity_numeric_raman`] at the pi-phase time.
pub fn fidelity_numeric_at_gate_time(config: &RamanConfig) -> Result<GateResult> {
    fidelity_numeric_raman(config, gate_time_raman(config)?)
}

/// Cooperativity-limited phase fidelity on the ridge; the same function as the
/// simple-exchange limit with `delta` in place of `Delta`.
pub fn f_pi_ridge(cooperativity: f64, kappa: f64, two_photon: f64) -> f64 {
    f_pi_limit(cooperativity, kappa, two_photon)
}

/// Adiabatic estimate including drive-induced and cavity-Rabi corrections:
/// `(cos^2(pi Omega/4 Delta) cos^2(pi Omega^2/2 delta Delta) sin((pi/2)/(1 + g^2/delta Delta)) F_pi + 1)/2`
/// minus the resonance-error terms and `Gamma T`.
pub fn fidelity_analytic_raman(config: &RamanConfig) -> Result<GateResult> {
    config.validate()?;
    let cav = &config.cavity;
    let (c, kappa) = (cav.cooperativity(), cav.kappa());
    let g2 = config.g_a * config.g_b;
    let d = config.detuning();
    let delta = config.two_photon();
    let omega = (config.omega_a * config.omega_b).sqrt();
    let t = gate_time_raman(config)?;

    let prefactor = (PI * omega / (4.0 * d)).cos().powi(2)
        * (PI * omega * omega / (2.0 * delta * d)).cos().powi(2)
        * ((PI / 2.0) / (1.0 + g2 / (delta * d))).sin();
    let f_pi = f_pi_ridge(c, kappa, delta);
    let errors = (t * config.two_photon_mismatch() / (2.0 * PI)).powi(2) + (config.detuning_mismatch() / d).powi(2);
    let f = 0.5 * (prefactor * f_pi + 1.0) - PI * PI / 16.0 * errors - config.gamma_eff * t;
    Ok(GateResult::new(f, t, 1.0, Method::Analytic).with_warnings(adiabatic_warnings(config)))
}

fn adiabatic_warnings(config: &RamanConfig) -> Vec<String> {
    let mut warnings = Vec::new();
    let ratio_a = config.omega_a / config.detuning_a.abs();
    let ratio_b = config.omega_b / config.detuning_b.abs();
    if ratio_a.max(ratio_b) > ADIABATIC_DRIVE_LIMIT {
        warnings.push(format!(
            "drive ratio Omega/Delta = {:.3} exceeds {ADIABATIC_DRIVE_LIMIT}",
            ratio_a.max(ratio_b)
        ));
    }
    warnings
}

/// Large-cooperativity maximum on the ridge:
/// `1 - pi/sqrt C - (pi^2/16)[(T_o delta_eps/2 pi)^2 + (Delta_eps/Delta)^2 - 18/C] - Gamma T_o`.
pub fn max_fidelity_raman(
    cavity: &CavitySystem,
    omega_over_delta: f64,
    two_photon_mismatch: f64,
    detuning_mismatch_ratio: f64,
    gamma_eff: f64,
) -> Result<GateResult> {
    require_finite("two_photon_mismatch", two_photon_mismatch)?;
    require_finite("detuning_mismatch_ratio", detuning_mismatch_ratio)?;
    require_non_negative("gamma_eff", gamma_eff)?;
    let c = cavity.cooperativity();
    let t = optimal_gate_time_raman(cavity, omega_over_delta)?;
    let errors = (t * two_photon_mismatch / (2.0 * PI)).powi(2) + detuning_mismatch_ratio.powi(2);
    let f = 1.0 - PI / c.sqrt() - PI * PI / 16.0 * (errors - 18.0 / c) - gamma_eff * t;
    let mut warnings = Vec::new();
    if omega_over_delta > ADIABATIC_DRIVE_LIMIT {
        warnings.push(format!("drive ratio {omega_over_delta} is not small"));
    }
    if c < 100.0 {
        warnings.push(format!("cooperativity {c} is not large"));
    }
    Ok(GateResult::new(f, t, 1.0, Method::Analytic).with_warnings(warnings))
}

/// Operating point with the largest optical-transition mismatch that still
/// costs no more than the cooperativity limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSeparation {
    /// `Delta_eps = kappa gamma / (pi Gamma sqrt 8)`.
    pub detuning_mismatch: f64,
    /// `Omega/Delta = 2 sqrt(Gamma/gamma)`.
    pub omega_over_delta: f64,
    /// `Delta = Delta_eps sqrt(pi sqrt C) / 2`.
    pub detuning: f64,
    /// `T = pi / (2 Gamma sqrt C)`.
    pub gate_time: f64,
}

pub fn max_spectral_separation(
    kappa: f64,
    gamma: f64,
    gamma_eff: f64,
    cooperativity: f64,
) -> Result<SpectralSeparation> {
    require_positive("kappa", kappa)?;
    require_positive("gamma", gamma)?;
    require_positive("cooperativity", cooperativity)?;
    require_non_negative("gamma_eff", gamma_eff)?;
    if gamma_eff == 0.0 {
        return Err(GateError::ZeroDecoherence);
    }
    let mismatch = kappa * gamma / (PI * gamma_eff * 8f64.sqrt());
    let sqrt_c = cooperativity.sqrt();
    Ok(SpectralSeparation {
        detuning_mismatch: mismatch,
        omega_over_delta: 2.0 * (gamma_eff / gamma).sqrt(),
        detuning: 0.5 * mismatch * (PI * sqrt_c).sqrt(),
        gate_time: PI / (2.0 * gamma_eff * sqrt_c),
    })
}
