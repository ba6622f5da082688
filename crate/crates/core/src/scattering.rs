//! Photon-scattering phase gate.
//!
//! A single photon reflects off a one-sided cavity holding both emitters.
//! The reflection amplitude depends on which emitters are resonant with the
//! cavity, so the four spin configurations pick up different phases: only
//! `|dd>` (both emitters far detuned) reflects with a sign flip.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dense::{ComplexMatrix, StateVector, C64};
use crate::error::{invalid, require_finite, require_non_negative, require_positive, GateError, Result};
use crate::params::{CavitySystem, GateResult, Method};

/// Default Gauss-Hermite node count.
pub const DEFAULT_NODES: usize = 128;

/// Largest entry change tolerated when the node count is doubled.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

const MIN_NODES: usize = 32;

/// Gaussian single photon: spectral standard deviation and mean detuning from
/// the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonPulse {
    sigma_p: f64,
    delta_p: f64,
}

impl PhotonPulse {
    pub fn new(sigma_p: f64, delta_p: f64) -> Result<Self> {
        Ok(Self {
            sigma_p: require_positive("sigma_p", sigma_p)?,
            delta_p: require_finite("delta_p", delta_p)?,
        })
    }

    /// Pulse whose width corresponds to gate time `t`.
    pub fn from_gate_time(t: f64, delta_p: f64) -> Result<Self> {
        require_positive("gate_time", t)?;
        Self::new(pulse_constant() / t, delta_p)
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    pub fn delta_p(&self) -> f64 {
        self.delta_p
    }

    /// `T = 8 pi sqrt(2 ln 2) / sigma_p`.
    pub fn gate_time(&self) -> f64 {
        pulse_constant() / self.sigma_p
    }
}

fn pulse_constant() -> f64 {
    8.0 * PI * (2.0 * LN_2).sqrt()
}

/// Detuning of one emitter transition from the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmitterDetuning {
    Finite(f64),
    /// Uncoupled transition; its term drops out of the reflection exactly.
    FarDetuned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringConfig {
    pub cavity: CavitySystem,
    pub pulse: PhotonPulse,
    pub delta_eps_a: f64,
    pub delta_eps_b: f64,
    /// Effective decoherence rate.
    pub gamma_eff: f64,
}

impl ScatteringConfig {
    pub fn new(
        cavity: CavitySystem,
        pulse: PhotonPulse,
        delta_eps_a: f64,
        delta_eps_b: f64,
        gamma_eff: f64,
    ) -> Result<Self> {
        Ok(Self {
            cavity,
            pulse,
            delta_eps_a: require_finite("delta_eps_a", delta_eps_a)?,
            delta_eps_b: require_finite("delta_eps_b", delta_eps_b)?,
            gamma_eff: require_non_negative("gamma_eff", gamma_eff)?,
        })
    }

    pub fn gate_time(&self) -> f64 {
        self.pulse.gate_time()
    }

    /// Same configuration with the pulse stretched to gate time `t`.
    pub fn with_gate_time(&self, t: f64) -> Result<Self> {
        Ok(Self {
            pulse: PhotonPulse::from_gate_time(t, self.pulse.delta_p)?,
            ..*self
        })
    }
}

/// `a_out / a_in = 1 - kappa / (kappa/2 + sum_k g^2/r_k - i omega)` with
/// `r_k = gamma/2 + i (Delta_k - omega)`.
pub fn reflection_ratio(
    cavity: &CavitySystem,
    delta_a: EmitterDetuning,
    delta_b: EmitterDetuning,
    omega: f64,
) -> Result<C64> {
    let (g, kappa, gamma) = (cavity.g(), cavity.kappa(), cavity.gamma());
    let mut denom = C64::new(kappa / 2.0, -omega);
    for d in [delta_a, delta_b] {
        if let EmitterDetuning::Finite(delta) = d {
            denom += g * g / C64::new(gamma / 2.0, delta - omega);
        }
    }
    let size = denom.norm();
    if size.is_nan() || size < 1e-300 {
        return Err(GateError::DivergentDenominator(size));
    }
    Ok(C64::new(1.0, 0.0) - kappa / denom)
}

/// Reflection amplitudes in the order `[uu, ud, du, dd]`, where an up spin
/// couples its emitter to the cavity.
pub fn spin_amplitudes(config: &ScatteringConfig, omega: f64) -> Result<[C64; 4]> {
    use EmitterDetuning::{FarDetuned, Finite};
    let a = Finite(config.delta_eps_a);
    let b = Finite(config.delta_eps_b);
    let cav = &config.cavity;
    Ok([
        reflection_ratio(cav, a, b, omega)?,
        reflection_ratio(cav, a, FarDetuned, omega)?,
        reflection_ratio(cav, FarDetuned, b, omega)?,
        reflection_ratio(cav, FarDetuned, FarDetuned, omega)?,
    ])
}

/// Nodes and weights for `integral f(x) exp(-x^2/2) dx / sqrt(2 pi)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub-Welsch rule for the standard normal weight, cached per node count.
pub fn gauss_hermite(n: usize) -> Arc<GaussHermite> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(golub_welsch(n));
    cache
        .lock()
        .expect("quadrature cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

fn golub_welsch(n: usize) -> GaussHermite {
    assert!(n >= 1);
    // Jacobi matrix of the probabilists' Hermite recurrence.
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    GaussHermite {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    }
}

fn density_with_rule(config: &ScatteringConfig, rule: &GaussHermite) -> Result<ComplexMatrix> {
    let mut rho = ComplexMatrix::zeros(4);
    let (mean, width) = (config.pulse.delta_p, config.pulse.sigma_p);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let s = spin_amplitudes(config, mean + width * x)?;
        for i in 0..4 {
            for j in 0..4 {
                rho[(i, j)] += s[i] * s[j].conj() * (0.25 * w);
            }
        }
    }
    Ok(rho)
}

/// Spin state after the photon is traced out, for an equal superposition of
/// the four spin configurations. The trace falls short of one by the
/// photon-loss probability.
///
/// Uses Gauss-Hermite with `nodes` points, checked against `2 * nodes`. When
/// the reflection spectrum has features much narrower than the pulse (strong
/// coupling, small cooperativity) that check fails and the integral is redone
/// by adaptive Gauss-Kronrod subdivision.
pub fn reduced_density_matrix(config: &ScatteringConfig, nodes: usize) -> Result<ComplexMatrix> {
    if nodes < MIN_NODES {
        return Err(invalid(
            "quadrature_nodes",
            format!("need at least {MIN_NODES}, got {nodes}"),
        ));
    }
    let rho = density_with_rule(config, &gauss_hermite(nodes))?;
    let check = density_with_rule(config, &gauss_hermite(2 * nodes))?;
    if rho.max_abs_diff(&check) <= QUADRATURE_TOLERANCE {
        return Ok(rho);
    }
    density_adaptive(config)
}

// 15-point Kronrod extension of the 7-point Gauss rule, on [-1, 1].
#[allow(clippy::excessive_precision)]
const KRONROD_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for KRONROD_NODES[1], [3], [5], [7].
#[allow(clippy::excessive_precision)]
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Standard-normal tail beyond this many widths is below 1e-31.
const ADAPTIVE_HALF_WIDTH: f64 = 12.0;
const ADAPTIVE_MAX_INTERVALS: usize = 20_000;

type Block = [C64; 16];

struct Interval {
    a: f64,
    b: f64,
    value: Block,
    error: f64,
}

fn outer_block(config: &ScatteringConfig, x: f64) -> Result<Block> {
    let s = spin_amplitudes(config, config.pulse.delta_p + config.pulse.sigma_p * x)?;
    let w = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let mut out = [C64::new(0.0, 0.0); 16];
    for i in 0..4 {
        for j in 0..4 {
            out[4 * i + j] = s[i] * s[j].conj() * w;
        }
    }
    Ok(out)
}

fn kronrod_interval(config: &ScatteringConfig, a: f64, b: f64) -> Result<Interval> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = [C64::new(0.0, 0.0); 16];
    let mut gauss = [C64::new(0.0, 0.0); 16];
    for (k, &node) in KRONROD_NODES.iter().enumerate() {
        let points: &[f64] = if node == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sign in points {
            let f = outer_block(config, mid + sign * node * half)?;
            for e in 0..16 {
                kronrod[e] += f[e] * KRONROD_WEIGHTS[k];
                if k % 2 == 1 {
                    gauss[e] += f[e] * GAUSS7_WEIGHTS[k / 2];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    for e in 0..16 {
        kronrod[e] *= half;
        gauss[e] *= half;
        error = error.max((kronrod[e] - gauss[e]).norm());
    }
    Ok(Interval {
        a,
        b,
        value: kronrod,
        error,
    })
}

fn density_adaptive(config: &ScatteringConfig) -> Result<ComplexMatrix> {
    let pieces = 48;
    let step = 2.0 * ADAPTIVE_HALF_WIDTH / pieces as f64;
    let mut intervals = (0..pieces)
        .map(|k| {
            let a = -ADAPTIVE_HALF_WIDTH + k as f64 * step;
            kronrod_interval(config, a, a + step)
        })
        .collect::<Result<Vec<_>>>()?;
    let total_error = |ivs: &[Interval]| ivs.iter().map(|iv| iv.error).sum::<f64>();
    let mut error = total_error(&intervals);
    while error > 0.1 * QUADRATURE_TOLERANCE {
        if intervals.len() >= ADAPTIVE_MAX_INTERVALS {
            return Err(GateError::QuadratureNotConverged(error));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("non-empty interval list");
        let iv = intervals.swap_remove(worst);
        let mid = 0.5 * (iv.a + iv.b);
        if !(mid > iv.a && mid < iv.b) {
            return Err(GateError::QuadratureNotConverged(error));
        }
        intervals.push(kronrod_interval(config, iv.a, mid)?);
        intervals.push(kronrod_interval(config, mid, iv.b)?);
        error = total_error(&intervals);
    }
    // Sum in a fixed order so results do not depend on the refinement path.
    intervals.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut rho = ComplexMatrix::zeros(4);
    for iv in &intervals {
        for i in 0..4 {
            for j in 0..4 {
                rho[(i, j)] += iv.value[4 * i + j] * 0.25;
            }
        }
    }
    Ok(rho.hermitian_part())
}

/// `(|uu> + |ud> + |du> - |dd>) / 2`.
pub fn target_state() -> StateVector {
    let h = C64::new(0.5, 0.0);
    StateVector::from_amplitudes(vec![h, h, h, -h])
}

/// Scales every coherence by `exp(-8/3 Gamma T)`, giving `F ~ 1 - Gamma T`
/// to first order for the target state.
pub fn apply_dephasing(rho: &ComplexMatrix, gamma_eff: f64, t: f64) -> ComplexMatrix {
    let x = (-8.0 / 3.0 * gamma_eff * t).exp();
    let mut out = rho.clone();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                out[(i, j)] *= x;
            }
        }
    }
    out
}

/// Fidelity from the exact reflection amplitudes integrated over the photon
/// spectrum. Conditioned on the photon being detected; the detection
/// probability is reported as `success_probability`.
pub fn fidelity_numeric(config: &ScatteringConfig) -> Result<GateResult> {
    fidelity_numeric_with_nodes(config, DEFAULT_NODES)
}

pub fn fidelity_numeric_with_nodes(config: &ScatteringConfig, nodes: usize) -> Result<GateResult> {
    let t = config.gate_time();
    let rho = reduced_density_matrix(config, nodes)?;
    let decohered = apply_dephasing(&rho, config.gamma_eff, t);
    let overlap = target_state().expectation(&decohered).re.max(0.0);
    Ok(GateResult::new(
        overlap.sqrt(),
        t,
        rho.trace().re,
        Method::NumericAmplitude,
    ))
}

/// Closed-form fidelity valid for `C >> 1` and small pulse/detuning errors.
pub fn fidelity_analytic(config: &ScatteringConfig) -> GateResult {
    let cav = &config.cavity;
    let (c, gamma) = (cav.cooperativity(), cav.gamma());
    let x = 2.0 * cav.g_over_kappa();
    let (dp, sp) = (config.pulse.delta_p, config.pulse.sigma_p);
    let t = config.gate_time();
    let bracket = 11.0 - 20.0 * x * x + 12.0 * x.powi(4);
    let spectral = (dp * dp + sp * sp) / (8.0 * gamma * gamma * c * c) * bracket;
    let mismatch = (config.delta_eps_a - config.delta_eps_b).powi(2) / (4.0 * gamma * gamma * c);
    let f = 1.0 - 5.0 / (4.0 * c) - spectral - mismatch - config.gamma_eff * t;

    let mut warnings = Vec::new();
    if c < 10.0 {
        warnings.push(format!("cooperativity {c} is not large"));
    }
    if dp.abs().max(sp) > 0.1 * gamma * c {
        warnings.push("photon detuning or bandwidth not small against gamma*C".into());
    }
    let eps = config.delta_eps_a.abs().max(config.delta_eps_b.abs());
    if eps > gamma {
        warnings.push("emitter detuning not small against gamma".into());
    }
    GateResult::new(f, t, 1.0, Method::Analytic).with_warnings(warnings)
}

/// `T_o = (352 pi^2 ln 2 / (gamma^2 C^2 Gamma))^(1/3)`.
pub fn optimal_gate_time(cooperativity: f64, gamma: f64, gamma_eff: f64) -> Result<f64> {
    require_positive("cooperativity", cooperativity)?;
    require_positive("gamma", gamma)?;
    require_non_negative("gamma_eff", gamma_eff)?;
    if gamma_eff == 0.0 {
        return Err(GateError::ZeroDecoherence);
    }
    let cube = 352.0 * PI * PI * LN_2 / (gamma * gamma * cooperativity * cooperativity * gamma_eff);
    Ok(cube.cbrt())
}

/// Plane-wave, resonant, decoherence-free limit `1 - 1/(C+1) - 1/(4C+2)`.
pub fn cooperativity_limited_fidelity(cooperativity: f64) -> f64 {
    let c = cooperativity;
    1.0 - 1.0 / (c + 1.0) - 1.0 / (4.0 * c + 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use EmitterDetuning::{FarDetuned, Finite};

    fn config(c: f64, gk: f64, t: f64, dp: f64, gamma_eff: f64) -> ScatteringConfig {
        let cav = CavitySystem::from_cooperativity(c, gk, 1.0).unwrap();
        let pulse = PhotonPulse::from_gate_time(t, dp).unwrap();
        ScatteringConfig::new(cav, pulse, 0.0, 0.0, gamma_eff).unwrap()
    }

    #[test]
    fn far_detuned_reflects_with_sign_flip() {
        let cav = CavitySystem::from_cooperativity(4000.0, 0.1, 1.0).unwrap();
        let r = reflection_ratio(&cav, FarDetuned, FarDetuned, 0.0).unwrap();
        assert!((r - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn resonant_pair_at_unit_cooperativity() {
        let cav = CavitySystem::new(1.0, 4.0, 1.0).unwrap();
        let r = reflection_ratio(&cav, Finite(0.0), Finite(0.0), 0.0).unwrap();
        assert!((r - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn single_resonant_emitter() {
        let c = 4000.0;
        let cfg = config(c, 0.1, 2.0, 0.0, 0.0);
        let s = spin_amplitudes(&cfg, 0.0).unwrap();
        assert!((s[1].re - (1.0 - 2.0 / (c + 1.0))).abs() < 1e-12);
        assert!(s[1].im.abs() < 1e-12);
        assert!((s[0].re - (1.0 - 2.0 / (2.0 * c + 1.0))).abs() < 1e-12);
    }

    #[test]
    fn ideal_limit_amplitudes() {
        let cfg = config(1e12, 0.1, 2.0, 0.0, 0.0);
        let s = spin_amplitudes(&cfg, 0.0).unwrap();
        for (got, want) in s.iter().zip([1.0, 1.0, 1.0, -1.0]) {
            assert!((got - C64::new(want, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn far_limit_matches_large_finite_detuning() {
        let c = 4000.0;
        let cfg = config(c, 0.1, 2.0, 0.0, 0.0);
        let omega = 0.5 * c;
        let s = spin_amplitudes(&cfg, omega).unwrap();
        let big = Finite(1e9);
        let cav = &cfg.cavity;
        let oracle = [
            reflection_ratio(cav, Finite(0.0), Finite(0.0), omega).unwrap(),
            reflection_ratio(cav, Finite(0.0), big, omega).unwrap(),
            reflection_ratio(cav, big, Finite(0.0), omega).unwrap(),
            reflection_ratio(cav, big, big, omega).unwrap(),
        ];
        for (a, b) in s.iter().zip(oracle) {
            assert!((a - b).norm() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn quadrature_integrates_moments() {
        let rule = gauss_hermite(64);
        let moment = |k: i32| -> f64 { rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(k)).sum() };
        assert!((moment(0) - 1.0).abs() < 1e-13);
        assert!(moment(1).abs() < 1e-13);
        assert!((moment(2) - 1.0).abs() < 1e-12);
        assert!((moment(4) - 3.0).abs() < 1e-11);
        assert!((moment(6) - 15.0).abs() < 1e-10);
    }

    #[test]
    fn narrow_pulse_approaches_ideal_state() {
        let cfg = config(1e12, 0.1, 1e6, 0.0, 0.0);
        let rho = reduced_density_matrix(&cfg, DEFAULT_NODES).unwrap();
        let psi = target_state();
        let ideal = psi.outer(&psi);
        assert!(rho.max_abs_diff(&ideal) < 1e-6);
    }

    #[test]
    fn trace_matches_plane_wave_loss() {
        let c = 4000.0;
        let cfg = config(c, 0.1, 1e5, 0.0, 0.0);
        let rho = reduced_density_matrix(&cfg, DEFAULT_NODES).unwrap();
        let s = spin_amplitudes(&cfg, 0.0).unwrap();
        let plane: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / 4.0;
        assert!((rho.trace().re - plane).abs() < 1e-8);
        assert!(rho.trace().re < 1.0 && rho.trace().re > 1.0 - 3.0 / c);
    }

    #[test]
    fn too_few_nodes_rejected() {
        let cfg = config(100.0, 0.1, 2.0, 0.0, 0.0);
        assert!(reduced_density_matrix(&cfg, 16).is_err());
    }

    #[test]
    fn cooperativity_limit_closed_form() {
        for c in [10.0, 100.0, 1000.0] {
            let cfg = config(c, 0.1, 1e6, 0.0, 0.0);
            let f = fidelity_numeric(&cfg).unwrap().fidelity;
            assert!((f - cooperativity_limited_fidelity(c)).abs() < 1e-8, "C={c}: {f}");
        }
        assert!((cooperativity_limited_fidelity(100.0) - 0.98761).abs() < 1e-5);
    }

    #[test]
    fn analytic_matches_numeric_at_moderate_coupling() {
        let cfg = config(4000.0, 0.1, 2.0, 30.0, 1e-5);
        let a = fidelity_analytic(&cfg).fidelity;
        let n = fidelity_numeric(&cfg).unwrap().fidelity;
        assert!((a - n).abs() < 0.01);
    }

    #[test]
    fn analytic_limits() {
        let cfg = config(1e15, 0.1, 2.0, 0.0, 0.0);
        assert!((fidelity_analytic(&cfg).fidelity - 1.0).abs() < 1e-12);
        let mut shifted = config(4000.0, 0.1, 2.0, 10.0, 0.0);
        let base = fidelity_analytic(&shifted).fidelity;
        shifted.delta_eps_a = 0.3;
        shifted.delta_eps_b = 0.3;
        assert_eq!(fidelity_analytic(&shifted).fidelity, base);
    }

    #[test]
    fn yb_scattering_case() {
        let gamma = 2.0 * PI * 596.0;
        let cav = CavitySystem::from_cooperativity(50_000.0, 0.1, gamma).unwrap();
        let pulse = PhotonPulse::from_gate_time(1.0 / gamma, 30.0 * gamma).unwrap();
        let cfg = ScatteringConfig::new(cav, pulse, 0.0, 0.0, 1.0 / (2.0 * 6.6e-3)).unwrap();
        let r = fidelity_analytic(&cfg);
        assert!((r.fidelity - 0.98).abs() < 0.003, "{}", r.fidelity);
        assert!((r.gate_time - 267e-6).abs() < 2.67e-6);
    }

    #[test]
    fn optimal_time_scaling() {
        let t = optimal_gate_time(4000.0, 1.0, 1e-5).unwrap();
        assert!((t - 2.469).abs() < 0.01, "{t}");
        let t8 = optimal_gate_time(4000.0, 1.0, 1e-5 / 8.0).unwrap();
        assert!((t8 / t - 2.0).abs() < 1e-12);
        assert_eq!(optimal_gate_time(4000.0, 1.0, 0.0), Err(GateError::ZeroDecoherence));
        assert!(optimal_gate_time(4000.0, 1.0, 1e30).unwrap() < 1e-6);
    }

    #[test]
    fn spectral_wandering_averages_to_variance() {
        // Averaging over a Gaussian photon detuning of width s is the same as
        // substituting s for the mean detuning.
        let s = 25.0;
        let rule = gauss_hermite(32);
        let averaged: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * fidelity_analytic(&config(4000.0, 0.1, 2.0, s * x, 1e-5)).fidelity)
            .sum();
        let substituted = fidelity_analytic(&config(4000.0, 0.1, 2.0, s, 1e-5)).fidelity;
        assert!((averaged - substituted).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn dd_amplitude_is_pure_phase(omega in -1e6f64..1e6, c in 1.0f64..1e5, gk in 0.01f64..10.0) {
            let cav = CavitySystem::from_cooperativity(c, gk, 1.0).unwrap();
            let r = reflection_ratio(&cav, FarDetuned, FarDetuned, omega).unwrap();
            prop_assert!((r.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn symmetric_detunings_give_symmetric_amplitudes(
            omega in -1e3f64..1e3, eps in -5.0f64..5.0, c in 10.0f64..1e4
        ) {
            let cav = CavitySystem::from_cooperativity(c, 0.1, 1.0).unwrap();
            let pulse = PhotonPulse::new(1.0, 0.0).unwrap();
            let cfg = ScatteringConfig::new(cav, pulse, eps, eps, 0.0).unwrap();
            let s = spin_amplitudes(&cfg, omega).unwrap();
            prop_assert!((s[1] - s[2]).norm() < 1e-14);
        }

        #[test]
        fn density_matrix_is_hermitian(
            c in 10.0f64..1e4, gk in 0.01f64..2.0, t in 0.5f64..20.0, dp in -50.0f64..50.0,
            ea in -2.0f64..2.0, eb in -2.0f64..2.0
        ) {
            let cav = CavitySystem::from_cooperativity(c, gk, 1.0).unwrap();
            let pulse = PhotonPulse::from_gate_time(t, dp).unwrap();
            let cfg = ScatteringConfig::new(cav, pulse, ea, eb, 0.0).unwrap();
            let rho = reduced_density_matrix(&cfg, DEFAULT_NODES).unwrap();
            prop_assert!(rho.hermiticity_error() < 1e-12);
            prop_assert!(rho.trace().re <= 1.0 + 1e-12);
        }

        #[test]
        fn even_in_photon_detuning(dp in 0.0f64..100.0, gk in 0.01f64..1.0) {
            let a = fidelity_numeric(&config(4000.0, gk, 2.0, dp, 1e-5)).unwrap().fidelity;
            let b = fidelity_numeric(&config(4000.0, gk, 2.0, -dp, 1e-5)).unwrap().fidelity;
            prop_assert!((a - b).abs() < 1e-12);
            let a = fidelity_analytic(&config(4000.0, gk, 2.0, dp, 1e-5)).fidelity;
            let b = fidelity_analytic(&config(4000.0, gk, 2.0, -dp, 1e-5)).fidelity;
            prop_assert_eq!(a, b);
        }
    }
}
