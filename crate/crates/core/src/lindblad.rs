//! Master-equation oracle for the two exchange schemes.
//!
//! The full Lindblad equation, including the recycling terms that the
//! non-Hermitian description drops, is integrated on a ten-state space per
//! scheme. Comparing both descriptions checks the no-jump approximation and
//! splits the final state into its no-jump and jump branches.

use nalgebra::{DMatrix, DVector};
use rayon::join;

use crate::dense::{propagate, ComplexMatrix, StateVector, C64};
use crate::error::{invalid, require_non_negative, require_positive, GateError, Result};
use crate::params::{GateResult, Method};
use crate::raman::{build_raman_hamiltonians, gate_time_raman, RamanConfig};
use crate::simple_exchange::{build_hamiltonians, ExchangeConfig};

/// Largest entry change tolerated when the step count is doubled.
pub const STEP_TOLERANCE: f64 = 1e-8;

/// Floor on the number of integrator steps.
pub const MIN_STEPS: usize = 10_000;

/// Steps per unit of `T * ||H_eff||`.
pub const STEPS_PER_PHASE: f64 = 20.0;

/// Step-count doublings tried before giving up.
pub const MAX_REFINEMENTS: usize = 4;

const INPUT_TOLERANCE: f64 = 1e-10;
const PSD_TOLERANCE: f64 = 1e-8;

/// Collapse operator with its rate; the dissipator is `rate * D(operator)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub operator: ComplexMatrix,
    pub rate: f64,
}

impl JumpOperator {
    pub fn new(operator: ComplexMatrix, rate: f64) -> Result<Self> {
        Ok(Self {
            operator,
            rate: require_non_negative("jump rate", rate)?,
        })
    }

    /// Operator `sum |to><from|` over the given `(from, to)` pairs.
    pub fn transitions(dim: usize, pairs: &[(usize, usize)], rate: f64) -> Result<Self> {
        let mut op = ComplexMatrix::zeros(dim);
        for &(from, to) in pairs {
            if from >= dim || to >= dim {
                return Err(invalid("jump operator", format!("index out of range for dim {dim}")));
            }
            op[(to, from)] = C64::new(1.0, 0.0);
        }
        Self::new(op, rate)
    }
}

/// Hermitian Hamiltonian plus collapse operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSystem {
    hamiltonian: ComplexMatrix,
    jumps: Vec<JumpOperator>,
}

impl OpenSystem {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<JumpOperator>) -> Result<Self> {
        if !hamiltonian.is_finite() {
            return Err(GateError::NonFinite);
        }
        let herm = hamiltonian.hermiticity_error();
        if herm > 1e-12 * hamiltonian.norm_one().max(1.0) {
            return Err(invalid("hamiltonian", format!("not Hermitian (error {herm:e})")));
        }
        for j in &jumps {
            if j.operator.dim() != hamiltonian.dim() {
                return Err(GateError::DimensionMismatch {
                    expected: hamiltonian.dim(),
                    found: j.operator.dim(),
                });
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    /// `H - (i/2) sum_k rate_k L_k^dagger L_k`.
    pub fn effective_hamiltonian(&self) -> ComplexMatrix {
        let mut h = self.hamiltonian.clone();
        for j in &self.jumps {
            let ldl = &j.operator.adjoint() * &j.operator;
            h = &h - &ldl.scale(C64::new(0.0, 0.5 * j.rate));
        }
        h
    }

    /// Superoperator acting on column-stacked density matrices.
    pub fn liouvillian(&self) -> DMatrix<C64> {
        let n = self.dim();
        let id = DMatrix::<C64>::identity(n, n);
        let h = self.hamiltonian.inner();
        let minus_i = C64::new(0.0, -1.0);
        let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * minus_i;
        for j in &self.jumps {
            let a = j.operator.inner();
            let ada = a.adjoint() * a;
            let half = C64::new(0.5, 0.0);
            let term = a.conjugate().kronecker(a) - id.kronecker(&ada) * half - ada.transpose().kronecker(&id) * half;
            l += term * C64::new(j.rate, 0.0);
        }
        l
    }
}

/// `max(MIN_STEPS, 20 T ||H_eff||_inf)`.
pub fn default_steps(sys: &OpenSystem, t: f64) -> usize {
    let scale = STEPS_PER_PHASE * t * sys.effective_hamiltonian().norm_inf();
    (scale.ceil() as usize).max(MIN_STEPS)
}

fn check_density(rho: &ComplexMatrix) -> Result<()> {
    if !rho.is_finite() {
        return Err(GateError::NonFinite);
    }
    let herm = rho.hermiticity_error();
    if herm > INPUT_TOLERANCE {
        return Err(invalid("rho0", format!("not Hermitian (error {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > INPUT_TOLERANCE {
        return Err(invalid("rho0", format!("trace {tr} is not 1")));
    }
    let min = rho.hermitian_eigenvalues()[0];
    if min < -INPUT_TOLERANCE {
        return Err(GateError::NotPositiveSemidefinite(min));
    }
    Ok(())
}

/// `(I + Y)^n - I` for the RK4 step polynomial `I + Y`, by binary powering.
///
/// Keeping the identity out of the product avoids the cancellation that would
/// otherwise swamp the `O(h)` increments after `~10^9` steps.
fn rk4_power_increment(l: &DMatrix<C64>, h: f64, n: usize) -> DMatrix<C64> {
    let x = l * C64::new(h, 0.0);
    let x2 = &x * &x;
    let x3 = &x2 * &x;
    let x4 = &x3 * &x;
    let mut base = &x + &x2 * C64::new(0.5, 0.0) + &x3 * C64::new(1.0 / 6.0, 0.0) + &x4 * C64::new(1.0 / 24.0, 0.0);
    let dim = l.nrows();
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    let mut remaining = n;
    while remaining > 0 {
        if remaining & 1 == 1 {
            let prod = &acc * &base;
            acc += &base + prod;
        }
        remaining >>= 1;
        if remaining > 0 {
            let sq = &base * &base;
            base = &base * C64::new(2.0, 0.0) + sq;
        }
    }
    acc
}

fn vectorize(rho: &ComplexMatrix) -> DVector<C64> {
    DVector::from_column_slice(rho.inner().as_slice())
}

fn devectorize(v: &DVector<C64>, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_inner(DMatrix::from_column_slice(dim, dim, v.as_slice()))
}

fn rk4_solution(l: &DMatrix<C64>, rho0: &DVector<C64>, t: f64, steps: usize, dim: usize) -> ComplexMatrix {
    let inc = rk4_power_increment(l, t / steps as f64, steps);
    devectorize(&(rho0 + inc * rho0), dim)
}

/// Fixed-step RK4 solution of the master equation at time `t`.
///
/// The same integration with twice the steps is run alongside; if any entry
/// differs by more than [`STEP_TOLERANCE`] the result is rejected.
pub fn lindblad_propagate(sys: &OpenSystem, rho0: &ComplexMatrix, t: f64, steps: usize) -> Result<ComplexMatrix> {
    if rho0.dim() != sys.dim() {
        return Err(GateError::DimensionMismatch {
            expected: sys.dim(),
            found: rho0.dim(),
        });
    }
    require_non_negative("time", t)?;
    if steps == 0 {
        return Err(invalid("steps", "must be at least 1"));
    }
    check_density(rho0)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let l = sys.liouvillian();
    let v0 = vectorize(rho0);
    let dim = sys.dim();
    let (coarse, fine) = join(
        || rk4_solution(&l, &v0, t, steps, dim),
        || rk4_solution(&l, &v0, t, 2 * steps, dim),
    );
    if !coarse.is_finite() || !fine.is_finite() {
        return Err(GateError::NonFinite);
    }
    let change = coarse.max_abs_diff(&fine);
    if change > STEP_TOLERANCE {
        return Err(GateError::StepNotConverged(change));
    }
    Ok(fine)
}

/// [`lindblad_propagate`] starting from [`default_steps`], doubling the step
/// count up to [`MAX_REFINEMENTS`] times until the halving check passes.
pub fn lindblad_propagate_converged(sys: &OpenSystem, rho0: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let mut steps = default_steps(sys, t);
    let mut last = GateError::StepNotConverged(f64::INFINITY);
    for _ in 0..=MAX_REFINEMENTS {
        match lindblad_propagate(sys, rho0, t, steps) {
            Err(GateError::StepNotConverged(change)) => last = GateError::StepNotConverged(change),
            other => return other,
        }
        steps *= 2;
    }
    Err(last)
}

/// Target `e^{i theta} u + v`, with `theta` chosen to match the phase the
/// evolved state actually acquired, so a global frame phase on `u` is free.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTarget {
    pub rotating: StateVector,
    pub fixed: StateVector,
}

impl PhaseTarget {
    pub fn aligned_with(&self, phi: &StateVector) -> StateVector {
        let a = self.rotating.inner(phi);
        let b = self.fixed.inner(phi);
        let theta = if a.norm() > 0.0 && b.norm() > 0.0 {
            a.arg() - b.arg()
        } else {
            0.0
        };
        self.rotating.scale(C64::from_polar(1.0, theta)).add(&self.fixed)
    }
}

/// Split of the Lindblad state into no-jump and jump parts.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBranches {
    /// No-jump probability `<phi|phi>`.
    pub p: f64,
    /// Unnormalized no-jump state.
    pub phi: StateVector,
    pub rho: ComplexMatrix,
    /// `(rho - |phi><phi|)/(1 - p)`.
    pub rho_fail: ComplexMatrix,
    pub target: StateVector,
    /// Fidelity conditioned on no jump.
    pub fidelity_success: f64,
    /// Fidelity conditioned on at least one jump.
    pub fidelity_failure: f64,
    /// `sqrt(<psi|rho|psi>)`.
    pub fidelity_lindblad: f64,
    /// `|<psi|phi>|`, the non-Hermitian estimate.
    pub fidelity_non_hermitian: f64,
}

pub fn trajectory_decomposition(
    sys: &OpenSystem,
    psi0: &StateVector,
    t: f64,
    target: &PhaseTarget,
) -> Result<TrajectoryBranches> {
    require_positive("time", t)?;
    let phi = propagate(&sys.effective_hamiltonian(), psi0, t)?;
    let p = phi.norm_sqr();
    if 1.0 - p < 1e-12 {
        return Err(GateError::DegenerateBranch(1.0 - p));
    }
    let rho0 = psi0.outer(psi0);
    let rho = lindblad_propagate_converged(sys, &rho0, t)?;
    let jumped = &rho - &phi.outer(&phi);
    let rho_fail = jumped.scale(C64::new(1.0 / (1.0 - p), 0.0));
    let min = rho_fail.hermitian_eigenvalues()[0];
    if min < -PSD_TOLERANCE {
        return Err(GateError::NotPositiveSemidefinite(min));
    }
    let psi = target.aligned_with(&phi);
    let overlap = psi.inner(&phi).norm();
    let expect = |m: &ComplexMatrix| psi.expectation(m).re.max(0.0);
    Ok(TrajectoryBranches {
        p,
        fidelity_success: overlap / p.sqrt(),
        fidelity_failure: expect(&rho_fail).sqrt(),
        fidelity_lindblad: expect(&rho).sqrt(),
        fidelity_non_hermitian: overlap,
        phi,
        rho,
        rho_fail,
        target: psi,
    })
}

/// An open-system gate model: dynamics, initial state, target and duration.
#[derive(Debug, Clone, PartialEq)]
pub struct GateModel {
    pub system: OpenSystem,
    pub initial: StateVector,
    pub target: PhaseTarget,
    pub gate_time: f64,
    pub gamma_eff: f64,
}

impl GateModel {
    pub fn branches(&self) -> Result<TrajectoryBranches> {
        trajectory_decomposition(&self.system, &self.initial, self.gate_time, &self.target)
    }

    /// Master-equation fidelity minus `Gamma T`; the probability reported is
    /// that of no jump.
    pub fn fidelity_lindblad(&self) -> Result<GateResult> {
        let b = self.branches()?;
        let f = b.fidelity_lindblad - self.gamma_eff * self.gate_time;
        Ok(GateResult::new(f, self.gate_time, b.p, Method::Lindblad))
    }
}

fn embed(target: &mut ComplexMatrix, block: &ComplexMatrix, offset: usize) {
    for i in 0..block.dim() {
        for j in 0..block.dim() {
            target[(offset + i, offset + j)] = block[(i, j)];
        }
    }
}

fn half(dim: usize, terms: &[(usize, f64)]) -> StateVector {
    let weighted: Vec<(usize, C64)> = terms.iter().map(|&(i, s)| (i, C64::new(0.5 * s, 0.0))).collect();
    StateVector::superposition(dim, &weighted)
}

/// Simple-exchange model on
/// `{e2u0, uu1, ue2_0, e2d0, ud1, ue1_0, du0, dd0, uu0, ud0}`.
///
/// Emitter and cavity decay recycle into `|uu0>` and `|ud0>`, which are
/// orthogonal to the target, so a jump always ruins the gate.
pub fn exchange_model(config: &ExchangeConfig) -> Result<GateModel> {
    const DIM: usize = 10;
    let blocks = build_hamiltonians(config)?;
    let mut h = ComplexMatrix::zeros(DIM);
    embed(&mut h, &blocks.up_up, 0);
    embed(&mut h, &blocks.up_down, 3);
    let (gamma, kappa) = (config.cavity.gamma(), config.cavity.kappa());
    let jumps = vec![
        JumpOperator::transitions(DIM, &[(0, 8), (3, 9)], gamma)?,
        JumpOperator::transitions(DIM, &[(2, 8)], gamma)?,
        JumpOperator::transitions(DIM, &[(5, 9)], gamma)?,
        JumpOperator::transitions(DIM, &[(1, 8), (4, 9)], kappa)?,
    ];
    Ok(GateModel {
        system: OpenSystem::new(h, jumps)?,
        initial: half(DIM, &[(0, 1.0), (3, 1.0), (6, 1.0), (7, 1.0)]),
        target: PhaseTarget {
            rotating: half(DIM, &[(0, 1.0), (3, -1.0)]),
            fixed: half(DIM, &[(6, 1.0), (7, 1.0)]),
        },
        gate_time: config.gate_time()?,
        gamma_eff: config.gamma_eff,
    })
}

/// Raman model on `{ud0, ed0, dd1, de0, du0, us0, es0, ds1, ds0, dd0}`.
///
/// Spontaneous emission returns the emitter to `|u>`, which keeps it inside
/// the driven manifold; cavity decay lands in `|ds0>` or `|dd0>`.
pub fn raman_model(config: &RamanConfig) -> Result<GateModel> {
    const DIM: usize = 10;
    let blocks = build_raman_hamiltonians(config)?;
    let mut h = ComplexMatrix::zeros(DIM);
    embed(&mut h, &blocks.up_down, 0);
    embed(&mut h, &blocks.up_up, 5);
    let (gamma, kappa) = (config.cavity.gamma(), config.cavity.kappa());
    let jumps = vec![
        JumpOperator::transitions(DIM, &[(1, 0), (6, 5)], gamma)?,
        JumpOperator::transitions(DIM, &[(3, 4)], gamma)?,
        JumpOperator::transitions(DIM, &[(2, 9), (7, 8)], kappa)?,
    ];
    Ok(GateModel {
        system: OpenSystem::new(h, jumps)?,
        initial: half(DIM, &[(5, 1.0), (0, 1.0), (8, 1.0), (9, 1.0)]),
        target: PhaseTarget {
            rotating: half(DIM, &[(5, 1.0), (0, -1.0)]),
            fixed: half(DIM, &[(8, 1.0), (9, 1.0)]),
        },
        gate_time: gate_time_raman(config)?,
        gamma_eff: config.gamma_eff,
    })
}

/// Upper bound `sqrt(F^2 + (1 - F^2)/4) - F` on how far a failure fidelity of
/// one half can lift the non-Hermitian estimate `F`.
pub fn non_hermitian_error_bound(f: f64) -> f64 {
    (f * f + (1.0 - f * f) / 4.0).sqrt() - f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::CavitySystem;
    use crate::raman::{fidelity_numeric_at_gate_time as raman_numeric, RamanConfig};
    use crate::simple_exchange::{fidelity_numeric_at_gate_time as exchange_numeric, Splitting};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unitary_evolution_keeps_purity() {
        let h = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.5, 0.3], &[0.0, 0.3, -1.0]]).unwrap();
        let sys = OpenSystem::new(h, vec![]).unwrap();
        let psi = StateVector::basis(3, 0);
        let rho = lindblad_propagate(&sys, &psi.outer(&psi), 7.0, 20_000).unwrap();
        let purity = (&rho * &rho).trace().re;
        assert!((purity - 1.0).abs() < 1e-9);
        // Agrees with the pure-state propagation.
        let phi = propagate(&sys.effective_hamiltonian(), &psi, 7.0).unwrap();
        assert!(rho.max_abs_diff(&phi.outer(&phi)) < 1e-9);
    }

    #[test]
    fn single_level_decay() {
        let gamma = 0.7;
        let jump = JumpOperator::transitions(2, &[(1, 0)], gamma).unwrap();
        let sys = OpenSystem::new(ComplexMatrix::zeros(2), vec![jump]).unwrap();
        let psi = StateVector::basis(2, 1);
        let t = 3.0;
        let rho = lindblad_propagate(&sys, &psi.outer(&psi), t, default_steps(&sys, t)).unwrap();
        assert!((rho[(1, 1)].re - (-gamma * t).exp()).abs() < 1e-10);
        assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = OpenSystem::new(ComplexMatrix::zeros(2), vec![]).unwrap();
        let mut rho = ComplexMatrix::zeros(2);
        rho[(0, 0)] = c(1.5, 0.0);
        rho[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(
            lindblad_propagate(&sys, &rho, 1.0, 10),
            Err(GateError::NotPositiveSemidefinite(_))
        ));
        let mut nh = ComplexMatrix::zeros(2);
        nh[(0, 1)] = c(1.0, 0.0);
        assert!(OpenSystem::new(nh, vec![]).is_err());
        assert!(JumpOperator::transitions(2, &[(0, 1)], -1.0).is_err());
    }

    #[test]
    fn too_few_steps_detected() {
        let h = ComplexMatrix::from_real_rows(&[&[0.0, 3.0], &[3.0, 0.0]]).unwrap();
        let sys = OpenSystem::new(h, vec![]).unwrap();
        let psi = StateVector::basis(2, 0);
        let err = lindblad_propagate(&sys, &psi.outer(&psi), 10.0, 100).unwrap_err();
        assert!(matches!(err, GateError::StepNotConverged(_)));
    }

    #[test]
    fn no_decay_means_degenerate_failure_branch() {
        let h = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let sys = OpenSystem::new(h, vec![JumpOperator::transitions(2, &[(1, 0)], 0.0).unwrap()]).unwrap();
        let target = PhaseTarget {
            rotating: StateVector::basis(2, 0),
            fixed: StateVector::from_amplitudes(vec![c(0.0, 0.0); 2]),
        };
        let err = trajectory_decomposition(&sys, &StateVector::basis(2, 0), 1.0, &target).unwrap_err();
        assert!(matches!(err, GateError::DegenerateBranch(_)));
    }

    fn exchange_config(c: f64) -> ExchangeConfig {
        let cav = CavitySystem::from_cooperativity(c, 0.1, 1.0).unwrap();
        ExchangeConfig::at_optimal_detuning(cav, 0.0).unwrap()
    }

    #[test]
    fn exchange_recycling_accounts_for_lost_norm() {
        let model = exchange_model(&exchange_config(800.0)).unwrap();
        let b = model.branches().unwrap();
        assert!((b.rho.trace() - c(1.0, 0.0)).norm() < 1e-8);
        let recycled = b.rho[(8, 8)].re + b.rho[(9, 9)].re;
        assert!((recycled - (1.0 - b.p)).abs() < 1e-8);
        // A jump leaves the wrong ground state behind: no overlap with the target.
        assert!(b.fidelity_failure < 1e-6);
        // With zero failure fidelity the two descriptions coincide.
        assert!((b.fidelity_lindblad - b.fidelity_non_hermitian).abs() < 1e-7);
    }

    #[test]
    fn exchange_non_hermitian_matches_block_propagation() {
        let cfg = exchange_config(2000.0);
        let b = exchange_model(&cfg).unwrap().branches().unwrap();
        let direct = exchange_numeric(&cfg).unwrap().fidelity;
        assert!((b.fidelity_non_hermitian - direct).abs() < 1e-10);
    }

    #[test]
    fn exchange_with_finite_splitting() {
        let cav = CavitySystem::from_cooperativity(800.0, 0.1, 1.0).unwrap();
        let cfg = ExchangeConfig::new(
            cav,
            0.5 * cav.kappa() * 800f64.sqrt(),
            Splitting::Finite(40.0 * cav.kappa()),
            0.0,
            0.0,
        )
        .unwrap();
        let b = exchange_model(&cfg).unwrap().branches().unwrap();
        let direct = exchange_numeric(&cfg).unwrap().fidelity;
        assert!((b.fidelity_non_hermitian - direct).abs() < 1e-10);
    }

    fn raman_config(c: f64) -> RamanConfig {
        let cav = CavitySystem::from_cooperativity(c, 0.1, 1.0).unwrap();
        RamanConfig::on_ridge(cav, cav.kappa(), 1.0 / 20.0, 0.0).unwrap()
    }

    #[test]
    fn raman_branches() {
        let cfg = raman_config(800.0);
        let model = raman_model(&cfg).unwrap();
        // Shelved and doubly-down branches never evolve.
        for s in [8, 9] {
            for k in 0..10 {
                assert_eq!(model.system.hamiltonian()[(s, k)], c(0.0, 0.0));
            }
        }
        let b = model.branches().unwrap();
        assert!((b.rho.trace() - c(1.0, 0.0)).norm() < 1e-8);
        assert!(b.rho.hermiticity_error() < 1e-10);
        assert!((b.fidelity_non_hermitian - raman_numeric(&cfg).unwrap().fidelity).abs() < 1e-10);
        // Failure leaves roughly an even mixture over B's two states.
        assert!((b.fidelity_failure - 0.5).abs() < 0.1, "{}", b.fidelity_failure);
        // Two-branch formula reproduces the direct value.
        let combined = (b.p * b.fidelity_success.powi(2) + (1.0 - b.p) * b.fidelity_failure.powi(2)).sqrt();
        assert!((combined - b.fidelity_lindblad).abs() < 1e-6);
        let gap = b.fidelity_lindblad - b.fidelity_non_hermitian;
        assert!(gap > 0.0 && gap <= PI_OVER_4 / 800f64.sqrt() + 0.005);
    }

    const PI_OVER_4: f64 = std::f64::consts::FRAC_PI_4;

    #[test]
    fn error_bound_formula() {
        assert!((non_hermitian_error_bound(0.9) - 0.0260).abs() < 1e-4);
        assert!(0.9 + non_hermitian_error_bound(0.9) <= 0.93);
        assert!(0.99 + non_hermitian_error_bound(0.99) <= 0.993);
        assert_eq!(non_hermitian_error_bound(1.0), 0.0);
    }

    fn random_system(seed: u64, n: usize) -> (OpenSystem, ComplexMatrix) {
        let mut state = seed.wrapping_add(0x9E3779B97F4A7C15);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut h = ComplexMatrix::zeros(n);
        for i in 0..n {
            h[(i, i)] = c(2.0 * next() - 1.0, 0.0);
            for j in 0..i {
                let z = c(next() - 0.5, next() - 0.5);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let mut jumps = Vec::new();
        for k in 0..2 {
            let mut op = ComplexMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    op[(i, j)] = c(next() - 0.5, next() - 0.5);
                }
            }
            jumps.push(JumpOperator::new(op, 0.3 * next() + 0.1 * k as f64).unwrap());
        }
        let amps: Vec<C64> = (0..n).map(|_| c(next() - 0.5, next() - 0.5)).collect();
        let psi = StateVector::from_amplitudes(amps);
        let psi = psi.scale(c(1.0 / psi.norm_sqr().sqrt(), 0.0));
        (OpenSystem::new(h, jumps).unwrap(), psi.outer(&psi))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn trace_and_hermiticity_preserved(seed in 0u64..1_000_000, n in 2usize..=6, t in 0.1f64..5.0) {
            let (sys, rho0) = random_system(seed, n);
            let rho = lindblad_propagate(&sys, &rho0, t, default_steps(&sys, t)).unwrap();
            prop_assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-8);
            prop_assert!(rho.hermiticity_error() < 1e-10);
            prop_assert!(rho.hermitian_eigenvalues()[0] > -1e-8);
        }
    }
}
