//! Small dense complex matrices and state vectors.
//!
//! The subspace Hamiltonians are at most a few tens of states, so everything
//! here is plain dense algebra on top of `nalgebra`. The matrix exponential
//! has two independent routes: diagonalization (preferred) and
//! scaling-and-squaring of a truncated Taylor series (fallback).

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{GateError, Result};

pub type C64 = Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Above this eigenvector condition number the series route is used.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e8;

const SERIES_MAX_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.0[(i, i)] = *d;
        }
        m
    }

    /// Row-major construction; fails unless `entries.len()` is a non-zero square.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(GateError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    /// Real row-major matrix.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(GateError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::from_row_slice(dim, &entries)
    }

    pub(crate) fn from_inner(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.is_square());
        Self(inner)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        norm_one(&self.0)
    }

    /// Induced infinity-norm (max row sum).
    pub fn norm_inf(&self) -> f64 {
        self.0
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.hermitian_part().0);
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(GateError::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        Ok(StateVector(&self.0 * &psi.0))
    }

    /// `e^M`, see [`mat_exp`].
    pub fn exp(&self) -> Result<Self> {
        mat_exp(self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Pure-state amplitudes, possibly unnormalized (a no-jump trajectory).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Self {
        assert!(!amplitudes.is_empty(), "state dimension must be at least 1");
        Self(DVector::from_vec(amplitudes))
    }

    /// `|index>` in a `dim`-state basis.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self(v)
    }

    /// Sum of `weight * |index>` terms.
    pub fn superposition(dim: usize, terms: &[(usize, C64)]) -> Self {
        let mut v = DVector::zeros(dim);
        for &(i, w) in terms {
            v[i] += w;
        }
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.0[index]
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = &C64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_squared()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.0.dotc(&other.0)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    /// `|self><other|`.
    pub fn outer(&self, other: &Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * other.0.adjoint())
    }

    /// `<self|M|self>`.
    pub fn expectation(&self, m: &ComplexMatrix) -> C64 {
        self.0.dotc(&(&m.0 * &self.0))
    }
}

fn norm_one(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential `e^M`.
///
/// Diagonalizes `M` when its eigenvector matrix has condition number below
/// [`EIGEN_CONDITION_LIMIT`], otherwise falls back to [`mat_exp_series`].
pub fn mat_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(GateError::NonFinite);
    }
    match mat_exp_eigen(m)? {
        Some(e) => Ok(e),
        None => mat_exp_series(m),
    }
}

/// Eigendecomposition route. `Ok(None)` when the Schur iteration fails or the
/// eigenvectors are too ill-conditioned.
pub fn mat_exp_eigen(m: &ComplexMatrix) -> Result<Option<ComplexMatrix>> {
    if !m.is_finite() {
        return Err(GateError::NonFinite);
    }
    let n = m.dim();
    let Some(schur) = Schur::try_new(m.0.clone(), f64::EPSILON, 10_000) else {
        return Ok(None);
    };
    let (q, t) = schur.unpack();

    // Eigenvectors of the triangular factor by back-substitution.
    let scale = norm_one(&t).max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * scale).max(f64::MIN_POSITIVE);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            y[(i, k)] = -acc / denom;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= C64::new(norm, 0.0);
        }
    }
    let Some(v_inv) = v.clone().try_inverse() else {
        return Ok(None);
    };
    let cond = norm_one(&v) * norm_one(&v_inv);
    if !cond.is_finite() || cond >= EIGEN_CONDITION_LIMIT {
        return Ok(None);
    }
    let mut scaled = v;
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= t[(k, k)].exp();
    }
    let e = ComplexMatrix(scaled * v_inv);
    if e.is_finite() {
        Ok(Some(e))
    } else {
        Ok(None)
    }
}

/// Scaling-and-squaring route with a Taylor series truncated once the next
/// term drops below machine precision relative to the partial sum.
pub fn mat_exp_series(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(GateError::NonFinite);
    }
    let n = m.dim();
    let norm = m.norm_one();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = &m.0 * C64::new(0.5f64.powi(squarings), 0.0);
    let mut sum = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut converged = false;
    for k in 1..=SERIES_MAX_TERMS {
        term = (&term * &a) / C64::new(k as f64, 0.0);
        sum += &term;
        if norm_one(&term) <= 1e-17 * norm_one(&sum) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(GateError::ConvergenceFailure);
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    let e = ComplexMatrix(sum);
    if e.is_finite() {
        Ok(e)
    } else {
        Err(GateError::ConvergenceFailure)
    }
}

/// `e^{-i T H_eff} psi0`.
pub fn propagate(h_eff: &ComplexMatrix, psi0: &StateVector, time: f64) -> Result<StateVector> {
    if h_eff.dim() != psi0.dim() {
        return Err(GateError::DimensionMismatch {
            expected: h_eff.dim(),
            found: psi0.dim(),
        });
    }
    let generator = h_eff.scale(-I * time);
    mat_exp(&generator)?.apply(psi0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Plain 30-term Taylor sum, used as an oracle for small-norm inputs.
    fn taylor_oracle(m: &ComplexMatrix, terms: usize) -> ComplexMatrix {
        let n = m.dim();
        let mut sum = ComplexMatrix::identity(n);
        let mut term = ComplexMatrix::identity(n);
        for k in 1..=terms {
            term = (&term * m).scale(c(1.0 / k as f64, 0.0));
            sum = &sum + &term;
        }
        sum
    }

    fn random_matrix(seed: u64, n: usize, scale: f64) -> ComplexMatrix {
        // Small LCG keeps the fixtures dependency-free and reproducible.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let entries: Vec<C64> = (0..n * n).map(|_| c(next() * scale, next() * scale)).collect();
        ComplexMatrix::from_row_slice(n, &entries).unwrap()
    }

    #[test]
    fn zero_matrix_gives_identity() {
        for n in [1, 3, 7] {
            let e = mat_exp(&ComplexMatrix::zeros(n)).unwrap();
            assert!(e.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn diagonal_phases() {
        let (a, b) = (0.7, -2.3);
        let m = ComplexMatrix::from_diagonal(&[c(0.0, -a), c(0.0, -b)]);
        let e = mat_exp(&m).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[c(0.0, -a).exp(), c(0.0, -b).exp()]);
        assert!(e.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn matches_taylor_oracle_for_small_norm() {
        for seed in 0..5 {
            let mut m = random_matrix(seed, 5, 1.0);
            let norm = m.norm_one();
            m = m.scale(c(0.9 / norm, 0.0));
            let oracle = taylor_oracle(&m, 30);
            assert!(mat_exp(&m).unwrap().max_abs_diff(&oracle) < 1e-10);
            assert!(mat_exp_series(&m).unwrap().max_abs_diff(&oracle) < 1e-10);
        }
    }

    #[test]
    fn routes_agree_on_random_inputs() {
        for seed in 0..20 {
            for n in [3, 5] {
                let m = random_matrix(100 + seed, n, 1.5);
                let eig = mat_exp_eigen(&m).unwrap().expect("well-conditioned");
                let series = mat_exp_series(&m).unwrap();
                assert!(eig.max_abs_diff(&series) < 1e-9, "seed {seed}, n {n}");
            }
        }
    }

    #[test]
    fn defective_matrix_uses_series() {
        // Jordan block: eigenvectors are degenerate.
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let e = mat_exp(&m).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])
            .unwrap()
            .scale(c(std::f64::consts::E, 0.0));
        assert!(e.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert_eq!(mat_exp(&m), Err(GateError::NonFinite));
    }

    #[test]
    fn pure_decay_amplitude() {
        let kappa = 0.8;
        let t = 2.5;
        let h = ComplexMatrix::from_diagonal(&[c(0.0, -kappa / 2.0)]);
        let psi = propagate(&h, &StateVector::basis(1, 0), t).unwrap();
        assert!((psi.amplitude(0) - c((-kappa * t / 2.0).exp(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let h = ComplexMatrix::zeros(3);
        let err = propagate(&h, &StateVector::basis(2, 0), 1.0).unwrap_err();
        assert_eq!(err, GateError::DimensionMismatch { expected: 3, found: 2 });
    }

    fn hermitian(seed: u64, n: usize) -> ComplexMatrix {
        random_matrix(seed, n, 2.0).hermitian_part()
    }

    fn with_decay(h: &ComplexMatrix, rates: &[f64]) -> ComplexMatrix {
        let mut out = h.clone();
        for (i, r) in rates.iter().enumerate() {
            out[(i, i)] -= c(0.0, r / 2.0);
        }
        out
    }

    proptest! {
        #[test]
        fn hermitian_generator_is_unitary(seed in 0u64..10_000, n in 1usize..7, t in 0.0f64..20.0) {
            let h = hermitian(seed, n);
            let u = mat_exp(&h.scale(-I * t)).unwrap();
            let prod = &u.adjoint() * &u;
            prop_assert!(prod.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
        }

        #[test]
        fn semigroup(seed in 0u64..10_000, n in 1usize..6, t1 in 0.0f64..5.0, t2 in 0.0f64..5.0) {
            let rates: Vec<f64> = (0..n).map(|i| ((seed as usize + i) % 4) as f64 * 0.3).collect();
            let h = with_decay(&hermitian(seed, n), &rates);
            let psi = StateVector::basis(n, 0);
            let direct = propagate(&h, &psi, t1 + t2).unwrap();
            let stepped = propagate(&h, &propagate(&h, &psi, t1).unwrap(), t2).unwrap();
            let diff = direct.add(&stepped.scale(c(-1.0, 0.0))).norm_sqr().sqrt();
            prop_assert!(diff < 1e-9);
        }

        #[test]
        fn norm_never_grows(seed in 0u64..10_000, n in 1usize..6) {
            let rates: Vec<f64> = (0..n).map(|i| ((seed as usize * 7 + i) % 5) as f64 * 0.2).collect();
            let h = with_decay(&hermitian(seed, n), &rates);
            let psi = StateVector::basis(n, n - 1);
            let mut last = psi.norm_sqr();
            for k in 1..=20 {
                let norm = propagate(&h, &psi, 0.25 * k as f64).unwrap().norm_sqr();
                prop_assert!(norm <= last + 1e-9);
                prop_assert!(norm <= 1.0 + 1e-9);
                last = norm;
            }
        }
    }
}
