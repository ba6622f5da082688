//! Fidelity and gate-time models for cavity-mediated controlled phase-flip
//! gates between two emitters: photon scattering, simple photon exchange and
//! Raman-assisted exchange.

pub mod case_study;
pub mod dense;
pub mod error;
pub mod lindblad;
pub mod params;
pub mod raman;
pub mod scattering;
pub mod simple_exchange;
pub mod sweep;

pub use dense::{mat_exp, propagate, ComplexMatrix, StateVector};
pub use error::{GateError, Result};
pub use params::{cooperativity, effective_gamma, CavitySystem, DecoherenceSpec, GateResult, Method, Scheme};
