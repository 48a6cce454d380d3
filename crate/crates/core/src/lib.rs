//! Spin-chain Hamiltonians from orthogonal polynomial data.
//!
//! A finite Jacobi matrix is both the recurrence matrix of a finite
//! orthogonal polynomial sequence and the Hamiltonian of a weighted path.
//! This crate builds such matrices (explicitly, from the Krawtchouk family,
//! or from spectral data), decomposes them, evolves continuous-time quantum
//! walks on them, and decides whether they support perfect state transfer.
//!
//! Modules:
//!
//! - [`orthopoly`]: recurrence evaluation, the Krawtchouk family, zeros.
//! - [`spectral`]: Jacobi matrices, eigendecomposition, the inverse problem.
//! - [`walk`]: transition amplitudes and the finite birth–death analogue.
//! - [`pst`]: certification and refutation of perfect state transfer,
//!   interior pairs and early state exclusion.
//! - [`surgery`]: Christoffel removal of spectral points.
//! - [`xkrawtchouk`]: the X₂-Krawtchouk band Hamiltonian and its walk.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod orthopoly;
pub mod pst;
pub mod spectral;
pub mod surgery;
pub mod walk;
pub mod xkrawtchouk;

mod tridiag;

pub use error::{Error, Result};
pub use orthopoly::{KrawtchoukParams, Normalization, PolynomialTable, RecurrenceCoefficients};
pub use pst::{GapWitness, PstConfig, PstReport};
pub use spectral::{JacobiMatrix, SpectralDecomposition};
pub use surgery::SurgerySpec;
pub use walk::{AmplitudeSeries, BirthDeathRates, Propagator, QuantumState};
pub use xkrawtchouk::{BandHamiltonian, XEigenvectorTable, XKrawtchoukFamily};
