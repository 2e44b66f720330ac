//! Classical workbench for a variational quantum solver of the discrete
//! Poisson equation.
//!
//! The crate covers the whole pipeline on a laptop:
//!
//! - [`lattice`]: finite-difference systems `A x = b` and classical reference
//!   solutions.
//! - [`opalg`]: tensor-product operator terms over the single-qubit alphabet
//!   `{I, σ+, σ-, |0><0|, |1><1|, X, Y}`.
//! - [`decomp`]: the logarithmic-size decompositions of `A`, `A²`, the
//!   d-dimensional Kronecker sum and general banded Toeplitz matrices.
//! - [`simulator`]: a statevector simulator with Bell-basis and
//!   computational-basis shot estimators.
//! - [`ansatz`]: the alternating-operator circuit `U(θ)`.
//! - [`vqa`]: the cost `E(θ) = <ψ|A²|ψ> - |<b|A|ψ>|²`, its exact and sampled
//!   evaluation, and the BFGS / gradient-descent loop.
//! - [`cli`]: the `decompose`, `solve`, `sweep` and `verify` commands.

// `!(x >= 0.0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod cli;
pub mod decomp;
pub mod error;
pub mod lattice;
pub mod opalg;
pub mod rng;
pub mod simulator;
pub mod vqa;

pub use error::{Error, Result};
