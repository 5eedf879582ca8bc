//! Analog Lagrange coded computing (ALCC) hardened against adversarial
//! workers with DFT-code error correction.
//!
//! The pipeline: [`alcc::encode_shares`] spreads a dataset over `N` workers,
//! each worker applies a polynomial map, adversaries corrupt some results
//! ([`adversary`]), the master treats each output entry across workers as a
//! noisy DFT codeword and corrects it ([`dft`], [`joint`]), then interpolates
//! and evaluates to recover `f(X_r)`. [`sim`] runs seeded Monte Carlo sweeps
//! over that pipeline and [`theory`] holds the analytical error bounds.

pub mod adversary;
pub mod alcc;
pub mod dft;
pub mod error;
pub mod function;
pub mod joint;
pub mod matrix;
pub mod params;
pub mod rng;
pub mod sim;
pub mod theory;

pub use error::{AlccError, Result};
pub use matrix::ComplexMatrix;
pub use params::{AlccParams, DftCodeSpec};
