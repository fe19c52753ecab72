//! Super-wideband MIMO channel simulation.
//!
//! The crate combines a multiport circuit description of tightly coupled
//! antenna arrays (self and mutual impedances, receiver and transmitter
//! coupling matrices, physically consistent receiver noise) with a
//! frequency-dependent, spatially and frequency-correlated Rician fading
//! model. After noise whitening the whole chain collapses into an
//! equivalent standard MIMO channel whose LoS steering vectors and
//! scattered-part correlation matrices carry every coupling effect.
//!
//! Module map:
//!
//! - [`geometry`]: sub-channel frequency grid and colinear uniform linear arrays.
//! - [`circuit`]: Chu self impedance, pluggable mutual impedance, coupling matrices.
//! - [`numerics`]: Hermitian matrix functions, Cholesky, checked inversion.
//! - [`noise`]: receiver noise covariance and its whitener.
//! - [`fading`]: spatial correlation, blockwise frequency recursion, K-factor model.
//! - [`channel`]: Rician assembly, equivalent channel, circuit-path oracle.
//! - [`analysis`]: eigen-SNRs, scattered power, CDFs, steering and correlation profiles.
//! - [`config`], [`sim`], [`experiments`]: scenario configuration and orchestration.

pub mod analysis;
pub mod channel;
pub mod circuit;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fading;
pub mod geometry;
pub mod noise;
pub mod numerics;
pub mod output;
pub mod quadrature;
pub mod seeding;
pub mod sim;

pub use error::{Error, Result};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
