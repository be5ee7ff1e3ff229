//! Numerical laboratory for the damped wave equation
//! `∂ₜ²φ − Δφ + ∂ₜφ = 0` and its energy-critical nonlinear version.
//!
//! The crate is organised bottom-up:
//! [`rational`] and [`exponents`] do exact exponent arithmetic, [`spectral`]
//! provides periodic grids and FFTs, [`propagator`] the exact solution
//! operators, [`lp_besov`] and [`paraproduct`] the harmonic-analysis toolkit,
//! [`radial_oracle`] a physical-space quadrature for `d = 3`, [`harness`] the
//! estimate probes and [`nldw`] the Picard solver.

pub mod error;
pub mod exponents;
pub mod fit;
pub mod harness;
pub mod lp_besov;
pub mod nldw;
pub mod paraproduct;
pub mod propagator;
pub mod radial_oracle;
pub mod rational;
pub mod spectral;

pub use error::{Error, Result};
pub use rational::{rat, Rational};
