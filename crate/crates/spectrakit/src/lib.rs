//! Spectral approximation toolkit for covariance operators of centered
//! Gaussian processes.
//!
//! The central object is the integral operator
//! `f ↦ ∫ K(·,t) f(t) w(t) dt` on a weighted L² space. Its leading
//! eigenvalues drive the limit distribution `W = Σ λⱼ Nⱼ²` of weighted-L²
//! goodness-of-fit statistics. This crate approximates those eigenvalues by
//! the Rayleigh-Ritz method over orthonormal polynomial bases
//! ([`ritz`]), cross-checks them with Monte Carlo Nystrom sampling and grid
//! discretization ([`alt`]), and converts spectra into cumulants, tail
//! probabilities, quantiles and Bahadur slopes ([`dist`], [`bahadur`]).

pub mod alt;
pub mod bahadur;
pub mod basis;
pub mod dist;
mod error;
pub mod kernel;
pub mod quad;
pub mod ritz;

pub use basis::{BasisFamily, BasisKind, MultiIndex, Support};
pub use error::Error;
pub use kernel::{KernelId, KernelSpec, SeparableForm};
pub use quad::QuadratureRule;
pub use ritz::{GramMatrix, Spectrum};

pub type Result<T> = std::result::Result<T, Error>;
