//! Simulation laboratory for the one-dimensional periodic Zakharov system
//! in its first-order formulation
//!
//! ```text
//! i u_t + Δu = ½ (n⁺ + n⁻) u,      i n±_t ∓ D n± = ± D |u|²,
//! ```
//!
//! with `D = (−Δ)^{1/2}` on the torus. The crate provides:
//!
//! - [`spectral`]: periodic grid, transforms, multipliers, projections;
//! - [`state`]: Zakharov states and the initial-data families
//!   (Fourier-Lebesgue, Gaussian, plane waves);
//! - [`diagnostics`]: norms, mass, Hamiltonian, the smoothing multiplier
//!   and its modified energy, and the nonlinear-part norm;
//! - [`dynamics`]: exact linear flows and split-step time integration;
//! - [`highlow`]: high-low data splitting, difference-flow decomposition,
//!   the smoothing-exponent scan, and the full high-low iteration driver;
//! - [`estimates`]: integer resonance algebra, the space-time counting
//!   bound, bilinear product probes, and computable restriction norms;
//! - [`stateio`]: binary/CSV state files and the diagnostics time series.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod fit;
pub mod highlow;
pub mod spectral;
pub mod state;
pub mod stateio;

pub use error::{Error, Result};
pub use num_complex::Complex64;
