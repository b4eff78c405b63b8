//! Normalized solutions of the quasilinear Schrödinger equation
//! `-Δu - uΔ(u²) + λu = |u|^{p-2}u` with prescribed mass `∫u² = a`, computed
//! on radial grids.

pub mod cli;
pub mod error;
pub mod fiber;
pub mod functionals;
pub mod grid;
pub mod ode;
pub mod params;
pub mod solvers;

pub use error::{Error, Hypothesis, Result};
pub use fiber::{fiber_energy, fiber_max_energy, fiber_q, scale_field, solve_s_mu, FiberSolveResult};
pub use functionals::{compute_masses, FiberMasses};
pub use grid::{GridConfig, RadialField, RadialGrid};
pub use params::{ModelParams, Regime};
