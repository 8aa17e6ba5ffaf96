//! Spectral laboratory for a gauged 2D nonlinear Schrödinger system under
//! anisotropic harmonic confinement and its effective 1D quintic limit.
//!
//! The 2D model lives in a rescaled, gauged frame where the evolution reads
//! `i ∂_t φ = (1/ε) H_y φ + H_x φ + f[φ]`, with `H_x = -∂_x² + x²`,
//! `H_y = -∂_y² + y²`, and `f[φ]` a nonlocal gauge nonlinearity built from a
//! sgn-kernel convolution in the tight direction. As ε → 0 the transverse
//! direction freezes into the oscillator ground mode and the long direction is
//! governed by the defocusing quintic NLS
//! `i ∂_t φ = -∂_x² φ + x² φ + π²β²|φ|⁴φ`.
//!
//! Modules:
//! - [`spectral`]: grids, Hermite eigenbasis, transforms, differentiation,
//!   quadrature — the discretization substrate.
//! - [`gauge`]: the sgn-kernel convolution, current, full nonlinearity `f[φ]`,
//!   and the phase kernel used to reconstruct the ungauged field.
//! - [`energy`]: 1D and gauged 2D energy functionals and their gradients.
//! - [`ground_state`]: normalized gradient flow (imaginary time) minimizers.
//! - [`dynamics`]: split-step time integrators with conservation diagnostics.
//! - [`reduction`]: transverse-mode projection, reduced 1D amplitudes,
//!   ε-sweeps and rate fits quantifying the dimensional reduction.

pub mod dynamics;
pub mod energy;
pub mod gauge;
pub mod ground_state;
pub mod hermite;
pub mod reduction;
pub mod spectral;

use thiserror::Error;

/// Errors shared by the solver modules.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Invalid parameter or workspace configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input violates a mathematical precondition (e.g. negative density).
    #[error("domain error: {0}")]
    Domain(String),
    /// Field dimensions do not match the workspace.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
    /// Two trajectories do not share identical snapshot times.
    #[error("time grid mismatch: {0}")]
    TimeGrid(String),
    /// The mass-drift guard tripped during time evolution.
    #[error("instability detected at t = {time}: |mass - 1| = {mass_drift:.3e}")]
    Instability { time: f64, mass_drift: f64 },
    /// A flow did not reach its tolerances within `max_iters`.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;

pub use dynamics::{continuity_residual_1d, continuity_residual_2d, evolve_1d, evolve_2d};
pub use dynamics::{Trajectory1D, Trajectory2D};
pub use energy::{e_eps, energy_1d, energy_2d_gauged, gradient_1d, gradient_2d, EnergyBreakdown};
pub use gauge::{current_x, f_profile, nonlinearity, s_phase, t_convolve};
pub use gauge::{CurrentX, FProfile, GaugePotentialX};
pub use ground_state::{minimize_1d, minimize_2d, FlowConfig, GroundStateResult, SeedProfile};
pub use reduction::{
    dynamics_residual, extract_phi_eps, fit_rate, project_ground, projection_residual,
    reconstruct_psi, run_dynamics_sweep, run_gse_sweep, RateFit, SweepReport,
};
pub use spectral::{GridX, HermiteBasisY, SpectralWorkspace, WaveFunction1D, WaveFunction2D};
