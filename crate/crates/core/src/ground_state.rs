//! Normalized gradient flow (imaginary time) minimizers for the 1D quintic
//! energy and the gauged 2D energy.
//!
//! Both flows take explicit gradient steps followed by renormalization, with
//! step halving whenever a step raises the energy. The 2D flow treats the
//! stiff (1/ε)H_y factor semi-implicitly through the exact Hermite decay
//! e^{-τ λ_k/ε}, so the admissible step is independent of ε.

use ndarray::Zip;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{energy_1d, energy_2d_gauged, gradient_1d, gradient_2d, EnergyBreakdown};
use crate::spectral::{SpectralWorkspace, WaveFunction1D, WaveFunction2D};
use crate::{CoreError, Result};

/// Default RNG stream for noisy seeds; fixed so reruns are reproducible.
pub const DEFAULT_NOISE_SEED: u64 = 0x0c55;

/// Initial-guess selector for the flows.
#[derive(Debug, Clone)]
pub enum SeedProfile {
    /// Oscillator ground Gaussian (times u₁ for 2D flows).
    Gaussian,
    /// Gaussian with deterministic complex noise.
    NoisyGaussian { seed: u64 },
    /// Warm start from a given 1D state (1D flows only).
    State1D(WaveFunction1D),
    /// Warm start from a given 2D state (2D flows only).
    State2D(WaveFunction2D),
}

/// Parameters of the normalized gradient flow.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Initial step, trap time units.
    pub tau: f64,
    /// Stop once |ΔE| per accepted step falls below this (relative to 1+|E|).
    pub tol_energy: f64,
    /// Convergence requires ‖gradient − μφ‖/‖gradient‖ below this.
    pub tol_residual: f64,
    pub max_iters: usize,
    pub seed_profile: SeedProfile,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            tau: 1e-3,
            tol_energy: 1e-12,
            tol_residual: 1e-6,
            max_iters: 100_000,
            seed_profile: SeedProfile::Gaussian,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(CoreError::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.tol_energy > 0.0) || !(self.tol_residual > 0.0) {
            return Err(CoreError::Config("tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(CoreError::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a minimization.
#[derive(Debug, Clone)]
pub struct GroundStateResult<S> {
    /// Unit-mass minimizer, global phase fixed so ∫φ is real and positive.
    pub state: S,
    pub energy: EnergyBreakdown,
    /// μ = ⟨φ, gradient(φ)⟩ at the final state.
    pub chemical_potential: f64,
    pub iterations: usize,
    pub converged: bool,
    /// ‖gradient − μφ‖/‖gradient‖ at the final state.
    pub residual: f64,
    /// Energies of the accepted steps, nonincreasing by construction.
    pub energy_history: Vec<f64>,
}

const TAU_FLOOR: f64 = 1e-6;
/// Accept steps that raise the energy by at most this relative amount;
/// rounding at the plateau would otherwise collapse τ to the floor.
const ACCEPT_SLACK: f64 = 1e-13;

/// Minimize the 1D quintic energy over unit-mass states.
///
/// Non-convergence within `max_iters` is reported through the `converged`
/// flag, not as an error.
pub fn minimize_1d(
    beta: f64,
    cfg: &FlowConfig,
    ws: &SpectralWorkspace,
) -> Result<GroundStateResult<WaveFunction1D>> {
    cfg.validate()?;
    let mut phi = seed_state_1d(&cfg.seed_profile, ws)?;
    normalize_1d(&mut phi, ws);

    let mut energy = energy_1d(&phi, beta, ws)?;
    let mut history = vec![energy.total];
    let mut tau = cfg.tau;
    let mut accepted_run = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    while iterations < cfg.max_iters {
        iterations += 1;
        let grad = gradient_1d(&phi, beta, ws)?;
        let residual = sphere_residual_1d(&phi, &grad, ws);
        let mut trial = phi.clone();
        Zip::from(&mut trial).and(&grad).for_each(|t, &g| *t -= tau * g);
        normalize_1d(&mut trial, ws);
        let trial_energy = energy_1d(&trial, beta, ws)?;

        if trial_energy.total <= energy.total + ACCEPT_SLACK * (1.0 + energy.total.abs()) {
            let delta = energy.total - trial_energy.total;
            phi = trial;
            energy = trial_energy;
            history.push(energy.total);
            accepted_run += 1;
            if accepted_run % 10 == 0 {
                tau = (tau * 1.2).min(cfg.tau);
            }
            if delta.abs() <= cfg.tol_energy * (1.0 + energy.total.abs())
                && residual <= cfg.tol_residual
            {
                converged = true;
                break;
            }
        } else {
            accepted_run = 0;
            tau *= 0.5;
            if tau < TAU_FLOOR {
                break; // flow stalled at the step floor
            }
        }
    }

    fix_phase_1d(&mut phi, ws);
    let (residual, mu) = residual_1d(&phi, beta, ws)?;
    let energy = energy_1d(&phi, beta, ws)?;
    Ok(GroundStateResult {
        state: phi,
        energy,
        chemical_potential: mu,
        iterations,
        converged: converged && residual <= cfg.tol_residual,
        residual,
        energy_history: history,
    })
}

/// Minimize the gauged 2D energy over unit-mass states.
///
/// Each step is explicit in H_x and f[φ] and exact in the stiff transverse
/// decay, then renormalized.
pub fn minimize_2d(
    beta: f64,
    epsilon: f64,
    cfg: &FlowConfig,
    ws: &SpectralWorkspace,
) -> Result<GroundStateResult<WaveFunction2D>> {
    cfg.validate()?;
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "minimize_2d requires epsilon > 0, got {epsilon}"
        )));
    }
    let mut phi = seed_state_2d(&cfg.seed_profile, ws)?;
    normalize_2d(&mut phi, ws);

    let mut energy = energy_2d_gauged(&phi, beta, epsilon, ws)?;
    let mut history = vec![energy.total];
    let mut tau = cfg.tau;
    let mut accepted_run = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    while iterations < cfg.max_iters {
        iterations += 1;
        // Step along the decay-preconditioned sphere residual
        // e^{-τH_y/ε}(g − μφ): eigenstates are exact fixed points for any τ,
        // and the stiff transverse factor τλ e^{-τλ/ε}/ε stays below 1/e.
        let grad = gradient_2d(&phi, beta, epsilon, ws)?;
        let mu = ws.inner_2d(&phi, &grad).re / ws.mass_2d(&phi);
        let mut dir = grad.clone();
        Zip::from(&mut dir).and(&phi).for_each(|d, &p| *d -= mu * p);
        let residual = {
            let gnorm = ws.mass_2d(&grad).sqrt();
            if gnorm > 0.0 { ws.mass_2d(&dir).sqrt() / gnorm } else { 0.0 }
        };
        let dir = ws.decay_linear_y(&dir, tau, epsilon)?;
        let mut trial = phi.clone();
        Zip::from(&mut trial).and(&dir).for_each(|t, &d| *t -= tau * d);
        normalize_2d(&mut trial, ws);
        let trial_energy = energy_2d_gauged(&trial, beta, epsilon, ws)?;

        if trial_energy.total <= energy.total + ACCEPT_SLACK * (1.0 + energy.total.abs()) {
            let delta = energy.total - trial_energy.total;
            phi = trial;
            energy = trial_energy;
            history.push(energy.total);
            accepted_run += 1;
            if accepted_run % 10 == 0 {
                tau = (tau * 1.2).min(cfg.tau);
            }
            if delta.abs() <= cfg.tol_energy * (1.0 + energy.total.abs())
                && residual <= cfg.tol_residual
            {
                converged = true;
                break;
            }
        } else {
            accepted_run = 0;
            tau *= 0.5;
            if tau < TAU_FLOOR {
                break;
            }
        }
    }

    fix_phase_2d(&mut phi, ws);
    let (residual, mu) = residual_2d(&phi, beta, epsilon, ws)?;
    let energy = energy_2d_gauged(&phi, beta, epsilon, ws)?;
    Ok(GroundStateResult {
        state: phi,
        energy,
        chemical_potential: mu,
        iterations,
        converged: converged && residual <= cfg.tol_residual,
        residual,
        energy_history: history,
    })
}

/// ‖g − μφ‖/‖g‖ computed from an already-evaluated gradient.
fn sphere_residual_1d(
    phi: &WaveFunction1D,
    grad: &WaveFunction1D,
    ws: &SpectralWorkspace,
) -> f64 {
    let mu = ws.inner_1d(phi, grad).re / ws.mass_1d(phi);
    let mut dev = grad.clone();
    Zip::from(&mut dev).and(phi).for_each(|d, &p| *d -= mu * p);
    let gnorm = ws.mass_1d(grad).sqrt();
    if gnorm > 0.0 {
        ws.mass_1d(&dev).sqrt() / gnorm
    } else {
        0.0
    }
}

/// Materialize a 1D seed state (unnormalized).
pub fn seed_state_1d(seed: &SeedProfile, ws: &SpectralWorkspace) -> Result<WaveFunction1D> {
    match seed {
        SeedProfile::Gaussian => Ok(ws.harmonic_ground_x()),
        SeedProfile::NoisyGaussian { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let base = ws.harmonic_ground_x();
            Ok(WaveFunction1D::from_iter(ws.grid_x.nodes.iter().zip(base.iter()).map(
                |(&x, &b)| {
                    let envelope = (-0.25 * x * x).exp();
                    let noise = Complex64::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    );
                    b + 0.05 * envelope * noise
                },
            )))
        }
        SeedProfile::State1D(state) => {
            ws.check_1d(state)?;
            Ok(state.clone())
        }
        SeedProfile::State2D(_) => Err(CoreError::Config(
            "a 2D seed state cannot start a 1D flow".into(),
        )),
    }
}

/// Materialize a 2D seed state (unnormalized).
pub fn seed_state_2d(seed: &SeedProfile, ws: &SpectralWorkspace) -> Result<WaveFunction2D> {
    match seed {
        SeedProfile::Gaussian => ws.tensor_with_mode(&ws.harmonic_ground_x(), 0),
        SeedProfile::NoisyGaussian { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut psi = ws.tensor_with_mode(&ws.harmonic_ground_x(), 0)?;
            for (j, mut row) in psi.rows_mut().into_iter().enumerate() {
                let y = ws.basis_y.nodes[j];
                for (i, v) in row.iter_mut().enumerate() {
                    let x = ws.grid_x.nodes[i];
                    let envelope = (-0.25 * (x * x + y * y)).exp();
                    let noise =
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    *v += 0.05 * envelope * noise;
                }
            }
            Ok(psi)
        }
        SeedProfile::State2D(state) => {
            ws.check_2d(state)?;
            Ok(state.clone())
        }
        SeedProfile::State1D(_) => Err(CoreError::Config(
            "a 1D seed state cannot start a 2D flow".into(),
        )),
    }
}

fn normalize_1d(phi: &mut WaveFunction1D, ws: &SpectralWorkspace) {
    let norm = ws.mass_1d(phi).sqrt();
    phi.mapv_inplace(|v| v / norm);
}

fn normalize_2d(phi: &mut WaveFunction2D, ws: &SpectralWorkspace) {
    let norm = ws.mass_2d(phi).sqrt();
    phi.mapv_inplace(|v| v / norm);
}

/// Rotate the global phase so ∫φ is real and positive. Minimizers of these
/// defocusing energies are unique up to phase at desk-scale parameters.
fn fix_phase_1d(phi: &mut WaveFunction1D, _ws: &SpectralWorkspace) {
    let total: Complex64 = phi.iter().sum();
    if total.norm() > 0.0 {
        let rot = Complex64::from_polar(1.0, -total.arg());
        phi.mapv_inplace(|v| v * rot);
    }
}

fn fix_phase_2d(phi: &mut WaveFunction2D, _ws: &SpectralWorkspace) {
    let total: Complex64 = phi.iter().sum();
    if total.norm() > 0.0 {
        let rot = Complex64::from_polar(1.0, -total.arg());
        phi.mapv_inplace(|v| v * rot);
    }
}

fn residual_1d(
    phi: &WaveFunction1D,
    beta: f64,
    ws: &SpectralWorkspace,
) -> Result<(f64, f64)> {
    let grad = gradient_1d(phi, beta, ws)?;
    let mu = ws.inner_1d(phi, &grad).re / ws.mass_1d(phi);
    let mut dev = grad.clone();
    Zip::from(&mut dev).and(phi).for_each(|d, &p| *d -= mu * p);
    let gnorm = ws.mass_1d(&grad).sqrt();
    let residual = if gnorm > 0.0 { ws.mass_1d(&dev).sqrt() / gnorm } else { 0.0 };
    Ok((residual, mu))
}

fn residual_2d(
    phi: &WaveFunction2D,
    beta: f64,
    epsilon: f64,
    ws: &SpectralWorkspace,
) -> Result<(f64, f64)> {
    let grad = gradient_2d(phi, beta, epsilon, ws)?;
    let mu = ws.inner_2d(phi, &grad).re / ws.mass_2d(phi);
    let mut dev = grad.clone();
    Zip::from(&mut dev).and(phi).for_each(|d, &p| *d -= mu * p);
    let gnorm = ws.mass_2d(&grad).sqrt();
    let residual = if gnorm > 0.0 { ws.mass_2d(&dev).sqrt() / gnorm } else { 0.0 };
    Ok((residual, mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let ws = SpectralWorkspace::new(64, 10.0, 16).unwrap();
        let mut cfg = FlowConfig::default();
        cfg.tau = 0.0;
        assert!(minimize_1d(0.0, &cfg, &ws).is_err());
        cfg = FlowConfig { max_iters: 0, ..FlowConfig::default() };
        assert!(minimize_1d(0.0, &cfg, &ws).is_err());
    }

    #[test]
    fn linear_ground_state_is_the_gaussian() {
        let ws = SpectralWorkspace::new(128, 12.0, 16).unwrap();
        let cfg = FlowConfig { tau: 1e-3, ..FlowConfig::default() };
        let result = minimize_1d(0.0, &cfg, &ws).unwrap();
        assert!(result.converged);
        assert!((result.energy.total - 1.0).abs() < 1e-6, "E = {}", result.energy.total);
        assert!((ws.mass_1d(&result.state) - 1.0).abs() < 1e-10);
        // L² distance to the analytic Gaussian after phase fixing.
        let gauss = ws.harmonic_ground_x();
        let mut diff = result.state.clone();
        Zip::from(&mut diff).and(&gauss).for_each(|d, &g| *d -= g);
        assert!(ws.mass_1d(&diff).sqrt() < 1e-4);
        assert!((result.chemical_potential - 1.0).abs() < 1e-6);
    }

    #[test]
    fn energy_history_is_monotone() {
        let ws = SpectralWorkspace::new(64, 10.0, 16).unwrap();
        let cfg = FlowConfig {
            max_iters: 2_000,
            seed_profile: SeedProfile::NoisyGaussian { seed: 7 },
            ..FlowConfig::default()
        };
        let result = minimize_1d(1.0, &cfg, &ws).unwrap();
        for w in result.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn non_convergence_is_flagged_not_thrown() {
        let ws = SpectralWorkspace::new(64, 10.0, 16).unwrap();
        let cfg = FlowConfig {
            max_iters: 3,
            seed_profile: SeedProfile::NoisyGaussian { seed: 3 },
            ..FlowConfig::default()
        };
        let result = minimize_1d(1.0, &cfg, &ws).unwrap();
        assert!(!result.converged);
    }

    #[test]
    fn separable_2d_ground_state() {
        let ws = SpectralWorkspace::new(64, 10.0, 16).unwrap();
        let eps = 0.25;
        let cfg = FlowConfig { tol_residual: 1e-7, ..FlowConfig::default() };
        let result = minimize_2d(0.0, eps, &cfg, &ws).unwrap();
        assert!(result.converged);
        assert!(
            (result.energy.total - (1.0 / eps + 1.0)).abs() < 1e-5,
            "E = {}",
            result.energy.total
        );
        // The β = 0 minimizer factorizes: all mass in the first Hermite mode.
        let coeffs = ws.to_hermite(&result.state).unwrap();
        let excited: f64 = coeffs
            .rows()
            .into_iter()
            .skip(1)
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            * ws.grid_x.step;
        assert!(excited.sqrt() < 1e-6, "Π₁ defect {}", excited.sqrt());
    }
}
