//! Dimensional-reduction apparatus: projection onto the transverse ground
//! mode, extraction of the reduced 1D amplitude, residuals against the
//! quintic limit, ε-sweeps with log–log rate fits, and reconstruction of the
//! ungauged field on the unscaled grid.

use ndarray::Array1;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{evolve_1d, evolve_2d, Trajectory1D, Trajectory2D};
use crate::energy::e_eps;
use crate::gauge::arctan_kernel;
use crate::ground_state::{minimize_1d, minimize_2d, FlowConfig, SeedProfile};
use crate::spectral::{SpectralWorkspace, WaveFunction1D, WaveFunction2D};
use crate::{CoreError, Result};

/// Least-squares fit of log y against log x.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

/// Fitted log–log rates of a sweep; entries are present when at least three
/// usable rows exist.
#[derive(Debug, Clone, Copy, Default)]
pub struct FittedRates {
    pub gse: Option<RateFit>,
    pub projection: Option<RateFit>,
    pub dynamics: Option<RateFit>,
}

/// Per-ε measurements of a ground-state-energy or dynamics sweep.
#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub epsilons: Vec<f64>,
    /// Transverse ground energies 1/ε.
    pub e_eps: Vec<f64>,
    /// Measured 1D ground energy (ground-state sweeps).
    pub e1d: Option<f64>,
    /// Measured 2D ground energies (ground-state sweeps).
    pub e2d: Vec<f64>,
    /// |E²ᴰ_ε − e_ε − E¹ᴰ| per ε.
    pub gse_gap: Vec<f64>,
    /// sup_t ‖φ_ε − Π₁φ_ε‖ per ε (dynamics sweeps).
    pub proj_residual: Vec<f64>,
    /// sup_t ‖φ_ε(t) − e^{-it/ε} φ(t) u₁‖-style reduced residual per ε.
    pub dyn_residual: Vec<f64>,
    /// Flow iteration counts (ground-state sweeps).
    pub iterations: Vec<usize>,
    /// Row health: false rows come from non-converged or aborted solves and
    /// are excluded from the fits.
    pub converged: Vec<bool>,
    pub fitted_rates: FittedRates,
}

/// Orthogonal projection onto the transverse ground mode:
/// (Π₁φ)(x, y) = [∫ φ(x, y') u₁(y') dy'] u₁(y), i.e. zeroing every Hermite
/// coefficient beyond the first.
pub fn project_ground(phi: &WaveFunction2D, ws: &SpectralWorkspace) -> Result<WaveFunction2D> {
    let mut coeffs = ws.to_hermite(phi)?;
    for mut row in coeffs.rows_mut().into_iter().skip(1) {
        row.fill(Complex64::ZERO);
    }
    ws.from_hermite(&coeffs)
}

/// Reduced 1D amplitude with the fast transverse phase removed:
/// φ_ε(t, x) = e^{it/ε} ∫ φ(t, x, y) u₁(y) dy.
pub fn extract_phi_eps(
    phi: &WaveFunction2D,
    t: f64,
    epsilon: f64,
    ws: &SpectralWorkspace,
) -> Result<WaveFunction1D> {
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "extract_phi_eps requires epsilon > 0, got {epsilon}"
        )));
    }
    let coeffs = ws.to_hermite(phi)?;
    let phase = Complex64::from_polar(1.0, t / epsilon);
    Ok(coeffs.row(0).mapv(|v| v * phase))
}

/// sup over recorded times of ‖φ(t) − Π₁φ(t)‖_{L²}.
pub fn projection_residual(traj: &Trajectory2D, ws: &SpectralWorkspace) -> Result<f64> {
    let mut sup = 0.0f64;
    for snap in &traj.snapshots {
        let coeffs = ws.to_hermite(snap)?;
        let excited: f64 = coeffs
            .rows()
            .into_iter()
            .skip(1)
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            * ws.grid_x.step;
        sup = sup.max(excited.sqrt());
    }
    Ok(sup)
}

/// sup over recorded times of ‖extract_phi_eps(φ(t)) − φ_{1D}(t)‖_{L²_x}.
/// The trajectories must share identical snapshot times.
pub fn dynamics_residual(
    traj2d: &Trajectory2D,
    traj1d: &Trajectory1D,
    epsilon: f64,
    ws: &SpectralWorkspace,
) -> Result<f64> {
    if traj2d.times.len() != traj1d.times.len() {
        return Err(CoreError::TimeGrid(format!(
            "{} vs {} snapshots",
            traj2d.times.len(),
            traj1d.times.len()
        )));
    }
    for (a, b) in traj2d.times.iter().zip(traj1d.times.iter()) {
        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(CoreError::TimeGrid(format!("t = {a} vs {b}")));
        }
    }
    let mut sup = 0.0f64;
    for ((t, snap2), snap1) in traj2d
        .times
        .iter()
        .zip(traj2d.snapshots.iter())
        .zip(traj1d.snapshots.iter())
    {
        let reduced = extract_phi_eps(snap2, *t, epsilon, ws)?;
        let mut acc = 0.0;
        for (r, p) in reduced.iter().zip(snap1.iter()) {
            acc += (r - p).norm_sqr();
        }
        sup = sup.max((acc * ws.grid_x.step).sqrt());
    }
    Ok(sup)
}

/// Least-squares fit of log y versus log x. Requires at least three strictly
/// positive points.
pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(CoreError::Config(format!(
            "fit_rate needs matched lists, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(CoreError::Config(format!(
            "fit_rate needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys.iter()).any(|&v| !(v > 0.0)) {
        return Err(CoreError::Domain(
            "fit_rate requires strictly positive data".into(),
        ));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(RateFit { slope, intercept, stderr })
}

/// Ungauged field reconstructed on the unscaled (x, y√ε) grid.
#[derive(Debug, Clone)]
pub struct ReconstructedField {
    /// Unscaled transverse nodes Y_j = √ε y_j.
    pub y_nodes: Array1<f64>,
    /// Quadrature weights on the unscaled nodes, √ε w̃_j.
    pub y_weights: Array1<f64>,
    /// ψ(x, Y) = ε^{-1/4} φ(x, Y/√ε) e^{-iβ S[|ψ̃|²]}.
    pub field: WaveFunction2D,
}

/// Undo the transverse rescaling and restore the gauge phase:
/// ψ = ε^{-1/4} φ(t, x, y/√ε) · e^{-iβ S[ρ]} with ρ the unscaled density.
/// Direct O(N²) phase quadrature — desk scale only.
pub fn reconstruct_psi(
    phi: &WaveFunction2D,
    _t: f64,
    epsilon: f64,
    beta: f64,
    ws: &SpectralWorkspace,
) -> Result<ReconstructedField> {
    ws.check_2d(phi)?;
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "reconstruct_psi requires epsilon > 0, got {epsilon}"
        )));
    }
    let se = epsilon.sqrt();
    let y_nodes = ws.basis_y.nodes.mapv(|y| se * y);
    let y_weights = ws.basis_y.weights.mapv(|w| se * w);
    let amp = epsilon.powf(-0.25);

    let unscaled = phi.mapv(|v| v * amp);
    let rho = unscaled.mapv(|z| z.norm_sqr());

    let mut field = unscaled;
    if beta != 0.0 {
        let dx = ws.grid_x.step;
        let (m, n) = rho.dim();
        for j in 0..m {
            for i in 0..n {
                let mut s = 0.0;
                for jj in 0..m {
                    let wq = y_weights[jj] * dx;
                    let dy = y_nodes[j] - y_nodes[jj];
                    for ii in 0..n {
                        let r = rho[(jj, ii)];
                        if r != 0.0 {
                            s += wq
                                * r
                                * arctan_kernel(
                                    ws.grid_x.nodes[i] - ws.grid_x.nodes[ii],
                                    dy,
                                );
                        }
                    }
                }
                field[(j, i)] *= Complex64::from_polar(1.0, -beta * s);
            }
        }
    }
    Ok(ReconstructedField { y_nodes, y_weights, field })
}

impl ReconstructedField {
    /// L² mass on the unscaled grid.
    pub fn mass(&self, ws: &SpectralWorkspace) -> f64 {
        let mut acc = 0.0;
        for (row, &w) in self.field.rows().into_iter().zip(self.y_weights.iter()) {
            acc += w * row.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        acc * ws.grid_x.step
    }
}

fn check_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(CoreError::Config("epsilon list is empty".into()));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(CoreError::Config("epsilons must be positive".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CoreError::Config(
            "epsilons must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Ground-state-energy sweep: minimize the 1D energy once, then the gauged 2D
/// energy per ε (in parallel, warm-started from the factorized ansatz
/// φ₁ᴰ(x) u₁(y)), and fit the decay of the gap |E²ᴰ_ε − e_ε − E¹ᴰ|.
///
/// Non-converged solves flag their row and the sweep continues.
pub fn run_gse_sweep(
    beta: f64,
    epsilons: &[f64],
    cfg: &FlowConfig,
    ws: &SpectralWorkspace,
) -> Result<SweepReport> {
    check_epsilons(epsilons)?;
    cfg.validate()?;

    let base = minimize_1d(beta, cfg, ws)?;
    let e1d = base.energy.total;
    let warm = ws.tensor_with_mode(&base.state, 0)?;

    let rows: Vec<Result<(f64, usize, bool)>> = epsilons
        .par_iter()
        .map(|&eps| {
            let cfg2 = FlowConfig {
                seed_profile: SeedProfile::State2D(warm.clone()),
                ..cfg.clone()
            };
            let r = minimize_2d(beta, eps, &cfg2, ws)?;
            Ok((r.energy.total, r.iterations, r.converged))
        })
        .collect();

    let mut report = SweepReport {
        epsilons: epsilons.to_vec(),
        e1d: Some(e1d),
        ..SweepReport::default()
    };
    for (&eps, row) in epsilons.iter().zip(rows) {
        let e_eps_val = e_eps(eps)?;
        report.e_eps.push(e_eps_val);
        match row {
            Ok((e2d, iterations, converged)) => {
                report.e2d.push(e2d);
                report.gse_gap.push((e2d - e_eps_val - e1d).abs());
                report.iterations.push(iterations);
                report.converged.push(converged && base.converged);
            }
            Err(_) => {
                report.e2d.push(f64::NAN);
                report.gse_gap.push(f64::NAN);
                report.iterations.push(0);
                report.converged.push(false);
            }
        }
    }
    report.fitted_rates.gse = fit_over_good_rows(&report.epsilons, &report.gse_gap, &report.converged);
    Ok(report)
}

/// Dynamics sweep: evolve the quintic 1D reference once, then the gauged 2D
/// equation per ε from the factorized initial datum φ₀(x) u₁(y), recording
/// the reduced-dynamics and projection residuals and their fitted rates.
pub fn run_dynamics_sweep(
    phi0: &WaveFunction1D,
    beta: f64,
    epsilons: &[f64],
    t_final: f64,
    dt: f64,
    stride: usize,
    ws: &SpectralWorkspace,
) -> Result<SweepReport> {
    check_epsilons(epsilons)?;
    let traj1d = evolve_1d(phi0, beta, t_final, dt, stride, ws)?;
    let psi0 = ws.tensor_with_mode(phi0, 0)?;

    let rows: Vec<Result<(f64, f64)>> = epsilons
        .par_iter()
        .map(|&eps| {
            let traj2d = evolve_2d(&psi0, beta, eps, t_final, dt, stride, ws)?;
            let dyn_res = dynamics_residual(&traj2d, &traj1d, eps, ws)?;
            let proj_res = projection_residual(&traj2d, ws)?;
            Ok((dyn_res, proj_res))
        })
        .collect();

    let mut report = SweepReport {
        epsilons: epsilons.to_vec(),
        ..SweepReport::default()
    };
    for (&eps, row) in epsilons.iter().zip(rows) {
        report.e_eps.push(e_eps(eps)?);
        match row {
            Ok((dyn_res, proj_res)) => {
                report.dyn_residual.push(dyn_res);
                report.proj_residual.push(proj_res);
                report.converged.push(true);
            }
            Err(_) => {
                report.dyn_residual.push(f64::NAN);
                report.proj_residual.push(f64::NAN);
                report.converged.push(false);
            }
        }
        report.iterations.push(0);
    }
    report.fitted_rates.dynamics =
        fit_over_good_rows(&report.epsilons, &report.dyn_residual, &report.converged);
    report.fitted_rates.projection =
        fit_over_good_rows(&report.epsilons, &report.proj_residual, &report.converged);
    Ok(report)
}

fn fit_over_good_rows(xs: &[f64], ys: &[f64], good: &[bool]) -> Option<RateFit> {
    let mut fx = Vec::new();
    let mut fy = Vec::new();
    for ((&x, &y), &ok) in xs.iter().zip(ys).zip(good) {
        if ok && y.is_finite() && y > 0.0 {
            fx.push(x);
            fy.push(y);
        }
    }
    fit_rate(&fx, &fy).ok()
}
