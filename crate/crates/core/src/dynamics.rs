//! Time integrators: Strang splitting for the 1D quintic equation and for the
//! 2D gauged equation in the rescaled frame, plus continuity-equation
//! diagnostics.
//!
//! In 2D the stiff (1/ε)H_y factor is propagated exactly in Hermite modes and
//! H_x by an inner potential/kinetic split, so the linear half-step is
//! unconditionally stable; only the O(1) nonlinearity f[φ] is integrated
//! explicitly (classical 4-stage scheme). The transport speed inside f[φ] is
//! bounded by π‖ρ‖, which keeps the explicit substep far from its stability
//! limit at the reference Δt.

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64;

use crate::energy::{apply_hx_2d, apply_hy_2d, energy_1d, energy_2d_gauged};
use crate::gauge::{convolve_signed, nonlinearity};
use crate::spectral::{SpectralWorkspace, WaveFunction1D, WaveFunction2D};
use crate::{CoreError, Result};

/// Recorded 1D trajectory. `continuity_residual_series[i]` is the residual
/// between snapshots i-1 and i; entry 0 is 0.
#[derive(Debug, Clone)]
pub struct Trajectory1D {
    pub times: Vec<f64>,
    pub snapshots: Vec<WaveFunction1D>,
    pub mass_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub continuity_residual_series: Vec<f64>,
}

/// Recorded 2D trajectory; `sigma2_series` tracks ‖(H_x + H_y)φ‖, the
/// harmonic-Sobolev size of the solution, so the well-posedness horizon can
/// be judged a posteriori.
#[derive(Debug, Clone)]
pub struct Trajectory2D {
    pub times: Vec<f64>,
    pub snapshots: Vec<WaveFunction2D>,
    pub mass_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub continuity_residual_series: Vec<f64>,
    pub sigma2_series: Vec<f64>,
}

fn check_evolution_args(dt: f64, t_final: f64, stride: usize) -> Result<usize> {
    if !(dt > 0.0) {
        return Err(CoreError::Config(format!("dt must be positive, got {dt}")));
    }
    if t_final < 0.0 {
        return Err(CoreError::Config(format!(
            "t_final must be nonnegative, got {t_final}"
        )));
    }
    if stride == 0 {
        return Err(CoreError::Config("snapshot stride must be at least 1".into()));
    }
    Ok((t_final / dt).round() as usize)
}

fn check_unit_mass(mass: f64) -> Result<()> {
    if (mass - 1.0).abs() > 1e-8 {
        return Err(CoreError::Domain(format!(
            "initial state must have unit mass, got {mass}"
        )));
    }
    Ok(())
}

/// Evolve the 1D quintic equation i ∂_t φ = -∂_x²φ + x²φ + π²β²|φ|⁴φ by
/// second-order Strang splitting. The phase half-steps are exact because the
/// potential + quintic factor preserves |φ| pointwise.
pub fn evolve_1d(
    phi0: &WaveFunction1D,
    beta: f64,
    t_final: f64,
    dt: f64,
    stride: usize,
    ws: &SpectralWorkspace,
) -> Result<Trajectory1D> {
    ws.check_1d(phi0)?;
    let n_steps = check_evolution_args(dt, t_final, stride)?;
    check_unit_mass(ws.mass_1d(phi0))?;

    let pi2b2 = (std::f64::consts::PI * beta).powi(2);
    let kin_phase: Vec<Complex64> = ws
        .grid_x
        .wavenumbers
        .iter()
        .map(|&k| Complex64::from_polar(1.0 / ws.grid_x.n_x as f64, -dt * k * k))
        .collect();

    let half_phase = |phi: &mut WaveFunction1D| {
        for (i, v) in phi.iter_mut().enumerate() {
            let x = ws.grid_x.nodes[i];
            let r = v.norm_sqr();
            *v *= Complex64::from_polar(1.0, -0.5 * dt * (x * x + pi2b2 * r * r));
        }
    };

    let mut phi = phi0.clone();
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut mass_series = Vec::new();
    let mut energy_series = Vec::new();

    let mut record = |t: f64, phi: &WaveFunction1D| -> Result<()> {
        times.push(t);
        snapshots.push(phi.clone());
        mass_series.push(ws.mass_1d(phi));
        energy_series.push(energy_1d(phi, beta, ws)?.total);
        Ok(())
    };
    record(0.0, &phi)?;

    for step in 1..=n_steps {
        half_phase(&mut phi);
        let buf = phi.as_slice_mut().expect("1D fields are contiguous");
        ws.fft_forward(buf);
        for (v, p) in buf.iter_mut().zip(kin_phase.iter()) {
            *v *= p;
        }
        ws.fft_inverse(buf);
        half_phase(&mut phi);

        if step % stride == 0 || step == n_steps {
            record(step as f64 * dt, &phi)?;
        }
    }

    let mut continuity = vec![0.0];
    for i in 1..snapshots.len() {
        continuity.push(continuity_residual_1d(
            &snapshots[i - 1],
            &snapshots[i],
            times[i] - times[i - 1],
            beta,
            ws,
        )?);
    }

    Ok(Trajectory1D { times, snapshots, mass_series, energy_series, continuity_residual_series: continuity })
}

/// Evolve the rescaled gauged 2D equation
/// i ∂_t φ = (1/ε) H_y φ + H_x φ + f[φ] by Strang splitting: exact transverse
/// phases and an inner potential/kinetic split for the linear half-step, a
/// classical 4-stage explicit step for the nonlinear factor.
///
/// Aborts with [`CoreError::Instability`] if |mass − 1| exceeds 1e-3.
pub fn evolve_2d(
    phi0: &WaveFunction2D,
    beta: f64,
    epsilon: f64,
    t_final: f64,
    dt: f64,
    stride: usize,
    ws: &SpectralWorkspace,
) -> Result<Trajectory2D> {
    ws.check_2d(phi0)?;
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "evolve_2d requires epsilon > 0, got {epsilon}"
        )));
    }
    let n_steps = check_evolution_args(dt, t_final, stride)?;
    check_unit_mass(ws.mass_2d(phi0))?;

    let h = 0.5 * dt; // linear half-step
    let n = ws.n_x();
    let inv_n = 1.0 / n as f64;
    let mode_phase: Vec<Complex64> = ws
        .basis_y
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -h * l / epsilon))
        .collect();
    let pot_phase: Vec<Complex64> = ws
        .grid_x
        .nodes
        .iter()
        .map(|&x| Complex64::from_polar(1.0, -0.5 * h * x * x))
        .collect();
    let kin_phase: Vec<Complex64> = ws
        .grid_x
        .wavenumbers
        .iter()
        .map(|&k| Complex64::from_polar(inv_n, -h * k * k))
        .collect();

    let half_linear = |phi: &WaveFunction2D| -> Result<WaveFunction2D> {
        let mut c = ws.to_hermite(phi)?;
        for (k, mut row) in c.rows_mut().into_iter().enumerate() {
            let buf = row.as_slice_mut().expect("coefficient rows are contiguous");
            for (v, p) in buf.iter_mut().zip(pot_phase.iter()) {
                *v *= p * mode_phase[k];
            }
            ws.fft_forward(buf);
            for (v, p) in buf.iter_mut().zip(kin_phase.iter()) {
                *v *= p;
            }
            ws.fft_inverse(buf);
            for (v, p) in buf.iter_mut().zip(pot_phase.iter()) {
                *v *= p;
            }
        }
        ws.from_hermite(&c)
    };

    let rhs = |phi: &WaveFunction2D| -> Result<WaveFunction2D> {
        let f = nonlinearity(phi, beta, ws)?;
        Ok(f.mapv(|v| Complex64::new(0.0, -1.0) * v))
    };

    let mut phi = phi0.clone();
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut mass_series = Vec::new();
    let mut energy_series = Vec::new();
    let mut sigma2_series = Vec::new();

    let mut record = |t: f64, phi: &WaveFunction2D| -> Result<()> {
        times.push(t);
        snapshots.push(phi.clone());
        mass_series.push(ws.mass_2d(phi));
        energy_series.push(energy_2d_gauged(phi, beta, epsilon, ws)?.total);
        sigma2_series.push(sigma2_norm(phi, ws)?);
        Ok(())
    };
    record(0.0, &phi)?;

    for step in 1..=n_steps {
        phi = half_linear(&phi)?;
        if beta != 0.0 {
            // Classical RK4 on i ∂_t φ = f[φ].
            let k1 = rhs(&phi)?;
            let k2 = rhs(&add_scaled(&phi, &k1, 0.5 * dt))?;
            let k3 = rhs(&add_scaled(&phi, &k2, 0.5 * dt))?;
            let k4 = rhs(&add_scaled(&phi, &k3, dt))?;
            Zip::from(&mut phi)
                .and(&k1)
                .and(&k2)
                .and(&k3)
                .and(&k4)
                .for_each(|p, &a, &b, &c, &d| {
                    *p += dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
                });
        }
        phi = half_linear(&phi)?;

        let t = step as f64 * dt;
        let drift = (ws.mass_2d(&phi) - 1.0).abs();
        // Written so a NaN mass also trips the guard.
        if !(drift <= 1e-3) {
            return Err(CoreError::Instability { time: t, mass_drift: drift });
        }
        if step % stride == 0 || step == n_steps {
            record(t, &phi)?;
        }
    }

    let mut continuity = vec![0.0];
    for i in 1..snapshots.len() {
        continuity.push(continuity_residual_2d(
            &snapshots[i - 1],
            &snapshots[i],
            times[i] - times[i - 1],
            beta,
            epsilon,
            ws,
        )?);
    }

    Ok(Trajectory2D {
        times,
        snapshots,
        mass_series,
        energy_series,
        continuity_residual_series: continuity,
        sigma2_series,
    })
}

fn add_scaled(
    base: &WaveFunction2D,
    delta: &WaveFunction2D,
    factor: f64,
) -> WaveFunction2D {
    let mut out = base.clone();
    Zip::from(&mut out).and(delta).for_each(|o, &d| *o += factor * d);
    out
}

/// ‖(H_x + H_y) φ‖, the harmonic-Sobolev diagnostic recorded along 2D runs.
fn sigma2_norm(phi: &WaveFunction2D, ws: &SpectralWorkspace) -> Result<f64> {
    let mut g = apply_hx_2d(phi, ws)?;
    g += &apply_hy_2d(phi, ws)?;
    Ok(ws.mass_2d(&g).sqrt())
}

/// Discrete continuity residual ‖(ρ_b − ρ_a)/Δt + 2 ∂_x J‖ between
/// consecutive 1D snapshots, with J the plain momentum current of the
/// midpoint state (the quintic term is a real potential and carries no flux).
/// O(Δt²) for consecutive snapshots of a second-order run.
pub fn continuity_residual_1d(
    snap_a: &WaveFunction1D,
    snap_b: &WaveFunction1D,
    spacing: f64,
    _beta: f64,
    ws: &SpectralWorkspace,
) -> Result<f64> {
    ws.check_1d(snap_a)?;
    ws.check_1d(snap_b)?;
    if !(spacing > 0.0) {
        return Err(CoreError::Config(format!(
            "snapshot spacing must be positive, got {spacing}"
        )));
    }
    let mid: WaveFunction1D = Array1::from_iter(
        snap_a.iter().zip(snap_b.iter()).map(|(a, b)| 0.5 * (a + b)),
    );
    let dmid = ws.diff_x_1d(&mid)?;
    let j: WaveFunction1D = Array1::from_iter(
        mid.iter().zip(dmid.iter()).map(|(m, d)| Complex64::new((m.conj() * d).im, 0.0)),
    );
    let dj = ws.diff_x_1d(&j)?;
    let mut acc = 0.0;
    for i in 0..snap_a.len() {
        let rho_dot = (snap_b[i].norm_sqr() - snap_a[i].norm_sqr()) / spacing;
        let r = rho_dot + 2.0 * dj[i].re;
        acc += r * r;
    }
    Ok((acc * ws.grid_x.step).sqrt())
}

/// Discrete continuity residual for the rescaled gauged 2D equation:
/// ‖(ρ_b − ρ_a)/Δt + 2 ∂_x J_x + (2/ε) ∂_y J_y‖ with J_x the gauged momentum
/// Re[φ̄(-i∂_x + βa)φ] and J_y the plain transverse momentum; the 1/ε factor
/// mirrors the anisotropic kinetic term.
pub fn continuity_residual_2d(
    snap_a: &WaveFunction2D,
    snap_b: &WaveFunction2D,
    spacing: f64,
    beta: f64,
    epsilon: f64,
    ws: &SpectralWorkspace,
) -> Result<f64> {
    ws.check_2d(snap_a)?;
    ws.check_2d(snap_b)?;
    if !(spacing > 0.0) {
        return Err(CoreError::Config(format!(
            "snapshot spacing must be positive, got {spacing}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let mut mid = snap_a.clone();
    Zip::from(&mut mid).and(snap_b).for_each(|m, &b| *m = 0.5 * (*m + b));
    let rho = mid.mapv(|z| z.norm_sqr());
    let a_pot = convolve_signed(&rho, ws);
    let dmid_x = ws.diff_x_2d(&mid)?;
    let dmid_y = ws.diff_y(&mid)?;

    let mut jx = Array2::zeros(mid.dim());
    let mut jy = Array2::zeros(mid.dim());
    Zip::from(&mut jx)
        .and(&mid)
        .and(&dmid_x)
        .and(&a_pot)
        .and(&rho)
        .for_each(|o, &m, &d, &av, &r| {
            *o = Complex64::new((m.conj() * d).im + beta * av * r, 0.0);
        });
    Zip::from(&mut jy).and(&mid).and(&dmid_y).for_each(|o, &m, &d| {
        *o = Complex64::new((m.conj() * d).im, 0.0);
    });

    let djx = ws.diff_x_2d(&jx)?;
    let djy = ws.diff_y(&jy)?;

    let dx = ws.grid_x.step;
    let mut acc = 0.0;
    for (j, &w) in ws.basis_y.weights.iter().enumerate() {
        let mut row = 0.0;
        for i in 0..ws.n_x() {
            let rho_dot = (snap_b[(j, i)].norm_sqr() - snap_a[(j, i)].norm_sqr()) / spacing;
            let r = rho_dot + 2.0 * djx[(j, i)].re + 2.0 / epsilon * djy[(j, i)].re;
            row += r * r;
        }
        acc += w * row;
    }
    Ok((acc * dx).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_validation() {
        let ws = SpectralWorkspace::new(64, 10.0, 16).unwrap();
        let phi = ws.harmonic_ground_x();
        assert!(evolve_1d(&phi, 0.0, 1.0, 0.0, 1, &ws).is_err());
        assert!(evolve_1d(&phi, 0.0, -1.0, 0.01, 1, &ws).is_err());
        let unnormalized = phi.mapv(|v| v * 1.5);
        assert!(evolve_1d(&unnormalized, 0.0, 0.1, 0.01, 1, &ws).is_err());
        let psi = ws.tensor_with_mode(&phi, 0).unwrap();
        assert!(evolve_2d(&psi, 0.0, 0.0, 0.1, 0.01, 1, &ws).is_err());
    }

    #[test]
    fn stationary_state_stays_put_and_satisfies_continuity() {
        let ws = SpectralWorkspace::new(128, 12.0, 16).unwrap();
        let phi = ws.harmonic_ground_x();
        let traj = evolve_1d(&phi, 0.0, 5.0, 1e-3, 500, &ws).unwrap();
        for (t, snap) in traj.times.iter().zip(traj.snapshots.iter()) {
            let overlap = ws.inner_1d(snap, &phi).norm();
            assert!((overlap - 1.0).abs() < 1e-8, "t = {t}: overlap {overlap}");
        }
        for &r in &traj.continuity_residual_series {
            assert!(r <= 1e-6, "continuity residual {r}");
        }
        assert_eq!(traj.snapshots[0].len(), phi.len());
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        let first_err: f64 = traj.snapshots[0]
            .iter()
            .zip(phi.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert_eq!(first_err, 0.0, "first snapshot must equal the initial datum");
    }

    #[test]
    fn coherent_state_center_oscillates_at_trap_frequency() {
        let ws = SpectralWorkspace::new(256, 12.0, 16).unwrap();
        let x0 = 1.0;
        let mut phi: WaveFunction1D = ws
            .grid_x
            .nodes
            .mapv(|x| Complex64::new((-0.5 * (x - x0) * (x - x0)).exp(), 0.0));
        let norm = ws.mass_1d(&phi).sqrt();
        phi.mapv_inplace(|v| v / norm);
        let traj = evolve_1d(&phi, 0.0, 2.0, 5e-4, 400, &ws).unwrap();
        for (t, snap) in traj.times.iter().zip(traj.snapshots.iter()) {
            let mut center = 0.0;
            for (i, v) in snap.iter().enumerate() {
                center += ws.grid_x.nodes[i] * v.norm_sqr();
            }
            center *= ws.grid_x.step;
            let expected = x0 * (2.0 * t).cos();
            assert!(
                (center - expected).abs() < 1e-6,
                "t = {t}: center {center} vs {expected}"
            );
        }
    }

    #[test]
    fn mass_is_conserved_and_gauge_covariant() {
        let ws = SpectralWorkspace::new(64, 10.0, 16).unwrap();
        let phi = ws.harmonic_ground_x();
        let traj = evolve_1d(&phi, 1.0, 1.0, 1e-3, 100, &ws).unwrap();
        for (t, m) in traj.times.iter().zip(traj.mass_series.iter()) {
            assert!((m - 1.0).abs() <= 1e-8 * (1.0 + t));
        }

        // Global phases ride along exactly.
        let theta = 0.91;
        let rot = Complex64::from_polar(1.0, theta);
        let rotated = phi.mapv(|v| v * rot);
        let t1 = evolve_1d(&phi, 1.0, 0.2, 1e-3, 200, &ws).unwrap();
        let t2 = evolve_1d(&rotated, 1.0, 0.2, 1e-3, 200, &ws).unwrap();
        let last = t1.snapshots.len() - 1;
        let err = t1.snapshots[last]
            .iter()
            .zip(t2.snapshots[last].iter())
            .map(|(a, b)| (a * rot - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "gauge covariance error {err}");
    }

    #[test]
    fn factorized_linear_2d_flow_matches_1d_evolution() {
        let ws = SpectralWorkspace::new(128, 12.0, 16).unwrap();
        let eps = 0.25;
        let dt = 2.5e-4;
        let phi = ws.harmonic_ground_x();
        let psi = ws.tensor_with_mode(&phi, 0).unwrap();
        let t2d = evolve_2d(&psi, 0.0, eps, 0.5, dt, 400, &ws).unwrap();
        let t1d = evolve_1d(&phi, 0.0, 0.5, dt, 400, &ws).unwrap();
        assert_eq!(t2d.times, t1d.times);
        for ((t, snap2), snap1) in t2d
            .times
            .iter()
            .zip(t2d.snapshots.iter())
            .zip(t1d.snapshots.iter())
        {
            let phase = Complex64::from_polar(1.0, -t / eps);
            let reference = ws.tensor_with_mode(snap1, 0).unwrap();
            let mut diff = snap2.clone();
            Zip::from(&mut diff).and(&reference).for_each(|d, &r| *d -= phase * r);
            let err = ws.mass_2d(&diff).sqrt();
            assert!(err <= 1e-6, "t = {t}: factorization error {err}");
        }
        // Π₁ mass of the initial datum is exactly the full mass.
        let coeffs = ws.to_hermite(&t2d.snapshots[0]).unwrap();
        let ground_mass: f64 =
            coeffs.row(0).iter().map(|z| z.norm_sqr()).sum::<f64>() * ws.grid_x.step;
        assert!((ground_mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gauged_run_conserves_mass_and_energy() {
        let ws = SpectralWorkspace::new(128, 12.0, 32).unwrap();
        let phi = ws.harmonic_ground_x();
        let psi = ws.tensor_with_mode(&phi, 0).unwrap();
        let traj = evolve_2d(&psi, 1.0, 0.25, 0.2, 2.5e-4, 100, &ws).unwrap();
        for (t, m) in traj.times.iter().zip(traj.mass_series.iter()) {
            assert!((m - 1.0).abs() <= 1e-8 * (1.0 + t), "t = {t}: mass {m}");
        }
        let e0 = traj.energy_series[0];
        for &e in &traj.energy_series {
            assert!(((e - e0) / e0.abs()).abs() <= 1e-5, "energy drift {}", e - e0);
        }
        assert!(traj.sigma2_series.iter().all(|s| s.is_finite()));
    }
}
