//! The pipelines behind each subcommand: build the workspace, run the solver,
//! emit CSV tables, optional field snapshots, and the JSON summary.
//!
//! Outputs are written even when a solver fails to converge; the error (and
//! exit code) then reports the failure on top of the persisted results.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde_json::json;

use cssr_core::{
    e_eps, energy_1d, energy_2d_gauged, evolve_1d, evolve_2d, f_profile, gradient_1d, gradient_2d,
    minimize_1d, minimize_2d, project_ground, run_dynamics_sweep, run_gse_sweep, FlowConfig,
    SeedProfile, SpectralWorkspace, SweepReport, Trajectory1D, Trajectory2D, WaveFunction1D,
};

use crate::config::SimulationConfig;
use crate::report::{ensure_dir, fmt_f64, write_csv, Summary};
use crate::snapshot::{read_snapshot, row_as_1d, write_snapshot, SnapshotMeta};
use crate::{CliError, Result};

pub fn workspace(cfg: &SimulationConfig) -> Result<SpectralWorkspace> {
    Ok(SpectralWorkspace::new(cfg.grid.n_x, cfg.grid.l_x, cfg.grid.m_y)?)
}

fn out_dir(cfg: &SimulationConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.output.dir);
    ensure_dir(&dir)?;
    Ok(dir)
}

/// Resolve the configured seed selector into a flow seed. `two_d` picks the
/// dimensionality a file-based state must have.
fn resolve_seed(cfg: &SimulationConfig, two_d: bool) -> Result<SeedProfile> {
    let spec = cfg.flow.seed_profile.as_str();
    match spec {
        "gaussian" => Ok(SeedProfile::Gaussian),
        "noisy-gaussian" => Ok(SeedProfile::NoisyGaussian {
            seed: cssr_core::ground_state::DEFAULT_NOISE_SEED,
        }),
        other => {
            let path = other.strip_prefix("file:").expect("validated selector");
            let (meta, field) = read_snapshot(Path::new(path))?;
            if two_d {
                if meta.m_y_or_1 as usize != cfg.grid.m_y {
                    return Err(CliError::Validation(format!(
                        "seed snapshot has {} transverse nodes, config wants {}",
                        meta.m_y_or_1, cfg.grid.m_y
                    )));
                }
                Ok(SeedProfile::State2D(field))
            } else {
                if meta.m_y_or_1 != 1 {
                    return Err(CliError::Validation(
                        "seed snapshot is 2D but a 1D state is required".into(),
                    ));
                }
                Ok(SeedProfile::State1D(row_as_1d(&field)))
            }
        }
    }
}

/// Initial datum for the evolution commands: the configured seed, normalized.
fn initial_state_1d(cfg: &SimulationConfig, ws: &SpectralWorkspace) -> Result<WaveFunction1D> {
    let seed = resolve_seed(cfg, false)?;
    let mut phi = cssr_core::ground_state::seed_state_1d(&seed, ws)?;
    let norm = ws.mass_1d(&phi).sqrt();
    if norm == 0.0 {
        return Err(CliError::Validation("initial state has zero mass".into()));
    }
    phi.mapv_inplace(|v| v / norm);
    Ok(phi)
}

fn bool_cell(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn run_ground1d(cfg: &SimulationConfig) -> Result<()> {
    let ws = workspace(cfg)?;
    let dir = out_dir(cfg)?;
    let mut summary = Summary::new("ground1d", cfg, &dir);
    let flow = FlowConfig { seed_profile: resolve_seed(cfg, false)?, ..cfg.flow_config() };
    let r = minimize_1d(cfg.physics.beta, &flow, &ws)?;

    let header = "beta,total,kinetic_x,interaction,potential_x,mu,residual,iterations,converged";
    let row = format!(
        "{},{},{},{},{},{},{},{},{}",
        fmt_f64(cfg.physics.beta),
        fmt_f64(r.energy.total),
        fmt_f64(r.energy.kinetic_x),
        fmt_f64(r.energy.interaction),
        fmt_f64(r.energy.potential_x),
        fmt_f64(r.chemical_potential),
        fmt_f64(r.residual),
        r.iterations,
        bool_cell(r.converged),
    );
    write_csv(&dir.join("ground1d.csv"), header, &[row], None)?;

    if cfg.output.write_fields {
        let field = Array2::from_shape_fn((1, ws.n_x()), |(_, i)| r.state[i]);
        let meta = SnapshotMeta {
            n_x: ws.n_x() as u32,
            m_y_or_1: 1,
            l_x: cfg.grid.l_x,
            time: 0.0,
            epsilon: cfg.physics.epsilon,
            beta: cfg.physics.beta,
        };
        write_snapshot(&dir.join("ground1d.snap"), &field, &meta)?;
    }

    summary.results = json!({
        "energy": r.energy.total,
        "kinetic_x": r.energy.kinetic_x,
        "interaction": r.energy.interaction,
        "potential_x": r.energy.potential_x,
        "chemical_potential": r.chemical_potential,
        "residual": r.residual,
        "iterations": r.iterations,
        "converged": r.converged,
    });
    summary.finish()?;
    if !r.converged {
        return Err(CliError::NonConvergence(format!(
            "ground1d residual {:.3e} after {} iterations",
            r.residual, r.iterations
        )));
    }
    Ok(())
}

pub fn run_ground2d(cfg: &SimulationConfig) -> Result<()> {
    let ws = workspace(cfg)?;
    let dir = out_dir(cfg)?;
    let mut summary = Summary::new("ground2d", cfg, &dir);
    let flow = FlowConfig { seed_profile: resolve_seed(cfg, true)?, ..cfg.flow_config() };
    let r = minimize_2d(cfg.physics.beta, cfg.physics.epsilon, &flow, &ws)?;

    let header =
        "beta,epsilon,total,interaction,potential_x,transverse,mu,residual,iterations,converged";
    let row = format!(
        "{},{},{},{},{},{},{},{},{},{}",
        fmt_f64(cfg.physics.beta),
        fmt_f64(cfg.physics.epsilon),
        fmt_f64(r.energy.total),
        fmt_f64(r.energy.interaction),
        fmt_f64(r.energy.potential_x),
        fmt_f64(r.energy.transverse),
        fmt_f64(r.chemical_potential),
        fmt_f64(r.residual),
        r.iterations,
        bool_cell(r.converged),
    );
    write_csv(&dir.join("ground2d.csv"), header, &[row], None)?;

    if cfg.output.write_fields {
        let meta = SnapshotMeta {
            n_x: ws.n_x() as u32,
            m_y_or_1: ws.m_y() as u32,
            l_x: cfg.grid.l_x,
            time: 0.0,
            epsilon: cfg.physics.epsilon,
            beta: cfg.physics.beta,
        };
        write_snapshot(&dir.join("ground2d.snap"), &r.state, &meta)?;
    }

    summary.results = json!({
        "energy": r.energy.total,
        "interaction": r.energy.interaction,
        "potential_x": r.energy.potential_x,
        "transverse": r.energy.transverse,
        "chemical_potential": r.chemical_potential,
        "residual": r.residual,
        "iterations": r.iterations,
        "converged": r.converged,
        "e_eps": e_eps(cfg.physics.epsilon)?,
    });
    summary.finish()?;
    if !r.converged {
        return Err(CliError::NonConvergence(format!(
            "ground2d residual {:.3e} after {} iterations",
            r.residual, r.iterations
        )));
    }
    Ok(())
}

fn write_trajectory_1d(dir: &Path, traj: &Trajectory1D) -> Result<()> {
    let header = "time,mass,energy,continuity_residual";
    let rows: Vec<String> = traj
        .times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            format!(
                "{},{},{},{}",
                fmt_f64(*t),
                fmt_f64(traj.mass_series[i]),
                fmt_f64(traj.energy_series[i]),
                fmt_f64(traj.continuity_residual_series[i]),
            )
        })
        .collect();
    write_csv(&dir.join("trajectory1d.csv"), header, &rows, None)
}

fn write_trajectory_2d(dir: &Path, traj: &Trajectory2D) -> Result<()> {
    let header = "time,mass,energy,continuity_residual,sigma2";
    let rows: Vec<String> = traj
        .times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            format!(
                "{},{},{},{},{}",
                fmt_f64(*t),
                fmt_f64(traj.mass_series[i]),
                fmt_f64(traj.energy_series[i]),
                fmt_f64(traj.continuity_residual_series[i]),
                fmt_f64(traj.sigma2_series[i]),
            )
        })
        .collect();
    write_csv(&dir.join("trajectory2d.csv"), header, &rows, None)
}

pub fn run_evolve1d(cfg: &SimulationConfig) -> Result<()> {
    let ws = workspace(cfg)?;
    let dir = out_dir(cfg)?;
    let mut summary = Summary::new("evolve1d", cfg, &dir);
    let phi0 = initial_state_1d(cfg, &ws)?;
    let traj = evolve_1d(
        &phi0,
        cfg.physics.beta,
        cfg.time.t_final,
        cfg.time.dt,
        cfg.time.snapshot_stride,
        &ws,
    )?;
    write_trajectory_1d(&dir, &traj)?;
    if cfg.output.write_fields {
        for (i, (t, snap)) in traj.times.iter().zip(traj.snapshots.iter()).enumerate() {
            let field = Array2::from_shape_fn((1, ws.n_x()), |(_, k)| snap[k]);
            let meta = SnapshotMeta {
                n_x: ws.n_x() as u32,
                m_y_or_1: 1,
                l_x: cfg.grid.l_x,
                time: *t,
                epsilon: cfg.physics.epsilon,
                beta: cfg.physics.beta,
            };
            write_snapshot(&dir.join(format!("snap1d_{i:06}.snap")), &field, &meta)?;
        }
    }
    summary.results = json!({
        "final_time": traj.times.last(),
        "final_mass": traj.mass_series.last(),
        "final_energy": traj.energy_series.last(),
        "max_continuity_residual": traj
            .continuity_residual_series
            .iter()
            .fold(0.0f64, |a, &b| a.max(b)),
        "snapshots": traj.times.len(),
    });
    summary.finish()
}

pub fn run_evolve2d(cfg: &SimulationConfig) -> Result<()> {
    let ws = workspace(cfg)?;
    let dir = out_dir(cfg)?;
    let mut summary = Summary::new("evolve2d", cfg, &dir);
    let phi0 = initial_state_1d(cfg, &ws)?;
    let psi0 = ws.tensor_with_mode(&phi0, 0)?;
    let traj = evolve_2d(
        &psi0,
        cfg.physics.beta,
        cfg.physics.epsilon,
        cfg.time.t_final,
        cfg.time.dt,
        cfg.time.snapshot_stride,
        &ws,
    )?;
    write_trajectory_2d(&dir, &traj)?;
    if cfg.output.write_fields {
        for (i, (t, snap)) in traj.times.iter().zip(traj.snapshots.iter()).enumerate() {
            let meta = SnapshotMeta {
                n_x: ws.n_x() as u32,
                m_y_or_1: ws.m_y() as u32,
                l_x: cfg.grid.l_x,
                time: *t,
                epsilon: cfg.physics.epsilon,
                beta: cfg.physics.beta,
            };
            write_snapshot(&dir.join(format!("snap2d_{i:06}.snap")), snap, &meta)?;
        }
    }
    summary.results = json!({
        "final_time": traj.times.last(),
        "final_mass": traj.mass_series.last(),
        "final_energy": traj.energy_series.last(),
        "max_continuity_residual": traj
            .continuity_residual_series
            .iter()
            .fold(0.0f64, |a, &b| a.max(b)),
        "max_sigma2": traj.sigma2_series.iter().fold(0.0f64, |a, &b| a.max(b)),
        "snapshots": traj.times.len(),
    });
    summary.finish()
}

fn rates_json(report: &SweepReport) -> serde_json::Value {
    let rate = |r: Option<cssr_core::RateFit>| match r {
        Some(f) => json!({"slope": f.slope, "intercept": f.intercept, "stderr": f.stderr}),
        None => serde_json::Value::Null,
    };
    json!({
        "gse": rate(report.fitted_rates.gse),
        "projection": rate(report.fitted_rates.projection),
        "dynamics": rate(report.fitted_rates.dynamics),
    })
}

pub fn run_sweep_gse(cfg: &SimulationConfig) -> Result<()> {
    let ws = workspace(cfg)?;
    let dir = out_dir(cfg)?;
    let mut summary = Summary::new("sweep-gse", cfg, &dir);
    let flow = FlowConfig { seed_profile: resolve_seed(cfg, false)?, ..cfg.flow_config() };
    let report = run_gse_sweep(cfg.physics.beta, &cfg.sweep.epsilons, &flow, &ws)?;

    let header = "epsilon,e_eps,E2D,gap,iterations,converged";
    let rows: Vec<String> = report
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, eps)| {
            format!(
                "{},{},{},{},{},{}",
                fmt_f64(*eps),
                fmt_f64(report.e_eps[i]),
                fmt_f64(report.e2d[i]),
                fmt_f64(report.gse_gap[i]),
                report.iterations[i],
                bool_cell(report.converged[i]),
            )
        })
        .collect();
    write_csv(&dir.join("sweep_gse.csv"), header, &rows, None)?;

    summary.results = json!({
        "e1d": report.e1d,
        "epsilons": report.epsilons,
        "e2d": report.e2d,
        "gse_gap": report.gse_gap,
        "converged": report.converged,
        "rates": rates_json(&report),
    });
    summary.finish()?;
    if report.converged.iter().any(|&c| !c) {
        return Err(CliError::NonConvergence("one or more sweep rows flagged".into()));
    }
    Ok(())
}

pub fn run_sweep_dyn(cfg: &SimulationConfig) -> Result<()> {
    let ws = workspace(cfg)?;
    let dir = out_dir(cfg)?;
    let mut summary = Summary::new("sweep-dyn", cfg, &dir);
    let phi0 = initial_state_1d(cfg, &ws)?;
    let report = run_dynamics_sweep(
        &phi0,
        cfg.physics.beta,
        &cfg.sweep.epsilons,
        cfg.time.t_final,
        cfg.time.dt,
        cfg.time.snapshot_stride,
        &ws,
    )?;

    let header = "epsilon,t_final,dt,dyn_residual,proj_residual";
    let rows: Vec<String> = report
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, eps)| {
            format!(
                "{},{},{},{},{}",
                fmt_f64(*eps),
                fmt_f64(cfg.time.t_final),
                fmt_f64(cfg.time.dt),
                fmt_f64(report.dyn_residual[i]),
                fmt_f64(report.proj_residual[i]),
            )
        })
        .collect();
    let footer = format!("# rates {}", rates_json(&report));
    write_csv(&dir.join("sweep_dyn.csv"), header, &rows, Some(&footer))?;

    summary.results = json!({
        "epsilons": report.epsilons,
        "dyn_residual": report.dyn_residual,
        "proj_residual": report.proj_residual,
        "converged": report.converged,
        "rates": rates_json(&report),
    });
    summary.finish()?;
    if report.converged.iter().any(|&c| !c) {
        return Err(CliError::NonConvergence("one or more sweep rows flagged".into()));
    }
    Ok(())
}

/// The self-test battery: f-moments, trial-state decoupling, both gradient
/// checks, and the algebra of the ground-mode projection. Prints one
/// pass/fail line per check.
pub fn run_verify(cfg: &SimulationConfig) -> Result<()> {
    let ws = workspace(cfg)?;
    let dir = out_dir(cfg)?;
    let mut summary = Summary::new("verify", cfg, &dir);
    let mut checks: Vec<(String, bool, String)> = Vec::new();

    // f-moment identities.
    {
        let mut worst1 = 0.0f64;
        let mut worst2 = 0.0f64;
        for &eps in &[1.0, 0.25, 0.05] {
            let f = f_profile(eps, &ws)?;
            worst1 = worst1.max(f.moment(1, &ws).abs());
            worst2 = worst2.max((f.moment(2, &ws) - 1.0 / 3.0).abs());
        }
        checks.push((
            "f-moments".into(),
            worst1 <= 1e-10 && worst2 <= 1e-8,
            format!("|∫fu²| ≤ {worst1:.2e}, |∫f²u² − 1/3| ≤ {worst2:.2e}"),
        ));
    }

    // Decoupling on the trial battery.
    {
        let mut worst = 0.0f64;
        for phi0 in battery(&ws) {
            for &beta in &[0.0, 1.0] {
                let e1 = energy_1d(&phi0, beta, &ws)?.total;
                for &eps in &[0.5, 0.1] {
                    let psi = ws.tensor_with_mode(&phi0, 0)?;
                    let e2 = energy_2d_gauged(&psi, beta, eps, &ws)?.total;
                    worst = worst.max((e2 - 1.0 / eps - e1).abs() / (1.0 + e1.abs()));
                }
            }
        }
        checks.push((
            "decoupling".into(),
            worst <= 1e-6,
            format!("worst relative defect {worst:.2e}"),
        ));
    }

    // Gradient consistency, five random directions each.
    {
        let h = 1e-5;
        let beta = cfg.physics.beta;
        let eps = cfg.physics.epsilon;
        let noisy = cssr_core::ground_state::seed_state_1d(
            &SeedProfile::NoisyGaussian { seed: 17 },
            &ws,
        )?;
        let phi = normalized(noisy, &ws);
        let grad = gradient_1d(&phi, beta, &ws)?;
        let mut worst1 = 0.0f64;
        for s in 0..5u64 {
            let delta = cssr_core::ground_state::seed_state_1d(
                &SeedProfile::NoisyGaussian { seed: 40 + s },
                &ws,
            )?;
            let up = add_scaled_1d(&phi, &delta, h);
            let dn = add_scaled_1d(&phi, &delta, -h);
            let fd = (energy_1d(&up, beta, &ws)?.total - energy_1d(&dn, beta, &ws)?.total)
                / (2.0 * h);
            let dir = 2.0 * ws.inner_1d(&grad, &delta).re;
            worst1 = worst1.max((fd - dir).abs() / (1.0 + fd.abs()));
        }

        let phi2 = {
            let base = ws.tensor_with_mode(&phi, 0)?;
            let mut p = base.clone();
            for (j, mut row) in p.rows_mut().into_iter().enumerate() {
                let y = ws.basis_y.nodes[j];
                for (i, v) in row.iter_mut().enumerate() {
                    let x = ws.grid_x.nodes[i];
                    *v += 0.05
                        * Complex64::new((0.7 * x).sin(), (0.4 * x).cos() * y)
                        * (-0.5 * (x * x + y * y)).exp();
                }
            }
            let norm = ws.mass_2d(&p).sqrt();
            p.mapv(|v| v / norm)
        };
        let grad2 = gradient_2d(&phi2, beta, eps, &ws)?;
        let mut worst2 = 0.0f64;
        for s in 0..5 {
            let delta = Array2::from_shape_fn((ws.m_y(), ws.n_x()), |(j, i)| {
                let y = ws.basis_y.nodes[j];
                let x = ws.grid_x.nodes[i];
                Complex64::new(
                    ((0.3 + s as f64 * 0.17) * x + y).sin(),
                    (0.5 * x - (s as f64) * 0.21 * y).cos(),
                ) * (-0.5 * (x * x + y * y)).exp()
            });
            let up = add_scaled_2d(&phi2, &delta, h);
            let dn = add_scaled_2d(&phi2, &delta, -h);
            let fd = (energy_2d_gauged(&up, beta, eps, &ws)?.total
                - energy_2d_gauged(&dn, beta, eps, &ws)?.total)
                / (2.0 * h);
            let dir = 2.0 * ws.inner_2d(&grad2, &delta).re;
            worst2 = worst2.max((fd - dir).abs() / (1.0 + fd.abs()));
        }
        checks.push((
            "gradients".into(),
            worst1 <= 1e-6 && worst2 <= 1e-5,
            format!("relative FD mismatch 1D {worst1:.2e}, 2D {worst2:.2e}"),
        ));
    }

    // Ground-mode projection algebra.
    {
        let g = ws.harmonic_ground_x();
        let mut a = ws.tensor_with_mode(&g, 0)?;
        for (j, mut row) in a.rows_mut().into_iter().enumerate() {
            let y = ws.basis_y.nodes[j];
            for (i, v) in row.iter_mut().enumerate() {
                let x = ws.grid_x.nodes[i];
                *v += Complex64::new(0.0, 0.3 * y * x) * (-0.5 * (x * x + y * y)).exp();
            }
        }
        let b = ws.tensor_with_mode(&g, 2)?;
        let p1 = project_ground(&a, &ws)?;
        let p2 = project_ground(&p1, &ws)?;
        let idem = {
            let mut d = p2.clone();
            ndarray::Zip::from(&mut d).and(&p1).for_each(|x, &y| *x -= y);
            ws.mass_2d(&d).sqrt()
        };
        let adj = (ws.inner_2d(&p1, &b) - ws.inner_2d(&a, &project_ground(&b, &ws)?)).norm();
        let contract = ws.mass_2d(&p1).sqrt() <= ws.mass_2d(&a).sqrt() + 1e-12;
        checks.push((
            "projection-algebra".into(),
            idem <= 1e-12 && adj <= 1e-12 && contract,
            format!("idempotence {idem:.2e}, self-adjointness {adj:.2e}, contraction {contract}"),
        ));
    }

    let mut all_ok = true;
    for (name, ok, detail) in &checks {
        println!("verify {name}: {} ({detail})", if *ok { "pass" } else { "FAIL" });
        all_ok &= ok;
    }
    summary.results = json!({
        "checks": checks
            .iter()
            .map(|(name, ok, detail)| json!({"name": name, "pass": ok, "detail": detail}))
            .collect::<Vec<_>>(),
        "all_pass": all_ok,
    });
    summary.finish()?;
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Validation("verification battery failed".into()))
    }
}

fn battery(ws: &SpectralWorkspace) -> Vec<WaveFunction1D> {
    let shapes: [&dyn Fn(f64) -> f64; 3] = [
        &|x| (-0.5 * x * x).exp(),
        &|x| (-0.5 * (x - 1.0) * (x - 1.0)).exp(),
        &|x| (-(x - 1.5) * (x - 1.5)).exp() + (-(x + 1.5) * (x + 1.5)).exp(),
    ];
    shapes
        .iter()
        .map(|f| normalized(ws.grid_x.nodes.mapv(|x| Complex64::new(f(x), 0.0)), ws))
        .collect()
}

fn normalized(mut phi: WaveFunction1D, ws: &SpectralWorkspace) -> WaveFunction1D {
    let norm = ws.mass_1d(&phi).sqrt();
    phi.mapv_inplace(|v| v / norm);
    phi
}

fn add_scaled_1d(base: &WaveFunction1D, delta: &WaveFunction1D, h: f64) -> WaveFunction1D {
    let mut out = base.clone();
    ndarray::Zip::from(&mut out).and(delta).for_each(|o, &d| *o += h * d);
    out
}

fn add_scaled_2d(
    base: &Array2<Complex64>,
    delta: &Array2<Complex64>,
    h: f64,
) -> Array2<Complex64> {
    let mut out = base.clone();
    ndarray::Zip::from(&mut out).and(delta).for_each(|o, &d| *o += h * d);
    out
}
