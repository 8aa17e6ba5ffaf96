//! Ground-state flow invariants: variational ordering against the trial
//! battery, monotonicity in the coupling, seed independence, the energy
//! upper bound E²ᴰ_ε ≤ e_ε + E¹ᴰ, and warm-start economy.

mod common;

use std::sync::OnceLock;

use common::trial_battery;
use cssr_core::{
    e_eps, energy_1d, minimize_1d, minimize_2d, FlowConfig, SpectralWorkspace, SeedProfile,
};

fn med_ws() -> &'static SpectralWorkspace {
    static WS: OnceLock<SpectralWorkspace> = OnceLock::new();
    WS.get_or_init(|| SpectralWorkspace::new(128, 12.0, 48).expect("valid"))
}

fn flow_cfg() -> FlowConfig {
    FlowConfig { tau: 2e-3, ..FlowConfig::default() }
}

#[test]
fn minimizer_beats_every_trial_state() {
    let ws = med_ws();
    let beta = 1.0;
    let result = minimize_1d(beta, &flow_cfg(), ws).unwrap();
    assert!(result.converged);
    assert!((ws.mass_1d(&result.state) - 1.0).abs() < 1e-10);
    for (name, trial) in trial_battery(ws) {
        let e = energy_1d(&trial, beta, ws).unwrap().total;
        assert!(
            result.energy.total <= e + 1e-10,
            "{name}: E_min = {} > E_trial = {e}",
            result.energy.total
        );
    }
}

#[test]
fn ground_energy_grows_with_coupling() {
    let ws = med_ws();
    let cfg = flow_cfg();
    let e0 = minimize_1d(0.0, &cfg, ws).unwrap().energy.total;
    let e1 = minimize_1d(1.0, &cfg, ws).unwrap().energy.total;
    let e2 = minimize_1d(2.0, &cfg, ws).unwrap().energy.total;
    assert!(e2 > e1 && e1 > e0, "E(2) = {e2}, E(1) = {e1}, E(0) = {e0}");
}

#[test]
fn gaussian_and_noisy_seeds_find_the_same_minimum() {
    let ws = med_ws();
    let beta = 1.0;
    let clean = minimize_1d(beta, &flow_cfg(), ws).unwrap();
    let noisy_cfg = FlowConfig {
        seed_profile: SeedProfile::NoisyGaussian { seed: 12345 },
        ..flow_cfg()
    };
    let noisy = minimize_1d(beta, &noisy_cfg, ws).unwrap();
    assert!(clean.converged && noisy.converged);
    assert!(
        (clean.energy.total - noisy.energy.total).abs() <= 1e-6,
        "{} vs {}",
        clean.energy.total,
        noisy.energy.total
    );
}

#[test]
fn gauged_ground_state_obeys_the_energy_upper_bound() {
    let ws = med_ws();
    let beta = 1.0;
    let eps = 0.25;
    let cfg = flow_cfg();
    let base = minimize_1d(beta, &cfg, ws).unwrap();
    let e1d = base.energy.total;

    // Warm start from the factorized ansatz φ₁ᴰ(x) u₁(y).
    let warm_seed = ws.tensor_with_mode(&base.state, 0).unwrap();
    let warm_cfg = FlowConfig {
        seed_profile: SeedProfile::State2D(warm_seed),
        ..cfg.clone()
    };
    let warm = minimize_2d(beta, eps, &warm_cfg, ws).unwrap();
    assert!(warm.converged);
    let gap = warm.energy.total - e_eps(eps).unwrap();
    assert!(gap <= e1d + 1e-4, "E²ᴰ − e_ε = {gap} exceeds E¹ᴰ = {e1d}");
    assert!(gap > e1d - 0.1, "E²ᴰ − e_ε = {gap} implausibly far below E¹ᴰ = {e1d}");

    // Same minimum from a noisy start, in more iterations.
    let noisy_cfg = FlowConfig {
        seed_profile: SeedProfile::NoisyGaussian { seed: 99 },
        ..cfg
    };
    let noisy = minimize_2d(beta, eps, &noisy_cfg, ws).unwrap();
    assert!(noisy.converged);
    assert!(
        (noisy.energy.total - warm.energy.total).abs() <= 1e-6,
        "{} vs {}",
        noisy.energy.total,
        warm.energy.total
    );
    assert!(
        warm.iterations < noisy.iterations,
        "warm {} vs noisy {}",
        warm.iterations,
        noisy.iterations
    );
}

#[test]
fn flow_reports_unit_mass_and_monotone_history() {
    let ws = med_ws();
    let cfg = FlowConfig {
        seed_profile: SeedProfile::NoisyGaussian { seed: 5 },
        ..flow_cfg()
    };
    let r = minimize_2d(0.5, 0.5, &cfg, ws).unwrap();
    assert!((ws.mass_2d(&r.state) - 1.0).abs() <= 1e-10);
    for w in r.energy_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    assert!(r.converged);
    assert!(r.residual <= cfg.tol_residual);
}
