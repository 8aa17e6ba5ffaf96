//! Shared fixtures for the integration suites: workspaces built once, the
//! trial-profile battery, deterministic random fields, and the erf oracle.

#![allow(dead_code)]

use std::sync::OnceLock;

use cssr_core::{SpectralWorkspace, WaveFunction1D, WaveFunction2D};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn default_ws() -> &'static SpectralWorkspace {
    static WS: OnceLock<SpectralWorkspace> = OnceLock::new();
    WS.get_or_init(SpectralWorkspace::with_defaults)
}

pub fn small_ws() -> &'static SpectralWorkspace {
    static WS: OnceLock<SpectralWorkspace> = OnceLock::new();
    WS.get_or_init(|| SpectralWorkspace::new(128, 12.0, 32).expect("valid"))
}

/// Error function oracle; tests only.
pub fn erf(x: f64) -> f64 {
    statrs::function::erf::erf(x)
}

pub fn normalize_1d(phi: &mut WaveFunction1D, ws: &SpectralWorkspace) {
    let norm = ws.mass_1d(phi).sqrt();
    phi.mapv_inplace(|v| v / norm);
}

pub fn normalize_2d(phi: &mut WaveFunction2D, ws: &SpectralWorkspace) {
    let norm = ws.mass_2d(phi).sqrt();
    phi.mapv_inplace(|v| v / norm);
}

/// Real normalized 1D profile from a shape function.
pub fn profile_from(ws: &SpectralWorkspace, f: impl Fn(f64) -> f64) -> WaveFunction1D {
    let mut phi = ws.grid_x.nodes.mapv(|x| Complex64::new(f(x), 0.0));
    normalize_1d(&mut phi, ws);
    phi
}

/// The trial battery: Gaussian, shifted Gaussian, symmetric double hump.
pub fn trial_battery(ws: &SpectralWorkspace) -> Vec<(&'static str, WaveFunction1D)> {
    vec![
        ("gaussian", profile_from(ws, |x| (-0.5 * x * x).exp())),
        ("shifted", profile_from(ws, |x| (-0.5 * (x - 1.0) * (x - 1.0)).exp())),
        (
            "double-hump",
            profile_from(ws, |x| {
                (-(x - 1.5) * (x - 1.5)).exp() + (-(x + 1.5) * (x + 1.5)).exp()
            }),
        ),
    ]
}

/// Deterministic complex field with Gaussian envelope, resolved on the grid.
pub fn random_field_2d(ws: &SpectralWorkspace, seed: u64) -> WaveFunction2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.2..1.2),
                rng.gen_range(-1.5..1.5),
            )
        })
        .collect();
    Array2::from_shape_fn((ws.m_y(), ws.n_x()), |(j, i)| {
        let y = ws.basis_y.nodes[j];
        let x = ws.grid_x.nodes[i];
        let mut v = Complex64::ZERO;
        for &(ar, ai, k, x0) in &coeffs {
            v += Complex64::new(ar, ai)
                * Complex64::from_polar(1.0, k * x)
                * (-0.5 * ((x - x0) * (x - x0) + y * y)).exp();
        }
        v
    })
}

pub fn random_field_1d(ws: &SpectralWorkspace, seed: u64) -> WaveFunction1D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.2..1.5),
                rng.gen_range(-1.5..1.5),
            )
        })
        .collect();
    WaveFunction1D::from_iter(ws.grid_x.nodes.iter().map(|&x| {
        let mut v = Complex64::ZERO;
        for &(ar, ai, k, x0) in &coeffs {
            v += Complex64::new(ar, ai)
                * Complex64::from_polar(1.0, k * x)
                * (-0.5 * (x - x0) * (x - x0)).exp();
        }
        v
    }))
}

/// Max pointwise modulus of the difference of two 2D fields.
pub fn max_abs_diff_2d(a: &WaveFunction2D, b: &WaveFunction2D) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// L² distance of two 1D fields.
pub fn l2_dist_1d(a: &WaveFunction1D, b: &WaveFunction1D, ws: &SpectralWorkspace) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        acc += (x - y).norm_sqr();
    }
    (acc * ws.grid_x.step).sqrt()
}
