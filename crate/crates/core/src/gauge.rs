//! Gauge-field objects: the sgn-kernel convolution, the transverse profile
//! f(y), the gauged current, the full nonlocal nonlinearity f[φ], and the
//! arctan phase kernel used to reconstruct the ungauged field.
//!
//! The central operator is ρ(x,·) ↦ -π ∫ sgn(y - ν) ρ(x, ν) dν, nonlocal in y
//! only. It is applied through the workspace's precomputed node-space kernel,
//! which integrates the Hermite interpolant of ρ exactly; the sgn(0) = 0
//! convention survives as the measure-zero diagonal of the kernel.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::hermite::integrate_panels;
use crate::spectral::{real_matmul, SpectralWorkspace, WaveFunction2D};
use crate::{CoreError, Result};

/// x component of the gauged vector potential, a = ((T₀)_x ∗ ρ)(x, y).
#[derive(Debug, Clone)]
pub struct GaugePotentialX {
    /// Real field on the (m_y, n_x) grid, units of inverse length.
    pub a: Array2<f64>,
}

impl GaugePotentialX {
    /// The zero potential (used for ungauged currents).
    pub fn zero(ws: &SpectralWorkspace) -> Self {
        Self { a: Array2::zeros((ws.m_y(), ws.n_x())) }
    }
}

/// x component of the gauged current J_A(ψ).
#[derive(Debug, Clone)]
pub struct CurrentX {
    pub j: Array2<f64>,
}

/// Sgn-kernel convolution a(x, y) = -π ∫ sgn(y - ν) ρ(x, ν) dν of a
/// nonnegative density.
pub fn t_convolve(rho: &Array2<f64>, ws: &SpectralWorkspace) -> Result<GaugePotentialX> {
    if rho.dim() != (ws.m_y(), ws.n_x()) {
        return Err(CoreError::Shape {
            expected: format!("({}, {})", ws.m_y(), ws.n_x()),
            got: format!("({}, {})", rho.dim().0, rho.dim().1),
        });
    }
    let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-12 {
        return Err(CoreError::Domain(format!(
            "t_convolve expects a nonnegative density; min entry {min:.3e}"
        )));
    }
    Ok(GaugePotentialX { a: convolve_signed(rho, ws) })
}

/// Same cumulative kernel without the positivity check; the nested
/// convolution in f[φ] applies it to signed integrands.
pub(crate) fn convolve_signed(field: &Array2<f64>, ws: &SpectralWorkspace) -> Array2<f64> {
    real_matmul(ws.sgn_kernel(), field)
}

/// Transverse profile f(y) = ∫ sgn(y - ν) u_ε²(ν) dν for the normalized
/// Gaussian u_ε² = (πε)^{-1/2} e^{-ν²/ε}, evaluated by panel quadrature of
/// the cumulative integral. Odd by construction; f(±∞) → ±(quadrature mass).
#[derive(Debug, Clone)]
pub struct FProfile {
    epsilon: f64,
    mass: f64,
}

/// Build the f(y) evaluator for scale ε.
pub fn f_profile(epsilon: f64, _ws: &SpectralWorkspace) -> Result<FProfile> {
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "f_profile requires epsilon > 0, got {epsilon}"
        )));
    }
    let cut = 13.0 * epsilon.sqrt();
    let mass = 2.0 * half_cumulative(epsilon, cut);
    Ok(FProfile { epsilon, mass })
}

/// 2 ∫_0^y u_ε², the odd part of the cumulative density.
fn half_cumulative(epsilon: f64, y: f64) -> f64 {
    let norm = 1.0 / (std::f64::consts::PI * epsilon).sqrt();
    integrate_panels(|t| norm * (-t * t / epsilon).exp(), 0.0, y, 0.5 * epsilon.sqrt())
}

impl FProfile {
    /// f(y), exactly odd in y.
    pub fn eval(&self, y: f64) -> f64 {
        let cut = 13.0 * self.epsilon.sqrt();
        let r = y.abs().min(cut);
        let half = 2.0 * half_cumulative(self.epsilon, r);
        if y < 0.0 {
            -half
        } else if y > 0.0 {
            half
        } else {
            0.0
        }
    }

    /// Total quadrature mass ∫ u_ε², the limit of |f| at ±∞.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Moment ∫ f(y)^p u_ε²(y) dy, computed on the √ε-rescaled Gauss–Hermite
    /// grid where the Gaussian weight is integrated exactly.
    pub fn moment(&self, p: u32, ws: &SpectralWorkspace) -> f64 {
        let se = self.epsilon.sqrt();
        let mut acc = 0.0;
        for (j, &t) in ws.basis_y.nodes.iter().enumerate() {
            let u1 = ws.basis_y.mode_matrix[(0, j)];
            acc += ws.basis_y.weights[j] * self.eval(se * t).powi(p as i32) * u1 * u1;
        }
        acc
    }
}

/// Gauged current x component j = Re[ψ̄ (-i ∂_x ψ + a ψ)].
pub fn current_x(
    psi: &WaveFunction2D,
    a: &GaugePotentialX,
    ws: &SpectralWorkspace,
) -> Result<CurrentX> {
    ws.check_2d(psi)?;
    let dpsi = ws.diff_x_2d(psi)?;
    let mut j = Array2::zeros((ws.m_y(), ws.n_x()));
    Zip::from(&mut j)
        .and(psi)
        .and(&dpsi)
        .and(&a.a)
        .for_each(|jv, &p, &dp, &av| {
            *jv = (p.conj() * dp).im + av * p.norm_sqr();
        });
    Ok(CurrentX { j })
}

/// Full gauge nonlinearity
/// f[φ] = β² a² φ − iβ a ∂_x φ − iβ ∂_x(a φ) − 2β [(T₀)_x ∗ (j₀ + β a |φ|²)] φ
/// with a = (T₀)_x ∗ |φ|² and j₀ the ungauged current.
pub fn nonlinearity(
    phi: &WaveFunction2D,
    beta: f64,
    ws: &SpectralWorkspace,
) -> Result<WaveFunction2D> {
    ws.check_2d(phi)?;
    if beta == 0.0 {
        return Ok(Array2::zeros((ws.m_y(), ws.n_x())));
    }
    let rho = phi.mapv(|z| z.norm_sqr());
    let a = convolve_signed(&rho, ws);
    let dphi = ws.diff_x_2d(phi)?;

    // a φ and its spectral x derivative for the symmetrized transport term.
    let mut a_phi = Array2::zeros(phi.dim());
    Zip::from(&mut a_phi).and(phi).and(&a).for_each(|o, &p, &av| *o = p * av);
    let d_a_phi = ws.diff_x_2d(&a_phi)?;

    // Signed integrand of the nested convolution: j₀ + β a ρ.
    let mut w = Array2::zeros(phi.dim());
    Zip::from(&mut w)
        .and(phi)
        .and(&dphi)
        .and(&a)
        .and(&rho)
        .for_each(|o, &p, &dp, &av, &r| {
            *o = (p.conj() * dp).im + beta * av * r;
        });
    let nested = convolve_signed(&w, ws);

    let mut out = Array2::zeros(phi.dim());
    let ib = Complex64::new(0.0, beta);
    Zip::from(&mut out)
        .and(phi)
        .and(&dphi)
        .and(&d_a_phi)
        .and(&a)
        .for_each(|o, &p, &dp, &dap, &av| {
            *o = (beta * beta * av * av) * p - ib * av * dp - ib * dap;
        });
    Zip::from(&mut out).and(phi).and(&nested).for_each(|o, &p, &cv| {
        *o -= 2.0 * beta * cv * p;
    });
    Ok(out)
}

/// Principal-branch phase kernel S(Δx, Δy) = arctan(Δy/Δx), with the x = 0
/// line set to ±π/2 by the sign of Δy and S(0, 0) = 0. The kernel is only
/// defined up to the distributional sgn correction; this branch is documented
/// rather than canonical.
pub(crate) fn arctan_kernel(dx: f64, dy: f64) -> f64 {
    if dx == 0.0 {
        if dy == 0.0 {
            0.0
        } else {
            0.5 * std::f64::consts::PI * dy.signum()
        }
    } else {
        (dy / dx).atan()
    }
}

/// Phase field S[ρ](x, y) = Σ S(x - x', y - y') ρ(x', y') w(x', y') evaluated
/// at a single point by direct quadrature over the workspace grid.
pub fn s_phase_at(rho: &Array2<f64>, x: f64, y: f64, ws: &SpectralWorkspace) -> f64 {
    let dx = ws.grid_x.step;
    let mut acc = 0.0;
    for (j, &yj) in ws.basis_y.nodes.iter().enumerate() {
        let wj = ws.basis_y.weights[j] * dx;
        for (i, &xi) in ws.grid_x.nodes.iter().enumerate() {
            let r = rho[(j, i)];
            if r != 0.0 {
                acc += wj * r * arctan_kernel(x - xi, y - yj);
            }
        }
    }
    acc
}

/// Phase field S[ρ] on the whole grid. Direct O(N²) quadrature — desk scale
/// only, intended for reconstruction and diagnostics.
pub fn s_phase(rho: &Array2<f64>, ws: &SpectralWorkspace) -> Result<Array2<f64>> {
    if rho.dim() != (ws.m_y(), ws.n_x()) {
        return Err(CoreError::Shape {
            expected: format!("({}, {})", ws.m_y(), ws.n_x()),
            got: format!("({}, {})", rho.dim().0, rho.dim().1),
        });
    }
    let mut out = Array2::zeros(rho.dim());
    for (j, &yj) in ws.basis_y.nodes.iter().enumerate() {
        for (i, &xi) in ws.grid_x.nodes.iter().enumerate() {
            out[(j, i)] = s_phase_at(rho, xi, yj, ws);
        }
    }
    Ok(out)
}
