//! Energy functionals and their variational gradients.
//!
//! The 1D functional is the quintic NLS energy
//! ∫ |∂_x φ|² + (π²β²/3)|φ|⁶ + x²|φ|², whose gradient is
//! -∂_x²φ + π²β²|φ|⁴φ + x²φ. The 2D functional is implemented only in the
//! gauged, rescaled frame:
//! (1/ε)⟨φ, H_y φ⟩ + ∫ |(-i∂_x + β a[|φ|²]) φ|² + ∫ x²|φ|²,
//! with the transverse term evaluated diagonally in Hermite coefficients so
//! no O(1/ε) cancellation enters.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::gauge::{convolve_signed, nonlinearity};
use crate::spectral::{SpectralWorkspace, WaveFunction1D, WaveFunction2D};
use crate::{CoreError, Result};

/// Additive decomposition of an energy value, trap units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// ∫ |∂_x φ|² (1D only; folded into `interaction` for the gauged 2D form).
    pub kinetic_x: f64,
    /// Quintic term (π²β²/3)∫|φ|⁶ for 1D, full gauge-kinetic
    /// ∫|(-i∂_x + βa)φ|² for 2D. Nonnegative in both cases.
    pub interaction: f64,
    /// ∫ x² |φ|².
    pub potential_x: f64,
    /// (1/ε) Σ_k λ_k ‖c_k‖² (zero for 1D).
    pub transverse: f64,
    /// Sum of the parts.
    pub total: f64,
}

impl EnergyBreakdown {
    fn assemble(kinetic_x: f64, interaction: f64, potential_x: f64, transverse: f64) -> Self {
        Self {
            kinetic_x,
            interaction,
            potential_x,
            transverse,
            total: kinetic_x + interaction + potential_x + transverse,
        }
    }
}

/// Transverse ground energy e_ε = 1/ε.
pub fn e_eps(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "e_eps requires epsilon > 0, got {epsilon}"
        )));
    }
    Ok(1.0 / epsilon)
}

/// Quintic NLS energy of a 1D field.
pub fn energy_1d(
    phi: &WaveFunction1D,
    beta: f64,
    ws: &SpectralWorkspace,
) -> Result<EnergyBreakdown> {
    ws.check_1d(phi)?;
    let dphi = ws.diff_x_1d(phi)?;
    let kinetic = ws.mass_1d(&dphi);
    let dx = ws.grid_x.step;
    let mut sextic = 0.0;
    let mut potential = 0.0;
    for (&x, z) in ws.grid_x.nodes.iter().zip(phi.iter()) {
        let r = z.norm_sqr();
        sextic += r * r * r;
        potential += x * x * r;
    }
    let pi = std::f64::consts::PI;
    let quintic = pi * pi * beta * beta / 3.0 * sextic * dx;
    Ok(EnergyBreakdown::assemble(kinetic, quintic, potential * dx, 0.0))
}

/// Gauged 2D energy in the rescaled frame.
pub fn energy_2d_gauged(
    phi: &WaveFunction2D,
    beta: f64,
    epsilon: f64,
    ws: &SpectralWorkspace,
) -> Result<EnergyBreakdown> {
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "energy_2d_gauged requires epsilon > 0, got {epsilon}"
        )));
    }
    ws.check_2d(phi)?;
    let dx = ws.grid_x.step;

    let coeffs = ws.to_hermite(phi)?;
    let mut transverse = 0.0;
    for (row, &lambda) in coeffs.rows().into_iter().zip(ws.basis_y.eigenvalues.iter()) {
        transverse += lambda * row.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    transverse *= dx / epsilon;

    let rho = phi.mapv(|z| z.norm_sqr());
    let a = convolve_signed(&rho, ws);
    let dphi = ws.diff_x_2d(phi)?;
    let mut gauge_kinetic = 0.0;
    let mut potential = 0.0;
    for (j, &w) in ws.basis_y.weights.iter().enumerate() {
        let mut row_kin = 0.0;
        let mut row_pot = 0.0;
        for (i, &x) in ws.grid_x.nodes.iter().enumerate() {
            let d = Complex64::new(0.0, -1.0) * dphi[(j, i)] + beta * a[(j, i)] * phi[(j, i)];
            row_kin += d.norm_sqr();
            row_pot += x * x * rho[(j, i)];
        }
        gauge_kinetic += w * row_kin;
        potential += w * row_pot;
    }
    gauge_kinetic *= dx;
    potential *= dx;

    Ok(EnergyBreakdown::assemble(0.0, gauge_kinetic, potential, transverse))
}

/// Variational gradient of the 1D energy: -∂_x²φ + π²β²|φ|⁴φ + x²φ.
pub fn gradient_1d(
    phi: &WaveFunction1D,
    beta: f64,
    ws: &SpectralWorkspace,
) -> Result<WaveFunction1D> {
    ws.check_1d(phi)?;
    // -∂_x² = diff_x applied twice; one transform pair with the squared symbol.
    let ddphi = ws.diff_x_1d(&ws.diff_x_1d(phi)?)?;
    let pi2b2 = (std::f64::consts::PI * beta).powi(2);
    let mut out = WaveFunction1D::zeros(phi.len());
    for (i, o) in out.iter_mut().enumerate() {
        let x = ws.grid_x.nodes[i];
        let p = phi[i];
        let r = p.norm_sqr();
        *o = -ddphi[i] + (x * x + pi2b2 * r * r) * p;
    }
    Ok(out)
}

/// Variational gradient of the gauged 2D energy:
/// (1/ε) H_y φ + H_x φ + f[φ]. This is also the right-hand side of the
/// evolution equation and the drift of the imaginary-time flow.
pub fn gradient_2d(
    phi: &WaveFunction2D,
    beta: f64,
    epsilon: f64,
    ws: &SpectralWorkspace,
) -> Result<WaveFunction2D> {
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "gradient_2d requires epsilon > 0, got {epsilon}"
        )));
    }
    ws.check_2d(phi)?;

    let mut coeffs = ws.to_hermite(phi)?;
    for (mut row, &lambda) in coeffs.rows_mut().into_iter().zip(ws.basis_y.eigenvalues.iter()) {
        row.mapv_inplace(|v| v * (lambda / epsilon));
    }
    let hy_part = ws.from_hermite(&coeffs)?;

    let ddphi = ws.diff_x_2d(&ws.diff_x_2d(phi)?)?;
    let f = nonlinearity(phi, beta, ws)?;

    let mut out = Array2::zeros(phi.dim());
    for (j, mut row) in out.rows_mut().into_iter().enumerate() {
        for (i, o) in row.iter_mut().enumerate() {
            let x = ws.grid_x.nodes[i];
            *o = hy_part[(j, i)] - ddphi[(j, i)] + x * x * phi[(j, i)] + f[(j, i)];
        }
    }
    Ok(out)
}

/// H_x φ = -∂_x²φ + x²φ for 2D fields (linear part diagnostics).
pub(crate) fn apply_hx_2d(phi: &WaveFunction2D, ws: &SpectralWorkspace) -> Result<WaveFunction2D> {
    let ddphi = ws.diff_x_2d(&ws.diff_x_2d(phi)?)?;
    let mut out = Array2::zeros(phi.dim());
    Zip::indexed(&mut out).for_each(|(j, i), o| {
        let x = ws.grid_x.nodes[i];
        *o = -ddphi[(j, i)] + x * x * phi[(j, i)];
    });
    Ok(out)
}

/// H_y φ in node space, via the diagonal coefficient map.
pub(crate) fn apply_hy_2d(phi: &WaveFunction2D, ws: &SpectralWorkspace) -> Result<WaveFunction2D> {
    let mut coeffs = ws.to_hermite(phi)?;
    for (mut row, &lambda) in coeffs.rows_mut().into_iter().zip(ws.basis_y.eigenvalues.iter()) {
        row.mapv_inplace(|v| v * lambda);
    }
    ws.from_hermite(&coeffs)
}
