//! Hermite special-function layer: orthonormal oscillator eigenfunctions,
//! Gauss–Hermite collocation, Gauss–Legendre panels, and cumulative integrals
//! of the eigenfunctions.
//!
//! Everything here is plain `f64` and allocation-light; the spectral workspace
//! assembles these pieces into matrices once at construction.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{CoreError, Result};

/// Values of the orthonormal Hermite functions ĥ_0 … ĥ_{m-1} at `y`,
/// ĥ_k(y) = H_k(y) e^{-y²/2} / √(2^k k! √π).
///
/// These are the eigenfunctions of -∂_y² + y² with eigenvalues 2k + 1. The
/// three-term recurrence ĥ_k = √(2/k) y ĥ_{k-1} − √((k−1)/k) ĥ_{k-2} is
/// stable and overflow-free for all k and y of interest.
pub fn hermite_functions(m: usize, y: f64) -> Vec<f64> {
    let mut h = vec![0.0; m];
    if m == 0 {
        return h;
    }
    h[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * y * y).exp();
    if m > 1 {
        h[1] = std::f64::consts::SQRT_2 * y * h[0];
    }
    for k in 2..m {
        let kf = k as f64;
        h[k] = (2.0 / kf).sqrt() * y * h[k - 1] - ((kf - 1.0) / kf).sqrt() * h[k - 2];
    }
    h
}

/// Gauss–Hermite nodes and *folded* weights of order `m`.
///
/// The folded weights w̃_j = w_j e^{y_j²} make ∫ g(y) dy ≈ Σ_j w̃_j g(y_j)
/// exact for g = p(y)·e^{-y²} with deg p ≤ 2m−1, i.e. for every pairwise
/// product of the first m oscillator eigenfunctions. They are computed as
/// w̃_j = 1/(m ĥ_{m-1}(y_j)²), which never over- or underflows.
///
/// Nodes come from the symmetric tridiagonal Jacobi matrix and are
/// symmetrized about 0 so that mirror pairs are exact negatives.
pub fn gauss_hermite(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m < 2 {
        return Err(CoreError::Config(format!(
            "Gauss-Hermite order must be at least 2, got {m}"
        )));
    }
    let jacobi = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i + 1 == j {
            (0.5 * j as f64).sqrt()
        } else if j + 1 == i {
            (0.5 * i as f64).sqrt()
        } else {
            0.0
        }
    });
    let eigen = SymmetricEigen::new(jacobi);
    let mut nodes: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Enforce exact mirror symmetry: the Jacobi spectrum is symmetric about 0
    // in exact arithmetic, and downstream sign identities rely on it.
    let half = m / 2;
    for j in 0..half {
        let s = 0.5 * (nodes[m - 1 - j] - nodes[j]);
        nodes[j] = -s;
        nodes[m - 1 - j] = s;
    }
    if m % 2 == 1 {
        nodes[half] = 0.0;
    }

    let mut weights = vec![0.0; m];
    for j in 0..m {
        let h = hermite_functions(m, nodes[j]);
        weights[j] = 1.0 / (m as f64 * h[m - 1] * h[m - 1]);
    }
    for j in 0..half {
        let w = 0.5 * (weights[j] + weights[m - 1 - j]);
        weights[j] = w;
        weights[m - 1 - j] = w;
    }
    Ok((nodes, weights))
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence from Chebyshev initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for j in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (j as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..64 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[j] = -x;
        nodes[n - 1 - j] = x;
        weights[j] = w;
        weights[n - 1 - j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the ascending recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// ∫_a^b f(t) dt by composite Gauss–Legendre with panels no wider than
/// `max_panel`. Spectrally accurate panel-wise for smooth integrands.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, max_panel: f64) -> f64 {
    const ORDER: usize = 20;
    if a == b {
        return 0.0;
    }
    let (gl_nodes, gl_weights) = gauss_legendre(ORDER);
    let span = b - a;
    let n_panels = (span.abs() / max_panel).ceil().max(1.0) as usize;
    let h = span / n_panels as f64;
    let mut total = 0.0;
    for p in 0..n_panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut acc = 0.0;
        for (t, w) in gl_nodes.iter().zip(&gl_weights) {
            acc += w * f(mid + 0.5 * h * t);
        }
        total += acc * 0.5 * h;
    }
    total
}

/// Cumulative integrals A_k(y) = ∫_{-∞}^y ĥ_k(t) dt for k = 0 … m-1.
///
/// A_0 is the scaled Gaussian CDF, evaluated by quadrature; A_1 = -√2 ĥ_0;
/// the rest follow from integrating the ladder identity
/// ĥ_k' = √(k/2) ĥ_{k-1} − √((k+1)/2) ĥ_{k+1}, i.e.
/// A_{k+1} = (√(k/2) A_{k-1} − ĥ_k) / √((k+1)/2).
/// The recurrence is contracting, so forward evaluation is stable.
pub fn hermite_cumulatives(m: usize, y: f64) -> Vec<f64> {
    let h = hermite_functions(m.max(2), y);
    let mut a = vec![0.0; m];
    if m == 0 {
        return a;
    }
    // ∫_{-∞}^y e^{-t²/2} dt = √(π/2) + ∫_0^y e^{-t²/2} dt, tail truncated
    // where the integrand is below 1e-60.
    let pi = std::f64::consts::PI;
    let y_clamped = y.clamp(-17.0, 17.0);
    let half_gauss =
        integrate_panels(|t| (-0.5 * t * t).exp(), 0.0, y_clamped, 0.5) + (0.5 * pi).sqrt();
    a[0] = pi.powf(-0.25) * half_gauss;
    if m > 1 {
        a[1] = -std::f64::consts::SQRT_2 * h[0];
    }
    for k in 1..m.saturating_sub(1) {
        let kf = k as f64;
        a[k + 1] = ((0.5 * kf).sqrt() * a[k - 1] - h[k]) / (0.5 * (kf + 1.0)).sqrt();
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_ground_mode_is_gaussian() {
        let h = hermite_functions(4, 0.7);
        let expected = std::f64::consts::PI.powf(-0.25) * (-0.245f64).exp();
        assert!((h[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn gauss_hermite_is_exact_for_eigenfunction_products() {
        let m = 24;
        let (nodes, weights) = gauss_hermite(m).unwrap();
        // ⟨ĥ_j, ĥ_k⟩ = δ_jk under the folded weights.
        for j in [0usize, 3, 11, 23] {
            for k in [0usize, 3, 11, 23] {
                let mut acc = 0.0;
                for (y, w) in nodes.iter().zip(&weights) {
                    let h = hermite_functions(m, *y);
                    acc += w * h[j] * h[k];
                }
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (acc - expected).abs() < 1e-13,
                    "⟨h_{j}, h_{k}⟩ = {acc}"
                );
            }
        }
    }

    #[test]
    fn gauss_hermite_nodes_are_mirror_symmetric() {
        let (nodes, weights) = gauss_hermite(64).unwrap();
        for j in 0..32 {
            assert_eq!(nodes[j], -nodes[63 - j]);
            assert_eq!(weights[j], weights[63 - j]);
        }
    }

    #[test]
    fn gauss_hermite_rejects_tiny_order() {
        assert!(gauss_hermite(1).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(8);
        // ∫_{-1}^1 t^10 dt = 2/11 needs order ≥ 6; order 8 is exact to deg 15.
        let val: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| w * t.powi(10))
            .sum();
        assert!((val - 2.0 / 11.0).abs() < 1e-15);
        let total: f64 = weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn panel_integration_handles_reversed_limits() {
        let fwd = integrate_panels(|t| t * t, 0.0, 2.0, 0.3);
        let rev = integrate_panels(|t| t * t, 2.0, 0.0, 0.3);
        assert!((fwd - 8.0 / 3.0).abs() < 1e-13);
        assert!((fwd + rev).abs() < 1e-13);
    }

    #[test]
    fn cumulatives_match_direct_quadrature() {
        // A_k(y) against brute-force panel quadrature of ĥ_k from the far tail.
        let m = 40;
        for &y in &[0.73, -2.2, 3.7] {
            let a = hermite_cumulatives(m, y);
            for &k in &[0usize, 1, 7, 26, 39] {
                let direct =
                    integrate_panels(|t| hermite_functions(m, t)[k], -14.0, y, 0.05);
                assert!(
                    (a[k] - direct).abs() < 1e-9,
                    "k={k} y={y}: {} vs {}",
                    a[k],
                    direct
                );
            }
        }
    }

    #[test]
    fn cumulatives_reach_the_full_integral() {
        // A_k(+∞): √2 π^{1/4} for k = 0, zero for odd k.
        let a = hermite_cumulatives(6, 17.0);
        let expected = std::f64::consts::SQRT_2 * std::f64::consts::PI.powf(0.25);
        assert!((a[0] - expected).abs() < 1e-12);
        assert!(a[1].abs() < 1e-12);
        assert!(a[3].abs() < 1e-12);
    }
}
