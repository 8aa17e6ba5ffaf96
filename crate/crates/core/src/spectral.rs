//! Discretization substrate: the periodic Fourier grid along the loose x
//! direction, the Hermite oscillator eigenbasis along the tight y direction,
//! and the transforms, derivatives, quadrature and norms built on them.
//!
//! 2D fields are stored as `Array2<Complex64>` with shape `(m_y, n_x)`:
//! row j holds the x-profile at the j-th Hermite collocation node, so the
//! x index is contiguous. Hermite coefficient arrays share the same shape
//! with row k holding the coefficient of the k-th eigenfunction.
//!
//! The y direction deliberately uses the eigenbasis of `H_y = -∂_y² + y²`
//! rather than a grid: the stiff `(1/ε) H_y` factor then has an exact
//! diagonal propagator and the ground-mode projection is a coefficient
//! selection, so ε never constrains the time step.

use std::sync::Arc;

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::hermite::{gauss_hermite, hermite_cumulatives, hermite_functions};
use crate::{CoreError, Result};

/// Complex field on the x grid.
pub type WaveFunction1D = Array1<Complex64>;
/// Complex field on the x ⊗ y tensor grid, shape `(m_y, n_x)`.
pub type WaveFunction2D = Array2<Complex64>;

/// Uniform periodic grid on [-l_x, l_x) with conjugate Fourier wavenumbers.
#[derive(Debug, Clone)]
pub struct GridX {
    /// Point count, a power of two.
    pub n_x: usize,
    /// Half-width of the domain in trap units.
    pub l_x: f64,
    /// Grid spacing 2 l_x / n_x.
    pub step: f64,
    /// Nodes x_i = -l_x + i·step.
    pub nodes: Array1<f64>,
    /// Wavenumbers in FFT order, Nyquist zeroed so the multiset is symmetric
    /// about 0 and spectral differentiation is exactly anti-self-adjoint.
    pub wavenumbers: Array1<f64>,
}

impl GridX {
    pub fn new(n_x: usize, l_x: f64) -> Result<Self> {
        if n_x < 16 || !n_x.is_power_of_two() {
            return Err(CoreError::Config(format!(
                "n_x must be a power of two and at least 16, got {n_x}"
            )));
        }
        if !(l_x > 0.0) {
            return Err(CoreError::Config(format!("l_x must be positive, got {l_x}")));
        }
        let step = 2.0 * l_x / n_x as f64;
        let nodes = Array1::from_iter((0..n_x).map(|i| -l_x + i as f64 * step));
        let dk = std::f64::consts::PI / l_x;
        let wavenumbers = Array1::from_iter((0..n_x).map(|j| {
            if j == n_x / 2 {
                0.0
            } else if j <= n_x / 2 {
                j as f64 * dk
            } else {
                (j as f64 - n_x as f64) * dk
            }
        }));
        Ok(Self { n_x, l_x, step, nodes, wavenumbers })
    }
}

/// Gauss–Hermite collocation data for the tight direction.
#[derive(Debug, Clone)]
pub struct HermiteBasisY {
    /// Mode count (= node count).
    pub m_y: usize,
    /// Collocation nodes, symmetric about 0, ascending.
    pub nodes: Array1<f64>,
    /// Folded quadrature weights: ∫ g dy ≈ Σ w̃_j g(y_j) for Gaussian-weighted g.
    pub weights: Array1<f64>,
    /// Eigenvalues λ_k = 2k − 1 of H_y for k = 1..m_y.
    pub eigenvalues: Array1<f64>,
    /// mode_matrix[(k, j)] = u_{1,k+1}(y_j), node values of the orthonormal
    /// eigenfunctions; row 0 is the ground mode u₁(y) = π^{-1/4} e^{-y²/2}.
    pub mode_matrix: Array2<f64>,
}

impl HermiteBasisY {
    pub fn new(m_y: usize) -> Result<Self> {
        if m_y < 4 {
            return Err(CoreError::Config(format!(
                "m_y must be at least 4, got {m_y}"
            )));
        }
        let (nodes, weights) = gauss_hermite(m_y)?;
        let mut mode_matrix = Array2::zeros((m_y, m_y));
        for (j, &y) in nodes.iter().enumerate() {
            let h = hermite_functions(m_y, y);
            for k in 0..m_y {
                mode_matrix[(k, j)] = h[k];
            }
        }
        let eigenvalues = Array1::from_iter((0..m_y).map(|k| 2.0 * k as f64 + 1.0));
        Ok(Self {
            m_y,
            nodes: Array1::from(nodes),
            weights: Array1::from(weights),
            eigenvalues,
            mode_matrix,
        })
    }

    /// Ground transverse mode u₁ sampled at the nodes.
    pub fn ground_mode(&self) -> Array1<f64> {
        self.mode_matrix.row(0).to_owned()
    }
}

/// Immutable bundle of grids, transform matrices and FFT plans shared by all
/// operations. Construction is the only expensive step; afterwards the
/// workspace can be shared freely across threads.
pub struct SpectralWorkspace {
    pub grid_x: GridX,
    pub basis_y: HermiteBasisY,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    /// analysis[(k, j)] = w̃_j u_{1,k+1}(y_j); coefficients c = analysis · ψ.
    analysis: Array2<f64>,
    /// synthesis = mode_matrixᵀ; node values ψ = synthesis · c.
    synthesis: Array2<f64>,
    /// Node-space matrix of ρ(·) ↦ -π ∫ sgn(y - ν) ρ(ν) dν, built from exact
    /// cumulative integrals of the interpolating Hermite expansion.
    sgn_kernel: Array2<f64>,
}

impl SpectralWorkspace {
    pub fn new(n_x: usize, l_x: f64, m_y: usize) -> Result<Self> {
        let grid_x = GridX::new(n_x, l_x)?;
        let basis_y = HermiteBasisY::new(m_y)?;

        let mut planner = FftPlanner::<f64>::new();
        let fft_fwd = planner.plan_fft_forward(n_x);
        let fft_inv = planner.plan_fft_inverse(n_x);

        let mut analysis = basis_y.mode_matrix.clone();
        for mut row in analysis.rows_mut() {
            Zip::from(&mut row).and(&basis_y.weights).for_each(|a, &w| *a *= w);
        }
        let synthesis = basis_y.mode_matrix.t().to_owned();

        // cumulative[(j, k)] = ∫_{-∞}^{y_j} u_{1,k+1}
        let mut cumulative = Array2::zeros((m_y, m_y));
        for (j, &y) in basis_y.nodes.iter().enumerate() {
            let a = hermite_cumulatives(m_y, y);
            for k in 0..m_y {
                cumulative[(j, k)] = a[k];
            }
        }
        // -π (2 ∫_{-∞}^{y} ρ̂ - ∫ ρ̂), with ρ̂ the Hermite interpolant of ρ.
        let mut sgn_kernel = cumulative.dot(&analysis);
        let pi = std::f64::consts::PI;
        for j in 0..m_y {
            for l in 0..m_y {
                sgn_kernel[(j, l)] =
                    -pi * (2.0 * sgn_kernel[(j, l)] - basis_y.weights[l]);
            }
        }
        // The exact kernel is odd under the simultaneous mirror
        // (j, l) → (m-1-j, m-1-l); restoring that symmetry exactly keeps
        // even densities mapping to exactly odd potentials.
        for j in 0..m_y {
            for l in 0..m_y {
                if j * m_y + l < (m_y - 1 - j) * m_y + (m_y - 1 - l) {
                    let v = 0.5 * (sgn_kernel[(j, l)] - sgn_kernel[(m_y - 1 - j, m_y - 1 - l)]);
                    sgn_kernel[(j, l)] = v;
                    sgn_kernel[(m_y - 1 - j, m_y - 1 - l)] = -v;
                }
            }
        }
        if m_y % 2 == 1 {
            let c = m_y / 2;
            sgn_kernel[(c, c)] = 0.0;
        }

        Ok(Self { grid_x, basis_y, fft_fwd, fft_inv, analysis, synthesis, sgn_kernel })
    }

    /// Default desk-scale discretization: n_x = 256, l_x = 12, m_y = 64.
    pub fn with_defaults() -> Self {
        Self::new(256, 12.0, 64).expect("default workspace parameters are valid")
    }

    pub fn n_x(&self) -> usize {
        self.grid_x.n_x
    }

    pub fn m_y(&self) -> usize {
        self.basis_y.m_y
    }

    pub(crate) fn sgn_kernel(&self) -> &Array2<f64> {
        &self.sgn_kernel
    }

    /// Unnormalized forward FFT of one contiguous x row.
    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        self.fft_fwd.process(buf);
    }

    /// Unnormalized inverse FFT; callers fold the 1/n into their multipliers.
    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.fft_inv.process(buf);
    }

    pub(crate) fn check_1d(&self, psi: &WaveFunction1D) -> Result<()> {
        if psi.len() != self.grid_x.n_x {
            return Err(CoreError::Shape {
                expected: format!("{}", self.grid_x.n_x),
                got: format!("{}", psi.len()),
            });
        }
        Ok(())
    }

    pub(crate) fn check_2d(&self, psi: &WaveFunction2D) -> Result<()> {
        if psi.dim() != (self.basis_y.m_y, self.grid_x.n_x) {
            return Err(CoreError::Shape {
                expected: format!("({}, {})", self.basis_y.m_y, self.grid_x.n_x),
                got: format!("({}, {})", psi.dim().0, psi.dim().1),
            });
        }
        Ok(())
    }

    /// Hermite analysis: c_k(x) = Σ_j w̃_j ψ(x, y_j) u_{1,k+1}(y_j).
    pub fn to_hermite(&self, psi: &WaveFunction2D) -> Result<Array2<Complex64>> {
        self.check_2d(psi)?;
        Ok(real_complex_matmul(&self.analysis, psi))
    }

    /// Hermite synthesis, the exact inverse of [`Self::to_hermite`] on node data.
    pub fn from_hermite(&self, coeffs: &Array2<Complex64>) -> Result<WaveFunction2D> {
        self.check_2d(coeffs)?;
        Ok(real_complex_matmul(&self.synthesis, coeffs))
    }

    /// Spectral x derivative of a 1D field.
    pub fn diff_x_1d(&self, psi: &WaveFunction1D) -> Result<WaveFunction1D> {
        self.check_1d(psi)?;
        let mut buf = psi.to_vec();
        self.fft_fwd.process(&mut buf);
        for (v, &k) in buf.iter_mut().zip(self.grid_x.wavenumbers.iter()) {
            *v *= Complex64::new(0.0, k);
        }
        self.fft_inv.process(&mut buf);
        let scale = 1.0 / self.grid_x.n_x as f64;
        Ok(Array1::from_iter(buf.into_iter().map(|v| v * scale)))
    }

    /// Spectral x derivative applied row-wise to a 2D field.
    pub fn diff_x_2d(&self, psi: &WaveFunction2D) -> Result<WaveFunction2D> {
        self.check_2d(psi)?;
        let mut out = psi.clone();
        self.diff_x_2d_in_place(&mut out);
        Ok(out)
    }

    pub(crate) fn diff_x_2d_in_place(&self, psi: &mut WaveFunction2D) {
        let n = self.grid_x.n_x;
        let scale = 1.0 / n as f64;
        for mut row in psi.rows_mut() {
            let buf = row.as_slice_mut().expect("fields are standard layout");
            self.fft_fwd.process(buf);
            for (v, &k) in buf.iter_mut().zip(self.grid_x.wavenumbers.iter()) {
                *v *= Complex64::new(0.0, k * scale);
            }
            self.fft_inv.process(buf);
        }
    }

    /// Spectral y derivative via the Hermite ladder
    /// d_k = √((k+1)/2) c_{k+1} − √(k/2) c_{k-1}.
    pub fn diff_y(&self, psi: &WaveFunction2D) -> Result<WaveFunction2D> {
        let c = self.to_hermite(psi)?;
        let m = self.basis_y.m_y;
        let mut d = Array2::zeros(c.dim());
        for k in 0..m {
            let up = 0.5 * (k as f64 + 1.0);
            let dn = 0.5 * k as f64;
            let mut row = d.row_mut(k);
            if k + 1 < m {
                row.assign(&c.row(k + 1).mapv(|v| v * up.sqrt()));
            }
            if k > 0 {
                let lower = c.row(k - 1).mapv(|v| v * dn.sqrt());
                row -= &lower;
            }
        }
        self.from_hermite(&d)
    }

    /// L² mass ‖φ‖² of a 1D field by uniform quadrature.
    pub fn mass_1d(&self, phi: &WaveFunction1D) -> f64 {
        self.grid_x.step * phi.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// L² mass ‖ψ‖² of a 2D field by tensor quadrature.
    pub fn mass_2d(&self, psi: &WaveFunction2D) -> f64 {
        let mut acc = 0.0;
        for (row, &w) in psi.rows().into_iter().zip(self.basis_y.weights.iter()) {
            acc += w * row.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        acc * self.grid_x.step
    }

    /// Hermitian inner product ⟨a, b⟩ = ∫ ā b of 1D fields.
    pub fn inner_1d(&self, a: &WaveFunction1D, b: &WaveFunction1D) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (x, y) in a.iter().zip(b.iter()) {
            acc += x.conj() * y;
        }
        acc * self.grid_x.step
    }

    /// Hermitian inner product of 2D fields.
    pub fn inner_2d(&self, a: &WaveFunction2D, b: &WaveFunction2D) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for ((ra, rb), &w) in a
            .rows()
            .into_iter()
            .zip(b.rows())
            .zip(self.basis_y.weights.iter())
        {
            let mut s = Complex64::ZERO;
            for (x, y) in ra.iter().zip(rb.iter()) {
                s += x.conj() * y;
            }
            acc += s * w;
        }
        acc * self.grid_x.step
    }

    /// Exact propagator of the stiff transverse factor: multiplies the k-th
    /// Hermite coefficient by e^{-i Δt λ_k / ε}. Unitary for real Δt.
    pub fn propagate_linear_y(
        &self,
        psi: &WaveFunction2D,
        dt: f64,
        epsilon: f64,
    ) -> Result<WaveFunction2D> {
        if !(epsilon > 0.0) {
            return Err(CoreError::Config(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let mut c = self.to_hermite(psi)?;
        for (mut row, &lambda) in c.rows_mut().into_iter().zip(self.basis_y.eigenvalues.iter()) {
            let phase = Complex64::from_polar(1.0, -dt * lambda / epsilon);
            row.mapv_inplace(|v| v * phase);
        }
        self.from_hermite(&c)
    }

    /// Imaginary-time variant: multiplies the k-th coefficient by the decay
    /// factor e^{-τ λ_k / ε}.
    pub fn decay_linear_y(
        &self,
        psi: &WaveFunction2D,
        tau: f64,
        epsilon: f64,
    ) -> Result<WaveFunction2D> {
        if !(epsilon > 0.0) {
            return Err(CoreError::Config(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let mut c = self.to_hermite(psi)?;
        for (mut row, &lambda) in c.rows_mut().into_iter().zip(self.basis_y.eigenvalues.iter()) {
            let decay = (-tau * lambda / epsilon).exp();
            row.mapv_inplace(|v| v * decay);
        }
        self.from_hermite(&c)
    }

    /// Normalized oscillator ground profile π^{-1/4} e^{-x²/2} on the x grid,
    /// rescaled to unit discrete mass.
    pub fn harmonic_ground_x(&self) -> WaveFunction1D {
        let mut phi = self
            .grid_x
            .nodes
            .mapv(|x| Complex64::new(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp(), 0.0));
        let norm = self.mass_1d(&phi).sqrt();
        phi.mapv_inplace(|v| v / norm);
        phi
    }

    /// Tensor product φ(x)·u_{1,k+1}(y) as a 2D field.
    pub fn tensor_with_mode(&self, phi: &WaveFunction1D, k: usize) -> Result<WaveFunction2D> {
        self.check_1d(phi)?;
        if k >= self.basis_y.m_y {
            return Err(CoreError::Config(format!(
                "mode index {k} out of range (m_y = {})",
                self.basis_y.m_y
            )));
        }
        let mut out = Array2::zeros((self.basis_y.m_y, self.grid_x.n_x));
        for (j, mut row) in out.rows_mut().into_iter().enumerate() {
            let u = self.basis_y.mode_matrix[(k, j)];
            Zip::from(&mut row).and(phi).for_each(|o, &p| *o = p * u);
        }
        Ok(out)
    }
}

/// Product of a real matrix with a complex matrix, computed as two real
/// matrix products so the f64 fast path applies.
pub(crate) fn real_complex_matmul(a: &Array2<f64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let re = b.mapv(|z| z.re);
    let im = b.mapv(|z| z.im);
    let cre = a.dot(&re);
    let cim = a.dot(&im);
    let mut out = Array2::zeros(cre.dim());
    Zip::from(&mut out).and(&cre).and(&cim).for_each(|o, &r, &i| {
        *o = Complex64::new(r, i);
    });
    out
}

/// Product of a real matrix with a real matrix (node-space kernels act on
/// densities and currents, which stay real).
pub(crate) fn real_matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    a.dot(b)
}
