//! Radial grids, the orthonormal sine transform, and sampled wave functions.
//!
//! The reduced radial wave function `u(r) = r ψ(r)` is sampled on the interior
//! nodes `r_j = j h`, `j = 1..N`, of the box `[0, L]` with `L = (N + 1) h`.
//! Dirichlet conditions at both ends make the sine modes `sin(k_m r)`,
//! `k_m = m π / L`, an exact eigenbasis of the discrete `-d²/dr²`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Orthonormal type-I discrete sine transform of length `n`, evaluated through a
/// complex FFT of length `2 (n + 1)` on the odd extension. The transform is its
/// own inverse.
#[derive(Clone)]
pub struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SineTransform").field("n", &self.n).finish()
    }
}

impl SineTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(2 * (n + 1));
        Self {
            n,
            fft,
            scale: (2.0 / (n as f64 + 1.0)).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `y_m = sqrt(2/(N+1)) Σ_j x_j sin(π j m / (N+1))`, written into `x`.
    pub fn apply_in_place(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.n, "sine transform length mismatch");
        let n = self.n;
        let m = 2 * (n + 1);
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for j in 0..n {
            buf[j + 1] = x[j];
            buf[m - 1 - j] = -x[j];
        }
        self.fft.process(&mut buf);
        // FFT of the odd extension equals -2i Σ x_j sin(...).
        let factor = C64::new(0.0, 0.5 * self.scale);
        for j in 0..n {
            x[j] = buf[j + 1] * factor;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = x.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    /// `g_j = sqrt(2/(N+1)) Σ_m d_m cos(π m j / (N+1))` for `j = 1..N`, i.e. the
    /// cosine partner of the sine synthesis used for spectral differentiation.
    pub fn cosine_synthesis(&self, d: &[C64]) -> Vec<C64> {
        assert_eq!(d.len(), self.n, "cosine synthesis length mismatch");
        let n = self.n;
        let m = 2 * (n + 1);
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for j in 0..n {
            buf[j + 1] = d[j];
            buf[m - 1 - j] = d[j];
        }
        self.fft.process(&mut buf);
        let half = 0.5 * self.scale;
        (0..n).map(|j| buf[j + 1] * half).collect()
    }
}

/// Uniform interior grid on `(0, L)` with Dirichlet ends.
#[derive(Debug)]
pub struct RadialGrid {
    n: usize,
    h: f64,
    transform: SineTransform,
}

/// Builds a shared radial grid with `n_points` interior nodes and spacing `h`.
pub fn build_radial_grid(n_points: usize, h: f64) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(n_points, h).map(Arc::new)
}

impl RadialGrid {
    pub fn new(n_points: usize, h: f64) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidGrid("n_points must be positive".into()));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        Ok(Self {
            n: n_points,
            h,
            transform: SineTransform::new(n_points),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Box length `L = (N + 1) h`.
    pub fn extent(&self) -> f64 {
        (self.n as f64 + 1.0) * self.h
    }

    /// Node `r_j` for the zero-based sample index `j` (so `node(0) = h`).
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 1.0) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Momentum node `k_m` for the zero-based mode index `m` (so `momentum(0) = π/L`).
    pub fn momentum(&self, m: usize) -> f64 {
        (m as f64 + 1.0) * std::f64::consts::PI / self.extent()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.momentum(m)).collect()
    }

    /// Momentum resolution `Δk = π / L`.
    pub fn delta_k(&self) -> f64 {
        std::f64::consts::PI / self.extent()
    }

    pub fn k_max(&self) -> f64 {
        self.momentum(self.n - 1)
    }

    pub fn transform(&self) -> &SineTransform {
        &self.transform
    }

    /// Grids compare equal when their parameters agree: two independently built grids
    /// with the same `(N, h)` describe the same discretization.
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.n == other.n && self.h == other.h
    }

    /// Grid with spacing `h / factor` on the same box, i.e. `factor (N + 1) - 1` nodes.
    pub fn refined(&self, factor: usize) -> Result<Arc<RadialGrid>> {
        if factor == 0 {
            return Err(Error::Parameter("refinement factor must be positive".into()));
        }
        build_radial_grid(factor * (self.n + 1) - 1, self.h / factor as f64)
    }
}

fn norm_from(h: f64, values: &[C64]) -> f64 {
    (h * values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// Samples of the reduced wave function `u(r_j)` together with their cached norm.
#[derive(Clone)]
pub struct WaveFunction {
    grid: Arc<RadialGrid>,
    values: Vec<C64>,
    norm: f64,
}

impl fmt::Debug for WaveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveFunction")
            .field("n_points", &self.values.len())
            .field("spacing", &self.grid.spacing())
            .field("norm", &self.norm)
            .finish()
    }
}

impl WaveFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: values.len(),
            });
        }
        let norm = norm_from(grid.spacing(), &values);
        Ok(Self { grid, values, norm })
    }

    pub(crate) fn from_parts(grid: &Arc<RadialGrid>, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        let norm = norm_from(grid.spacing(), &values);
        Self {
            grid: Arc::clone(grid),
            values,
            norm,
        }
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self::from_parts(grid, vec![C64::new(0.0, 0.0); grid.n_points()])
    }

    /// Samples `f(r_j)` at every node.
    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.n_points()).map(|j| f(grid.node(j))).collect();
        Self::from_parts(grid, values)
    }

    pub fn from_real_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| C64::new(f(r), 0.0))
    }

    /// The pure sine mode `sin(k_m r)` for the zero-based mode index `m`.
    pub fn sine_mode(grid: &Arc<RadialGrid>, m: usize) -> Self {
        let k = grid.momentum(m);
        Self::from_real_fn(grid, |r| (k * r).sin())
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cached `‖ψ‖ = (h Σ |u_j|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm * self.norm
    }

    /// Mutates the samples in place; the cached norm is refreshed afterwards.
    pub fn update(&mut self, f: impl FnOnce(&mut [C64])) {
        f(&mut self.values);
        self.norm = norm_from(self.grid.spacing(), &self.values);
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &z)| f(self.grid.node(j), z))
            .collect();
        Self::from_parts(&self.grid, values)
    }

    /// Pointwise multiplication by a real function of `r`.
    pub fn multiply_by(&self, w: impl Fn(f64) -> f64) -> Self {
        self.map(|r, z| z * w(r))
    }

    pub fn scaled(&self, a: C64) -> Self {
        Self::from_parts(&self.grid, self.values.iter().map(|&z| z * a).collect())
    }

    pub fn scaled_real(&self, a: f64) -> Self {
        Self::from_parts(&self.grid, self.values.iter().map(|&z| z * a).collect())
    }

    pub fn normalized(&self) -> Result<Self> {
        if self.norm == 0.0 {
            return Err(Error::Rejected("cannot normalize the zero state".into()));
        }
        Ok(self.scaled_real(1.0 / self.norm))
    }

    fn check_grid(&self, other: &WaveFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: C64, other: &WaveFunction) -> Result<Self> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| x + a * y)
            .collect();
        Ok(Self::from_parts(&self.grid, values))
    }

    pub fn add(&self, other: &WaveFunction) -> Result<Self> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &WaveFunction) -> Result<Self> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &WaveFunction) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Trapezoidal inner product `h Σ conj(φ_j) ψ_j`, antilinear in `self`.
    pub fn inner(&self, other: &WaveFunction) -> Result<C64> {
        self.check_grid(other)?;
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x.conj() * y)
            .sum();
        Ok(s * self.grid.spacing())
    }

    /// Mass `h Σ_{r_j > θ L} |u_j|²` beyond the fraction `θ` of the box.
    pub fn mass_beyond(&self, fraction: f64) -> f64 {
        let cut = fraction * self.grid.extent();
        self.mass_where(|r| r > cut)
    }

    /// Mass `h Σ_{r_j < r0} |u_j|²`.
    pub fn mass_below(&self, r0: f64) -> f64 {
        self.mass_where(|r| r < r0)
    }

    pub fn mass_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        let h = self.grid.spacing();
        h * self
            .values
            .iter()
            .enumerate()
            .filter(|(j, _)| pred(self.grid.node(*j)))
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
    }
}

/// Free-function form of [`WaveFunction::inner`].
pub fn inner(phi: &WaveFunction, psi: &WaveFunction) -> Result<C64> {
    phi.inner(psi)
}

/// `‖⟨r⟩^s ψ‖` with `⟨r⟩ = (1 + r²)^{1/2}`, same trapezoidal quadrature as the norm.
pub fn weighted_norm(psi: &WaveFunction, s: f64) -> Result<f64> {
    if !(s.abs() <= 4.0) {
        return Err(Error::Parameter(format!("weight exponent |s| <= 4 required, got {s}")));
    }
    if s == 0.0 {
        return Ok(psi.norm());
    }
    let grid = psi.grid();
    let h = grid.spacing();
    let sum: f64 = psi
        .values()
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let r = grid.node(j);
            (1.0 + r * r).powf(s) * z.norm_sqr()
        })
        .sum();
    Ok((h * sum).sqrt())
}

/// Coefficients of a state in the orthonormal sine basis, indexed by momentum node.
#[derive(Clone)]
pub struct SpectralCoefficients {
    grid: Arc<RadialGrid>,
    coefficients: Vec<C64>,
}

impl fmt::Debug for SpectralCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralCoefficients")
            .field("n_points", &self.coefficients.len())
            .finish()
    }
}

impl SpectralCoefficients {
    pub fn new(grid: Arc<RadialGrid>, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: coefficients.len(),
            });
        }
        Ok(Self { grid, coefficients })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [C64] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<C64> {
        self.coefficients
    }

    /// Norm with the same `h` weight as the sample norm, so Parseval reads `‖c‖ = ‖ψ‖`.
    pub fn norm(&self) -> f64 {
        norm_from(self.grid.spacing(), &self.coefficients)
    }

    /// Multiplies coefficient `m` by `g(k_m)`.
    pub fn multiply(&mut self, g: impl Fn(f64) -> f64) {
        for (m, c) in self.coefficients.iter_mut().enumerate() {
            *c *= g(self.grid.momentum(m));
        }
    }
}

/// Forward orthonormal sine transform of the samples.
pub fn sine_transform(psi: &WaveFunction) -> SpectralCoefficients {
    let coefficients = psi.grid().transform().apply(psi.values());
    SpectralCoefficients {
        grid: Arc::clone(psi.grid()),
        coefficients,
    }
}

/// Inverse sine transform (the orthonormal DST-I is an involution).
pub fn inverse_sine_transform(c: &SpectralCoefficients) -> WaveFunction {
    let values = c.grid.transform().apply(&c.coefficients);
    WaveFunction::from_parts(&c.grid, values)
}

/// Applies the Fourier multiplier `g(k_m)` in the sine basis.
pub fn apply_multiplier(psi: &WaveFunction, g: impl Fn(f64) -> f64) -> WaveFunction {
    let grid = psi.grid();
    let t = grid.transform();
    let mut c = t.apply(psi.values());
    for (m, z) in c.iter_mut().enumerate() {
        *z *= g(grid.momentum(m));
    }
    t.apply_in_place(&mut c);
    WaveFunction::from_parts(grid, c)
}

/// Complex-valued multiplier variant of [`apply_multiplier`].
pub fn apply_complex_multiplier(psi: &WaveFunction, g: impl Fn(f64) -> C64) -> WaveFunction {
    let grid = psi.grid();
    let t = grid.transform();
    let mut c = t.apply(psi.values());
    for (m, z) in c.iter_mut().enumerate() {
        *z *= g(grid.momentum(m));
    }
    t.apply_in_place(&mut c);
    WaveFunction::from_parts(grid, c)
}

/// Spectral interpolation of `psi` onto the grid refined by `factor` (same box):
/// the sine series is evaluated exactly at the finer nodes.
pub fn refine_spectrally(psi: &WaveFunction, fine: &Arc<RadialGrid>) -> Result<WaveFunction> {
    let coarse = psi.grid();
    if (fine.extent() - coarse.extent()).abs() > 1e-12 * coarse.extent() || fine.n_points() < coarse.n_points() {
        return Err(Error::Parameter("refinement must keep the box and not lose nodes".into()));
    }
    let c = coarse.transform().apply(psi.values());
    let ratio = ((fine.n_points() as f64 + 1.0) / (coarse.n_points() as f64 + 1.0)).sqrt();
    let mut padded = vec![C64::new(0.0, 0.0); fine.n_points()];
    for (m, z) in c.iter().enumerate() {
        padded[m] = z * ratio;
    }
    fine.transform().apply_in_place(&mut padded);
    Ok(WaveFunction::from_parts(fine, padded))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_geometry() {
        let g = build_radial_grid(3, 1.0).unwrap();
        assert_eq!(g.extent(), 4.0);
        assert_eq!(g.nodes(), vec![1.0, 2.0, 3.0]);
        let k = g.momenta();
        let pi = std::f64::consts::PI;
        for (m, want) in [pi / 4.0, pi / 2.0, 3.0 * pi / 4.0].iter().enumerate() {
            assert!((k[m] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(build_radial_grid(0, 0.25).is_err());
        assert!(build_radial_grid(16, 0.0).is_err());
        assert!(build_radial_grid(16, -1.0).is_err());
        assert!(build_radial_grid(16, f64::NAN).is_err());
    }

    #[test]
    fn sine_mode_maps_to_single_coefficient() {
        let g = build_radial_grid(64, 0.5).unwrap();
        let psi = WaveFunction::sine_mode(&g, 2);
        let c = sine_transform(&psi);
        for (m, z) in c.coefficients().iter().enumerate() {
            if m == 2 {
                assert!((z.re - (65.0f64 / 2.0).sqrt()).abs() < 1e-12);
            } else {
                assert!(z.norm() < 1e-12, "mode {m} leaked {z}");
            }
        }
    }

    #[test]
    fn cosine_synthesis_matches_direct_sum() {
        let n = 13;
        let t = SineTransform::new(n);
        let d: Vec<C64> = (0..n).map(|m| C64::new(m as f64 * 0.3 - 1.0, 0.1 * m as f64)).collect();
        let g = t.cosine_synthesis(&d);
        let scale = (2.0 / (n as f64 + 1.0)).sqrt();
        for j in 1..=n {
            let direct: C64 = (1..=n)
                .map(|m| d[m - 1] * (std::f64::consts::PI * (m * j) as f64 / (n as f64 + 1.0)).cos())
                .sum::<C64>()
                * scale;
            assert!((direct - g[j - 1]).norm() < 1e-12);
        }
    }

    #[test]
    fn weighted_norm_point_mass() {
        let g = build_radial_grid(16, 3f64.sqrt()).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 16];
        v[0] = C64::new(0.7, 0.0);
        let psi = WaveFunction::new(Arc::clone(&g), v).unwrap();
        let want = g.spacing().sqrt() * 2f64.powf(1.5) * 0.7;
        assert!((weighted_norm(&psi, 1.5).unwrap() - want).abs() < 1e-14);
        assert_eq!(weighted_norm(&psi, 0.0).unwrap(), psi.norm());
        assert!(weighted_norm(&psi, 4.5).is_err());
    }

    #[test]
    fn update_refreshes_norm() {
        let g = build_radial_grid(32, 0.5).unwrap();
        let mut psi = WaveFunction::sine_mode(&g, 4);
        psi.update(|v| v.iter_mut().for_each(|z| *z *= 3.0));
        let direct = (g.spacing() * psi.values().iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        assert!((psi.norm() - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = WaveFunction::sine_mode(&build_radial_grid(32, 0.5).unwrap(), 1);
        let b = WaveFunction::sine_mode(&build_radial_grid(32, 0.25).unwrap(), 1);
        assert!(matches!(a.inner(&b), Err(Error::GridMismatch)));
    }

    #[test]
    fn spectral_refinement_is_exact_for_modes() {
        let g = build_radial_grid(31, 1.0).unwrap();
        let fine = g.refined(4).unwrap();
        let psi = WaveFunction::sine_mode(&g, 5);
        let up = refine_spectrally(&psi, &fine).unwrap();
        let want = WaveFunction::sine_mode(&fine, 5);
        assert!(up.distance(&want).unwrap() < 1e-12);
    }
}
