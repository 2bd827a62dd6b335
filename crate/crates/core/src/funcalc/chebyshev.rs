//! `f(H)ψ` by Chebyshev expansion on a window enclosing the spectrum of `H`.

use std::sync::{Arc, OnceLock};

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, RadialGrid, WaveFunction, C64};
use crate::linalg::{lanczos_extremes, random_start};
use crate::operators::{Hamiltonian, PotentialSpec};
use crate::oracle::{assemble_dense, DenseKind, DenseOperator, ORACLE_MAX_N};

/// Default cap on the expansion degree.
pub const DEFAULT_MAX_DEGREE: usize = 200_000;

/// Interval `[lo, hi]` on which expansions are built, with the Lanczos estimates of the
/// extremal eigenvalues recorded as diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub lo: f64,
    pub hi: f64,
    pub lanczos_lo: f64,
    pub lanczos_hi: f64,
    /// True when `lo > 0` is backed by Hardy subordination (needed for `H^{±1/2}`).
    pub positive: bool,
}

/// Encloses the spectrum of `H`. The bounds `k_1 + min V ≤ H ≤ k_N + max V` hold exactly;
/// under Hardy subordination (`c̄ < 1/2`) the lower end is raised to the positive bound
/// `0.9 (1 − 2c̄) k_1`, which is checked against a Lanczos estimate of the bottom of the
/// spectrum.
pub fn spectral_window(h: &Hamiltonian) -> Result<SpectralWindow> {
    let grid = h.grid();
    let k1 = grid.momentum(0);
    let kn = grid.k_max();
    let hi = kn + h.v_max().max(0.0);
    let mut lo = k1 + h.v_min().min(0.0);
    let start = random_start(grid, 0x5eed);
    let apply = |x: &[C64]| {
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        h.apply_raw(x, &mut out);
        out
    };
    let b = lanczos_extremes(&apply, start.values(), 120, 1e-10);
    if b.min < lo - 1e-9 * hi || b.max > hi + 1e-9 * hi {
        return Err(Error::Numerical(format!(
            "Lanczos estimates [{}, {}] escape the guaranteed enclosure [{lo}, {hi}]",
            b.min, b.max
        )));
    }
    let cbar = h.potential().hardy_constant();
    let mut positive = h.v_min() >= 0.0;
    if h.v_min() < 0.0 && cbar < 0.5 {
        let hardy = 0.9 * (1.0 - 2.0 * cbar) * k1;
        if hardy > lo && b.min > hardy {
            lo = hardy;
            positive = true;
        }
    }
    Ok(SpectralWindow {
        lo,
        hi: hi * (1.0 + 1e-12),
        lanczos_lo: b.min,
        lanczos_hi: b.max,
        positive,
    })
}

/// Record of a Chebyshev filter for manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCertificate {
    pub label: String,
    pub degree: usize,
    pub window: SpectralWindow,
    pub measured_error: f64,
    pub tolerance: f64,
}

/// A truncated Chebyshev series of `f` on a spectral window.
#[derive(Debug, Clone)]
pub struct ChebyshevFilter {
    pub window: SpectralWindow,
    pub coefficients: Vec<f64>,
    pub measured_error: f64,
    pub tolerance: f64,
}

fn chebyshev_coefficients(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, degree: usize, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    // Chebyshev–Gauss interpolation on M = 2(d + 1) points, computed as a DCT-II by an FFT
    // of length 2M.
    let m = 2 * (degree + 1);
    let fft = planner.plan_fft_forward(2 * m);
    let mut buf = vec![C64::new(0.0, 0.0); 2 * m];
    let (c, r) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    for (j, b) in buf.iter_mut().enumerate().take(m) {
        let theta = std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
        *b = C64::new(f(c + r * theta.cos()), 0.0);
    }
    fft.process(&mut buf);
    let mut coeffs: Vec<f64> = (0..=degree)
        .map(|k| {
            let ph = C64::from_polar(1.0, -std::f64::consts::PI * k as f64 / (2.0 * m as f64));
            2.0 / m as f64 * (buf[k] * ph).re
        })
        .collect();
    coeffs[0] *= 0.5;
    coeffs
}

/// `max |f − p|` on `10 d` points `cos θ_i`, `θ_i` uniform, evaluated by FFT.
fn sup_error(f: &dyn Fn(f64) -> f64, coeffs: &[f64], lo: f64, hi: f64, planner: &mut FftPlanner<f64>) -> f64 {
    let d = coeffs.len().max(2) - 1;
    let q = 10 * d.max(1);
    let fft = planner.plan_fft_inverse(2 * q);
    let mut buf = vec![C64::new(0.0, 0.0); 2 * q];
    for (k, ck) in coeffs.iter().enumerate() {
        buf[k] = C64::from_polar(*ck, std::f64::consts::PI * k as f64 / (2.0 * q as f64));
    }
    fft.process(&mut buf);
    let (c, r) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    let mut err = 0.0f64;
    for (i, b) in buf.iter().enumerate().take(q) {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / q as f64;
        err = err.max((b.re - f(c + r * theta.cos())).abs());
    }
    err
}

impl ChebyshevFilter {
    /// Doubles the degree from 16 until the measured sup error is at most `tol`, then
    /// trims trailing coefficients whose absolute sum keeps the total within `tol`.
    pub fn new(f: &dyn Fn(f64) -> f64, window: SpectralWindow, tol: f64, max_degree: usize) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Parameter("filter tolerance must be positive".into()));
        }
        let mut planner = FftPlanner::new();
        let mut d = 16usize;
        loop {
            let coeffs = chebyshev_coefficients(f, window.lo, window.hi, d, &mut planner);
            let err = sup_error(f, &coeffs, window.lo, window.hi, &mut planner);
            if err <= 0.5 * tol {
                // Trim: dropping coefficients k > d' changes the sup by at most Σ|c_k|.
                let mut tail = 0.0;
                let mut keep = coeffs.len();
                while keep > 1 && err + tail + coeffs[keep - 1].abs() <= 0.9 * tol {
                    tail += coeffs[keep - 1].abs();
                    keep -= 1;
                }
                let mut coeffs = coeffs;
                coeffs.truncate(keep);
                let measured = sup_error(f, &coeffs, window.lo, window.hi, &mut planner);
                return Ok(Self {
                    window,
                    coefficients: coeffs,
                    measured_error: measured,
                    tolerance: tol,
                });
            }
            if d >= max_degree {
                return Err(Error::FilterCap {
                    cap: max_degree,
                    achieved: err,
                    tol,
                });
            }
            d = (2 * d).min(max_degree);
        }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn certificate(&self, label: &str) -> FilterCertificate {
        FilterCertificate {
            label: label.to_string(),
            degree: self.degree(),
            window: self.window,
            measured_error: self.measured_error,
            tolerance: self.tolerance,
        }
    }

    /// Evaluates the truncated series at a scalar (for diagnostics).
    pub fn eval_scalar(&self, l: f64) -> f64 {
        let x = (2.0 * l - self.window.hi - self.window.lo) / (self.window.hi - self.window.lo);
        let (mut t0, mut t1) = (1.0, x);
        let mut s = self.coefficients[0];
        if self.coefficients.len() > 1 {
            s += self.coefficients[1] * x;
        }
        for c in &self.coefficients[2.min(self.coefficients.len())..] {
            let t2 = 2.0 * x * t1 - t0;
            s += c * t2;
            t0 = t1;
            t1 = t2;
        }
        s
    }

    /// `p(H)ψ` by the three-term recurrence.
    pub fn apply(&self, h: &Hamiltonian, psi: &WaveFunction) -> Result<WaveFunction> {
        let out = self.apply_many(h, std::slice::from_ref(psi))?;
        Ok(out.into_iter().next().expect("one output"))
    }

    /// Applies the filter to several states sharing one recurrence per state.
    pub fn apply_many(&self, h: &Hamiltonian, psis: &[WaveFunction]) -> Result<Vec<WaveFunction>> {
        let grid = h.grid();
        let (lo, hi) = (self.window.lo, self.window.hi);
        let (a, b) = (2.0 / (hi - lo), -(hi + lo) / (hi - lo));
        let mut result = Vec::with_capacity(psis.len());
        for psi in psis {
            if !psi.grid().same_as(grid) {
                return Err(Error::GridMismatch);
            }
            let n = psi.len();
            let x0 = psi.values().to_vec();
            let mut acc: Vec<C64> = x0.iter().map(|z| z * self.coefficients[0]).collect();
            if self.coefficients.len() == 1 {
                result.push(WaveFunction::from_parts(grid, acc));
                continue;
            }
            let mut hx = vec![C64::new(0.0, 0.0); n];
            h.apply_raw(&x0, &mut hx);
            let mut t_prev = x0;
            let mut t_cur: Vec<C64> = hx.iter().zip(&t_prev).map(|(y, x)| y * a + x * b).collect();
            for (o, t) in acc.iter_mut().zip(&t_cur) {
                *o += t * self.coefficients[1];
            }
            for ck in &self.coefficients[2..] {
                h.apply_raw(&t_cur, &mut hx);
                for i in 0..n {
                    let t_next = (hx[i] * a + t_cur[i] * b) * 2.0 - t_prev[i];
                    t_prev[i] = t_next;
                    acc[i] += t_next * *ck;
                }
                std::mem::swap(&mut t_prev, &mut t_cur);
            }
            result.push(WaveFunction::from_parts(grid, acc));
        }
        Ok(result)
    }
}

/// `f(H)ψ` with filter certificate; the window is computed from `H`.
pub fn apply_function_of_h(
    f: &dyn Fn(f64) -> f64,
    v: &PotentialSpec,
    psi: &WaveFunction,
    tol: f64,
) -> Result<(WaveFunction, FilterCertificate)> {
    let h = Hamiltonian::new(psi.grid(), v);
    let window = spectral_window(&h)?;
    let filter = ChebyshevFilter::new(f, window, tol, DEFAULT_MAX_DEGREE)?;
    Ok((filter.apply(&h, psi)?, filter.certificate("f(H)")))
}

/// Shared Hamiltonian with its window, for repeated filtering. For `V = 0` functions of
/// `H = |p|` are applied exactly as sine-basis multipliers; when a Chebyshev filter hits
/// its degree cap and the grid is small enough, the dense oracle takes over.
#[derive(Debug)]
pub struct FilterContext {
    pub hamiltonian: Arc<Hamiltonian>,
    pub window: SpectralWindow,
    pub tolerance: f64,
    pub max_degree: usize,
    dense: OnceLock<DenseOperator>,
}

impl FilterContext {
    pub fn new(h: Hamiltonian, tol: f64) -> Result<Self> {
        let window = spectral_window(&h)?;
        Ok(Self {
            hamiltonian: Arc::new(h),
            window,
            tolerance: tol,
            max_degree: DEFAULT_MAX_DEGREE,
            dense: OnceLock::new(),
        })
    }

    pub fn for_potential(grid: &Arc<RadialGrid>, v: &PotentialSpec, tol: f64) -> Result<Self> {
        Self::new(Hamiltonian::new(grid, v), tol)
    }

    pub fn is_free(&self) -> bool {
        self.hamiltonian.potential().is_zero()
    }

    pub fn filter(&self, f: &dyn Fn(f64) -> f64) -> Result<ChebyshevFilter> {
        ChebyshevFilter::new(f, self.window, self.tolerance, self.max_degree)
    }

    fn dense(&self) -> Result<&DenseOperator> {
        if let Some(d) = self.dense.get() {
            return Ok(d);
        }
        let d = assemble_dense(DenseKind::Hamiltonian, self.hamiltonian.potential(), self.hamiltonian.grid())?;
        d.eigen()?;
        Ok(self.dense.get_or_init(|| d))
    }

    /// `f(H)ψ` with its certificate.
    pub fn apply(&self, f: &dyn Fn(f64) -> f64, psi: &WaveFunction) -> Result<(WaveFunction, FilterCertificate)> {
        Ok(self.apply_many(f, std::slice::from_ref(psi))?.pop().expect("one state"))
    }

    /// `f(H)` applied to several states with one filter.
    pub fn apply_many(&self, f: &dyn Fn(f64) -> f64, psis: &[WaveFunction]) -> Result<Vec<(WaveFunction, FilterCertificate)>> {
        if self.is_free() {
            let cert = FilterCertificate {
                label: "exact multiplier".into(),
                degree: 0,
                window: self.window,
                measured_error: 0.0,
                tolerance: self.tolerance,
            };
            return Ok(psis.iter().map(|p| (apply_multiplier(p, f), cert.clone())).collect());
        }
        match self.filter(f) {
            Ok(filter) => {
                let cert = filter.certificate("chebyshev");
                Ok(filter
                    .apply_many(&self.hamiltonian, psis)?
                    .into_iter()
                    .map(|s| (s, cert.clone()))
                    .collect())
            }
            Err(Error::FilterCap { cap, achieved, tol }) => {
                if self.hamiltonian.grid().n_points() > ORACLE_MAX_N {
                    return Err(Error::FilterCap { cap, achieved, tol });
                }
                let dense = self.dense()?;
                let err = dense.eigen()?.max_residual(dense.matrix());
                let cert = FilterCertificate {
                    label: "dense oracle".into(),
                    degree: 0,
                    window: self.window,
                    measured_error: err,
                    tolerance: self.tolerance,
                };
                psis.iter()
                    .map(|p| Ok((dense.function_apply(|l| C64::new(f(l), 0.0), p)?, cert.clone())))
                    .collect()
            }
            Err(e) => Err(e),
        }
    }

    /// A filter for `H^{p}`, requiring a positive window.
    pub fn power(&self, p: f64) -> Result<ChebyshevFilter> {
        if !self.window.positive {
            return Err(Error::Precondition(
                "fractional powers need a positive spectral window (Hardy-subordinate potential)".into(),
            ));
        }
        let f = move |l: f64| l.max(0.0).powf(p);
        self.filter(&f)
    }

    /// `H^{p}ψ` (exact multiplier for `V = 0`).
    pub fn apply_power(&self, p: f64, psi: &WaveFunction) -> Result<(WaveFunction, FilterCertificate)> {
        if !self.window.positive {
            return Err(Error::Precondition(
                "fractional powers need a positive spectral window (Hardy-subordinate potential)".into(),
            ));
        }
        let f = move |l: f64| l.max(0.0).powf(p);
        self.apply(&f, psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_radial_grid;

    fn window(lo: f64, hi: f64) -> SpectralWindow {
        SpectralWindow {
            lo,
            hi,
            lanczos_lo: lo,
            lanczos_hi: hi,
            positive: lo > 0.0,
        }
    }

    #[test]
    fn smooth_function_has_small_degree() {
        let f = |x: f64| (x * 3.0).cos();
        let c = ChebyshevFilter::new(&f, window(-1.0, 2.0), 1e-12, 1000).unwrap();
        assert!(c.degree() < 40);
        assert!(c.measured_error <= 1e-12);
        for &x in &[-0.9, 0.3, 1.7] {
            assert!((c.eval_scalar(x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_reports_failure() {
        let f = |x: f64| if x > 0.5 { 1.0 } else { 0.0 };
        assert!(matches!(
            ChebyshevFilter::new(&f, window(0.0, 1.0), 1e-8, 256),
            Err(Error::FilterCap { .. })
        ));
    }

    #[test]
    fn free_filter_matches_multiplier() {
        let g = build_radial_grid(255, 0.5).unwrap();
        let h = Hamiltonian::new(&g, &PotentialSpec::Zero);
        let w = spectral_window(&h).unwrap();
        let psi = random_start(&g, 3);
        let f = |k: f64| (-(k - 2.0).powi(2)).exp();
        let c = ChebyshevFilter::new(&f, w, 1e-10, 10_000).unwrap();
        let got = c.apply(&h, &psi).unwrap();
        let want = apply_multiplier(&psi, f);
        assert!(got.distance(&want).unwrap() <= 1e-10 * psi.norm() * 2.0);
    }
}
