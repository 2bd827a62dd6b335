//! `f(A/s)ψ` through the Mellin transform.
//!
//! With `ρ = ln r` and `w(ρ) = e^{ρ/2} u(e^ρ)` (a unitary map `L²(dr) → L²(dρ)`), the
//! dilation generator becomes `A = −i d/dρ`, so `f(A/s)` is the Fourier multiplier
//! `f(τ/s)` in the variable conjugate to `ρ`. The pipeline resamples `u` onto a
//! log-uniform grid, applies the multiplier by FFT on a periodic window padded to
//! contain the convolution kernel, and interpolates back onto the nodes.

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::cutoff::{CutoffKind, SmoothCutoff};
use crate::error::{Error, Result};
use crate::grid::{refine_spectrally, WaveFunction, C64};
use crate::interp::{Extension, UniformSamples};
use crate::operators::{dilate_onto, DEFAULT_LAMBDA_MAX};
use crate::quadrature::CompositeRule;

/// Envelope of `|ĝ(ξ)|` for the unit mollifier: the transform decays like
/// `ξ^{−3/4} e^{−√ξ}` (saddle point at the endpoints of the support).
pub(crate) fn mollifier_transform_envelope(xi: f64) -> f64 {
    let xi = xi.abs();
    (8.0 * xi.max(1.0).powf(-0.75) * (-xi.sqrt()).exp()).min(1.0)
}

/// Parameters of the Mellin pipeline. The log-grid step is `Δρ = π/(2 τ_max)` with
/// `τ_max` the band limit times the radial extent of the input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinPlan {
    /// Spectral refinement of the input before log-resampling.
    pub input_refinement: usize,
    /// Oversampling of the output in `ρ` (spectral zero padding) before interpolation.
    pub output_refinement: usize,
    /// Momentum band limit used to choose `Δρ`; by default taken from the state's sine
    /// spectrum (the momentum beyond which the relative coefficient energy is below
    /// `1e−24`, with a 25% margin, capped at `k_max`).
    pub band_limit: Option<f64>,
    /// Largest relative mass tolerated at `r < 4h` or `r > 0.9 L`.
    pub reject_tol: f64,
    /// Tail budget of the convolution kernel outside the periodic window.
    pub kernel_tol: f64,
    /// Largest admissible FFT length on the log grid.
    pub max_len: usize,
}

impl Default for MellinPlan {
    fn default() -> Self {
        Self {
            input_refinement: 16,
            output_refinement: 16,
            band_limit: None,
            reject_tol: 1e-6,
            kernel_tol: 1e-9,
            max_len: 1 << 21,
        }
    }
}

/// Result of a Mellin application with its diagnostics.
#[derive(Debug, Clone)]
pub struct MellinResult {
    pub state: WaveFunction,
    /// `‖(identity round trip)ψ − ψ‖`, i.e. the pipeline with `f ≡ 1`.
    pub resampling_error: f64,
    /// Mass of `f(A/s)ψ` that lies beyond the box (`r > L`) in the continuum picture.
    pub exterior_mass: f64,
    /// Distance in `ρ` beyond which the convolution kernel is below `kernel_tol`.
    pub kernel_reach: f64,
    pub fft_len: usize,
}

/// Which function of the cutoff is applied: `F`, `F′` or `F″`.
pub fn cutoff_derivative(f: &SmoothCutoff, order: usize, x: f64) -> f64 {
    match order {
        0 => f.eval(x),
        1 => f.derivative(x),
        _ => f.second_derivative(x),
    }
}

/// `ρ*` such that the kernel of `δ^k F^{(k)}(τ/s)` has tail mass `∫_{ρ*}^∞ |K| ≤ tol`.
pub fn kernel_reach(f: &SmoothCutoff, s: f64, order: usize, tol: f64) -> f64 {
    let delta = f.width;
    let eta = delta / (0.5 + f.mollifier_ratio);
    let eps = f.mollifier_ratio * eta;
    let bands = if f.kind == CutoffKind::Bump { 2.0 } else { 1.0 };
    let bound = |rho: f64| {
        let w = s * rho;
        bands / (2.0 * std::f64::consts::PI * rho)
            * (delta * w).powi(order as i32)
            * (2.0 / (w * eta)).min(1.0)
            * mollifier_transform_envelope(w * eps)
    };
    // Geometric grid in ρ from far out inwards, accumulating the tail integral.
    let (lo, hi) = (1e-4 / s.max(1e-300), 1e7);
    let steps = 4000;
    let q = (hi / lo).powf(1.0 / steps as f64);
    let mut tail = 0.0;
    let mut rho = hi;
    let mut prev = bound(rho);
    for _ in 0..steps {
        let next = rho / q;
        let b = bound(next);
        tail += 0.5 * (b + prev) * (rho - next);
        if tail > tol {
            return rho;
        }
        rho = next;
        prev = b;
    }
    lo
}

/// Momentum carrying all but a `1e−24` fraction of the coefficient energy, plus 25%.
pub fn spectral_band_limit(psi: &WaveFunction) -> f64 {
    let grid = psi.grid();
    let coeffs = grid.transform().apply(psi.values());
    let total: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    let mut tail = 0.0;
    for (m, c) in coeffs.iter().enumerate().rev() {
        tail += c.norm_sqr();
        if tail > 1e-24 * total {
            return (1.25 * grid.momentum(m)).min(grid.k_max());
        }
    }
    grid.k_max()
}

/// Radius beyond which the relative mass is below `1e−24`, plus 25%, capped at `L`.
pub fn spatial_extent(psi: &WaveFunction) -> f64 {
    let grid = psi.grid();
    let total = psi.norm_sqr() / grid.spacing();
    let mut tail = 0.0;
    for j in (0..grid.n_points()).rev() {
        tail += psi.values()[j].norm_sqr();
        if tail > 1e-24 * total {
            return (1.25 * grid.node(j) + 2.0 * grid.spacing()).min(grid.extent());
        }
    }
    grid.extent()
}

impl MellinPlan {
    fn check_support(&self, psi: &WaveFunction) -> Result<()> {
        let grid = psi.grid();
        let total = psi.norm_sqr();
        if total == 0.0 {
            return Ok(());
        }
        let inner = psi.mass_below(4.0 * grid.spacing()) / total;
        let outer = psi.mass_beyond(0.9) / total;
        if inner > self.reject_tol || outer > self.reject_tol {
            return Err(Error::Rejected(format!(
                "relative mass {inner:.3e} at r < 4h and {outer:.3e} at r > 0.9L exceeds {:.1e}; log resampling unreliable",
                self.reject_tol
            )));
        }
        Ok(())
    }

    /// Applies the multiplier `g(τ)` in the Mellin variable; `reach` is the kernel
    /// extent in `ρ` the periodic window must accommodate.
    pub fn apply_multiplier(&self, g: &(dyn Fn(f64) -> C64 + Sync), reach: f64, psi: &WaveFunction) -> Result<MellinResult> {
        self.check_support(psi)?;
        let grid = psi.grid();
        let (h, l) = (grid.spacing(), grid.extent());
        let kb = self.band_limit.unwrap_or_else(|| spectral_band_limit(psi));
        if !(kb > 0.0) {
            return Err(Error::Parameter("band limit must be positive".into()));
        }
        // The Mellin variable of the input is bounded by (momentum band) × (radial extent).
        let tau_max = kb * spatial_extent(psi);
        let drho = std::f64::consts::PI / (2.0 * tau_max);
        let rho0 = (0.5 * h).ln();
        let rho1 = l.ln();
        let d = rho1 - rho0;
        let period = d + reach.max(d);
        let m = ((period / drho).ceil() as usize).next_power_of_two();
        if m > self.max_len {
            return Err(Error::Precondition(format!(
                "log grid of {m} points exceeds the limit {} (kernel reach {reach:.3e}); widen the cutoff transition",
                self.max_len
            )));
        }
        let fine = grid.refined(self.input_refinement)?;
        let up = refine_spectrally(psi, &fine)?;
        let samples = UniformSamples::new(up.values(), 0.0, fine.spacing(), Extension::SineOdd);
        let data_len = (((rho1 - rho0) / drho).ceil() as usize).min(m);
        let mut w = vec![C64::new(0.0, 0.0); m];
        for (k, wk) in w.iter_mut().enumerate().take(data_len) {
            let rho = rho0 + k as f64 * drho;
            let r = rho.exp();
            if r < l {
                *wk = samples.eval(r) * (0.5 * rho).exp();
            }
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(m).process(&mut w);
        let tau_step = 2.0 * std::f64::consts::PI / (m as f64 * drho);
        let signed = |idx: usize| if idx <= m / 2 { idx as f64 } else { idx as f64 - m as f64 };
        let filtered: Vec<C64> = w.iter().enumerate().map(|(idx, z)| z * g(signed(idx) * tau_step)).collect();

        let q = self.output_refinement.max(1);
        let back = |spec: &[C64], planner: &mut FftPlanner<f64>| -> Vec<C64> {
            let mq = m * q;
            let mut y = vec![C64::new(0.0, 0.0); mq];
            for idx in 0..m {
                if idx < m / 2 {
                    y[idx] = spec[idx];
                } else if idx > m / 2 {
                    y[idx + m * (q - 1)] = spec[idx];
                } else {
                    y[idx] = spec[idx] * 0.5;
                    y[idx + m * (q - 1)] = spec[idx] * 0.5;
                }
            }
            planner.plan_fft_inverse(mq).process(&mut y);
            let scale = 1.0 / m as f64;
            y.iter_mut().for_each(|z| *z *= scale);
            y
        };
        let resample = |w_fine: &[C64]| -> Vec<C64> {
            let view = UniformSamples::new(w_fine, rho0, drho / q as f64, Extension::Periodic);
            (0..grid.n_points())
                .map(|j| {
                    let rho = grid.node(j).ln();
                    view.eval(rho) * (-0.5 * rho).exp()
                })
                .collect()
        };
        let w_out = back(&filtered, &mut planner);
        let w_id = back(&w, &mut planner);
        let state = WaveFunction::from_parts(grid, resample(&w_out));
        let id = WaveFunction::from_parts(grid, resample(&w_id));
        let resampling_error = id.distance(psi)?;
        let fine_step = drho / q as f64;
        let exterior_mass = w_out
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                let rho = rho0 + *j as f64 * fine_step;
                rho >= rho1 && rho < rho0 + period
            })
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            * fine_step;
        Ok(MellinResult {
            state,
            resampling_error,
            exterior_mass,
            kernel_reach: reach,
            fft_len: m,
        })
    }

    /// `f^{(order)}(A/s)ψ` for a smoothed cutoff (`order ∈ {0, 1, 2}`).
    pub fn apply_cutoff(&self, f: &SmoothCutoff, order: usize, s: f64, psi: &WaveFunction) -> Result<MellinResult> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Parameter(format!("scale s must be positive, got {s}")));
        }
        if order > 2 {
            return Err(Error::Parameter("only F, F′ and F″ are available".into()));
        }
        self.apply_cutoff_with_tol(f, order, s, psi, self.kernel_tol)
    }

    /// As [`MellinPlan::apply_cutoff`] with an explicit kernel-tail budget for the
    /// normalized multiplier `δ^k F^{(k)}(τ/s)`.
    pub fn apply_cutoff_with_tol(&self, f: &SmoothCutoff, order: usize, s: f64, psi: &WaveFunction, kernel_tol: f64) -> Result<MellinResult> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Parameter(format!("scale s must be positive, got {s}")));
        }
        if order > 2 {
            return Err(Error::Parameter("only F, F′ and F″ are available".into()));
        }
        let reach = kernel_reach(f, s, order, kernel_tol);
        let g = |tau: f64| C64::new(cutoff_derivative(f, order, tau / s), 0.0);
        self.apply_multiplier(&g, reach, psi)
    }
}

/// `F(A/s)ψ` with the default plan.
pub fn apply_function_of_a(f: &SmoothCutoff, s: f64, psi: &WaveFunction) -> Result<MellinResult> {
    MellinPlan::default().apply_cutoff(f, 0, s, psi)
}

/// Cross-check of `F(A/s)ψ` through the dilation group:
/// `F(A/s) = (F(∞) + F(−∞))/2 + (1/2π) PV∫ F̂′(ω)/(iω) U(ω/s) dω`, with the principal
/// value symmetrized and `|ω| ≤ Λ_max s`. Returns the state and a bound on the neglected
/// `|ω| > Λ_max s` part.
pub fn dilation_quadrature(f: &SmoothCutoff, s: f64, psi: &WaveFunction) -> Result<(WaveFunction, f64)> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Parameter(format!("scale s must be positive, got {s}")));
    }
    let grid = psi.grid();
    let omega_max = DEFAULT_LAMBDA_MAX * s;
    // Oscillation rate of the integrand in ω: the cutoff location plus the spread of A/s.
    let coeffs = grid.transform().apply(psi.values());
    let total: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    let mut acc = 0.0;
    let mut k_top = grid.k_max();
    for (m, c) in coeffs.iter().enumerate().rev() {
        acc += c.norm_sqr();
        if acc > 1e-14 * total {
            k_top = grid.momentum(m);
            break;
        }
    }
    let mut acc = 0.0;
    let mut r_top = grid.extent();
    for j in (0..grid.n_points()).rev() {
        acc += psi.values()[j].norm_sqr();
        if acc > 1e-14 * total {
            r_top = grid.node(j);
            break;
        }
    }
    let rate = f.threshold.abs().max(f.upper.abs()) + f.width + k_top * r_top / s;
    let panels = ((omega_max * rate / (2.0 * std::f64::consts::PI)).ceil() as usize + 8).min(20_000);
    let rule = CompositeRule::new(0.0, omega_max, panels, 16);
    let n = grid.n_points();
    let up = match grid.refined(8).and_then(|fine| refine_spectrally(psi, &fine)) {
        Ok(up) => up,
        Err(_) => psi.clone(),
    };
    let sum = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(&om, &wt)| {
            let plus = dilate_onto(&up, grid, om / s);
            let minus = dilate_onto(&up, grid, -om / s);
            let (fp, fm) = (f.derivative_fourier(om), f.derivative_fourier(-om));
            let c = C64::new(0.0, om);
            let (ap, am) = (fp / c * wt, fm / c * wt);
            plus.values()
                .iter()
                .zip(minus.values())
                .map(|(p, q)| p * ap - q * am)
                .collect::<Vec<C64>>()
        })
        .reduce(
            || vec![C64::new(0.0, 0.0); n],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let (lm, lp) = f.limits();
    let c0 = 0.5 * (lm + lp);
    let values = psi
        .values()
        .iter()
        .zip(&sum)
        .map(|(z, q)| z * c0 + q / (2.0 * std::f64::consts::PI))
        .collect();
    // Neglected tail: (1/π) ∫_{Ω}^∞ |F̂′(ω)|/ω dω · ‖ψ‖.
    let eta = f.width / (0.5 + f.mollifier_ratio);
    let eps = f.mollifier_ratio * eta;
    let bands = if f.kind == CutoffKind::Bump { 2.0 } else { 1.0 };
    let tail_rule = CompositeRule::new(omega_max.ln(), (omega_max * 1e6).ln(), 200, 8);
    let tail = tail_rule.integrate(|t| {
        let om = t.exp();
        bands * (2.0 / (om * eta)).min(1.0) * mollifier_transform_envelope(om * eps)
    }) / std::f64::consts::PI
        * psi.norm();
    Ok((WaveFunction::from_parts(grid, values), tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalc::cutoff::{mollifier, SmoothCutoff, SMOOTH_MOLLIFIER_RATIO};
    use crate::grid::build_radial_grid;

    #[test]
    fn mollifier_envelope_dominates_transform() {
        let rule = CompositeRule::new(-1.0, 1.0, 2000, 20);
        for &xi in &[1.0, 5.0, 10.0, 50.0, 150.0, 400.0, 1000.0] {
            let ft = rule.integrate(|x| mollifier(x) * (xi * x).cos()).abs();
            assert!(ft <= mollifier_transform_envelope(xi), "ξ = {xi}: {ft}");
        }
    }

    fn probe(g: &std::sync::Arc<crate::RadialGrid>) -> WaveFunction {
        WaveFunction::from_fn(g, |r| {
            let env = (-(r - 60.0).powi(2) / (2.0 * 8.0f64.powi(2))).exp();
            C64::from_polar(env, 1.2 * r)
        })
    }

    #[test]
    fn identity_round_trip() {
        let g = build_radial_grid(511, 0.5).unwrap();
        let psi = probe(&g);
        let one = |_: f64| C64::new(1.0, 0.0);
        let res = MellinPlan::default().apply_multiplier(&one, 1.0, &psi).unwrap();
        assert!(res.resampling_error < 1e-8 * psi.norm(), "{}", res.resampling_error);
        assert!(res.state.distance(&psi).unwrap() < 1e-8 * psi.norm());
    }

    #[test]
    fn rejects_mass_near_origin() {
        let g = build_radial_grid(511, 0.5).unwrap();
        let psi = WaveFunction::from_real_fn(&g, |r| (-r).exp() * r);
        let f = SmoothCutoff::step_up(1.0, 0.5).unwrap();
        assert!(matches!(apply_function_of_a(&f, 10.0, &psi), Err(Error::Rejected(_))));
    }

    #[test]
    fn quadrature_cross_check_agrees() {
        let g = build_radial_grid(2047, 0.5).unwrap();
        let psi = WaveFunction::from_fn(&g, |r| {
            let env = (-(r - 300.0).powi(2) / (2.0 * 20.0f64.powi(2))).exp();
            C64::from_polar(env, 1.2 * r)
        });
        let f = SmoothCutoff::step(CutoffKind::StepUp, 1.8, 0.5, SMOOTH_MOLLIFIER_RATIO).unwrap();
        let s = 200.0;
        let a = MellinPlan::default().apply_cutoff(&f, 0, s, &psi).unwrap();
        let (b, tail) = dilation_quadrature(&f, s, &psi).unwrap();
        let diff = a.state.distance(&b).unwrap();
        assert!(tail < 1e-6 * psi.norm());
        assert!(diff < 1e-6 * psi.norm(), "diff {diff}, tail {tail}");
        // The cutoff sits inside the A-distribution, so the output is a genuine filter.
        assert!(a.state.norm() < 0.9 * psi.norm() && a.state.norm() > 0.1 * psi.norm());
    }
}
