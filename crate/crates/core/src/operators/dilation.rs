//! The unitary dilation group `(U(λ)u)(r) = e^{λ/2} u(e^λ r)` on sampled states.

use crate::error::{Error, Result};
use std::sync::Arc;

use crate::grid::{refine_spectrally, RadialGrid, WaveFunction, C64};
use crate::interp::{Extension, UniformSamples};

/// Default bound on `|λ|` accepted by [`apply_dilation_group`].
pub const DEFAULT_LAMBDA_MAX: f64 = 3.0;

/// Dilated state with the diagnostics of the interpolation.
#[derive(Debug, Clone)]
pub struct DilationResult {
    pub state: WaveFunction,
    /// Mass of the input that lands beyond the box (`λ < 0`) and is dropped.
    pub dropped_mass: f64,
    /// `‖U_h(λ)ψ − U_{h/2}(λ)ψ‖`: interpolation from the grid versus from the spectrally
    /// refined samples.
    pub error_estimate: f64,
}

fn dilate_samples(psi: &WaveFunction, lambda: f64, out_nodes: impl Iterator<Item = f64>, len: usize) -> Vec<C64> {
    let grid = psi.grid();
    let l = grid.extent();
    let samples = UniformSamples::new(psi.values(), 0.0, grid.spacing(), Extension::SineOdd);
    let s = lambda.exp();
    let pref = (lambda / 2.0).exp();
    let mut out = Vec::with_capacity(len);
    for r in out_nodes {
        let x = s * r;
        if x >= l {
            out.push(C64::new(0.0, 0.0));
        } else {
            out.push(samples.eval(x) * pref);
        }
    }
    out
}

/// `U(λ)ψ` by quintic interpolation, zero-extended beyond the box. No diagnostics.
pub fn dilate(psi: &WaveFunction, lambda: f64) -> WaveFunction {
    let grid = psi.grid();
    if lambda == 0.0 {
        return psi.clone();
    }
    let values = dilate_samples(psi, lambda, (0..grid.n_points()).map(|j| grid.node(j)), grid.n_points());
    WaveFunction::from_parts(grid, values)
}

/// `U(λ)` of the sampled state `source`, evaluated at the nodes of `target` (same box).
/// Passing a spectrally refined `source` reduces the interpolation error.
pub fn dilate_onto(source: &WaveFunction, target: &Arc<RadialGrid>, lambda: f64) -> WaveFunction {
    let values = dilate_samples(source, lambda, (0..target.n_points()).map(|j| target.node(j)), target.n_points());
    WaveFunction::from_parts(target, values)
}

/// `U(λ)ψ` with dropped-mass bookkeeping and a doubled-resolution error estimate.
pub fn apply_dilation_group(psi: &WaveFunction, lambda: f64, lambda_max: f64) -> Result<DilationResult> {
    if !(lambda.abs() <= lambda_max) {
        return Err(Error::Parameter(format!("|λ| = {} exceeds Λ_max = {lambda_max}", lambda.abs())));
    }
    let grid = psi.grid();
    if grid.n_points() < 8 {
        return Err(Error::InvalidGrid("dilation needs at least 8 nodes".into()));
    }
    if lambda == 0.0 {
        return Ok(DilationResult {
            state: psi.clone(),
            dropped_mass: 0.0,
            error_estimate: 0.0,
        });
    }
    let state = dilate(psi, lambda);
    let dropped_mass = if lambda < 0.0 {
        let cut = grid.extent() * lambda.exp();
        psi.mass_where(|r| r > cut)
    } else {
        0.0
    };
    let fine = grid.refined(2)?;
    let up = refine_spectrally(psi, &fine)?;
    let reference = dilate_samples(&up, lambda, (0..grid.n_points()).map(|j| grid.node(j)), grid.n_points());
    let reference = WaveFunction::from_parts(grid, reference);
    let error_estimate = state.distance(&reference)?;
    Ok(DilationResult {
        state,
        dropped_mass,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_radial_grid;

    #[test]
    fn identity_and_range_checks() {
        let g = build_radial_grid(256, 0.5).unwrap();
        let psi = WaveFunction::from_real_fn(&g, |r| (-(r - 60.0).powi(2) / 50.0).exp());
        let r = apply_dilation_group(&psi, 0.0, DEFAULT_LAMBDA_MAX).unwrap();
        assert_eq!(r.state.distance(&psi).unwrap(), 0.0);
        assert!(apply_dilation_group(&psi, 3.5, DEFAULT_LAMBDA_MAX).is_err());
    }

    #[test]
    fn dilation_is_unitary_on_smooth_interior_states() {
        let g = build_radial_grid(1023, 0.25).unwrap();
        let psi = WaveFunction::from_real_fn(&g, |r| (-(r - 80.0).powi(2) / 200.0).exp());
        for &lam in &[0.3, -0.3, std::f64::consts::LN_2] {
            let r = apply_dilation_group(&psi, lam, DEFAULT_LAMBDA_MAX).unwrap();
            assert!((r.state.norm() - psi.norm()).abs() < 1e-6 * psi.norm());
            assert!(r.error_estimate < 1e-6);
        }
    }

    #[test]
    fn dropped_mass_counts_outgoing_tail() {
        let g = build_radial_grid(255, 1.0).unwrap();
        let psi = WaveFunction::from_real_fn(&g, |r| if r > 200.0 { 1.0 } else { 0.0 });
        let r = apply_dilation_group(&psi, -0.5, DEFAULT_LAMBDA_MAX).unwrap();
        assert!(r.dropped_mass > 0.9 * psi.norm_sqr());
    }
}
