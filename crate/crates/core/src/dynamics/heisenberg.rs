//! Consistency of `d/dt ⟨ψ(t), Φ(t)ψ(t)⟩` with the Heisenberg derivative
//! `⟨ψ(t), (i[H, Φ(t)] + ∂_tΦ(t)) ψ(t)⟩`.

use std::sync::Arc;

use serde::Serialize;

use super::propagate::Trajectory;
use crate::error::Result;
use crate::funcalc::{DyadicShell, FilterContext, MellinPlan, SmoothCutoff};
use crate::grid::{apply_complex_multiplier, WaveFunction, C64};
use crate::linalg::lanczos_expm;
use crate::operators::Hamiltonian;

/// A time-dependent family of bounded self-adjoint operators.
pub trait ObservableFamily: Send + Sync {
    fn apply(&self, t: f64, psi: &WaveFunction) -> Result<WaveFunction>;
    fn label(&self) -> String;
}

/// `Φ = g(H)`, constant in time and commuting with `H`.
pub struct SpectralObservable {
    pub filter: Arc<FilterContext>,
    pub function: SmoothCutoff,
}

impl ObservableFamily for SpectralObservable {
    fn apply(&self, _t: f64, psi: &WaveFunction) -> Result<WaveFunction> {
        Ok(self.filter.apply(&|l| self.function.eval(l), psi)?.0)
    }
    fn label(&self) -> String {
        "g(H)".into()
    }
}

/// `Φ_n(t) = E_n(H) F(A/(R t 2^{−n}) > 1) E_n(H)`, optionally with the weight `A/t`
/// between the cutoff and the projections.
pub struct ShellObservable {
    pub filter: Arc<FilterContext>,
    pub shell: DyadicShell,
    pub cutoff: SmoothCutoff,
    pub r: f64,
    pub weighted: bool,
    pub plan: MellinPlan,
}

impl ShellObservable {
    pub fn scale(&self, t: f64) -> f64 {
        self.r * t * 2f64.powi(-(self.shell.n as i32))
    }
}

impl ObservableFamily for ShellObservable {
    fn apply(&self, t: f64, psi: &WaveFunction) -> Result<WaveFunction> {
        let profile = |l: f64| self.shell.profile(l);
        let (e, _) = self.filter.apply(&profile, psi)?;
        let s = self.scale(t);
        let mid = if self.weighted {
            let reach = crate::funcalc::kernel_reach(&self.cutoff, s, 1, self.plan.kernel_tol);
            let f = &self.cutoff;
            let g = move |tau: f64| C64::new(tau / t * f.eval(tau / s), 0.0);
            self.plan.apply_multiplier(&g, reach, &e)?.state
        } else {
            self.plan.apply_cutoff(&self.cutoff, 0, s, &e)?.state
        };
        Ok(self.filter.apply(&profile, &mid)?.0)
    }
    fn label(&self) -> String {
        if self.weighted {
            format!("E_{n} (A/t) F(A/(R t 2^-{n}) > 1) E_{n}", n = self.shell.n)
        } else {
            format!("E_{n} F(A/(R t 2^-{n}) > 1) E_{n}", n = self.shell.n)
        }
    }
}

/// One comparison at a sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeisenbergResidual {
    pub t: f64,
    /// Centered difference of `⟨ψ, Φψ⟩` along the evolution.
    pub lhs: f64,
    /// `⟨ψ, (i[H, Φ] + ∂_tΦ)ψ⟩`.
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
}

fn evolve(h: &Hamiltonian, psi: &WaveFunction, dt: f64) -> WaveFunction {
    if h.potential().is_zero() {
        return apply_complex_multiplier(psi, |k| C64::from_polar(1.0, -k * dt));
    }
    let apply = |x: &[C64]| {
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        h.apply_raw(x, &mut out);
        out
    };
    let spread = h.grid().k_max() + h.v_max().abs().max(h.v_min().abs());
    let substeps = ((spread * dt.abs()) / 4.0).ceil().max(1.0) as usize;
    WaveFunction::from_parts(psi.grid(), lanczos_expm(&apply, psi.values(), dt, 40, substeps))
}

/// Residuals at the trajectory samples `indices`, with the centered differences taken
/// over `t ± rel_step · t`.
pub fn heisenberg_check(
    family: &dyn ObservableFamily,
    traj: &Trajectory,
    indices: &[usize],
    rel_step: f64,
) -> Result<Vec<HeisenbergResidual>> {
    let h = Hamiltonian::new(&traj.grid, &traj.potential);
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let t = traj.times[i];
        let psi = &traj.states[i];
        let d = rel_step * t;
        let plus = evolve(&h, psi, d);
        let minus = evolve(&h, psi, -d);
        let e_plus = plus.inner(&family.apply(t + d, &plus)?)?.re;
        let e_minus = minus.inner(&family.apply(t - d, &minus)?)?.re;
        let lhs = (e_plus - e_minus) / (2.0 * d);

        let phi = family.apply(t, psi)?;
        let h_phi = h.apply(&phi)?;
        let phi_h = family.apply(t, &h.apply(psi)?)?;
        let comm = (psi.inner(&h_phi)? - psi.inner(&phi_h)?) * C64::new(0.0, 1.0);
        let dphi = (psi.inner(&family.apply(t + d, psi)?)? - psi.inner(&family.apply(t - d, psi)?)?) / (2.0 * d);
        let rhs = (comm + dphi).re;
        let residual = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs());
        out.push(HeisenbergResidual {
            t,
            lhs,
            rhs,
            residual,
            relative: if scale > 0.0 { residual / scale } else { 0.0 },
        });
    }
    Ok(out)
}
