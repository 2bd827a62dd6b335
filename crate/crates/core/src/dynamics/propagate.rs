//! Strang split-step propagation `e^{−iV τ/2} e^{−i|p|τ} e^{−iV τ/2}` with the kinetic
//! factor exact in the sine basis, and a Krylov propagator used as a second oracle.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, WaveFunction, C64};
use crate::linalg::lanczos_expm;
use crate::operators::{Hamiltonian, PotentialSpec};
use crate::oracle::ORACLE_MAX_N;

/// Default ratio of the geometric sampling grid.
pub const DEFAULT_TIME_RATIO: f64 = 1.090_507_732_665_257_7; // 2^{1/8}
/// Largest admissible step.
pub const MAX_STEP: f64 = 0.1;

/// Sampling and monitoring parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationOptions {
    /// First sample time of the geometric grid; the evolution starts at `t = 0`.
    pub t_start: f64,
    pub ratio: f64,
    /// Boundary mass is measured beyond `fraction · L`.
    pub boundary_fraction: f64,
    pub boundary_tol: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            t_start: 1.0,
            ratio: DEFAULT_TIME_RATIO,
            boundary_fraction: 0.9,
            boundary_tol: 1e-6,
        }
    }
}

/// `t_k = t_start ρ^k` up to `T`, with `T` appended when it is not a grid point.
pub fn geometric_times(t_start: f64, ratio: f64, t_end: f64) -> Result<Vec<f64>> {
    if !(t_start > 0.0 && ratio > 1.0 && t_end >= t_start) {
        return Err(Error::Parameter(format!(
            "geometric grid needs 0 < t_start ≤ T and ratio > 1 (t_start={t_start}, ratio={ratio}, T={t_end})"
        )));
    }
    let mut times = Vec::new();
    let mut k = 0i32;
    loop {
        let t = t_start * ratio.powi(k);
        if t > t_end * (1.0 + 1e-12) {
            break;
        }
        times.push(t);
        k += 1;
    }
    if (times.last().copied().unwrap_or(0.0) - t_end).abs() > 1e-9 * t_end {
        times.push(t_end);
    }
    Ok(times)
}

/// States sampled along an evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Arc<RadialGrid>,
    pub potential: PotentialSpec,
    pub times: Vec<f64>,
    pub states: Vec<WaveFunction>,
    pub step: f64,
    /// `|‖ψ(t_k)‖ − ‖ψ₀‖|` at each sample.
    pub norm_drift: Vec<f64>,
    /// Relative mass beyond `boundary_fraction · L` at each sample.
    pub boundary_mass: Vec<f64>,
    /// True when the boundary mass exceeded the tolerance at some sample.
    pub flagged: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest norm drift per unit time.
    pub fn drift_rate(&self) -> f64 {
        self.times
            .iter()
            .zip(&self.norm_drift)
            .map(|(t, d)| d / t.max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn max_boundary_mass(&self) -> f64 {
        self.boundary_mass.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the sample at time `t` (within relative `1e−9`).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
    }
}

/// Split-step stepper for one grid and potential.
#[derive(Debug, Clone)]
pub struct SplitStep {
    grid: Arc<RadialGrid>,
    v: Vec<f64>,
}

impl SplitStep {
    pub fn new(grid: &Arc<RadialGrid>, potential: &PotentialSpec) -> Self {
        Self {
            grid: Arc::clone(grid),
            v: potential.samples(grid),
        }
    }

    fn potential_phase(&self, tau: f64) -> Vec<C64> {
        self.v.iter().map(|v| C64::from_polar(1.0, -v * tau)).collect()
    }

    /// Advances `x` by `n` Strang steps of length `tau`, merging adjacent half-steps.
    pub fn advance(&self, x: &mut [C64], tau: f64, n: usize) {
        if n == 0 {
            return;
        }
        let t = self.grid.transform();
        let half = self.potential_phase(0.5 * tau);
        let full = self.potential_phase(tau);
        let kin: Vec<C64> = (0..self.grid.n_points())
            .map(|m| C64::from_polar(1.0, -self.grid.momentum(m) * tau))
            .collect();
        let free = self.v.iter().all(|v| *v == 0.0);
        if !free {
            x.iter_mut().zip(&half).for_each(|(z, p)| *z *= p);
        }
        for step in 0..n {
            t.apply_in_place(x);
            x.iter_mut().zip(&kin).for_each(|(z, p)| *z *= p);
            t.apply_in_place(x);
            if !free {
                let phase = if step + 1 == n { &half } else { &full };
                x.iter_mut().zip(phase).for_each(|(z, p)| *z *= p);
            }
        }
    }
}

/// Evolves `psi0` from `t = 0` and records the states at the increasing `times`; each
/// interval is covered by equal steps not exceeding `dt`, landing exactly on the samples.
pub fn propagate_to(
    psi0: &WaveFunction,
    v: &PotentialSpec,
    times: &[f64],
    dt: f64,
    options: &PropagationOptions,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt <= MAX_STEP) {
        return Err(Error::Parameter(format!("time step must lie in (0, {MAX_STEP}], got {dt}")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::Parameter("sample times must be nonnegative and increasing".into()));
    }
    let grid = psi0.grid();
    let stepper = SplitStep::new(grid, v);
    let n0 = psi0.norm();
    let total = psi0.norm_sqr().max(f64::MIN_POSITIVE);
    let mut x = psi0.values().to_vec();
    let mut now = 0.0;
    let mut states = Vec::with_capacity(times.len());
    let mut norm_drift = Vec::with_capacity(times.len());
    let mut boundary_mass = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let n = (span / dt - 1e-9).ceil().max(1.0) as usize;
            stepper.advance(&mut x, span / n as f64, n);
        }
        now = t;
        let psi = WaveFunction::from_parts(grid, x.clone());
        norm_drift.push((psi.norm() - n0).abs());
        boundary_mass.push(psi.mass_beyond(options.boundary_fraction) / total);
        states.push(psi);
    }
    let flagged = boundary_mass.iter().any(|m| *m > options.boundary_tol);
    Ok(Trajectory {
        grid: Arc::clone(grid),
        potential: v.clone(),
        times: times.to_vec(),
        states,
        step: dt,
        norm_drift,
        boundary_mass,
        flagged,
    })
}

/// Split-step evolution sampled on the default geometric grid over `[1, T]`.
pub fn propagate_split_step(psi0: &WaveFunction, v: &PotentialSpec, t_end: f64, dt: f64) -> Result<Trajectory> {
    let options = PropagationOptions::default();
    let times = geometric_times(options.t_start, options.ratio, t_end)?;
    propagate_to(psi0, v, &times, dt, &options)
}

/// `e^{−iHt}ψ₀` by Krylov exponentials of dimension `m` (second oracle, `N ≤ 2048`).
pub fn propagate_krylov(psi0: &WaveFunction, v: &PotentialSpec, t: f64, m: usize, substeps: usize) -> Result<WaveFunction> {
    let grid = psi0.grid();
    if grid.n_points() > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge {
            max: ORACLE_MAX_N,
            got: grid.n_points(),
        });
    }
    let h = Hamiltonian::new(grid, v);
    let apply = |x: &[C64]| {
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        h.apply_raw(x, &mut out);
        out
    };
    Ok(WaveFunction::from_parts(grid, lanczos_expm(&apply, psi0.values(), t, m, substeps)))
}
