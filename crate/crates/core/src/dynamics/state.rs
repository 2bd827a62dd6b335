//! Initial states: a base profile, optionally filtered in energy by a smoothed spectral
//! projection `E_{[a,b]}(H)`, then normalized.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::{FilterCertificate, FilterContext, SmoothCutoff, SMOOTH_MOLLIFIER_RATIO};
use crate::grid::{weighted_norm, RadialGrid, WaveFunction, C64};
use crate::operators::PotentialSpec;

/// Shape of the unfiltered state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `u(r) = exp(−(r − r₀)²/(2σ²)) e^{i k₀ r}`.
    #[default]
    Gaussian,
    /// User samples `(Re u_j, Im u_j)` at the grid nodes.
    Samples,
}

fn default_center() -> f64 {
    100.0
}
fn default_width() -> f64 {
    10.0
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_filter_tol() -> f64 {
    1e-8
}

/// Description of an initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(default)]
    pub profile: ProfileKind,
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    /// Carrier momentum `k₀` (positive values move outward).
    #[serde(default)]
    pub momentum: f64,
    #[serde(default)]
    pub samples: Option<Vec<[f64; 2]>>,
    /// Energy window `[a, b]`.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Half-width of the filter transitions; defaults to `(b − a)/10`.
    #[serde(default)]
    pub filter_width: Option<f64>,
    /// `ε` of the weighted norm `‖⟨r⟩^{1+ε} ψ₀‖`.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_filter_tol")]
    pub filter_tol: f64,
}

impl Default for StateSpec {
    fn default() -> Self {
        Self {
            profile: ProfileKind::Gaussian,
            center: default_center(),
            width: default_width(),
            momentum: 0.0,
            samples: None,
            window: None,
            filter_width: None,
            epsilon: default_epsilon(),
            filter_tol: default_filter_tol(),
        }
    }
}

impl StateSpec {
    pub fn gaussian(center: f64, width: f64, momentum: f64) -> Self {
        Self {
            center,
            width,
            momentum,
            ..Self::default()
        }
    }

    pub fn with_window(mut self, a: f64, b: f64) -> Self {
        self.window = Some([a, b]);
        self
    }

    /// `(a, b, δ)` of the energy filter, if any.
    pub fn filter_parameters(&self) -> Option<(f64, f64, f64)> {
        self.window.map(|[a, b]| (a, b, self.filter_width.unwrap_or((b - a) / 10.0)))
    }

    /// The smoothed window `E_{[a,b]}`: rises across `[a − δ, a + δ]`, falls across
    /// `[b − δ, b + δ]`.
    pub fn energy_filter(&self) -> Result<Option<SmoothCutoff>> {
        match self.filter_parameters() {
            None => Ok(None),
            Some((a, b, d)) => Ok(Some(SmoothCutoff::bump(a, b, d, SMOOTH_MOLLIFIER_RATIO)?)),
        }
    }

    fn validate(&self, grid: &RadialGrid) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("ε must be positive, got {}", self.epsilon)));
        }
        if !(self.filter_tol > 0.0) {
            return Err(Error::Config("filter tolerance must be positive".into()));
        }
        if self.profile == ProfileKind::Gaussian && !(self.width > 0.0 && self.center > 0.0) {
            return Err(Error::Config("Gaussian profile needs positive centre and width".into()));
        }
        if let Some((a, b, d)) = self.filter_parameters() {
            if !(a > 0.0 && b > a && b < grid.k_max() && d > 0.0 && b - a >= 2.0 * d) {
                return Err(Error::Config(format!(
                    "energy window [{a}, {b}] with width {d} must satisfy 0 < a, a + 2δ ≤ b < k_max = {}",
                    grid.k_max()
                )));
            }
            if a - d < 8.0 * grid.delta_k() {
                return Err(Error::Unresolvable(format!(
                    "window edge a − δ = {} lies below 8Δk = {}",
                    a - d,
                    8.0 * grid.delta_k()
                )));
            }
        }
        Ok(())
    }

    fn base_profile(&self, grid: &Arc<RadialGrid>) -> Result<WaveFunction> {
        match self.profile {
            ProfileKind::Gaussian => {
                let (c, w, k) = (self.center, self.width, self.momentum);
                Ok(WaveFunction::from_fn(grid, |r| {
                    C64::from_polar((-(r - c).powi(2) / (2.0 * w * w)).exp(), k * r)
                }))
            }
            ProfileKind::Samples => {
                let s = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| Error::Config("sample profile without samples".into()))?;
                WaveFunction::new(Arc::clone(grid), s.iter().map(|[re, im]| C64::new(*re, *im)).collect())
            }
        }
    }
}

/// A normalized initial state with its manifest entries.
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub state: WaveFunction,
    /// `(s, ‖⟨r⟩^s ψ₀‖)` for `s ∈ {0, 1/2, 1, 1 + ε}`.
    pub weighted_norms: Vec<(f64, f64)>,
    pub filter: Option<FilterCertificate>,
    /// `‖(1 − Ẽ(H))ψ₀‖` with `Ẽ ≡ 1` on the window padded by the filter width.
    pub tail_norm: f64,
    /// Norm of the profile retained by the filter (before normalization).
    pub retained_fraction: f64,
}

/// Builds the state described by `spec` on `grid` for the Hamiltonian `|p| + V`.
pub fn prepare_state(spec: &StateSpec, v: &PotentialSpec, grid: &Arc<RadialGrid>) -> Result<PreparedState> {
    spec.validate(grid)?;
    let base = spec.base_profile(grid)?;
    let base_norm = base.norm();
    if base_norm == 0.0 {
        return Err(Error::Rejected("profile vanishes on the grid".into()));
    }
    let (state, filter, tail_norm, retained) = match spec.energy_filter()? {
        None => (base.normalized()?, None, 0.0, 1.0),
        Some(bump) => {
            let (a, b, d) = spec.filter_parameters().expect("window present");
            let ctx = FilterContext::for_potential(grid, v, spec.filter_tol)?;
            let (filtered, cert) = ctx.apply(&|l| bump.eval(l), &base)?;
            let retained = filtered.norm() / base_norm;
            if retained < 1e-6 {
                return Err(Error::Rejected(format!(
                    "energy window [{a}, {b}] excludes the spectral support of the profile (retained fraction {retained:.3e})"
                )));
            }
            let state = filtered.normalized()?;
            let cover = SmoothCutoff::bump(a - 2.0 * d, b + 2.0 * d, d, SMOOTH_MOLLIFIER_RATIO)?;
            let (covered, _) = ctx.apply(&|l| cover.eval(l), &state)?;
            let tail = state.distance(&covered)?;
            (state, Some(cert), tail, retained)
        }
    };
    let mut weighted_norms = Vec::new();
    for s in [0.0, 0.5, 1.0, 1.0 + spec.epsilon] {
        weighted_norms.push((s, weighted_norm(&state, s)?));
    }
    Ok(PreparedState {
        state,
        weighted_norms,
        filter,
        tail_norm,
        retained_fraction: retained,
    })
}
