//! Experiment configuration: a TOML document with the sections `[grid]`, `[potential]`,
//! `[state]`, `[cutoffs]`, `[time]` and `[tolerances]`. Unknown keys are errors, and
//! the side conditions `1 < R < a`, `b/R < 1`, `b < 1`, `ε > 0` are enforced at load.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{geometric_times, PropagationOptions, StateSpec, DEFAULT_TIME_RATIO, MAX_STEP};
use crate::error::{Error, Result};
use crate::funcalc::{DyadicShell, SmoothCutoff, SMOOTH_MOLLIFIER_RATIO};
use crate::grid::{build_radial_grid, RadialGrid};
use crate::operators::PotentialSpec;

/// How functions of `H` and `A` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Dense eigendecompositions up to the oracle cap, matrix-free beyond.
    #[default]
    Auto,
    Dense,
    /// Chebyshev filters for `f(H)` and the Mellin pipeline for `f(A)`.
    MatrixFree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub spacing: f64,
    #[serde(default)]
    pub backend: Backend,
}

fn d_r() -> f64 {
    2.0
}
fn d_a() -> f64 {
    4.0
}
fn d_b() -> f64 {
    0.5
}
fn d_position_width() -> f64 {
    0.05
}
fn d_a_width() -> f64 {
    0.5
}
fn d_epsilon() -> f64 {
    0.1
}
fn d_shell_delta() -> f64 {
    crate::funcalc::DEFAULT_SHELL_DELTA
}
fn d_n_max() -> u32 {
    7
}

/// Cutoff parameters: `R` for the A-observables `F(A/(R t 2^{−n}) > 1)`, the outgoing
/// and incoming position thresholds `a` and `b`, and the relative transition widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSection {
    #[serde(default = "d_r")]
    pub r: f64,
    #[serde(default = "d_a")]
    pub a: f64,
    #[serde(default = "d_b")]
    pub b: f64,
    /// Half-width of the position cutoffs in the variable `r/t`.
    #[serde(default = "d_position_width")]
    pub position_width: f64,
    /// Half-width of the A-cutoffs relative to their threshold.
    #[serde(default = "d_a_width")]
    pub a_width: f64,
    /// `ε` of `F̃_n(u) = F(|u| < (1 − ε)2^{−n})` and of the `⟨n⟩^{1+ε}` weights.
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    #[serde(default = "d_shell_delta")]
    pub shell_delta: f64,
    /// Shell range `[0, n_max]` of dyadic decompositions.
    #[serde(default = "d_n_max")]
    pub n_max: u32,
    /// Shells evaluated individually; defaults to the whole range.
    #[serde(default)]
    pub shells: Option<Vec<u32>>,
}

impl Default for CutoffSection {
    fn default() -> Self {
        Self {
            r: d_r(),
            a: d_a(),
            b: d_b(),
            position_width: d_position_width(),
            a_width: d_a_width(),
            epsilon: d_epsilon(),
            shell_delta: d_shell_delta(),
            n_max: d_n_max(),
            shells: None,
        }
    }
}

impl CutoffSection {
    pub fn shell_list(&self) -> Vec<u32> {
        self.shells.clone().unwrap_or_else(|| (0..=self.n_max).collect())
    }

    pub fn shell(&self, n: u32) -> Result<DyadicShell> {
        DyadicShell::new(n, self.shell_delta)
    }

    /// `F(u > 1)` with transition `[1 − w, 1 + w]`; evaluated at `A/(R t 2^{−n})`.
    pub fn a_step(&self) -> Result<SmoothCutoff> {
        SmoothCutoff::step(crate::funcalc::CutoffKind::StepUp, 1.0, self.a_width, SMOOTH_MOLLIFIER_RATIO)
    }

    /// Bump `G(u ∼ 1)` equal to one on `[1 − w, 1 + w]`.
    pub fn a_bump(&self) -> Result<SmoothCutoff> {
        let w = self.a_width / 2.0;
        SmoothCutoff::bump(1.0 - 2.0 * w, 1.0 + 2.0 * w, w, SMOOTH_MOLLIFIER_RATIO)
    }

    /// `F̃(|u| < 1 − ε)`, evaluated at `A/(t 2^{−n})`.
    pub fn incoming_a_bump(&self) -> Result<SmoothCutoff> {
        let c = 1.0 - self.epsilon;
        SmoothCutoff::bump(-c, c, self.a_width * c / 2.0, SMOOTH_MOLLIFIER_RATIO)
    }
}

fn d_t_start() -> f64 {
    1.0
}
fn d_t_end() -> f64 {
    512.0
}
fn d_ratio() -> f64 {
    DEFAULT_TIME_RATIO
}
fn d_dt() -> f64 {
    0.01
}

/// Geometric sampling `t_k = t_start ρ^k` over `[t_start, T]` and the split-step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default = "d_t_start")]
    pub t_start: f64,
    #[serde(default = "d_t_end")]
    pub t_end: f64,
    #[serde(default = "d_ratio")]
    pub ratio: f64,
    #[serde(default = "d_dt")]
    pub dt: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            t_start: d_t_start(),
            t_end: d_t_end(),
            ratio: d_ratio(),
            dt: d_dt(),
        }
    }
}

impl TimeSection {
    pub fn samples(&self) -> Result<Vec<f64>> {
        geometric_times(self.t_start, self.ratio, self.t_end)
    }
}

fn d_filter() -> f64 {
    1e-10
}
fn d_boundary() -> f64 {
    1e-6
}
fn d_tail_from() -> f64 {
    128.0
}
fn d_decay_time() -> f64 {
    200.0
}
fn d_monotone_from() -> f64 {
    50.0
}
fn d_agreement() -> f64 {
    1e-5
}

/// Tolerances and envelopes. Options left unset take the experiment's default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    /// Accuracy of spectral filters.
    #[serde(default = "d_filter")]
    pub filter: f64,
    /// Relative mass allowed beyond `0.9 L`.
    #[serde(default = "d_boundary")]
    pub boundary: f64,
    /// Cauchy tails are certified for `T ≥ tail_from`.
    #[serde(default = "d_tail_from")]
    pub tail_from: f64,
    /// Required shrink factor of successive Cauchy tails (2 for propagation integrals,
    /// 1.4 for the minimal-velocity accumulator).
    #[serde(default)]
    pub tail_ratio: Option<f64>,
    #[serde(default = "d_decay_time")]
    pub decay_time: f64,
    /// Level the decay curve must be below from `decay_time` on (`1e−3` for `V = 0`
    /// and for the minimal-velocity curve, `5e−3` for interacting maximal velocity).
    #[serde(default)]
    pub decay_level: Option<f64>,
    /// The maximal-velocity curve must be nonincreasing from this time on.
    #[serde(default = "d_monotone_from")]
    pub monotone_from: f64,
    /// Agreement between split-step and dense evolutions.
    #[serde(default = "d_agreement")]
    pub agreement: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self {
            filter: d_filter(),
            boundary: d_boundary(),
            tail_from: d_tail_from(),
            tail_ratio: None,
            decay_time: d_decay_time(),
            decay_level: None,
            monotone_from: d_monotone_from(),
            agreement: d_agreement(),
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSection,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub state: StateSpec,
    #[serde(default)]
    pub cutoffs: CutoffSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
}

impl ExperimentConfig {
    /// A configuration on the given grid with every other section at its default.
    pub fn new(n_points: usize, spacing: f64) -> Self {
        Self {
            seed: 0,
            grid: GridSection {
                n_points,
                spacing,
                backend: Backend::Auto,
            },
            potential: PotentialSpec::Zero,
            state: StateSpec::default(),
            cutoffs: CutoffSection::default(),
            time: TimeSection::default(),
            tolerances: ToleranceSection::default(),
        }
    }

    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Enforces the side conditions and basic ranges.
    pub fn validate(&self) -> Result<()> {
        let c = &self.cutoffs;
        if !(c.r > 1.0) {
            return Err(Error::Config(format!("R must exceed 1, got {}", c.r)));
        }
        if !(c.a > c.r) {
            return Err(Error::Config(format!("need 1 < R < a, got R = {}, a = {}", c.r, c.a)));
        }
        if !(c.b < 1.0) {
            return Err(Error::Config(format!("need b < 1, got {}", c.b)));
        }
        if !(c.b > 0.0 && c.b / c.r < 1.0) {
            return Err(Error::Config(format!("need 0 < b and b/R < 1, got b = {}, R = {}", c.b, c.r)));
        }
        if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
            return Err(Error::Config(format!("ε must lie in (0, 1), got {}", c.epsilon)));
        }
        if !(c.position_width > 0.0 && c.position_width < c.b.min(c.a - 1.0)) {
            return Err(Error::Config(format!(
                "position width {} must be positive and below min(b, a − 1)",
                c.position_width
            )));
        }
        if !(c.a_width > 0.0 && c.a_width < 1.0) {
            return Err(Error::Config(format!("A-cutoff width must lie in (0, 1), got {}", c.a_width)));
        }
        if !(c.shell_delta > 0.0 && c.shell_delta < 1.0 / 3.0) {
            return Err(Error::Config(format!("shell margin must lie in (0, 1/3), got {}", c.shell_delta)));
        }
        if let Some(s) = &c.shells {
            if s.is_empty() || s.iter().any(|n| *n > c.n_max) {
                return Err(Error::Config(format!("shells {s:?} must be nonempty and lie in [0, {}]", c.n_max)));
            }
        }
        let t = &self.time;
        if !(t.t_start > 0.0 && t.t_end > t.t_start && t.ratio > 1.0) {
            return Err(Error::Config("time range needs 0 < t_start < T and ratio > 1".into()));
        }
        if !(t.dt > 0.0 && t.dt <= MAX_STEP) {
            return Err(Error::Config(format!("dt must lie in (0, {MAX_STEP}], got {}", t.dt)));
        }
        let tol = &self.tolerances;
        let positive = [tol.filter, tol.boundary, tol.tail_from, tol.decay_time, tol.agreement];
        if positive.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if tol.tail_ratio.is_some_and(|r| !(r > 1.0)) || tol.decay_level.is_some_and(|l| !(l > 0.0)) {
            return Err(Error::Config("tail ratio must exceed 1 and decay level be positive".into()));
        }
        RadialGrid::new(self.grid.n_points, self.grid.spacing).map_err(|e| Error::Config(e.to_string()))?;
        self.potential.validate_parameters().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<RadialGrid>> {
        build_radial_grid(self.grid.n_points, self.grid.spacing)
    }

    pub fn propagation_options(&self) -> PropagationOptions {
        PropagationOptions {
            t_start: self.time.t_start,
            ratio: self.time.ratio,
            boundary_fraction: 0.9,
            boundary_tol: self.tolerances.boundary,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nn_points = 255\nspacing = 0.5\n";

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.cutoffs.r, 2.0);
        assert_eq!(cfg.time.t_end, 512.0);
        assert_eq!(cfg.potential, PotentialSpec::Zero);
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_and_side_conditions_are_rejected() {
        let bad = format!("{MINIMAL}[cutoffs]\nradius = 3.0\n");
        assert!(matches!(ExperimentConfig::from_toml_str(&bad), Err(Error::Config(_))));
        for extra in ["r = 0.9", "a = 1.5", "b = 1.0", "epsilon = 0.0", "b = 2.5\nr = 2.0\na = 3.0"] {
            let text = format!("{MINIMAL}[cutoffs]\n{extra}\n");
            assert!(ExperimentConfig::from_toml_str(&text).is_err(), "{extra}");
        }
        let ok = format!("{MINIMAL}[cutoffs]\nr = 1.1\na = 1.25\n");
        assert!(ExperimentConfig::from_toml_str(&ok).is_ok());
    }

    #[test]
    fn potential_section_parses() {
        let text = format!("{MINIMAL}[potential]\nfamily = \"soft-decay\"\nstrength = -0.3\ndecay = 3.0\n");
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.potential, PotentialSpec::soft_decay(-0.3, 3.0));
    }
}
