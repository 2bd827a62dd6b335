//! Dyadic (Littlewood–Paley) partitions of the energy half-line.
//!
//! Shell `n` lives on `I_n = [2^{−n−1}, 2^{−n}]`. With smoothed steps `S_n` rising at
//! `c_n = 2^{−n−1}` over `[c_n(1−δ), c_n(1+δ)]` (and `S_{−1}` rising at 1), the profiles
//! `e_n² = S_n (1 − S_{n−1})` and `tail² = (1 − S_{n_max}) + S_{−1}` form an exact square
//! partition of unity by telescoping, provided `δ < 1/3`.

use serde::{Deserialize, Serialize};

use super::cutoff::{CutoffKind, SmoothCutoff, SMOOTH_MOLLIFIER_RATIO};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Default relative shell margin.
pub const DEFAULT_SHELL_DELTA: f64 = 0.05;
/// Default resolution requirement: the lower shell edge must exceed this many `Δk`.
pub const DEFAULT_RESOLUTION_FACTOR: f64 = 8.0;

fn step_at(c: f64, delta: f64) -> Result<SmoothCutoff> {
    SmoothCutoff::step(CutoffKind::StepUp, c, delta * c, SMOOTH_MOLLIFIER_RATIO)
}

/// One dyadic shell with its smoothed profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicShell {
    pub n: u32,
    pub delta: f64,
    lower_step: SmoothCutoff,
    upper_step: SmoothCutoff,
}

impl DyadicShell {
    pub fn new(n: u32, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0 / 3.0) {
            return Err(Error::Parameter(format!("shell margin must lie in (0, 1/3), got {delta}")));
        }
        Ok(Self {
            n,
            delta,
            lower_step: step_at(2f64.powi(-(n as i32) - 1), delta)?,
            upper_step: step_at(2f64.powi(-(n as i32)), delta)?,
        })
    }

    /// `I_n = [2^{−n−1}, 2^{−n}]`.
    pub fn interval(&self) -> (f64, f64) {
        (2f64.powi(-(self.n as i32) - 1), 2f64.powi(-(self.n as i32)))
    }

    /// Absolute margin at the upper edge, `δ 2^{−n}`.
    pub fn margin(&self) -> f64 {
        self.delta * self.interval().1
    }

    /// `[2^{−n−1}(1−δ), 2^{−n}(1+δ)]`.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.interval();
        (a * (1.0 - self.delta), b * (1.0 + self.delta))
    }

    /// `e_n(λ)²`.
    pub fn profile_sq(&self, l: f64) -> f64 {
        (self.lower_step.eval(l) * (1.0 - self.upper_step.eval(l))).max(0.0)
    }

    /// `e_n(λ)`.
    pub fn profile(&self, l: f64) -> f64 {
        self.profile_sq(l).sqrt()
    }

    /// A smoothed cover `Ẽ_n`, identically one on the support of `e_n` and vanishing
    /// outside `[2^{−n−1}(1−3δ), 2^{−n}(1+3δ)]`.
    pub fn cover(&self) -> SmoothCutoff {
        let (lo, hi) = self.support();
        let (a, b) = self.interval();
        let wl = a * self.delta;
        let wh = b * self.delta;
        let w = wl.min(wh);
        SmoothCutoff::bump(lo - w, hi + w, w, SMOOTH_MOLLIFIER_RATIO).expect("cover thresholds are ordered")
    }
}

/// A dyadic partition `{e_n}_{n=0..n_max}` together with its tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition {
    pub n_max: u32,
    pub delta: f64,
    pub shells: Vec<DyadicShell>,
    top_step: SmoothCutoff,
    bottom_step: SmoothCutoff,
}

impl DyadicPartition {
    /// `tail(λ)² = (1 − S_{n_max}(λ)) + S_{−1}(λ)`: covers `λ < 2^{−n_max−1}` and `λ > 1`.
    pub fn tail_sq(&self, l: f64) -> f64 {
        (1.0 - self.bottom_step.eval(l) + self.top_step.eval(l)).max(0.0)
    }

    pub fn tail(&self, l: f64) -> f64 {
        self.tail_sq(l).sqrt()
    }

    pub fn shell(&self, n: u32) -> Option<&DyadicShell> {
        self.shells.get(n as usize)
    }
}

/// Largest shell index whose lower edge is resolvable: `2^{−n−1} ≥ factor · Δk`.
pub fn max_resolvable_shell(grid: &RadialGrid, factor: f64) -> Option<u32> {
    let need = factor * grid.delta_k();
    if 0.5 < need {
        return None;
    }
    let mut n = 0u32;
    while 2f64.powi(-(n as i32) - 2) >= need {
        n += 1;
    }
    Some(n)
}

/// Builds the partition; with a grid, also checks the shells are resolvable.
pub fn make_dyadic_partition(n_max: u32, delta: f64, grid: Option<(&RadialGrid, f64)>) -> Result<DyadicPartition> {
    if let Some((g, factor)) = grid {
        let lowest = 2f64.powi(-(n_max as i32) - 1);
        if lowest < factor * g.delta_k() {
            return Err(Error::Unresolvable(format!(
                "shell {n_max} starts at {lowest:.4e} < {factor}·Δk = {:.4e}",
                factor * g.delta_k()
            )));
        }
    }
    let shells = (0..=n_max).map(|n| DyadicShell::new(n, delta)).collect::<Result<Vec<_>>>()?;
    Ok(DyadicPartition {
        n_max,
        delta,
        top_step: step_at(1.0, delta)?,
        bottom_step: step_at(2f64.powi(-(n_max as i32) - 1), delta)?,
        shells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_radial_grid;

    #[test]
    fn shell_one_interval() {
        let s = DyadicShell::new(1, 0.05).unwrap();
        assert_eq!(s.interval(), (0.25, 0.5));
    }

    #[test]
    fn square_partition_of_unity() {
        let p = make_dyadic_partition(7, 0.05, None).unwrap();
        for i in 0..1000 {
            let l = 2f64.powf(-9.0 + 10.0 * i as f64 / 999.0);
            let s: f64 = p.shells.iter().map(|e| e.profile_sq(l)).sum::<f64>() + p.tail_sq(l);
            assert!((s - 1.0).abs() < 1e-10, "λ={l}: {s}");
        }
    }

    #[test]
    fn supports_and_cover() {
        let s = DyadicShell::new(3, 0.05).unwrap();
        let (lo, hi) = s.support();
        assert_eq!(s.profile(lo * 0.999), 0.0);
        assert_eq!(s.profile(hi * 1.001), 0.0);
        let c = s.cover();
        for i in 0..=200 {
            let l = lo + (hi - lo) * i as f64 / 200.0;
            assert_eq!(c.eval(l), 1.0);
        }
    }

    #[test]
    fn resolvability_on_large_grid() {
        let g = build_radial_grid(16384, 0.25).unwrap();
        assert_eq!(max_resolvable_shell(&g, 8.0), Some(6));
        assert!(make_dyadic_partition(6, 0.05, Some((&g, 8.0))).is_ok());
        assert!(make_dyadic_partition(7, 0.05, Some((&g, 8.0))).is_err());
    }
}
