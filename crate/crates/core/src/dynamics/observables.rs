//! Time series of position-space observables `‖F(r/t)ψ(t)‖²` along a trajectory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::propagate::Trajectory;
use crate::error::{Error, Result};
use crate::funcalc::{DyadicShell, FilterContext, SmoothCutoff, DEFAULT_MOLLIFIER_RATIO};
use crate::grid::WaveFunction;

/// Cutoffs in the velocity variable `r/t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PositionObservable {
    /// `F(r/t > a)`, transition `[a − δ, a + δ]`.
    Outgoing { a: f64, width: f64 },
    /// `F(r/t < b)`, transition `[b − δ, b + δ]`.
    Incoming { b: f64, width: f64 },
}

impl PositionObservable {
    pub fn outgoing(a: f64, width: f64) -> Result<Self> {
        if !(a > 1.0) {
            return Err(Error::Precondition(format!("outgoing observables need a > 1, got {a}")));
        }
        Ok(Self::Outgoing { a, width })
    }

    pub fn incoming(b: f64, width: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::Precondition(format!("incoming observables need 0 < b < 1, got {b}")));
        }
        Ok(Self::Incoming { b, width })
    }

    pub fn cutoff(&self) -> Result<SmoothCutoff> {
        match *self {
            Self::Outgoing { a, width } => SmoothCutoff::step_up(a, width),
            Self::Incoming { b, width } => SmoothCutoff::step_down(b, width),
        }
    }

    /// `F(r/t)ψ` (pointwise multiplication).
    pub fn apply(&self, t: f64, psi: &WaveFunction) -> Result<WaveFunction> {
        let f = self.cutoff()?;
        Ok(psi.multiply_by(|r| f.eval(r / t)))
    }

    pub fn tag(&self) -> String {
        match *self {
            Self::Outgoing { a, .. } => format!("F(r/t>{a})"),
            Self::Incoming { b, .. } => format!("F(r/t<{b})"),
        }
    }
}

/// Observables along a trajectory.
#[derive(Debug, Clone)]
pub enum Observable {
    Position(PositionObservable),
    /// `‖F(r/t) E_n(H) ψ(t)‖²`.
    ShellLocalized { position: PositionObservable, shell: DyadicShell },
}

/// A sampled time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub tag: String,
    pub shell: Option<u32>,
    pub times: Vec<f64>,
    #[serde(with = "crate::floats::vec")]
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(tag: impl Into<String>, shell: Option<u32>, times: Vec<f64>, values: Vec<f64>) -> Self {
        Self {
            tag: tag.into(),
            shell,
            times,
            values,
        }
    }

    /// Value at the sample closest to `t`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some(self.values[i])
    }

    /// Nonincreasing over all samples with `t ≥ t0`.
    pub fn nonincreasing_from(&self, t0: f64) -> bool {
        let tail: Vec<f64> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= t0)
            .map(|(_, v)| *v)
            .collect();
        tail.windows(2).all(|w| w[1] <= w[0])
    }

    /// Strictly decreasing over all samples with `t ≥ t0`.
    pub fn decreasing_from(&self, t0: f64) -> bool {
        let tail: Vec<f64> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= t0)
            .map(|(_, v)| *v)
            .collect();
        tail.windows(2).all(|w| w[1] < w[0])
    }

    /// Earliest sample time from which the series is nonincreasing.
    pub fn monotone_onset(&self) -> Option<f64> {
        let n = self.values.len();
        if n == 0 {
            return None;
        }
        let mut k = n - 1;
        while k > 0 && self.values[k] <= self.values[k - 1] {
            k -= 1;
        }
        Some(self.times[k])
    }

    /// `sup_{t ≥ T} P(t)` for every sample `T`.
    pub fn running_sup_from_right(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        let mut m = f64::NEG_INFINITY;
        for i in (0..self.values.len()).rev() {
            m = m.max(self.values[i]);
            out[i] = m;
        }
        out
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// `P(t_k) = ‖F(·/t_k) ψ(t_k)‖²` (or its shell-localized variant) at every sample.
pub fn observable_series(traj: &Trajectory, obs: &Observable, filter: Option<&FilterContext>) -> Result<TimeSeries> {
    let (position, shell) = match obs {
        Observable::Position(p) => (*p, None),
        Observable::ShellLocalized { position, shell } => (*position, Some(shell)),
    };
    let values: Vec<f64> = traj
        .times
        .par_iter()
        .zip(traj.states.par_iter())
        .map(|(&t, psi)| -> Result<f64> {
            let localized = match shell {
                None => psi.clone(),
                Some(sh) => {
                    let ctx = filter.ok_or_else(|| {
                        Error::Parameter("shell-localized observables need a filter context".into())
                    })?;
                    ctx.apply(&|l| sh.profile(l), psi)?.0
                }
            };
            Ok(position.apply(t, &localized)?.norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(TimeSeries::new(
        position.tag(),
        shell.map(|s| s.n),
        traj.times.clone(),
        values,
    ))
}

/// `(P_>, P_<, P_band)` for `F_> = F(r/t > a)`, `F_< = 1 − F_>` and the overlap term
/// `2⟨ψ, F_>(1 − F_>)ψ⟩`; the three sum to `‖ψ‖²`.
pub fn complementary_partition(t: f64, a: f64, width: f64, psi: &WaveFunction) -> Result<(f64, f64, f64)> {
    let f = SmoothCutoff::step(crate::funcalc::CutoffKind::StepUp, a, width, DEFAULT_MOLLIFIER_RATIO)?;
    let h = psi.grid().spacing();
    let (mut up, mut down, mut band) = (0.0, 0.0, 0.0);
    for (j, z) in psi.values().iter().enumerate() {
        let x = f.eval(psi.grid().node(j) / t);
        let w = z.norm_sqr();
        up += x * x * w;
        down += (1.0 - x) * (1.0 - x) * w;
        band += 2.0 * x * (1.0 - x) * w;
    }
    Ok((h * up, h * down, h * band))
}
