//! Radial potential catalog, decay norms and admissibility checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Radial potentials understood by the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `V ≡ 0`.
    Zero,
    /// `V(r) = γ (1 + r²)^{-β/2}`.
    SoftDecay { strength: f64, decay: f64 },
    /// Samples `(r, V(r))`, linearly interpolated, constant below the first abscissa
    /// and zero beyond the last one.
    Tabulated { samples: Vec<[f64; 2]> },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::Zero
    }
}

impl PotentialSpec {
    pub fn soft_decay(strength: f64, decay: f64) -> Self {
        PotentialSpec::SoftDecay { strength, decay }
    }

    /// Checks that the parameters describe a usable potential.
    pub fn validate_parameters(&self) -> Result<()> {
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::SoftDecay { strength, decay } => {
                if !strength.is_finite() || !decay.is_finite() || *decay <= 0.0 {
                    return Err(Error::Parameter(format!(
                        "soft-decay potential needs finite strength and positive decay, got ({strength}, {decay})"
                    )));
                }
                Ok(())
            }
            PotentialSpec::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::Parameter("tabulated potential needs at least two samples".into()));
                }
                if samples.iter().any(|s| !s[0].is_finite() || !s[1].is_finite() || s[0] < 0.0) {
                    return Err(Error::Parameter("tabulated samples must be finite with r >= 0".into()));
                }
                if samples.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::Parameter("tabulated abscissae must be strictly increasing".into()));
                }
                Ok(())
            }
        }
    }

    /// Short identifier recorded in manifests and checkpoints.
    pub fn id(&self) -> String {
        match self {
            PotentialSpec::Zero => "zero".into(),
            PotentialSpec::SoftDecay { strength, decay } => {
                format!("soft-decay(strength={strength:?},decay={decay:?})")
            }
            PotentialSpec::Tabulated { samples } => format!("tabulated(samples={})", samples.len()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::SoftDecay { strength, .. } => *strength == 0.0,
            PotentialSpec::Tabulated { samples } => samples.iter().all(|s| s[1] == 0.0),
        }
    }

    fn table_segment(samples: &[[f64; 2]], r: f64) -> Option<usize> {
        if r < samples[0][0] || r > samples[samples.len() - 1][0] {
            return None;
        }
        let idx = samples.partition_point(|s| s[0] <= r);
        Some(idx.saturating_sub(1).min(samples.len() - 2))
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SoftDecay { strength, decay } => strength * (1.0 + r * r).powf(-decay / 2.0),
            PotentialSpec::Tabulated { samples } => {
                let last = samples[samples.len() - 1];
                if r > last[0] {
                    return 0.0;
                }
                if r <= samples[0][0] {
                    return samples[0][1];
                }
                let i = Self::table_segment(samples, r).unwrap_or(0);
                let (a, b) = (samples[i], samples[i + 1]);
                a[1] + (b[1] - a[1]) * (r - a[0]) / (b[0] - a[0])
            }
        }
    }

    /// `V′(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SoftDecay { strength, decay } => {
                -decay * strength * r * (1.0 + r * r).powf(-decay / 2.0 - 1.0)
            }
            PotentialSpec::Tabulated { samples } => match Self::table_segment(samples, r) {
                Some(i) => (samples[i + 1][1] - samples[i][1]) / (samples[i + 1][0] - samples[i][0]),
                None => 0.0,
            },
        }
    }

    /// `V″(r)` (zero for tabulated data, whose interpolant is piecewise linear).
    pub fn second_derivative(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::SoftDecay { strength, decay } => {
                let q = 1.0 + r * r;
                -decay * strength * (q.powf(-decay / 2.0 - 1.0) - (decay + 2.0) * r * r * q.powf(-decay / 2.0 - 2.0))
            }
            _ => 0.0,
        }
    }

    /// `W_A(r) = −r V′(r)`, the potential part of `i[H, A]`.
    pub fn virial(&self, r: f64) -> f64 {
        -r * self.derivative(r)
    }

    /// `r W_A′(r) = −r V′ − r² V″`, the potential part of the double commutator.
    pub fn double_virial(&self, r: f64) -> f64 {
        -r * self.derivative(r) - r * r * self.second_derivative(r)
    }

    /// Samples of `V` at the grid nodes.
    pub fn samples(&self, grid: &RadialGrid) -> Vec<f64> {
        (0..grid.n_points()).map(|j| self.value(grid.node(j))).collect()
    }

    /// Closed-form supremum of `⟨r⟩^α |V(r)|` over `r ≥ 0` (`None` when not available).
    fn analytic_decay_norm(&self, alpha: f64) -> Option<f64> {
        match self {
            PotentialSpec::Zero => Some(0.0),
            PotentialSpec::SoftDecay { strength, decay } => {
                if *strength == 0.0 {
                    Some(0.0)
                } else if alpha <= *decay {
                    // (1 + r²)^{(α−β)/2} is maximal at r = 0.
                    Some(strength.abs())
                } else {
                    Some(f64::INFINITY)
                }
            }
            PotentialSpec::Tabulated { samples } => Some(
                samples
                    .iter()
                    .map(|s| (1.0 + s[0] * s[0]).powf(alpha / 2.0) * s[1].abs())
                    .fold(0.0, f64::max),
            ),
        }
    }

    /// `c̄ = sup_r r |V(r)|`.
    pub fn hardy_constant(&self) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SoftDecay { strength, decay } => {
                if *strength == 0.0 {
                    0.0
                } else if *decay <= 1.0 {
                    f64::INFINITY
                } else {
                    let rs = 1.0 / (decay - 1.0).sqrt();
                    strength.abs() * rs * (1.0 + rs * rs).powf(-decay / 2.0)
                }
            }
            PotentialSpec::Tabulated { samples } => {
                // The interpolant is piecewise linear, so r|V| is maximal at a sample or at
                // the stationary point of a quadratic on a segment.
                let mut best: f64 = samples.iter().map(|s| s[0] * s[1].abs()).fold(0.0, f64::max);
                for w in samples.windows(2) {
                    let slope = (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]);
                    if slope != 0.0 {
                        // r (a + slope (r − r0)) stationary at r = (slope r0 − a) / (2 slope).
                        let r = (slope * w[0][0] - w[0][1]) / (2.0 * slope);
                        if r > w[0][0] && r < w[1][0] {
                            best = best.max(r * self.value(r).abs());
                        }
                    }
                }
                best
            }
        }
    }

    /// Decay assumption: faster than `r^{-2}`.
    pub fn decay_ok(&self) -> bool {
        match self {
            PotentialSpec::Zero | PotentialSpec::Tabulated { .. } => true,
            PotentialSpec::SoftDecay { strength, decay } => *strength == 0.0 || *decay > 2.0,
        }
    }

    /// Hardy subordination `c̄ < 1/2`.
    pub fn hardy_subordinate(&self) -> bool {
        self.hardy_constant() < 0.5
    }
}

/// `|||V|||_α = sup_r ⟨r⟩^α |V(r)|`: the larger of the supremum over grid nodes and the
/// closed-form supremum for analytic families.
pub fn potential_norms(v: &PotentialSpec, alpha: f64, grid: Option<&RadialGrid>) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::Parameter(format!("decay exponent must be nonnegative, got {alpha}")));
    }
    let mut best = v.analytic_decay_norm(alpha).unwrap_or(0.0);
    if let Some(g) = grid {
        for j in 0..g.n_points() {
            let r = g.node(j);
            best = best.max((1.0 + r * r).powf(alpha / 2.0) * v.value(r).abs());
        }
    }
    Ok(best)
}

/// The decay exponents at which norms are tabulated in reports.
pub const DECAY_EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 2.5, 3.0];

/// Admissibility flags for a potential on a given grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub potential: String,
    pub decay_ok: bool,
    pub hardy_ok: bool,
    pub hardy_constant: f64,
    pub decay_norms: Vec<(f64, f64)>,
    /// Largest eigenvalue of `|V|^{1/2} |p|^{-1} |V|^{1/2}`; the surrogate for the
    /// absence of zero-energy resonances and eigenvalues.
    pub birman_schwinger_norm: f64,
    pub resonance_free: bool,
    pub admissible: bool,
}

/// Computes the admissibility report. The Birman–Schwinger operator is assembled
/// densely for grids up to the oracle cap; larger grids use the same operator through
/// matrix-free products.
pub fn validate_potential(v: &PotentialSpec, grid: &RadialGrid) -> Result<AdmissibilityReport> {
    v.validate_parameters()?;
    let hardy_constant = v.hardy_constant();
    let decay_norms = DECAY_EXPONENTS
        .iter()
        .map(|&a| potential_norms(v, a, Some(grid)).map(|x| (a, x)))
        .collect::<Result<Vec<_>>>()?;
    let bs = if v.is_zero() {
        0.0
    } else {
        crate::oracle::birman_schwinger_norm(v, grid)?
    };
    let decay_ok = v.decay_ok();
    let hardy_ok = hardy_constant < 0.5;
    let resonance_free = bs < 1.0;
    Ok(AdmissibilityReport {
        potential: v.id(),
        decay_ok,
        hardy_ok,
        hardy_constant,
        decay_norms,
        birman_schwinger_norm: bs,
        resonance_free,
        admissible: decay_ok && hardy_ok && resonance_free,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_decay_norms_cancel_exactly() {
        let v = PotentialSpec::soft_decay(0.5, 3.0);
        assert_eq!(potential_norms(&v, 3.0, None).unwrap(), 0.5);
        assert!(potential_norms(&v, 3.5, None).unwrap().is_infinite());
        assert_eq!(potential_norms(&PotentialSpec::Zero, 2.0, None).unwrap(), 0.0);
        assert!(potential_norms(&v, -1.0, None).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let v = PotentialSpec::soft_decay(-0.3, 3.0);
        let e = 1e-5;
        for &r in &[0.3, 1.0, 2.7] {
            let fd1 = (v.value(r + e) - v.value(r - e)) / (2.0 * e);
            let fd2 = (v.derivative(r + e) - v.derivative(r - e)) / (2.0 * e);
            assert!((fd1 - v.derivative(r)).abs() < 1e-9);
            assert!((fd2 - v.second_derivative(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn tabulated_interpolation_and_support() {
        let v = PotentialSpec::Tabulated {
            samples: vec![[0.0, -1.0], [1.0, -0.5], [3.0, 0.0]],
        };
        v.validate_parameters().unwrap();
        assert_eq!(v.value(0.5), -0.75);
        assert_eq!(v.value(10.0), 0.0);
        assert_eq!(v.derivative(0.5), 0.5);
        // r|V| = r(0.75 − r/4) on [1, 3] peaks at r = 1.5.
        assert!((v.hardy_constant() - 0.5625).abs() < 1e-12);
        let bad = PotentialSpec::Tabulated {
            samples: vec![[1.0, 0.0], [0.5, 0.0]],
        };
        assert!(bad.validate_parameters().is_err());
    }
}
