//! Smoothed step and bump functions: a piecewise-linear ramp convolved with a
//! compactly supported `C^∞` mollifier.
//!
//! A step-up cutoff with threshold `c` and half-width `δ` is the ramp of width `η`
//! centred at `c`, convolved with the bump `exp(−1/(1 − x²))` rescaled to the interval
//! `[−ε, ε]`, `ε = ρ η`. The transition occupies exactly `[c − δ, c + δ]` with
//! `δ = η (1/2 + ρ)`. The default ratio `ρ = 1/20` gives a mollifier of support `η/10`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::C64;
use crate::quadrature::{gauss_legendre, CompositeRule};

/// Mollifier half-support relative to the ramp width for Property-(F) cutoffs.
pub const DEFAULT_MOLLIFIER_RATIO: f64 = 0.05;
/// The smoothest admissible choice: the mollifier spans the whole ramp.
pub const SMOOTH_MOLLIFIER_RATIO: f64 = 0.5;

const TABLE_CELLS: usize = 2048;

struct MollifierTable {
    /// Normalisation `∫ exp(−1/(1−x²)) dx`.
    z: f64,
    /// `G(x) = ∫_{−1}^{x} φ̃` at the table nodes.
    cdf: Vec<f64>,
    /// `M(x) = ∫_{−1}^{x} y φ̃(y) dy` at the table nodes.
    first_moment: Vec<f64>,
}

fn raw_bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

fn table() -> &'static MollifierTable {
    static TABLE: OnceLock<MollifierTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (gx, gw) = gauss_legendre(14);
        let dx = 2.0 / TABLE_CELLS as f64;
        let mut cdf = vec![0.0; TABLE_CELLS + 1];
        let mut mom = vec![0.0; TABLE_CELLS + 1];
        let (mut s0, mut s1) = (0.0, 0.0);
        for i in 0..TABLE_CELLS {
            let lo = -1.0 + i as f64 * dx;
            for (xi, wi) in gx.iter().zip(&gw) {
                let y = lo + 0.5 * dx * (xi + 1.0);
                let f = raw_bump(y) * 0.5 * dx * wi;
                s0 += f;
                s1 += y * f;
            }
            cdf[i + 1] = s0;
            mom[i + 1] = s1;
        }
        let z = s0;
        cdf.iter_mut().for_each(|v| *v /= z);
        mom.iter_mut().for_each(|v| *v /= z);
        // Exact endpoint values: the CDF reaches 1 and the first moment vanishes by symmetry.
        cdf[TABLE_CELLS] = 1.0;
        mom[TABLE_CELLS] = 0.0;
        MollifierTable {
            z,
            cdf,
            first_moment: mom,
        }
    })
}

fn table_eval(values: &[f64], above: f64, x: f64) -> f64 {
    if x <= -1.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return above;
    }
    let s = (x + 1.0) / (2.0 / TABLE_CELLS as f64);
    let i0 = s.floor();
    let t = s - i0;
    let i0 = i0 as i64;
    let w = crate::interp::quintic_weights(t);
    let last = TABLE_CELLS as i64;
    let mut acc = 0.0;
    for (k, wk) in w.iter().enumerate() {
        let i = i0 - 2 + k as i64;
        let v = if i < 0 {
            0.0
        } else if i > last {
            above
        } else {
            values[i as usize]
        };
        acc += wk * v;
    }
    acc
}

/// Normalised mollifier `φ̃` on `[−1, 1]`.
pub fn mollifier(x: f64) -> f64 {
    raw_bump(x) / table().z
}

/// `G(x) = ∫_{−1}^{x} φ̃`.
pub fn mollifier_cdf(x: f64) -> f64 {
    table_eval(&table().cdf, 1.0, x)
}

/// `G_1(x) = ∫_{−1}^{x} G = x G(x) − ∫_{−1}^{x} y φ̃(y) dy` for `|x| ≤ 1`.
fn mollifier_cdf_integral(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        x
    } else {
        x * mollifier_cdf(x) - table_eval(&table().first_moment, 0.0, x)
    }
}

/// Unit ramp from 0 at `a` to 1 at `b`, mollified over `[−ε, ε]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Ramp {
    a: f64,
    b: f64,
    eta: f64,
    eps: f64,
}

impl Ramp {
    fn new(c: f64, delta: f64, ratio: f64) -> Self {
        let eta = delta / (0.5 + ratio);
        Self {
            a: c - 0.5 * eta,
            b: c + 0.5 * eta,
            eta,
            eps: ratio * eta,
        }
    }

    fn g1s(&self, x: f64) -> f64 {
        self.eps * mollifier_cdf_integral(x / self.eps)
    }

    fn value(&self, l: f64) -> f64 {
        if l <= self.a - self.eps {
            0.0
        } else if l >= self.b + self.eps {
            1.0
        } else {
            ((self.g1s(l - self.a) - self.g1s(l - self.b)) / self.eta).clamp(0.0, 1.0)
        }
    }

    fn d1(&self, l: f64) -> f64 {
        (mollifier_cdf((l - self.a) / self.eps) - mollifier_cdf((l - self.b) / self.eps)) / self.eta
    }

    fn d2(&self, l: f64) -> f64 {
        (mollifier((l - self.a) / self.eps) - mollifier((l - self.b) / self.eps)) / (self.eps * self.eta)
    }

    /// `∫ F′(x) e^{−iωx} dx` by Gauss–Legendre on the two mollified corners and the
    /// closed form on the linear part.
    fn derivative_fourier(&self, omega: f64) -> C64 {
        let corner = |lo: f64, hi: f64| -> C64 {
            let panels = 4 + ((hi - lo) * omega.abs() / PI).ceil() as usize;
            let rule = CompositeRule::new(lo, hi, panels, 24);
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| C64::from_polar(w * self.d1(*x), -omega * x))
                .sum()
        };
        let mut total = corner(self.a - self.eps, self.a + self.eps) + corner(self.b - self.eps, self.b + self.eps);
        let (p, q) = (self.a + self.eps, self.b - self.eps);
        if q > p {
            let flat = if omega.abs() * (q - p) < 1e-8 {
                C64::from_polar(q - p, -omega * 0.5 * (p + q))
            } else {
                (C64::from_polar(1.0, -omega * q) - C64::from_polar(1.0, -omega * p)) / C64::new(0.0, -omega)
            };
            total += flat / self.eta;
        }
        total
    }
}

/// Orientation of a smoothed cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffKind {
    /// `F(λ > c)`.
    StepUp,
    /// `F(λ < c) = 1 − F(λ > c)`.
    StepDown,
    /// Rises at the lower threshold and falls at the upper one.
    Bump,
}

/// A smoothed step or bump with threshold(s) and half-width of the transition band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothCutoff {
    pub kind: CutoffKind,
    pub threshold: f64,
    /// Upper threshold (bumps only; equals `threshold` for steps).
    pub upper: f64,
    pub width: f64,
    pub mollifier_ratio: f64,
    rise: Ramp,
    fall: Ramp,
}

/// Property-(F) cutoff with the default mollifier. For `Bump`, the result equals one
/// on `[c − δ, c + δ]` and vanishes outside `[c − 3δ, c + 3δ]`.
pub fn make_cutoff(kind: CutoffKind, c: f64, delta: f64) -> Result<SmoothCutoff> {
    match kind {
        CutoffKind::Bump => SmoothCutoff::bump(c - 2.0 * delta, c + 2.0 * delta, delta, DEFAULT_MOLLIFIER_RATIO),
        _ => SmoothCutoff::step(kind, c, delta, DEFAULT_MOLLIFIER_RATIO),
    }
}

impl SmoothCutoff {
    pub fn step(kind: CutoffKind, c: f64, delta: f64, ratio: f64) -> Result<Self> {
        Self::check(delta, ratio)?;
        if kind == CutoffKind::Bump {
            return Err(Error::Parameter("use SmoothCutoff::bump for bumps".into()));
        }
        let r = Ramp::new(c, delta, ratio);
        Ok(Self {
            kind,
            threshold: c,
            upper: c,
            width: delta,
            mollifier_ratio: ratio,
            rise: r,
            fall: r,
        })
    }

    pub fn step_up(c: f64, delta: f64) -> Result<Self> {
        Self::step(CutoffKind::StepUp, c, delta, DEFAULT_MOLLIFIER_RATIO)
    }

    pub fn step_down(c: f64, delta: f64) -> Result<Self> {
        Self::step(CutoffKind::StepDown, c, delta, DEFAULT_MOLLIFIER_RATIO)
    }

    /// Bump rising across `[lo − δ, lo + δ]` and falling across `[hi − δ, hi + δ]`.
    pub fn bump(lo: f64, hi: f64, delta: f64, ratio: f64) -> Result<Self> {
        Self::check(delta, ratio)?;
        if !(hi - lo >= 2.0 * delta) {
            return Err(Error::Parameter(format!(
                "bump thresholds must be at least 2δ apart (lo={lo}, hi={hi}, δ={delta})"
            )));
        }
        Ok(Self {
            kind: CutoffKind::Bump,
            threshold: lo,
            upper: hi,
            width: delta,
            mollifier_ratio: ratio,
            rise: Ramp::new(lo, delta, ratio),
            fall: Ramp::new(hi, delta, ratio),
        })
    }

    fn check(delta: f64, ratio: f64) -> Result<()> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Parameter(format!("cutoff width must be positive, got {delta}")));
        }
        if !(ratio > 0.0 && ratio <= 0.5) {
            return Err(Error::Parameter(format!("mollifier ratio must lie in (0, 1/2], got {ratio}")));
        }
        Ok(())
    }

    pub fn eval(&self, l: f64) -> f64 {
        match self.kind {
            CutoffKind::StepUp => self.rise.value(l),
            CutoffKind::StepDown => 1.0 - self.rise.value(l),
            CutoffKind::Bump => self.rise.value(l) * (1.0 - self.fall.value(l)),
        }
    }

    pub fn derivative(&self, l: f64) -> f64 {
        match self.kind {
            CutoffKind::StepUp => self.rise.d1(l),
            CutoffKind::StepDown => -self.rise.d1(l),
            CutoffKind::Bump => self.rise.d1(l) * (1.0 - self.fall.value(l)) - self.rise.value(l) * self.fall.d1(l),
        }
    }

    pub fn second_derivative(&self, l: f64) -> f64 {
        match self.kind {
            CutoffKind::StepUp => self.rise.d2(l),
            CutoffKind::StepDown => -self.rise.d2(l),
            CutoffKind::Bump => {
                let (u, u1, u2) = (self.rise.value(l), self.rise.d1(l), self.rise.d2(l));
                let (d, d1, d2) = (1.0 - self.fall.value(l), -self.fall.d1(l), -self.fall.d2(l));
                u2 * d + 2.0 * u1 * d1 + u * d2
            }
        }
    }

    /// Limits at `−∞` and `+∞`.
    pub fn limits(&self) -> (f64, f64) {
        match self.kind {
            CutoffKind::StepUp => (0.0, 1.0),
            CutoffKind::StepDown => (1.0, 0.0),
            CutoffKind::Bump => (0.0, 0.0),
        }
    }

    /// Intervals outside of which `F′` vanishes.
    pub fn transition_bands(&self) -> Vec<(f64, f64)> {
        let d = self.width;
        match self.kind {
            CutoffKind::Bump => vec![(self.threshold - d, self.threshold + d), (self.upper - d, self.upper + d)],
            _ => vec![(self.threshold - d, self.threshold + d)],
        }
    }

    /// Closed support of `F` (unbounded ends reported as infinities).
    pub fn support(&self) -> (f64, f64) {
        let d = self.width;
        match self.kind {
            CutoffKind::StepUp => (self.threshold - d, f64::INFINITY),
            CutoffKind::StepDown => (f64::NEG_INFINITY, self.threshold + d),
            CutoffKind::Bump => (self.threshold - d, self.upper + d),
        }
    }

    /// `F̂′(ω) = ∫ F′(λ) e^{−iωλ} dλ`.
    pub fn derivative_fourier(&self, omega: f64) -> C64 {
        match self.kind {
            CutoffKind::StepUp => self.rise.derivative_fourier(omega),
            CutoffKind::StepDown => -self.rise.derivative_fourier(omega),
            // The two transition bands are disjoint, so F′ = U′ − D′ there.
            CutoffKind::Bump => self.rise.derivative_fourier(omega) - self.fall.derivative_fourier(omega),
        }
    }

    /// `F̂(ω) = F̂′(ω)/(iω)` for `ω ≠ 0`, the transform modulo the step constant.
    pub fn fourier(&self, omega: f64) -> C64 {
        self.derivative_fourier(omega) / C64::new(0.0, omega)
    }

    /// The same cutoff with its argument rescaled: `λ ↦ F(λ / s)`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        match self.kind {
            CutoffKind::Bump => Self::bump(self.threshold * s, self.upper * s, self.width * s, self.mollifier_ratio),
            k => Self::step(k, self.threshold * s, self.width * s, self.mollifier_ratio),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mollifier_tables_are_consistent() {
        assert!((mollifier_cdf(0.0) - 0.5).abs() < 1e-13);
        assert!((0.443_993_816_168_079_4 - table().z).abs() < 1e-12);
        let r = CompositeRule::new(-1.0, 0.3, 40, 20);
        let direct = r.integrate(mollifier);
        assert!((direct - mollifier_cdf(0.3)).abs() < 1e-12);
    }

    #[test]
    fn step_up_values_and_midpoint() {
        let f = make_cutoff(CutoffKind::StepUp, 1.0, 0.1).unwrap();
        assert_eq!(f.eval(1.2), 1.0);
        assert_eq!(f.eval(0.85), 0.0);
        assert!((f.eval(1.0) - 0.5).abs() < 1e-12);
        let int = CompositeRule::new(0.85, 1.15, 600, 20).integrate(|x| f.derivative(x));
        assert!((int - 1.0).abs() < 1e-10, "∫F′ = {int}");
    }

    #[test]
    fn derivative_bounds() {
        for &ratio in &[DEFAULT_MOLLIFIER_RATIO, SMOOTH_MOLLIFIER_RATIO] {
            let d = 0.2;
            let f = SmoothCutoff::step(CutoffKind::StepUp, 0.0, d, ratio).unwrap();
            let mut sup = 0.0f64;
            let mut sup2 = 0.0f64;
            for i in 0..=4000 {
                let x = -0.25 + 0.5 * i as f64 / 4000.0;
                assert!(f.derivative(x) >= -1e-14);
                sup = sup.max(f.derivative(x));
                sup2 = sup2.max(f.second_derivative(x).abs());
            }
            assert!(sup <= (1.0 + 1e-2) / d, "ratio {ratio}: sup F' = {sup}");
            assert!(sup2 * d * d < 10.0);
        }
    }

    #[test]
    fn fourier_of_derivative_matches_quadrature() {
        let f = SmoothCutoff::bump(0.3, 0.9, 0.1, DEFAULT_MOLLIFIER_RATIO).unwrap();
        for &w in &[0.0, 1.5, -7.0, 40.0] {
            let rule = CompositeRule::new(0.1, 1.1, 400, 20);
            let direct: C64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, wt)| C64::from_polar(wt * f.derivative(*x), -w * x))
                .sum();
            assert!((direct - f.derivative_fourier(w)).norm() < 1e-10, "ω={w}");
        }
    }

    #[test]
    fn rejects_nonpositive_width() {
        assert!(make_cutoff(CutoffKind::StepUp, 1.0, 0.0).is_err());
        assert!(make_cutoff(CutoffKind::StepDown, 1.0, -0.1).is_err());
        assert!(SmoothCutoff::bump(0.0, 0.1, 0.1, 0.05).is_err());
    }
}
