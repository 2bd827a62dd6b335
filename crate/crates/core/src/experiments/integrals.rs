//! Time integrals over a geometric sampling grid. Integrands are integrated in the
//! variable `ln t` with the trapezoid rule, which keeps the exact logarithmic measure
//! of `∫ · dt/t`; plain `∫ · dt` is `∫ (· t) d ln t`.

use serde::{Deserialize, Serialize};

/// Measure of an accumulated integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// `dt/t`.
    Logarithmic,
    /// `dt`.
    Linear,
}

/// `I(T) = ∫_{t_0}^{T} g` at every sample, with its Cauchy tails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub tag: String,
    pub shell: Option<u32>,
    pub measure: Measure,
    pub times: Vec<f64>,
    #[serde(with = "crate::floats::vec")]
    pub integrand: Vec<f64>,
    #[serde(with = "crate::floats::vec")]
    pub cumulative: Vec<f64>,
    /// `(T, I(2T) − I(T))` for every doubling inside the sampled range.
    pub tails: Vec<(f64, f64)>,
}

impl Accumulator {
    pub fn new(tag: impl Into<String>, shell: Option<u32>, measure: Measure, times: &[f64], integrand: &[f64]) -> Self {
        assert_eq!(times.len(), integrand.len(), "one integrand value per sample");
        let mut cumulative = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        for k in 0..times.len() {
            if k > 0 {
                let dl = (times[k] / times[k - 1]).ln();
                let g = |j: usize| match measure {
                    Measure::Logarithmic => integrand[j],
                    Measure::Linear => integrand[j] * times[j],
                };
                acc += 0.5 * dl * (g(k) + g(k - 1));
            }
            cumulative.push(acc);
        }
        let mut out = Self {
            tag: tag.into(),
            shell,
            measure,
            times: times.to_vec(),
            integrand: integrand.to_vec(),
            cumulative,
            tails: Vec::new(),
        };
        out.tails = out.doubling_tails();
        out
    }

    fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|s| (s - t).abs() <= 1e-9 * t)
    }

    /// `I(T)` at a sample time.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.index_of(t).map(|k| self.cumulative[k])
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    fn doubling_tails(&self) -> Vec<(f64, f64)> {
        let Some(&t0) = self.times.first() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut t = t0;
        while let (Some(a), Some(b)) = (self.index_of(t), self.index_of(2.0 * t)) {
            out.push((t, self.cumulative[b] - self.cumulative[a]));
            t *= 2.0;
        }
        out
    }

    /// `tail(T)/tail(2T)` for consecutive doublings with `T ≥ from`.
    pub fn tail_ratios(&self, from: f64) -> Vec<(f64, f64)> {
        let tails: Vec<(f64, f64)> = self.tails.iter().copied().filter(|(t, _)| *t >= from * (1.0 - 1e-12)).collect();
        tails.windows(2).map(|w| (w[0].0, w[0].1 / w[1].1)).collect()
    }

    /// Integral restricted to samples with `lo ≤ t ≤ hi`.
    pub fn between(&self, lo: f64, hi: f64) -> f64 {
        let idx: Vec<usize> = (0..self.times.len())
            .filter(|&k| self.times[k] >= lo * (1.0 - 1e-12) && self.times[k] <= hi * (1.0 + 1e-12))
            .collect();
        match (idx.first(), idx.last()) {
            (Some(&a), Some(&b)) => self.cumulative[b] - self.cumulative[a],
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{geometric_times, DEFAULT_TIME_RATIO};

    #[test]
    fn logarithmic_measure_is_exact_for_constants() {
        let t = geometric_times(1.0, DEFAULT_TIME_RATIO, 512.0).unwrap();
        let acc = Accumulator::new("one", None, Measure::Logarithmic, &t, &vec![1.0; t.len()]);
        assert!((acc.total() - 512f64.ln()).abs() < 1e-12);
        assert_eq!(acc.tails.len(), 9);
        for (_, tail) in &acc.tails {
            assert!((tail - std::f64::consts::LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn power_law_tails_shrink_geometrically() {
        let t = geometric_times(1.0, DEFAULT_TIME_RATIO, 512.0).unwrap();
        let g: Vec<f64> = t.iter().map(|x| x.powi(-2)).collect();
        let acc = Accumulator::new("t^-2", Some(3), Measure::Logarithmic, &t, &g);
        for (_, r) in acc.tail_ratios(1.0) {
            assert!((r - 4.0).abs() < 0.05, "{r}");
        }
        let lin = Accumulator::new("t^-2 dt", None, Measure::Linear, &t, &g);
        assert!((lin.total() - (1.0 - 1.0 / 512.0)).abs() < 2e-3);
        assert!((lin.between(2.0, 4.0) - 0.25).abs() < 1e-3);
    }
}
