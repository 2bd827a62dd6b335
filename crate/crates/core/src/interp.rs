//! Six-point (quintic) Lagrange interpolation on uniformly spaced samples.

use crate::grid::C64;

/// How samples are continued outside the stored range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Samples `values[j] = u(x0 + (j+1) dx)` of a function vanishing at `x0` and
    /// at `x0 + (len+1) dx`, continued as the odd periodic extension (the sine-series
    /// continuation).
    SineOdd,
    /// Samples `values[j] = u(x0 + j dx)` of a periodic function with period `len·dx`.
    Periodic,
    /// Samples `values[j] = u(x0 + j dx)`, zero outside.
    Zero,
}

/// Interpolation weights for the nodes `-2..=3` at fractional offset `t ∈ [0, 1)`.
#[inline]
pub fn quintic_weights(t: f64) -> [f64; 6] {
    let d = [t + 2.0, t + 1.0, t, t - 1.0, t - 2.0, t - 3.0];
    // Denominators Π_{m≠k}(k − m) for k = −2..3.
    const DEN: [f64; 6] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];
    let mut w = [0.0; 6];
    for k in 0..6 {
        let mut p = 1.0;
        for (m, dm) in d.iter().enumerate() {
            if m != k {
                p *= dm;
            }
        }
        w[k] = p / DEN[k];
    }
    w
}

/// Read-only view of uniformly spaced samples with a continuation rule.
#[derive(Debug, Clone, Copy)]
pub struct UniformSamples<'a> {
    pub values: &'a [C64],
    pub origin: f64,
    pub step: f64,
    pub extension: Extension,
}

impl<'a> UniformSamples<'a> {
    pub fn new(values: &'a [C64], origin: f64, step: f64, extension: Extension) -> Self {
        Self {
            values,
            origin,
            step,
            extension,
        }
    }

    /// Sample at integer index `i` in the continuation (for `SineOdd`, index `i`
    /// addresses position `origin + i·step`, so `values[0]` is index 1).
    #[inline]
    pub fn sample(&self, i: i64) -> C64 {
        let n = self.values.len() as i64;
        let zero = C64::new(0.0, 0.0);
        match self.extension {
            Extension::SineOdd => {
                let p = 2 * (n + 1);
                let k = i.rem_euclid(p);
                if k == 0 || k == n + 1 {
                    zero
                } else if k <= n {
                    self.values[(k - 1) as usize]
                } else {
                    -self.values[(p - k - 1) as usize]
                }
            }
            Extension::Periodic => self.values[i.rem_euclid(n) as usize],
            Extension::Zero => {
                if (0..n).contains(&i) {
                    self.values[i as usize]
                } else {
                    zero
                }
            }
        }
    }

    /// Quintic interpolant at position `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> C64 {
        let s = (x - self.origin) / self.step;
        let i0 = s.floor();
        let t = s - i0;
        let i0 = i0 as i64;
        let w = quintic_weights(t);
        let mut acc = C64::new(0.0, 0.0);
        for (k, wk) in w.iter().enumerate() {
            acc += self.sample(i0 - 2 + k as i64) * *wk;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reproduce_quintics() {
        for &t in &[0.0, 0.1, 0.5, 0.77, 0.999] {
            let w = quintic_weights(t);
            for p in 0..=5 {
                let interp: f64 = (0..6).map(|k| w[k] * ((k as f64) - 2.0).powi(p)).sum();
                assert!((interp - t.powi(p)).abs() < 1e-12, "degree {p} at {t}");
            }
        }
    }

    #[test]
    fn sine_odd_extension_is_consistent() {
        let v: Vec<C64> = (1..=5).map(|j| C64::new(j as f64, 0.0)).collect();
        let s = UniformSamples::new(&v, 0.0, 1.0, Extension::SineOdd);
        assert_eq!(s.sample(0), C64::new(0.0, 0.0));
        assert_eq!(s.sample(6), C64::new(0.0, 0.0));
        assert_eq!(s.sample(-2), C64::new(-2.0, 0.0));
        assert_eq!(s.sample(7), C64::new(-5.0, 0.0));
        assert_eq!(s.sample(3 + 12), C64::new(3.0, 0.0));
    }

    #[test]
    fn interpolates_smooth_function_accurately() {
        let dx = 0.05;
        let v: Vec<C64> = (0..400).map(|j| C64::new((j as f64 * dx).sin(), 0.0)).collect();
        let s = UniformSamples::new(&v, 0.0, dx, Extension::Zero);
        for &x in &[1.0, 3.3333, 7.77] {
            assert!((s.eval(x).re - x.sin()).abs() < 1e-9);
        }
    }
}
