//! Certificates: raw measurements, fits and the pass/fail verdict against an envelope.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One raw measured value, indexed by a shell, a time, a parameter value or a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    #[serde(with = "crate::floats::scalar")]
    pub x: f64,
    #[serde(with = "crate::floats::scalar")]
    pub value: f64,
}

/// Least-squares fit `log y = exponent · log x + log prefactor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    #[serde(with = "crate::floats::scalar")]
    pub exponent: f64,
    #[serde(with = "crate::floats::scalar")]
    pub prefactor: f64,
    /// Root-mean-square residual of the fit in `log y`.
    pub residual: f64,
}

/// Fits a power law through the positive points; `None` with fewer than two of them.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some(PowerFit {
        exponent: slope,
        prefactor: icpt.exp(),
        residual,
    })
}

/// `max/min` of a set of values; infinite when the minimum is not positive.
pub fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        1.0
    } else if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// A named sub-test inside a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "crate::floats::scalar")]
    pub value: f64,
    pub envelope: String,
    pub pass: bool,
}

/// Numerical certificate for one inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub id: String,
    /// The asserted shape of the bound, e.g. `≤ C·2^n/t`.
    pub shape: String,
    pub params: BTreeMap<String, f64>,
    /// The headline measured constant.
    #[serde(with = "crate::floats::scalar")]
    pub measured: f64,
    pub values: Vec<Measurement>,
    pub fits: BTreeMap<String, PowerFit>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub flagged: bool,
    pub pass: bool,
}

impl BoundCertificate {
    pub fn new(id: impl Into<String>, shape: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            shape: shape.into(),
            params: BTreeMap::new(),
            measured: f64::NAN,
            values: Vec::new(),
            fits: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            flagged: false,
            pass: true,
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn record(&mut self, label: impl Into<String>, x: f64, value: f64) {
        self.values.push(Measurement {
            label: label.into(),
            x,
            value,
        });
    }

    /// Adds a sub-test; the certificate passes only if every sub-test does.
    pub fn check(&mut self, name: impl Into<String>, value: f64, envelope: impl Into<String>, pass: bool) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.into(),
            value,
            envelope: envelope.into(),
            pass,
        });
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Values recorded under `label`, as `(x, value)` pairs in insertion order.
    pub fn series(&self, label: &str) -> Vec<(f64, f64)> {
        self.values.iter().filter(|m| m.label == label).map(|m| (m.x, m.value)).collect()
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let xs: Vec<f64> = (0..7).map(|j| 50.0 * 10f64.powf(j as f64 / 6.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 / x).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-10);
        assert!(f.residual < 1e-12);
        assert!(fit_power_law(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn spread_and_verdict() {
        assert_eq!(spread(&[1.0, 4.0, 2.0]), 4.0);
        assert!(spread(&[0.0, 1.0]).is_infinite());
        let mut c = BoundCertificate::new("x", "≤ 1");
        c.check("a", 0.5, "≤ 1", true);
        assert!(c.pass);
        c.check("b", 2.0, "≤ 1", false);
        assert!(!c.pass);
    }
}
