//! Time-decaying kernel bounds on dense oracle chains. Each bound is measured on a
//! geometric list of times, fitted as a power law in `t`, and its prefactor compared
//! against the asserted `2^n` (or `2^{n/2}`) growth across adjacent shells.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::certificate::{fit_power_law, BoundCertificate};
use super::dense::{momentum_function, position_function, GeneratorSpectrum, HamiltonianSpectrum};
use super::shells::{chain, require_dense_shell};
use crate::error::{Error, Result};
use crate::funcalc::{CutoffKind, DyadicShell, SmoothCutoff, SMOOTH_MOLLIFIER_RATIO};
use crate::grid::C64;

/// The kernel bounds of the battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelBound {
    /// `‖F_n(A/t) W E_n(H)‖ ≲ 2^n/(Rt)` with `F_n(A/t) = F(A/(R t 2^{−n}) > 1)`.
    WeightedOutgoing,
    /// `‖E_n(H) F_a(r/t > a) F̄_n(A/t)‖ ≤ c 2^n/t`, `F̄_n = 1 − F(A/t > R 2^{−n})`.
    OutgoingComplement,
    /// `‖E_n F_b(r/t < b) F(A/(2^{−n}Rt) > 1) E_n‖ = O(2^n/t)` for `b/R < 1`.
    IncomingLocalization,
    /// `‖[E_n(H)|p|^{1/2}, F̃_n(A/t)]‖ = O(2^{n/2}/t)`, `F̃_n(u) = F(|u| < (1−ε)2^{−n})`.
    RootMomentumCommutator,
    /// `‖[H^{1/2}, F_a(r/t > a)] H^{−1/2}‖ ≤ C/t`.
    FractionalCommutator,
}

impl KernelBound {
    pub const ALL: [KernelBound; 5] = [
        KernelBound::WeightedOutgoing,
        KernelBound::OutgoingComplement,
        KernelBound::IncomingLocalization,
        KernelBound::RootMomentumCommutator,
        KernelBound::FractionalCommutator,
    ];

    pub fn id(self) -> &'static str {
        match self {
            KernelBound::WeightedOutgoing => "kernel-weighted-outgoing",
            KernelBound::OutgoingComplement => "kernel-outgoing-complement",
            KernelBound::IncomingLocalization => "kernel-incoming-localization",
            KernelBound::RootMomentumCommutator => "kernel-root-momentum-commutator",
            KernelBound::FractionalCommutator => "kernel-fractional-commutator",
        }
    }

    pub fn shape(self) -> &'static str {
        match self {
            KernelBound::WeightedOutgoing => "≤ C·2^n/(R t)",
            KernelBound::OutgoingComplement => "≤ C·2^n/t",
            KernelBound::IncomingLocalization => "≤ C·2^n/t",
            KernelBound::RootMomentumCommutator => "≤ C·2^{n/2}/t",
            KernelBound::FractionalCommutator => "≤ C/t",
        }
    }

    /// The shell-dependent growth `g(n)` of the asserted prefactor.
    pub fn shell_growth(self, n: u32) -> f64 {
        match self {
            KernelBound::RootMomentumCommutator => 2f64.powf(n as f64 / 2.0),
            KernelBound::FractionalCommutator => 1.0,
            _ => 2f64.powi(n as i32),
        }
    }
}

/// Parameters of the kernel battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelParams {
    /// `R` in the weighted bound `F(A/(R t 2^{−n}) > 1)`.
    pub weight_r: f64,
    /// `R` of the phase-space splitting used with `F_a` and `F_b`.
    pub phase_r: f64,
    pub a: f64,
    pub b: f64,
    /// Half-width of position cutoffs in the variable `r/t`.
    pub position_width: f64,
    /// Relative half-width of `A`-cutoffs (in the scaled variable).
    pub a_width: f64,
    /// `ε` of `F̃_n(u) = F(|u| < (1−ε)2^{−n})`.
    pub epsilon: f64,
    /// Decay exponent `s` of the weight `W = ⟨r⟩^{−s}`.
    pub weight_decay: f64,
    /// Slope acceptance: fitted exponent `≤ −slope`.
    pub slope: f64,
    /// Prefactor consistency across adjacent shells.
    pub prefactor_envelope: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            weight_r: 2.0,
            phase_r: 1.1,
            a: 1.25,
            b: 0.5,
            position_width: 0.1,
            a_width: 0.5,
            epsilon: 0.1,
            weight_decay: 3.0,
            slope: 0.9,
            prefactor_envelope: 3.0,
        }
    }
}

impl KernelParams {
    /// Side conditions: `a > R > 1` for the outgoing splitting, `b/R < 1` for the
    /// incoming localization, `R > 1` for the weighted bound.
    pub fn validate(&self, bound: KernelBound) -> Result<()> {
        let bad = |m: String| Err(Error::Precondition(m));
        match bound {
            KernelBound::WeightedOutgoing if !(self.weight_r > 1.0) => bad(format!("R = {} must exceed 1", self.weight_r)),
            KernelBound::OutgoingComplement | KernelBound::FractionalCommutator
                if !(self.a > self.phase_r && self.phase_r > 1.0) =>
            {
                bad(format!("need a > R > 1, got a = {}, R = {}", self.a, self.phase_r))
            }
            KernelBound::IncomingLocalization if !(self.b > 0.0 && self.b / self.phase_r < 1.0) => {
                bad(format!("need 0 < b and b/R < 1, got b = {}, R = {}", self.b, self.phase_r))
            }
            KernelBound::RootMomentumCommutator if !(self.epsilon > 0.0 && self.epsilon < 1.0) => {
                bad(format!("ε must lie in (0, 1), got {}", self.epsilon))
            }
            _ => Ok(()),
        }
    }
}

/// The default geometric time list `50·10^{j/6}`, `j = 0..6` (one decade).
pub fn default_kernel_times() -> Vec<f64> {
    (0..=6).map(|j| 50.0 * 10f64.powf(j as f64 / 6.0)).collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 3 || times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Precondition("need at least three positive times".into()));
    }
    let q = times[1] / times[0];
    if times.windows(2).any(|w| ((w[1] / w[0]) / q - 1.0).abs() > 1e-9) || q <= 1.0 {
        return Err(Error::Precondition("time list must be increasing and geometric".into()));
    }
    if times[times.len() - 1] / times[0] < 10.0 * (1.0 - 1e-12) {
        return Err(Error::Precondition("time list must span at least one decade".into()));
    }
    Ok(())
}

/// Dense operator pieces shared by all kernel bounds on one grid and potential.
pub struct KernelOracle<'a> {
    pub hamiltonian: &'a HamiltonianSpectrum,
    pub generator: &'a GeneratorSpectrum,
}

impl KernelOracle<'_> {
    /// `‖bound‖` at shell `n`, time `t`.
    pub fn measure(&self, bound: KernelBound, n: u32, t: f64, p: &KernelParams, delta: f64) -> Result<f64> {
        let hs = self.hamiltonian;
        let gen = self.generator;
        let grid = Arc::clone(&hs.grid);
        let dim = hs.n();
        let shell = DyadicShell::new(n, delta)?;
        let en = |x: &[C64]| hs.apply_fn(&|l| shell.profile(l), x);
        let step = SmoothCutoff::step(CutoffKind::StepUp, 1.0, p.a_width, SMOOTH_MOLLIFIER_RATIO)?;
        let seed = 1000 + 17 * n as u64;
        let pos_up = SmoothCutoff::step(CutoffKind::StepUp, p.a, p.position_width, SMOOTH_MOLLIFIER_RATIO)?;
        let g = Arc::clone(&grid);
        let fa = move |x: &[C64]| position_function(&g, &|r| pos_up.eval(r / t), x);
        Ok(match bound {
            KernelBound::WeightedOutgoing => {
                let s = p.weight_r * t * 2f64.powi(-(n as i32));
                let fo = |x: &[C64]| gen.apply_fn(&|a| step.eval(a / s), x);
                let g = Arc::clone(&grid);
                let w = move |x: &[C64]| position_function(&g, &|r| (1.0 + r * r).powf(-p.weight_decay / 2.0), x);
                chain(dim, &[&fo, &w, &en], seed)
            }
            KernelBound::OutgoingComplement => {
                let s = p.phase_r * t * 2f64.powi(-(n as i32));
                let fbar = |x: &[C64]| gen.apply_fn(&|a| 1.0 - step.eval(a / s), x);
                chain(dim, &[&en, &fa, &fbar], seed)
            }
            KernelBound::IncomingLocalization => {
                let s = p.phase_r * t * 2f64.powi(-(n as i32));
                let fo = |x: &[C64]| gen.apply_fn(&|a| step.eval(a / s), x);
                let down = SmoothCutoff::step(CutoffKind::StepDown, p.b, p.position_width, SMOOTH_MOLLIFIER_RATIO)?;
                let g = Arc::clone(&grid);
                let fb = move |x: &[C64]| position_function(&g, &|r| down.eval(r / t), x);
                chain(dim, &[&en, &fb, &fo, &en], seed)
            }
            KernelBound::RootMomentumCommutator => {
                let c = 1.0 - p.epsilon;
                let bump = SmoothCutoff::bump(-c, c, p.a_width * c / 2.0, SMOOTH_MOLLIFIER_RATIO)?;
                let s = t * 2f64.powi(-(n as i32));
                let ft = |x: &[C64]| gen.apply_fn(&|a| bump.eval(a / s), x);
                let g = Arc::clone(&grid);
                let root = move |x: &[C64]| momentum_function(&g, &|k| k.sqrt(), x);
                // X = E_n |p|^{1/2}, X† = |p|^{1/2} E_n; M = XF − FX, M† = F X† − X† F.
                let x_op = |y: &[C64]| en(&root(y));
                let xa_op = |y: &[C64]| root(&en(y));
                let fwd = |y: &[C64]| sub(&x_op(&ft(y)), &ft(&x_op(y)));
                let adj = |y: &[C64]| sub(&ft(&xa_op(y)), &xa_op(&ft(y)));
                super::dense::gram_norm(dim, &fwd, &adj, seed).value
            }
            KernelBound::FractionalCommutator => {
                if hs.lowest() <= 0.0 {
                    return Err(Error::Precondition("H must be positive for H^{±1/2}".into()));
                }
                let hp = |x: &[C64]| hs.apply_fn(&|l| l.sqrt(), x);
                let hm = |x: &[C64]| hs.apply_fn(&|l| 1.0 / l.sqrt(), x);
                // M = [H^{1/2}, F] H^{−1/2} = H^{1/2} F H^{−1/2} − F; M† = H^{−1/2} F H^{1/2} − F.
                let fwd = |y: &[C64]| sub(&hp(&fa(&hm(y))), &fa(y));
                let adj = |y: &[C64]| sub(&hm(&fa(&hp(y))), &fa(y));
                super::dense::gram_norm(dim, &fwd, &adj, seed).value
            }
        })
    }
}

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Measures one kernel bound on shells `ns` over `times`, fits `log‖·‖` against `log t`,
/// certifies every fitted exponent `≤ −slope` and the prefactors
/// `C_n = exp(mean log(‖·‖ t / g(n)))` consistent within `prefactor_envelope` across
/// adjacent shells.
pub fn check_kernel_bounds(
    oracle: &KernelOracle<'_>,
    bound: KernelBound,
    ns: &[u32],
    times: &[f64],
    params: &KernelParams,
    delta: f64,
) -> Result<BoundCertificate> {
    params.validate(bound)?;
    check_times(times)?;
    let grid = &oracle.hamiltonian.grid;
    let mut cert = BoundCertificate::new(bound.id(), bound.shape())
        .param("n_points", grid.n_points() as f64)
        .param("spacing", grid.spacing())
        .param("weight_r", params.weight_r)
        .param("phase_r", params.phase_r)
        .param("a", params.a)
        .param("b", params.b)
        .param("epsilon", params.epsilon)
        .param("delta", delta);
    let shells: Vec<u32> = if bound == KernelBound::FractionalCommutator { vec![0] } else { ns.to_vec() };
    let mut prefactors = Vec::new();
    let mut worst_slope = f64::NEG_INFINITY;
    for &n in &shells {
        if bound != KernelBound::FractionalCommutator {
            require_dense_shell(grid, n, delta)?;
        }
        let vals = times
            .iter()
            .map(|&t| oracle.measure(bound, n, t, params, delta))
            .collect::<Result<Vec<f64>>>()?;
        let label = format!("n={n}");
        for (t, v) in times.iter().zip(&vals) {
            cert.record(label.clone(), *t, *v);
        }
        match fit_power_law(times, &vals) {
            Some(f) => {
                worst_slope = worst_slope.max(f.exponent);
                cert.fits.insert(label.clone(), f);
                cert.check(
                    format!("{label}: fitted exponent"),
                    f.exponent,
                    format!("≤ −{}", params.slope),
                    f.exponent <= -params.slope,
                );
            }
            None => {
                // All values vanish: the bound holds trivially.
                cert.note(format!("{label}: all measured norms vanish"));
                worst_slope = worst_slope.max(f64::NEG_INFINITY);
            }
        }
        let growth = bound.shell_growth(n);
        let logs: Vec<f64> = times.iter().zip(&vals).filter(|(_, v)| **v > 0.0).map(|(t, v)| (v * t / growth).ln()).collect();
        if !logs.is_empty() {
            let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
            cert.record("prefactor", n as f64, c);
            prefactors.push((n, c));
        }
    }
    for w in prefactors.windows(2) {
        if w[1].0 == w[0].0 + 1 {
            let r = (w[1].1 / w[0].1).max(w[0].1 / w[1].1);
            cert.check(
                format!("prefactor n={} vs n={}", w[0].0, w[1].0),
                r,
                format!("≤ {}", params.prefactor_envelope),
                r <= params.prefactor_envelope,
            );
        }
    }
    cert.measured = worst_slope;
    Ok(cert)
}
