//! Propagation-estimate experiments: per shell `n`, the time integrals of
//! `‖F′(A/(Rt2^{−n})) E_nψ(t)‖²`, of the `|A/t|^{1/2}`-weighted variant (split at
//! `t = 2^n/R`), of the low-time bump `G(A/t ∼ 2^{−n}/R)`, and of the second-order
//! commutator remainder `i[|p|, F(A/s)] − s^{−1}|p|^{1/2}F′(A/s)|p|^{1/2}` over
//! `t > 2^n/R`, evaluated at `R` and `2R`.

use rayon::prelude::*;

use super::common::Setup;
use super::config::ExperimentConfig;
use super::engine::AFunction;
use super::integrals::{Accumulator, Measure};
use super::report::{Figure, RunReport};
use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::estimates::BoundCertificate;
use crate::funcalc::{DyadicShell, SmoothCutoff};
use crate::grid::{apply_multiplier, WaveFunction, C64};

/// Integrand values at one sample.
#[derive(Debug, Clone, Copy)]
struct Sample {
    derivative: f64,
    weighted: f64,
    boundary: f64,
    bump: f64,
    remainder: f64,
    remainder_doubled: f64,
}

struct ShellKernels {
    step: SmoothCutoff,
    bump: SmoothCutoff,
}

fn remainder(setup: &Setup, k: &ShellKernels, s: f64, e: &WaveFunction) -> Result<f64> {
    let eng = &setup.engine;
    let f_e = eng.a_function(&AFunction::new(&k.step, s), e)?.state;
    let p_e = apply_multiplier(e, |q| q);
    let f_pe = eng.a_function(&AFunction::new(&k.step, s), &p_e)?.state;
    let comm = apply_multiplier(&f_e, |q| q).sub(&f_pe)?.scaled(C64::new(0.0, 1.0));
    let half = apply_multiplier(e, |q| q.sqrt());
    let d_half = eng.a_function(&AFunction::derivative(&k.step, s), &half)?.state;
    let first = apply_multiplier(&d_half, |q| q.sqrt()).scaled_real(1.0 / s);
    let rem = comm.sub(&first)?;
    Ok(e.inner(&rem)?.re.abs())
}

fn sample(setup: &Setup, shell: &DyadicShell, k: &ShellKernels, r: f64, t: f64, psi: &WaveFunction) -> Result<Sample> {
    let eng = &setup.engine;
    let n = shell.n as i32;
    let e = eng.h_function(&|l| shell.profile(l), psi)?.state;
    let s = r * t * 2f64.powi(-n);
    let derivative = eng.a_function(&AFunction::derivative(&k.step, s), &e)?.state.norm_sqr();
    let root = move |tau: f64| (tau / t).abs().sqrt();
    let weighted = eng.a_function(&AFunction::new(&k.step, s).weighted(&root), &e)?.state.norm_sqr();
    let lin = move |tau: f64| tau / t;
    let boundary = e.inner(&eng.a_function(&AFunction::new(&k.step, s).weighted(&lin), &e)?.state)?.re;
    let bump = eng.a_function(&AFunction::new(&k.bump, t * 2f64.powi(-n) / r), &e)?.state.norm_sqr();
    let remainder_r = if t > 2f64.powi(n) / r { remainder(setup, k, s, &e)? } else { 0.0 };
    let remainder_doubled = if t > 2f64.powi(n) / (2.0 * r) {
        remainder(setup, k, 2.0 * s, &e)?
    } else {
        0.0
    };
    Ok(Sample {
        derivative,
        weighted,
        boundary,
        bump,
        remainder: remainder_r,
        remainder_doubled,
    })
}

/// Runs the propagation estimates of every configured shell along one trajectory.
pub fn run_propagation_estimate(cfg: &ExperimentConfig) -> Result<RunReport> {
    let setup = Setup::new(cfg)?;
    let mut report = setup.report("propagation");
    let c = &setup.cfg.cutoffs;
    let kernels = ShellKernels {
        step: c.a_step()?,
        bump: c.a_bump()?,
    };
    let tail_ratio = cfg.tolerances.tail_ratio.unwrap_or(2.0);
    let tail_from = cfg.tolerances.tail_from;
    let r = c.r;
    let times = setup.times().to_vec();
    for n in c.shell_list() {
        let shell = c.shell(n)?;
        if shell.support().0 < 2.5 * setup.grid.delta_k() {
            return Err(Error::Unresolvable(format!(
                "shell {n} starts at {:.4e}, below 2.5Δk = {:.4e}",
                shell.support().0,
                2.5 * setup.grid.delta_k()
            )));
        }
        let samples: Vec<Sample> = times
            .par_iter()
            .zip(setup.traj.states.par_iter())
            .map(|(&t, psi)| sample(&setup, &shell, &kernels, r, t, psi))
            .collect::<Result<Vec<_>>>()?;
        let e0 = setup.engine.h_function(&|l| shell.profile(l), &setup.prepared.state)?.state.norm_sqr();
        let split = 2f64.powi(n as i32) / r;
        let col = |f: fn(&Sample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();

        let a = Accumulator::new("F'_n(A/Rt) E_n psi", Some(n), Measure::Logarithmic, &times, &col(|s| s.derivative));
        let b = Accumulator::new("|A/t|^1/2 F_n E_n psi", Some(n), Measure::Logarithmic, &times, &col(|s| s.weighted));
        let g = Accumulator::new("G_n(A/t) E_n psi", Some(n), Measure::Logarithmic, &times, &col(|s| s.bump));
        let sub = |lo: f64, f: fn(&Sample) -> f64| -> (Vec<f64>, Vec<f64>) {
            times
                .iter()
                .zip(&samples)
                .filter(|(t, _)| **t > lo)
                .map(|(t, s)| (*t, f(s)))
                .unzip()
        };
        let (ta, va) = sub(split, |s| s.remainder);
        let (tb, vb) = sub(split / 2.0, |s| s.remainder_doubled);
        let rem = Accumulator::new("R2 remainder (R)", Some(n), Measure::Linear, &ta, &va);
        let rem2 = Accumulator::new("R2 remainder (2R)", Some(n), Measure::Linear, &tb, &vb);

        let mut cert = BoundCertificate::new(format!("propagation-n{n}"), "∫ ‖F_n(A/t)E_nψ(t)‖² dt/t ≤ C‖E_nψ(0)‖²")
            .param("n", n as f64)
            .param("R", r)
            .param("E_n_psi0_sq", e0)
            .param("tail_ratio", tail_ratio)
            .param("tail_from", tail_from);
        cert.measured = a.total() / e0.max(f64::MIN_POSITIVE);
        cert.record("I_a/E0", setup.cfg.time.t_end, cert.measured);
        cert.record("I_b(t>2^n/R)/E0", setup.cfg.time.t_end, b.between(split, f64::INFINITY) / e0);
        cert.record("I_b(t<=2^n/R)/E0", split, b.between(0.0, split) / e0);
        cert.record("I_G(t<=2^n/R)/E0", split, g.between(0.0, split) / e0);
        for (label, acc) in [("a", &a), ("b", &b)] {
            let ratios = acc.tail_ratios(tail_from);
            for (t, ratio) in &ratios {
                cert.record(format!("tail-ratio-{label}"), *t, *ratio);
                cert.check(
                    format!("tail {label}: I(2T)−I(T) shrinks at T={t}"),
                    *ratio,
                    format!("≥ {tail_ratio}"),
                    *ratio >= tail_ratio,
                );
            }
            if ratios.is_empty() {
                cert.check(format!("tail {label}: doublings available"), 0.0, "≥ 2 tails with T ≥ tail_from", false);
            }
            for (t, tail) in &acc.tails {
                cert.record(format!("tail-{label}"), *t, *tail);
            }
        }
        let (ra, rb) = (rem.total(), rem2.total());
        cert.record("R2-integral", r, ra);
        cert.record("R2-integral", 2.0 * r, rb);
        cert.record("R2-integral-vs-c/R", r, ra * r / e0.max(f64::MIN_POSITIVE));
        cert.check("R2 integral decreases when R doubles", rb / ra, "< 1", rb < ra);
        if setup.traj.flagged {
            cert.flagged = true;
            cert.note("boundary mass exceeded its tolerance: integrals may be contaminated by the box edge");
        }

        let boundary = TimeSeries::new("<E_n (A/t) F_n E_n>", Some(n), times.clone(), col(|s| s.boundary));
        let ia = report.push_series(TimeSeries::new(a.tag.clone(), Some(n), times.clone(), a.integrand.clone()));
        let ib = report.push_series(TimeSeries::new(b.tag.clone(), Some(n), times.clone(), b.integrand.clone()));
        report.push_series(TimeSeries::new(g.tag.clone(), Some(n), times.clone(), g.integrand.clone()));
        report.push_series(boundary);
        let ir = report.push_series(TimeSeries::new(rem.tag.clone(), Some(n), ta.clone(), va.clone()));
        let ir2 = report.push_series(TimeSeries::new(rem2.tag.clone(), Some(n), tb.clone(), vb.clone()));
        let ca = report.push_integral(a);
        let cb = report.push_integral(b);
        report.push_integral(g);
        report.push_integral(rem);
        report.push_integral(rem2);
        report.figures.push(Figure {
            name: format!("integrands-n{n}"),
            title: format!("Propagation integrands, shell {n}"),
            curves: vec![ia, ib, ir, ir2],
            envelopes: vec![],
            levels: vec![],
            log_y: true,
        });
        report.figures.push(Figure {
            name: format!("integrals-n{n}"),
            title: format!("Accumulated integrals, shell {n}"),
            curves: vec![ca, cb],
            envelopes: vec![],
            levels: vec![("‖E_nψ(0)‖²".into(), e0)],
            log_y: true,
        });
        report.certificates.push(cert);
    }
    Ok(report)
}
