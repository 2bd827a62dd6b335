//! Maximal- and minimal-velocity assemblies.
//!
//! The maximal-velocity run measures `P(t, a) = ‖F_a(r/t > a)ψ(t)‖²` and decomposes it
//! through the energy shells: writing `ψ = H^{−1/2}H^{1/2}ψ`,
//!
//! ```text
//! P = Σ_n ⟨H^{−1/2}ψ, F_a² (F_n + F̄_n) E_n² H^{1/2}ψ⟩ + ⟨H^{−1/2}ψ, F_a² tail²(H) H^{1/2}ψ⟩ + Q,
//! Q = ⟨H^{−1/2}ψ, [H^{1/2}, F_a²] ψ⟩,
//! ```
//!
//! with `F_n = F(A/(R t 2^{−n}) > 1)` and `F̄_n = 1 − F_n`. Every term is evaluated
//! independently; the residual of the identity is compared with the accumulated
//! application errors.
//!
//! The minimal-velocity run measures `⟨ψ(t), F_b(r/t < b)ψ(t)⟩`, its `dt/t` integral
//! `M(T)`, the shell integrals of `‖F̃_n(A/(t2^{−n}))E_nψ(t)‖²` and the
//! localization norms `‖E_n F_b (1 − F̃_n) E_n ψ(t)‖`.

use rayon::prelude::*;

use super::common::Setup;
use super::config::ExperimentConfig;
use super::engine::AFunction;
use super::integrals::{Accumulator, Measure};
use super::report::{Figure, RunReport};
use crate::dynamics::{PositionObservable, TimeSeries};
use crate::error::{Error, Result};
use crate::estimates::BoundCertificate;
use crate::funcalc::make_dyadic_partition;
use crate::grid::WaveFunction;
use crate::operators::validate_potential;

/// Default decay level of `sup_{t ≥ T} P(t)`.
pub const DEFAULT_DECAY_LEVEL: f64 = 1e-3;
/// Default per-doubling shrink factor of `M(2T) − M(T)`.
pub const DEFAULT_MINIMAL_TAIL_RATIO: f64 = 1.4;

#[derive(Debug, Clone, Default)]
struct MaxSample {
    direct: f64,
    outgoing: Vec<f64>,
    complement: Vec<f64>,
    tail: f64,
    q: f64,
    budget: f64,
    summability: f64,
}

fn max_sample(setup: &Setup, t: f64, psi: &WaveFunction) -> Result<MaxSample> {
    let c = &setup.cfg.cutoffs;
    let eng = &setup.engine;
    let fa = PositionObservable::outgoing(c.a, c.position_width)?.cutoff()?;
    let fa_sq = |x: &WaveFunction| x.multiply_by(|r| fa.eval(r / t).powi(2));
    let step = c.a_step()?;
    let partition = make_dyadic_partition(c.n_max, c.shell_delta, None)?;

    let direct = psi.inner(&fa_sq(psi))?.re;
    let lower = eng.h_power(-0.5, psi)?;
    let upper = eng.h_power(0.5, psi)?;
    let (ln, un) = (lower.state.norm(), upper.state.norm());
    let mut budget = lower.error * un + upper.error * ln;

    let mut out = MaxSample {
        direct,
        ..MaxSample::default()
    };
    for (n, shell) in partition.shells.iter().enumerate() {
        let en = eng.h_function(&|l| shell.profile_sq(l), &upper.state)?;
        let f_en = eng.a_function(&AFunction::new(&step, c.r * t * 2f64.powi(-(n as i32))), &en.state)?;
        let fbar_en = en.state.sub(&f_en.state)?;
        let p_out = lower.state.inner(&fa_sq(&f_en.state))?.re;
        let p_in = lower.state.inner(&fa_sq(&fbar_en))?.re;
        budget += ln * (2.0 * en.error + f_en.error);
        // ⟨n⟩^{1+ε}‖F_n E_n H^{1/2}ψ‖², with E_n applied once.
        let e1 = eng.h_function(&|l| shell.profile(l), &upper.state)?;
        let f1 = eng.a_function(&AFunction::new(&step, c.r * t * 2f64.powi(-(n as i32))), &e1.state)?;
        out.summability += (1.0 + (n * n) as f64).sqrt().powf(1.0 + c.epsilon) * f1.state.norm_sqr();
        out.outgoing.push(p_out);
        out.complement.push(p_in);
    }
    let tail = eng.h_function(&|l| partition.tail_sq(l), &upper.state)?;
    out.tail = lower.state.inner(&fa_sq(&tail.state))?.re;
    budget += ln * tail.error;
    let h_fa = eng.h_power(0.5, &fa_sq(psi))?;
    out.q = lower.state.inner(&h_fa.state)?.re - lower.state.inner(&fa_sq(&upper.state))?.re;
    budget += ln * h_fa.error + lower.error * (h_fa.state.norm() + un);
    out.budget = budget;
    Ok(out)
}

/// Maximal-velocity decay curve `P(t, a)`, its shell decomposition, the summability
/// diagnostic and the certification of `sup_{t≥T} P(t, a)`.
pub fn run_maximal_velocity(cfg: &ExperimentConfig) -> Result<RunReport> {
    let setup = Setup::new(cfg)?;
    let mut report = setup.report("maxvel");
    let c = &setup.cfg.cutoffs;
    let tol = &setup.cfg.tolerances;
    let times = setup.times().to_vec();
    let samples: Vec<MaxSample> = times
        .par_iter()
        .zip(setup.traj.states.par_iter())
        .map(|(&t, psi)| max_sample(&setup, t, psi))
        .collect::<Result<Vec<_>>>()?;
    // Split-step against exact spectral evolution of the same initial state.
    let agreement: Vec<f64> = times
        .par_iter()
        .zip(setup.traj.states.par_iter())
        .map(|(&t, psi)| {
            let exact = setup.engine.evolve(&setup.prepared.state, t)?;
            psi.distance(&exact)
        })
        .collect::<Result<Vec<_>>>()?;

    let col = |f: &dyn Fn(&MaxSample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
    let direct = TimeSeries::new(format!("P(t,{})", c.a), None, times.clone(), col(&|s| s.direct));
    let sup = TimeSeries::new(
        format!("sup P(t,{})", c.a),
        None,
        times.clone(),
        direct.running_sup_from_right(),
    );
    let residual: Vec<f64> = samples
        .iter()
        .map(|s| (s.direct - s.outgoing.iter().sum::<f64>() - s.complement.iter().sum::<f64>() - s.tail - s.q).abs())
        .collect();
    let x_half = setup.weighted_norm(0.5);
    let q_scaled: Vec<f64> = samples.iter().zip(&times).map(|(s, t)| s.q.abs() * t / (x_half * x_half)).collect();

    let level = tol.decay_level.unwrap_or(DEFAULT_DECAY_LEVEL);
    let mut cert = BoundCertificate::new("maximal-velocity", "sup_{t≥T} ‖F(r/t > a)ψ(t)‖² → 0")
        .param("a", c.a)
        .param("R", c.r)
        .param("decay_time", tol.decay_time)
        .param("decay_level", level)
        .param("monotone_from", tol.monotone_from)
        .param("agreement", tol.agreement);
    let at = direct.value_at(tol.decay_time).unwrap_or(f64::NAN);
    let sup_at = sup.value_at(tol.decay_time).unwrap_or(f64::NAN);
    cert.measured = sup_at;
    for (t, v) in times.iter().zip(&direct.values) {
        cert.record("P", *t, *v);
    }
    cert.check(format!("P(t,a) at t={}", tol.decay_time), at, format!("≤ {level}"), at <= level);
    cert.check(format!("sup P(t≥{},a)", tol.decay_time), sup_at, format!("≤ {level}"), sup_at <= level);
    let mono = direct.nonincreasing_from(tol.monotone_from);
    cert.check(
        format!("P(t,a) nonincreasing for t ≥ {}", tol.monotone_from),
        direct.monotone_onset().unwrap_or(f64::NAN),
        format!("onset ≤ {}", tol.monotone_from),
        mono,
    );
    let worst_agree = agreement.iter().copied().fold(0.0, f64::max);
    cert.check(
        "split-step vs spectral evolution",
        worst_agree,
        format!("≤ {}", tol.agreement),
        worst_agree <= tol.agreement,
    );
    let worst = samples
        .iter()
        .zip(&residual)
        .map(|(s, r)| r / s.budget.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    cert.check(
        "decomposition residual / certified budget",
        worst,
        "≤ 1 at every sample",
        samples.iter().zip(&residual).all(|(s, r)| *r <= s.budget),
    );
    if let Some(fit) = crate::estimates::fit_power_law(
        &times.iter().copied().filter(|t| *t >= tol.monotone_from).collect::<Vec<_>>(),
        &direct
            .values
            .iter()
            .zip(&times)
            .filter(|(_, t)| **t >= tol.monotone_from)
            .map(|(v, _)| v.max(f64::MIN_POSITIVE))
            .collect::<Vec<_>>(),
    ) {
        cert.note(format!("measured decay rate of P: t^{:.3}", fit.exponent));
        cert.fits.insert("P".into(), fit);
    }
    if setup.traj.flagged {
        cert.flagged = true;
        cert.note("boundary mass exceeded its tolerance");
    }

    let i_direct = report.push_series(direct);
    let i_sup = report.push_series(sup);
    report.push_series(TimeSeries::new("split-vs-spectral distance", None, times.clone(), agreement));
    let mut curves = vec![i_direct];
    for n in 0..=c.n_max {
        let k = n as usize;
        let a = report.push_series(TimeSeries::new("F_n term", Some(n), times.clone(), col(&|s| s.outgoing[k])));
        report.push_series(TimeSeries::new("Fbar_n term", Some(n), times.clone(), col(&|s| s.complement[k])));
        if c.shell_list().contains(&n) {
            curves.push(a);
        }
    }
    report.push_series(TimeSeries::new("tail term", None, times.clone(), col(&|s| s.tail)));
    let iq = report.push_series(TimeSeries::new("Q term", None, times.clone(), col(&|s| s.q)));
    report.push_series(TimeSeries::new("Q t / |<x>^1/2 psi0|^2", None, times.clone(), q_scaled));
    let ires = report.push_series(TimeSeries::new("decomposition residual", None, times.clone(), residual));
    let ibud = report.push_series(TimeSeries::new("decomposition budget", None, times.clone(), col(&|s| s.budget)));
    report.push_series(TimeSeries::new("summability", None, times.clone(), col(&|s| s.summability)));
    report.figures.push(Figure {
        name: "maxvel-decay".into(),
        title: format!("Maximal velocity: P(t, {})", c.a),
        curves,
        envelopes: vec![i_sup],
        levels: vec![("decay level".into(), level)],
        log_y: true,
    });
    report.figures.push(Figure {
        name: "maxvel-decomposition".into(),
        title: "Decomposition residual against its budget".into(),
        curves: vec![ires, iq],
        envelopes: vec![ibud],
        levels: vec![],
        log_y: true,
    });
    report.certificates.push(cert);
    Ok(report)
}

/// Rejects potentials with bound states or a zero-energy resonance.
fn require_no_bound_states(setup: &Setup) -> Result<()> {
    let adm = validate_potential(setup.potential(), &setup.grid)?;
    if !adm.resonance_free {
        return Err(Error::Precondition(format!(
            "minimal velocity requires a potential without bound states or zero resonance; \
             Birman–Schwinger norm {:.4} ≥ 1",
            adm.birman_schwinger_norm
        )));
    }
    let floor = setup.engine.spectral_floor();
    if !(floor > 0.0) {
        return Err(Error::Precondition(format!(
            "minimal velocity requires a positive spectrum, lowest eigenvalue {floor:.4e}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct MinSample {
    incoming: f64,
    shells: Vec<f64>,
    localization: Vec<f64>,
}

fn min_sample(setup: &Setup, t: f64, psi: &WaveFunction) -> Result<MinSample> {
    let c = &setup.cfg.cutoffs;
    let eng = &setup.engine;
    let fb = PositionObservable::incoming(c.b, c.position_width)?.cutoff()?;
    let bump = c.incoming_a_bump()?;
    let incoming = psi.inner(&psi.multiply_by(|r| fb.eval(r / t)))?.re;
    let mut shells = Vec::new();
    let mut localization = Vec::new();
    for n in c.shell_list() {
        let shell = c.shell(n)?;
        let e = eng.h_function(&|l| shell.profile(l), psi)?.state;
        let ft = eng.a_function(&AFunction::new(&bump, t * 2f64.powi(-(n as i32))), &e)?.state;
        shells.push(ft.norm_sqr());
        let rest = e.sub(&ft)?.multiply_by(|r| fb.eval(r / t));
        localization.push(eng.h_function(&|l| shell.profile(l), &rest)?.state.norm());
    }
    Ok(MinSample {
        incoming,
        shells,
        localization,
    })
}

/// Minimal-velocity decay `⟨ψ(t), F_bψ(t)⟩`, the assembled integral `M(T)`, the
/// shell integrals and the localization norms.
pub fn run_minimal_velocity(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    if !(cfg.cutoffs.b < 1.0) {
        return Err(Error::Config(format!("minimal velocity needs b < 1, got {}", cfg.cutoffs.b)));
    }
    let setup = Setup::new(cfg)?;
    require_no_bound_states(&setup)?;
    let mut report = setup.report("minvel");
    let c = &setup.cfg.cutoffs;
    let tol = &setup.cfg.tolerances;
    let times = setup.times().to_vec();
    let samples: Vec<MinSample> = times
        .par_iter()
        .zip(setup.traj.states.par_iter())
        .map(|(&t, psi)| min_sample(&setup, t, psi))
        .collect::<Result<Vec<_>>>()?;

    let level = tol.decay_level.unwrap_or(DEFAULT_DECAY_LEVEL);
    let ratio = tol.tail_ratio.unwrap_or(DEFAULT_MINIMAL_TAIL_RATIO);
    let pb = TimeSeries::new(
        format!("<psi,F(r/t<{})psi>", c.b),
        None,
        times.clone(),
        samples.iter().map(|s| s.incoming).collect(),
    );
    let sup = TimeSeries::new(format!("sup <F_{}>", c.b), None, times.clone(), pb.running_sup_from_right());
    let m = Accumulator::new("M(T)", None, Measure::Logarithmic, &times, &pb.values);

    let mut cert = BoundCertificate::new("minimal-velocity", "⟨ψ(t), F(r/t < b)ψ(t)⟩ = o(1), ∫ ⟨F_b⟩ dt/t < ∞")
        .param("b", c.b)
        .param("decay_time", tol.decay_time)
        .param("decay_level", level)
        .param("tail_ratio", ratio)
        .param("tail_from", tol.tail_from);
    let sup_at = sup.value_at(tol.decay_time).unwrap_or(f64::NAN);
    cert.measured = sup_at;
    cert.check(format!("sup <F_b>(t≥{})", tol.decay_time), sup_at, format!("≤ {level}"), sup_at <= level);
    let ratios = m.tail_ratios(tol.tail_from);
    for (t, r) in &ratios {
        cert.record("M tail ratio", *t, *r);
        cert.check(format!("M(2T)−M(T) shrinks at T={t}"), *r, format!("≥ {ratio}"), *r >= ratio);
    }
    if ratios.is_empty() {
        cert.check("M tail doublings available", 0.0, "≥ 2 tails with T ≥ tail_from", false);
    }
    for (t, tail) in &m.tails {
        cert.record("M tail", *t, *tail);
    }
    cert.record("M(T)", setup.cfg.time.t_end, m.total());
    if setup.traj.flagged {
        cert.flagged = true;
        cert.note("boundary mass exceeded its tolerance");
    }

    let ipb = report.push_series(pb);
    let isup = report.push_series(sup);
    let im = report.push_integral(m);
    let mut shell_curves = Vec::new();
    for (k, n) in c.shell_list().into_iter().enumerate() {
        let shell = c.shell(n)?;
        let e0 = setup.engine.h_function(&|l| shell.profile(l), &setup.prepared.state)?.state.norm_sqr();
        let vals: Vec<f64> = samples.iter().map(|s| s.shells[k]).collect();
        let acc = Accumulator::new("Ftilde_n(A/t) E_n psi", Some(n), Measure::Logarithmic, &times, &vals);
        cert.record(format!("shell integral/E0 n={n}"), setup.cfg.time.t_end, acc.total() / e0.max(f64::MIN_POSITIVE));
        for (t, r) in acc.tail_ratios(tol.tail_from) {
            cert.record(format!("shell tail ratio n={n}"), t, r);
        }
        shell_curves.push(report.push_series(TimeSeries::new(acc.tag.clone(), Some(n), times.clone(), vals)));
        report.push_integral(acc);
        report.push_series(TimeSeries::new(
            "localization E_n F_b (1-Ftilde_n) E_n psi",
            Some(n),
            times.clone(),
            samples.iter().map(|s| s.localization[k]).collect(),
        ));
    }
    report.figures.push(Figure {
        name: "minvel-decay".into(),
        title: format!("Minimal velocity: <F(r/t < {})>", c.b),
        curves: vec![ipb],
        envelopes: vec![isup],
        levels: vec![("decay level".into(), level)],
        log_y: true,
    });
    report.figures.push(Figure {
        name: "minvel-integrals".into(),
        title: "Assembled M(T) and shell integrands".into(),
        curves: std::iter::once(im).chain(shell_curves).collect(),
        envelopes: vec![],
        levels: vec![],
        log_y: true,
    });
    report.certificates.push(cert);
    Ok(report)
}
