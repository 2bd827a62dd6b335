//! The static-estimate battery, plain simulation runs with checkpoints, the split-step
//! convergence comparison against the dense propagator, and the commutator-expansion
//! scaling check.

use std::path::Path;
use std::sync::Arc;

use super::common::Setup;
use super::config::ExperimentConfig;
use super::report::{Figure, RunReport};
use crate::dynamics::{propagate_to, write_checkpoint, PositionObservable, PropagationOptions, TimeSeries};
use crate::error::{Error, Result};
use crate::estimates::{
    check_dyadic_localization, check_hardy, check_kernel_bounds, check_mutual_domination, check_radial_identity,
    check_reverse_mourre, check_scaling_covariance, check_support_disjointness, covariance_lambdas,
    default_kernel_times, fit_power_law, interior_probes, require_dense_shell, BoundCertificate, GeneratorSpectrum,
    HamiltonianSpectrum, KernelBound, KernelOracle, KernelParams,
};
use crate::funcalc::{
    commutator_expansion_with, CutoffKind, DyadicShell, ExpansionOperator, ExpansionOptions, SmoothCutoff,
    SMOOTH_MOLLIFIER_RATIO,
};
use crate::grid::{apply_multiplier, RadialGrid, WaveFunction, C64};
use crate::operators::{DEFAULT_LAMBDA_MAX, PotentialSpec};
use crate::oracle::{assemble_dense, dense_propagate, DenseKind};

/// Random states of the Hardy check.
pub const HARDY_SAMPLES: usize = 1000;
/// Probes of the scaling-covariance check.
pub const COVARIANCE_PROBES: usize = 20;
/// Relative tolerance of the scaling-covariance check.
pub const COVARIANCE_TOL: f64 = 1e-5;
/// Shells of the Mourre and localization families.
pub const SHELL_RANGE: std::ops::RangeInclusive<u32> = 0..=7;
/// Upper-ratio envelope of the reverse Mourre family.
pub const MOURRE_ENVELOPE: f64 = 4.0;
/// Max/min envelope of the localization families.
pub const LOCALIZATION_ENVELOPE: f64 = 8.0;
/// Tolerance of the disjoint-support norms.
pub const DISJOINTNESS_TOL: f64 = 1e-3;
/// Shells of the kernel decay fits.
pub const KERNEL_SHELLS: [u32; 2] = [2, 3];

/// Runs every static certificate the configured grid supports.
pub fn run_certify(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let grid = cfg.build_grid()?;
    let v = &cfg.potential;
    let delta = cfg.cutoffs.shell_delta;
    let mut report = RunReport::new("certify", Some(cfg));
    report.diagnostic("grid", format!("N={} h={}", grid.n_points(), grid.spacing()));
    report.diagnostic("potential", v.id());

    report.certificates.push(check_hardy(&grid, HARDY_SAMPLES, cfg.seed)?);
    report.certificates.push(check_radial_identity(&grid)?);
    let probes = interior_probes(&grid, COVARIANCE_PROBES, cfg.seed);
    report.certificates.push(check_scaling_covariance(&probes, &covariance_lambdas(), COVARIANCE_TOL)?);
    report.certificates.push(check_mutual_domination(v, &grid)?);

    let hs = HamiltonianSpectrum::new(v, &grid)?;
    let ns: Vec<u32> = SHELL_RANGE.filter(|&n| require_dense_shell(&grid, n, delta).is_ok()).collect();
    report.diagnostic("shells", format!("{ns:?}"));
    if ns.is_empty() {
        return Err(Error::Unresolvable("no dyadic shell is resolvable on this grid".into()));
    }
    report.certificates.push(check_reverse_mourre(&hs, &ns, delta, MOURRE_ENVELOPE)?.0);
    report.certificates.push(check_dyadic_localization(&hs, &ns, delta, LOCALIZATION_ENVELOPE)?.0);
    if require_dense_shell(&grid, 2, delta).is_ok() {
        let lambdas = [0.0, 0.3, 0.6, 0.8, 1.0];
        report
            .certificates
            .push(check_support_disjointness(&grid, 2, &lambdas, delta, DISJOINTNESS_TOL, DEFAULT_LAMBDA_MAX)?);
    }
    let kshells: Vec<u32> = KERNEL_SHELLS.iter().copied().filter(|n| ns.contains(n)).collect();
    if kshells.len() == KERNEL_SHELLS.len() {
        let gs = GeneratorSpectrum::new(&grid)?;
        let oracle = KernelOracle {
            hamiltonian: &hs,
            generator: &gs,
        };
        for bound in KernelBound::ALL {
            report.certificates.push(check_kernel_bounds(
                &oracle,
                bound,
                &kshells,
                &default_kernel_times(),
                &KernelParams::default(),
                delta,
            )?);
        }
    }
    Ok(report)
}

/// Propagates the configured state, records norm drift, boundary mass and the
/// outgoing/incoming position observables, and optionally writes a checkpoint.
pub fn run_simulate(cfg: &ExperimentConfig, checkpoint: Option<&Path>) -> Result<RunReport> {
    let setup = Setup::new(cfg)?;
    let mut report = setup.report("simulate");
    let c = &setup.cfg.cutoffs;
    let times = setup.times().to_vec();
    let out = PositionObservable::outgoing(c.a, c.position_width)?;
    let inc = PositionObservable::incoming(c.b, c.position_width)?;
    let measure = |obs: &PositionObservable| -> Result<Vec<f64>> {
        times
            .iter()
            .zip(&setup.traj.states)
            .map(|(&t, psi)| Ok(obs.apply(t, psi)?.norm_sqr()))
            .collect()
    };
    let i_out = report.push_series(TimeSeries::new(out.tag(), None, times.clone(), measure(&out)?));
    let i_in = report.push_series(TimeSeries::new(inc.tag(), None, times.clone(), measure(&inc)?));
    report.push_series(TimeSeries::new("norm drift", None, times.clone(), setup.traj.norm_drift.clone()));
    report.figures.push(Figure {
        name: "position-observables".into(),
        title: "Outgoing and incoming position observables".into(),
        curves: vec![i_out, i_in],
        envelopes: vec![],
        levels: vec![],
        log_y: true,
    });
    let mut cert = BoundCertificate::new("boundary-mass", "mass beyond 0.9L stays below tolerance")
        .param("boundary_tol", cfg.tolerances.boundary);
    cert.measured = setup.traj.max_boundary_mass();
    cert.check(
        "max boundary mass",
        cert.measured,
        format!("≤ {:e}", cfg.tolerances.boundary),
        !setup.traj.flagged,
    );
    report.certificates.push(cert);
    if let Some(path) = checkpoint {
        write_checkpoint(path, &setup.traj)?;
        report.diagnostic("checkpoint", path.display());
    }
    Ok(report)
}

/// Split-step error against the dense propagator at `t_end` for each step in `dts`
/// (decreasing), with the fitted convergence order. Certifies the error at the smallest
/// step `≤ tol` and the order within `order ± order_tol`.
pub fn check_split_step_convergence(
    psi0: &WaveFunction,
    v: &PotentialSpec,
    t_end: f64,
    dts: &[f64],
    tol: f64,
    order: f64,
    order_tol: f64,
) -> Result<BoundCertificate> {
    if dts.len() < 2 || dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("need at least two decreasing steps".into()));
    }
    let grid = psi0.grid();
    let h = assemble_dense(DenseKind::Hamiltonian, v, grid)?;
    let exact = dense_propagate(&h, psi0, t_end)?;
    let options = PropagationOptions::default();
    let mut cert = BoundCertificate::new("split-step-convergence", "‖ψ_dt(T) − e^{−iHT}ψ₀‖ = O(dt²)")
        .param("n_points", grid.n_points() as f64)
        .param("spacing", grid.spacing())
        .param("t_end", t_end)
        .param("tolerance", tol)
        .param("order", order)
        .param("order_tol", order_tol);
    let mut errors = Vec::new();
    for &dt in dts {
        let traj = propagate_to(psi0, v, &[t_end], dt, &options)?;
        let err = traj.states[0].distance(&exact)?;
        cert.record("error", dt, err);
        errors.push(err);
    }
    let finest = *errors.last().expect("nonempty");
    cert.measured = finest;
    cert.check(format!("error at dt={:e}", dts[dts.len() - 1]), finest, format!("≤ {tol:e}"), finest <= tol);
    match fit_power_law(dts, &errors) {
        Some(fit) => {
            cert.check(
                "convergence order",
                fit.exponent,
                format!("{order} ± {order_tol}"),
                (fit.exponent - order).abs() <= order_tol,
            );
            cert.fits.insert("error".into(), fit);
        }
        None => cert.check("convergence order", f64::NAN, "fit available", false),
    }
    Ok(cert)
}

/// `oracle-compare`: the configured state and potential, evolved to `t_end` with the
/// steps `4dt, 2dt, dt`.
pub fn run_oracle_compare(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let grid = cfg.build_grid()?;
    let prepared = crate::dynamics::prepare_state(&cfg.state, &cfg.potential, &grid)?;
    let dt = cfg.time.dt;
    let cert = check_split_step_convergence(
        &prepared.state,
        &cfg.potential,
        cfg.time.t_end,
        &[4.0 * dt, 2.0 * dt, dt],
        cfg.tolerances.agreement,
        2.0,
        0.1,
    )?;
    let mut report = RunReport::new("oracle-compare", Some(cfg));
    report.diagnostic("grid", format!("N={} h={}", grid.n_points(), grid.spacing()));
    report.diagnostic("potential", cfg.potential.id());
    let pts = cert.series("error");
    let idx = report.push_series(TimeSeries::new(
        "split-step error vs dt",
        None,
        pts.iter().map(|p| p.0).collect(),
        pts.iter().map(|p| p.1).collect(),
    ));
    report.figures.push(Figure {
        name: "oracle-convergence".into(),
        title: "Split-step error against the dense propagator".into(),
        curves: vec![idx],
        envelopes: vec![],
        levels: vec![("tolerance".into(), cfg.tolerances.agreement)],
        log_y: true,
    });
    report.certificates.push(cert);
    Ok(report)
}

fn packet(grid: &Arc<RadialGrid>, c: f64, sigma: f64, k: f64) -> Result<WaveFunction> {
    if c - 6.0 * sigma < 0.0 || c + 6.0 * sigma > grid.extent() {
        return Err(Error::Parameter(format!("probe at r = {c:.1} ± 6·{sigma:.1} does not fit the box")));
    }
    Ok(WaveFunction::from_fn(grid, |r| {
        let x = (r - c) / sigma;
        C64::from_polar((-x * x / 2.0).exp(), k * r)
    }))
}

fn transition_points(width: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| 1.0 - width + 2.0 * width * (i as f64 + 0.5) / count as f64)
}

/// Gaussian packets centred at `c` with `σ = c/8` and carriers `k = u s/c`, for `u`
/// spread over the transition band `[1 − w, 1 + w]`: `A/s ≈ u` on each probe.
pub fn scale_probes(grid: &Arc<RadialGrid>, c: f64, s: f64, width: f64, count: usize) -> Result<Vec<WaveFunction>> {
    transition_points(width, count)
        .map(|u| packet(grid, c, c / 8.0, u * s / c)?.normalized())
        .collect()
}

/// Packets with carrier at the centre of shell `n`, placed as in [`scale_probes`] with
/// `σ = c/8`, then projected onto `e_n(|p|)` exactly.
pub fn shell_probes(grid: &Arc<RadialGrid>, shell: &DyadicShell, s: f64, width: f64, count: usize) -> Result<Vec<WaveFunction>> {
    let (lo, hi) = shell.interval();
    let k = 0.5 * (lo + hi);
    transition_points(width, count)
        .map(|u| {
            let c = u * s / k;
            let g = packet(grid, c, c / 8.0, k)?;
            apply_multiplier(&g, |q| shell.profile(q)).normalized()
        })
        .collect()
}

/// Parameters of [`check_commutator_expansion`].
#[derive(Debug, Clone)]
pub struct ExpansionCheck {
    /// Scales of the remainder slope fit.
    pub scales: Vec<f64>,
    /// Scales of the `R₂` comparison on shell-localized probes.
    pub r2_scales: Vec<f64>,
    /// Transition half-width of the step cutoff `F(u > 1)`.
    pub width: f64,
    /// Centre of the slope probes.
    pub center: f64,
    pub probes: usize,
    pub slope: f64,
    pub slope_tol: f64,
    pub rel_tol: f64,
}

impl Default for ExpansionCheck {
    fn default() -> Self {
        Self {
            scales: vec![8.0, 16.0, 32.0, 64.0],
            r2_scales: vec![32.0, 64.0],
            width: 0.5,
            center: 100.0,
            probes: 4,
            slope: -2.0,
            slope_tol: 0.2,
            rel_tol: 0.1,
        }
    }
}

/// First-order expansion of `[|p|, F(A/s)]`: the worst relative remainder
/// `‖Rψ‖/‖|p|ψ‖` over probes placed at `A/s` in the cutoff transition must scale as
/// `s^{slope}`, and on probes localized in
/// shell `n` the truncated `R₂` quadrature must match the direct remainder.
pub fn check_commutator_expansion(grid: &Arc<RadialGrid>, shell: &DyadicShell, p: &ExpansionCheck) -> Result<BoundCertificate> {
    let f = SmoothCutoff::step(CutoffKind::StepUp, 1.0, p.width, SMOOTH_MOLLIFIER_RATIO)?;
    let k = ExpansionOperator::Momentum(1.0);
    let mut cert = BoundCertificate::new("commutator-expansion", "[|p|, F(A/s)] − s^{−1}F′(A/s)ad_A|p| = O(s^{−2})")
        .param("n", shell.n as f64)
        .param("width", p.width)
        .param("center", p.center)
        .param("probes", p.probes as f64)
        .param("slope", p.slope)
        .param("slope_tol", p.slope_tol)
        .param("rel_tol", p.rel_tol);
    let mut maxima = Vec::new();
    for &s in &p.scales {
        let probes = scale_probes(grid, p.center, s, p.width, p.probes)?;
        let rep = commutator_expansion_with(&k, &f, s, 1, &probes, &ExpansionOptions::default())?;
        // ‖R ψ‖/‖|p|ψ‖: the remainder is homogeneous of degree one in |p|.
        let m = rep
            .probes
            .iter()
            .zip(&probes)
            .map(|(q, psi)| q.remainder_norm / apply_multiplier(psi, |x| x).norm())
            .fold(0.0, f64::max);
        cert.record("max remainder", s, m);
        for (i, q) in rep.probes.iter().enumerate() {
            cert.record(format!("resampling error s={s}"), i as f64, q.resampling_error);
        }
        maxima.push(m);
    }
    let options = ExpansionOptions {
        shell: Some(shell.clone()),
        ..ExpansionOptions::default()
    };
    let mut worst_rel: f64 = 0.0;
    for &s in &p.r2_scales {
        let probes = shell_probes(grid, shell, s, p.width, p.probes)?;
        let rep = commutator_expansion_with(&k, &f, s, 1, &probes, &options)?;
        for (i, q) in rep.probes.iter().enumerate() {
            let rel = q.r2_relative_difference.unwrap_or(f64::NAN);
            cert.record(format!("R2 relative difference s={s}"), i as f64, rel);
            worst_rel = worst_rel.max(if rel.is_nan() { f64::INFINITY } else { rel });
        }
    }
    let (slope, slope_tol, rel_tol) = (p.slope, p.slope_tol, p.rel_tol);
    cert.check("R2 quadrature vs direct remainder", worst_rel, format!("≤ {rel_tol}"), worst_rel <= rel_tol);
    match fit_power_law(&p.scales, &maxima) {
        Some(fit) => {
            cert.measured = fit.exponent;
            cert.check(
                "remainder slope in s",
                fit.exponent,
                format!("{slope} ± {slope_tol}"),
                (fit.exponent - slope).abs() <= slope_tol,
            );
            cert.fits.insert("max remainder".into(), fit);
        }
        None => cert.check("remainder slope in s", f64::NAN, "fit available", false),
    }
    Ok(cert)
}
