//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the measured
//! values behind the verdict. Tolerances are pinned here and nowhere else; the process
//! exits nonzero when any criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use halfwave::build_radial_grid;
use halfwave::dynamics::{prepare_state, StateSpec};
use halfwave::estimates::{
    check_dyadic_localization, check_hardy, check_kernel_bounds, check_reverse_mourre, check_scaling_covariance,
    check_support_disjointness, covariance_lambdas, default_kernel_times, interior_probes, BoundCertificate,
    GeneratorSpectrum, HamiltonianSpectrum, KernelBound, KernelOracle, KernelParams,
};
use halfwave::experiments::cli::main_with_args;
use halfwave::experiments::{
    check_commutator_expansion, check_split_step_convergence, emit_report, run_maximal_velocity,
    run_minimal_velocity, run_propagation_estimate, run_simulate, ExpansionCheck, ExperimentConfig, Formats,
    RunReport,
};
use halfwave::funcalc::DyadicShell;
use halfwave::operators::PotentialSpec;

type Outcome = Result<(bool, String), String>;

fn interacting() -> PotentialSpec {
    PotentialSpec::soft_decay(-0.3, 3.0)
}

fn failed_checks(c: &BoundCertificate) -> String {
    let bad: Vec<String> = c
        .checks
        .iter()
        .filter(|ch| !ch.pass)
        .map(|ch| format!("{}={:.3e} (want {})", ch.name, ch.value, ch.envelope))
        .collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!(" failed: [{}]", bad.join("; "))
    }
}

fn report_verdict(r: &RunReport) -> (bool, String) {
    let mut detail = String::new();
    for c in &r.certificates {
        detail.push_str(&failed_checks(c));
    }
    if r.flagged {
        detail.push_str(&format!(" flagged: boundary mass {:.2e}", r.boundary_mass_max));
    }
    (r.passed() && !r.flagged, detail)
}

fn c1() -> Outcome {
    let g = build_radial_grid(512, 0.2).map_err(|e| e.to_string())?;
    let v = interacting();
    let p = prepare_state(&StateSpec::gaussian(6.0, 2.0, 1.5), &v, &g).map_err(|e| e.to_string())?;
    let c = check_split_step_convergence(&p.state, &v, 10.0, &[4e-3, 2e-3, 1e-3], 1e-6, 2.0, 0.1)
        .map_err(|e| e.to_string())?;
    let slope = c.fits.get("error").map_or(f64::NAN, |f| f.exponent);
    Ok((c.pass, format!("err(dt=1e-3)={:.3e} slope={slope:.3}{}", c.measured, failed_checks(&c))))
}

fn c2() -> Outcome {
    let g = build_radial_grid(1024, 1.0).map_err(|e| e.to_string())?;
    let c = check_hardy(&g, 1000, 7).map_err(|e| e.to_string())?;
    Ok((c.pass, format!("‖r⁻¹|p|⁻¹‖={:.4}{}", c.measured, failed_checks(&c))))
}

fn c3() -> Outcome {
    let g = build_radial_grid(2048, 0.25).map_err(|e| e.to_string())?;
    let probes = interior_probes(&g, 20, 3);
    let c = check_scaling_covariance(&probes, &covariance_lambdas(), 1e-5).map_err(|e| e.to_string())?;
    Ok((c.pass, format!("max relative defect={:.3e}{}", c.measured, failed_checks(&c))))
}

fn c4() -> Outcome {
    let g = build_radial_grid(1024, 4.0).map_err(|e| e.to_string())?;
    let c = check_support_disjointness(&g, 2, &[0.0, 0.3, 0.6, 0.8, 1.0], 0.05, 1e-3, 3.0)
        .map_err(|e| e.to_string())?;
    let at = |l: f64| {
        c.series("norm")
            .iter()
            .find(|(x, _)| (x - l).abs() < 1e-12)
            .map_or(f64::NAN, |p| p.1)
    };
    Ok((c.pass, format!("norm(0.6)={:.3e} norm(0.8)={:.3e}{}", at(0.6), at(0.8), failed_checks(&c))))
}

fn c56(hs_interacting: &HamiltonianSpectrum, hs_free: &HamiltonianSpectrum) -> (Outcome, Outcome) {
    let ns: Vec<u32> = (0..=7).collect();
    let mourre = check_reverse_mourre(hs_interacting, &ns, 0.05, 4.0)
        .map(|(c, _)| (c.pass, format!("upper spread={:.3}{}", c.measured, failed_checks(&c))))
        .map_err(|e| e.to_string());
    let loc = (|| {
        let (ci, _) = check_dyadic_localization(hs_interacting, &ns, 0.05, 8.0).map_err(|e| e.to_string())?;
        let (cf, _) = check_dyadic_localization(hs_free, &ns, 0.05, 8.0).map_err(|e| e.to_string())?;
        Ok((
            ci.pass && cf.pass,
            format!(
                "γ=−0.3 worst spread={:.3}; V=0 worst spread={:.3}{}{}",
                ci.measured,
                cf.measured,
                failed_checks(&ci),
                failed_checks(&cf)
            ),
        ))
    })();
    (mourre, loc)
}

fn c7() -> Outcome {
    let g = build_radial_grid(512, 2.0).map_err(|e| e.to_string())?;
    let hs = HamiltonianSpectrum::new(&interacting(), &g).map_err(|e| e.to_string())?;
    let gs = GeneratorSpectrum::new(&g).map_err(|e| e.to_string())?;
    let oracle = KernelOracle {
        hamiltonian: &hs,
        generator: &gs,
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for bound in KernelBound::ALL {
        let c = check_kernel_bounds(&oracle, bound, &[2, 3], &default_kernel_times(), &KernelParams::default(), 0.05)
            .map_err(|e| e.to_string())?;
        pass &= c.pass;
        let slopes: Vec<String> = c.fits.iter().map(|(k, f)| format!("{k}:{:.2}", f.exponent)).collect();
        parts.push(format!("{} {} [{}]", c.id, if c.pass { "ok" } else { "FAIL" }, slopes.join(" ")));
    }
    Ok((pass, parts.join("; ")))
}

fn c8() -> Outcome {
    let g = build_radial_grid(2048, 0.5).map_err(|e| e.to_string())?;
    let shell = DyadicShell::new(2, 0.25).map_err(|e| e.to_string())?;
    let c = check_commutator_expansion(&g, &shell, &ExpansionCheck::default()).map_err(|e| e.to_string())?;
    let slope = c.fits.values().next().map_or(f64::NAN, |f| f.exponent);
    Ok((c.pass, format!("remainder slope={slope:.3}{}", failed_checks(&c))))
}

fn propagation_config(potential: PotentialSpec) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(1023, 1.0);
    c.potential = potential;
    c.state = StateSpec::gaussian(100.0, 30.0, 0.1);
    c.cutoffs.shells = Some(vec![2, 3]);
    c.time.dt = 0.05;
    c
}

fn c9() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (label, v) in [("V=0", PotentialSpec::Zero), ("γ=−0.3", interacting())] {
        let r = run_propagation_estimate(&propagation_config(v)).map_err(|e| e.to_string())?;
        let (ok, why) = report_verdict(&r);
        pass &= ok;
        let ratios: Vec<String> = r
            .certificates
            .iter()
            .map(|c| {
                let rd = c.check_named("R2 integral decreases when R doubles").map_or(f64::NAN, |ch| ch.value);
                format!("{} R2(2R)/R2(R)={rd:.3}", c.id)
            })
            .collect();
        detail.push(format!("{label}: {}{why}", ratios.join(", ")));
    }
    Ok((pass, detail.join("; ")))
}

fn maximal_config(potential: PotentialSpec) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(512, 0.75);
    if !potential.is_zero() {
        c.tolerances.decay_level = Some(5e-3);
    }
    c.potential = potential;
    c.state = StateSpec::gaussian(20.0, 3.0, 0.75).with_window(0.3, 1.2);
    c.cutoffs.r = 1.1;
    c.cutoffs.a = 1.25;
    c.time.t_end = 256.0;
    c.time.dt = 0.01;
    c
}

fn c10() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (label, v) in [("V=0", PotentialSpec::Zero), ("γ=−0.3", interacting())] {
        let r = run_maximal_velocity(&maximal_config(v)).map_err(|e| e.to_string())?;
        let (ok, why) = report_verdict(&r);
        pass &= ok;
        let p200 = r.find_series("P(t,1.25)", None).and_then(|s| s.value_at(200.0)).unwrap_or(f64::NAN);
        let agree = r
            .find_series("split-vs-spectral distance", None)
            .map_or(f64::NAN, |s| s.values.iter().copied().fold(0.0, f64::max));
        detail.push(format!("{label}: P(200)={p200:.3e} agreement={agree:.2e}{why}"));
    }
    Ok((pass, detail.join("; ")))
}

fn minimal_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(1023, 0.8);
    c.potential = interacting();
    c.state = StateSpec::gaussian(60.0, 10.0, 0.25);
    c.cutoffs.shells = Some(vec![0, 1]);
    c.time.dt = 0.02;
    c
}

fn c11() -> Outcome {
    let r = run_minimal_velocity(&minimal_config()).map_err(|e| e.to_string())?;
    let (mut pass, mut detail) = report_verdict(&r);
    let sup = r
        .find_series("<psi,F(r/t<0.5)psi>", None)
        .map_or(f64::NAN, |s| s.times.iter().zip(&s.values).filter(|(t, _)| **t >= 200.0).fold(0.0, |m, (_, v)| v.max(m)));
    detail = format!("sup_(t≥200) P_b={sup:.3e}{detail}");

    let mut small = ExperimentConfig::new(255, 0.7);
    small.state = StateSpec::gaussian(40.0, 5.0, 0.5);
    small.time.t_end = 4.0;
    let mut b_one = small.clone();
    b_one.cutoffs.b = 1.0;
    let mut bound = small;
    bound.potential = PotentialSpec::soft_decay(-20.0, 3.0);
    for (label, cfg) in [("b=1", b_one), ("bound state", bound)] {
        match run_minimal_velocity(&cfg) {
            Err(e) if e.is_configuration() => detail.push_str(&format!("; {label} refused")),
            Err(e) => {
                pass = false;
                detail.push_str(&format!("; {label} failed with a non-configuration error: {e}"));
            }
            Ok(_) => {
                pass = false;
                detail.push_str(&format!("; {label} was NOT refused"));
            }
        }
    }
    Ok((pass, detail))
}

fn small_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(255, 0.5);
    c.seed = 11;
    c.state = StateSpec::gaussian(30.0, 4.0, 1.0);
    c.time.t_end = 8.0;
    c.time.dt = 0.01;
    c
}

fn csv_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in walk(dir)? {
        if entry.extension().is_some_and(|e| e == "csv") {
            let rel = entry.strip_prefix(dir).map_err(|e| e.to_string())?.display().to_string();
            files.push((rel, std::fs::read(&entry).map_err(|e| e.to_string())?));
        }
    }
    files.sort();
    Ok(files)
}

fn walk(dir: &Path) -> Result<Vec<std::path::PathBuf>, String> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = e.map_err(|e| e.to_string())?.path();
        if p.is_dir() {
            out.extend(walk(&p)?);
        } else {
            out.push(p);
        }
    }
    Ok(out)
}

fn cli_code(dir: &Path, cfg: Option<&ExperimentConfig>, args: &[&str]) -> Result<i32, String> {
    let out = dir.join(format!("out-{}", args.join("-")));
    let mut argv: Vec<String> = vec!["halfwave".into(), "--out".into(), out.display().to_string()];
    if let Some(cfg) = cfg {
        let path = dir.join(format!("cfg-{}.toml", args.join("-")));
        std::fs::write(&path, cfg.to_toml_string().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        argv.push("--config".into());
        argv.push(path.display().to_string());
    }
    argv.extend(args.iter().map(|s| s.to_string()));
    Ok(main_with_args(argv))
}

fn c12() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = small_config();
    let mut first = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("run{k}"));
        let r = run_simulate(&cfg, None).map_err(|e| e.to_string())?;
        emit_report(&[r], &dir, Formats::default()).map_err(|e| e.to_string())?;
        first.push(csv_bytes(&dir)?);
    }
    let identical = !first[0].is_empty() && first[0] == first[1];

    let mut strict = small_config();
    strict.tolerances.agreement = 1e-300;
    let mut wall = small_config();
    wall.state = StateSpec::gaussian(110.0, 2.0, 1.0);
    wall.time.t_end = 24.0;
    let mut bad_b = small_config();
    bad_b.cutoffs.b = 1.5;
    let cases: [(&str, Option<&ExperimentConfig>, &[&str], i32); 6] = [
        ("simulate", Some(&cfg), &["simulate"], 0),
        ("strict oracle-compare", Some(&strict), &["oracle-compare"], 1),
        ("missing --config", None, &["simulate"], 2),
        ("unknown subcommand", None, &["frobnicate"], 2),
        ("minvel b≥1", Some(&bad_b), &["minvel"], 2),
        ("packet at the wall", Some(&wall), &["simulate"], 3),
    ];
    let mut pass = identical;
    let mut detail = vec![format!("{} CSV files byte-identical={identical}", first[0].len())];
    for (label, cfg, args, want) in cases {
        let got = cli_code(tmp.path(), cfg, args)?;
        pass &= got == want;
        detail.push(format!("{label}→{got}{}", if got == want { String::new() } else { format!(" (want {want})") }));
    }
    Ok((pass, detail.join(", ")))
}

fn main() -> ExitCode {
    let mut all = true;
    let mut line = |k: u32, title: &str, started: Instant, o: Outcome| {
        let (pass, detail) = o.unwrap_or_else(|e| (false, format!("error: {e}")));
        all &= pass;
        println!(
            "criterion {k:>2} {} {title} ({:.1}s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    };
    let t = Instant::now();
    line(1, "oracle equivalence", t, c1());
    let t = Instant::now();
    line(2, "Hardy bound", t, c2());
    let t = Instant::now();
    line(3, "scaling covariance", t, c3());
    let t = Instant::now();
    line(4, "support disjointness", t, c4());
    let t = Instant::now();
    let spectra = build_radial_grid(1024, 2.4).and_then(|g| {
        Ok((HamiltonianSpectrum::new(&interacting(), &g)?, HamiltonianSpectrum::new(&PotentialSpec::Zero, &g)?))
    });
    match spectra {
        Ok((hi, hf)) => {
            let (m, l) = c56(&hi, &hf);
            line(5, "reverse and quantitative Mourre", t, m);
            let t = Instant::now();
            line(6, "dyadic localization", t, l);
        }
        Err(e) => {
            line(5, "reverse and quantitative Mourre", t, Err(e.to_string()));
            line(6, "dyadic localization", t, Err(e.to_string()));
        }
    }
    let t = Instant::now();
    line(7, "kernel decay fits", t, c7());
    let t = Instant::now();
    line(8, "commutator expansion", t, c8());
    let t = Instant::now();
    line(9, "propagation estimates", t, c9());
    let t = Instant::now();
    line(10, "maximal velocity", t, c10());
    let t = Instant::now();
    line(11, "minimal velocity", t, c11());
    let t = Instant::now();
    line(12, "determinism and exit codes", t, c12());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
