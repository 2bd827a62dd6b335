//! The command-line contract: artifacts land in `--out`, reruns are byte-identical,
//! `report` re-emits a manifest, and exit codes follow 0/1/2/3.

use std::fs;
use std::path::Path;

use halfwave::dynamics::StateSpec;
use halfwave::experiments::cli::{has_manifest, main_with_args};
use halfwave::experiments::{read_manifest, ExperimentConfig};

fn config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(127, 0.5);
    c.seed = 5;
    c.state = StateSpec::gaussian(16.0, 2.0, 1.0);
    c.time.t_end = 4.0;
    c.time.dt = 0.02;
    c
}

fn run(dir: &Path, cfg: Option<&ExperimentConfig>, out: &str, args: &[&str]) -> i32 {
    let mut argv = vec!["halfwave".to_string(), "--out".into(), dir.join(out).display().to_string()];
    if let Some(cfg) = cfg {
        let path = dir.join(format!("{out}.toml"));
        fs::write(&path, cfg.to_toml_string().unwrap()).unwrap();
        argv.extend(["--config".into(), path.display().to_string()]);
    }
    argv.extend(args.iter().map(|s| s.to_string()));
    main_with_args(argv)
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "svg"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn simulate_is_deterministic_and_reportable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config();
    assert_eq!(run(tmp.path(), Some(&cfg), "a", &["simulate"]), 0);
    assert_eq!(run(tmp.path(), Some(&cfg), "b", &["simulate"]), 0);
    assert!(has_manifest(&tmp.path().join("a")));
    let (a, b) = (files(&tmp.path().join("a")), files(&tmp.path().join("b")));
    assert!(!a.is_empty());
    assert_eq!(a, b);

    let manifest = tmp.path().join("a").join("manifest.json");
    let m = read_manifest(&manifest).unwrap();
    assert_eq!(m.runs.len(), 1);
    assert_eq!(m.runs[0].config.as_ref(), Some(&cfg));
    assert_eq!(run(tmp.path(), None, "c", &["report", manifest.to_str().unwrap()]), 0);
    assert_eq!(files(&tmp.path().join("c")), a);
}

#[test]
fn seed_override_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), Some(&config()), "s", &["--seed", "99", "simulate"]), 0);
    let m = read_manifest(&tmp.path().join("s").join("manifest.json")).unwrap();
    assert_eq!(m.runs[0].config.as_ref().map(|c| c.seed), Some(99));
}

#[test]
fn checkpoint_is_written() {
    let tmp = tempfile::tempdir().unwrap();
    let ck = tmp.path().join("traj.ckpt");
    assert_eq!(run(tmp.path(), Some(&config()), "k", &["simulate", "--checkpoint", ck.to_str().unwrap()]), 0);
    let traj = halfwave::dynamics::read_checkpoint(&ck).unwrap();
    assert_eq!(traj.grid.n_points(), 127);
}

#[test]
fn failing_certificate_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config();
    cfg.tolerances.agreement = 1e-300;
    assert_eq!(run(tmp.path(), Some(&cfg), "f", &["oracle-compare"]), 1);
    assert!(has_manifest(&tmp.path().join("f")));
}

#[test]
fn configuration_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), None, "m", &["simulate"]), 2);
    assert_eq!(run(tmp.path(), None, "u", &["no-such-command"]), 2);
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[grid]\nn_points = 'many'\n").unwrap();
    let code = main_with_args(["halfwave", "--config", bad.to_str().unwrap(), "--out", tmp.path().join("x").to_str().unwrap(), "simulate"]);
    assert_eq!(code, 2);
    let mut b_one = config();
    b_one.cutoffs.b = 1.0;
    assert_eq!(run(tmp.path(), Some(&b_one), "b", &["minvel"]), 2);
}

#[test]
fn unreadable_manifest_is_a_runtime_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.json");
    assert_eq!(run(tmp.path(), None, "r", &["report", missing.to_str().unwrap()]), 3);
}

#[test]
fn boundary_contamination_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config();
    cfg.state = StateSpec::gaussian(50.0, 1.5, 1.0);
    cfg.time.t_end = 16.0;
    assert_eq!(run(tmp.path(), Some(&cfg), "w", &["simulate"]), 3);
}
