//! Runs the static-estimate battery (Hardy, scaling covariance, domination, Mourre,
//! localization, disjointness, kernel bounds) on a small grid and prints each verdict.

use halfwave::experiments::{run_certify, ExperimentConfig};
use halfwave::operators::PotentialSpec;

fn main() -> halfwave::Result<()> {
    let mut cfg = ExperimentConfig::new(512, 2.0);
    cfg.potential = PotentialSpec::soft_decay(-0.3, 3.0);
    let report = run_certify(&cfg)?;
    for c in &report.certificates {
        println!("{:<34} {}  measured={:.4e}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.measured);
        for ch in c.checks.iter().filter(|ch| !ch.pass) {
            println!("    {} = {:.3e} (want {})", ch.name, ch.value, ch.envelope);
        }
    }
    Ok(())
}
