//! Time integrals of the shell-localized propagation observables and their Cauchy tails.

use halfwave::dynamics::StateSpec;
use halfwave::experiments::{run_propagation_estimate, ExperimentConfig};

fn main() -> halfwave::Result<()> {
    let mut cfg = ExperimentConfig::new(1023, 1.0);
    cfg.state = StateSpec::gaussian(100.0, 30.0, 0.1);
    cfg.cutoffs.shells = Some(vec![2]);
    cfg.time.dt = 0.05;
    let report = run_propagation_estimate(&cfg)?;
    for acc in &report.integrals {
        let tails: Vec<String> = acc.tails.iter().map(|(t, v)| format!("{t:.0}:{v:.2e}")).collect();
        println!("{} (n={:?}): total {:.4e}; tails {}", acc.tag, acc.shell, acc.total(), tails.join(" "));
    }
    for c in &report.certificates {
        println!("{} {}", c.id, if c.pass { "PASS" } else { "FAIL" });
    }
    Ok(())
}
