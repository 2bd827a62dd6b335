//! Decay of the incoming probability `⟨ψ(t), F(r/t < b)ψ(t)⟩` for a bound-state-free
//! potential, and the refusal of a potential that binds.

use halfwave::dynamics::StateSpec;
use halfwave::experiments::{run_minimal_velocity, ExperimentConfig};
use halfwave::operators::PotentialSpec;

fn main() -> halfwave::Result<()> {
    let mut cfg = ExperimentConfig::new(1023, 0.8);
    cfg.potential = PotentialSpec::soft_decay(-0.3, 3.0);
    cfg.state = StateSpec::gaussian(60.0, 10.0, 0.25);
    cfg.cutoffs.shells = Some(vec![0, 1]);
    cfg.time.dt = 0.02;
    let report = run_minimal_velocity(&cfg)?;
    if let Some(m) = report.integral("M(T)", None) {
        for (t, tail) in &m.tails {
            println!("M(2T) − M(T) at T={t:.0}: {tail:.3e}");
        }
    }
    for c in &report.certificates {
        println!("{} {}", c.id, if c.pass { "PASS" } else { "FAIL" });
    }

    let mut binding = ExperimentConfig::new(255, 0.7);
    binding.potential = PotentialSpec::soft_decay(-20.0, 3.0);
    binding.state = StateSpec::gaussian(40.0, 5.0, 0.5);
    binding.time.t_end = 4.0;
    match run_minimal_velocity(&binding) {
        Err(e) => println!("binding potential refused: {e}"),
        Ok(_) => println!("binding potential unexpectedly accepted"),
    }
    Ok(())
}
