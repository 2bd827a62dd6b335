//! Decay of `⟨ψ(t), F(r/t > a)ψ(t)⟩` for the free flow, with the shell decomposition
//! residual compared against its error budget.

use halfwave::dynamics::StateSpec;
use halfwave::experiments::{run_maximal_velocity, ExperimentConfig};

fn main() -> halfwave::Result<()> {
    let mut cfg = ExperimentConfig::new(512, 0.75);
    cfg.state = StateSpec::gaussian(20.0, 3.0, 0.75).with_window(0.3, 1.2);
    cfg.cutoffs.r = 1.1;
    cfg.cutoffs.a = 1.25;
    cfg.time.t_end = 256.0;
    cfg.time.dt = 0.01;
    let report = run_maximal_velocity(&cfg)?;
    if let Some(p) = report.find_series("P(t,1.25)", None) {
        for (t, v) in p.times.iter().zip(&p.values).step_by(2) {
            println!("t={t:8.2}  P={v:.4e}");
        }
    }
    for c in &report.certificates {
        println!("{} {}", c.id, if c.pass { "PASS" } else { "FAIL" });
    }
    Ok(())
}
