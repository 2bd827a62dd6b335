//! Writes the calibrated experiment configurations as TOML files, ready for the CLI:
//! `cargo run --example configurations -- configs` then
//! `halfwave --config configs/maxvel-free.toml --out out/maxvel maxvel`.

use std::path::PathBuf;

use halfwave::dynamics::StateSpec;
use halfwave::experiments::ExperimentConfig;
use halfwave::operators::PotentialSpec;

fn configurations() -> Vec<(&'static str, ExperimentConfig)> {
    let interacting = PotentialSpec::soft_decay(-0.3, 3.0);

    let mut certify = ExperimentConfig::new(1024, 2.4);
    certify.potential = interacting.clone();

    let mut simulate = ExperimentConfig::new(1023, 0.5);
    simulate.potential = interacting.clone();
    simulate.state = StateSpec::gaussian(30.0, 5.0, 1.0);
    simulate.time.t_end = 256.0;
    simulate.time.dt = 0.02;

    let mut oracle = ExperimentConfig::new(512, 0.2);
    oracle.potential = interacting.clone();
    oracle.state = StateSpec::gaussian(6.0, 2.0, 1.5);
    oracle.time.t_end = 10.0;
    oracle.time.dt = 1e-3;
    oracle.tolerances.agreement = 1e-6;

    let propagation = |v: PotentialSpec| {
        let mut c = ExperimentConfig::new(1023, 1.0);
        c.potential = v;
        c.state = StateSpec::gaussian(100.0, 30.0, 0.1);
        c.cutoffs.shells = Some(vec![2, 3]);
        c.time.dt = 0.05;
        c
    };

    let maxvel = |v: PotentialSpec| {
        let mut c = ExperimentConfig::new(512, 0.75);
        if !v.is_zero() {
            c.tolerances.decay_level = Some(5e-3);
        }
        c.potential = v;
        c.state = StateSpec::gaussian(20.0, 3.0, 0.75).with_window(0.3, 1.2);
        c.cutoffs.r = 1.1;
        c.cutoffs.a = 1.25;
        c.time.t_end = 256.0;
        c.time.dt = 0.01;
        c
    };

    let mut minvel = ExperimentConfig::new(1023, 0.8);
    minvel.potential = interacting.clone();
    minvel.state = StateSpec::gaussian(60.0, 10.0, 0.25);
    minvel.cutoffs.shells = Some(vec![0, 1]);
    minvel.time.dt = 0.02;

    vec![
        ("certify", certify),
        ("simulate", simulate),
        ("oracle-compare", oracle),
        ("propagation-free", propagation(PotentialSpec::Zero)),
        ("propagation-interacting", propagation(interacting.clone())),
        ("maxvel-free", maxvel(PotentialSpec::Zero)),
        ("maxvel-interacting", maxvel(interacting)),
        ("minvel", minvel),
    ]
}

fn main() -> halfwave::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "configs".into()));
    std::fs::create_dir_all(&dir)?;
    for (name, cfg) in configurations() {
        cfg.validate()?;
        let path = dir.join(format!("{name}.toml"));
        std::fs::write(&path, cfg.to_toml_string()?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
