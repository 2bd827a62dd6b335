//! Prepares an outgoing wave packet, propagates it on geometric sample times and
//! records the outgoing and incoming position observables.

use halfwave::dynamics::{geometric_times, prepare_state, propagate_to, PositionObservable, PropagationOptions, StateSpec};
use halfwave::build_radial_grid;
use halfwave::operators::PotentialSpec;

fn main() -> halfwave::Result<()> {
    let grid = build_radial_grid(1023, 0.5)?;
    let v = PotentialSpec::soft_decay(-0.3, 3.0);
    let prepared = prepare_state(&StateSpec::gaussian(30.0, 5.0, 1.0), &v, &grid)?;
    let times = geometric_times(1.0, 2f64.sqrt(), 256.0)?;
    let traj = propagate_to(&prepared.state, &v, &times, 0.02, &PropagationOptions::default())?;
    let out = PositionObservable::outgoing(1.25, 0.1)?;
    let inc = PositionObservable::incoming(0.5, 0.1)?;
    println!("{:>8} {:>12} {:>12} {:>10}", "t", "P(r>1.25t)", "P(r<0.5t)", "drift");
    for ((t, psi), drift) in traj.times.iter().zip(&traj.states).zip(&traj.norm_drift) {
        println!(
            "{t:8.2} {:12.4e} {:12.4e} {drift:10.1e}",
            out.apply(*t, psi)?.norm_sqr(),
            inc.apply(*t, psi)?.norm_sqr()
        );
    }
    println!("max boundary mass {:.2e}, flagged={}", traj.max_boundary_mass(), traj.flagged);
    Ok(())
}
