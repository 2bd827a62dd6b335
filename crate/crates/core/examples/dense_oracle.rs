//! Dense reference operators: assembles `H` for a small grid, diagonalizes it, and
//! compares exact evolution `e^{−iHt}ψ` with the split-step propagator.

use halfwave::dynamics::{propagate_to, PropagationOptions};
use halfwave::operators::PotentialSpec;
use halfwave::oracle::{assemble_dense, dense_propagate, largest_singular_value, DenseKind};
use halfwave::{build_radial_grid, WaveFunction, C64};

fn main() -> halfwave::Result<()> {
    let grid = build_radial_grid(256, 0.25)?;
    let v = PotentialSpec::soft_decay(-0.3, 3.0);
    let h = assemble_dense(DenseKind::Hamiltonian, &v, &grid)?;
    let eig = h.eigen()?;
    let values = eig.values();
    println!("spectrum of H: [{:.5}, {:.5}]", values.min(), values.max());
    let a = assemble_dense(DenseKind::GeneratorA, &v, &grid)?;
    println!("‖A‖ = {:.3}, hermiticity defect {:.1e}", largest_singular_value(a.matrix()), a.matrix().hermiticity_defect());

    let psi0 = WaveFunction::from_fn(&grid, |r| C64::from_polar((-(r - 10.0).powi(2) / 8.0).exp(), 1.5 * r)).normalized()?;
    let exact = dense_propagate(&h, &psi0, 5.0)?;
    for dt in [4e-3, 2e-3, 1e-3] {
        let traj = propagate_to(&psi0, &v, &[5.0], dt, &PropagationOptions::default())?;
        println!("dt={dt:e}: ‖ψ_dt(5) − e^(−5iH)ψ₀‖ = {:.3e}", traj.states[0].distance(&exact)?);
    }
    Ok(())
}
