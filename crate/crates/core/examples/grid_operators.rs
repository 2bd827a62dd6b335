//! Builds a radial grid, checks that sine modes diagonalize `|p|`, applies `H` and the
//! dilation generator `A`, and measures the symmetry defect of `A`.

use halfwave::operators::{apply_fractional_momentum, apply_generator_a, apply_hamiltonian, PotentialSpec};
use halfwave::{build_radial_grid, WaveFunction, C64};

fn main() -> halfwave::Result<()> {
    let grid = build_radial_grid(256, 0.5)?;
    println!("N={} h={} L={} Δk={:.5}", grid.n_points(), grid.spacing(), grid.extent(), grid.delta_k());

    let m = 17;
    let mode = WaveFunction::sine_mode(&grid, m);
    let p_mode = apply_fractional_momentum(&mode, 1.0)?;
    let defect = p_mode.sub(&mode.scaled_real(grid.momentum(m)))?.norm();
    println!("‖|p|φ_m − k_m φ_m‖ = {defect:.2e} (k_m = {:.5})", grid.momentum(m));

    let psi = WaveFunction::from_fn(&grid, |r| C64::new((-(r - 40.0).powi(2) / 50.0).exp(), 0.0)).normalized()?;
    let v = PotentialSpec::soft_decay(-0.3, 3.0);
    let h_psi = apply_hamiltonian(&psi, &v)?;
    println!("⟨ψ,Hψ⟩ = {:.6}", psi.inner(&h_psi)?.re);

    let phi = WaveFunction::from_fn(&grid, |r| C64::new(0.0, (-(r - 60.0).powi(2) / 80.0).exp())).normalized()?;
    let lhs = psi.inner(&apply_generator_a(&phi))?;
    let rhs = apply_generator_a(&psi).inner(&phi)?;
    println!("symmetry defect |⟨ψ,Aφ⟩ − ⟨Aψ,φ⟩| = {:.2e}", (lhs - rhs).norm());
    Ok(())
}
