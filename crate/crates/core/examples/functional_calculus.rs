//! Dyadic shells in energy and in the dilation generator: a smooth partition of unity,
//! `E_n(H)ψ` by Chebyshev filtering, and `F(A/s)ψ` by the Mellin transform.

use halfwave::funcalc::{apply_function_of_a, apply_function_of_h, make_dyadic_partition, SmoothCutoff};
use halfwave::operators::PotentialSpec;
use halfwave::{build_radial_grid, WaveFunction, C64};

fn main() -> halfwave::Result<()> {
    let grid = build_radial_grid(1024, 0.5)?;
    let partition = make_dyadic_partition(4, 0.25, None)?;
    for l in [0.05, 0.2, 0.7] {
        let total: f64 = (0..=4).filter_map(|n| partition.shell(n)).map(|s| s.profile_sq(l)).sum::<f64>()
            + partition.tail_sq(l);
        println!("Σ E_n²({l}) + tail = {total:.12}");
    }

    let psi = WaveFunction::from_fn(&grid, |r| C64::from_polar((-(r - 150.0).powi(2) / 800.0).exp(), 0.3 * r))
        .normalized()?;
    let v = PotentialSpec::soft_decay(-0.3, 3.0);
    if let Some(shell) = partition.shell(2) {
        let (e_psi, cert) = apply_function_of_h(&|l| shell.profile(l), &v, &psi, 1e-7)?;
        println!(
            "‖E_2(H)ψ‖² = {:.6} (Chebyshev degree {}, error {:.1e})",
            e_psi.norm_sqr(),
            cert.degree,
            cert.measured_error
        );
    }

    let step = SmoothCutoff::step_up(1.0, 0.5)?;
    for s in [20.0, 40.0, 80.0] {
        let out = apply_function_of_a(&step, s, &psi)?;
        println!(
            "‖F(A/{s})ψ‖² = {:.6} (resampling error {:.1e}, exterior mass {:.1e})",
            out.state.norm_sqr(),
            out.resampling_error,
            out.exterior_mass
        );
    }
    Ok(())
}
