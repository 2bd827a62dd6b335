//! Static inequalities that do not involve dyadic shells: the Hardy-type bound for
//! `r^{−1}|p|^{−1}`, the radial identity for `r²(−Δ)`, scaling covariance of `|p|`
//! under dilations, and the mutual domination of `H` and `|p|`.

use std::f64::consts::LN_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::certificate::BoundCertificate;
use super::dense::{momentum_power, symmetric_extremes, HamiltonianSpectrum};
use crate::error::{Error, Result};
use crate::grid::{refine_spectrally, RadialGrid, WaveFunction, C64};
use crate::linalg::random_start;
use crate::operators::{apply_fractional_momentum, apply_generator_a, dilate_onto, PotentialSpec};
use crate::oracle::{largest_singular_value, multiplier_matrix, DenseMatrix, ORACLE_MAX_N};

/// The bound asserted for `‖r^{−1}|p|^{−1}‖`.
pub const HARDY_CONSTANT: f64 = 2.0;

fn inverse_hardy_ratio(psi: &WaveFunction) -> f64 {
    let grid = psi.grid();
    let v = momentum_power(grid, -1.0, psi.values());
    let w: f64 = v
        .iter()
        .enumerate()
        .map(|(j, z)| z.norm_sqr() / grid.node(j).powi(2))
        .sum::<f64>()
        * grid.spacing();
    w.sqrt() / psi.norm()
}

/// `‖r^{−1}|p|^{−1}ψ‖ / ‖ψ‖` on `samples` random states and as a dense operator norm;
/// certifies both are at most `2·(1 + 10⁻²)`.
pub fn check_hardy(grid: &Arc<RadialGrid>, samples: usize, seed: u64) -> Result<BoundCertificate> {
    let mut cert = BoundCertificate::new("hardy-inverse-momentum", "‖r⁻¹|p|⁻¹ψ‖ ≤ 2‖ψ‖")
        .param("n_points", grid.n_points() as f64)
        .param("spacing", grid.spacing())
        .param("samples", samples as f64);
    let limit = HARDY_CONSTANT * (1.0 + 1e-2);

    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let ratio = inverse_hardy_ratio(&random_start(grid, seed.wrapping_add(i as u64)));
        worst = worst.max(ratio);
        cert.record("random-ratio", i as f64, ratio);
    }
    cert.check("random-state maximum", worst, format!("≤ {limit}"), worst <= limit);

    let mode = WaveFunction::sine_mode(grid, 0);
    let mode_ratio = inverse_hardy_ratio(&mode);
    cert.record("lowest-mode-ratio", grid.momentum(0), mode_ratio);
    cert.check("lowest sine mode", mode_ratio, format!("≤ {HARDY_CONSTANT}"), mode_ratio <= HARDY_CONSTANT);

    let measured = if grid.n_points() <= ORACLE_MAX_N {
        let mut m = multiplier_matrix(grid, |k| 1.0 / k);
        for j in 0..grid.n_points() {
            m.row_mut(j).scale_mut(1.0 / grid.node(j));
        }
        let s = largest_singular_value(&DenseMatrix::Real(m));
        cert.record("dense-norm", grid.n_points() as f64, s);
        cert.check("dense operator norm", s, format!("≤ {limit}"), s <= limit);
        cert.note("continuum sharp constant is π/2; the dense value is reported alongside the asserted 2");
        s
    } else {
        cert.note("grid above the dense cap: only random-state ratios measured");
        worst
    };
    cert.measured = measured;
    Ok(cert)
}

/// The candidate `(c₁, c₀)` pairs in `r²(−Δ) = A² + c₁·iA + c₀` (zero angular momentum).
pub const RADIAL_IDENTITY_CANDIDATES: [(f64, f64); 4] = [(-2.0, -0.75), (2.0, -0.75), (2.0, -3.0), (-2.0, -3.0)];

/// Default smooth probes `r e^{−r²/2}` and `r³ e^{−r²/2}` (odd, hence band-limited
/// under the sine basis).
pub fn radial_identity_probes(grid: &Arc<RadialGrid>) -> Vec<WaveFunction> {
    vec![
        WaveFunction::from_real_fn(grid, |r| r * (-r * r / 2.0).exp()),
        WaveFunction::from_real_fn(grid, |r| r.powi(3) * (-r * r / 2.0).exp()),
    ]
}

/// Residuals `‖r²(−Δ)u − (A² + c₁ iA + c₀)u‖ / ‖r²(−Δ)u‖` for each candidate pair on
/// each probe, as `[pair][probe]`.
pub fn radial_identity_residuals(probes: &[WaveFunction]) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![Vec::new(); RADIAL_IDENTITY_CANDIDATES.len()];
    for u in probes {
        let lap = apply_fractional_momentum(u, 2.0)?.multiply_by(|r| r * r);
        let au = apply_generator_a(u);
        let aau = apply_generator_a(&au);
        for (i, (c1, c0)) in RADIAL_IDENTITY_CANDIDATES.iter().enumerate() {
            let rhs = aau.axpy(C64::new(0.0, *c1), &au)?.axpy(C64::new(*c0, 0.0), u)?;
            out[i].push(lap.distance(&rhs)? / lap.norm());
        }
    }
    Ok(out)
}

/// Determines which sign/constant pair the discrete operators satisfy: exactly one pair
/// must reach relative residual `≤ 10⁻⁶` on every probe while all others stay `≥ 10⁻¹`.
/// The winner is stored in the parameters `c1`, `c0`.
pub fn check_radial_identity(grid: &Arc<RadialGrid>) -> Result<BoundCertificate> {
    let probes = radial_identity_probes(grid);
    for p in &probes {
        let edge = p.mass_beyond(0.9) / p.norm_sqr();
        if edge > 1e-20 {
            return Err(Error::Precondition(format!(
                "identity probes are not decayed within the box (edge mass {edge:.2e}); use L ≥ 12"
            )));
        }
    }
    let res = radial_identity_residuals(&probes)?;
    let mut cert = BoundCertificate::new("radial-identity", "r²(−Δ) = A² + c₁·iA + c₀ on the zero angular-momentum sector")
        .param("n_points", grid.n_points() as f64)
        .param("spacing", grid.spacing());
    let worst: Vec<f64> = res.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    let best: Vec<f64> = res.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    for (i, (c1, c0)) in RADIAL_IDENTITY_CANDIDATES.iter().enumerate() {
        for (j, r) in res[i].iter().enumerate() {
            cert.record(format!("residual({c1:+},{c0})"), j as f64, *r);
        }
    }
    let winners: Vec<usize> = (0..worst.len()).filter(|&i| worst[i] <= 1e-6).collect();
    cert.check("exactly one pair at ≤ 1e-6", winners.len() as f64, "= 1", winners.len() == 1);
    if let [w] = winners[..] {
        let (c1, c0) = RADIAL_IDENTITY_CANDIDATES[w];
        cert.params.insert("c1".into(), c1);
        cert.params.insert("c0".into(), c0);
        cert.measured = worst[w];
        let others = (0..best.len()).filter(|&i| i != w).map(|i| best[i]).fold(f64::INFINITY, f64::min);
        cert.check("other pairs ≥ 1e-1", others, "≥ 0.1", others >= 0.1);
        cert.note(format!("operative identity: r²(−Δ) = A² {c1:+}·iA {c0:+}"));
        if (c1, c0) != (-2.0, -0.75) {
            cert.note("differs from the stated pair (−2, −3/4): the sign of the iA term follows the convention A = −i(r∂_r + 1/2) on the reduced function");
        }
    } else {
        cert.measured = worst.iter().copied().fold(f64::INFINITY, f64::min);
    }
    Ok(cert)
}

/// `U(λ)ψ` evaluated from the ×8 spectrally refined samples of `psi`.
pub fn precise_dilation(psi: &WaveFunction, lambda: f64) -> Result<WaveFunction> {
    let grid = psi.grid();
    let fine = grid.refined(8)?;
    let src = refine_spectrally(psi, &fine)?;
    Ok(dilate_onto(&src, grid, lambda))
}

/// Band-limited interior Gaussian wave packets for covariance checks: centers in
/// `[0.15L, 0.3L]`, widths in `[0.015L, 0.03L]`, carrier momenta in `[0.04, 0.16]·k_max`.
pub fn interior_probes(grid: &Arc<RadialGrid>, count: usize, seed: u64) -> Vec<WaveFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.extent();
    let km = grid.k_max();
    (0..count)
        .map(|_| {
            let c = l * rng.gen_range(0.15..0.3);
            let s = l * rng.gen_range(0.015..0.03);
            let k = km * rng.gen_range(0.04..0.16);
            WaveFunction::from_fn(grid, |r| {
                let x = (r - c) / s;
                C64::from_polar((-x * x / 2.0).exp(), k * r)
            })
        })
        .collect()
}

/// `‖U(λ)|p|U(−λ)ψ − e^{−λ}|p|ψ‖ / ‖|p|ψ‖` over probes and `λ` values; certifies
/// `≤ tol` (default use: `10⁻⁵`).
pub fn check_scaling_covariance(probes: &[WaveFunction], lambdas: &[f64], tol: f64) -> Result<BoundCertificate> {
    let mut cert = BoundCertificate::new("scaling-covariance", "U(λ)|p|U(−λ) = e^{−λ}|p|").param("tolerance", tol);
    let mut worst: f64 = 0.0;
    for (i, psi) in probes.iter().enumerate() {
        let p = apply_fractional_momentum(psi, 1.0)?;
        for &l in lambdas {
            let a = precise_dilation(psi, -l)?;
            let b = apply_fractional_momentum(&a, 1.0)?;
            let c = precise_dilation(&b, l)?;
            let rel = c.distance(&p.scaled_real((-l).exp()))? / p.norm();
            worst = worst.max(rel);
            cert.record(format!("lambda={l:.6}"), i as f64, rel);
        }
    }
    cert.measured = worst;
    cert.check("worst relative defect", worst, format!("≤ {tol:e}"), worst <= tol);
    Ok(cert)
}

/// The `λ` values used by the covariance acceptance check.
pub fn covariance_lambdas() -> [f64; 4] {
    [0.2, -0.2, LN_2, -LN_2]
}

/// Constants of `H ≥ m|p|` and `|p| ≥ δH` on the continuous subspace, from the dense
/// generalized eigenproblem. Bound states (non-positive eigenvalues of `H`) restrict the
/// check to their orthogonal complement and flag the certificate.
pub fn check_mutual_domination(v: &PotentialSpec, grid: &Arc<RadialGrid>) -> Result<BoundCertificate> {
    let hs = HamiltonianSpectrum::new(v, grid)?;
    let cont = hs.select(|l| l > 0.0);
    let bound_states = hs.n() - cont.len();
    let q = hs.basis(&cont);
    let p = multiplier_matrix(grid, |k| k);
    let g = q.transpose() * (&p * &q);
    let c = cont.len();
    let scale: Vec<f64> = cont.iter().map(|&j| hs.values[j].powf(-0.5)).collect();
    let m = DMatrix::from_fn(c, c, |i, j| scale[i] * g[(i, j)] * scale[j]);
    // Generalized eigenvalues of (|p|, H) are the eigenvalues of H^{-1/2}|p|H^{-1/2}.
    let (mu_max, mu_min) = symmetric_extremes(&m);
    let m_const = 1.0 / mu_max;
    let delta = mu_min;
    let mut cert = BoundCertificate::new("mutual-domination", "m|p| ≤ H and δH ≤ |p| on the continuous subspace")
        .param("n_points", grid.n_points() as f64)
        .param("spacing", grid.spacing())
        .param("bound_states", bound_states as f64);
    cert.record("m", 0.0, m_const);
    cert.record("delta", 0.0, delta);
    cert.measured = m_const;
    cert.check("m > 0", m_const, "> 0", m_const > 0.0);
    cert.check("δ > 0", delta, "> 0", delta > 0.0);
    if bound_states > 0 {
        cert.flagged = true;
        cert.note(format!("{bound_states} non-positive eigenvalue(s) of H: checked on their orthogonal complement"));
    }
    if delta > 1.0 + 1e-12 {
        cert.note("δ > 1: for attractive V, H ≤ |p| forces the |p| ≥ δH constant above one");
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_radial_grid;

    #[test]
    fn free_domination_constants_are_one() {
        let g = build_radial_grid(96, 0.8).unwrap();
        let c = check_mutual_domination(&PotentialSpec::Zero, &g).unwrap();
        assert!((c.series("m")[0].1 - 1.0).abs() < 1e-10);
        assert!((c.series("delta")[0].1 - 1.0).abs() < 1e-10);
        assert!(c.pass && !c.flagged);
    }

    #[test]
    fn identity_selects_a_single_pair() {
        let g = build_radial_grid(255, 0.06).unwrap();
        let c = check_radial_identity(&g).unwrap();
        assert!(c.pass, "{:?}", c.checks);
        assert_eq!(c.params["c1"], 2.0);
        assert_eq!(c.params["c0"], -0.75);
    }
}
