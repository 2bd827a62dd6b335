//! Iterative linear algebra on sample vectors: power iteration for operator norms,
//! Lanczos for extremal eigenvalues and Krylov exponentials.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{WaveFunction, C64};
use crate::operators::LinearMap;

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn nrm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator-norm estimate from power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Stagnation tolerance and iteration cap for matrix-free norm estimates.
pub const POWER_TOL: f64 = 1e-6;
pub const POWER_MAX_ITER: usize = 10_000;

/// Deterministic random start vector.
pub fn random_start(grid: &std::sync::Arc<crate::grid::RadialGrid>, seed: u64) -> WaveFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.n_points())
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    WaveFunction::from_parts(grid, values)
}

/// `‖M‖` by power iteration on `M* M`, stopping when the estimate changes by less than
/// `tol` (relative) between iterations.
pub fn power_iteration_norm(map: &dyn LinearMap, start: &WaveFunction, tol: f64, max_iter: usize) -> Result<NormEstimate> {
    let mut x = start.normalized()?;
    let mut prev = 0.0f64;
    for it in 1..=max_iter {
        let y = map.apply(&x)?;
        let sigma = y.norm();
        if sigma == 0.0 {
            return Ok(NormEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        let z = map.apply_adjoint(&y)?;
        let zn = z.norm();
        if zn == 0.0 {
            return Ok(NormEstimate {
                value: sigma,
                iterations: it,
                converged: true,
            });
        }
        x = z.scaled_real(1.0 / zn);
        if it > 1 && (sigma - prev).abs() <= tol * sigma {
            return Ok(NormEstimate {
                value: sigma,
                iterations: it,
                converged: true,
            });
        }
        prev = sigma;
    }
    Ok(NormEstimate {
        value: prev,
        iterations: max_iter,
        converged: false,
    })
}

/// Extremal Ritz values of a Hermitian operator from a Lanczos run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanczosBounds {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub converged: bool,
}

/// Lanczos with full reorthogonalization; stops when both extremal Ritz values change by
/// less than `tol` (relative to the spectral spread) or after `max_steps`.
pub fn lanczos_extremes(
    apply: &dyn Fn(&[C64]) -> Vec<C64>,
    start: &[C64],
    max_steps: usize,
    tol: f64,
) -> LanczosBounds {
    let n = start.len();
    let max_steps = max_steps.min(n).max(1);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(max_steps);
    let s0 = nrm(start);
    basis.push(start.iter().map(|z| z / s0).collect());
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = (f64::NAN, f64::NAN);
    let mut bounds = LanczosBounds {
        min: 0.0,
        max: 0.0,
        steps: 0,
        converged: false,
    };
    for j in 0..max_steps {
        let mut w = apply(&basis[j]);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = nrm(&w);
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let ev = SymmetricEigen::new(t).eigenvalues;
        let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        bounds = LanczosBounds {
            min: lo,
            max: hi,
            steps: k,
            converged: false,
        };
        let spread = (hi - lo).abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if k > 4 && ((lo - last.0).abs() < tol * spread) && ((hi - last.1).abs() < tol * spread) {
            bounds.converged = true;
            return bounds;
        }
        last = (lo, hi);
        if b < 1e-14 * spread || k == n {
            bounds.converged = true;
            return bounds;
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
    }
    bounds
}

/// `exp(−i H t) x` by a Krylov (Lanczos) approximation of dimension `m`, repeated over
/// substeps of length at most `t / substeps`.
pub fn lanczos_expm(apply: &dyn Fn(&[C64]) -> Vec<C64>, x: &[C64], t: f64, m: usize, substeps: usize) -> Vec<C64> {
    let mut v = x.to_vec();
    let substeps = substeps.max(1);
    let dt = t / substeps as f64;
    for _ in 0..substeps {
        v = krylov_step(apply, &v, dt, m);
    }
    v
}

fn krylov_step(apply: &dyn Fn(&[C64]) -> Vec<C64>, x: &[C64], dt: f64, m: usize) -> Vec<C64> {
    let n0 = nrm(x);
    if n0 == 0.0 {
        return x.to_vec();
    }
    let mut basis: Vec<Vec<C64>> = vec![x.iter().map(|z| z / n0).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for j in 0..m {
        let mut w = apply(&basis[j]);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for q in &basis {
            let c = dot(q, &w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        let b = nrm(&w);
        if b < 1e-13 || j + 1 == m {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
    }
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    // exp(−i T dt) e_1 = Q exp(−i Λ dt) Qᵀ e_1.
    let mut coeff = DVector::<C64>::zeros(k);
    for i in 0..k {
        let mut s = C64::new(0.0, 0.0);
        for l in 0..k {
            let ph = C64::from_polar(1.0, -eig.eigenvalues[l] * dt);
            s += ph * eig.eigenvectors[(i, l)] * eig.eigenvectors[(0, l)];
        }
        coeff[i] = s * n0;
    }
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    for (i, q) in basis.iter().enumerate().take(k) {
        for (o, qi) in out.iter_mut().zip(q) {
            *o += coeff[i] * qi;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_apply(d: Vec<f64>) -> impl Fn(&[C64]) -> Vec<C64> {
        move |x: &[C64]| x.iter().zip(&d).map(|(a, b)| a * b).collect()
    }

    #[test]
    fn lanczos_finds_extremes_of_diagonal() {
        let d: Vec<f64> = (0..200).map(|i| 1.0 + (i as f64) * 0.01).collect();
        let f = diag_apply(d);
        let start: Vec<C64> = (0..200).map(|i| C64::new(1.0 + (i % 7) as f64, 0.0)).collect();
        let b = lanczos_extremes(&f, &start, 200, 1e-12);
        assert!((b.min - 1.0).abs() < 1e-8 && (b.max - 2.99).abs() < 1e-8);
    }

    #[test]
    fn krylov_exponential_of_diagonal() {
        let d: Vec<f64> = (0..50).map(|i| (i as f64) * 0.1).collect();
        let f = diag_apply(d.clone());
        let x: Vec<C64> = (0..50).map(|i| C64::new(1.0 / (1.0 + i as f64), 0.0)).collect();
        let y = lanczos_expm(&f, &x, 3.0, 30, 4);
        for i in 0..50 {
            let want = x[i] * C64::from_polar(1.0, -d[i] * 3.0);
            assert!((y[i] - want).norm() < 1e-10);
        }
    }
}
