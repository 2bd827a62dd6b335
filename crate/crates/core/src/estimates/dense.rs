//! Dense spectral data shared by the certificate battery: the eigendecomposition of
//! `H` and of the discrete generator `A`, and matrix-free norms of operator chains
//! built from them.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use rayon::prelude::*;

use crate::grid::{RadialGrid, WaveFunction, C64};
use crate::linalg::lanczos_extremes;
use crate::operators::{apply_generator_a, Hamiltonian, PotentialSpec};
use crate::oracle::{assemble_dense, DenseKind, Eigen};

/// Shells used by the dense battery must have their lower edge above this many `Δk`.
/// Smaller than the propagation default because dense grids are capped at `N ≤ 2048`.
pub const DENSE_RESOLUTION_FACTOR: f64 = 2.5;

/// A vector map `x ↦ Mx` on sample vectors.
pub type VecMap<'a> = dyn Fn(&[C64]) -> Vec<C64> + Sync + 'a;

fn split(x: &[C64]) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_iterator(x.len(), x.iter().map(|z| z.re)),
        DVector::from_iterator(x.len(), x.iter().map(|z| z.im)),
    )
}

/// Eigendecomposition `H = Q Λ Qᵀ` of the dense Hamiltonian.
pub struct HamiltonianSpectrum {
    pub grid: Arc<RadialGrid>,
    pub potential: PotentialSpec,
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl HamiltonianSpectrum {
    pub fn new(v: &PotentialSpec, grid: &Arc<RadialGrid>) -> Result<Self> {
        let op = assemble_dense(DenseKind::Hamiltonian, v, grid)?;
        let (values, vectors) = match op.eigen()? {
            Eigen::Real { values, vectors } => (values.iter().copied().collect(), vectors.clone()),
            Eigen::Complex { .. } => return Err(Error::Numerical("dense H should be real symmetric".into())),
        };
        Ok(Self {
            grid: Arc::clone(grid),
            potential: v.clone(),
            values,
            vectors,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `f(H) x`.
    pub fn apply_fn(&self, f: &dyn Fn(f64) -> f64, x: &[C64]) -> Vec<C64> {
        let (re, im) = split(x);
        let mut cr = self.vectors.tr_mul(&re);
        let mut ci = self.vectors.tr_mul(&im);
        for (j, l) in self.values.iter().enumerate() {
            let g = f(*l);
            cr[j] *= g;
            ci[j] *= g;
        }
        let yr = &self.vectors * cr;
        let yi = &self.vectors * ci;
        yr.iter().zip(yi.iter()).map(|(a, b)| C64::new(*a, *b)).collect()
    }

    /// `g(H) x` for a complex-valued `g`, e.g. `e^{−iHt}`.
    pub fn apply_complex_fn(&self, g: &dyn Fn(f64) -> C64, x: &[C64]) -> Vec<C64> {
        let (re, im) = split(x);
        let cr = self.vectors.tr_mul(&re);
        let ci = self.vectors.tr_mul(&im);
        let mut yr = DVector::zeros(self.n());
        let mut yi = DVector::zeros(self.n());
        for (j, l) in self.values.iter().enumerate() {
            let z = g(*l) * C64::new(cr[j], ci[j]);
            yr[j] = z.re;
            yi[j] = z.im;
        }
        let yr = &self.vectors * yr;
        let yi = &self.vectors * yi;
        yr.iter().zip(yi.iter()).map(|(a, b)| C64::new(*a, *b)).collect()
    }

    /// `max_j ‖H q_j − λ_j q_j‖` with `H` applied matrix-free.
    pub fn residual(&self) -> f64 {
        let h = Hamiltonian::new(&self.grid, &self.potential);
        (0..self.n())
            .into_par_iter()
            .map(|j| {
                let q: Vec<C64> = self.vectors.column(j).iter().map(|x| C64::new(*x, 0.0)).collect();
                let mut out = vec![C64::new(0.0, 0.0); q.len()];
                h.apply_raw(&q, &mut out);
                out.iter().zip(&q).map(|(a, b)| (a - b * self.values[j]).norm_sqr()).sum::<f64>().sqrt()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Indices of eigenpairs with `pred(λ)`.
    pub fn select(&self, pred: impl Fn(f64) -> bool) -> Vec<usize> {
        (0..self.n()).filter(|&j| pred(self.values[j])).collect()
    }

    /// The `N × r` matrix of the selected eigenvectors.
    pub fn basis(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), idx.len(), |i, c| self.vectors[(i, idx[c])])
    }

    pub fn lowest(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Eigendecomposition `A = W a W†` of the discrete dilation generator.
pub struct GeneratorSpectrum {
    pub values: Vec<f64>,
    vectors: DMatrix<C64>,
    adjoint: DMatrix<C64>,
}

impl GeneratorSpectrum {
    pub fn new(grid: &Arc<RadialGrid>) -> Result<Self> {
        let op = assemble_dense(DenseKind::GeneratorA, &PotentialSpec::Zero, grid)?;
        let (values, vectors) = match op.eigen()? {
            Eigen::Complex { values, vectors } => (values.iter().copied().collect(), vectors.clone()),
            Eigen::Real { .. } => return Err(Error::Numerical("dense A should be complex Hermitian".into())),
        };
        let adjoint = vectors.adjoint();
        Ok(Self {
            values,
            vectors,
            adjoint,
        })
    }

    /// `f(A) x`.
    pub fn apply_fn(&self, f: &dyn Fn(f64) -> f64, x: &[C64]) -> Vec<C64> {
        let mut c = &self.adjoint * DVector::from_column_slice(x);
        for (j, a) in self.values.iter().enumerate() {
            c[j] *= f(*a);
        }
        (&self.vectors * c).iter().copied().collect()
    }

    /// `max_j ‖A w_j − a_j w_j‖` with `A` applied matrix-free.
    pub fn residual(&self, grid: &Arc<RadialGrid>) -> f64 {
        (0..self.values.len())
            .into_par_iter()
            .map(|j| {
                let w = WaveFunction::from_parts(grid, self.vectors.column(j).iter().copied().collect());
                let aw = apply_generator_a(&w);
                aw.values()
                    .iter()
                    .zip(w.values())
                    .map(|(a, b)| (a - b * self.values[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// `k^α` multiplier through the sine transform (identical to the dense `S diag S`).
pub fn momentum_power(grid: &RadialGrid, alpha: f64, x: &[C64]) -> Vec<C64> {
    let t = grid.transform();
    let mut c = t.apply(x);
    for (m, z) in c.iter_mut().enumerate() {
        *z *= grid.momentum(m).powf(alpha);
    }
    t.apply_in_place(&mut c);
    c
}

/// Fourier multiplier `g(k)` through the sine transform.
pub fn momentum_function(grid: &RadialGrid, g: &dyn Fn(f64) -> f64, x: &[C64]) -> Vec<C64> {
    let t = grid.transform();
    let mut c = t.apply(x);
    for (m, z) in c.iter_mut().enumerate() {
        *z *= g(grid.momentum(m));
    }
    t.apply_in_place(&mut c);
    c
}

/// Multiplication by `w(r_j)`.
pub fn position_function(grid: &RadialGrid, w: &dyn Fn(f64) -> f64, x: &[C64]) -> Vec<C64> {
    x.iter().enumerate().map(|(j, z)| z * w(grid.node(j))).collect()
}

/// Result of a matrix-free norm computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainNorm {
    pub value: f64,
    pub steps: usize,
    pub converged: bool,
}

/// `‖M‖` from the top Lanczos Ritz value of `M†M`, with a deterministic random start.
pub fn gram_norm(n: usize, forward: &VecMap<'_>, adjoint: &VecMap<'_>, seed: u64) -> ChainNorm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Vec<C64> = (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let gram = |x: &[C64]| adjoint(&forward(x));
    let b = lanczos_extremes(&gram, &start, 300.min(n), 1e-12);
    ChainNorm {
        value: b.max.max(0.0).sqrt(),
        steps: b.steps,
        converged: b.converged,
    }
}

/// `‖X_1 X_2 ⋯ X_k‖` for self-adjoint factors `X_i` (applied right to left).
pub fn self_adjoint_chain_norm(n: usize, factors: &[&VecMap<'_>], seed: u64) -> ChainNorm {
    let forward = |x: &[C64]| {
        let mut y = x.to_vec();
        for f in factors.iter().rev() {
            y = f(&y);
        }
        y
    };
    let adjoint = |x: &[C64]| {
        let mut y = x.to_vec();
        for f in factors.iter() {
            y = f(&y);
        }
        y
    };
    gram_norm(n, &forward, &adjoint, seed)
}

/// Largest eigenvalue magnitude and the smallest eigenvalue of a small real symmetric
/// matrix.
pub fn symmetric_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let sym = (m + m.transpose()) * 0.5;
    let ev = sym.symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
    (hi, lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_radial_grid;

    #[test]
    fn chain_norm_of_diagonal_multiplier() {
        let g = build_radial_grid(128, 0.5).unwrap();
        let gm = Arc::clone(&g);
        let w = move |x: &[C64]| position_function(&gm, &|r| 1.0 / (1.0 + r), x);
        let c = self_adjoint_chain_norm(128, &[&w], 3);
        assert!((c.value - 1.0 / 1.5).abs() < 1e-9, "{}", c.value);
    }

    #[test]
    fn spectra_reproduce_operators() {
        let g = build_radial_grid(64, 0.5).unwrap();
        let h = HamiltonianSpectrum::new(&PotentialSpec::soft_decay(-0.3, 3.0), &g).unwrap();
        let x: Vec<C64> = (0..64).map(|j| C64::new((j as f64 * 0.3).sin(), 0.1 * j as f64)).collect();
        let hx = h.apply_fn(&|l| l, &x);
        let direct: Vec<C64> = momentum_power(&g, 1.0, &x)
            .iter()
            .enumerate()
            .map(|(j, z)| z + x[j] * h.potential.value(g.node(j)))
            .collect();
        let err: f64 = hx.iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        let a = GeneratorSpectrum::new(&g).unwrap();
        let ax = a.apply_fn(&|l| l, &x);
        let wf = crate::grid::WaveFunction::new(Arc::clone(&g), x.clone()).unwrap();
        let direct = crate::operators::apply_generator_a(&wf);
        let err: f64 = ax.iter().zip(direct.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }
}
