//! Dense reference implementations on small grids: explicit matrices for `|p|^α`,
//! `V`, `H`, `A`, exact functional calculus by eigendecomposition, and operator norms.
//!
//! Matrices are assembled from the explicit sine/cosine bases rather than from the FFT
//! path, so agreement with the matrix-free operators is a genuine cross-check.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, WaveFunction, C64};
use crate::linalg::{lanczos_extremes, random_start};
use crate::operators::PotentialSpec;

/// Largest grid accepted by the dense oracle.
pub const ORACLE_MAX_N: usize = 2048;

fn check_size(grid: &RadialGrid) -> Result<()> {
    if grid.n_points() > ORACLE_MAX_N {
        Err(Error::OracleTooLarge {
            max: ORACLE_MAX_N,
            got: grid.n_points(),
        })
    } else {
        Ok(())
    }
}

/// Orthonormal sine-basis matrix `S_{jm} = sqrt(2/(N+1)) sin(π j m / (N+1))`.
pub fn sine_matrix(n: usize) -> DMatrix<f64> {
    let s = (2.0 / (n as f64 + 1.0)).sqrt();
    DMatrix::from_fn(n, n, |j, m| s * (PI * ((j + 1) * (m + 1)) as f64 / (n as f64 + 1.0)).sin())
}

/// Cosine partner `C_{jm} = sqrt(2/(N+1)) cos(π j m / (N+1))`.
pub fn cosine_matrix(n: usize) -> DMatrix<f64> {
    let s = (2.0 / (n as f64 + 1.0)).sqrt();
    DMatrix::from_fn(n, n, |j, m| s * (PI * ((j + 1) * (m + 1)) as f64 / (n as f64 + 1.0)).cos())
}

/// `S diag(g(k_m)) S`, a Fourier multiplier as a dense matrix.
pub fn multiplier_matrix(grid: &RadialGrid, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = grid.n_points();
    let s = sine_matrix(n);
    let mut ds = s.clone();
    for m in 0..n {
        let gm = g(grid.momentum(m));
        ds.row_mut(m).scale_mut(gm);
    }
    &s * ds
}

/// Dense real or complex matrix.
#[derive(Debug, Clone)]
pub enum DenseMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

impl DenseMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            DenseMatrix::Real(m) => m.nrows(),
            DenseMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            DenseMatrix::Real(m) => m.ncols(),
            DenseMatrix::Complex(m) => m.ncols(),
        }
    }

    pub fn to_complex(&self) -> DMatrix<C64> {
        match self {
            DenseMatrix::Real(m) => m.map(|x| C64::new(x, 0.0)),
            DenseMatrix::Complex(m) => m.clone(),
        }
    }

    pub fn adjoint(&self) -> DenseMatrix {
        match self {
            DenseMatrix::Real(m) => DenseMatrix::Real(m.transpose()),
            DenseMatrix::Complex(m) => DenseMatrix::Complex(m.adjoint()),
        }
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        match (self, other) {
            (DenseMatrix::Real(a), DenseMatrix::Real(b)) => DenseMatrix::Real(a * b),
            _ => DenseMatrix::Complex(self.to_complex() * other.to_complex()),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        match (self, other) {
            (DenseMatrix::Real(a), DenseMatrix::Real(b)) => DenseMatrix::Real(a - b),
            _ => DenseMatrix::Complex(self.to_complex() - other.to_complex()),
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        match self {
            DenseMatrix::Real(m) => {
                let re = DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
                let im = DVector::from_iterator(x.len(), x.iter().map(|z| z.im));
                let (a, b) = (m * re, m * im);
                a.iter().zip(b.iter()).map(|(&p, &q)| C64::new(p, q)).collect()
            }
            DenseMatrix::Complex(m) => {
                let v = DVector::from_column_slice(x);
                (m * v).iter().copied().collect()
            }
        }
    }

    /// Largest deviation from Hermitian symmetry, `max |M − M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        match self {
            DenseMatrix::Real(m) => (m - m.transpose()).amax(),
            DenseMatrix::Complex(m) => (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        largest_singular_value(self)
    }
}

/// Largest singular value: dense SVD up to `N = 1024`, Lanczos on `M†M` beyond.
pub fn largest_singular_value(m: &DenseMatrix) -> f64 {
    let small = m.nrows().min(m.ncols()) <= 1024;
    match m {
        DenseMatrix::Real(a) if small => a.singular_values().max(),
        DenseMatrix::Complex(a) if small => a.singular_values().max(),
        _ => {
            let gram = m.adjoint().mul(m);
            let n = gram.ncols();
            let start: Vec<C64> = (0..n).map(|i| C64::new(1.0 + ((i * 7919) % 13) as f64 * 0.1, 0.3)).collect();
            let b = lanczos_extremes(&|x: &[C64]| gram.apply(x), &start, 300, 1e-13);
            b.max.max(0.0).sqrt()
        }
    }
}

/// Orthonormal eigendecomposition `M = Q diag(λ) Q†`.
#[derive(Debug, Clone)]
pub enum Eigen {
    Real { values: DVector<f64>, vectors: DMatrix<f64> },
    Complex { values: DVector<f64>, vectors: DMatrix<C64> },
}

impl Eigen {
    pub fn values(&self) -> &DVector<f64> {
        match self {
            Eigen::Real { values, .. } | Eigen::Complex { values, .. } => values,
        }
    }

    /// `Q diag(f(λ)) Q†`.
    pub fn function_matrix(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        match self {
            Eigen::Real { values, vectors } => {
                let mut scaled = vectors.clone();
                for (j, l) in values.iter().enumerate() {
                    scaled.column_mut(j).scale_mut(f(*l));
                }
                DenseMatrix::Real(scaled * vectors.transpose())
            }
            Eigen::Complex { values, vectors } => {
                let mut scaled = vectors.clone();
                for (j, l) in values.iter().enumerate() {
                    let fl = C64::new(f(*l), 0.0);
                    scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
                }
                DenseMatrix::Complex(scaled * vectors.adjoint())
            }
        }
    }

    /// `Q (g(λ) ⊙ Q† x)` without forming the matrix.
    pub fn function_apply(&self, g: impl Fn(f64) -> C64, x: &[C64]) -> Vec<C64> {
        let v = DVector::from_column_slice(x);
        match self {
            Eigen::Real { values, vectors } => {
                let q = vectors.map(|a| C64::new(a, 0.0));
                let mut c = q.transpose() * v;
                for (j, l) in values.iter().enumerate() {
                    c[j] *= g(*l);
                }
                (q * c).iter().copied().collect()
            }
            Eigen::Complex { values, vectors } => {
                let mut c = vectors.adjoint() * v;
                for (j, l) in values.iter().enumerate() {
                    c[j] *= g(*l);
                }
                (vectors * c).iter().copied().collect()
            }
        }
    }

    /// Worst residual `‖M q − λ q‖` over all pairs.
    pub fn max_residual(&self, m: &DenseMatrix) -> f64 {
        match self {
            Eigen::Real { values, vectors } => {
                let a = match m {
                    DenseMatrix::Real(a) => a.clone(),
                    DenseMatrix::Complex(_) => return f64::NAN,
                };
                let r = &a * vectors - vectors * DMatrix::from_diagonal(values);
                r.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
            }
            Eigen::Complex { values, vectors } => {
                let a = m.to_complex();
                let d = DMatrix::from_diagonal(&values.map(|x| C64::new(x, 0.0)));
                let r = &a * vectors - vectors * d;
                r.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
            }
        }
    }
}

/// Kinds of dense operators.
#[derive(Debug, Clone, PartialEq)]
pub enum DenseKind {
    Momentum(f64),
    Potential,
    Hamiltonian,
    GeneratorA,
    PositionWeight(f64),
}

/// A dense matrix bound to a grid with a lazily computed eigendecomposition.
#[derive(Debug)]
pub struct DenseOperator {
    grid: Arc<RadialGrid>,
    matrix: DenseMatrix,
    hermitian: bool,
    eig: OnceLock<Eigen>,
}

impl DenseOperator {
    pub fn from_matrix(grid: &Arc<RadialGrid>, matrix: DenseMatrix, hermitian: bool) -> Result<Self> {
        check_size(grid)?;
        if matrix.nrows() != grid.n_points() || matrix.ncols() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: matrix.nrows(),
            });
        }
        Ok(Self {
            grid: Arc::clone(grid),
            matrix,
            hermitian,
            eig: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Eigendecomposition, computed on first use and then shared.
    pub fn eigen(&self) -> Result<&Eigen> {
        if !self.hermitian {
            return Err(Error::Precondition("eigendecomposition requires a Hermitian operator".into()));
        }
        Ok(self.eig.get_or_init(|| match &self.matrix {
            DenseMatrix::Real(m) => {
                let e = SymmetricEigen::new(m.clone());
                Eigen::Real {
                    values: e.eigenvalues,
                    vectors: e.eigenvectors,
                }
            }
            DenseMatrix::Complex(m) => {
                let e = SymmetricEigen::new(m.clone());
                Eigen::Complex {
                    values: e.eigenvalues,
                    vectors: e.eigenvectors,
                }
            }
        }))
    }

    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        if !psi.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(WaveFunction::from_parts(&self.grid, self.matrix.apply(psi.values())))
    }

    /// `f(M)` through the eigendecomposition.
    pub fn function(&self, f: impl Fn(f64) -> f64) -> Result<DenseOperator> {
        let m = self.eigen()?.function_matrix(f);
        DenseOperator::from_matrix(&self.grid, m, true)
    }

    /// `f(M)ψ` without forming `f(M)`.
    pub fn function_apply(&self, f: impl Fn(f64) -> C64, psi: &WaveFunction) -> Result<WaveFunction> {
        let v = self.eigen()?.function_apply(f, psi.values());
        Ok(WaveFunction::from_parts(&self.grid, v))
    }
}

/// Assembles `|p|^α`, `V`, `H`, `A` or `⟨r⟩^s` as a dense matrix (`N ≤ 2048`).
pub fn assemble_dense(kind: DenseKind, v: &PotentialSpec, grid: &Arc<RadialGrid>) -> Result<DenseOperator> {
    check_size(grid)?;
    let n = grid.n_points();
    let matrix = match kind {
        DenseKind::Momentum(alpha) => {
            if !(-2.0..=2.0).contains(&alpha) {
                return Err(Error::Parameter(format!("momentum exponent must lie in [-2, 2], got {alpha}")));
            }
            DenseMatrix::Real(multiplier_matrix(grid, |k| k.powf(alpha)))
        }
        DenseKind::Potential => DenseMatrix::Real(DMatrix::from_diagonal(&DVector::from_vec(v.samples(grid)))),
        DenseKind::Hamiltonian => {
            let mut m = multiplier_matrix(grid, |k| k);
            for (j, vj) in v.samples(grid).into_iter().enumerate() {
                m[(j, j)] += vj;
            }
            // Remove the O(ε) asymmetry of the floating-point product.
            DenseMatrix::Real((&m + m.transpose()) * 0.5)
        }
        DenseKind::GeneratorA => {
            // D = C diag(k) S; M = −i (R D + 1/2); A = (M + M†)/2 = −(i/2)(R D − Dᵀ R).
            let s = sine_matrix(n);
            let mut c = cosine_matrix(n);
            for m in 0..n {
                c.column_mut(m).scale_mut(grid.momentum(m));
            }
            let d = c * s;
            let mut rd = d.clone();
            for j in 0..n {
                rd.row_mut(j).scale_mut(grid.node(j));
            }
            let k = &rd - rd.transpose();
            DenseMatrix::Complex(k.map(|x| C64::new(0.0, -0.5 * x)))
        }
        DenseKind::PositionWeight(s) => DenseMatrix::Real(DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            (0..n).map(|j| {
                let r = grid.node(j);
                (1.0 + r * r).powf(s / 2.0)
            }),
        ))),
    };
    DenseOperator::from_matrix(grid, matrix, true)
}

/// `N×N` diagonal matrix of `w(r_j)`.
pub fn diagonal(grid: &RadialGrid, w: impl Fn(f64) -> f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(grid.n_points(), (0..grid.n_points()).map(|j| w(grid.node(j)))))
}

/// `f(M)` for a dense Hermitian operator.
pub fn dense_function(m: &DenseOperator, f: impl Fn(f64) -> f64) -> Result<DenseOperator> {
    m.function(f)
}

/// `e^{−iHt} ψ0` through the eigendecomposition of the dense Hamiltonian.
pub fn dense_propagate(h: &DenseOperator, psi0: &WaveFunction, t: f64) -> Result<WaveFunction> {
    h.function_apply(|l| C64::from_polar(1.0, -l * t), psi0)
}

/// Operator norm of the product `M_1 M_2 ⋯ M_k` of dense factors.
pub fn operator_norm(chain: &[&DenseMatrix]) -> Result<f64> {
    let Some((first, rest)) = chain.split_first() else {
        return Err(Error::Parameter("empty operator chain".into()));
    };
    let mut prod = (*first).clone();
    for m in rest {
        if prod.ncols() != m.nrows() {
            return Err(Error::Parameter("non-conformable operator chain".into()));
        }
        prod = prod.mul(m);
    }
    Ok(largest_singular_value(&prod))
}

/// Largest eigenvalue of `|V|^{1/2} |p|^{-1} |V|^{1/2}` (dense for `N ≤ 2048`, otherwise
/// through matrix-free products).
pub fn birman_schwinger_norm(v: &PotentialSpec, grid: &RadialGrid) -> Result<f64> {
    let sq: Vec<f64> = v.samples(grid).iter().map(|x| x.abs().sqrt()).collect();
    let n = grid.n_points();
    let start = random_start(&Arc::new(RadialGrid::new(n, grid.spacing())?), 17);
    let start: Vec<C64> = start.values().iter().zip(&sq).map(|(z, w)| z * w).collect();
    if start.iter().all(|z| z.norm() == 0.0) {
        return Ok(0.0);
    }
    let bounds = if n <= ORACLE_MAX_N {
        let mut b = multiplier_matrix(grid, |k| 1.0 / k);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] *= sq[i] * sq[j];
            }
        }
        let m = DenseMatrix::Real(b);
        lanczos_extremes(&|x: &[C64]| m.apply(x), &start, 400, 1e-13)
    } else {
        let t = grid.transform();
        let apply = |x: &[C64]| {
            let mut y: Vec<C64> = x.iter().zip(&sq).map(|(a, w)| a * w).collect();
            t.apply_in_place(&mut y);
            for (m, z) in y.iter_mut().enumerate() {
                *z /= grid.momentum(m);
            }
            t.apply_in_place(&mut y);
            y.iter().zip(&sq).map(|(a, w)| a * w).collect()
        };
        lanczos_extremes(&apply, &start, 400, 1e-13)
    };
    Ok(bounds.max.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_radial_grid;

    #[test]
    fn sine_matrix_is_orthogonal_involution() {
        let s = sine_matrix(33);
        let e = (&s * &s - DMatrix::<f64>::identity(33, 33)).amax();
        assert!(e < 1e-13);
    }

    #[test]
    fn free_hamiltonian_has_momentum_spectrum() {
        let g = build_radial_grid(64, 0.7).unwrap();
        let h = assemble_dense(DenseKind::Hamiltonian, &PotentialSpec::Zero, &g).unwrap();
        let mut ev: Vec<f64> = h.eigen().unwrap().values().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (m, l) in ev.iter().enumerate() {
            assert!((l - g.momentum(m)).abs() < 1e-10);
        }
    }

    #[test]
    fn generator_matrix_is_hermitian_and_imaginary() {
        let g = build_radial_grid(48, 1.0).unwrap();
        let a = assemble_dense(DenseKind::GeneratorA, &PotentialSpec::Zero, &g).unwrap();
        assert!(a.matrix().hermiticity_defect() < 1e-10);
        if let DenseMatrix::Complex(m) = a.matrix() {
            assert!(m.iter().all(|z| z.re == 0.0));
        } else {
            panic!("A must be complex");
        }
    }

    #[test]
    fn oracle_refuses_large_grids() {
        let g = build_radial_grid(4096, 0.5).unwrap();
        assert!(matches!(
            assemble_dense(DenseKind::Potential, &PotentialSpec::Zero, &g),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn identity_chain_norm() {
        let i = DenseMatrix::Real(DMatrix::identity(20, 20));
        assert!((operator_norm(&[&i, &i]).unwrap() - 1.0).abs() < 1e-12);
        assert!(operator_norm(&[]).is_err());
    }
}
