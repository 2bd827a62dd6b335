//! Matrix-free operators on sampled radial states: `|p|^α`, `V`, `H = |p| + V`,
//! the dilation generator `A = −i(r ∂_r + 1/2)` and the dilation group.

mod dilation;
mod potential;

use std::sync::Arc;

pub use dilation::{apply_dilation_group, dilate, dilate_onto, DilationResult, DEFAULT_LAMBDA_MAX};
pub use potential::{potential_norms, validate_potential, AdmissibilityReport, PotentialSpec, DECAY_EXPONENTS};

use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, RadialGrid, WaveFunction, C64};

/// A linear operator on states of one grid, together with its adjoint.
pub trait LinearMap: Send + Sync {
    fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction>;
    fn apply_adjoint(&self, psi: &WaveFunction) -> Result<WaveFunction>;
}

/// `|p|^α ψ` for `α ∈ [−2, 2]`, the multiplier `k_m^α` in the sine basis.
pub fn apply_fractional_momentum(psi: &WaveFunction, alpha: f64) -> Result<WaveFunction> {
    if !(-2.0..=2.0).contains(&alpha) {
        return Err(Error::Parameter(format!("momentum exponent must lie in [-2, 2], got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(psi.clone());
    }
    if alpha == 1.0 {
        return Ok(apply_multiplier(psi, |k| k));
    }
    Ok(apply_multiplier(psi, |k| k.powf(alpha)))
}

/// Multiplication by `V(r)`.
pub fn apply_potential(psi: &WaveFunction, v: &PotentialSpec) -> WaveFunction {
    psi.multiply_by(|r| v.value(r))
}

/// `Hψ = |p|ψ + Vψ`.
pub fn apply_hamiltonian(psi: &WaveFunction, v: &PotentialSpec) -> Result<WaveFunction> {
    Hamiltonian::new(psi.grid(), v).apply(psi)
}

/// Multiplication by `⟨r⟩^s`.
pub fn apply_position_weight(psi: &WaveFunction, s: f64) -> WaveFunction {
    psi.multiply_by(|r| (1.0 + r * r).powf(s / 2.0))
}

/// Spectral derivative `u′(r_j)` of the sine series through the samples.
pub fn spectral_derivative(psi: &WaveFunction) -> WaveFunction {
    let grid = psi.grid();
    let t = grid.transform();
    let mut c = t.apply(psi.values());
    for (m, z) in c.iter_mut().enumerate() {
        *z *= grid.momentum(m);
    }
    WaveFunction::from_parts(grid, t.cosine_synthesis(&c))
}

/// Transpose of the spectral differentiation matrix applied to `w`.
fn spectral_derivative_transpose(grid: &Arc<RadialGrid>, w: &[C64]) -> Vec<C64> {
    let t = grid.transform();
    let mut c = t.cosine_synthesis(w);
    for (m, z) in c.iter_mut().enumerate() {
        *z *= grid.momentum(m);
    }
    t.apply_in_place(&mut c);
    c
}

/// `Aψ` in the antisymmetrized form `−(i/2)(R D − Dᵀ R)ψ`, with `D` the spectral
/// differentiation matrix and `R` multiplication by `r`. On band-limited states away
/// from the box edge this equals `−i(r u′ + u/2)`; the form is exactly Hermitian.
pub fn apply_generator_a(psi: &WaveFunction) -> WaveFunction {
    let grid = psi.grid();
    let du = spectral_derivative(psi);
    let ru: Vec<C64> = psi
        .values()
        .iter()
        .enumerate()
        .map(|(j, z)| z * grid.node(j))
        .collect();
    let dtru = spectral_derivative_transpose(grid, &ru);
    let factor = C64::new(0.0, -0.5);
    let values = du
        .values()
        .iter()
        .zip(&dtru)
        .enumerate()
        .map(|(j, (a, b))| factor * (a * grid.node(j) - b))
        .collect();
    WaveFunction::from_parts(grid, values)
}

/// `i[H, A]ψ = |p|ψ + W_A ψ` with `W_A = −r V′` (closed form, no differencing).
pub fn apply_commutator_ha(psi: &WaveFunction, v: &PotentialSpec) -> WaveFunction {
    let p = apply_multiplier(psi, |k| k);
    let w = psi.multiply_by(|r| v.virial(r));
    p.add(&w).expect("same grid")
}

/// The Hamiltonian with its potential samples and momentum multipliers precomputed,
/// for repeated application in iterative methods.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Arc<RadialGrid>,
    potential: PotentialSpec,
    v: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(grid: &Arc<RadialGrid>, potential: &PotentialSpec) -> Self {
        Self {
            grid: Arc::clone(grid),
            potential: potential.clone(),
            v: potential.samples(grid),
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn potential_samples(&self) -> &[f64] {
        &self.v
    }

    pub fn v_min(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn v_max(&self) -> f64 {
        self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `out = H x` on raw sample vectors.
    pub fn apply_raw(&self, x: &[C64], out: &mut [C64]) {
        let t = self.grid.transform();
        out.copy_from_slice(x);
        t.apply_in_place(out);
        for (m, z) in out.iter_mut().enumerate() {
            *z *= self.grid.momentum(m);
        }
        t.apply_in_place(out);
        for ((o, xi), vi) in out.iter_mut().zip(x).zip(&self.v) {
            *o += xi * vi;
        }
    }

    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        if !psi.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        self.apply_raw(psi.values(), &mut out);
        Ok(WaveFunction::from_parts(&self.grid, out))
    }
}

impl LinearMap for Hamiltonian {
    fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        Hamiltonian::apply(self, psi)
    }
    fn apply_adjoint(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        Hamiltonian::apply(self, psi)
    }
}

/// Kinds of matrix-free operators.
#[derive(Debug, Clone)]
pub enum OperatorKind {
    FractionalMomentum(f64),
    Potential(PotentialSpec),
    Hamiltonian(PotentialSpec),
    GeneratorA,
    PositionWeight(f64),
    /// Product `K_1 K_2 ⋯ K_m`; the last factor acts first.
    Chain(Vec<OperatorHandle>),
}

/// A matrix-free operator bound to a grid.
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    pub kind: OperatorKind,
    pub grid: Arc<RadialGrid>,
}

impl OperatorHandle {
    pub fn new(kind: OperatorKind, grid: &Arc<RadialGrid>) -> Result<Self> {
        if let OperatorKind::FractionalMomentum(a) = kind {
            if !(-2.0..=2.0).contains(&a) {
                return Err(Error::Parameter(format!("momentum exponent must lie in [-2, 2], got {a}")));
            }
        }
        if let OperatorKind::Chain(ref fs) = kind {
            if fs.iter().any(|f| !f.grid.same_as(grid)) {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Self {
            kind,
            grid: Arc::clone(grid),
        })
    }

    pub fn momentum(alpha: f64, grid: &Arc<RadialGrid>) -> Result<Self> {
        Self::new(OperatorKind::FractionalMomentum(alpha), grid)
    }

    pub fn hamiltonian(v: &PotentialSpec, grid: &Arc<RadialGrid>) -> Self {
        Self {
            kind: OperatorKind::Hamiltonian(v.clone()),
            grid: Arc::clone(grid),
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        !matches!(self.kind, OperatorKind::Chain(_))
    }

    fn check(&self, psi: &WaveFunction) -> Result<()> {
        if psi.grid().same_as(&self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl LinearMap for OperatorHandle {
    fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.check(psi)?;
        match &self.kind {
            OperatorKind::FractionalMomentum(a) => apply_fractional_momentum(psi, *a),
            OperatorKind::Potential(v) => Ok(apply_potential(psi, v)),
            OperatorKind::Hamiltonian(v) => apply_hamiltonian(psi, v),
            OperatorKind::GeneratorA => Ok(apply_generator_a(psi)),
            OperatorKind::PositionWeight(s) => Ok(apply_position_weight(psi, *s)),
            OperatorKind::Chain(fs) => {
                let mut x = psi.clone();
                for f in fs.iter().rev() {
                    x = f.apply(&x)?;
                }
                Ok(x)
            }
        }
    }

    fn apply_adjoint(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        match &self.kind {
            OperatorKind::Chain(fs) => {
                self.check(psi)?;
                let mut x = psi.clone();
                for f in fs.iter() {
                    x = f.apply_adjoint(&x)?;
                }
                Ok(x)
            }
            _ => self.apply(psi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_radial_grid;

    #[test]
    fn eigenmodes_of_momentum_and_hamiltonian() {
        let g = build_radial_grid(128, 0.5).unwrap();
        let psi = WaveFunction::sine_mode(&g, 4);
        let k = g.momentum(4);
        let p = apply_fractional_momentum(&psi, 1.0).unwrap();
        assert!(p.distance(&psi.scaled_real(k)).unwrap() < 1e-12 * psi.norm());
        let h = apply_hamiltonian(&psi, &PotentialSpec::Zero).unwrap();
        assert!(h.distance(&psi.scaled_real(k)).unwrap() < 1e-12 * psi.norm());
        assert!(apply_fractional_momentum(&psi, 2.5).is_err());
        assert!(apply_fractional_momentum(&psi, 0.0).unwrap().distance(&psi).unwrap() == 0.0);
    }

    #[test]
    fn generator_matches_closed_form_derivative() {
        let g = build_radial_grid(1023, 0.02).unwrap();
        let u = WaveFunction::from_real_fn(&g, |r| r * (-r * r).exp());
        let au = apply_generator_a(&u);
        let want = WaveFunction::from_fn(&g, |r| {
            let du = (1.0 - 2.0 * r * r) * (-r * r).exp();
            C64::new(0.0, -1.0) * (r * du + 0.5 * r * (-r * r).exp())
        });
        let err = au.distance(&want).unwrap() / want.norm();
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn chain_applies_right_to_left() {
        let g = build_radial_grid(64, 1.0).unwrap();
        let psi = WaveFunction::from_real_fn(&g, |r| (-(r - 30.0).powi(2) / 20.0).exp());
        let w = OperatorHandle::new(OperatorKind::PositionWeight(1.0), &g).unwrap();
        let p = OperatorHandle::momentum(1.0, &g).unwrap();
        let chain = OperatorHandle::new(OperatorKind::Chain(vec![w.clone(), p.clone()]), &g).unwrap();
        let direct = w.apply(&p.apply(&psi).unwrap()).unwrap();
        assert!(chain.apply(&psi).unwrap().distance(&direct).unwrap() < 1e-14);
        let adj = p.apply(&w.apply(&psi).unwrap()).unwrap();
        assert!(chain.apply_adjoint(&psi).unwrap().distance(&adj).unwrap() < 1e-14);
    }
}
