//! Functions of `H` and of the dilation generator `A` on sampled states, with an error
//! bound for each application. Small grids use exact dense spectral calculus; large
//! grids use Chebyshev filters and the Mellin pipeline, falling back to the dense
//! oracle when a filter fails and the grid is small enough.

use std::sync::{Arc, OnceLock};

use super::config::Backend;
use crate::error::{Error, Result};
use crate::estimates::{GeneratorSpectrum, HamiltonianSpectrum};
use crate::funcalc::{kernel_reach, FilterContext, MellinPlan, SmoothCutoff};
use crate::grid::{apply_complex_multiplier, apply_multiplier, RadialGrid, WaveFunction, C64};
use crate::operators::PotentialSpec;
use crate::oracle::ORACLE_MAX_N;

/// A state with a bound on the error of the operation that produced it.
#[derive(Debug, Clone)]
pub struct Applied {
    pub state: WaveFunction,
    pub error: f64,
}

/// A function of `A/s` built from a cutoff: `w(τ) F^{(order)}(τ/s)`.
pub struct AFunction<'a> {
    pub cutoff: &'a SmoothCutoff,
    pub order: usize,
    pub scale: f64,
    /// Optional weight `w(τ)`; the Mellin kernel reach is then estimated one order up.
    pub weight: Option<&'a (dyn Fn(f64) -> f64 + Sync)>,
}

impl<'a> AFunction<'a> {
    pub fn new(cutoff: &'a SmoothCutoff, scale: f64) -> Self {
        Self {
            cutoff,
            order: 0,
            scale,
            weight: None,
        }
    }

    pub fn derivative(cutoff: &'a SmoothCutoff, scale: f64) -> Self {
        Self {
            order: 1,
            ..Self::new(cutoff, scale)
        }
    }

    pub fn weighted(mut self, w: &'a (dyn Fn(f64) -> f64 + Sync)) -> Self {
        self.weight = Some(w);
        self
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let x = tau / self.scale;
        let f = match self.order {
            0 => self.cutoff.eval(x),
            1 => self.cutoff.derivative(x),
            _ => self.cutoff.second_derivative(x),
        };
        match self.weight {
            Some(w) => w(tau) * f,
            None => f,
        }
    }
}

enum HCalc {
    Free,
    Dense { spectrum: Arc<HamiltonianSpectrum>, residual: f64 },
    Chebyshev(FilterContext),
}

enum ACalc {
    Dense { spectrum: GeneratorSpectrum, residual: f64 },
    Mellin(MellinPlan),
}

/// Spectral calculus for one `(grid, V)`.
pub struct SpectralEngine {
    grid: Arc<RadialGrid>,
    potential: PotentialSpec,
    h: HCalc,
    a: ACalc,
    fallback: OnceLock<Arc<HamiltonianSpectrum>>,
    label: String,
}

impl SpectralEngine {
    pub fn new(grid: &Arc<RadialGrid>, v: &PotentialSpec, backend: Backend, filter_tol: f64) -> Result<Self> {
        let dense = match backend {
            Backend::Dense => {
                if grid.n_points() > ORACLE_MAX_N {
                    return Err(Error::OracleTooLarge {
                        max: ORACLE_MAX_N,
                        got: grid.n_points(),
                    });
                }
                true
            }
            Backend::Auto => grid.n_points() <= ORACLE_MAX_N,
            Backend::MatrixFree => false,
        };
        let h = if v.is_zero() {
            HCalc::Free
        } else if dense {
            let spectrum = HamiltonianSpectrum::new(v, grid)?;
            let residual = spectrum.residual();
            HCalc::Dense {
                spectrum: Arc::new(spectrum),
                residual,
            }
        } else {
            HCalc::Chebyshev(FilterContext::for_potential(grid, v, filter_tol)?)
        };
        let a = if dense {
            let spectrum = GeneratorSpectrum::new(grid)?;
            let residual = spectrum.residual(grid);
            ACalc::Dense { spectrum, residual }
        } else {
            ACalc::Mellin(MellinPlan::default())
        };
        let label = match (&h, &a) {
            (HCalc::Free, ACalc::Dense { .. }) => "exact multipliers + dense A",
            (HCalc::Free, ACalc::Mellin(_)) => "exact multipliers + Mellin",
            (HCalc::Dense { .. }, _) => "dense H + dense A",
            (HCalc::Chebyshev(_), _) => "Chebyshev + Mellin",
        }
        .to_string();
        Ok(Self {
            grid: Arc::clone(grid),
            potential: v.clone(),
            h,
            a,
            fallback: OnceLock::new(),
            label,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.a, ACalc::Dense { .. })
    }

    /// The dense spectrum of `H`, when one is held (or `V = 0` on an oracle-sized grid).
    pub fn hamiltonian_spectrum(&self) -> Result<Arc<HamiltonianSpectrum>> {
        match &self.h {
            HCalc::Dense { spectrum, .. } => Ok(Arc::clone(spectrum)),
            _ => self.fallback_spectrum(),
        }
    }

    fn fallback_spectrum(&self) -> Result<Arc<HamiltonianSpectrum>> {
        if let Some(s) = self.fallback.get() {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(HamiltonianSpectrum::new(&self.potential, &self.grid)?);
        Ok(Arc::clone(self.fallback.get_or_init(|| s)))
    }

    /// Lowest point of the spectrum of `H`: exact for `V = 0`, the dense eigenvalue or
    /// the certified window otherwise.
    pub fn spectral_floor(&self) -> f64 {
        match &self.h {
            HCalc::Free => self.grid.momentum(0),
            HCalc::Dense { spectrum, .. } => spectrum.lowest(),
            HCalc::Chebyshev(ctx) => ctx.window.lo,
        }
    }

    /// `f(H)ψ`.
    pub fn h_function(&self, f: &(dyn Fn(f64) -> f64 + Sync), psi: &WaveFunction) -> Result<Applied> {
        self.check_grid(psi)?;
        match &self.h {
            HCalc::Free => Ok(Applied {
                state: apply_multiplier(psi, f),
                error: 0.0,
            }),
            HCalc::Dense { spectrum, residual } => Ok(dense_h(spectrum, *residual, f, psi)),
            HCalc::Chebyshev(ctx) => match ctx.apply(f, psi) {
                Ok((state, cert)) => Ok(Applied {
                    state,
                    error: cert.measured_error * psi.norm(),
                }),
                Err(Error::FilterCap { .. }) if self.grid.n_points() <= ORACLE_MAX_N => {
                    let spectrum = self.fallback_spectrum()?;
                    let residual = spectrum.residual();
                    Ok(dense_h(&spectrum, residual, f, psi))
                }
                Err(e) => Err(e),
            },
        }
    }

    /// `H^p ψ`; negative powers need a positive spectrum.
    pub fn h_power(&self, p: f64, psi: &WaveFunction) -> Result<Applied> {
        let floor = self.spectral_floor();
        if !(floor > 0.0) {
            return Err(Error::Precondition(format!(
                "fractional powers of H need a positive spectrum (lowest point {floor:.3e})"
            )));
        }
        self.h_function(&move |l: f64| l.max(floor).powf(p), psi)
    }

    /// `e^{−iHt}ψ` by dense spectral calculus (exact multiplier for `V = 0`).
    pub fn evolve(&self, psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
        self.check_grid(psi)?;
        if self.potential.is_zero() {
            return Ok(apply_complex_multiplier(psi, |k| C64::from_polar(1.0, -k * t)));
        }
        let spectrum = self.hamiltonian_spectrum()?;
        let g = move |l: f64| C64::from_polar(1.0, -l * t);
        Ok(WaveFunction::from_parts(&self.grid, spectrum.apply_complex_fn(&g, psi.values())))
    }

    /// `f(A)ψ` for a function of `A/s` built from a cutoff.
    pub fn a_function(&self, f: &AFunction<'_>, psi: &WaveFunction) -> Result<Applied> {
        self.check_grid(psi)?;
        match &self.a {
            ACalc::Dense { spectrum, residual } => {
                let g = |tau: f64| f.eval(tau);
                let bound = sup_abs(&g, spectrum.values.iter().copied());
                Ok(Applied {
                    state: WaveFunction::from_parts(&self.grid, spectrum.apply_fn(&g, psi.values())),
                    error: residual * bound * (self.grid.n_points() as f64).sqrt() * psi.norm(),
                })
            }
            ACalc::Mellin(plan) => {
                let order = f.order + usize::from(f.weight.is_some());
                let reach = kernel_reach(f.cutoff, f.scale, order.min(2), plan.kernel_tol);
                let g = |tau: f64| C64::new(f.eval(tau), 0.0);
                let res = plan.apply_multiplier(&g, reach, psi)?;
                Ok(Applied {
                    state: res.state,
                    error: res.resampling_error + plan.kernel_tol * psi.norm(),
                })
            }
        }
    }

    fn check_grid(&self, psi: &WaveFunction) -> Result<()> {
        if psi.grid().same_as(&self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn sup_abs(g: &dyn Fn(f64) -> f64, xs: impl Iterator<Item = f64>) -> f64 {
    xs.map(|x| g(x).abs()).fold(0.0, f64::max)
}

fn dense_h(spectrum: &HamiltonianSpectrum, residual: f64, f: &dyn Fn(f64) -> f64, psi: &WaveFunction) -> Applied {
    let bound = sup_abs(f, spectrum.values.iter().copied());
    Applied {
        state: WaveFunction::from_parts(psi.grid(), spectrum.apply_fn(f, psi.values())),
        error: residual * bound * (spectrum.n() as f64).sqrt() * psi.norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_radial_grid;
    use crate::operators::{apply_generator_a, apply_hamiltonian};

    fn packet(g: &Arc<RadialGrid>) -> WaveFunction {
        WaveFunction::from_fn(g, |r| C64::from_polar((-(r - 40.0f64).powi(2) / 50.0).exp(), 0.8 * r))
            .normalized()
            .unwrap()
    }

    #[test]
    fn dense_h_identity_and_linear_function() {
        let g = build_radial_grid(127, 0.5).unwrap();
        let v = PotentialSpec::soft_decay(-0.3, 3.0);
        let e = SpectralEngine::new(&g, &v, Backend::Dense, 1e-10).unwrap();
        let psi = packet(&g);
        let hpsi = e.h_function(&|l| l, &psi).unwrap();
        let want = apply_hamiltonian(&psi, &v).unwrap();
        assert!(hpsi.state.distance(&want).unwrap() < 1e-10);
        assert!(hpsi.error < 1e-8);
    }

    #[test]
    fn dense_a_reproduces_generator() {
        let g = build_radial_grid(127, 0.5).unwrap();
        let e = SpectralEngine::new(&g, &PotentialSpec::Zero, Backend::Dense, 1e-10).unwrap();
        let psi = packet(&g);
        // F ≡ 1 on the whole spectrum of A, so the weighted function is τ itself.
        let one = SmoothCutoff::step_up(-1e4, 1.0).unwrap();
        let w = |tau: f64| tau;
        let got = e.a_function(&AFunction::new(&one, 1.0).weighted(&w), &psi).unwrap();
        let want = apply_generator_a(&psi);
        assert!(got.state.distance(&want).unwrap() < 1e-9 * want.norm());
        assert!(got.error < 1e-6);
    }

    #[test]
    fn evolution_is_unitary_and_exact_for_free_case() {
        let g = build_radial_grid(127, 0.5).unwrap();
        let e = SpectralEngine::new(&g, &PotentialSpec::Zero, Backend::Dense, 1e-10).unwrap();
        let psi = packet(&g);
        let out = e.evolve(&psi, 5.0).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
        let back = e.evolve(&out, -5.0).unwrap();
        assert!(back.distance(&psi).unwrap() < 1e-12);
    }
}
