//! Setup shared by the experiments: validated configuration, grid, spectral engine,
//! prepared initial state and the split-step trajectory.

use std::sync::Arc;

use super::config::ExperimentConfig;
use super::engine::SpectralEngine;
use super::report::RunReport;
use crate::dynamics::{prepare_state, propagate_to, PreparedState, TimeSeries, Trajectory};
use crate::error::Result;
use crate::grid::RadialGrid;
use crate::operators::PotentialSpec;

pub(crate) struct Setup {
    pub cfg: ExperimentConfig,
    pub grid: Arc<RadialGrid>,
    pub engine: SpectralEngine,
    pub prepared: PreparedState,
    pub traj: Trajectory,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.build_grid()?;
        let engine = SpectralEngine::new(&grid, &cfg.potential, cfg.grid.backend, cfg.tolerances.filter)?;
        let prepared = prepare_state(&cfg.state, &cfg.potential, &grid)?;
        let times = cfg.time.samples()?;
        let traj = propagate_to(&prepared.state, &cfg.potential, &times, cfg.time.dt, &cfg.propagation_options())?;
        Ok(Self {
            cfg: cfg.clone(),
            grid,
            engine,
            prepared,
            traj,
        })
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.cfg.potential
    }

    pub fn times(&self) -> &[f64] {
        &self.traj.times
    }

    /// `‖⟨r⟩^s ψ₀‖` for one of the recorded exponents.
    pub fn weighted_norm(&self, s: f64) -> f64 {
        self.prepared
            .weighted_norms
            .iter()
            .find(|(e, _)| (e - s).abs() < 1e-12)
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    }

    /// A report pre-filled with the manifest entries every experiment records.
    pub fn report(&self, experiment: &str) -> RunReport {
        let mut r = RunReport::new(experiment, Some(&self.cfg));
        r.diagnostic("backend", self.engine.label());
        r.diagnostic("potential", self.potential().id());
        r.diagnostic("grid", format!("N={} h={} L={}", self.grid.n_points(), self.grid.spacing(), self.grid.extent()));
        r.diagnostic("samples", self.traj.times.len());
        r.diagnostic("max_norm_drift", format!("{:e}", self.traj.norm_drift.iter().copied().fold(0.0, f64::max)));
        if let Some(f) = &self.prepared.filter {
            r.diagnostic("state_filter", format!("{} degree={} error={:e}", f.label, f.degree, f.measured_error));
        }
        r.diagnostic("state_tail_norm", format!("{:e}", self.prepared.tail_norm));
        for (s, v) in &self.prepared.weighted_norms {
            r.diagnostic(&format!("weighted_norm_{s}"), format!("{v:e}"));
        }
        r.boundary_mass_max = self.traj.max_boundary_mass();
        r.flagged = self.traj.flagged;
        r.push_series(TimeSeries::new(
            "boundary mass",
            None,
            self.traj.times.clone(),
            self.traj.boundary_mass.clone(),
        ));
        r
    }
}
