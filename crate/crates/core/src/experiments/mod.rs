//! Configured end-to-end runs: propagation estimates per energy shell, the maximal and
//! minimal velocity assemblies, the static-estimate battery, and the reporting layer
//! (JSON manifest, CSV series, SVG figures) behind the command-line interface.
//!
//! Every run starts from an [`ExperimentConfig`], evolves one trajectory with the
//! split-step propagator, and evaluates its observables on the stored samples with a
//! [`SpectralEngine`]. Results are collected in a [`RunReport`].

mod battery;
pub mod cli;
mod common;
mod config;
mod engine;
mod integrals;
mod propagation;
mod report;
mod velocity;

pub use battery::{
    check_commutator_expansion, check_split_step_convergence, run_certify, run_oracle_compare, run_simulate,
    scale_probes, shell_probes, ExpansionCheck, COVARIANCE_PROBES, COVARIANCE_TOL, DISJOINTNESS_TOL, HARDY_SAMPLES, KERNEL_SHELLS,
    LOCALIZATION_ENVELOPE, MOURRE_ENVELOPE, SHELL_RANGE,
};
pub use config::{Backend, CutoffSection, ExperimentConfig, GridSection, TimeSection, ToleranceSection};
pub use engine::{AFunction, Applied, SpectralEngine};
pub use integrals::{Accumulator, Measure};
pub use propagation::run_propagation_estimate;
pub use report::{
    emit_report, exit_code, exit_code_for, read_manifest, render_svg, series_from_csv, series_to_csv, Emitted,
    Figure, Formats, Manifest, RunReport, MANIFEST_SCHEMA,
};
pub use velocity::{run_maximal_velocity, run_minimal_velocity, DEFAULT_DECAY_LEVEL, DEFAULT_MINIMAL_TAIL_RATIO};
