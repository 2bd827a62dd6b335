//! Numerical certificates for the static operator inequalities and kernel bounds:
//! each check measures raw values on the dense oracle (or matrix-free), fits where a
//! rate is asserted, and records a pass/fail verdict against a configured envelope.

mod certificate;
mod dense;
mod kernels;
mod shells;
mod static_bounds;

pub use certificate::{fit_power_law, spread, BoundCertificate, Check, Measurement, PowerFit};
pub use dense::{
    gram_norm, momentum_function, momentum_power, position_function, self_adjoint_chain_norm, ChainNorm,
    GeneratorSpectrum, HamiltonianSpectrum, DENSE_RESOLUTION_FACTOR,
};
pub use kernels::{check_kernel_bounds, default_kernel_times, KernelBound, KernelOracle, KernelParams};
pub use shells::{
    check_dyadic_localization, check_reverse_mourre, check_support_disjointness, disjointness_threshold,
    disjointness_interior, require_dense_shell, shell_dilation_norm, virial_coefficient_defects, LocalizationRow, MourreRow,
};
pub use static_bounds::{
    check_hardy, check_mutual_domination, check_radial_identity, check_scaling_covariance, covariance_lambdas,
    interior_probes, precise_dilation, radial_identity_probes, radial_identity_residuals, HARDY_CONSTANT,
    RADIAL_IDENTITY_CANDIDATES,
};
