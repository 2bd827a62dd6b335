//! Functional calculus: smoothed cutoffs, dyadic partitions, `f(H)` by Chebyshev
//! expansion, `f(A)` through the Mellin transform, and commutator expansions.

mod chebyshev;
mod commutator;
mod cutoff;
mod dyadic;
mod mellin;

pub use chebyshev::{
    apply_function_of_h, spectral_window, ChebyshevFilter, FilterCertificate, FilterContext, SpectralWindow,
    DEFAULT_MAX_DEGREE,
};
pub use commutator::{
    commutator_expansion, commutator_expansion_with, remainder_weight, ExpansionOperator, ExpansionOptions, ExpansionReport,
    ProbeExpansion,
};
pub use cutoff::{
    make_cutoff, mollifier, mollifier_cdf, CutoffKind, SmoothCutoff, DEFAULT_MOLLIFIER_RATIO, SMOOTH_MOLLIFIER_RATIO,
};
pub use dyadic::{
    make_dyadic_partition, max_resolvable_shell, DyadicPartition, DyadicShell, DEFAULT_RESOLUTION_FACTOR,
    DEFAULT_SHELL_DELTA,
};
pub use mellin::{
    apply_function_of_a, cutoff_derivative, dilation_quadrature, kernel_reach, spatial_extent, spectral_band_limit, MellinPlan, MellinResult,
};
