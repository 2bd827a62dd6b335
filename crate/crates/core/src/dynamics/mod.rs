//! Time evolution: initial-state preparation, split-step propagation, observable time
//! series, Heisenberg-derivative checks and trajectory checkpoints.

mod checkpoint;
mod heisenberg;
mod observables;
mod propagate;
mod state;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use heisenberg::{heisenberg_check, HeisenbergResidual, ObservableFamily, ShellObservable, SpectralObservable};
pub use observables::{complementary_partition, observable_series, Observable, PositionObservable, TimeSeries};
pub use propagate::{
    geometric_times, propagate_krylov, propagate_split_step, propagate_to, PropagationOptions, SplitStep, Trajectory,
    DEFAULT_TIME_RATIO, MAX_STEP,
};
pub use state::{prepare_state, PreparedState, ProfileKind, StateSpec};
