//! Simulation and optimization of entanglement generation in N quantum dots
//! coupled to a common lossy plasmon mode.
//!
//! The crate is organized around a Lindblad master equation for the composite
//! QD-plasmon system:
//!
//! * [`model`] builds the truncated Hilbert space, sparse operators,
//!   Hamiltonian, drive operator, and dissipator action.
//! * [`dynamics`] propagates the master equation in time (adaptive
//!   Dormand-Prince, fixed-step RK4, or a dense matrix-exponential oracle)
//!   and records observable trajectories.
//! * [`entanglement`] reduces the full density matrix to QD pairs and
//!   computes the Wootters concurrence and the optimization figure of merit.
//! * [`analytic`] implements the closed-form dark-evolution models (three
//!   state and (N+1) state), their asymptotics, and the classical local-field
//!   picture of the plasmon-mediated drive enhancement.
//! * [`optimizer`] provides uniform sampling, basin clustering, a
//!   derivative-free trust-region least-squares solver, and a multistart
//!   driver over bounded physical parameters.
//!
//! All public interfaces quote energies in meV, times in fs, dipole moments
//! in Debye, and fluences in nJ/cm^2; see [`units`] for the conversion
//! constants and conventions.

pub mod analytic;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod units;

pub use dynamics::{
    fluence_to_amplitude, initial_state, propagate, propagate_expm_oracle, pulse_envelope,
    DensityMatrix, InitialState, IntegratorConfig, Method, ObservableSet, PulseSpec, Trajectory,
};
pub use entanglement::{
    concurrence, figure_of_merit, pairwise_concurrences, partial_trace_pair, ConcurrenceMatrix,
    ReducedDM,
};
pub use error::Error;
pub use model::{
    apply_lindblad, build_basis, build_drive, build_hamiltonian, build_operators, BasisMap, Model,
    Operators, PlasmonParams, QDParams, SparseOperator, SystemSpec,
};
pub use optimizer::{
    cluster_basins, multistart, sample_uniform, solve_least_squares, Bounds, ClusterSet,
    EvaluatedPoint, TRConfig,
};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
