//! Collective spontaneous emission of `J = 0 -> J = 1` atoms inside a
//! perfectly conducting rectangular waveguide.
//!
//! Units: lengths in `1 / k0`, rates in `gamma0`, times in `1 / gamma0`.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod geometry;
pub mod green;
pub mod linalg;
pub mod modes;
pub mod oracle;

pub use config::{
    Excitation, ExperimentConfig, ExperimentKind, SweepSpec, SweepVariable, TimeGrid,
};
pub use dynamics::{
    asymptotic_amplitudes, asymptotic_population, dark_subspace, max_population, propagate,
    propagate_with, uniform_grid, AmplitudeTrajectory, DarkSubspace, InitialState, Propagator,
};
pub use error::{ErrorClass, Result, WgqedError};
pub use experiments::{Artifact, SweepResult};
pub use fit::{fit_decay_rate, FitModel, FitResult};
pub use geometry::{AtomConfig, WaveguideGeometry};
pub use green::{build_effective_matrix, EffectiveMatrix, ExcitedStateIndex, TruncationPolicy};
pub use modes::{cutoff_wavenumber, enumerate_modes, enumerate_propagating, Family, ModeIndex};
pub use oracle::{gamma_prime, spatial_period, two_atom_eigenvalues, TwoAtomEigenpair};
