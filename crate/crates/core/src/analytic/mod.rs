//! Closed-form dark-evolution models and the classical local-field picture.
//!
//! In the single-excitation subspace with only plasmon loss active, the
//! master equation reduces to a non-Hermitian Schroedinger equation with an
//! (N+1) x (N+1) generator. This module carries that reduction in two forms:
//! the two-QD three-state model in the symmetric/antisymmetric basis
//! ([`three_state`]) and the general N-QD site-basis model ([`ndark`]),
//! together with their asymptotics and optimal coupling ratios. The
//! [`local_field`] submodule maps the cavity-QED parameters onto the
//! classical coupled-dipole picture of the drive enhancement.

mod local_field;
mod ndark;
mod three_state;

pub use local_field::{local_field, rabi_ratio, LocalFieldModel};
pub use ndark::{
    contour_scan, ndark_asymptotic, ndark_build, ndark_build_seeded, ndark_evolve,
    ndark_optimal_ratio, ContourRow, DarkModel,
};
pub use three_state::{
    short_time_amplitudes, three_state_asymptotic, three_state_evolve, ThreeStateAmplitudes,
    ThreeStateModel, OPTIMAL_X,
};
