//! Magnetostatics of solenoids and moving charges, the Aharonov-Bohm phase,
//! superconducting shielding, a dc-SQUID flux-locked-loop experiment and the
//! quantized LC-circuit commutator.
//!
//! Everything is in SI units. Physical constants live in [`constants`].

// `!(x > 0.0)` is the NaN-rejecting form used throughout parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod fields;
pub mod interaction;
pub mod interference;
pub mod quadrature;
pub mod quantum_lc;
pub mod shield;
pub mod squid;
pub mod vec3;
pub mod verify;

pub use error::{Error, Result};
pub use vec3::Vec3;
