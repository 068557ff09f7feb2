//! Collective-spin dynamics for generating cat and squeezed states.
//!
//! A big spin `A` of `N_A` spin-1/2 particles exchanges excitations with an
//! ancillary spin `B` of `N_B` particles. The crate provides the Dicke-basis
//! machinery, exact propagation, the analytic short-time and fractional-revival
//! models, the observables used to diagnose the generated states, and a
//! truncated-Fock oracle for the bosonic limit.

pub mod approx;
pub mod boson;
pub mod dynamics;
pub mod error;
pub mod observables;
pub mod operator;
pub mod oracle;
pub mod spin;
pub mod verify;

pub use error::{Result, SpinError};
pub use num_complex::Complex64 as C64;
