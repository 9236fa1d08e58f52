//! Three two-level atoms in a one-dimensional cavity, coupled to the cavity
//! modes under the rotating-wave approximation.
//!
//! The crate evolves the single-excitation amplitudes with a fixed-step
//! fourth-order Adams-Bashforth-Moulton scheme and measures how sharply the
//! emitted field and the excitation of the far atom respect the light cone,
//! for mode sets placed symmetrically around the atomic resonance or bounded
//! from below.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod experiments;
pub mod cli;

pub use error::{DynamicsError, ModelError, ObservableError};
