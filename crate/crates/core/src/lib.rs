//! Semiclassical spin dynamics: classical phase-space ensembles with a spin
//! function, compared against the Pauli equation.

pub mod analytic;
pub mod classical;
pub mod error;
pub mod fields;
pub mod harness;
pub mod phase_space;
pub mod quadrature;
pub mod quantum;
pub mod spinor;

pub use error::{Error, Result};
pub use fields::{FieldConfig, FieldKind, Vec3};
