//! Adiabatic and superadiabatic dynamics of driven few-level quantum systems.
//!
//! The crate integrates iε∂τψ = H(τ)ψ on τ ∈ [0, 1], builds the adiabatic
//! frame and its superadiabatic refinements, synthesizes counterdiabatic
//! drives, and runs the scaling studies and figure datasets on top.

pub mod control;
pub mod error;
pub mod experiments;
pub mod frames;
pub mod linalg;
pub mod models;
pub mod output;
pub mod propagator;
pub mod schedule;

pub use error::{Error, Result};
