//! Classical simulator and benchmark library for a discrete adiabatic
//! linear-system solver driven by dynamic (mid-circuit measurement)
//! quantum circuits.
//!
//! The library covers the full pipeline: generating conditioned test
//! systems, building the interpolated Hamiltonians, evolving dense
//! reference states, block-encoding the per-step real operator into a
//! gate program, simulating that program with post-selection and
//! measurement, and reconstructing the solution classically between
//! segments.

pub mod encoding;
pub mod engine;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod numerics;
pub mod postprocess;
pub mod problem;
pub mod simulator;

pub use error::{Error, Result};
