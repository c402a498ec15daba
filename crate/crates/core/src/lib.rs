//! Propagators for a two-level system driven by short pulses, with
//! diagnostics for how much time ordering matters.
//!
//! The model is `H = −γσz + V(t)σx` with ħ = 1 and time in ps.

// NaN must fail every guard, so the negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod integrator;
pub mod propagators;
pub mod pulse;
pub mod quad;
pub mod su2;

pub use error::{Error, Result};
pub use integrator::{rk4_evolve, rk4_propagator, IntegratorConfig, TimeSeries};
pub use pulse::{DoubleKickParams, Pulse, PulseSequence, PulseShape, SystemParams};
pub use su2::{Complex, Mat2, PauliVector, QubitState};
