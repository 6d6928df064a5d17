//! Fluid models and a Poisson-loss event simulator for loss-based congestion
//! control.
//!
//! The fluid model tracks two quantities per flow, the window immediately
//! before the last loss (`w_max`) and the time elapsed since that loss
//! (`since_loss`). Any window-based controller plugs in through
//! [`WindowFunction`]; Reno and CUBIC are provided in [`protocols`].
//!
//! * [`model`]: parameters, flow state and the delayed right-hand side.
//! * [`protocols`]: Reno and CUBIC window functions, shifted CUBIC coordinates.
//! * [`fixedpoint`]: steady-state solvers.
//! * [`dde`]: fixed-step delay-differential integrator with history buffer.
//! * [`stability`]: Lyapunov-Razumikhin diagnostics for the CUBIC fixed point.
//! * [`nhpl`]: event-driven multi-flow simulator with non-homogeneous Poisson losses.
//! * [`cli`]: experiment configuration and the runner behind the `fluidcc` binary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dde;
pub mod error;
pub mod fixedpoint;
pub mod model;
pub mod nhpl;
pub mod protocols;
pub mod stability;

pub use error::{Error, Result};
pub use fixedpoint::FixedPoint;
pub use model::{FlowState, SystemParams, WindowFunction};
pub use protocols::{Algorithm, Cubic, Reno, ShiftedState};
