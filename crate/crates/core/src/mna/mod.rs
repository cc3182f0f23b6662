// SPDX-License-Identifier: Apache-2.0

//! Modified nodal analysis: stamping, DC operating point and fixed-step
//! transient integration.

mod dc;
mod stamp;
mod transient;

pub use crate::config::Integrator;
pub use dc::{dc_solve, DcSolution, KCL_TOLERANCE};
pub use stamp::{stamp_mna, MnaMode, MnaSystem};
pub use transient::{transient_solve, InitialState, Stimulus, TransientOptions, TransientWaveform, ENVELOPE};
