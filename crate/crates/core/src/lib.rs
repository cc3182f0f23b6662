// SPDX-License-Identifier: Apache-2.0

//! Power delivery network simulator for 2.5-D and 3-D packages with
//! on-package, backside and stacked voltage regulators.
//!
//! The pipeline is [`config::ScenarioConfig`] → [`netlist::assemble_netlist`]
//! → [`mna::dc_solve`] / [`mna::transient_solve`] → [`analysis`] metrics.

pub mod analysis;
pub mod config;
mod error;
pub mod io;
pub mod mna;
pub mod netlist;

pub use config::{Benchmark, PowerMapKind, ScenarioConfig};
pub use error::{Error, Result, Violation};
pub use mna::{dc_solve, transient_solve, DcSolution, Stimulus, TransientOptions, TransientWaveform};
pub use netlist::{assemble_netlist, Netlist, NodeId};
