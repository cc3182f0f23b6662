// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use thiserror::Error;

/// One failed constraint, addressed by its dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.path, self.constraint)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("power map is all zero but total power is {0} W")]
    ZeroPowerMap(f64),

    #[error("malformed netlist: {0}")]
    Netlist(String),

    #[error("floating subgraph with no path to ground: {}", .0.join(", "))]
    Floating(Vec<String>),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("transient diverged at t = {time:e} s ({method}, dt = {dt:e} s): |v| = {magnitude:.3} V")]
    Diverged {
        time: f64,
        method: &'static str,
        dt: f64,
        magnitude: f64,
    },

    #[error("waveform too short: {0}")]
    WaveformTooShort(String),

    #[error("incompatible configurations: {0}")]
    Incompatible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
