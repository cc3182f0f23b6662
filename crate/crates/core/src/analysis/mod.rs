// SPDX-License-Identifier: Apache-2.0

//! Metrics, sweeps, comparisons and calibration on top of the solvers.

mod calibrate;
mod compare;
mod metrics;
mod run;
mod sweep;

pub use calibrate::{
    calibrate, evaluate_knobs, objective, BenchmarkMetrics, CalibrationGrid, CalibrationOptions, CalibrationPoint,
    CalibrationResult, CalibrationTargets, Knobs,
};
pub use compare::{compare_configurations, improvement, ComparisonReport, ComparisonRow};
pub use metrics::{extract_psn, extract_psn_with, ir_drop_map, Droop, IrDropMap, PsnMetrics, PsnOptions};
pub use run::{evaluate, run_transient, stimulus_for, Evaluation};
pub use sweep::{config_hash, run_sweep, PointMetrics, SweepAxis, SweepOptions, SweepRecord, SweepResult};
