// SPDX-License-Identifier: Apache-2.0

use super::metrics::{extract_psn, ir_drop_map, IrDropMap, PsnMetrics};
use crate::config::{ScenarioConfig, StepTarget};
use crate::error::Result;
use crate::mna::{dc_solve, transient_solve, Stimulus, TransientOptions, TransientWaveform};
use crate::netlist::{assemble_netlist, Netlist};

pub fn stimulus_for(config: &ScenarioConfig) -> Stimulus {
    let rise = config.transient.rise_time_ns * 1e-9;
    match config.transient.step {
        StepTarget::Load => Stimulus::load_step(rise),
        StepTarget::Supply => Stimulus::supply_step(rise),
    }
}

/// Transient run with the config's step, time base and integrator.
/// `record` selects probes as in [`TransientOptions::record`]; the chip
/// envelope is always recorded.
pub fn run_transient(config: &ScenarioConfig, netlist: &Netlist, record: Option<Vec<String>>) -> Result<TransientWaveform> {
    let t = &config.transient;
    let options = TransientOptions {
        record,
        ..TransientOptions::default().with_method(t.method)
    };
    transient_solve(netlist, stimulus_for(config), t.dt_ps * 1e-12, t.t_end_ns * 1e-9, &options)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub ir: IrDropMap,
    pub psn: Option<PsnMetrics>,
}

/// Builds, solves DC and, when asked, runs the transient of one scenario.
pub fn evaluate(config: &ScenarioConfig, transient: bool) -> Result<Evaluation> {
    let netlist = assemble_netlist(config)?;
    let dc = dc_solve(&netlist)?;
    let ir = ir_drop_map(&dc, &netlist, config);
    let psn = if transient {
        let w = run_transient(config, &netlist, Some(Vec::new()))?;
        Some(extract_psn(&w, config)?)
    } else {
        None
    };
    Ok(Evaluation { ir, psn })
}
