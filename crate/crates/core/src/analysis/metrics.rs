// SPDX-License-Identifier: Apache-2.0

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::mna::{DcSolution, TransientWaveform, ENVELOPE};
use crate::netlist::Netlist;

/// Per-tile DC drop below the supply, in mV, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct IrDropMap {
    pub nx: usize,
    pub ny: usize,
    pub drops_mv: Vec<f64>,
    pub max_mv: f64,
    pub mean_mv: f64,
    /// Tile `(i, j)` holding the largest drop; the first one on ties.
    pub argmax: (usize, usize),
}

impl IrDropMap {
    pub fn from_drops(nx: usize, ny: usize, drops_mv: Vec<f64>) -> Self {
        assert_eq!(drops_mv.len(), nx * ny, "one drop per tile");
        assert!(!drops_mv.is_empty(), "empty map");
        let mut best = 0;
        for (k, d) in drops_mv.iter().enumerate() {
            if *d > drops_mv[best] {
                best = k;
            }
        }
        let mean_mv = drops_mv.iter().sum::<f64>() / drops_mv.len() as f64;
        IrDropMap {
            nx,
            ny,
            max_mv: drops_mv[best],
            mean_mv,
            argmax: (best % nx, best / nx),
            drops_mv,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.drops_mv[j * self.nx + i]
    }

    pub fn min_mv(&self) -> f64 {
        self.drops_mv.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn ir_drop_map(dc: &DcSolution, netlist: &Netlist, config: &ScenarioConfig) -> IrDropMap {
    let v = config.chip.supply_voltage_v;
    let tiles = &netlist.chip_tiles;
    let drops = tiles.nodes.iter().map(|n| (v - dc.voltage(*n)) * 1e3).collect();
    IrDropMap::from_drops(tiles.nx, tiles.ny, drops)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Droop {
    pub depth_mv: f64,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsnMetrics {
    pub max_psn_mv: f64,
    pub max_psn_time_s: f64,
    /// `None` when the worst-tile voltage has no qualifying local minimum.
    pub first_droop: Option<Droop>,
    pub settling_mv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsnOptions {
    /// Minimum prominence of a local minimum to count as a droop.
    pub prominence_mv: f64,
}

impl Default for PsnOptions {
    fn default() -> Self {
        PsnOptions { prominence_mv: 1.0 }
    }
}

pub fn extract_psn(waveform: &TransientWaveform, config: &ScenarioConfig) -> Result<PsnMetrics> {
    extract_psn_with(waveform, config.chip.supply_voltage_v, &PsnOptions::default())
}

/// Lowest chip voltage at each sample: the recorded envelope when present,
/// otherwise the minimum over every recorded `chip*` probe.
fn worst_chip_voltage(waveform: &TransientWaveform) -> Result<Vec<f64>> {
    if let Some(env) = waveform.get(ENVELOPE) {
        return Ok(env.to_vec());
    }
    let chip: Vec<&Vec<f64>> = waveform
        .names
        .iter()
        .zip(&waveform.series)
        .filter(|(n, _)| n.starts_with("chip"))
        .map(|(_, s)| s)
        .collect();
    if chip.is_empty() {
        return Err(Error::WaveformTooShort("no chip probes were recorded".into()));
    }
    Ok((0..waveform.time.len())
        .map(|k| chip.iter().map(|s| s[k]).fold(f64::INFINITY, f64::min))
        .collect())
}

pub fn extract_psn_with(waveform: &TransientWaveform, v_final: f64, options: &PsnOptions) -> Result<PsnMetrics> {
    let time = &waveform.time;
    let t_end = time.last().copied().unwrap_or(0.0);
    let needed = waveform.rise_end + 5.0 * waveform.rise_time;
    // half a step of slack for the rounded step count
    if time.len() < 2 || t_end + 0.5 * waveform.dt < needed {
        return Err(Error::WaveformTooShort(format!(
            "ends at {t_end:e} s but metrics need {needed:e} s (5 rise times past the supply ramp)"
        )));
    }
    let deficit: Vec<f64> = worst_chip_voltage(waveform)?.iter().map(|v| (v_final - v) * 1e3).collect();
    let k0 = time
        .iter()
        .position(|&t| t > waveform.rise_end + 1e-6 * waveform.dt)
        .expect("waveform extends past the ramp");
    let last = deficit.len() - 1;

    let mut peak = k0;
    for k in k0..=last {
        if deficit[k] > deficit[peak] {
            peak = k;
        }
    }

    let mut first_droop = None;
    for k in (k0 + 1)..last {
        let d = deficit[k];
        if !(d > deficit[k - 1] && d > deficit[k + 1]) {
            continue;
        }
        // prominence: higher of the two lowest points reached before the
        // deficit climbs above this peak again on either side
        let mut left = d;
        for &x in deficit[k0..k].iter().rev() {
            if x > d {
                break;
            }
            left = left.min(x);
        }
        let mut right = d;
        for &x in &deficit[k + 1..] {
            if x > d {
                break;
            }
            right = right.min(x);
        }
        if d - left.max(right) >= options.prominence_mv {
            first_droop = Some(Droop {
                depth_mv: d,
                time_s: time[k],
            });
            break;
        }
    }

    Ok(PsnMetrics {
        max_psn_mv: deficit[peak],
        max_psn_time_s: time[peak],
        first_droop,
        settling_mv: deficit[last],
    })
}
