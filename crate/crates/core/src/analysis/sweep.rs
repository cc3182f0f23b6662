// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::run::evaluate;
use crate::config::{ScenarioConfig, VrmPlacement};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    /// Number of on-package regulators.
    VrmCount,
    /// Regulator to chip edge spacing, mm.
    VrmGap,
    /// On-die decap density, nF/mm².
    OnchipDecap,
    /// Multiplier on every load current.
    PowerScale,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [
        SweepAxis::VrmCount,
        SweepAxis::VrmGap,
        SweepAxis::OnchipDecap,
        SweepAxis::PowerScale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::VrmCount => "vrm_count",
            SweepAxis::VrmGap => "vrm_gap",
            SweepAxis::OnchipDecap => "onchip_decap",
            SweepAxis::PowerScale => "power_scale",
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut config = base.clone();
        match self {
            SweepAxis::VrmCount | SweepAxis::VrmGap => {
                let VrmPlacement::OnPackage { count, gap_mm, .. } = &mut config.placement else {
                    return Err(Error::Incompatible(format!(
                        "{} applies only to on-package regulators, not {}",
                        self.name(),
                        base.placement.short_name()
                    )));
                };
                if self == SweepAxis::VrmCount {
                    if value.fract() != 0.0 || value < 1.0 {
                        return Err(Error::Incompatible(format!("vrm_count must be a positive integer, got {value}")));
                    }
                    *count = value as u32;
                } else {
                    *gap_mm = value;
                }
            }
            SweepAxis::OnchipDecap => config.decaps.onchip_density_nf_per_mm2 = value,
            SweepAxis::PowerScale => config = config.with_power_scale(value),
        }
        Ok(config)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SweepAxis::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = SweepAxis::ALL.iter().map(|a| a.name()).collect();
            format!("unknown axis `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// SHA-256 of the canonical JSON form of `config`, hex encoded.
pub fn config_hash(config: &ScenarioConfig) -> String {
    hex::encode(Sha256::digest(config.to_json().as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMetrics {
    pub max_ir_drop_mv: f64,
    /// `None` for DC-only sweeps.
    pub max_psn_mv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub value: f64,
    /// Empty when the axis value could not be applied.
    pub config_hash: String,
    pub outcome: std::result::Result<PointMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    /// In the order the values were given.
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn failures(&self) -> Vec<(f64, &str)> {
        self.records
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| (r.value, e.as_str())))
            .collect()
    }

    pub fn max_ir_drop_mv(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.outcome.as_ref().ok().map(|m| m.max_ir_drop_mv)).collect()
    }

    pub fn max_psn_mv(&self) -> Vec<Option<f64>> {
        self.records
            .iter()
            .map(|r| r.outcome.as_ref().ok().and_then(|m| m.max_psn_mv))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub transient: bool,
    pub workers: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            transient: true,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

fn run_point(base: &ScenarioConfig, axis: SweepAxis, value: f64, transient: bool) -> SweepRecord {
    let config = match axis.apply(base, value) {
        Ok(c) => c,
        Err(e) => {
            return SweepRecord {
                value,
                config_hash: String::new(),
                outcome: Err(e.to_string()),
            }
        }
    };
    let outcome = evaluate(&config, transient)
        .map(|ev| PointMetrics {
            max_ir_drop_mv: ev.ir.max_mv,
            max_psn_mv: ev.psn.map(|p| p.max_psn_mv),
        })
        .map_err(|e| e.to_string());
    SweepRecord {
        value,
        config_hash: config_hash(&config),
        outcome,
    }
}

/// Evaluates `base` at each value of `axis`. A failing point is recorded
/// and the sweep carries on.
pub fn run_sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[f64], options: &SweepOptions) -> SweepResult {
    let workers = options.workers.clamp(1, values.len().max(1));
    let slots: Mutex<Vec<Option<SweepRecord>>> = Mutex::new(vec![None; values.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&value) = values.get(k) else { break };
                let record = run_point(base, axis, value, options.transient);
                slots.lock().expect("no worker panics while holding the lock")[k] = Some(record);
            });
        }
    });
    let records = slots
        .into_inner()
        .expect("workers have finished")
        .into_iter()
        .map(|r| r.expect("every point ran"))
        .collect();
    SweepResult { axis, records }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Benchmark;

    #[test]
    fn axis_names_round_trip() {
        for a in SweepAxis::ALL {
            assert_eq!(a.name().parse::<SweepAxis>().unwrap(), a);
        }
        assert!("decap".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn placement_axes_need_on_package_regulators() {
        let base = ScenarioConfig::benchmark(Benchmark::Backside);
        assert!(SweepAxis::VrmGap.apply(&base, 1.0).is_err());
        let base = ScenarioConfig::benchmark(Benchmark::OnPackage2);
        let c = SweepAxis::VrmCount.apply(&base, 4.0).unwrap();
        assert_eq!(c.placement.vrm_count(), 4);
        assert!(SweepAxis::VrmCount.apply(&base, 2.5).is_err());
    }

    #[test]
    fn failed_points_are_recorded_in_order() {
        let base = ScenarioConfig::benchmark(Benchmark::OnPackage1).with_tiles(20, 20);
        let options = SweepOptions {
            transient: false,
            workers: 2,
        };
        let r = run_sweep(&base, SweepAxis::VrmGap, &[3.0, -1.0, 0.1], &options);
        assert_eq!(r.records.iter().map(|r| r.value).collect::<Vec<_>>(), vec![3.0, -1.0, 0.1]);
        assert_eq!(r.failures().len(), 1);
        assert_eq!(r.failures()[0].0, -1.0);
        let ir = r.max_ir_drop_mv();
        assert!(ir[2].unwrap() < ir[0].unwrap(), "{ir:?}");
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::default();
        let b = SweepAxis::OnchipDecap.apply(&a, 7.0).unwrap();
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
