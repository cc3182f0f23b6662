// SPDX-License-Identifier: Apache-2.0

//! Grid search over the parasitics a scenario file cannot take from
//! datasheets: regulator R and L, package plane inductance and the board
//! lump inductance.

use super::compare::improvement;
use super::run::evaluate;
use crate::config::{Benchmark, ScenarioConfig};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knobs {
    pub vrm_resistance_mohm: f64,
    pub vrm_inductance_nh: f64,
    pub package_segment_inductance_ph: f64,
    pub board_inductance_nh: f64,
}

impl Knobs {
    pub fn of(config: &ScenarioConfig) -> Self {
        Knobs {
            vrm_resistance_mohm: config.vrm.series_resistance_mohm,
            vrm_inductance_nh: config.vrm.series_inductance_nh,
            package_segment_inductance_ph: config.package.segment_inductance_ph,
            board_inductance_nh: config.board.lumped_inductance_nh,
        }
    }

    pub fn apply(&self, base: &ScenarioConfig) -> ScenarioConfig {
        let mut c = base.clone();
        c.vrm.series_resistance_mohm = self.vrm_resistance_mohm;
        c.vrm.series_inductance_nh = self.vrm_inductance_nh;
        c.package.segment_inductance_ph = self.package_segment_inductance_ph;
        c.board.lumped_inductance_nh = self.board_inductance_nh;
        c
    }
}

/// Candidate values per knob; the search visits the full product.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationGrid {
    pub vrm_resistance_mohm: Vec<f64>,
    pub vrm_inductance_nh: Vec<f64>,
    pub package_segment_inductance_ph: Vec<f64>,
    pub board_inductance_nh: Vec<f64>,
}

impl CalibrationGrid {
    /// A single point at the knobs of `config`.
    pub fn around(config: &ScenarioConfig) -> Self {
        let k = Knobs::of(config);
        CalibrationGrid {
            vrm_resistance_mohm: vec![k.vrm_resistance_mohm],
            vrm_inductance_nh: vec![k.vrm_inductance_nh],
            package_segment_inductance_ph: vec![k.package_segment_inductance_ph],
            board_inductance_nh: vec![k.board_inductance_nh],
        }
    }

    /// Every knob at 0.5x, 1x and 2x its value in `config`.
    pub fn spread(config: &ScenarioConfig) -> Self {
        let k = Knobs::of(config);
        let three = |v: f64| vec![0.5 * v, v, 2.0 * v];
        CalibrationGrid {
            vrm_resistance_mohm: three(k.vrm_resistance_mohm),
            vrm_inductance_nh: three(k.vrm_inductance_nh),
            package_segment_inductance_ph: three(k.package_segment_inductance_ph),
            board_inductance_nh: three(k.board_inductance_nh),
        }
    }

    pub fn points(&self) -> Vec<Knobs> {
        let mut out = Vec::new();
        for &r in &self.vrm_resistance_mohm {
            for &l in &self.vrm_inductance_nh {
                for &p in &self.package_segment_inductance_ph {
                    for &b in &self.board_inductance_nh {
                        out.push(Knobs {
                            vrm_resistance_mohm: r,
                            vrm_inductance_nh: l,
                            package_segment_inductance_ph: p,
                            board_inductance_nh: b,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTargets {
    pub backside_psn_mv: f64,
    pub chip_on_vrm_psn_mv: f64,
    /// Four versus one on-package regulator, as a fraction.
    pub psn_improvement_4_vs_1: f64,
    /// Stacked versus four on-package regulators, DC.
    pub ir_improvement_3d_vs_4: f64,
    /// Stacked versus backside, DC.
    pub ir_improvement_3d_vs_backside: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            backside_psn_mv: 82.64,
            chip_on_vrm_psn_mv: 58.8,
            psn_improvement_4_vs_1: 0.2445,
            ir_improvement_3d_vs_4: 0.24,
            ir_improvement_3d_vs_backside: 0.159,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Tiles per side; coarser than the default grid to keep the search fast.
    pub tiles: usize,
    pub t_end_ns: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            tiles: 20,
            t_end_ns: 20.0,
        }
    }
}

/// Max IR drop and max PSN in mV for one benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkMetrics {
    pub benchmark: Benchmark,
    pub max_ir_drop_mv: f64,
    pub max_psn_mv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPoint {
    pub knobs: Knobs,
    /// In [`Benchmark::ALL`] order.
    pub metrics: Vec<BenchmarkMetrics>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    /// In grid order.
    pub points: Vec<CalibrationPoint>,
    pub best: usize,
}

impl CalibrationResult {
    pub fn best(&self) -> &CalibrationPoint {
        &self.points[self.best]
    }
}

/// Penalty per adjacent pair out of order.
const ORDER_PENALTY: f64 = 10.0;

/// Sum of squared normalized errors plus the ordering penalty. PSN levels
/// are normalized by a quarter of the target; improvements by 10 points.
pub fn objective(metrics: &[BenchmarkMetrics], targets: &CalibrationTargets) -> f64 {
    let get = |b: Benchmark| metrics.iter().find(|m| m.benchmark == b).copied().expect("all benchmarks evaluated");
    let one = get(Benchmark::OnPackage1);
    let four = get(Benchmark::OnPackage4);
    let bs = get(Benchmark::Backside);
    let d3 = get(Benchmark::ChipOnVrm3d);

    let level = |x: f64, t: f64| ((x - t) / (0.25 * t)).powi(2);
    let ratio = |x: f64, t: f64| ((x - t) / 0.10).powi(2);
    let mut f = level(bs.max_psn_mv, targets.backside_psn_mv)
        + level(d3.max_psn_mv, targets.chip_on_vrm_psn_mv)
        + ratio(improvement(one.max_psn_mv, four.max_psn_mv), targets.psn_improvement_4_vs_1)
        + ratio(improvement(four.max_ir_drop_mv, d3.max_ir_drop_mv), targets.ir_improvement_3d_vs_4)
        + ratio(improvement(bs.max_ir_drop_mv, d3.max_ir_drop_mv), targets.ir_improvement_3d_vs_backside);

    // best first: 3D, backside, 4, 2, 1
    let order: Vec<BenchmarkMetrics> = Benchmark::ALL.iter().rev().map(|&b| get(b)).collect();
    for w in order.windows(2) {
        if w[0].max_ir_drop_mv >= w[1].max_ir_drop_mv {
            f += ORDER_PENALTY;
        }
        if w[0].max_psn_mv >= w[1].max_psn_mv {
            f += ORDER_PENALTY;
        }
    }
    f
}

pub fn evaluate_knobs(base: &ScenarioConfig, knobs: &Knobs, options: &CalibrationOptions) -> Result<Vec<BenchmarkMetrics>> {
    let mut base = knobs.apply(base).with_tiles(options.tiles, options.tiles);
    base.transient.t_end_ns = options.t_end_ns;
    Benchmark::ALL
        .iter()
        .map(|&b| {
            let ev = evaluate(&b.apply(&base), true)?;
            Ok(BenchmarkMetrics {
                benchmark: b,
                max_ir_drop_mv: ev.ir.max_mv,
                max_psn_mv: ev.psn.expect("transient requested").max_psn_mv,
            })
        })
        .collect()
}

/// Scores every grid point on all five benchmarks built from `base`.
/// Ties keep the earliest point.
pub fn calibrate(
    base: &ScenarioConfig,
    grid: &CalibrationGrid,
    targets: &CalibrationTargets,
    options: &CalibrationOptions,
) -> Result<CalibrationResult> {
    let mut points = Vec::new();
    let mut best = 0;
    for knobs in grid.points() {
        let metrics = evaluate_knobs(base, &knobs, options)?;
        let f = objective(&metrics, targets);
        if f < points.get(best).map_or(f64::INFINITY, |p: &CalibrationPoint| p.objective) {
            best = points.len();
        }
        points.push(CalibrationPoint {
            knobs,
            metrics,
            objective: f,
        });
    }
    Ok(CalibrationResult { points, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(ir: [f64; 5], psn: [f64; 5]) -> Vec<BenchmarkMetrics> {
        Benchmark::ALL
            .iter()
            .enumerate()
            .map(|(k, &b)| BenchmarkMetrics {
                benchmark: b,
                max_ir_drop_mv: ir[k],
                max_psn_mv: psn[k],
            })
            .collect()
    }

    #[test]
    fn exact_targets_score_zero() {
        let t = CalibrationTargets::default();
        // 4V = 100 so the ratios land on the targets exactly
        let d3 = 100.0 * (1.0 - t.ir_improvement_3d_vs_4);
        let bs_ir = d3 / (1.0 - t.ir_improvement_3d_vs_backside);
        let one = 100.0 / (1.0 - t.psn_improvement_4_vs_1);
        let m = metrics(
            [200.0, 150.0, 100.0, bs_ir, d3],
            [one, 100.0 + 0.5 * (one - 100.0), 100.0, t.backside_psn_mv, t.chip_on_vrm_psn_mv],
        );
        assert!(objective(&m, &t) < 1e-20);
    }

    #[test]
    fn each_inversion_costs_the_penalty() {
        let t = CalibrationTargets::default();
        let good = metrics([5.0, 4.0, 3.0, 2.0, 1.0], [5.0, 4.0, 3.0, 2.0, 1.0]);
        let swapped = metrics([5.0, 4.0, 3.0, 2.0, 1.0], [5.0, 3.0, 4.0, 2.0, 1.0]);
        let d = objective(&swapped, &t) - objective(&good, &t);
        // one pair inverted; the 4 vs 1 ratio term moves too
        let ratio_shift = ((0.2 - t.psn_improvement_4_vs_1) / 0.1).powi(2) - ((0.4 - t.psn_improvement_4_vs_1) / 0.1).powi(2);
        assert!((d - ORDER_PENALTY - ratio_shift).abs() < 1e-9, "{d}");
    }

    #[test]
    fn grid_product_order() {
        let c = ScenarioConfig::default();
        let g = CalibrationGrid::spread(&c);
        let p = g.points();
        assert_eq!(p.len(), 81);
        assert_eq!(p[0].board_inductance_nh, 0.5 * c.board.lumped_inductance_nh);
        assert_eq!(p[1].board_inductance_nh, c.board.lumped_inductance_nh);
        assert_eq!(p[40], Knobs::of(&c));
        assert_eq!(CalibrationGrid::around(&c).points(), vec![Knobs::of(&c)]);
    }
}
