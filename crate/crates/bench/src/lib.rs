// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the solver benchmarks.

use pdn_core::{assemble_netlist, Benchmark, Netlist, ScenarioConfig};

/// Tile counts per side the benchmarks sweep over.
pub const SIZES: [usize; 3] = [20, 50, 100];

/// A benchmark scenario at `tiles`×`tiles` with a transient of `t_end_ns`.
pub fn scenario(which: Benchmark, tiles: usize, t_end_ns: f64) -> ScenarioConfig {
    let mut c = ScenarioConfig::benchmark(which).with_tiles(tiles, tiles);
    c.transient.t_end_ns = t_end_ns;
    c
}

pub fn netlist(config: &ScenarioConfig) -> Netlist {
    assemble_netlist(config).expect("shipped benchmarks assemble")
}
