// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::ChipSpec;

/// Rectangular high-power block in normalized chip coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotspotBlock {
    pub center_x: f64,
    pub center_y: f64,
    pub width: f64,
    pub height: f64,
}

impl HotspotBlock {
    fn overlap(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        let bx0 = self.center_x - self.width / 2.0;
        let bx1 = self.center_x + self.width / 2.0;
        let by0 = self.center_y - self.height / 2.0;
        let by1 = self.center_y + self.height / 2.0;
        let ox = (x1.min(bx1) - x0.max(bx0)).max(0.0);
        let oy = (y1.min(by1) - y0.max(by0)).max(0.0);
        ox * oy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMapKind {
    Uniform,
    Hotspot,
}

impl std::str::FromStr for PowerMapKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(PowerMapKind::Uniform),
            "hotspot" => Ok(PowerMapKind::Hotspot),
            other => Err(format!("unknown power map `{other}` (expected uniform|hotspot)")),
        }
    }
}

/// How the per-tile load is specified in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PowerMapSpec {
    Uniform,
    /// Background density with blocks at `ratio` times the background.
    Hotspot {
        ratio: f64,
        blocks: Vec<HotspotBlock>,
    },
    /// Explicit row-major densities (x fastest), one per tile.
    Grid {
        nx: usize,
        ny: usize,
        density_a_per_mm2: Vec<f64>,
    },
}

impl PowerMapSpec {
    pub fn default_hotspot() -> Self {
        PowerMapSpec::Hotspot {
            ratio: 3.0,
            blocks: vec![
                HotspotBlock {
                    center_x: 0.3,
                    center_y: 0.3,
                    width: 0.2,
                    height: 0.2,
                },
                HotspotBlock {
                    center_x: 0.7,
                    center_y: 0.7,
                    width: 0.2,
                    height: 0.2,
                },
            ],
        }
    }
}

/// Current density per tile (A/mm² at the nominal supply voltage).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    pub nx: usize,
    pub ny: usize,
    pub tile_area_mm2: f64,
    pub density_a_per_mm2: Vec<f64>,
}

impl PowerMap {
    pub fn resolve(spec: &PowerMapSpec, chip: &ChipSpec) -> Self {
        let nx = chip.tile_count_x;
        let ny = chip.tile_count_y;
        let tile_area = chip.tile_area_mm2();
        let total_current = chip.total_power_w / chip.supply_voltage_v;
        let density = match spec {
            PowerMapSpec::Uniform => vec![total_current / chip.area_mm2(); nx * ny],
            PowerMapSpec::Hotspot { ratio, blocks } => {
                let dx = 1.0 / nx as f64;
                let dy = 1.0 / ny as f64;
                let mut weight = Vec::with_capacity(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        let (x0, y0) = (i as f64 * dx, j as f64 * dy);
                        let covered: f64 = blocks
                            .iter()
                            .map(|b| b.overlap(x0, x0 + dx, y0, y0 + dy))
                            .sum();
                        let frac = (covered / (dx * dy)).min(1.0);
                        weight.push(1.0 + (ratio - 1.0) * frac);
                    }
                }
                let sum: f64 = weight.iter().sum();
                let scale = total_current / (sum * tile_area);
                weight.into_iter().map(|w| w * scale).collect()
            }
            PowerMapSpec::Grid {
                density_a_per_mm2, ..
            } => density_a_per_mm2.clone(),
        };
        PowerMap {
            nx,
            ny,
            tile_area_mm2: tile_area,
            density_a_per_mm2: density,
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn density(&self, i: usize, j: usize) -> f64 {
        self.density_a_per_mm2[self.index(i, j)]
    }

    /// Load current of one tile in amperes.
    pub fn tile_current(&self, i: usize, j: usize) -> f64 {
        self.density(i, j) * self.tile_area_mm2
    }

    pub fn total_current(&self) -> f64 {
        self.density_a_per_mm2.iter().sum::<f64>() * self.tile_area_mm2
    }

    pub fn total_power(&self, supply_voltage_v: f64) -> f64 {
        self.total_current() * supply_voltage_v
    }
}

/// Built-in uniform or two-block hotspot map for `chip`.
pub fn builtin_power_map(kind: PowerMapKind, chip: &ChipSpec) -> PowerMap {
    let spec = match kind {
        PowerMapKind::Uniform => PowerMapSpec::Uniform,
        PowerMapKind::Hotspot => PowerMapSpec::default_hotspot(),
    };
    PowerMap::resolve(&spec, chip)
}
