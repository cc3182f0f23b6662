// SPDX-License-Identifier: Apache-2.0

//! Scenario configuration: every physical and electrical parameter of one
//! benchmark, with validation and the shipped defaults.
//!
//! All quantities carry their unit in the field name. Lengths on the die are
//! in micrometres, package/chip outlines in millimetres.

mod defaults;
mod power_map;
mod validate;

use serde::{Deserialize, Serialize};

pub use defaults::Benchmark;
pub use power_map::{builtin_power_map, HotspotBlock, PowerMap, PowerMapKind, PowerMapSpec};
pub use validate::validate_config;

/// Metal wire family of the on-chip grid (one direction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireSpec {
    pub resistivity_ohm_m: f64,
    pub thickness_um: f64,
    pub width_um: f64,
    pub pitch_um: f64,
}

/// Vertical via (TSV or through-package via); `count_per_site` vias share one bump site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViaSpec {
    pub resistivity_ohm_m: f64,
    pub height_um: f64,
    pub diameter_um: f64,
    pub inductance_per_via_ph: f64,
    pub count_per_site: u32,
}

/// Regular bump array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub diameter_um: f64,
    pub pitch_um: f64,
    pub resistance_per_bump_mohm: f64,
    pub inductance_per_bump_ph: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChipSpec {
    pub width_mm: f64,
    pub height_mm: f64,
    pub supply_voltage_v: f64,
    pub total_power_w: f64,
    pub onchip_wire: WireSpec,
    /// Chip-to-package (C4) bumps.
    pub c4_bump: BumpSpec,
    pub tile_count_x: usize,
    pub tile_count_y: usize,
}

impl ChipSpec {
    pub fn area_mm2(&self) -> f64 {
        self.width_mm * self.height_mm
    }

    pub fn tile_width_mm(&self) -> f64 {
        self.width_mm / self.tile_count_x as f64
    }

    pub fn tile_height_mm(&self) -> f64 {
        self.height_mm / self.tile_count_y as f64
    }

    pub fn tile_area_mm2(&self) -> f64 {
        self.tile_width_mm() * self.tile_height_mm()
    }

    pub fn tile_count(&self) -> usize {
        self.tile_count_x * self.tile_count_y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackageSpec {
    pub metal_layer_count: u32,
    /// Share of the layers that carry the supply net; the rest are ground.
    pub power_layer_fraction: f64,
    pub layer_thickness_mm: f64,
    pub width_mm: f64,
    pub height_mm: f64,
    pub sheet_resistivity_ohm_m: f64,
    /// Plane inductance per square of the merged power sheet.
    pub segment_inductance_ph: f64,
    /// Package-to-board (BGA) bumps.
    pub solder_bump: BumpSpec,
    pub through_package_via: Option<ViaSpec>,
}

impl PackageSpec {
    /// All supply layers merged in parallel into one sheet.
    pub fn merged_thickness_mm(&self) -> f64 {
        self.metal_layer_count as f64 * self.power_layer_fraction * self.layer_thickness_mm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardSpec {
    pub lumped_resistance_mohm: f64,
    pub lumped_inductance_nh: f64,
}

/// Ideal regulator output behind a series R-L. The values describe the
/// whole regulator; with several VRM dies each die carries an equal share
/// of the load current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VrmSpec {
    pub series_resistance_mohm: f64,
    pub series_inductance_nh: f64,
    pub output_voltage_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VrmPlacement {
    /// VRM dies beside the chip on the package top. One VRM sits on the
    /// west side, two on west and east, four on all sides. Each die spans
    /// the adjacent chip edge and is `vrm_depth_mm` deep.
    OnPackage {
        count: u32,
        gap_mm: f64,
        vrm_depth_mm: f64,
        /// Bumps between each VRM die and the package.
        vrm_bump: BumpSpec,
    },
    /// Square VRM die on the package underside, centred beneath the chip;
    /// one through-package via site per VRM bump.
    BacksidePackage { vrm_bump: BumpSpec, footprint_mm: f64 },
    /// Chip stacked on the VRM die: TSVs through the VRM die, microbumps
    /// between the dies.
    ChipOnVrm3d { microbump: BumpSpec, vrm_tsv: ViaSpec },
}

impl VrmPlacement {
    pub fn vrm_count(&self) -> u32 {
        match self {
            VrmPlacement::OnPackage { count, .. } => *count,
            _ => 1,
        }
    }

    pub fn short_name(&self) -> String {
        match self {
            VrmPlacement::OnPackage { count, .. } => format!("on_package_{count}"),
            VrmPlacement::BacksidePackage { .. } => "backside".to_string(),
            VrmPlacement::ChipOnVrm3d { .. } => "chip_on_vrm_3d".to_string(),
        }
    }
}

/// Normalized position over the chip footprint (0..=1 on each axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecapSite {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteDecap {
    pub capacitance_uf: f64,
    pub esr_mohm: f64,
    pub esl_nh: f64,
    pub site: DecapSite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecapPolicy {
    pub onchip_density_nf_per_mm2: f64,
    /// Area-specific series resistance of the on-die decap; a tile of area A
    /// gets ESR = value / A.
    pub onchip_esr_ohm_mm2: f64,
    /// Sites are over the chip footprint projected onto the package.
    pub package_decaps: Vec<DiscreteDecap>,
    /// The board is lumped; sites are informational.
    pub board_decaps: Vec<DiscreteDecap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepTarget {
    /// Load currents ramp 0 to full while the regulators hold their output;
    /// the network starts from its no-load operating point.
    Load,
    /// Regulator outputs ramp 0 V to nominal against constant loads from a
    /// cold (all-zero) start.
    Supply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[serde(rename = "trap")]
    Trapezoidal,
    #[serde(rename = "be")]
    BackwardEuler,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Trapezoidal => "trap",
            Integrator::BackwardEuler => "be",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientSpec {
    pub step: StepTarget,
    pub rise_time_ns: f64,
    pub dt_ps: f64,
    pub t_end_ns: f64,
    pub method: Integrator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub label: String,
    pub chip: ChipSpec,
    pub package: PackageSpec,
    pub board: BoardSpec,
    pub vrm: VrmSpec,
    pub placement: VrmPlacement,
    pub decaps: DecapPolicy,
    pub power_map: PowerMapSpec,
    pub transient: TransientSpec,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Resolves the power map onto the tile grid.
    pub fn resolved_power_map(&self) -> PowerMap {
        PowerMap::resolve(&self.power_map, &self.chip)
    }
}

/// Total load current drawn at the nominal supply voltage.
pub fn total_load_current(config: &ScenarioConfig) -> f64 {
    config.chip.total_power_w / config.chip.supply_voltage_v
}
