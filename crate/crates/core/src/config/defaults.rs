// SPDX-License-Identifier: Apache-2.0

//! Shipped default scenario values. Table-derived values (chip outline,
//! supply, power, on-die wire geometry, TSV resistivity, package layer stack,
//! C4 geometry, on-die decap density) are fixed; the remaining parasitics are
//! calibrated knobs.

use serde::{Deserialize, Serialize};

use super::*;

/// The five benchmark topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    OnPackage1,
    OnPackage2,
    OnPackage4,
    Backside,
    ChipOnVrm3d,
}

impl Benchmark {
    pub const ALL: [Benchmark; 5] = [
        Benchmark::OnPackage1,
        Benchmark::OnPackage2,
        Benchmark::OnPackage4,
        Benchmark::Backside,
        Benchmark::ChipOnVrm3d,
    ];

    pub fn placement(self) -> VrmPlacement {
        match self {
            Benchmark::OnPackage1 => VrmPlacement::on_package(1, 1.0),
            Benchmark::OnPackage2 => VrmPlacement::on_package(2, 1.0),
            Benchmark::OnPackage4 => VrmPlacement::on_package(4, 1.0),
            Benchmark::Backside => VrmPlacement::backside(),
            Benchmark::ChipOnVrm3d => VrmPlacement::chip_on_vrm_3d(),
        }
    }

    /// `base` with this benchmark's VRM placement and label.
    pub fn apply(self, base: &ScenarioConfig) -> ScenarioConfig {
        ScenarioConfig {
            label: self.name().to_string(),
            placement: self.placement(),
            ..base.clone()
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::OnPackage1 => "on_package_1",
            Benchmark::OnPackage2 => "on_package_2",
            Benchmark::OnPackage4 => "on_package_4",
            Benchmark::Backside => "backside",
            Benchmark::ChipOnVrm3d => "chip_on_vrm_3d",
        }
    }
}

impl std::str::FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Benchmark::ALL.iter().map(|b| b.name()).collect();
                format!("unknown benchmark `{s}` (expected one of {})", names.join(", "))
            })
    }
}

impl std::fmt::Display for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

const COPPER_OHM_M: f64 = 17.1e-9;

fn c4_bump() -> BumpSpec {
    BumpSpec {
        diameter_um: 40.0,
        pitch_um: 100.0,
        resistance_per_bump_mohm: 5.0,
        inductance_per_bump_ph: 20.0,
    }
}

fn vrm_bump() -> BumpSpec {
    BumpSpec {
        diameter_um: 100.0,
        pitch_um: 200.0,
        resistance_per_bump_mohm: 2.0,
        inductance_per_bump_ph: 50.0,
    }
}

fn default_chip() -> ChipSpec {
    ChipSpec {
        width_mm: 10.0,
        height_mm: 10.0,
        supply_voltage_v: 1.0,
        total_power_w: 100.0,
        onchip_wire: WireSpec {
            resistivity_ohm_m: COPPER_OHM_M,
            thickness_um: 5.0,
            width_um: 3.3,
            pitch_um: 30.0,
        },
        c4_bump: c4_bump(),
        tile_count_x: 50,
        tile_count_y: 50,
    }
}

fn default_package() -> PackageSpec {
    PackageSpec {
        metal_layer_count: 10,
        power_layer_fraction: 0.5,
        layer_thickness_mm: 0.010,
        width_mm: 35.0,
        height_mm: 35.0,
        sheet_resistivity_ohm_m: COPPER_OHM_M,
        segment_inductance_ph: 3.0,
        solder_bump: BumpSpec {
            diameter_um: 400.0,
            pitch_um: 800.0,
            resistance_per_bump_mohm: 1.0,
            inductance_per_bump_ph: 100.0,
        },
        through_package_via: Some(ViaSpec {
            resistivity_ohm_m: COPPER_OHM_M,
            height_um: 400.0,
            diameter_um: 100.0,
            inductance_per_via_ph: 100.0,
            count_per_site: 1,
        }),
    }
}

fn default_decaps() -> DecapPolicy {
    let mut package_decaps = Vec::with_capacity(16);
    for j in 0..4 {
        for i in 0..4 {
            package_decaps.push(DiscreteDecap {
                capacitance_uf: 1.0,
                esr_mohm: 10.0,
                esl_nh: 0.1,
                site: DecapSite {
                    x: 0.125 + 0.25 * i as f64,
                    y: 0.125 + 0.25 * j as f64,
                },
            });
        }
    }
    let board_decaps = (0..10)
        .map(|k| DiscreteDecap {
            capacitance_uf: 100.0,
            esr_mohm: 1.0,
            esl_nh: 1.0,
            site: DecapSite {
                x: (2 * k + 1) as f64 / 20.0,
                y: 0.5,
            },
        })
        .collect();
    DecapPolicy {
        onchip_density_nf_per_mm2: 5.3,
        onchip_esr_ohm_mm2: 0.01,
        package_decaps,
        board_decaps,
    }
}

impl VrmPlacement {
    pub fn on_package(count: u32, gap_mm: f64) -> Self {
        VrmPlacement::OnPackage {
            count,
            gap_mm,
            vrm_depth_mm: 2.0,
            vrm_bump: vrm_bump(),
        }
    }

    pub fn backside() -> Self {
        VrmPlacement::BacksidePackage {
            vrm_bump: vrm_bump(),
            footprint_mm: 7.0,
        }
    }

    pub fn chip_on_vrm_3d() -> Self {
        VrmPlacement::ChipOnVrm3d {
            microbump: BumpSpec {
                diameter_um: 40.0,
                pitch_um: 100.0,
                resistance_per_bump_mohm: 5.0,
                inductance_per_bump_ph: 10.0,
            },
            vrm_tsv: ViaSpec {
                resistivity_ohm_m: 80e-9,
                height_um: 50.0,
                diameter_um: 10.0,
                inductance_per_via_ph: 20.0,
                count_per_site: 4,
            },
        }
    }
}

impl ScenarioConfig {
    /// Shipped defaults for one benchmark with the hotspot power map.
    pub fn benchmark(which: Benchmark) -> Self {
        let placement = which.placement();
        ScenarioConfig {
            label: which.name().to_string(),
            chip: default_chip(),
            package: default_package(),
            board: BoardSpec {
                lumped_resistance_mohm: 0.2,
                lumped_inductance_nh: 10.0,
            },
            vrm: VrmSpec {
                series_resistance_mohm: 0.016,
                series_inductance_nh: 0.00036,
                output_voltage_v: 1.0,
            },
            placement,
            decaps: default_decaps(),
            power_map: PowerMapSpec::default_hotspot(),
            transient: TransientSpec {
                step: StepTarget::Load,
                rise_time_ns: 1.0,
                dt_ps: 10.0,
                t_end_ns: 200.0,
                method: Integrator::Trapezoidal,
            },
        }
    }

    pub fn with_power_map(mut self, kind: PowerMapKind) -> Self {
        self.power_map = match kind {
            PowerMapKind::Uniform => PowerMapSpec::Uniform,
            PowerMapKind::Hotspot => PowerMapSpec::default_hotspot(),
        };
        self
    }

    /// Scales every load by `k`, keeping the map shape.
    pub fn with_power_scale(mut self, k: f64) -> Self {
        self.chip.total_power_w *= k;
        if let PowerMapSpec::Grid { density_a_per_mm2, .. } = &mut self.power_map {
            for d in density_a_per_mm2.iter_mut() {
                *d *= k;
            }
        }
        self
    }

    pub fn with_tiles(mut self, nx: usize, ny: usize) -> Self {
        self.chip.tile_count_x = nx;
        self.chip.tile_count_y = ny;
        self
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig::benchmark(Benchmark::ChipOnVrm3d)
    }
}
