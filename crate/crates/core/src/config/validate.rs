// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::error::{Error, Result, Violation};

/// Relative power mismatch below which a grid map is left untouched, so
/// that validating twice is a no-op.
const RENORMALIZE_SLACK: f64 = 1e-12;

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, path: impl Into<String>, constraint: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            constraint: constraint.into(),
        });
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.fail(path, "must be > 0");
        }
    }

    fn non_negative(&mut self, path: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.fail(path, "must be >= 0");
        }
    }

    fn unit_interval(&mut self, path: &str, v: f64) {
        if !(0.0..=1.0).contains(&v) {
            self.fail(path, "must be within [0, 1]");
        }
    }

    fn wire(&mut self, path: &str, w: &WireSpec) {
        self.positive(&format!("{path}.resistivity_ohm_m"), w.resistivity_ohm_m);
        self.positive(&format!("{path}.thickness_um"), w.thickness_um);
        self.positive(&format!("{path}.width_um"), w.width_um);
        self.positive(&format!("{path}.pitch_um"), w.pitch_um);
        if w.width_um >= w.pitch_um {
            self.fail(format!("{path}.width_um"), "must be < pitch_um");
        }
    }

    fn via(&mut self, path: &str, v: &ViaSpec) {
        self.positive(&format!("{path}.resistivity_ohm_m"), v.resistivity_ohm_m);
        self.positive(&format!("{path}.height_um"), v.height_um);
        self.positive(&format!("{path}.diameter_um"), v.diameter_um);
        self.non_negative(&format!("{path}.inductance_per_via_ph"), v.inductance_per_via_ph);
        if v.count_per_site < 1 {
            self.fail(format!("{path}.count_per_site"), "must be >= 1");
        }
    }

    fn bump(&mut self, path: &str, b: &BumpSpec) {
        self.positive(&format!("{path}.diameter_um"), b.diameter_um);
        self.positive(&format!("{path}.pitch_um"), b.pitch_um);
        self.positive(
            &format!("{path}.resistance_per_bump_mohm"),
            b.resistance_per_bump_mohm,
        );
        self.positive(
            &format!("{path}.inductance_per_bump_ph"),
            b.inductance_per_bump_ph,
        );
        if b.diameter_um >= b.pitch_um {
            self.fail(format!("{path}.diameter_um"), "must be < pitch_um");
        }
    }

    fn decap(&mut self, path: &str, d: &DiscreteDecap) {
        self.positive(&format!("{path}.capacitance_uf"), d.capacitance_uf);
        self.non_negative(&format!("{path}.esr_mohm"), d.esr_mohm);
        self.non_negative(&format!("{path}.esl_nh"), d.esl_nh);
        self.unit_interval(&format!("{path}.site.x"), d.site.x);
        self.unit_interval(&format!("{path}.site.y"), d.site.y);
    }
}

/// Checks every invariant of `config` and returns a copy whose grid power
/// map is renormalized to the chip's total power.
pub fn validate_config(config: &ScenarioConfig) -> Result<ScenarioConfig> {
    let mut c = Checker {
        violations: Vec::new(),
    };

    let chip = &config.chip;
    c.positive("chip.width_mm", chip.width_mm);
    c.positive("chip.height_mm", chip.height_mm);
    c.positive("chip.supply_voltage_v", chip.supply_voltage_v);
    c.non_negative("chip.total_power_w", chip.total_power_w);
    c.wire("chip.onchip_wire", &chip.onchip_wire);
    c.bump("chip.c4_bump", &chip.c4_bump);
    if chip.tile_count_x < 2 {
        c.fail("chip.tile_count_x", "must be >= 2");
    }
    if chip.tile_count_y < 2 {
        c.fail("chip.tile_count_y", "must be >= 2");
    }
    // the C4 array must tile the die footprint to within one bump
    for (path, extent_mm) in [
        ("chip.width_mm", chip.width_mm),
        ("chip.height_mm", chip.height_mm),
    ] {
        let pitch_mm = chip.c4_bump.pitch_um * 1e-3;
        if pitch_mm > 0.0 && extent_mm > 0.0 {
            let n = extent_mm / pitch_mm;
            if n < 1.0 || (n - n.round()).abs() > 1e-6 * n.max(1.0) {
                c.fail(path, "must be a whole multiple of chip.c4_bump.pitch_um");
            }
        }
    }

    let pkg = &config.package;
    if pkg.metal_layer_count < 1 {
        c.fail("package.metal_layer_count", "must be >= 1");
    }
    if !(pkg.power_layer_fraction > 0.0 && pkg.power_layer_fraction <= 1.0) {
        c.fail("package.power_layer_fraction", "must be in (0, 1]");
    }
    c.positive("package.layer_thickness_mm", pkg.layer_thickness_mm);
    c.positive("package.width_mm", pkg.width_mm);
    c.positive("package.height_mm", pkg.height_mm);
    c.positive("package.sheet_resistivity_ohm_m", pkg.sheet_resistivity_ohm_m);
    c.non_negative("package.segment_inductance_ph", pkg.segment_inductance_ph);
    c.bump("package.solder_bump", &pkg.solder_bump);
    if let Some(v) = &pkg.through_package_via {
        c.via("package.through_package_via", v);
    }
    if pkg.width_mm < chip.width_mm || pkg.height_mm < chip.height_mm {
        c.fail("package.width_mm", "package must be at least as large as the chip");
    }

    c.non_negative("board.lumped_resistance_mohm", config.board.lumped_resistance_mohm);
    c.non_negative("board.lumped_inductance_nh", config.board.lumped_inductance_nh);

    c.non_negative("vrm.series_resistance_mohm", config.vrm.series_resistance_mohm);
    c.non_negative("vrm.series_inductance_nh", config.vrm.series_inductance_nh);
    c.positive("vrm.output_voltage_v", config.vrm.output_voltage_v);

    match &config.placement {
        VrmPlacement::OnPackage {
            count,
            gap_mm,
            vrm_depth_mm,
            vrm_bump,
        } => {
            if ![1, 2, 4].contains(count) {
                c.fail("placement.count", "must be one of 1, 2, 4");
            }
            c.positive("placement.gap_mm", *gap_mm);
            c.positive("placement.vrm_depth_mm", *vrm_depth_mm);
            c.bump("placement.vrm_bump", vrm_bump);
            let reach_x = chip.width_mm / 2.0 + gap_mm + vrm_depth_mm;
            let reach_y = chip.height_mm / 2.0 + gap_mm + vrm_depth_mm;
            if reach_x > pkg.width_mm / 2.0 || reach_y > pkg.height_mm / 2.0 {
                c.fail(
                    "placement.gap_mm",
                    "VRM dies at this gap and depth do not fit on the package",
                );
            }
        }
        VrmPlacement::BacksidePackage { vrm_bump, footprint_mm } => {
            c.bump("placement.vrm_bump", vrm_bump);
            c.positive("placement.footprint_mm", *footprint_mm);
            if *footprint_mm > chip.width_mm.min(chip.height_mm) {
                c.fail("placement.footprint_mm", "VRM die must fit under the chip");
            }
            if pkg.through_package_via.is_none() {
                c.fail(
                    "package.through_package_via",
                    "must be present for a backside-of-package VRM",
                );
            }
        }
        VrmPlacement::ChipOnVrm3d { microbump, vrm_tsv } => {
            c.bump("placement.microbump", microbump);
            c.via("placement.vrm_tsv", vrm_tsv);
        }
    }

    let d = &config.decaps;
    c.non_negative("decaps.onchip_density_nf_per_mm2", d.onchip_density_nf_per_mm2);
    c.non_negative("decaps.onchip_esr_ohm_mm2", d.onchip_esr_ohm_mm2);
    for (k, cap) in d.package_decaps.iter().enumerate() {
        c.decap(&format!("decaps.package_decaps[{k}]"), cap);
    }
    for (k, cap) in d.board_decaps.iter().enumerate() {
        c.decap(&format!("decaps.board_decaps[{k}]"), cap);
    }

    match &config.power_map {
        PowerMapSpec::Uniform => {}
        PowerMapSpec::Hotspot { ratio, blocks } => {
            if !(*ratio >= 1.0 && ratio.is_finite()) {
                c.fail("power_map.ratio", "must be >= 1");
            }
            for (k, b) in blocks.iter().enumerate() {
                let p = format!("power_map.blocks[{k}]");
                c.positive(&format!("{p}.width"), b.width);
                c.positive(&format!("{p}.height"), b.height);
                if b.center_x - b.width / 2.0 < 0.0
                    || b.center_x + b.width / 2.0 > 1.0
                    || b.center_y - b.height / 2.0 < 0.0
                    || b.center_y + b.height / 2.0 > 1.0
                {
                    c.fail(p, "block must lie within the chip");
                }
            }
        }
        PowerMapSpec::Grid {
            nx,
            ny,
            density_a_per_mm2,
        } => {
            if *nx != chip.tile_count_x || *ny != chip.tile_count_y {
                c.fail("power_map.nx", "grid must match chip.tile_count_x/y");
            }
            if density_a_per_mm2.len() != nx * ny {
                c.fail("power_map.density_a_per_mm2", "length must be nx * ny");
            }
            if density_a_per_mm2.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                c.fail("power_map.density_a_per_mm2", "entries must be >= 0");
            }
        }
    }

    let t = &config.transient;
    c.positive("transient.rise_time_ns", t.rise_time_ns);
    c.positive("transient.dt_ps", t.dt_ps);
    c.positive("transient.t_end_ns", t.t_end_ns);

    if !c.violations.is_empty() {
        return Err(Error::Invalid(c.violations));
    }

    let mut out = config.clone();
    if let PowerMapSpec::Grid {
        density_a_per_mm2, ..
    } = &mut out.power_map
    {
        let v = chip.supply_voltage_v;
        let area = chip.tile_area_mm2();
        let delivered: f64 = density_a_per_mm2.iter().sum::<f64>() * area * v;
        let target = chip.total_power_w;
        if delivered == 0.0 {
            if target > 0.0 {
                return Err(Error::ZeroPowerMap(target));
            }
        } else {
            let factor = target / delivered;
            if (factor - 1.0).abs() > RENORMALIZE_SLACK {
                for d in density_a_per_mm2.iter_mut() {
                    *d *= factor;
                }
            }
        }
    }
    Ok(out)
}
