// SPDX-License-Identifier: Apache-2.0

//! Closed-form lumped values for wires, vias, bumps and sheets.

use std::f64::consts::PI;

use crate::config::{BumpSpec, PackageSpec, ViaSpec, WireSpec};

const UM: f64 = 1e-6;
const MM: f64 = 1e-3;
pub const PH: f64 = 1e-12;
pub const NH: f64 = 1e-9;
pub const MOHM: f64 = 1e-3;

/// Resistance of one wire of `length_um`: ρ·L / (t·w).
pub fn wire_resistance(wire: &WireSpec, length_um: f64) -> f64 {
    wire.resistivity_ohm_m * (length_um * UM) / (wire.thickness_um * UM * wire.width_um * UM)
}

/// Resistance of one via site: the vias of a site conduct in parallel.
pub fn via_resistance(via: &ViaSpec) -> f64 {
    let radius = via.diameter_um * UM / 2.0;
    via.resistivity_ohm_m * (via.height_um * UM) / (PI * radius * radius) / via.count_per_site as f64
}

pub fn via_inductance(via: &ViaSpec) -> f64 {
    via.inductance_per_via_ph * PH / via.count_per_site as f64
}

/// Sheet resistance (Ω/sq) of the package with all layers merged in parallel.
pub fn sheet_resistance(pkg: &PackageSpec) -> f64 {
    pkg.sheet_resistivity_ohm_m / (pkg.merged_thickness_mm() * MM)
}

/// Number of lattice lines at `offset + k·pitch` (k ≥ 0) that fall in
/// `[start, end)`, with every coordinate relative to the lattice origin.
pub fn lattice_count(start: f64, end: f64, pitch: f64, offset: f64) -> usize {
    if end <= start {
        return 0;
    }
    // tolerance keeps points that land on a tile edge from flickering
    let eps = 1e-9 * pitch;
    let first = ((start - offset - eps) / pitch).ceil().max(0.0);
    let last = ((end - offset - eps) / pitch).ceil();
    (last - first).max(0.0) as usize
}

/// Bumps of a regular array (first bump half a pitch in from the origin)
/// whose centres fall in the rectangle `[x0, x1) × [y0, y1)` in µm.
pub fn bumps_in_rect(bump: &BumpSpec, x0: f64, x1: f64, y0: f64, y1: f64) -> usize {
    let p = bump.pitch_um;
    lattice_count(x0, x1, p, p / 2.0) * lattice_count(y0, y1, p, p / 2.0)
}

/// Expected bump count over an area when the array does not align with
/// the cell (continuous density).
pub fn bumps_in_area(bump: &BumpSpec, area_um2: f64) -> f64 {
    area_um2 / (bump.pitch_um * bump.pitch_um)
}

/// R and L of `count` identical bumps in parallel.
pub fn bump_parallel(bump: &BumpSpec, count: f64) -> (f64, f64) {
    (
        bump.resistance_per_bump_mohm * MOHM / count,
        bump.inductance_per_bump_ph * PH / count,
    )
}
