// SPDX-License-Identifier: Apache-2.0

//! Builds the PDN netlist of a validated scenario.
//!
//! Coordinates are in millimetres with the chip occupying `[0, W] × [0, H]`;
//! the package is centred on the chip. The on-die grid is aggregated into
//! tiles, and every tile has a package node directly beneath it so that
//! the vertical interconnect maps one branch per tile.

use super::parasitics::{
    bump_parallel, bumps_in_area, bumps_in_rect, lattice_count, sheet_resistance, via_inductance,
    via_resistance, wire_resistance, NH, PH,
};
use super::*;
use crate::config::{
    validate_config, ChipSpec, DecapPolicy, DiscreteDecap, PackageSpec, PowerMap, ScenarioConfig,
    VrmPlacement,
};

const MM_TO_UM: f64 = 1000.0;

/// Package plane nodes on a rectilinear, non-uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PackageGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub nodes: Vec<NodeId>,
    /// Package line index of chip tile column 0 / row 0.
    pub chip_offset: (usize, usize),
}

impl PackageGrid {
    pub fn node(&self, ix: usize, iy: usize) -> NodeId {
        self.nodes[iy * self.xs.len() + ix]
    }

    pub fn under_tile(&self, i: usize, j: usize) -> NodeId {
        self.node(i + self.chip_offset.0, j + self.chip_offset.1)
    }

    pub fn nearest(&self, x: f64, y: f64) -> NodeId {
        let ix = nearest_index(&self.xs, x);
        let iy = nearest_index(&self.ys, y);
        self.node(ix, iy)
    }

    fn cell_extent(lines: &[f64], k: usize) -> f64 {
        let lo = if k == 0 { lines[0] } else { 0.5 * (lines[k - 1] + lines[k]) };
        let hi = if k + 1 == lines.len() {
            lines[k]
        } else {
            0.5 * (lines[k] + lines[k + 1])
        };
        hi - lo
    }
}

fn nearest_index(lines: &[f64], v: f64) -> usize {
    let mut best = 0;
    for (k, x) in lines.iter().enumerate() {
        if (x - v).abs() < (lines[best] - v).abs() {
            best = k;
        }
    }
    best
}

fn grid_lines(chip_extent: f64, tiles: usize, pkg_extent: f64, attach_gap: Option<f64>) -> (Vec<f64>, usize) {
    let margin = (pkg_extent - chip_extent) / 2.0;
    let step = chip_extent / tiles as f64;
    let mut lines = Vec::with_capacity(tiles + 4);
    if margin > 0.0 {
        lines.push(-margin);
    }
    if let Some(gap) = attach_gap {
        if gap < margin {
            lines.push(-gap);
        }
    }
    let offset = lines.len();
    lines.extend((0..tiles).map(|k| (k as f64 + 0.5) * step));
    if let Some(gap) = attach_gap {
        if gap < margin {
            lines.push(chip_extent + gap);
        }
    }
    if margin > 0.0 {
        lines.push(chip_extent + margin);
    }
    (lines, offset)
}

fn add_chip_grid(net: &mut Netlist, chip: &ChipSpec, decaps: &DecapPolicy, power: &PowerMap) -> TileGrid {
    let (nx, ny) = (chip.tile_count_x, chip.tile_count_y);
    let tw_um = chip.tile_width_mm() * MM_TO_UM;
    let th_um = chip.tile_height_mm() * MM_TO_UM;
    let wire = &chip.onchip_wire;
    let offset = wire.pitch_um / 2.0;

    let mut nodes = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            nodes.push(net.add_node(Tier::Chip, Site::Grid(i, j), format!("chip[{i},{j}]")));
        }
    }
    let grid = TileGrid { nx, ny, nodes };

    // x-directed wires crossing the boundary between (i, j) and (i+1, j)
    for j in 0..ny {
        let wires = lattice_count(j as f64 * th_um, (j + 1) as f64 * th_um, wire.pitch_um, offset);
        if wires == 0 {
            continue;
        }
        let r = wire_resistance(wire, tw_um) / wires as f64;
        for i in 0..nx - 1 {
            net.resistor(grid.node(i, j), grid.node(i + 1, j), r, grid_label(Tier::Chip, "grid_h", i, j));
        }
    }
    for i in 0..nx {
        let wires = lattice_count(i as f64 * tw_um, (i + 1) as f64 * tw_um, wire.pitch_um, offset);
        if wires == 0 {
            continue;
        }
        let r = wire_resistance(wire, th_um) / wires as f64;
        for j in 0..ny - 1 {
            net.resistor(grid.node(i, j), grid.node(i, j + 1), r, grid_label(Tier::Chip, "grid_v", i, j));
        }
    }

    let tile_area = chip.tile_area_mm2();
    let cap = decaps.onchip_density_nf_per_mm2 * tile_area * NH;
    let esr = decaps.onchip_esr_ohm_mm2 / tile_area;
    for j in 0..ny {
        for i in 0..nx {
            let tile = grid.node(i, j);
            net.add(
                ElementKind::CurrentSource {
                    amps: power.tile_current(i, j),
                    drive: Drive::Load,
                },
                tile,
                NodeId::GROUND,
                grid_label(Tier::Chip, "load", i, j),
            );
            if cap > 0.0 {
                let plate = if esr > 0.0 {
                    let mid = net.add_node(Tier::Chip, Site::Grid(i, j), format!("chip.decap_mid[{i},{j}]"));
                    net.resistor(tile, mid, esr, grid_label(Tier::Chip, "decap_esr", i, j));
                    mid
                } else {
                    tile
                };
                net.capacitor(plate, NodeId::GROUND, cap, grid_label(Tier::Chip, "decap_c", i, j));
            }
        }
    }
    grid
}

/// On-die tile grid with per-tile loads and decap branches.
pub fn build_chip_grid(chip: &ChipSpec, decaps: &DecapPolicy, power: &PowerMap) -> Netlist {
    let mut net = Netlist::new();
    net.chip_tiles = add_chip_grid(&mut net, chip, decaps, power);
    net
}

fn add_package_grid(net: &mut Netlist, pkg: &PackageSpec, chip: &ChipSpec, placement: &VrmPlacement) -> PackageGrid {
    let gap = match placement {
        VrmPlacement::OnPackage { gap_mm, .. } => Some(*gap_mm),
        _ => None,
    };
    let (xs, ox) = grid_lines(chip.width_mm, chip.tile_count_x, pkg.width_mm, gap);
    let (ys, oy) = grid_lines(chip.height_mm, chip.tile_count_y, pkg.height_mm, gap);
    let mut nodes = Vec::with_capacity(xs.len() * ys.len());
    for iy in 0..ys.len() {
        for ix in 0..xs.len() {
            nodes.push(net.add_node(Tier::PackageTop, Site::Grid(ix, iy), format!("package_top[{ix},{iy}]")));
        }
    }
    let grid = PackageGrid {
        xs,
        ys,
        nodes,
        chip_offset: (ox, oy),
    };

    let r_sq = sheet_resistance(pkg);
    let l_sq = pkg.segment_inductance_ph * PH;
    let (nxl, nyl) = (grid.xs.len(), grid.ys.len());
    for iy in 0..nyl {
        let h = PackageGrid::cell_extent(&grid.ys, iy);
        for ix in 0..nxl - 1 {
            let squares = (grid.xs[ix + 1] - grid.xs[ix]) / h;
            net.series_rl(
                grid.node(ix, iy),
                Some(grid.node(ix + 1, iy)),
                r_sq * squares,
                l_sq * squares,
                Tier::PackageTop,
                Site::Grid(ix, iy),
                "plane_h",
            );
        }
    }
    for ix in 0..nxl {
        let w = PackageGrid::cell_extent(&grid.xs, ix);
        for iy in 0..nyl - 1 {
            let squares = (grid.ys[iy + 1] - grid.ys[iy]) / w;
            net.series_rl(
                grid.node(ix, iy),
                Some(grid.node(ix, iy + 1)),
                r_sq * squares,
                l_sq * squares,
                Tier::PackageTop,
                Site::Grid(ix, iy),
                "plane_v",
            );
        }
    }
    grid
}

/// Package plane grid (tile-aligned under the die) as a standalone netlist.
pub fn build_package_network(pkg: &PackageSpec, chip: &ChipSpec, placement: &VrmPlacement) -> (Netlist, PackageGrid) {
    let mut net = Netlist::new();
    let grid = add_package_grid(&mut net, pkg, chip, placement);
    (net, grid)
}

fn add_discrete_decap(net: &mut Netlist, at: NodeId, cap: &DiscreteDecap, tier: Tier, group: &str, k: usize) {
    let site = Site::Grid(k, 0);
    let plate = net.series_rl(
        at,
        None,
        cap.esr_mohm * 1e-3,
        cap.esl_nh * NH,
        tier,
        site,
        &format!("{group}_esr_esl"),
    );
    net.capacitor(plate, NodeId::GROUND, cap.capacitance_uf * 1e-6, format!("{tier}.{group}_c[{k},0]"));
}

fn chip_footprint_contains(chip: &ChipSpec, x: f64, y: f64) -> bool {
    (0.0..=chip.width_mm).contains(&x) && (0.0..=chip.height_mm).contains(&y)
}

/// Builds the complete netlist for `config`, validating it first.
pub fn assemble_netlist(config: &ScenarioConfig) -> Result<Netlist> {
    let config = validate_config(config)?;
    let chip = &config.chip;
    let pkg = &config.package;
    let power = config.resolved_power_map();
    let mut net = Netlist::new();

    let tiles = add_chip_grid(&mut net, chip, &config.decaps, &power);
    let plane = add_package_grid(&mut net, pkg, chip, &config.placement);
    let (nx, ny) = (chip.tile_count_x, chip.tile_count_y);
    let tw_um = chip.tile_width_mm() * MM_TO_UM;
    let th_um = chip.tile_height_mm() * MM_TO_UM;
    let tile_rect = |i: usize, j: usize| {
        (
            i as f64 * tw_um,
            (i + 1) as f64 * tw_um,
            j as f64 * th_um,
            (j + 1) as f64 * th_um,
        )
    };
    let c4_per_tile = |i: usize, j: usize| {
        let (x0, x1, y0, y1) = tile_rect(i, j);
        bumps_in_rect(&chip.c4_bump, x0, x1, y0, y1)
    };

    // die to package through C4, unless the die sits on the VRM
    if !matches!(config.placement, VrmPlacement::ChipOnVrm3d { .. }) {
        for j in 0..ny {
            for i in 0..nx {
                let n = c4_per_tile(i, j);
                if n == 0 {
                    continue;
                }
                let (r, l) = bump_parallel(&chip.c4_bump, n as f64);
                net.series_rl(
                    tiles.node(i, j),
                    Some(plane.under_tile(i, j)),
                    r,
                    l,
                    Tier::Chip,
                    Site::Grid(i, j),
                    "c4",
                );
            }
        }
    }

    // package to board through the BGA, except under a backside VRM
    let land = net.add_node(Tier::Board, Site::Lumped, "board.land");
    let skip_footprint = matches!(config.placement, VrmPlacement::BacksidePackage { .. });
    for iy in 0..plane.ys.len() {
        let h = PackageGrid::cell_extent(&plane.ys, iy) * MM_TO_UM;
        for ix in 0..plane.xs.len() {
            if skip_footprint && chip_footprint_contains(chip, plane.xs[ix], plane.ys[iy]) {
                continue;
            }
            let w = PackageGrid::cell_extent(&plane.xs, ix) * MM_TO_UM;
            let n = bumps_in_area(&pkg.solder_bump, w * h);
            let (r, l) = bump_parallel(&pkg.solder_bump, n);
            net.series_rl(
                plane.node(ix, iy),
                Some(land),
                r,
                l,
                Tier::PackageBottom,
                Site::Grid(ix, iy),
                "bga",
            );
        }
    }
    let board = net.series_rl(
        land,
        None,
        config.board.lumped_resistance_mohm * 1e-3,
        config.board.lumped_inductance_nh * NH,
        Tier::Board,
        Site::Lumped,
        "lump",
    );
    for (k, cap) in config.decaps.board_decaps.iter().enumerate() {
        add_discrete_decap(&mut net, board, cap, Tier::Board, "decap", k);
    }
    for (k, cap) in config.decaps.package_decaps.iter().enumerate() {
        let at = plane.nearest(cap.site.x * chip.width_mm, cap.site.y * chip.height_mm);
        add_discrete_decap(&mut net, at, cap, Tier::PackageTop, "decap", k);
    }

    // regulators: the VRM spec is the whole regulator, so splitting it into
    // n dies gives each die n times the output impedance
    let vrm = &config.vrm;
    let instances = config.placement.vrm_count() as f64;
    let add_vrm = |net: &mut Netlist, k: usize| -> NodeId {
        let src = net.add_node(Tier::Vrm, Site::Grid(k, 0), format!("vrm.source[{k},0]"));
        let idx = net.add(
            ElementKind::VoltageSource {
                volts: vrm.output_voltage_v,
                drive: Drive::Supply,
            },
            src,
            NodeId::GROUND,
            format!("vrm.source[{k},0]"),
        );
        net.sources.push(idx);
        net.series_rl(
            src,
            None,
            vrm.series_resistance_mohm * 1e-3 * instances,
            vrm.series_inductance_nh * NH * instances,
            Tier::Vrm,
            Site::Grid(k, 0),
            "out",
        )
    };

    match &config.placement {
        VrmPlacement::OnPackage {
            count,
            vrm_depth_mm,
            vrm_bump,
            ..
        } => {
            let (ox, oy) = plane.chip_offset;
            let depth_um = vrm_depth_mm * MM_TO_UM;
            // (side name, attachment nodes, per-node die area in µm²)
            let west: Vec<_> = (0..ny).map(|j| plane.node(ox - 1, oy + j)).collect();
            let east: Vec<_> = (0..ny).map(|j| plane.node(ox + nx, oy + j)).collect();
            let south: Vec<_> = (0..nx).map(|i| plane.node(ox + i, oy - 1)).collect();
            let north: Vec<_> = (0..nx).map(|i| plane.node(ox + i, oy + ny)).collect();
            let sides = [
                ("attach_w", west, th_um * depth_um),
                ("attach_e", east, th_um * depth_um),
                ("attach_s", south, tw_um * depth_um),
                ("attach_n", north, tw_um * depth_um),
            ];
            for (k, (group, attach, cell_um2)) in sides.into_iter().take(*count as usize).enumerate() {
                let out = add_vrm(&mut net, k);
                let (r, l) = bump_parallel(vrm_bump, bumps_in_area(vrm_bump, cell_um2));
                for (m, node) in attach.into_iter().enumerate() {
                    net.series_rl(out, Some(node), r, l, Tier::Vrm, Site::Grid(k, m), group);
                }
            }
        }
        VrmPlacement::BacksidePackage { vrm_bump, footprint_mm } => {
            let via = pkg
                .through_package_via
                .as_ref()
                .ok_or_else(|| Error::Netlist("backside VRM needs through-package vias".into()))?;
            let out = add_vrm(&mut net, 0);
            let half_um = footprint_mm * MM_TO_UM / 2.0;
            let site_r = vrm_bump.resistance_per_bump_mohm * 1e-3 + via_resistance(via);
            let site_l = vrm_bump.inductance_per_bump_ph * PH + via_inductance(via);
            for j in 0..ny {
                for i in 0..nx {
                    let (x0, x1, y0, y1) = tile_rect(i, j);
                    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
                    if (cx - tw_um * nx as f64 / 2.0).abs() > half_um || (cy - th_um * ny as f64 / 2.0).abs() > half_um {
                        continue;
                    }
                    let n = bumps_in_rect(vrm_bump, x0, x1, y0, y1);
                    if n == 0 {
                        continue;
                    }
                    net.series_rl(
                        out,
                        Some(plane.under_tile(i, j)),
                        site_r / n as f64,
                        site_l / n as f64,
                        Tier::PackageBottom,
                        Site::Grid(i, j),
                        "tpv",
                    );
                }
            }
        }
        VrmPlacement::ChipOnVrm3d { microbump, vrm_tsv } => {
            let out = add_vrm(&mut net, 0);
            for j in 0..ny {
                for i in 0..nx {
                    let (x0, x1, y0, y1) = tile_rect(i, j);
                    let sites = bumps_in_rect(microbump, x0, x1, y0, y1);
                    if sites > 0 {
                        let s = sites as f64;
                        let die = net.series_rl(
                            out,
                            None,
                            via_resistance(vrm_tsv) / s,
                            via_inductance(vrm_tsv) / s,
                            Tier::VrmDie,
                            Site::Grid(i, j),
                            "tsv",
                        );
                        let (r, l) = bump_parallel(microbump, s);
                        net.series_rl(
                            die,
                            Some(tiles.node(i, j)),
                            r,
                            l,
                            Tier::VrmDie,
                            Site::Grid(i, j),
                            "ubump",
                        );
                    }
                    // VRM die to package, carrying the package/board decap paths
                    let n = c4_per_tile(i, j);
                    if n > 0 {
                        let (r, l) = bump_parallel(&chip.c4_bump, n as f64);
                        net.series_rl(
                            out,
                            Some(plane.under_tile(i, j)),
                            r,
                            l,
                            Tier::VrmDie,
                            Site::Grid(i, j),
                            "c4",
                        );
                    }
                }
            }
        }
    }

    for j in 0..ny {
        for i in 0..nx {
            net.probes.push(Probe {
                name: format!("chip[{i},{j}]"),
                node: tiles.node(i, j),
            });
        }
    }
    net.probes.push(Probe {
        name: "chip_center".to_string(),
        node: tiles.node(nx / 2, ny / 2),
    });
    net.chip_tiles = tiles;
    net.check()?;
    Ok(net)
}
