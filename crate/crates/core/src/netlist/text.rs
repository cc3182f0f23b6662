// SPDX-License-Identifier: Apache-2.0

//! Line-oriented netlist dump.
//!
//! ```text
//! * pdn-netlist 1
//! N <index> <tier> <site> <name>
//! T <nx> <ny>
//! <kind> <a> <b> <value> [<drive>] <label>
//! P <name> <node>
//! S <element index>
//! ```
//!
//! Values are written with 17 significant digits so a dump parses back to
//! the identical netlist.

use std::fmt::Write as _;

use super::*;

const HEADER: &str = "* pdn-netlist 1";

pub fn write_netlist(netlist: &Netlist) -> String {
    let mut out = String::with_capacity(64 * (netlist.nodes.len() + netlist.elements.len()));
    out.push_str(HEADER);
    out.push('\n');
    for (k, node) in netlist.nodes.iter().enumerate() {
        let _ = writeln!(out, "N {k} {} {} {}", node.tier, node.site, node.name);
    }
    let _ = writeln!(out, "T {} {}", netlist.chip_tiles.nx, netlist.chip_tiles.ny);
    for e in &netlist.elements {
        let value = format!("{:.16e}", e.kind.value());
        match e.kind {
            ElementKind::CurrentSource { drive, .. } | ElementKind::VoltageSource { drive, .. } => {
                let _ = writeln!(
                    out,
                    "{} {} {} {value} {} {}",
                    e.kind.letter(),
                    e.a.0,
                    e.b.0,
                    drive.as_str(),
                    e.label
                );
            }
            _ => {
                let _ = writeln!(out, "{} {} {} {value} {}", e.kind.letter(), e.a.0, e.b.0, e.label);
            }
        }
    }
    for p in &netlist.probes {
        let _ = writeln!(out, "P {} {}", p.name, p.node.0);
    }
    for s in &netlist.sources {
        let _ = writeln!(out, "S {s}");
    }
    out
}

pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected `{HEADER}`"),
            })
        }
    }
    let mut netlist = Netlist {
        nodes: Vec::new(),
        elements: Vec::new(),
        probes: Vec::new(),
        sources: Vec::new(),
        chip_tiles: TileGrid::default(),
    };
    let mut tile_dims = (0, 0);
    for (idx, line) in lines {
        let lineno = idx + 1;
        let err = |message: String| Error::Parse { line: lineno, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() || fields[0].starts_with('*') {
            continue;
        }
        let num = |s: &str| -> Result<usize> { s.parse().map_err(|_| err(format!("bad integer `{s}`"))) };
        let float = |s: &str| -> Result<f64> { s.parse().map_err(|_| err(format!("bad number `{s}`"))) };
        match fields[0] {
            "N" if fields.len() == 5 => {
                if num(fields[1])? != netlist.nodes.len() {
                    return Err(err("node indices must be dense and ordered".into()));
                }
                netlist.nodes.push(Node {
                    tier: fields[2].parse().map_err(err)?,
                    site: fields[3].parse().map_err(err)?,
                    name: fields[4].to_string(),
                });
            }
            "T" if fields.len() == 3 => tile_dims = (num(fields[1])?, num(fields[2])?),
            "R" | "L" | "C" if fields.len() == 5 => {
                let v = float(fields[3])?;
                let kind = match fields[0] {
                    "R" => ElementKind::Resistor { ohms: v },
                    "L" => ElementKind::Inductor { henries: v },
                    _ => ElementKind::Capacitor { farads: v },
                };
                netlist.add(kind, NodeId(num(fields[1])?), NodeId(num(fields[2])?), fields[4]);
            }
            "I" | "V" if fields.len() == 6 => {
                let v = float(fields[3])?;
                let drive: Drive = fields[4].parse().map_err(err)?;
                let kind = if fields[0] == "I" {
                    ElementKind::CurrentSource { amps: v, drive }
                } else {
                    ElementKind::VoltageSource { volts: v, drive }
                };
                netlist.add(kind, NodeId(num(fields[1])?), NodeId(num(fields[2])?), fields[5]);
            }
            "P" if fields.len() == 3 => netlist.probes.push(Probe {
                name: fields[1].to_string(),
                node: NodeId(num(fields[2])?),
            }),
            "S" if fields.len() == 2 => netlist.sources.push(num(fields[1])?),
            _ => return Err(err(format!("unrecognized line `{line}`"))),
        }
    }
    let (nx, ny) = tile_dims;
    let mut tiles = vec![NodeId::GROUND; nx * ny];
    for (k, node) in netlist.nodes.iter().enumerate() {
        if let (Tier::Chip, Site::Grid(i, j)) = (node.tier, node.site) {
            if node.name == format!("chip[{i},{j}]") && i < nx && j < ny {
                tiles[j * nx + i] = NodeId(k);
            }
        }
    }
    netlist.chip_tiles = TileGrid { nx, ny, nodes: tiles };
    Ok(netlist)
}
