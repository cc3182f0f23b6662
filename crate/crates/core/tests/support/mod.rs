// SPDX-License-Identifier: Apache-2.0

//! Independent reference solvers and circuit generators shared by the
//! integration tests. Nothing here goes through the crate's stamping or
//! factorization code.

#![allow(dead_code)]

use pdn_core::config::WireSpec;
use pdn_core::netlist::{Drive, ElementKind, Netlist, NodeId, Probe, Site, Tier};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

/// Dense Gaussian elimination with partial pivoting. Returns `None` for a
/// singular matrix.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Brute-force DC nodal analysis: unknowns are the non-ground node
/// voltages followed by one current per voltage source and inductor.
/// Returns node voltages indexed by node id (ground first).
pub fn dense_dc(netlist: &Netlist) -> Option<Vec<f64>> {
    let nodes = netlist.nodes.len();
    let branches: Vec<usize> = netlist
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e.kind, ElementKind::VoltageSource { .. } | ElementKind::Inductor { .. }))
        .map(|(k, _)| k)
        .collect();
    let dim = nodes - 1 + branches.len();
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];
    let row = |n: NodeId| if n.0 == 0 { None } else { Some(n.0 - 1) };

    for e in &netlist.elements {
        let (ra, rb) = (row(e.a), row(e.b));
        match e.kind {
            ElementKind::Resistor { ohms } => {
                let g = 1.0 / ohms;
                if let Some(i) = ra {
                    a[i][i] += g;
                }
                if let Some(j) = rb {
                    a[j][j] += g;
                }
                if let (Some(i), Some(j)) = (ra, rb) {
                    a[i][j] -= g;
                    a[j][i] -= g;
                }
            }
            ElementKind::CurrentSource { amps, .. } => {
                // amps flow out of `a` and into `b`
                if let Some(i) = ra {
                    b[i] -= amps;
                }
                if let Some(j) = rb {
                    b[j] += amps;
                }
            }
            _ => {}
        }
    }
    for (k, &idx) in branches.iter().enumerate() {
        let e = &netlist.elements[idx];
        let br = nodes - 1 + k;
        if let Some(i) = row(e.a) {
            a[i][br] += 1.0;
            a[br][i] += 1.0;
        }
        if let Some(j) = row(e.b) {
            a[j][br] -= 1.0;
            a[br][j] -= 1.0;
        }
        if let ElementKind::VoltageSource { volts, .. } = e.kind {
            b[br] = volts;
        }
    }
    let x = gauss_solve(a, b)?;
    let mut v = vec![0.0; nodes];
    v[1..].copy_from_slice(&x[..nodes - 1]);
    Some(v)
}

fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

struct Forest(Vec<usize>);

impl Forest {
    fn new(n: usize) -> Self {
        Forest((0..n).collect())
    }

    fn root(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            x = self.0[x];
        }
        x
    }

    /// Joins the classes of `a` and `b`; false when they already coincide.
    fn join(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.root(a), self.root(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// Random connected circuit with at most `max_nodes` nodes counting ground.
/// Voltage sources and inductors never form a loop, every node has a path
/// to ground through resistors or inductors, and there is at least one
/// grounded source.
pub fn random_netlist(seed: u64, max_nodes: usize) -> Netlist {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.random_range(3..=max_nodes);
    let mut net = Netlist::new();
    let ids: Vec<NodeId> = std::iter::once(NodeId::GROUND)
        .chain((1..n).map(|k| net.add_node(Tier::Chip, Site::Lumped, format!("n{k}"))))
        .collect();
    let mut shorts = Forest::new(n);

    // the first node carries the main source
    let volts = rng.random_range(0.5..1.5);
    net.add(
        ElementKind::VoltageSource { volts, drive: Drive::Supply },
        ids[1],
        NodeId::GROUND,
        "vrm.source",
    );
    shorts.join(1, 0);

    for k in 2..n {
        let to = rng.random_range(0..k);
        if rng.random_bool(0.2) && shorts.join(k, to) {
            net.inductor(ids[k], ids[to], log_uniform(&mut rng, 1e-12, 1e-9), format!("chip.l{k}"));
        } else {
            net.resistor(ids[k], ids[to], log_uniform(&mut rng, 1e-3, 10.0), format!("chip.r{k}"));
        }
    }
    for k in 0..rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            net.resistor(ids[a], ids[b], log_uniform(&mut rng, 1e-3, 10.0), format!("chip.rx{k}"));
        }
    }
    for k in 0..rng.random_range(0..=2) {
        let (a, b) = (rng.random_range(1..n), rng.random_range(0..n));
        if a != b && shorts.join(a, b) {
            net.inductor(ids[a], ids[b], 1e-10, format!("chip.lx{k}"));
        }
    }
    // a second source, sometimes floating between two nodes
    let (a, b) = (rng.random_range(1..n), if rng.random_bool(0.3) { rng.random_range(1..n) } else { 0 });
    if a != b && shorts.join(a, b) {
        net.add(
            ElementKind::VoltageSource {
                volts: rng.random_range(-0.5..1.5),
                drive: Drive::Supply,
            },
            ids[a],
            ids[b],
            "vrm.second",
        );
    }
    for k in 0..rng.random_range(0..=2) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            net.capacitor(ids[a], ids[b], 1e-9, format!("chip.c{k}"));
        }
    }
    for k in 0..rng.random_range(1..=3) {
        let a = rng.random_range(1..n);
        let b = if rng.random_bool(0.8) { 0 } else { rng.random_range(0..n) };
        if a != b {
            net.add(
                ElementKind::CurrentSource {
                    amps: rng.random_range(0.1..10.0),
                    drive: Drive::Load,
                },
                ids[a],
                ids[b],
                format!("chip.load{k}"),
            );
        }
    }
    net
}

pub fn probe(net: &mut Netlist, name: &str, node: NodeId) {
    net.probes.push(Probe {
        name: name.to_string(),
        node,
    });
}

/// Series R-L current for a step of `v` at t = 0 from rest.
pub fn rl_current(v: f64, r: f64, l: f64, t: f64) -> f64 {
    v / r * (1.0 - (-t * r / l).exp())
}

/// Capacitor voltage of a series R-C after a step of `v` at t = 0.
pub fn rc_voltage(v: f64, r: f64, c: f64, t: f64) -> f64 {
    v * (1.0 - (-t / (r * c)).exp())
}

/// Capacitor voltage of an underdamped series R-L-C after a step of `v`.
pub fn rlc_voltage(v: f64, r: f64, l: f64, c: f64, t: f64) -> f64 {
    let alpha = r / (2.0 * l);
    let w0 = 1.0 / (l * c).sqrt();
    assert!(alpha < w0, "underdamped only");
    let wd = (w0 * w0 - alpha * alpha).sqrt();
    v * (1.0 - (-alpha * t).exp() * ((wd * t).cos() + alpha / wd * (wd * t).sin()))
}

/// Wire-level mesh of a square die of side `side_um`: one node per wire
/// crossing at half-pitch offsets, one resistor per wire segment. Returns
/// the netlist, the crossing nodes row by row, and the line positions in µm.
pub fn wire_mesh(side_um: f64, wire: &WireSpec) -> (Netlist, Vec<NodeId>, Vec<f64>) {
    let pitch = wire.pitch_um;
    let lines: Vec<f64> = (0..)
        .map(|k| pitch / 2.0 + k as f64 * pitch)
        .take_while(|x| *x < side_um)
        .collect();
    let m = lines.len();
    let mut net = Netlist::new();
    let mut nodes = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            nodes.push(net.add_node(Tier::Chip, Site::Grid(i, j), format!("x{i}_{j}")));
        }
    }
    let seg = wire.resistivity_ohm_m * pitch * 1e-6 / (wire.thickness_um * 1e-6 * wire.width_um * 1e-6);
    for j in 0..m {
        for i in 0..m {
            if i + 1 < m {
                net.resistor(nodes[j * m + i], nodes[j * m + i + 1], seg, "chip.h");
            }
            if j + 1 < m {
                net.resistor(nodes[j * m + i], nodes[(j + 1) * m + i], seg, "chip.v");
            }
        }
    }
    (net, nodes, lines)
}

/// Resistance between two regions with 1 A spread evenly over the nodes of
/// `a` and taken out evenly from `b`, read as the difference of the mean
/// region potentials. A tile node stands for the mean potential of its
/// footprint, so this is the quantity the tiling has to preserve.
pub fn region_resistance(net: &Netlist, a: &[NodeId], b: &[NodeId]) -> Result<f64, String> {
    let mut net = net.clone();
    net.add(
        ElementKind::VoltageSource { volts: 0.0, drive: Drive::Supply },
        b[0],
        NodeId::GROUND,
        "vrm.anchor",
    );
    for (nodes, into) in [(a, true), (b, false)] {
        let amps = 1.0 / nodes.len() as f64;
        for &n in nodes {
            let (from, to) = if into { (NodeId::GROUND, n) } else { (n, NodeId::GROUND) };
            net.add(ElementKind::CurrentSource { amps, drive: Drive::Load }, from, to, "chip.test");
        }
    }
    let dc = pdn_core::dc_solve(&net).map_err(|e| e.to_string())?;
    let mean = |nodes: &[NodeId]| nodes.iter().map(|n| dc.voltage(*n)).sum::<f64>() / nodes.len() as f64;
    Ok(mean(a) - mean(b))
}
