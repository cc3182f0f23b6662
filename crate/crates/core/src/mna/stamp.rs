// SPDX-License-Identifier: Apache-2.0

use faer::sparse::{SparseColMat, Triplet};

use super::Integrator;
use crate::netlist::{Drive, ElementKind, Netlist, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MnaMode {
    Dc,
    Transient { dt: f64, method: Integrator },
}

/// Scale factors applied to sources by their drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SourceScale {
    pub supply: f64,
    pub load: f64,
}

impl SourceScale {
    pub const NOMINAL: SourceScale = SourceScale { supply: 1.0, load: 1.0 };

    pub fn factor(self, drive: Drive) -> f64 {
        match drive {
            Drive::Constant => 1.0,
            Drive::Supply => self.supply,
            Drive::Load => self.load,
        }
    }
}

/// Modified nodal analysis system: node voltages first (ground dropped),
/// then one branch current per voltage source and per inductor, in element
/// order.
#[derive(Debug, Clone)]
pub struct MnaSystem {
    pub dim: usize,
    /// Unsummed `(row, col, value)` contributions.
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    /// Row of each node; `None` for ground.
    pub node_row: Vec<Option<usize>>,
    /// Row of the branch current of each element that has one.
    pub branch_row: Vec<Option<usize>>,
}

impl MnaSystem {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries
            .iter()
            .filter(|&&(r, c, _)| r == row && c == col)
            .map(|e| e.2)
            .sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.dim]; self.dim];
        for &(r, c, v) in &self.entries {
            a[r][c] += v;
        }
        a
    }

    pub fn to_sparse(&self) -> SparseColMat<usize, f64> {
        let triplets: Vec<_> = self.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &triplets).expect("indices are in range")
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn row_of(&self, node: NodeId) -> Option<usize> {
        self.node_row[node.0]
    }
}

pub fn stamp_mna(netlist: &Netlist, mode: MnaMode) -> MnaSystem {
    stamp_scaled(netlist, mode, SourceScale::NOMINAL)
}

pub(crate) fn stamp_scaled(netlist: &Netlist, mode: MnaMode, scale: SourceScale) -> MnaSystem {
    let node_row: Vec<Option<usize>> = (0..netlist.nodes.len())
        .map(|k| if k == 0 { None } else { Some(k - 1) })
        .collect();
    let mut dim = netlist.nodes.len() - 1;
    let mut branch_row = vec![None; netlist.elements.len()];
    for (k, e) in netlist.elements.iter().enumerate() {
        if matches!(e.kind, ElementKind::VoltageSource { .. } | ElementKind::Inductor { .. }) {
            branch_row[k] = Some(dim);
            dim += 1;
        }
    }

    let mut entries = Vec::with_capacity(4 * netlist.elements.len());
    let mut rhs = vec![0.0; dim];
    let conductance = |entries: &mut Vec<_>, a: Option<usize>, b: Option<usize>, g: f64| {
        if let Some(a) = a {
            entries.push((a, a, g));
        }
        if let Some(b) = b {
            entries.push((b, b, g));
        }
        if let (Some(a), Some(b)) = (a, b) {
            entries.push((a, b, -g));
            entries.push((b, a, -g));
        }
    };
    let incidence = |entries: &mut Vec<_>, a: Option<usize>, b: Option<usize>, k: usize| {
        if let Some(a) = a {
            entries.push((a, k, 1.0));
            entries.push((k, a, 1.0));
        }
        if let Some(b) = b {
            entries.push((b, k, -1.0));
            entries.push((k, b, -1.0));
        }
    };

    for (idx, e) in netlist.elements.iter().enumerate() {
        let a = node_row[e.a.0];
        let b = node_row[e.b.0];
        match e.kind {
            ElementKind::Resistor { ohms } => conductance(&mut entries, a, b, 1.0 / ohms),
            ElementKind::Capacitor { farads } => {
                // open at DC; the zero entries keep the pattern mode-independent
                let g = match mode {
                    MnaMode::Dc => 0.0,
                    MnaMode::Transient { dt, method } => match method {
                        Integrator::BackwardEuler => farads / dt,
                        Integrator::Trapezoidal => 2.0 * farads / dt,
                    },
                };
                conductance(&mut entries, a, b, g);
            }
            ElementKind::Inductor { henries } => {
                let k = branch_row[idx].expect("inductors own a branch row");
                incidence(&mut entries, a, b, k);
                let z = match mode {
                    MnaMode::Dc => 0.0,
                    MnaMode::Transient { dt, method } => match method {
                        Integrator::BackwardEuler => henries / dt,
                        Integrator::Trapezoidal => 2.0 * henries / dt,
                    },
                };
                entries.push((k, k, -z));
            }
            ElementKind::VoltageSource { volts, drive } => {
                let k = branch_row[idx].expect("sources own a branch row");
                incidence(&mut entries, a, b, k);
                rhs[k] = volts * scale.factor(drive);
            }
            ElementKind::CurrentSource { amps, drive } => {
                let i = amps * scale.factor(drive);
                if let Some(a) = a {
                    rhs[a] -= i;
                }
                if let Some(b) = b {
                    rhs[b] += i;
                }
            }
        }
    }

    MnaSystem {
        dim,
        entries,
        rhs,
        node_row,
        branch_row,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{Site, Tier};

    fn node(n: &mut Netlist) -> NodeId {
        n.add_node(Tier::Chip, Site::Lumped, "n")
    }

    #[test]
    fn single_resistor() {
        let mut n = Netlist::new();
        let a = node(&mut n);
        n.resistor(a, NodeId::GROUND, 4.0, "chip.r");
        let sys = stamp_mna(&n, MnaMode::Dc);
        assert_eq!(sys.dim, 1);
        assert_eq!(sys.to_dense(), vec![vec![0.25]]);
    }

    #[test]
    fn single_voltage_source() {
        let mut n = Netlist::new();
        let a = node(&mut n);
        n.add(
            ElementKind::VoltageSource { volts: 1.5, drive: Drive::Supply },
            a,
            NodeId::GROUND,
            "vrm.source",
        );
        let sys = stamp_mna(&n, MnaMode::Dc);
        assert_eq!(sys.to_dense(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(sys.rhs, vec![0.0, 1.5]);
    }

    #[test]
    fn capacitor_companion_conductance() {
        let mut n = Netlist::new();
        let a = node(&mut n);
        n.capacitor(a, NodeId::GROUND, 1e-9, "chip.c");
        let be = stamp_mna(
            &n,
            MnaMode::Transient {
                dt: 1e-12,
                method: Integrator::BackwardEuler,
            },
        );
        assert!((be.get(0, 0) - 1000.0).abs() < 1e-9);
        let trap = stamp_mna(
            &n,
            MnaMode::Transient {
                dt: 1e-12,
                method: Integrator::Trapezoidal,
            },
        );
        assert!((trap.get(0, 0) - 2000.0).abs() < 1e-9);
        assert_eq!(stamp_mna(&n, MnaMode::Dc).get(0, 0), 0.0);
    }

    #[test]
    fn inductor_is_a_zero_ohm_branch_at_dc() {
        let mut n = Netlist::new();
        let a = node(&mut n);
        let b = node(&mut n);
        n.inductor(a, b, 1e-9, "chip.l");
        let sys = stamp_mna(&n, MnaMode::Dc);
        assert_eq!(sys.dim, 3);
        let d = sys.to_dense();
        assert_eq!(d[0][2], 1.0);
        assert_eq!(d[1][2], -1.0);
        assert_eq!(d[2][2], 0.0);
        // structurally symmetric
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(d[r][c] != 0.0, d[c][r] != 0.0);
            }
        }
    }
}
