// SPDX-License-Identifier: Apache-2.0

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::stamp::{stamp_scaled, MnaMode, SourceScale};
use crate::error::{Error, Result};
use crate::netlist::{ElementKind, Netlist, NodeId};

/// KCL residual allowed per unit of source current.
pub const KCL_TOLERANCE: f64 = 1e-9;
const REFINEMENT_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct DcSolution {
    /// Indexed by `NodeId`; ground is entry 0.
    pub voltages: Vec<f64>,
    /// Current from terminal `a` to terminal `b` of every element.
    pub currents: Vec<f64>,
    /// Largest KCL imbalance over all nodes, in amperes.
    pub kcl_residual: f64,
}

impl DcSolution {
    pub fn voltage(&self, node: NodeId) -> f64 {
        self.voltages[node.0]
    }
}

pub fn dc_solve(netlist: &Netlist) -> Result<DcSolution> {
    dc_solve_scaled(netlist, SourceScale::NOMINAL)
}

/// Voltage-source and inductor loops make the MNA matrix singular.
fn find_source_loop(netlist: &Netlist) -> Option<String> {
    let mut parent: Vec<usize> = (0..netlist.nodes.len()).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &netlist.elements {
        if matches!(e.kind, ElementKind::VoltageSource { .. } | ElementKind::Inductor { .. }) {
            let (ra, rb) = (root(&mut parent, e.a.0), root(&mut parent, e.b.0));
            if ra == rb {
                return Some(format!(
                    "{} closes a loop of voltage sources and inductors between {} and {}",
                    e.label, netlist.nodes[e.a.0].name, netlist.nodes[e.b.0].name
                ));
            }
            parent[ra] = rb;
        }
    }
    None
}

pub(crate) fn dc_solve_scaled(netlist: &Netlist, scale: SourceScale) -> Result<DcSolution> {
    let floating = netlist.unreachable_from_ground(|k| !matches!(k, ElementKind::CurrentSource { .. } | ElementKind::Capacitor { .. }));
    if !floating.is_empty() {
        return Err(Error::Floating(netlist.node_names(&floating)));
    }
    if let Some(msg) = find_source_loop(netlist) {
        return Err(Error::Singular(msg));
    }

    let (voltages, currents) = match solve_contracted(netlist, scale)? {
        Some(solved) => solved,
        None => solve_full(netlist, scale)?,
    };
    if voltages.iter().chain(&currents).any(|v| !v.is_finite()) {
        return Err(Error::Singular(
            "numerically singular matrix: solution is not finite".into(),
        ));
    }

    let mut imbalance = vec![0.0; netlist.nodes.len()];
    let mut source_scale: f64 = 0.0;
    for (e, i) in netlist.elements.iter().zip(&currents) {
        imbalance[e.a.0] += i;
        imbalance[e.b.0] -= i;
        if matches!(e.kind, ElementKind::CurrentSource { .. } | ElementKind::VoltageSource { .. }) {
            source_scale = source_scale.max(i.abs());
        }
    }
    let kcl_residual = imbalance[1..].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    // nominal rather than scaled load, so a no-load operating point is judged
    // on the same absolute scale as the loaded one
    let total_load: f64 = netlist
        .elements
        .iter()
        .filter_map(|e| match e.kind {
            ElementKind::CurrentSource { amps, .. } => Some(amps.abs()),
            _ => None,
        })
        .sum();
    let reference = total_load.max(source_scale);
    if kcl_residual > KCL_TOLERANCE * reference.max(f64::MIN_POSITIVE) && kcl_residual > 1e-15 {
        return Err(Error::Singular(format!(
            "KCL residual {kcl_residual:e} A exceeds tolerance for {reference:e} A of load; \
             the matrix is nearly singular"
        )));
    }
    Ok(DcSolution {
        voltages,
        currents,
        kcl_residual,
    })
}

/// Full MNA with a sparse LU. Handles any source topology.
fn solve_full(netlist: &Netlist, scale: SourceScale) -> Result<(Vec<f64>, Vec<f64>)> {
    let sys = stamp_scaled(netlist, MnaMode::Dc, scale);
    if sys.dim == 0 {
        return Ok((vec![0.0; netlist.nodes.len()], vec![0.0; netlist.elements.len()]));
    }
    let lu = sys
        .to_sparse()
        .sp_lu()
        .map_err(|e| Error::Singular(format!("LU factorization failed: {e:?}")))?;
    let solve = |rhs: &[f64]| -> Vec<f64> {
        let b = Mat::<f64>::from_fn(sys.dim, 1, |i, _| rhs[i]);
        let x = lu.solve(b);
        (0..sys.dim).map(|i| x[(i, 0)]).collect()
    };
    let residual = |x: &[f64]| {
        let ax = sys.apply(x);
        sys.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect()
    };
    let x = refine(&sys.rhs, residual, solve);

    let mut voltages = vec![0.0; netlist.nodes.len()];
    for (k, row) in sys.node_row.iter().enumerate() {
        if let Some(r) = row {
            voltages[k] = x[*r];
        }
    }
    let currents = netlist
        .elements
        .iter()
        .enumerate()
        .map(|(k, e)| match e.kind {
            ElementKind::Resistor { ohms } => (voltages[e.a.0] - voltages[e.b.0]) / ohms,
            ElementKind::Capacitor { .. } => 0.0,
            ElementKind::Inductor { .. } | ElementKind::VoltageSource { .. } => {
                x[sys.branch_row[k].expect("branch row")]
            }
            ElementKind::CurrentSource { amps, drive } => amps * scale.factor(drive),
        })
        .collect();
    Ok((voltages, currents))
}

fn refine(
    rhs: &[f64],
    residual: impl Fn(&[f64]) -> Vec<f64>,
    solve: impl Fn(&[f64]) -> Vec<f64>,
) -> Vec<f64> {
    let mut x = solve(rhs);
    for _ in 0..REFINEMENT_STEPS {
        let r = residual(&x);
        let dx = solve(&r);
        let mut changed = false;
        for (xi, di) in x.iter_mut().zip(&dx) {
            changed |= *di != 0.0;
            *xi += di;
        }
        if !changed {
            break;
        }
    }
    x
}

/// Inductors are shorts at DC, so their nodes merge into one unknown, and
/// grounded voltage sources fix their node. What remains is a resistor
/// Laplacian, which is SPD and goes to a sparse Cholesky. Branch currents
/// of sources and inductors then follow from KCL on the (loop-free) forest
/// they form. Returns `None` when a source is not referenced to ground.
fn solve_contracted(netlist: &Netlist, scale: SourceScale) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let n = netlist.nodes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &netlist.elements {
        if let ElementKind::Inductor { .. } = e.kind {
            let (ra, rb) = (root(&mut parent, e.a.0), root(&mut parent, e.b.0));
            parent[ra] = rb;
        }
    }
    let class: Vec<usize> = (0..n).map(|v| root(&mut parent, v)).collect();
    let ground = class[0];

    let mut fixed: Vec<Option<f64>> = vec![None; n];
    fixed[ground] = Some(0.0);
    for e in &netlist.elements {
        if let ElementKind::VoltageSource { volts, drive } = e.kind {
            let v = volts * scale.factor(drive);
            let (target, value) = if class[e.b.0] == ground {
                (class[e.a.0], v)
            } else if class[e.a.0] == ground {
                (class[e.b.0], -v)
            } else {
                return Ok(None);
            };
            if fixed[target].is_some() {
                return Ok(None);
            }
            fixed[target] = Some(value);
        }
    }

    let mut row: Vec<Option<usize>> = vec![None; n];
    let mut dim = 0;
    for v in 0..n {
        if class[v] == v && fixed[v].is_none() {
            row[v] = Some(dim);
            dim += 1;
        }
    }

    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; dim];
    for e in &netlist.elements {
        let (ca, cb) = (class[e.a.0], class[e.b.0]);
        match e.kind {
            ElementKind::Resistor { ohms } if ca != cb => {
                let g = 1.0 / ohms;
                match (row[ca], row[cb]) {
                    (Some(a), Some(b)) => {
                        triplets.push((a, a, g));
                        triplets.push((b, b, g));
                        triplets.push((a.max(b), a.min(b), -g));
                    }
                    (Some(a), None) => {
                        triplets.push((a, a, g));
                        rhs[a] += g * fixed[cb].expect("fixed class");
                    }
                    (None, Some(b)) => {
                        triplets.push((b, b, g));
                        rhs[b] += g * fixed[ca].expect("fixed class");
                    }
                    (None, None) => {}
                }
            }
            ElementKind::CurrentSource { amps, drive } => {
                let i = amps * scale.factor(drive);
                if let Some(a) = row[ca] {
                    rhs[a] -= i;
                }
                if let Some(b) = row[cb] {
                    rhs[b] += i;
                }
            }
            _ => {}
        }
    }

    let x = if dim > 0 {
        let lower: Vec<_> = triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let llt = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &lower)
            .map_err(|e| Error::Singular(format!("{e:?}")))?
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Singular(format!("conductance matrix is not positive definite ({e:?})")))?;
        // KCL imbalance summed branch by branch: forming differences first keeps
        // it accurate when a stiff branch sits next to many weak ones
        let residual = |x: &[f64]| {
            let value = |c: usize| match row[c] {
                Some(r) => x[r],
                None => fixed[c].expect("fixed class"),
            };
            let mut r = vec![0.0; dim];
            for e in &netlist.elements {
                let (ca, cb) = (class[e.a.0], class[e.b.0]);
                let flow = match e.kind {
                    ElementKind::Resistor { ohms } if ca != cb => (value(ca) - value(cb)) / ohms,
                    ElementKind::CurrentSource { amps, drive } => amps * scale.factor(drive),
                    _ => continue,
                };
                if let Some(a) = row[ca] {
                    r[a] -= flow;
                }
                if let Some(b) = row[cb] {
                    r[b] += flow;
                }
            }
            r
        };
        let solve = |b: &[f64]| {
            let mut m = Mat::<f64>::from_fn(dim, 1, |i, _| b[i]);
            llt.solve_in_place(m.as_mut());
            (0..dim).map(|i| m[(i, 0)]).collect::<Vec<_>>()
        };
        refine(&rhs, residual, solve)
    } else {
        Vec::new()
    };

    let voltages: Vec<f64> = (0..n)
        .map(|v| match row[class[v]] {
            Some(r) => x[r],
            None => fixed[class[v]].expect("fixed class"),
        })
        .collect();
    let mut currents: Vec<f64> = netlist
        .elements
        .iter()
        .map(|e| match e.kind {
            ElementKind::Resistor { ohms } => (voltages[e.a.0] - voltages[e.b.0]) / ohms,
            ElementKind::CurrentSource { amps, drive } => amps * scale.factor(drive),
            _ => 0.0,
        })
        .collect();

    // net current leaving each node through elements already known
    let mut leaving = vec![0.0; n];
    let mut tree: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, e) in netlist.elements.iter().enumerate() {
        match e.kind {
            ElementKind::Inductor { .. } | ElementKind::VoltageSource { .. } => {
                tree[e.a.0].push(k);
                tree[e.b.0].push(k);
            }
            _ => {
                leaving[e.a.0] += currents[k];
                leaving[e.b.0] -= currents[k];
            }
        }
    }
    // breadth-first from ground first so the ground tree is rooted there
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    let mut up: Vec<Option<usize>> = vec![None; n];
    for start in 0..n {
        if seen[start] || tree[start].is_empty() {
            continue;
        }
        seen[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &k in &tree[u] {
                let e = &netlist.elements[k];
                let w = if e.a.0 == u { e.b.0 } else { e.a.0 };
                if !seen[w] {
                    seen[w] = true;
                    up[w] = Some(k);
                    order.push(w);
                }
            }
        }
    }
    for &u in order.iter().rev() {
        if let Some(k) = up[u] {
            let e = &netlist.elements[k];
            let towards_parent = -leaving[u];
            let p = if e.a.0 == u { e.b.0 } else { e.a.0 };
            currents[k] = if e.a.0 == u { towards_parent } else { -towards_parent };
            leaving[p] += leaving[u];
        }
    }
    Ok(Some((voltages, currents)))
}
