// SPDX-License-Identifier: Apache-2.0

//! Fixed-step transient analysis.
//!
//! Series chains of passives through unobserved two-terminal nodes (the
//! R-L interconnect branches and R-C decap branches the builder emits) are
//! fused into single companion branches, which leaves a symmetric positive
//! definite nodal system over the remaining nodes. Regulator outputs are
//! grounded voltage sources and enter as fixed node values. The system is
//! factored once and every step is a pair of triangular solves.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{MatMut, Side};

use super::dc::dc_solve_scaled;
use super::stamp::SourceScale;
use super::Integrator;
use crate::config::StepTarget;
use crate::error::{Error, Result};
use crate::netlist::{Drive, ElementKind, Netlist, NodeId};

/// Source waveform applied during a transient run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stimulus {
    /// Every source held at its nominal value.
    Dc,
    /// Sources of the `target` drive ramp linearly from `start` to `end`
    /// (as fractions of nominal) over `rise_time` seconds starting at t = 0.
    Step {
        target: StepTarget,
        start: f64,
        end: f64,
        rise_time: f64,
    },
}

impl Stimulus {
    pub fn supply_step(rise_time: f64) -> Self {
        Stimulus::Step {
            target: StepTarget::Supply,
            start: 0.0,
            end: 1.0,
            rise_time,
        }
    }

    pub fn load_step(rise_time: f64) -> Self {
        Stimulus::Step {
            target: StepTarget::Load,
            start: 0.0,
            end: 1.0,
            rise_time,
        }
    }

    /// Time at which the supply sources reach their final value. A load
    /// step leaves the supply at nominal throughout, so this is zero.
    pub fn rise_end(&self) -> f64 {
        match self {
            Stimulus::Step {
                target: StepTarget::Supply,
                rise_time,
                ..
            } => *rise_time,
            _ => 0.0,
        }
    }

    pub fn rise_time(&self) -> f64 {
        match self {
            Stimulus::Dc => 0.0,
            Stimulus::Step { rise_time, .. } => *rise_time,
        }
    }

    pub(crate) fn scale_at(&self, t: f64) -> SourceScale {
        match *self {
            Stimulus::Dc => SourceScale::NOMINAL,
            Stimulus::Step {
                target,
                start,
                end,
                rise_time,
            } => {
                let s = start + (end - start) * (t / rise_time).clamp(0.0, 1.0);
                match target {
                    StepTarget::Supply => SourceScale { supply: s, load: 1.0 },
                    StepTarget::Load => SourceScale { supply: 1.0, load: s },
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// All capacitor voltages and inductor currents zero.
    Cold,
    /// DC operating point of the stimulus at t = 0.
    Warm,
}

/// Name of the recorded series holding the lowest chip-tile voltage.
pub const ENVELOPE: &str = "chip_min";

#[derive(Debug, Clone, PartialEq)]
pub struct TransientOptions {
    pub method: Integrator,
    /// `None` picks cold for a supply step and warm otherwise.
    pub initial: Option<InitialState>,
    /// Probe names to record; `None` records every probe.
    pub record: Option<Vec<String>>,
    /// Also record the minimum over all chip tiles at each step.
    pub envelope: bool,
    /// Abort when any node voltage exceeds this multiple of the largest
    /// source voltage.
    pub divergence_factor: f64,
}

impl Default for TransientOptions {
    fn default() -> Self {
        TransientOptions {
            method: Integrator::Trapezoidal,
            initial: None,
            record: None,
            envelope: true,
            divergence_factor: 10.0,
        }
    }
}

impl TransientOptions {
    pub fn with_method(mut self, method: Integrator) -> Self {
        self.method = method;
        self
    }

    pub fn recording<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.record = Some(names.into_iter().map(Into::into).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientWaveform {
    pub time: Vec<f64>,
    pub names: Vec<String>,
    /// One series per name, each as long as `time`.
    pub series: Vec<Vec<f64>>,
    pub method: Integrator,
    pub dt: f64,
    /// Time at which the supply reached its final value.
    pub rise_end: f64,
    pub rise_time: f64,
}

impl TransientWaveform {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.series[k].as_slice())
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
}

/// Fused series chain from `a` to `b`, carrying current `i` from a to b.
#[derive(Debug, Clone)]
struct Chain {
    a: NodeId,
    b: NodeId,
    r: f64,
    l: f64,
    /// Series elastance, Σ 1/C.
    s: f64,
    /// Elements with `true` when oriented along the chain.
    elements: Vec<(usize, bool)>,
    g: f64,
    i: f64,
    v_l: f64,
    v_c: f64,
    e: f64,
}

fn build_chains(netlist: &Netlist, keep: &[bool]) -> Vec<Chain> {
    let n = netlist.nodes.len();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, e) in netlist.elements.iter().enumerate() {
        incident[e.a.0].push(k);
        incident[e.b.0].push(k);
    }
    let passive = |k: usize| {
        matches!(
            netlist.elements[k].kind,
            ElementKind::Resistor { .. } | ElementKind::Inductor { .. } | ElementKind::Capacitor { .. }
        )
    };
    let internal: Vec<bool> = (0..n)
        .map(|v| !keep[v] && incident[v].len() == 2 && incident[v].iter().all(|&k| passive(k)))
        .collect();

    let mut used = vec![false; netlist.elements.len()];
    let mut chains = Vec::new();
    for start in 0..netlist.elements.len() {
        if used[start] || !passive(start) {
            continue;
        }
        used[start] = true;
        let e0 = &netlist.elements[start];
        // walk outward from `at`, having arrived through element `last`
        let walk = |mut at: NodeId, mut last: usize, used: &mut Vec<bool>| {
            let mut path = Vec::new();
            while internal[at.0] {
                let next = incident[at.0].iter().copied().find(|&k| k != last);
                let Some(next) = next else { break };
                if used[next] {
                    // closed cycle of internal nodes
                    return None;
                }
                used[next] = true;
                let e = &netlist.elements[next];
                let forward = e.a == at;
                path.push((next, forward));
                at = if forward { e.b } else { e.a };
                last = next;
            }
            Some((at, path))
        };
        let Some((b_end, fwd)) = walk(e0.b, start, &mut used) else { continue };
        let Some((a_end, back)) = walk(e0.a, start, &mut used) else { continue };
        if a_end == b_end {
            continue;
        }
        // back path was walked from e0.a outward; reverse it into chain order
        let mut elements: Vec<(usize, bool)> = back.into_iter().rev().map(|(k, f)| (k, !f)).collect();
        elements.push((start, true));
        elements.extend(fwd);
        let (mut r, mut l, mut s) = (0.0, 0.0, 0.0);
        for &(k, _) in &elements {
            match netlist.elements[k].kind {
                ElementKind::Resistor { ohms } => r += ohms,
                ElementKind::Inductor { henries } => l += henries,
                ElementKind::Capacitor { farads } => s += 1.0 / farads,
                _ => unreachable!(),
            }
        }
        chains.push(Chain {
            a: a_end,
            b: b_end,
            r,
            l,
            s,
            elements,
            g: 0.0,
            i: 0.0,
            v_l: 0.0,
            v_c: 0.0,
            e: 0.0,
        });
    }
    chains
}

pub fn transient_solve(
    netlist: &Netlist,
    stimulus: Stimulus,
    dt: f64,
    t_end: f64,
    options: &TransientOptions,
) -> Result<TransientWaveform> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Incompatible(format!(
            "dt ({dt:e} s) and t_end ({t_end:e} s) must be positive"
        )));
    }
    let n = netlist.nodes.len();
    let floating = netlist.unreachable_from_ground(|k| !matches!(k, ElementKind::CurrentSource { .. }));
    if !floating.is_empty() {
        return Err(Error::Floating(netlist.node_names(&floating)));
    }

    // regulator outputs become fixed node values
    let mut pinned: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut v_ref: f64 = 0.0;
    for (k, e) in netlist.elements.iter().enumerate() {
        if let ElementKind::VoltageSource { volts, .. } = e.kind {
            let (node, sign) = if e.b.is_ground() && !e.a.is_ground() {
                (e.a, 1.0)
            } else if e.a.is_ground() && !e.b.is_ground() {
                (e.b, -1.0)
            } else {
                return Err(Error::Incompatible(format!(
                    "{}: transient analysis needs voltage sources referenced to ground",
                    e.label
                )));
            };
            if pinned[node.0].is_some() {
                return Err(Error::Singular(format!(
                    "node {} is driven by more than one voltage source",
                    netlist.nodes[node.0].name
                )));
            }
            pinned[node.0] = Some((k, sign));
            v_ref = v_ref.max(volts.abs());
        }
    }
    if v_ref == 0.0 {
        v_ref = 1.0;
    }

    let mut recorded: Vec<(String, NodeId)> = match &options.record {
        None => netlist.probes.iter().map(|p| (p.name.clone(), p.node)).collect(),
        Some(names) => names
            .iter()
            .filter(|name| name.as_str() != ENVELOPE)
            .map(|name| {
                netlist
                    .probe(name)
                    .or_else(|| netlist.nodes.iter().position(|nd| &nd.name == name).map(NodeId))
                    .map(|node| (name.clone(), node))
                    .ok_or_else(|| Error::Incompatible(format!("no probe named `{name}`")))
            })
            .collect::<Result<_>>()?,
    };
    recorded.dedup_by(|a, b| a.0 == b.0);
    let envelope_nodes: Vec<NodeId> = if options.envelope { netlist.chip_tiles.nodes.clone() } else { Vec::new() };

    let mut keep = vec![false; n];
    keep[0] = true;
    for (v, p) in pinned.iter().enumerate() {
        if p.is_some() {
            keep[v] = true;
        }
    }
    for (_, node) in &recorded {
        keep[node.0] = true;
    }
    for node in &envelope_nodes {
        keep[node.0] = true;
    }
    for e in &netlist.elements {
        if !matches!(
            e.kind,
            ElementKind::Resistor { .. } | ElementKind::Inductor { .. } | ElementKind::Capacitor { .. }
        ) {
            keep[e.a.0] = true;
            keep[e.b.0] = true;
        }
    }
    let mut chains = build_chains(netlist, &keep);

    // unknowns: kept nodes that are neither ground nor pinned and touch a chain
    let mut touched = vec![false; n];
    for c in &chains {
        touched[c.a.0] = true;
        touched[c.b.0] = true;
    }
    let mut row: Vec<Option<usize>> = vec![None; n];
    let mut dim = 0;
    for v in 1..n {
        if pinned[v].is_none() && touched[v] {
            row[v] = Some(dim);
            dim += 1;
        }
    }
    for (name, node) in &recorded {
        if node.0 != 0 && pinned[node.0].is_none() && row[node.0].is_none() {
            return Err(Error::Floating(vec![name.clone()]));
        }
    }

    let method = options.method;
    let impedance = |c: &Chain| match method {
        Integrator::Trapezoidal => c.r + 2.0 * c.l / dt + 0.5 * dt * c.s,
        Integrator::BackwardEuler => c.r + c.l / dt + dt * c.s,
    };
    let mut triplets = Vec::with_capacity(3 * chains.len());
    for c in chains.iter_mut() {
        c.g = 1.0 / impedance(c);
        let (ra, rb) = (row[c.a.0], row[c.b.0]);
        if let Some(a) = ra {
            triplets.push(Triplet::new(a, a, c.g));
        }
        if let Some(b) = rb {
            triplets.push(Triplet::new(b, b, c.g));
        }
        if let (Some(a), Some(b)) = (ra, rb) {
            let (hi, lo) = if a > b { (a, b) } else { (b, a) };
            triplets.push(Triplet::new(hi, lo, -c.g));
        }
    }
    let llt = if dim > 0 {
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &triplets)
            .map_err(|e| Error::Singular(format!("{e:?}")))?;
        Some(mat.sp_cholesky(Side::Lower).map_err(|e| {
            Error::Singular(format!("transient matrix is not positive definite ({e:?})"))
        })?)
    } else {
        None
    };

    // initial state
    let initial = options.initial.unwrap_or(match stimulus {
        Stimulus::Step {
            target: StepTarget::Supply,
            ..
        } => InitialState::Cold,
        _ => InitialState::Warm,
    });
    let mut v = vec![0.0; n];
    if initial == InitialState::Warm {
        let dc = dc_solve_scaled(netlist, stimulus.scale_at(0.0))?;
        v.copy_from_slice(&dc.voltages);
        for c in chains.iter_mut() {
            let (k0, f0) = c.elements[0];
            c.i = if f0 { dc.currents[k0] } else { -dc.currents[k0] };
            for &(k, fwd) in &c.elements {
                if let ElementKind::Capacitor { .. } = netlist.elements[k].kind {
                    let e = &netlist.elements[k];
                    let across = dc.voltages[e.a.0] - dc.voltages[e.b.0];
                    c.v_c += if fwd { across } else { -across };
                }
            }
        }
    }

    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut names: Vec<String> = recorded.iter().map(|(s, _)| s.clone()).collect();
    if !envelope_nodes.is_empty() {
        names.push(ENVELOPE.to_string());
    }
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); names.len()];
    let mut time = Vec::with_capacity(steps + 1);
    let record = |v: &[f64], series: &mut Vec<Vec<f64>>, time: &mut Vec<f64>, t: f64| {
        time.push(t);
        for (k, (_, node)) in recorded.iter().enumerate() {
            series[k].push(v[node.0]);
        }
        if !envelope_nodes.is_empty() {
            let m = envelope_nodes.iter().map(|nd| v[nd.0]).fold(f64::INFINITY, f64::min);
            series[recorded.len()].push(m);
        }
    };
    record(&v, &mut series, &mut time, 0.0);

    let sources: Vec<(usize, usize, f64)> = pinned
        .iter()
        .enumerate()
        .filter_map(|(node, p)| p.map(|(k, sign)| (node, k, sign)))
        .collect();
    let loads: Vec<(Option<usize>, Option<usize>, f64, Drive)> = netlist
        .elements
        .iter()
        .filter_map(|e| match e.kind {
            ElementKind::CurrentSource { amps, drive } => Some((row[e.a.0], row[e.b.0], amps, drive)),
            _ => None,
        })
        .collect();
    let ends: Vec<(Option<usize>, Option<usize>)> = chains.iter().map(|c| (row[c.a.0], row[c.b.0])).collect();
    let unknowns: Vec<(usize, usize)> = (1..n).filter_map(|v| row[v].map(|r| (v, r))).collect();
    let mut rhs = vec![0.0; dim];

    for step in 1..=steps {
        let t = step as f64 * dt;
        let scale = stimulus.scale_at(t);
        for &(node, k, sign) in &sources {
            if let ElementKind::VoltageSource { volts, drive } = netlist.elements[k].kind {
                v[node] = sign * volts * scale.factor(drive);
            }
        }
        rhs.fill(0.0);
        for &(a, b, amps, drive) in &loads {
            let i = amps * scale.factor(drive);
            if let Some(a) = a {
                rhs[a] -= i;
            }
            if let Some(b) = b {
                rhs[b] += i;
            }
        }
        for (c, &(ra, rb)) in chains.iter_mut().zip(&ends) {
            c.e = match method {
                Integrator::Trapezoidal => {
                    -(2.0 * c.l / dt) * c.i - c.v_l + c.v_c + 0.5 * dt * c.s * c.i
                }
                Integrator::BackwardEuler => -(c.l / dt) * c.i + c.v_c,
            };
            let ge = c.g * c.e;
            match (ra, rb) {
                (Some(a), Some(b)) => {
                    rhs[a] += ge;
                    rhs[b] -= ge;
                }
                (Some(a), None) => rhs[a] += ge + c.g * v[c.b.0],
                (None, Some(b)) => rhs[b] += -ge + c.g * v[c.a.0],
                (None, None) => {}
            }
        }
        if let Some(llt) = &llt {
            llt.solve_in_place(MatMut::from_column_major_slice_mut(&mut rhs, dim, 1));
        }
        let mut worst: f64 = 0.0;
        for &(node, r) in &unknowns {
            v[node] = rhs[r];
            worst = worst.max(rhs[r].abs());
        }
        if !(worst <= options.divergence_factor * v_ref) {
            return Err(Error::Diverged {
                time: t,
                method: method.name(),
                dt,
                magnitude: worst,
            });
        }
        for c in chains.iter_mut() {
            let i_new = c.g * (v[c.a.0] - v[c.b.0] - c.e);
            match method {
                Integrator::Trapezoidal => {
                    c.v_l = (2.0 * c.l / dt) * (i_new - c.i) - c.v_l;
                    c.v_c += 0.5 * dt * c.s * (i_new + c.i);
                }
                Integrator::BackwardEuler => {
                    c.v_c += dt * c.s * i_new;
                }
            }
            c.i = i_new;
        }
        record(&v, &mut series, &mut time, t);
    }

    Ok(TransientWaveform {
        time,
        names,
        series,
        method,
        dt,
        rise_end: stimulus.rise_end(),
        rise_time: stimulus.rise_time(),
    })
}
