// SPDX-License-Identifier: Apache-2.0

//! Flat RLC netlist of the power delivery network and its builders.

mod builder;
pub mod parasitics;
mod text;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use builder::{assemble_netlist, build_chip_grid, build_package_network, PackageGrid};
pub use text::{parse_netlist, write_netlist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const GROUND: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_ground(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Ground,
    Board,
    PackageBottom,
    PackageTop,
    Chip,
    VrmDie,
    Vrm,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Ground => "ground",
            Tier::Board => "board",
            Tier::PackageBottom => "package_bottom",
            Tier::PackageTop => "package_top",
            Tier::Chip => "chip",
            Tier::VrmDie => "vrm_die",
            Tier::Vrm => "vrm",
        }
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "ground" => Tier::Ground,
            "board" => Tier::Board,
            "package_bottom" => Tier::PackageBottom,
            "package_top" => Tier::PackageTop,
            "chip" => Tier::Chip,
            "vrm_die" => Tier::VrmDie,
            "vrm" => Tier::Vrm,
            other => return Err(format!("unknown tier `{other}`")),
        })
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    Lumped,
    Grid(usize, usize),
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Lumped => f.write_str("lumped"),
            Site::Grid(i, j) => write!(f, "{i},{j}"),
        }
    }
}

impl FromStr for Site {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "lumped" {
            return Ok(Site::Lumped);
        }
        let (i, j) = s.split_once(',').ok_or_else(|| format!("bad site `{s}`"))?;
        let i = i.parse().map_err(|_| format!("bad site `{s}`"))?;
        let j = j.parse().map_err(|_| format!("bad site `{s}`"))?;
        Ok(Site::Grid(i, j))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub tier: Tier,
    pub site: Site,
    pub name: String,
}

/// Which stimulus scales a source over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Drive {
    Constant,
    Supply,
    Load,
}

impl Drive {
    fn as_str(self) -> &'static str {
        match self {
            Drive::Constant => "const",
            Drive::Supply => "supply",
            Drive::Load => "load",
        }
    }
}

impl FromStr for Drive {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "const" => Ok(Drive::Constant),
            "supply" => Ok(Drive::Supply),
            "load" => Ok(Drive::Load),
            other => Err(format!("unknown drive `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    Resistor { ohms: f64 },
    Inductor { henries: f64 },
    Capacitor { farads: f64 },
    /// Current flows from terminal `a` through the source into `b`.
    CurrentSource { amps: f64, drive: Drive },
    /// Holds `v(a) - v(b)` at `volts`.
    VoltageSource { volts: f64, drive: Drive },
}

impl ElementKind {
    pub fn letter(&self) -> char {
        match self {
            ElementKind::Resistor { .. } => 'R',
            ElementKind::Inductor { .. } => 'L',
            ElementKind::Capacitor { .. } => 'C',
            ElementKind::CurrentSource { .. } => 'I',
            ElementKind::VoltageSource { .. } => 'V',
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            ElementKind::Resistor { ohms } => ohms,
            ElementKind::Inductor { henries } => henries,
            ElementKind::Capacitor { farads } => farads,
            ElementKind::CurrentSource { amps, .. } => amps,
            ElementKind::VoltageSource { volts, .. } => volts,
        }
    }

    fn is_passive(&self) -> bool {
        matches!(
            self,
            ElementKind::Resistor { .. } | ElementKind::Inductor { .. } | ElementKind::Capacitor { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    pub a: NodeId,
    pub b: NodeId,
    /// `tier.group[i,j]` or `tier.group` for lumped parts.
    pub label: String,
}

/// Splits an element label back into its tier and grid position.
pub fn parse_label(label: &str) -> Option<(Tier, Site)> {
    let (tier, rest) = label.split_once('.')?;
    let tier = tier.parse().ok()?;
    let site = match rest.find('[') {
        Some(open) => {
            let inner = rest[open + 1..].strip_suffix(']')?;
            inner.parse().ok()?
        }
        None => Site::Lumped,
    };
    Some((tier, site))
}

pub fn grid_label(tier: Tier, group: &str, i: usize, j: usize) -> String {
    format!("{tier}.{group}[{i},{j}]")
}

pub fn lumped_label(tier: Tier, group: &str) -> String {
    format!("{tier}.{group}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: String,
    pub node: NodeId,
}

/// Chip tile nodes in row-major order (x fastest).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TileGrid {
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<NodeId>,
}

impl TileGrid {
    pub fn node(&self, i: usize, j: usize) -> NodeId {
        self.nodes[j * self.nx + i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub nodes: Vec<Node>,
    pub elements: Vec<Element>,
    pub probes: Vec<Probe>,
    /// Indices into `elements` of the regulator voltage sources.
    pub sources: Vec<usize>,
    pub chip_tiles: TileGrid,
}

impl Default for Netlist {
    fn default() -> Self {
        Netlist::new()
    }
}

impl Netlist {
    pub fn new() -> Self {
        Netlist {
            nodes: vec![Node {
                tier: Tier::Ground,
                site: Site::Lumped,
                name: "ground".to_string(),
            }],
            elements: Vec::new(),
            probes: Vec::new(),
            sources: Vec::new(),
            chip_tiles: TileGrid::default(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn add_node(&mut self, tier: Tier, site: Site, name: impl Into<String>) -> NodeId {
        self.nodes.push(Node {
            tier,
            site,
            name: name.into(),
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn add(&mut self, kind: ElementKind, a: NodeId, b: NodeId, label: impl Into<String>) -> usize {
        self.elements.push(Element {
            kind,
            a,
            b,
            label: label.into(),
        });
        self.elements.len() - 1
    }

    pub fn resistor(&mut self, a: NodeId, b: NodeId, ohms: f64, label: impl Into<String>) -> usize {
        self.add(ElementKind::Resistor { ohms }, a, b, label)
    }

    pub fn inductor(&mut self, a: NodeId, b: NodeId, henries: f64, label: impl Into<String>) -> usize {
        self.add(ElementKind::Inductor { henries }, a, b, label)
    }

    pub fn capacitor(&mut self, a: NodeId, b: NodeId, farads: f64, label: impl Into<String>) -> usize {
        self.add(ElementKind::Capacitor { farads }, a, b, label)
    }

    /// Series R then L from `from` to `to`. Zero-valued parts are left out;
    /// when both are zero the caller gets `from` back as the far node and no
    /// element is created, so `to` must be `None` in that case to be useful.
    pub fn series_rl(
        &mut self,
        from: NodeId,
        to: Option<NodeId>,
        ohms: f64,
        henries: f64,
        tier: Tier,
        site: Site,
        label: &str,
    ) -> NodeId {
        let with_site = |suffix: &str| match site {
            Site::Lumped => format!("{tier}.{label}{suffix}"),
            Site::Grid(i, j) => format!("{tier}.{label}{suffix}[{i},{j}]"),
        };
        match (ohms > 0.0, henries > 0.0) {
            (false, false) => {
                if let Some(to) = to {
                    // a series short still needs a branch; use a negligible resistor
                    self.resistor(from, to, 1e-12, with_site("_short"));
                    to
                } else {
                    from
                }
            }
            (true, false) => {
                let to = to.unwrap_or_else(|| self.add_node(tier, site, with_site("")));
                self.resistor(from, to, ohms, with_site("_r"));
                to
            }
            (false, true) => {
                let to = to.unwrap_or_else(|| self.add_node(tier, site, with_site("")));
                self.inductor(from, to, henries, with_site("_l"));
                to
            }
            (true, true) => {
                let mid = self.add_node(tier, site, with_site("_mid"));
                self.resistor(from, mid, ohms, with_site("_r"));
                let to = to.unwrap_or_else(|| self.add_node(tier, site, with_site("")));
                self.inductor(mid, to, henries, with_site("_l"));
                to
            }
        }
    }

    pub fn probe(&self, name: &str) -> Option<NodeId> {
        self.probes.iter().find(|p| p.name == name).map(|p| p.node)
    }

    pub fn count_kind(&self, letter: char) -> usize {
        self.elements.iter().filter(|e| e.kind.letter() == letter).count()
    }

    /// Structural checks: terminals in range and distinct, passive values
    /// strictly positive, at least one voltage and one current source, and
    /// every node reachable from ground through non-current-source elements.
    pub fn check(&self) -> Result<()> {
        let n = self.nodes.len();
        for e in &self.elements {
            if e.a.0 >= n || e.b.0 >= n {
                return Err(Error::Netlist(format!("{}: terminal out of range", e.label)));
            }
            if e.a == e.b {
                return Err(Error::Netlist(format!("{}: terminals coincide", e.label)));
            }
            if e.kind.is_passive() && !(e.kind.value() > 0.0 && e.kind.value().is_finite()) {
                return Err(Error::Netlist(format!(
                    "{}: value {} must be > 0",
                    e.label,
                    e.kind.value()
                )));
            }
        }
        if self.count_kind('V') == 0 {
            return Err(Error::Netlist("no voltage source".into()));
        }
        if self.count_kind('I') == 0 {
            return Err(Error::Netlist("no current source".into()));
        }
        let floating = self.unreachable_from_ground(|k| !matches!(k, ElementKind::CurrentSource { .. }));
        if !floating.is_empty() {
            return Err(Error::Floating(self.node_names(&floating)));
        }
        Ok(())
    }

    /// Nodes with no path to ground through elements accepted by `conducts`.
    pub fn unreachable_from_ground(&self, conducts: impl Fn(&ElementKind) -> bool) -> Vec<NodeId> {
        let n = self.nodes.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in self.elements.iter().filter(|e| conducts(&e.kind)) {
            adj[e.a.0].push(e.b.0);
            adj[e.b.0].push(e.a.0);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        (0..n).filter(|&i| !seen[i]).map(NodeId).collect()
    }

    pub fn node_names(&self, ids: &[NodeId]) -> Vec<String> {
        const SHOWN: usize = 20;
        let mut names: Vec<String> = ids
            .iter()
            .take(SHOWN)
            .map(|id| self.nodes[id.0].name.clone())
            .collect();
        if ids.len() > SHOWN {
            names.push(format!("... and {} more", ids.len() - SHOWN));
        }
        names
    }
}
