//! Balanced radial distribution network in per-unit.
//!
//! [`NetworkData`] is the plain, unchecked description (what a file parses
//! into). [`Network`] can only be obtained through validation: it is a tree
//! rooted at the PCC bus with every branch oriented parent → child.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type BusId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    #[serde(rename = "vmin")]
    pub v_min: f64,
    #[serde(rename = "vmax")]
    pub v_max: f64,
    #[serde(default)]
    pub is_pcc: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: BusId,
    pub to: BusId,
    pub r: f64,
    pub x: f64,
    pub s_max: f64,
}

/// Flexible generator with independent box limits on active and reactive output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: BusId,
    #[serde(rename = "pmin")]
    pub p_min: f64,
    #[serde(rename = "pmax")]
    pub p_max: f64,
    #[serde(rename = "qmin")]
    pub q_min: f64,
    #[serde(rename = "qmax")]
    pub q_max: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: BusId,
    pub p: f64,
    pub q: f64,
}

/// Unvalidated network description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkData {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub generators: Vec<Generator>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    Cycle,
    Disconnected,
    MultiplePcc,
    NoPcc,
    DuplicateBus,
    UnknownBus,
    SelfLoop,
    BadLimits,
    NonFinite,
}

/// One validation finding, located by a JSON-style path into the network document.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid network:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown bus id {0}")]
    UnknownBus(BusId),
}

/// Checks every structural and numerical invariant of a network description.
pub fn validate(data: &NetworkData) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !(data.base_mva.is_finite() && data.base_mva > 0.0) {
        report.push(
            ViolationKind::BadLimits,
            "base_mva",
            "base_mva must be positive",
        );
    }

    let mut index: BTreeMap<BusId, usize> = BTreeMap::new();
    let mut pccs = Vec::new();
    for (i, bus) in data.buses.iter().enumerate() {
        let path = format!("buses[{i}]");
        if index.insert(bus.id, i).is_some() {
            report.push(
                ViolationKind::DuplicateBus,
                format!("{path}.id"),
                format!("duplicate bus id {}", bus.id),
            );
        }
        if !(bus.v_min.is_finite() && bus.v_max.is_finite()) {
            report.push(
                ViolationKind::NonFinite,
                &path,
                "voltage limits must be finite",
            );
        } else if !(bus.v_min > 0.0 && bus.v_min <= bus.v_max) {
            report.push(
                ViolationKind::BadLimits,
                &path,
                format!(
                    "voltage limits must satisfy 0 < vmin <= vmax (got {} .. {})",
                    bus.v_min, bus.v_max
                ),
            );
        }
        if bus.is_pcc {
            pccs.push(i);
        }
    }
    match pccs.len() {
        0 => report.push(ViolationKind::NoPcc, "buses", "no PCC designated"),
        1 => {}
        _ => report.push(
            ViolationKind::MultiplePcc,
            "buses",
            format!("multiple PCC buses designated ({})", pccs.len()),
        ),
    }

    let mut edges_ok = true;
    for (i, br) in data.branches.iter().enumerate() {
        let path = format!("branches[{i}]");
        for (field, id) in [("from", br.from), ("to", br.to)] {
            if !index.contains_key(&id) {
                edges_ok = false;
                report.push(
                    ViolationKind::UnknownBus,
                    format!("{path}.{field}"),
                    format!("references unknown bus {id}"),
                );
            }
        }
        if br.from == br.to {
            edges_ok = false;
            report.push(
                ViolationKind::SelfLoop,
                &path,
                "branch connects a bus to itself",
            );
        }
        if !(br.r.is_finite() && br.x.is_finite() && br.s_max.is_finite()) {
            report.push(
                ViolationKind::NonFinite,
                &path,
                "impedance and rating must be finite",
            );
        } else {
            if br.r < 0.0 || br.x < 0.0 || (br.r == 0.0 && br.x == 0.0) {
                report.push(
                    ViolationKind::BadLimits,
                    &path,
                    "impedance must satisfy r >= 0, x >= 0, not both zero",
                );
            }
            if br.s_max <= 0.0 {
                report.push(
                    ViolationKind::BadLimits,
                    format!("{path}.s_max"),
                    "s_max must be positive",
                );
            }
        }
    }

    for (i, g) in data.generators.iter().enumerate() {
        let path = format!("generators[{i}]");
        if !index.contains_key(&g.bus) {
            report.push(
                ViolationKind::UnknownBus,
                format!("{path}.bus"),
                format!("references unknown bus {}", g.bus),
            );
        }
        let vals = [g.p_min, g.p_max, g.q_min, g.q_max, g.c1, g.c0];
        if vals.iter().any(|v| !v.is_finite()) {
            report.push(
                ViolationKind::NonFinite,
                &path,
                "generator data must be finite",
            );
        } else {
            if g.p_min > g.p_max {
                report.push(ViolationKind::BadLimits, &path, "pmin exceeds pmax");
            }
            if g.q_min > g.q_max {
                report.push(ViolationKind::BadLimits, &path, "qmin exceeds qmax");
            }
        }
    }

    for (i, l) in data.loads.iter().enumerate() {
        let path = format!("loads[{i}]");
        if !index.contains_key(&l.bus) {
            report.push(
                ViolationKind::UnknownBus,
                format!("{path}.bus"),
                format!("references unknown bus {}", l.bus),
            );
        }
        if !(l.p.is_finite() && l.q.is_finite()) {
            report.push(ViolationKind::NonFinite, &path, "load must be finite");
        }
    }

    if edges_ok && !data.buses.is_empty() {
        check_tree(data, &index, &mut report);
    }
    report
}

fn check_tree(data: &NetworkData, index: &BTreeMap<BusId, usize>, report: &mut ValidationReport) {
    // union-find over bus positions
    let n = data.buses.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for (i, br) in data.branches.iter().enumerate() {
        let a = find(&mut parent, index[&br.from]);
        let b = find(&mut parent, index[&br.to]);
        if a == b {
            report.push(
                ViolationKind::Cycle,
                format!("branches[{i}]"),
                format!("branch {}-{} closes a cycle", br.from, br.to),
            );
        } else {
            parent[a] = b;
        }
    }
    let root = find(&mut parent, 0);
    for i in 1..n {
        if find(&mut parent, i) != root {
            report.push(
                ViolationKind::Disconnected,
                format!("buses[{i}]"),
                format!(
                    "bus {} is disconnected from bus {}",
                    data.buses[i].id, data.buses[0].id
                ),
            );
        }
    }
}

/// A validated radial network.
///
/// Buses are stored sorted by id. Branches keep their file order but are
/// oriented so that `from` is the parent (closer to the PCC).
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    base_mva: f64,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    generators: Vec<Generator>,
    loads: Vec<Load>,
    pcc: usize,
    bus_index: BTreeMap<BusId, usize>,
    parent_branch: Vec<Option<usize>>,
    children: Vec<Vec<(usize, usize)>>,
    order: Vec<usize>,
}

impl TryFrom<NetworkData> for Network {
    type Error = GridError;

    fn try_from(data: NetworkData) -> Result<Self, Self::Error> {
        Network::new(data)
    }
}

impl Network {
    pub fn new(data: NetworkData) -> Result<Self, GridError> {
        let report = validate(&data);
        if !report.is_ok() {
            return Err(GridError::Invalid(report));
        }
        let NetworkData {
            base_mva,
            mut buses,
            mut branches,
            generators,
            loads,
        } = data;
        buses.sort_by_key(|b| b.id);
        let bus_index: BTreeMap<BusId, usize> =
            buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
        let pcc = buses.iter().position(|b| b.is_pcc).expect("validated");

        let n = buses.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, br) in branches.iter().enumerate() {
            adj[bus_index[&br.from]].push(k);
            adj[bus_index[&br.to]].push(k);
        }

        let mut parent_branch = vec![None; n];
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([pcc]);
        visited[pcc] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut next: Vec<(usize, usize)> = Vec::new();
            for &k in &adj[u] {
                let br = &branches[k];
                let (a, b) = (bus_index[&br.from], bus_index[&br.to]);
                let v = if a == u { b } else { a };
                if !visited[v] {
                    next.push((v, k));
                }
            }
            next.sort_by_key(|&(v, _)| buses[v].id);
            for (v, k) in next {
                visited[v] = true;
                parent_branch[v] = Some(k);
                if bus_index[&branches[k].from] != u {
                    let br = &mut branches[k];
                    std::mem::swap(&mut br.from, &mut br.to);
                }
                queue.push_back(v);
            }
        }

        let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (v, pb) in parent_branch.iter().enumerate() {
            if let Some(k) = *pb {
                children[bus_index[&branches[k].from]].push((k, v));
            }
        }
        for c in &mut children {
            c.sort_by_key(|&(_, v)| buses[v].id);
        }

        Ok(Network {
            base_mva,
            buses,
            branches,
            generators,
            loads,
            pcc,
            bus_index,
            parent_branch,
            children,
            order,
        })
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    /// Buses sorted by id; positions in this slice are the bus indices used throughout.
    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn loads(&self) -> &[Load] {
        &self.loads
    }

    /// Index of the PCC bus.
    pub fn pcc(&self) -> usize {
        self.pcc
    }

    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        self.bus_index.get(&id).copied()
    }

    /// Bus index at the sending (parent) end of branch `k`.
    pub fn branch_from(&self, k: usize) -> usize {
        self.bus_index[&self.branches[k].from]
    }

    /// Bus index at the receiving (child) end of branch `k`.
    pub fn branch_to(&self, k: usize) -> usize {
        self.bus_index[&self.branches[k].to]
    }

    pub fn parent_branch(&self, bus: usize) -> Option<usize> {
        self.parent_branch[bus]
    }

    /// Child adjacency of a bus index as `(branch index, child bus index)`, ascending child id.
    pub fn children_of(&self, bus: usize) -> &[(usize, usize)] {
        &self.children[bus]
    }

    /// Bus indices in breadth-first order from the PCC.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Total load per bus index.
    pub fn bus_loads(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); self.buses.len()];
        for l in &self.loads {
            let i = self.bus_index[&l.bus];
            out[i].0 += l.p;
            out[i].1 += l.q;
        }
        out
    }

    /// Bus index of generator `g`.
    pub fn generator_bus(&self, g: usize) -> usize {
        self.bus_index[&self.generators[g].bus]
    }

    pub fn total_load(&self) -> (f64, f64) {
        self.loads
            .iter()
            .fold((0.0, 0.0), |(p, q), l| (p + l.p, q + l.q))
    }

    /// Plain data view, suitable for serialization.
    pub fn to_data(&self) -> NetworkData {
        NetworkData {
            base_mva: self.base_mva,
            buses: self.buses.clone(),
            branches: self.branches.clone(),
            loads: self.loads.clone(),
            generators: self.generators.clone(),
        }
    }
}

/// Child adjacency of bus `id` as `(branch, child bus id)` pairs, ascending child id.
pub fn children(network: &Network, id: BusId) -> Result<Vec<(Branch, BusId)>, GridError> {
    let i = network.bus_index(id).ok_or(GridError::UnknownBus(id))?;
    Ok(network
        .children_of(i)
        .iter()
        .map(|&(k, v)| (network.branches[k].clone(), network.buses[v].id))
        .collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn bus(id: BusId, is_pcc: bool) -> Bus {
        Bus {
            id,
            v_min: 0.9,
            v_max: 1.1,
            is_pcc,
        }
    }

    pub(crate) fn line(from: BusId, to: BusId) -> Branch {
        Branch {
            from,
            to,
            r: 0.01,
            x: 0.03,
            s_max: 1.0,
        }
    }

    /// PCC bus 1, load bus 2 (0.5 + j0.2), one generator with p in [0, 1], q in [-0.5, 0.5].
    pub(crate) fn two_bus_data() -> NetworkData {
        NetworkData {
            base_mva: 10.0,
            buses: vec![bus(1, true), bus(2, false)],
            branches: vec![line(1, 2)],
            loads: vec![Load {
                bus: 2,
                p: 0.5,
                q: 0.2,
            }],
            generators: vec![Generator {
                bus: 2,
                p_min: 0.0,
                p_max: 1.0,
                q_min: -0.5,
                q_max: 0.5,
                c1: 0.0,
                c0: 0.0,
            }],
        }
    }

    fn path3() -> NetworkData {
        NetworkData {
            base_mva: 1.0,
            buses: vec![bus(1, true), bus(2, false), bus(3, false)],
            branches: vec![line(1, 2), line(2, 3)],
            loads: vec![],
            generators: vec![],
        }
    }

    #[test]
    fn two_bus_is_valid() {
        assert!(validate(&two_bus_data()).is_ok());
        let net = Network::new(two_bus_data()).unwrap();
        assert_eq!(net.branches().len(), net.buses().len() - 1);
    }

    #[test]
    fn triangle_is_a_cycle() {
        let mut d = path3();
        d.branches.push(line(3, 1));
        let rep = validate(&d);
        assert!(rep.has(ViolationKind::Cycle), "{rep}");
        assert!(Network::new(d).is_err());
    }

    #[test]
    fn two_pccs_rejected() {
        let mut d = two_bus_data();
        d.buses[1].is_pcc = true;
        assert!(validate(&d).has(ViolationKind::MultiplePcc));
    }

    #[test]
    fn missing_pcc_and_disconnected() {
        let mut d = path3();
        d.buses[0].is_pcc = false;
        d.branches.pop();
        let rep = validate(&d);
        assert!(rep.has(ViolationKind::NoPcc));
        assert!(rep.has(ViolationKind::Disconnected));
        assert!(rep.to_string().contains("no PCC designated"));
    }

    #[test]
    fn bad_limits_are_reported() {
        let mut d = two_bus_data();
        d.buses[1].v_min = 1.2;
        d.branches[0].r = 0.0;
        d.branches[0].x = 0.0;
        d.branches[0].s_max = 0.0;
        d.generators[0].p_min = 2.0;
        let rep = validate(&d);
        assert_eq!(
            rep.violations
                .iter()
                .filter(|v| v.kind == ViolationKind::BadLimits)
                .count(),
            4
        );
    }

    #[test]
    fn unknown_bus_has_path() {
        let mut d = two_bus_data();
        d.branches[0].to = 99;
        let rep = validate(&d);
        let v = rep
            .violations
            .iter()
            .find(|v| v.kind == ViolationKind::UnknownBus)
            .unwrap();
        assert_eq!(v.path, "branches[0].to");
    }

    #[test]
    fn children_in_id_order() {
        let net = Network::new(two_bus_data()).unwrap();
        let c = children(&net, 1).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].0.from, c[0].0.to, c[0].1), (1, 2, 2));
        assert!(children(&net, 2).unwrap().is_empty());
        assert!(matches!(children(&net, 7), Err(GridError::UnknownBus(7))));

        let net = Network::new(path3()).unwrap();
        let c = children(&net, 2).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].0.from, c[0].0.to, c[0].1), (2, 3, 3));
    }

    #[test]
    fn reversed_branch_is_flipped() {
        let mut d = path3();
        d.branches[1] = Branch {
            from: 3,
            to: 2,
            r: 0.02,
            x: 0.05,
            s_max: 0.7,
        };
        let net = Network::new(d).unwrap();
        let br = &net.branches()[1];
        assert_eq!((br.from, br.to), (2, 3));
        assert_eq!((br.r, br.x, br.s_max), (0.02, 0.05, 0.7));
    }

    #[test]
    fn revalidation_is_idempotent_and_order_independent() {
        let mut d = path3();
        d.branches.reverse();
        d.buses.reverse();
        let net = Network::new(d).unwrap();
        let again = Network::new(net.to_data()).unwrap();
        assert_eq!(net, again);
        let canonical = Network::new(path3()).unwrap();
        assert_eq!(net.buses(), canonical.buses());
        assert_eq!(net.topological_order(), canonical.topological_order());
    }
}
