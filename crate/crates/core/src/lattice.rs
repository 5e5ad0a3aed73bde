//! Planar networks, their rotation systems and the dual graphs of surviving
//! clusters.
//!
//! Bonds are addressed by index; each bond has two darts (half-edges):
//! dart `2b` runs `u -> v` and dart `2b + 1` runs `v -> u`. The rotation
//! system lists, for every node, the darts leaving it in counter-clockwise
//! order. Faces of any subgraph are the orbits of "reverse the dart, then step
//! clockwise at its new origin", so the same routine serves the full lattice
//! and any diluted cluster.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice side must be at least 2, got {0}")]
    InvalidSize(usize),
    #[error("unknown geometry `{0}` (expected square, triangular, honeycomb or custom)")]
    UnknownGeometry(String),
    #[error("bond multiplicity must be at least 1")]
    InvalidMultiplicity,
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("malformed lattice document: {0}")]
    Json(String),
    #[error("surviving bonds do not form a single connected cluster; restrict to one cluster first")]
    Disconnected,
    #[error("cluster has no surviving bonds")]
    EmptyCluster,
    #[error("bond index {0} out of range")]
    BondOutOfRange(usize),
}

fn schema(location: impl Into<String>, message: impl Into<String>) -> LatticeError {
    LatticeError::Schema {
        location: location.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Square,
    Triangular,
    Honeycomb,
    Custom,
}

impl Geometry {
    pub fn as_str(self) -> &'static str {
        match self {
            Geometry::Square => "square",
            Geometry::Triangular => "triangular",
            Geometry::Honeycomb => "honeycomb",
            Geometry::Custom => "custom",
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Geometry {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" => Ok(Geometry::Square),
            "triangular" => Ok(Geometry::Triangular),
            "honeycomb" => Ok(Geometry::Honeycomb),
            "custom" => Ok(Geometry::Custom),
            other => Err(LatticeError::UnknownGeometry(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: i64,
    pub y: i64,
}

/// All edges between a pair of nodes. `m` is the number of shared two-qubit
/// states; the simulation itself only ever sees one binary edge per bond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub u: usize,
    pub v: usize,
    pub m: u32,
}

#[derive(Serialize, Deserialize)]
struct LatticeDoc {
    geometry: String,
    #[serde(rename = "L")]
    side: usize,
    nodes: Vec<Node>,
    bonds: Vec<Bond>,
}

/// A connected planar network with a straight-line embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    geometry: Geometry,
    side: usize,
    nodes: Vec<Node>,
    bonds: Vec<Bond>,
    rotation: Vec<Vec<usize>>,
}

/// Builds an `side x side` network of the given geometry with `m = 1` on
/// every bond.
///
/// * square: nearest-neighbour grid.
/// * triangular: the square grid plus the `(x, y) - (x+1, y+1)` diagonal of
///   every unit cell.
/// * honeycomb: brick-wall embedding; every horizontal bond plus the vertical
///   bonds `(x, y) - (x, y+1)` with `x + y` even.
pub fn build_lattice(geometry: Geometry, side: usize) -> Result<Network, LatticeError> {
    if side < 2 {
        return Err(LatticeError::InvalidSize(side));
    }
    if geometry == Geometry::Custom {
        return Err(LatticeError::UnknownGeometry("custom".into()));
    }
    let (nodes, bonds) = generate(geometry, side);
    Network::from_parts(geometry, side, nodes, bonds)
}

fn generate(geometry: Geometry, side: usize) -> (Vec<Node>, Vec<Bond>) {
    let id = |x: usize, y: usize| y * side + x;
    let nodes = (0..side * side)
        .map(|i| Node {
            id: i,
            x: (i % side) as i64,
            y: (i / side) as i64,
        })
        .collect();
    let mut bonds = Vec::new();
    let mut push = |u: usize, v: usize| bonds.push(Bond { u, v, m: 1 });
    for y in 0..side {
        for x in 0..side {
            if x + 1 < side {
                push(id(x, y), id(x + 1, y));
            }
            if y + 1 < side {
                let vertical = match geometry {
                    Geometry::Honeycomb => (x + y) % 2 == 0,
                    _ => true,
                };
                if vertical {
                    push(id(x, y), id(x, y + 1));
                }
            }
            if geometry == Geometry::Triangular && x + 1 < side && y + 1 < side {
                push(id(x, y), id(x + 1, y + 1));
            }
        }
    }
    (nodes, bonds)
}

// Counter-clockwise angular order of direction vectors, starting at +x.
fn angle_cmp(a: (i64, i64), b: (i64, i64)) -> Ordering {
    let half = |(dx, dy): (i64, i64)| u8::from(!(dy > 0 || (dy == 0 && dx > 0)));
    half(a).cmp(&half(b)).then_with(|| {
        let cross = a.0 as i128 * b.1 as i128 - a.1 as i128 * b.0 as i128;
        0.cmp(&cross)
    })
}

impl Network {
    /// Validates and assembles a network. Node ids must be `0..n` in order.
    pub fn from_parts(
        geometry: Geometry,
        side: usize,
        nodes: Vec<Node>,
        bonds: Vec<Bond>,
    ) -> Result<Self, LatticeError> {
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(schema(
                    format!("nodes[{i}].id"),
                    format!("expected id {i}, found {}", node.id),
                ));
            }
        }
        if nodes.is_empty() {
            return Err(schema("nodes", "network has no nodes"));
        }
        let n = nodes.len();
        let mut seen = HashSet::new();
        for (k, bond) in bonds.iter().enumerate() {
            for (field, end) in [("u", bond.u), ("v", bond.v)] {
                if end >= n {
                    return Err(schema(format!("bonds[{k}].{field}"), format!("unknown node id {end}")));
                }
            }
            if bond.u == bond.v {
                return Err(schema(format!("bonds[{k}]"), "self-loop"));
            }
            if bond.m == 0 {
                return Err(schema(format!("bonds[{k}].m"), "multiplicity must be at least 1"));
            }
            if !seen.insert((bond.u.min(bond.v), bond.u.max(bond.v))) {
                return Err(schema(
                    format!("bonds[{k}]"),
                    "duplicate bond; use the multiplicity m instead",
                ));
            }
        }

        let mut rotation = vec![Vec::new(); n];
        for (b, bond) in bonds.iter().enumerate() {
            rotation[bond.u].push(2 * b);
            rotation[bond.v].push(2 * b + 1);
        }
        let dir = |d: usize| {
            let bond = &bonds[d / 2];
            let (a, b) = if d.is_multiple_of(2) {
                (bond.u, bond.v)
            } else {
                (bond.v, bond.u)
            };
            (nodes[b].x - nodes[a].x, nodes[b].y - nodes[a].y)
        };
        for (i, darts) in rotation.iter_mut().enumerate() {
            darts.sort_by(|&a, &b| angle_cmp(dir(a), dir(b)));
            if darts
                .windows(2)
                .any(|w| angle_cmp(dir(w[0]), dir(w[1])) == Ordering::Equal)
            {
                return Err(schema(
                    format!("nodes[{i}]"),
                    "two incident bonds leave the node in the same direction; rotation system is inconsistent",
                ));
            }
        }

        let net = Network {
            geometry,
            side,
            nodes,
            bonds,
            rotation,
        };
        if !net.is_connected() {
            return Err(schema("bonds", "network is not connected"));
        }
        Ok(net)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Nodes per side for generated lattices.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Darts leaving `node` in counter-clockwise order.
    pub fn rotation(&self, node: usize) -> &[usize] {
        &self.rotation[node]
    }

    pub fn dart_origin(&self, dart: usize) -> usize {
        let bond = &self.bonds[dart / 2];
        if dart.is_multiple_of(2) {
            bond.u
        } else {
            bond.v
        }
    }

    pub fn dart_target(&self, dart: usize) -> usize {
        self.dart_origin(dart ^ 1)
    }

    /// Same network with every bond carrying `m` edges.
    pub fn with_multiplicity(mut self, m: u32) -> Result<Self, LatticeError> {
        if m == 0 {
            return Err(LatticeError::InvalidMultiplicity);
        }
        for bond in &mut self.bonds {
            bond.m = m;
        }
        Ok(self)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(a) = queue.pop_front() {
            for &d in &self.rotation[a] {
                let b = self.dart_target(d);
                if !seen[b] {
                    seen[b] = true;
                    count += 1;
                    queue.push_back(b);
                }
            }
        }
        count == self.nodes.len()
    }

    pub fn to_json(&self) -> String {
        let doc = LatticeDoc {
            geometry: self.geometry.to_string(),
            side: self.side,
            nodes: self.nodes.clone(),
            bonds: self.bonds.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("lattice document serializes")
    }

    /// Parses and validates a lattice document. The rotation system is
    /// recomputed from the coordinates. Documents tagged with a generator
    /// geometry must match that generator (bond multiplicities may differ);
    /// `custom` documents are checked for crossing bonds instead.
    pub fn from_json(text: &str) -> Result<Self, LatticeError> {
        let doc: LatticeDoc = serde_json::from_str(text).map_err(|e| LatticeError::Json(e.to_string()))?;
        let geometry: Geometry = doc
            .geometry
            .parse()
            .map_err(|_| schema("geometry", format!("unknown geometry `{}`", doc.geometry)))?;
        let net = Network::from_parts(geometry, doc.side, doc.nodes, doc.bonds)?;
        match geometry {
            Geometry::Custom => net.check_no_crossings()?,
            _ => net.check_matches_generator()?,
        }
        Ok(net)
    }

    fn check_matches_generator(&self) -> Result<(), LatticeError> {
        if self.side < 2 {
            return Err(schema(
                "L",
                format!("lattice side must be at least 2, got {}", self.side),
            ));
        }
        let (nodes, bonds) = generate(self.geometry, self.side);
        if nodes != self.nodes {
            return Err(schema(
                "nodes",
                format!(
                    "node set differs from the {} generator with L={}",
                    self.geometry, self.side
                ),
            ));
        }
        if bonds.len() != self.bonds.len() {
            return Err(schema(
                "bonds",
                format!("expected {} bonds for {} L={}", bonds.len(), self.geometry, self.side),
            ));
        }
        for (k, (want, got)) in bonds.iter().zip(&self.bonds).enumerate() {
            if (want.u, want.v) != (got.u, got.v) {
                return Err(schema(
                    format!("bonds[{k}]"),
                    format!("expected ({}, {}), found ({}, {})", want.u, want.v, got.u, got.v),
                ));
            }
        }
        Ok(())
    }

    fn check_no_crossings(&self) -> Result<(), LatticeError> {
        let p = |i: usize| (self.nodes[i].x as i128, self.nodes[i].y as i128);
        for (i, a) in self.bonds.iter().enumerate() {
            for (j, b) in self.bonds.iter().enumerate().skip(i + 1) {
                let shared = [a.u, a.v].iter().any(|x| *x == b.u || *x == b.v);
                if shared {
                    // collinear overlap is caught by the rotation check
                    continue;
                }
                if segments_touch(p(a.u), p(a.v), p(b.u), p(b.v)) {
                    return Err(schema(
                        format!("bonds[{j}]"),
                        format!("crosses bonds[{i}]; network must be planar"),
                    ));
                }
            }
        }
        Ok(())
    }
}

type Pt = (i128, i128);

fn orient(a: Pt, b: Pt, c: Pt) -> i128 {
    ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).signum()
}

fn on_segment(a: Pt, b: Pt, c: Pt) -> bool {
    c.0 >= a.0.min(b.0) && c.0 <= a.0.max(b.0) && c.1 >= a.1.min(b.1) && c.1 <= a.1.max(b.1)
}

fn segments_touch(p1: Pt, p2: Pt, q1: Pt, q2: Pt) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(q1, q2, p1))
        || (d2 == 0 && on_segment(q1, q2, p2))
        || (d3 == 0 && on_segment(p1, p2, q1))
        || (d4 == 0 && on_segment(p1, p2, q2))
}

/// Faces of one connected cluster of surviving bonds, including the exterior.
#[derive(Clone, Debug)]
pub struct DualGraph {
    /// Boundary walk of each face as bond indices, in traversal order.
    faces: Vec<Vec<usize>>,
    exterior: usize,
    /// Dual edges: `(neighbouring face, crossed bond)`. Bridges are omitted.
    adjacency: Vec<Vec<(usize, usize)>>,
    bridges: Vec<usize>,
    bonds: Vec<usize>,
    nodes: Vec<usize>,
    /// Faces on either side of each network bond, `None` outside the cluster.
    bond_sides: Vec<Option<(usize, usize)>>,
}

impl DualGraph {
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_boundary(&self, face: usize) -> &[usize] {
        &self.faces[face]
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn exterior(&self) -> usize {
        self.exterior
    }

    pub fn neighbors(&self, face: usize) -> &[(usize, usize)] {
        &self.adjacency[face]
    }

    /// Bonds bordered on both sides by the same face.
    pub fn bridges(&self) -> &[usize] {
        &self.bridges
    }

    pub fn is_bridge(&self, bond: usize) -> bool {
        matches!(self.bond_sides.get(bond), Some(Some((a, b))) if a == b)
    }

    /// Cluster bonds, sorted.
    pub fn bonds(&self) -> &[usize] {
        &self.bonds
    }

    /// Cluster nodes, sorted.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn contains_bond(&self, bond: usize) -> bool {
        matches!(self.bond_sides.get(bond), Some(Some(_)))
    }

    pub fn bond_sides(&self, bond: usize) -> Option<(usize, usize)> {
        self.bond_sides.get(bond).copied().flatten()
    }
}

/// Enumerates the faces of the subgraph induced by `surviving` bonds.
///
/// The bonds must form one connected cluster. The exterior face is the one
/// whose boundary walk has the most negative signed area: interior faces
/// are traced counter-clockwise, the outer boundary clockwise, and a tree
/// has a single face of area zero.
pub fn dual_of_subgraph(net: &Network, surviving: &[usize]) -> Result<DualGraph, LatticeError> {
    let mut active = vec![false; net.bond_count()];
    for &b in surviving {
        if b >= net.bond_count() {
            return Err(LatticeError::BondOutOfRange(b));
        }
        active[b] = true;
    }
    let bonds: Vec<usize> = (0..net.bond_count()).filter(|&b| active[b]).collect();
    if bonds.is_empty() {
        return Err(LatticeError::EmptyCluster);
    }

    let mut in_cluster = vec![false; net.node_count()];
    for &b in &bonds {
        in_cluster[net.bonds[b].u] = true;
        in_cluster[net.bonds[b].v] = true;
    }
    let nodes: Vec<usize> = (0..net.node_count()).filter(|&i| in_cluster[i]).collect();

    // restricted rotation system and dart positions within it
    let sub: Vec<Vec<usize>> = net
        .rotation
        .iter()
        .map(|darts| darts.iter().copied().filter(|d| active[d / 2]).collect())
        .collect();
    let mut position = vec![usize::MAX; 2 * net.bond_count()];
    for darts in &sub {
        for (i, &d) in darts.iter().enumerate() {
            position[d] = i;
        }
    }

    let mut seen = vec![false; net.node_count()];
    let mut queue = VecDeque::from([nodes[0]]);
    seen[nodes[0]] = true;
    let mut reached = 1;
    while let Some(a) = queue.pop_front() {
        for &d in &sub[a] {
            let b = net.dart_target(d);
            if !seen[b] {
                seen[b] = true;
                reached += 1;
                queue.push_back(b);
            }
        }
    }
    if reached != nodes.len() {
        return Err(LatticeError::Disconnected);
    }

    let next_dart = |d: usize| {
        let twin = d ^ 1;
        let rot = &sub[net.dart_origin(twin)];
        rot[(position[twin] + rot.len() - 1) % rot.len()]
    };

    const UNSET: usize = usize::MAX;
    let mut dart_face = vec![UNSET; 2 * net.bond_count()];
    let mut faces = Vec::new();
    let mut areas = Vec::new();
    for &b in &bonds {
        for start in [2 * b, 2 * b + 1] {
            if dart_face[start] != UNSET {
                continue;
            }
            let face = faces.len();
            let mut walk = Vec::new();
            let mut area2: i128 = 0;
            let mut d = start;
            loop {
                dart_face[d] = face;
                walk.push(d / 2);
                let a = &net.nodes[net.dart_origin(d)];
                let c = &net.nodes[net.dart_target(d)];
                area2 += a.x as i128 * c.y as i128 - a.y as i128 * c.x as i128;
                d = next_dart(d);
                if d == start {
                    break;
                }
            }
            faces.push(walk);
            areas.push(area2);
        }
    }

    let exterior = areas
        .iter()
        .enumerate()
        .min_by_key(|&(_, a)| *a)
        .map(|(i, _)| i)
        .expect("at least one face");

    let mut adjacency = vec![Vec::new(); faces.len()];
    let mut bridges = Vec::new();
    let mut bond_sides = vec![None; net.bond_count()];
    for &b in &bonds {
        let (f, g) = (dart_face[2 * b], dart_face[2 * b + 1]);
        bond_sides[b] = Some((f, g));
        if f == g {
            bridges.push(b);
        } else {
            adjacency[f].push((g, b));
            adjacency[g].push((f, b));
        }
    }

    Ok(DualGraph {
        faces,
        exterior,
        adjacency,
        bridges,
        bonds,
        nodes,
        bond_sides,
    })
}
