//! Unstructured 2D meshes of 3-node triangles and 4-node quadrilaterals.
//!
//! Besides nodes and elements the mesh owns the edge topology the smoothed
//! strain needs: every undirected edge knows the one or two elements that
//! border it, and each edge carries one quadrature point at its midpoint.
//! Edge ids double as quadrature ids.
//!
//! Cracks are realized by topological surgery. [`Mesh::duplicate_node`]
//! rebinds part of a node's element fan to a fresh copy of the node, and any
//! interior edge joining the two parts is doubled into two boundary edges.
//! Edge ids are stable under surgery: existing edges keep their id and new
//! copies are appended, remembering their origin.

mod generate;
mod io;

pub use generate::{generate_annulus_mesh, generate_rect_mesh, Diagonal, Slit};
pub use io::{load_mesh, write_internal, MeshFormat};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Tri,
    Quad,
}

impl ElementKind {
    pub fn node_count(self) -> usize {
        match self {
            ElementKind::Tri => 3,
            ElementKind::Quad => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Element {
    pub kind: ElementKind,
    nodes: [usize; 4],
}

impl Element {
    pub fn tri(a: usize, b: usize, c: usize) -> Self {
        Self {
            kind: ElementKind::Tri,
            nodes: [a, b, c, usize::MAX],
        }
    }

    pub fn quad(a: usize, b: usize, c: usize, d: usize) -> Self {
        Self {
            kind: ElementKind::Quad,
            nodes: [a, b, c, d],
        }
    }

    pub fn from_nodes(nodes: &[usize]) -> Option<Self> {
        match *nodes {
            [a, b, c] => Some(Self::tri(a, b, c)),
            [a, b, c, d] => Some(Self::quad(a, b, c, d)),
            _ => None,
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.kind.node_count()]
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [usize] {
        let n = self.kind.node_count();
        &mut self.nodes[..n]
    }

    pub fn edge_count(&self) -> usize {
        self.kind.node_count()
    }

    /// Local edge `k` runs from local node `k` to local node `k + 1`.
    pub fn local_edge(&self, k: usize) -> (usize, usize) {
        let n = self.kind.node_count();
        (self.nodes[k], self.nodes[(k + 1) % n])
    }

    fn reversed(&self) -> Self {
        let mut e = *self;
        e.nodes_mut().reverse();
        e
    }
}

/// One element bordering an edge, with the local edge index inside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeSide {
    pub element: usize,
    pub local: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoint node ids, sorted ascending.
    pub nodes: [usize; 2],
    /// Bordering elements, sorted by element id. One entry on free surfaces.
    pub sides: SmallVec<[EdgeSide; 2]>,
    /// Id of the edge this one was doubled from (itself if never doubled).
    pub origin: usize,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.sides.len() == 1
    }

    pub fn has_node(&self, n: usize) -> bool {
        self.nodes[0] == n || self.nodes[1] == n
    }

    pub fn other_node(&self, n: usize) -> usize {
        if self.nodes[0] == n {
            self.nodes[1]
        } else {
            self.nodes[0]
        }
    }
}

/// Integration point at an edge midpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeQuadrature {
    pub edge: usize,
    /// Midpoint in reference coordinates (m).
    pub midpoint: Point,
    pub elements: SmallVec<[usize; 2]>,
    /// Area weights `A_j / sum(A)`, parallel to `elements`.
    pub weights: SmallVec<[f64; 2]>,
    /// Integration measure, the sum of the bordering elements' shares (m² per
    /// unit thickness).
    pub area: f64,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    nodes: Vec<Point>,
    elements: Vec<Element>,
    areas: Vec<f64>,
    edges: Vec<Edge>,
    quadratures: Vec<EdgeQuadrature>,
    element_edges: Vec<[usize; 4]>,
    node_elements: Vec<SmallVec<[usize; 8]>>,
}

pub fn signed_area(nodes: &[Point], element: &Element) -> f64 {
    let ids = element.nodes();
    let n = ids.len();
    let mut twice = 0.0;
    for k in 0..n {
        let p = nodes[ids[k]];
        let q = nodes[ids[(k + 1) % n]];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * twice
}

pub fn distance(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Part of an element's area handed to its local edge `local`: `A/3` on a
/// triangle, the Jacobian at the edge midpoint on a quad. The quad shares sum
/// to `A` and make the midpoint gradients integrate `grad N` exactly, so
/// distorted quads still pass the patch test.
fn side_share(nodes: &[Point], element: &Element, area: f64, local: usize) -> f64 {
    match element.kind {
        ElementKind::Tri => area / 3.0,
        ElementKind::Quad => {
            let x: Vec<Point> = element.nodes().iter().map(|&n| nodes[n]).collect();
            let (xi, eta) = [(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)][local];
            let dxi = |k: usize| 0.25 * ((1.0 - eta) * (x[1][k] - x[0][k]) + (1.0 + eta) * (x[2][k] - x[3][k]));
            let deta = |k: usize| 0.25 * ((1.0 - xi) * (x[3][k] - x[0][k]) + (1.0 + xi) * (x[2][k] - x[1][k]));
            dxi(0) * deta(1) - dxi(1) * deta(0)
        }
    }
}

fn make_quadrature(
    edge_id: usize,
    edge: &Edge,
    nodes: &[Point],
    elements: &[Element],
    areas: &[f64],
) -> EdgeQuadrature {
    let a = nodes[edge.nodes[0]];
    let b = nodes[edge.nodes[1]];
    let share = |s: &EdgeSide| side_share(nodes, &elements[s.element], areas[s.element], s.local);
    let total: f64 = edge.sides.iter().map(share).sum();
    EdgeQuadrature {
        edge: edge_id,
        midpoint: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
        elements: edge.sides.iter().map(|s| s.element).collect(),
        weights: edge.sides.iter().map(|s| share(s) / total).collect(),
        area: total,
    }
}

/// Enumerates the undirected edges of `elements` in first-appearance order
/// and builds one midpoint quadrature per edge.
///
/// Fails on an edge shared by more than two elements.
pub fn build_edge_topology(
    nodes: &[Point],
    elements: &[Element],
    areas: &[f64],
) -> Result<(Vec<Edge>, Vec<EdgeQuadrature>, Vec<[usize; 4]>)> {
    let mut lookup: HashMap<[usize; 2], usize> = HashMap::with_capacity(elements.len() * 2);
    let mut edges: Vec<Edge> = Vec::with_capacity(elements.len() * 2);
    let mut element_edges = vec![[usize::MAX; 4]; elements.len()];
    for (e, el) in elements.iter().enumerate() {
        for k in 0..el.edge_count() {
            let (a, b) = el.local_edge(k);
            let key = sorted_pair(a, b);
            let id = *lookup.entry(key).or_insert_with(|| {
                edges.push(Edge {
                    nodes: key,
                    sides: SmallVec::new(),
                    origin: edges.len(),
                });
                edges.len() - 1
            });
            let edge = &mut edges[id];
            if edge.sides.len() == 2 {
                return Err(Error::Topology(format!(
                    "non-manifold edge ({}, {}) shared by elements {}, {} and {}",
                    key[0], key[1], edge.sides[0].element, edge.sides[1].element, e
                )));
            }
            edge.sides.push(EdgeSide { element: e, local: k });
            element_edges[e][k] = id;
        }
    }
    for edge in &mut edges {
        edge.sides.sort_by_key(|s| s.element);
    }
    let quads = edges
        .iter()
        .enumerate()
        .map(|(i, e)| make_quadrature(i, e, nodes, elements, areas))
        .collect();
    Ok((edges, quads, element_edges))
}

impl Mesh {
    /// Builds a mesh and its edge topology. Elements must be counter-clockwise.
    pub fn new(nodes: Vec<Point>, elements: Vec<Element>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(elements.len());
        for (e, el) in elements.iter().enumerate() {
            if let Some(&bad) = el.nodes().iter().find(|&&n| n >= nodes.len()) {
                return Err(Error::Topology(format!(
                    "element {e} references node {bad} but the mesh has {} nodes",
                    nodes.len()
                )));
            }
            let mut key: SmallVec<[usize; 4]> = el.nodes().iter().copied().collect();
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Topology(format!("element {e} repeats a node")));
            }
            if let Some(prev) = seen.insert(key, e) {
                return Err(Error::Topology(format!(
                    "elements {prev} and {e} have the same nodes"
                )));
            }
        }
        let areas: Vec<f64> = elements.iter().map(|el| signed_area(&nodes, el)).collect();
        if let Some((e, a)) = areas.iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
            return Err(Error::Topology(format!(
                "element {e} has non-positive signed area {a:.3e}"
            )));
        }
        let (edges, quadratures, element_edges) = build_edge_topology(&nodes, &elements, &areas)?;
        // each element hands A/n to each of its n edges, so the measures tile the domain
        let total: f64 = areas.iter().sum();
        let measured: f64 = quadratures.iter().map(|q| q.area).sum();
        if (measured - total).abs() > 1e-10 * total {
            return Err(Error::Topology(format!(
                "quadrature measures sum to {measured:e}, mesh area is {total:e}"
            )));
        }
        let mut node_elements: Vec<SmallVec<[usize; 8]>> = vec![SmallVec::new(); nodes.len()];
        for (e, el) in elements.iter().enumerate() {
            for &n in el.nodes() {
                node_elements[n].push(e);
            }
        }
        Ok(Self {
            nodes,
            elements,
            areas,
            edges,
            quadratures,
            element_edges,
            node_elements,
        })
    }

    /// Like [`Mesh::new`] but flips clockwise elements instead of failing.
    /// Returns the ids of the elements that were reordered.
    pub fn new_fix_orientation(nodes: Vec<Point>, mut elements: Vec<Element>) -> Result<(Self, Vec<usize>)> {
        let mut flipped = Vec::new();
        for (e, el) in elements.iter_mut().enumerate() {
            if signed_area(&nodes, el) < 0.0 {
                *el = el.reversed();
                flipped.push(e);
            }
        }
        Ok((Self::new(nodes, elements)?, flipped))
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, n: usize) -> Point {
        self.nodes[n]
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &Element {
        &self.elements[e]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn quadratures(&self) -> &[EdgeQuadrature] {
        &self.quadratures
    }

    pub fn quadrature(&self, id: usize) -> &EdgeQuadrature {
        &self.quadratures[id]
    }

    /// Edge ids of element `e`, indexed by local edge.
    pub fn element_edges(&self, e: usize) -> &[usize] {
        &self.element_edges[e][..self.elements[e].edge_count()]
    }

    pub fn node_elements(&self, n: usize) -> &[usize] {
        &self.node_elements[n]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn edge_length(&self, id: usize) -> f64 {
        let [a, b] = self.edges[id].nodes;
        distance(self.nodes[a], self.nodes[b])
    }

    pub fn element_centroid(&self, e: usize) -> Point {
        let ids = self.elements[e].nodes();
        let mut c = [0.0; 2];
        for &n in ids {
            c[0] += self.nodes[n][0];
            c[1] += self.nodes[n][1];
        }
        let k = ids.len() as f64;
        [c[0] / k, c[1] / k]
    }

    /// Shortest edge of each element, in reference coordinates.
    pub fn element_min_edge(&self, e: usize) -> f64 {
        let el = &self.elements[e];
        (0..el.edge_count())
            .map(|k| {
                let (a, b) = el.local_edge(k);
                distance(self.nodes[a], self.nodes[b])
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_boundary())
            .map(|(i, _)| i)
    }

    /// Edges incident to node `n`, in ascending id order.
    pub fn node_edges(&self, n: usize) -> SmallVec<[usize; 12]> {
        let mut out: SmallVec<[usize; 12]> = SmallVec::new();
        for &e in &self.node_elements[n] {
            for &id in self.element_edges(e) {
                if self.edges[id].has_node(n) && !out.contains(&id) {
                    out.push(id);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Groups the elements around `n` into pieces that stay connected through
    /// interior edges incident to `n`, ignoring the edges listed in `cut`.
    /// Components are sorted by their smallest element id.
    pub fn fan_components(&self, n: usize, cut: &[usize]) -> Vec<Vec<usize>> {
        let fan = &self.node_elements[n];
        let mut label: SmallVec<[usize; 8]> = smallvec![usize::MAX; fan.len()];
        let pos = |e: usize| fan.iter().position(|&f| f == e);
        let mut components: Vec<Vec<usize>> = Vec::new();
        let mut order: SmallVec<[usize; 8]> = (0..fan.len()).collect();
        order.sort_by_key(|&i| fan[i]);
        for &start in &order {
            if label[start] != usize::MAX {
                continue;
            }
            let c = components.len();
            let mut members = vec![fan[start]];
            label[start] = c;
            let mut stack = vec![fan[start]];
            while let Some(e) = stack.pop() {
                for &id in self.element_edges(e) {
                    let edge = &self.edges[id];
                    if edge.sides.len() != 2 || !edge.has_node(n) || cut.contains(&id) {
                        continue;
                    }
                    for side in &edge.sides {
                        if let Some(i) = pos(side.element) {
                            if label[i] == usize::MAX {
                                label[i] = c;
                                members.push(side.element);
                                stack.push(side.element);
                            }
                        }
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    /// Splits node `node` in two: elements in `side_b` are rebound to a new
    /// node with the same reference coordinates, elements in `side_a` keep the
    /// original. Interior edges incident to `node` that join the two sides are
    /// doubled. Returns the new node id.
    ///
    /// The partition must cover the element fan of `node` exactly, both sides
    /// must be non-empty, and `side_b` must be connected through edges
    /// incident to `node`.
    pub fn duplicate_node(&mut self, node: usize, side_a: &[usize], side_b: &[usize]) -> Result<usize> {
        if node >= self.nodes.len() {
            return Err(Error::Topology(format!("node {node} does not exist")));
        }
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::Topology(format!(
                "partition of node {node} leaves one side empty"
            )));
        }
        let fan = &self.node_elements[node];
        let mut all: Vec<usize> = side_a.iter().chain(side_b).copied().collect();
        all.sort_unstable();
        let mut fan_sorted: Vec<usize> = fan.to_vec();
        fan_sorted.sort_unstable();
        if all != fan_sorted {
            return Err(Error::Topology(format!(
                "partition {side_a:?} | {side_b:?} is not a two-coloring of the fan {fan_sorted:?} of node {node}"
            )));
        }
        // side_b must be one contiguous arc of the fan
        let in_b = |e: usize| side_b.contains(&e);
        let mut reached = vec![side_b[0]];
        let mut stack = vec![side_b[0]];
        while let Some(e) = stack.pop() {
            for &id in self.element_edges(e) {
                let edge = &self.edges[id];
                if edge.sides.len() != 2 || !edge.has_node(node) {
                    continue;
                }
                for s in &edge.sides {
                    if in_b(s.element) && !reached.contains(&s.element) {
                        reached.push(s.element);
                        stack.push(s.element);
                    }
                }
            }
        }
        if reached.len() != side_b.len() {
            return Err(Error::Topology(format!(
                "side {side_b:?} of node {node} is not connected through the fan"
            )));
        }

        let new_node = self.nodes.len();
        self.nodes.push(self.nodes[node]);
        self.node_elements.push(SmallVec::new());

        let incident = self.node_edges(node);
        for id in incident {
            let sides = self.edges[id].sides.clone();
            let b_sides: SmallVec<[EdgeSide; 2]> = sides.iter().copied().filter(|s| in_b(s.element)).collect();
            if b_sides.is_empty() {
                continue;
            }
            let other = self.edges[id].other_node(node);
            if b_sides.len() == sides.len() {
                self.edges[id].nodes = sorted_pair(new_node, other);
            } else {
                // crossing edge: side_a keeps the original, side_b gets a copy
                let copy_id = self.edges.len();
                let side = b_sides[0];
                self.edges[id].sides.retain(|s| !in_b(s.element));
                self.edges.push(Edge {
                    nodes: sorted_pair(new_node, other),
                    sides: smallvec![side],
                    origin: self.edges[id].origin,
                });
                self.element_edges[side.element][side.local] = copy_id;
                self.quadratures[id] =
                    make_quadrature(id, &self.edges[id], &self.nodes, &self.elements, &self.areas);
                let q = make_quadrature(copy_id, &self.edges[copy_id], &self.nodes, &self.elements, &self.areas);
                self.quadratures.push(q);
            }
        }
        for &e in side_b {
            for slot in self.elements[e].nodes_mut() {
                if *slot == node {
                    *slot = new_node;
                }
            }
        }
        self.node_elements[node].retain(|e| !side_b.contains(e));
        self.node_elements[new_node] = side_b.iter().copied().collect();
        Ok(new_node)
    }

    /// Opens edge `id` into two free-surface edges, duplicating each endpoint
    /// whose element fan becomes disconnected. Returns `(original, copy)` pairs
    /// for every node created.
    ///
    /// Fails when neither endpoint can be separated (a crack fully enclosed in
    /// the body), since the edge could not open.
    pub fn open_edge(&mut self, id: usize) -> Result<SmallVec<[(usize, usize); 3]>> {
        if self.edges[id].is_boundary() {
            return Err(Error::Topology(format!("edge {id} is already a free surface")));
        }
        let mut created: SmallVec<[(usize, usize); 3]> = SmallVec::new();
        let [n0, n1] = self.edges[id].nodes;
        for n in [n0, n1] {
            let cut: &[usize] = if self.edges[id].is_boundary() { &[] } else { &[id] };
            let mut comps = self.fan_components(n, cut);
            while comps.len() > 1 {
                let b = comps.pop().unwrap();
                let a: Vec<usize> = comps.iter().flatten().copied().collect();
                let fresh = self.duplicate_node(n, &a, &b)?;
                created.push((n, fresh));
            }
        }
        if !self.edges[id].is_boundary() {
            return Err(Error::Topology(format!(
                "edge {id} cannot open: neither endpoint touches a free surface"
            )));
        }
        Ok(created)
    }
}
