//! Crack element model: energy release rate from edge stretch, split
//! decisions for triangles and quadrilaterals, and realization of a split as
//! mesh surgery.
//!
//! A crack advances from the midpoint of a free-surface edge `G0` across one
//! element to the midpoint of one of its interior edges `Gi`. The target edge
//! is opened into two free-surface edges; the element is detached from its
//! neighbor across `Gi`. Dissipated energy grows by `Gc` times the reference
//! distance between the two midpoints.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::dynamics::{LoadCase, SimState};
use crate::error::{Error, Result};
use crate::esfem::{node_mass, Material, Voigt};
use crate::mesh::{distance, ElementKind, Mesh, Point};

/// Relative endpoint displacement of an edge, kept only while the edge is
/// longer than in the reference configuration.
pub fn edge_stretch(mesh: &Mesh, u: &[f64], edge: usize) -> Result<[f64; 2]> {
    let [n1, n2] = mesh.edge(edge).nodes;
    let (x1, x2) = (mesh.node(n1), mesh.node(n2));
    let reference = distance(x1, x2);
    if !(reference > 0.0) {
        return Err(Error::Topology(format!("edge {edge} has zero reference length")));
    }
    let d = [u[2 * n2] - u[2 * n1], u[2 * n2 + 1] - u[2 * n1 + 1]];
    let current = (x2[0] - x1[0] + d[0]).hypot(x2[1] - x1[1] + d[1]);
    Ok(if current / reference - 1.0 > 0.0 { d } else { [0.0, 0.0] })
}

/// Traction of the stress `s` on the plane with unit normal `n`.
pub fn traction(s: Voigt, n: [f64; 2]) -> [f64; 2] {
    [s[0] * n[0] + s[2] * n[1], s[2] * n[0] + s[1] * n[1]]
}

/// `G = delta . (sigma n) / 2` for a stretch `delta` at the tip and the stress
/// at the candidate, `n` normal to the segment `p0 -> pi` and oriented along
/// the opening. Negative values mean the crack faces would close.
pub fn release_rate(delta: [f64; 2], sigma: Voigt, p0: Point, pi: Point) -> f64 {
    let (tx, ty) = (pi[0] - p0[0], pi[1] - p0[1]);
    let len = tx.hypot(ty);
    let mut n = [-ty / len, tx / len];
    if delta[0] * n[0] + delta[1] * n[1] < 0.0 {
        n = [-n[0], -n[1]];
    }
    let t = traction(sigma, n);
    0.5 * (delta[0] * t[0] + delta[1] * t[1])
}

/// Energy release rate for a crack segment from quadrature `g0` to `gi`.
pub fn energy_release_rate(mesh: &Mesh, u: &[f64], stress: &[Voigt], g0: usize, gi: usize) -> Result<f64> {
    if g0 == gi {
        return Err(Error::Argument(format!("tip and candidate are the same quadrature {g0}")));
    }
    let (a, b) = (&mesh.quadrature(g0).elements, &mesh.quadrature(gi).elements);
    if !a.iter().any(|e| b.contains(e)) {
        return Err(Error::Argument(format!("quadratures {g0} and {gi} share no element")));
    }
    let delta = edge_stretch(mesh, u, g0)?;
    Ok(release_rate(delta, stress[gi], mesh.quadrature(g0).midpoint, mesh.quadrature(gi).midpoint))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dominance {
    /// `g_max > gamma (g_max - g_other)`.
    #[default]
    Literal,
    /// `g_max - g_other > gamma g_max`.
    Margin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCriteria {
    /// Critical energy release rate (J/m²).
    pub gc: f64,
    /// Split ratio.
    pub gamma: f64,
    pub dominance: Dominance,
}

impl SplitCriteria {
    pub fn new(gc: f64, gamma: f64) -> Self {
        Self {
            gc,
            gamma,
            dominance: Dominance::Literal,
        }
    }

    pub fn dominates(&self, g_max: f64, g_other: f64) -> bool {
        match self.dominance {
            Dominance::Literal => g_max > self.gamma * (g_max - g_other),
            Dominance::Margin => g_max - g_other > self.gamma * g_max,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitDecision {
    pub tip: usize,
    /// Target quadrature, if the crack advances.
    pub target: Option<usize>,
    /// `(quadrature, G)` for every candidate that was evaluated.
    pub candidates: SmallVec<[(usize, f64); 3]>,
}

impl SplitDecision {
    /// `G` of the chosen target, or 0 when there is none.
    pub fn g(&self) -> f64 {
        self.target
            .and_then(|t| self.candidates.iter().find(|c| c.0 == t))
            .map_or(0.0, |c| c.1)
    }
}

/// Case table shared by both element kinds: nothing above `Gc` gives no
/// split, a single candidate above `Gc` is taken, and with several the
/// largest must dominate every other one above `Gc`. Equal maxima go to the
/// lower quadrature id.
pub fn evaluate_split(tip: usize, candidates: &[(usize, f64)], criteria: &SplitCriteria) -> SplitDecision {
    let above: SmallVec<[(usize, f64); 3]> = candidates.iter().copied().filter(|c| c.1 > criteria.gc).collect();
    let target = match above.len() {
        0 => None,
        1 => Some(above[0].0),
        _ => {
            let best = above
                .iter()
                .copied()
                .reduce(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
                .expect("non-empty");
            above
                .iter()
                .filter(|c| c.0 != best.0)
                .all(|c| criteria.dominates(best.1, c.1))
                .then_some(best.0)
        }
    };
    SplitDecision {
        tip,
        target,
        candidates: candidates.iter().copied().collect(),
    }
}

/// Triangle: two candidate edges beyond the tip edge.
pub fn evaluate_cst_split(tip: usize, candidates: [(usize, f64); 2], criteria: &SplitCriteria) -> SplitDecision {
    evaluate_split(tip, &candidates, criteria)
}

/// Quadrilateral: two adjacent edges and the opposite one.
pub fn evaluate_quad_split(tip: usize, candidates: [(usize, f64); 3], criteria: &SplitCriteria) -> SplitDecision {
    evaluate_split(tip, &candidates, criteria)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackingMode {
    Sct,
    #[default]
    Mct,
}

/// One straight crack segment across an element.
#[derive(Clone, Debug, PartialEq)]
pub struct CrackSegment {
    pub id: usize,
    pub element: usize,
    pub from: usize,
    pub to: usize,
    /// Root edge ids of both ends; flank copies share their root.
    pub from_root: usize,
    pub to_root: usize,
    pub p0: Point,
    pub p1: Point,
    pub length: f64,
    pub t_split: f64,
    pub ud_cumulative: f64,
}

/// Why single-tip tracking stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Halt {
    /// The next element has no interior edge left to cross.
    FreeSurface,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitRecord {
    pub segment: usize,
    /// `(original, copy)` for every duplicated node.
    pub nodes: SmallVec<[(usize, usize); 4]>,
    /// Elements whose connectivity may have changed.
    pub touched: Vec<usize>,
    pub ud_increment: f64,
}

#[derive(Clone, Debug)]
pub struct CrackTopology {
    pub criteria: SplitCriteria,
    pub mode: TrackingMode,
    pub segments: Vec<CrackSegment>,
    /// Dissipated energy `U_d` (J/m).
    pub dissipated: f64,
    /// Per edge: opened by a crack (both flank copies are marked).
    pub cracked: Vec<bool>,
    /// Per edge: may serve as a crack tip when on a free surface.
    pub crackable: Vec<bool>,
    /// Current single-tip quadrature.
    pub tip: Option<usize>,
    /// Quadratures the single-tip tracker starts from.
    pub seeds: Vec<usize>,
    pub halted: Option<Halt>,
}

impl CrackTopology {
    pub fn new(mesh: &Mesh, criteria: SplitCriteria, mode: TrackingMode) -> Self {
        Self {
            criteria,
            mode,
            segments: Vec::new(),
            dissipated: 0.0,
            cracked: vec![false; mesh.edge_count()],
            crackable: vec![true; mesh.edge_count()],
            tip: None,
            seeds: Vec::new(),
            halted: None,
        }
    }

    pub fn set_crackable(&mut self, edges: impl IntoIterator<Item = usize>, value: bool) {
        for id in edges {
            self.crackable[id] = value;
        }
    }

    /// Free-surface quadratures that may act as crack tips.
    pub fn free_surface(&self, mesh: &Mesh) -> Vec<usize> {
        mesh.boundary_edges().filter(|&id| self.crackable[id]).collect()
    }

    /// Total reference length of all segments.
    pub fn crack_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Interior edges of the element on the free side of `tip`, in local
    /// edge order.
    pub fn candidates(mesh: &Mesh, tip: usize) -> (usize, SmallVec<[usize; 3]>) {
        let element = mesh.edge(tip).sides[0].element;
        let c = mesh
            .element_edges(element)
            .iter()
            .copied()
            .filter(|&q| q != tip && !mesh.edge(q).is_boundary())
            .collect();
        (element, c)
    }

    /// Evaluates the case table at one free-surface quadrature.
    pub fn decide(&self, mesh: &Mesh, u: &[f64], stress: &[Voigt], tip: usize) -> Result<SplitDecision> {
        let (_, targets) = Self::candidates(mesh, tip);
        let delta = edge_stretch(mesh, u, tip)?;
        let p0 = mesh.quadrature(tip).midpoint;
        let candidates: SmallVec<[(usize, f64); 3]> = targets
            .iter()
            .map(|&q| (q, release_rate(delta, stress[q], p0, mesh.quadrature(q).midpoint)))
            .collect();
        Ok(evaluate_split(tip, &candidates, &self.criteria))
    }

    /// Realizes the segment `g0 -> gi`: opens edge `gi`, duplicates nodes in
    /// the mesh, the kinematic state and the constraint table, re-lumps the
    /// affected masses and books the dissipated energy.
    #[allow(clippy::too_many_arguments)]
    pub fn apply_split(
        &mut self,
        mesh: &mut Mesh,
        state: &mut SimState,
        loads: &mut LoadCase,
        material: &Material,
        g0: usize,
        gi: usize,
        t: f64,
    ) -> Result<SplitRecord> {
        if !mesh.edge(g0).is_boundary() {
            return Err(Error::Topology(format!("tip edge {g0} is not on a free surface")));
        }
        if mesh.edge(gi).is_boundary() {
            return Err(Error::Topology(format!("target edge {gi} is already open")));
        }
        let element = mesh.edge(g0).sides[0].element;
        let locals = mesh.element_edges(element);
        let (Some(k0), Some(ki)) = (locals.iter().position(|&q| q == g0), locals.iter().position(|&q| q == gi)) else {
            return Err(Error::Topology(format!("edges {g0} and {gi} do not share element {element}")));
        };
        let kind = mesh.element(element).kind;
        let first_edge = mesh.edge_count();
        let mut opened: SmallVec<[usize; 2]> = SmallVec::new();
        // a quad crossed to its opposite edge may have both far nodes inside
        // the body; the crack then also runs along the adjacent edge with
        // the shared free-surface node
        if kind == ElementKind::Quad && (k0 + 2) % 4 == ki && !Self::opens(mesh, gi) {
            let adj = [locals[(k0 + 1) % 4], locals[(k0 + 3) % 4]]
                .into_iter()
                .filter(|&q| !mesh.edge(q).is_boundary())
                .min()
                .ok_or_else(|| Error::Topology(format!("quad {element} cannot be crossed from {g0} to {gi}")))?;
            opened.push(adj);
        }
        opened.push(gi);

        let mut touched: Vec<usize> = Vec::new();
        let mut nodes: SmallVec<[(usize, usize); 4]> = SmallVec::new();
        for &q in &opened {
            for n in mesh.edge(q).nodes {
                touched.extend_from_slice(mesh.node_elements(n));
            }
            for (orig, copy) in mesh.open_edge(q)? {
                let c = state.duplicate_node(orig);
                debug_assert_eq!(c, copy);
                loads.duplicate_node(orig, copy);
                nodes.push((orig, copy));
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for &(orig, copy) in &nodes {
            state.mass[orig] = node_mass(mesh, material, orig);
            state.mass[copy] = node_mass(mesh, material, copy);
        }
        self.cracked.resize(mesh.edge_count(), false);
        self.crackable.resize(mesh.edge_count(), true);
        for &q in &opened {
            let root = mesh.edge(q).origin;
            self.cracked[q] = true;
            for id in first_edge..mesh.edge_count() {
                if mesh.edge(id).origin == root {
                    self.cracked[id] = true;
                }
            }
        }

        let (p0, p1) = (mesh.quadrature(g0).midpoint, mesh.quadrature(gi).midpoint);
        let length = distance(p0, p1);
        let ud_increment = self.criteria.gc * length;
        self.dissipated += ud_increment;
        let id = self.segments.len();
        self.segments.push(CrackSegment {
            id,
            element,
            from: g0,
            to: gi,
            from_root: mesh.edge(g0).origin,
            to_root: mesh.edge(gi).origin,
            p0,
            p1,
            length,
            t_split: t,
            ud_cumulative: self.dissipated,
        });

        if self.mode == TrackingMode::Sct {
            // continue from the flank of gi that faces away from this element
            let root = mesh.edge(gi).origin;
            let next = std::iter::once(gi)
                .chain(first_edge..mesh.edge_count())
                .find(|&q| mesh.edge(q).origin == root && mesh.edge(q).sides[0].element != element);
            self.tip = next;
            if next.is_none_or(|q| Self::candidates(mesh, q).1.is_empty()) {
                self.halted = Some(Halt::FreeSurface);
            }
        }
        Ok(SplitRecord {
            segment: id,
            nodes,
            touched,
            ud_increment,
        })
    }

    /// Whether opening edge `q` alone would separate at least one endpoint.
    fn opens(mesh: &Mesh, q: usize) -> bool {
        mesh.edge(q).nodes.iter().any(|&n| mesh.fan_components(n, &[q]).len() > 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esfem::Formulation;
    use crate::mesh::{generate_rect_mesh, Diagonal};
    use approx::assert_relative_eq;

    fn crit(gamma: f64) -> SplitCriteria {
        SplitCriteria::new(1.0, gamma)
    }

    #[test]
    fn cst_case_table() {
        let c = crit(1.0);
        assert_eq!(evaluate_cst_split(0, [(1, 0.5), (2, 0.8)], &c).target, None);
        assert_eq!(evaluate_cst_split(0, [(1, 1.5), (2, 0.5)], &c).target, Some(1));
        // 2.0 > 2 * 0.5 holds strictly; equality only arrives at gamma = 4
        assert_eq!(evaluate_cst_split(0, [(1, 2.0), (2, 1.5)], &crit(2.0)).target, Some(1));
        assert_eq!(evaluate_cst_split(0, [(1, 2.0), (2, 1.5)], &crit(1.5)).target, Some(1));
        assert_eq!(evaluate_cst_split(0, [(1, 2.0), (2, 1.5)], &crit(4.0)).target, None);
        assert_eq!(evaluate_cst_split(0, [(1, 2.0), (2, 1.2)], &crit(4.0)).target, None);
    }

    #[test]
    fn quad_case_table() {
        let c = crit(1.2);
        assert_eq!(evaluate_quad_split(0, [(1, 0.9), (2, 0.3), (3, 0.99)], &c).target, None);
        assert_eq!(evaluate_quad_split(0, [(1, 1.2), (2, 0.3), (3, 0.4)], &c).target, Some(1));
        assert_eq!(evaluate_quad_split(0, [(1, 2.0), (2, 1.8), (3, 1.9)], &c).target, Some(1));
        assert_eq!(evaluate_quad_split(0, [(1, 4.0), (2, 1.8), (3, 3.9)], &crit(2.0)).target, None);
    }

    #[test]
    fn threshold_is_strict_and_ties_go_low() {
        let c = crit(1.0);
        assert_eq!(evaluate_split(0, &[(5, 1.0), (6, 1.0)], &c).target, None);
        assert_eq!(evaluate_split(0, &[(6, 1.5), (5, 1.5)], &c).target, Some(5));
    }

    #[test]
    fn margin_dominance() {
        let c = SplitCriteria {
            dominance: Dominance::Margin,
            ..crit(0.2)
        };
        assert_eq!(evaluate_split(0, &[(1, 2.0), (2, 1.5)], &c).target, Some(1));
        assert_eq!(evaluate_split(0, &[(1, 2.0), (2, 1.7)], &c).target, None);
    }

    #[test]
    fn stretch_gate() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![crate::mesh::Element::tri(0, 1, 2)]).unwrap();
        let e = mesh.edges().iter().position(|e| e.nodes == [0, 1]).unwrap();
        let mut u = vec![0.0; 6];
        u[2] = -1e-5;
        assert_eq!(edge_stretch(&mesh, &u, e).unwrap(), [0.0, 0.0]);
        u[2] = 1e-5;
        assert_eq!(edge_stretch(&mesh, &u, e).unwrap(), [1e-5, 0.0]);
        // rigid rotation by 30 degrees about node 0
        let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
        let rot: Vec<f64> = mesh.nodes().iter().flat_map(|p| [c * p[0] - s * p[1] - p[0], s * p[0] + c * p[1] - p[1]]).collect();
        let d = edge_stretch(&mesh, &rot, e).unwrap();
        let len = (1.0 + rot[2]).hypot(rot[3]);
        assert!((len - 1.0).abs() < 1e-15);
        if len <= 1.0 {
            assert_eq!(d, [0.0, 0.0]);
        }
    }

    #[test]
    fn mode_one_release_rate() {
        let (delta, sigma) = (2e-6, 5e6);
        let g = release_rate([0.0, delta], [0.0, sigma, 0.0], [0.0, 0.0], [1.0, 0.0]);
        assert_relative_eq!(g, delta * sigma / 2.0, max_relative = 1e-15);
        // the segment direction sign does not matter
        let g2 = release_rate([0.0, delta], [0.0, sigma, 0.0], [1.0, 0.0], [0.0, 0.0]);
        assert_relative_eq!(g, g2);
        assert_eq!(release_rate([0.0, 0.0], [1e9, 1e9, 1e9], [0.0, 0.0], [1.0, 0.0]), 0.0);
        let k = 3.0;
        assert_relative_eq!(release_rate([1e-6, 2e-6], [k * 1.0, k * 2.0, k * 0.5], [0.0, 0.0], [0.3, 1.0]),
            k * release_rate([1e-6, 2e-6], [1.0, 2.0, 0.5], [0.0, 0.0], [0.3, 1.0]), max_relative = 1e-14);
        // compression across the segment gives a negative value
        assert!(release_rate([0.0, 1e-6], [0.0, -1e6, 0.0], [0.0, 0.0], [1.0, 0.0]) < 0.0);
    }

    fn strip() -> (Mesh, SimState, LoadCase, Material) {
        let mesh = generate_rect_mesh(4.0, 1.0, 4, 1, ElementKind::Tri, Diagonal::Uniform, &[]).unwrap();
        let mat = Material::new(1e6, 0.2, 10.0, 2.5, Formulation::PlaneStrain).unwrap();
        let mut state = SimState::new(crate::esfem::lumped_mass(&mesh, &mat));
        for (i, x) in state.v.iter_mut().enumerate() {
            *x = 0.1 * i as f64;
        }
        let loads = LoadCase::new(mesh.node_count());
        (mesh, state, loads, mat)
    }

    #[test]
    fn split_books_energy_and_conserves_mass() {
        let (mut mesh, mut state, mut loads, mat) = strip();
        let mut topo = CrackTopology::new(&mesh, SplitCriteria::new(mat.gc, 1.0), TrackingMode::Mct);
        let (mass, area, momentum) = (state.total_mass(), mesh.total_area(), state.momentum());
        // bottom edge of the first cell, then into the cell diagonal
        let g0 = mesh.edges().iter().position(|e| e.nodes == [0, 1]).unwrap();
        let (_, cands) = CrackTopology::candidates(&mesh, g0);
        assert_eq!(cands.len(), 2);
        let gi = cands.into_iter().find(|&q| mesh.edge(q).nodes == [1, 6]).unwrap();
        let free_before = topo.free_surface(&mesh).len();
        let rec = topo.apply_split(&mut mesh, &mut state, &mut loads, &mat, g0, gi, 1e-6).unwrap();
        assert_eq!(topo.free_surface(&mesh).len(), free_before + 2);
        // a one-cell strip: both ends of the opened edge are on free surfaces
        assert_eq!(rec.nodes.len(), 2);
        let len = distance([0.5, 0.0], [1.0, 0.5]);
        assert_relative_eq!(topo.dissipated, 2.5 * len, max_relative = 1e-15);
        assert_relative_eq!(state.total_mass(), mass, max_relative = 1e-12);
        assert_relative_eq!(mesh.total_area(), area, max_relative = 1e-12);
        let p = state.momentum();
        assert_relative_eq!(p[0], momentum[0], max_relative = 1e-12);
        assert_relative_eq!(p[1], momentum[1], max_relative = 1e-12);
        let (o, c) = rec.nodes[0];
        assert_eq!(state.u[2 * o..2 * o + 2], state.u[2 * c..2 * c + 2]);
        assert_eq!(state.v[2 * o..2 * o + 2], state.v[2 * c..2 * c + 2]);
        assert!(topo.cracked.iter().filter(|&&c| c).count() == 2);
    }

    #[test]
    fn sct_tip_walks_through_the_strip() {
        let (mut mesh, mut state, mut loads, mat) = strip();
        let mut topo = CrackTopology::new(&mesh, SplitCriteria::new(mat.gc, 1.0), TrackingMode::Sct);
        let mut tip = mesh.edges().iter().position(|e| e.nodes == [0, 1]).unwrap();
        let mut steps = 0;
        while topo.halted.is_none() {
            let (_, c) = CrackTopology::candidates(&mesh, tip);
            topo.apply_split(&mut mesh, &mut state, &mut loads, &mat, tip, c[0], 0.0).unwrap();
            tip = topo.tip.unwrap_or(usize::MAX);
            steps += 1;
            assert!(steps < 20);
        }
        assert_relative_eq!(topo.dissipated, mat.gc * topo.crack_length(), max_relative = 1e-12);
        assert_eq!(topo.segments.len(), steps);
    }

    #[test]
    fn quad_crossing_to_opposite_edge() {
        let mut mesh = generate_rect_mesh(3.0, 3.0, 3, 3, ElementKind::Quad, Diagonal::Uniform, &[]).unwrap();
        let mat = Material::new(1e6, 0.2, 10.0, 1.0, Formulation::PlaneStrain).unwrap();
        let mut state = SimState::new(crate::esfem::lumped_mass(&mesh, &mat));
        let mut loads = LoadCase::new(mesh.node_count());
        let mut topo = CrackTopology::new(&mesh, SplitCriteria::new(1.0, 1.0), TrackingMode::Mct);
        // bottom edge of the middle column, across to its top edge
        let g0 = mesh.edges().iter().position(|e| e.nodes == [1, 2]).unwrap();
        let gi = mesh.edges().iter().position(|e| e.nodes == [5, 6]).unwrap();
        topo.apply_split(&mut mesh, &mut state, &mut loads, &mat, g0, gi, 0.0).unwrap();
        assert!(mesh.edge(gi).is_boundary());
        assert_relative_eq!(topo.dissipated, 1.0);
        assert_relative_eq!(state.total_mass(), 10.0 * 9.0, max_relative = 1e-12);
    }
}
