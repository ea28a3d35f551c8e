//! Crack-tip tracking.
//!
//! The single-tip tracker only ever looks at one free-surface quadrature, the
//! current tip, and moves it forward after each split. The multiple-tip
//! tracker treats every crackable free-surface quadrature as a potential tip
//! each step: it evaluates the element case table everywhere, ranks the
//! propagating tips by their energy release rate and applies them in order,
//! re-checking the topology after each split.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cem::{CrackTopology, SplitCriteria, SplitDecision, SplitRecord};
use crate::dynamics::{LoadCase, SimState};
use crate::error::Result;
use crate::esfem::{Material, Voigt};
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackingOptions {
    /// Upper bound on splits per step; unlimited when `None`.
    pub max_splits_per_step: Option<usize>,
}

/// A free-surface quadrature with its in-element decision.
#[derive(Clone, Debug, PartialEq)]
pub struct TipCandidate {
    pub surface: usize,
    pub element: usize,
    pub decision: SplitDecision,
}

impl TipCandidate {
    pub fn g(&self) -> f64 {
        self.decision.g()
    }
}

pub fn free_surface_quadratures(topology: &CrackTopology, mesh: &Mesh) -> Vec<usize> {
    topology.free_surface(mesh)
}

/// Evaluates the case table at each quadrature in `tips`.
pub fn evaluate_tips(topology: &CrackTopology, mesh: &Mesh, u: &[f64], stress: &[Voigt], tips: &[usize]) -> Result<Vec<TipCandidate>> {
    tips.par_iter()
        .map(|&q| {
            Ok(TipCandidate {
                surface: q,
                element: mesh.edge(q).sides[0].element,
                decision: topology.decide(mesh, u, stress, q)?,
            })
        })
        .collect()
}

/// Indices of the propagating tips that pass the dominance test against
/// every propagating tip with a smaller `G`, sorted by `G` descending and
/// quadrature id ascending. Members of an exact tie are not tested against
/// each other.
pub fn select(candidates: &[TipCandidate], criteria: &SplitCriteria) -> Vec<usize> {
    let mut live: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].decision.target.is_some()).collect();
    live.sort_by(|&a, &b| {
        let (ca, cb) = (&candidates[a], &candidates[b]);
        cb.g().total_cmp(&ca.g()).then(ca.surface.cmp(&cb.surface))
    });
    live.iter()
        .copied()
        .filter(|&i| {
            let g = candidates[i].g();
            live.iter().all(|&j| candidates[j].g() >= g || criteria.dominates(g, candidates[j].g()))
        })
        .collect()
}

fn still_valid(mesh: &Mesh, c: &TipCandidate, target: usize, split: &[usize]) -> bool {
    let tip = mesh.edge(c.surface);
    tip.is_boundary()
        && tip.sides[0].element == c.element
        && !mesh.edge(target).is_boundary()
        && mesh.element_edges(c.element).contains(&target)
        && !split.contains(&c.element)
}

/// Applies the candidates at `order` one by one, skipping any invalidated by
/// an earlier split this step.
#[allow(clippy::too_many_arguments)]
fn apply_in_order(
    topology: &mut CrackTopology,
    mesh: &mut Mesh,
    state: &mut SimState,
    loads: &mut LoadCase,
    material: &Material,
    candidates: &[TipCandidate],
    order: &[usize],
    options: &TrackingOptions,
) -> Result<Vec<(SplitDecision, SplitRecord)>> {
    let mut split: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    let t = state.t;
    for &i in order {
        if options.max_splits_per_step.is_some_and(|m| out.len() >= m) {
            break;
        }
        let c = &candidates[i];
        let target = c.decision.target.expect("selected tips propagate");
        if !still_valid(mesh, c, target, &split) {
            continue;
        }
        let rec = topology.apply_split(mesh, state, loads, material, c.surface, target, t)?;
        split.push(c.element);
        out.push((c.decision.clone(), rec));
    }
    Ok(out)
}

/// Multiple-tip step: every crackable free-surface quadrature may advance.
#[allow(clippy::too_many_arguments)]
pub fn mct_advance(
    topology: &mut CrackTopology,
    mesh: &mut Mesh,
    state: &mut SimState,
    loads: &mut LoadCase,
    material: &Material,
    stress: &[Voigt],
    options: &TrackingOptions,
) -> Result<Vec<(SplitDecision, SplitRecord)>> {
    let tips = free_surface_quadratures(topology, mesh);
    let candidates = evaluate_tips(topology, mesh, &state.u, stress, &tips)?;
    let order = select(&candidates, &topology.criteria);
    apply_in_order(topology, mesh, state, loads, material, &candidates, &order, options)
}

/// Single-tip step. Before the first split the seeds compete and the best
/// propagating one becomes the tip.
pub fn sct_advance(
    topology: &mut CrackTopology,
    mesh: &mut Mesh,
    state: &mut SimState,
    loads: &mut LoadCase,
    material: &Material,
    stress: &[Voigt],
) -> Result<Vec<(SplitDecision, SplitRecord)>> {
    if topology.halted.is_some() {
        return Ok(Vec::new());
    }
    let tips = match topology.tip {
        Some(t) => vec![t],
        None if topology.seeds.is_empty() => free_surface_quadratures(topology, mesh),
        None => topology.seeds.clone(),
    };
    let candidates = evaluate_tips(topology, mesh, &state.u, stress, &tips)?;
    let best = (0..candidates.len())
        .filter(|&i| candidates[i].decision.target.is_some())
        .min_by(|&a, &b| {
            let (ca, cb) = (&candidates[a], &candidates[b]);
            cb.g().total_cmp(&ca.g()).then(ca.surface.cmp(&cb.surface))
        });
    let order: Vec<usize> = best.into_iter().collect();
    let opts = TrackingOptions {
        max_splits_per_step: Some(1),
    };
    apply_in_order(topology, mesh, state, loads, material, &candidates, &order, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cem::TrackingMode;
    use crate::esfem::{lumped_mass, Formulation};
    use crate::mesh::{generate_rect_mesh, Diagonal, ElementKind};
    use smallvec::smallvec;

    fn tip(surface: usize, g: f64) -> TipCandidate {
        TipCandidate {
            surface,
            element: surface,
            decision: SplitDecision {
                tip: surface,
                target: (g > 1.0).then_some(100 + surface),
                candidates: smallvec![(100 + surface, g)],
            },
        }
    }

    #[test]
    fn three_disjoint_tips_all_split_in_order() {
        let c = [tip(4, 2.0), tip(9, 3.0), tip(1, 1.0 + 1e-9), tip(7, 0.5)];
        let order = select(&c, &SplitCriteria::new(1.0, 1.0));
        assert_eq!(order, vec![1, 0, 2]);
    }

    #[test]
    fn dominance_filters_weak_leaders() {
        // literal test with gamma = 2: 3 > 2 (3 - 1.2) fails, 1.2 has nobody below
        let c = [tip(0, 3.0), tip(1, 1.2)];
        assert_eq!(select(&c, &SplitCriteria::new(1.0, 2.0)), vec![1]);
    }

    #[test]
    fn exact_ties_are_ordered_by_id() {
        let c = [tip(8, 2.0), tip(3, 2.0)];
        assert_eq!(select(&c, &SplitCriteria::new(1.0, 3.0)), vec![1, 0]);
    }

    fn stretched_plate() -> (Mesh, SimState, LoadCase, Material, CrackTopology, Vec<Voigt>) {
        let mesh = generate_rect_mesh(4.0, 2.0, 8, 4, ElementKind::Tri, Diagonal::Alternating, &[]).unwrap();
        let mat = Material::new(1e3, 0.0, 1.0, 1e-3, Formulation::PlaneStress).unwrap();
        let mut state = SimState::new(lumped_mass(&mesh, &mat));
        // uniform vertical stretch
        for (n, p) in mesh.nodes().iter().enumerate() {
            state.u[2 * n + 1] = 0.01 * p[1];
        }
        let op = crate::esfem::SmoothedStrainOperator::new(&mesh);
        let stress = crate::esfem::StressState::evaluate(&op, &mat, &state.u).stress;
        let topo = CrackTopology::new(&mesh, SplitCriteria::new(mat.gc, 1.0), TrackingMode::Mct);
        let loads = LoadCase::new(mesh.node_count());
        (mesh, state, loads, mat, topo, stress)
    }

    #[test]
    fn compression_never_splits() {
        let (mut mesh, mut state, mut loads, mat, mut topo, _) = stretched_plate();
        for x in state.u.iter_mut() {
            *x = -*x;
        }
        let op = crate::esfem::SmoothedStrainOperator::new(&mesh);
        let stress = crate::esfem::StressState::evaluate(&op, &mat, &state.u).stress;
        let out = mct_advance(&mut topo, &mut mesh, &mut state, &mut loads, &mat, &stress, &TrackingOptions::default()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn one_split_per_element_and_cap() {
        let (mut mesh, mut state, mut loads, mat, mut topo, stress) = stretched_plate();
        let capped = {
            let (mut m2, mut s2, mut l2, _, mut t2, _) = stretched_plate();
            let opts = TrackingOptions {
                max_splits_per_step: Some(2),
            };
            mct_advance(&mut t2, &mut m2, &mut s2, &mut l2, &mat, &stress, &opts).unwrap().len()
        };
        assert_eq!(capped, 2);
        let out = mct_advance(&mut topo, &mut mesh, &mut state, &mut loads, &mat, &stress, &TrackingOptions::default()).unwrap();
        assert!(!out.is_empty());
        let mut elements: Vec<usize> = topo.segments.iter().map(|s| s.element).collect();
        let n = elements.len();
        elements.sort_unstable();
        elements.dedup();
        assert_eq!(elements.len(), n);
        for s in &topo.segments {
            assert!(topo.cracked[s.to]);
        }
    }

    #[test]
    fn sct_takes_one_split_and_sets_a_tip() {
        let (mut mesh, mut state, mut loads, mat, mut topo, stress) = stretched_plate();
        topo.mode = TrackingMode::Sct;
        let out = sct_advance(&mut topo, &mut mesh, &mut state, &mut loads, &mat, &stress).unwrap();
        assert_eq!(out.len(), 1);
        assert!(topo.tip.is_some() || topo.halted.is_some());
    }
}
