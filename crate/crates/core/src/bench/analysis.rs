//! Crack-path geometry: branch points, macro-branches and the dominant path.
//!
//! The crack graph has one vertex per root edge (an edge and its flank
//! copies are one vertex) and one arc per segment. Segments that start on
//! the original surface close to the notch tip hang off a virtual root, so
//! cracks leaving either notch flank belong to the same tree.

use std::collections::{BTreeMap, VecDeque};

use crate::cem::CrackSegment;
use crate::mesh::{distance, Mesh, Point};

/// Mean edge length of a mesh, the `h` of the length thresholds.
pub fn mean_edge_length(mesh: &Mesh) -> f64 {
    let n = mesh.edge_count();
    (0..n).map(|e| mesh.edge_length(e)).sum::<f64>() / n as f64
}

/// Which edges of a pristine mesh lie on its surface.
pub fn surface_mask(mesh: &Mesh) -> Vec<bool> {
    mesh.edges().iter().map(|e| e.is_boundary()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Arc {
    to: usize,
    segment: Option<usize>,
    length: f64,
    t: f64,
}

#[derive(Clone, Debug)]
pub struct CrackGraph {
    /// Root edge id of each vertex; the virtual root is `usize::MAX`.
    pub vertices: Vec<usize>,
    adjacency: Vec<Vec<Arc>>,
    pub root: Option<usize>,
    pub segments: Vec<CrackSegment>,
}

/// A vertex with three or more arcs (two for the root).
#[derive(Clone, Debug, PartialEq)]
pub struct BranchPoint {
    pub vertex: usize,
    pub position: Point,
    /// Time the branching arc appeared (s).
    pub onset: f64,
    /// Longest path down each arm that leads away from the root, descending.
    pub arms: Vec<f64>,
}

impl BranchPoint {
    pub fn arms_longer_than(&self, length: f64) -> usize {
        self.arms.iter().filter(|&&a| a > length).count()
    }
}

impl CrackGraph {
    /// Builds the graph from the segments split no later than `t_max`.
    pub fn new(segments: &[CrackSegment], initial_surface: &[bool], notch_tip: Option<Point>, h: f64, t_max: f64) -> Self {
        let segments: Vec<CrackSegment> = segments.iter().filter(|s| s.t_split <= t_max).cloned().collect();
        let mut index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut vertices = Vec::new();
        let mut adjacency: Vec<Vec<Arc>> = Vec::new();
        fn vertex(index: &mut BTreeMap<usize, usize>, root: usize, vertices: &mut Vec<usize>, adjacency: &mut Vec<Vec<Arc>>) -> usize {
            *index.entry(root).or_insert_with(|| {
                vertices.push(root);
                adjacency.push(Vec::new());
                vertices.len() - 1
            })
        }
        let root = notch_tip.map(|_| vertex(&mut index, usize::MAX, &mut vertices, &mut adjacency));
        for (k, s) in segments.iter().enumerate() {
            // only fresh starts hang off the root, not continuations
            let fresh = !index.contains_key(&s.from_root);
            let a = vertex(&mut index, s.from_root, &mut vertices, &mut adjacency);
            let b = vertex(&mut index, s.to_root, &mut vertices, &mut adjacency);
            adjacency[a].push(Arc {
                to: b,
                segment: Some(k),
                length: s.length,
                t: s.t_split,
            });
            adjacency[b].push(Arc {
                to: a,
                segment: Some(k),
                length: s.length,
                t: s.t_split,
            });
            if let (Some(r), Some(tip)) = (root, notch_tip) {
                let on_surface = initial_surface.get(s.from_root).copied().unwrap_or(false);
                if fresh && on_surface && distance(s.p0, tip) <= 2.0 * h {
                    adjacency[r].push(Arc {
                        to: a,
                        segment: None,
                        length: 0.0,
                        t: s.t_split,
                    });
                    adjacency[a].push(Arc {
                        to: r,
                        segment: None,
                        length: 0.0,
                        t: s.t_split,
                    });
                }
            }
        }
        Self {
            vertices,
            adjacency,
            root,
            segments,
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    fn position(&self, v: usize) -> Point {
        let arc = self.adjacency[v].iter().find_map(|a| a.segment);
        match arc {
            Some(k) => {
                let s = &self.segments[k];
                if s.from_root == self.vertices[v] {
                    s.p0
                } else {
                    s.p1
                }
            }
            None => [f64::NAN; 2],
        }
    }

    /// Breadth-first spanning forest. Returns the parent arc of each vertex
    /// and the visiting order, starting from the root when there is one.
    fn spanning_forest(&self) -> (Vec<Option<(usize, Arc)>>, Vec<usize>) {
        let n = self.vertices.len();
        let mut parent: Vec<Option<(usize, Arc)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let starts = self.root.into_iter().chain(0..n);
        for s in starts {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for arc in &self.adjacency[v] {
                    if !seen[arc.to] {
                        seen[arc.to] = true;
                        parent[arc.to] = Some((v, *arc));
                        queue.push_back(arc.to);
                    }
                }
            }
        }
        (parent, order)
    }

    /// Whether `v` is in the root's tree.
    fn rooted(&self, parent: &[Option<(usize, Arc)>], mut v: usize) -> bool {
        let Some(r) = self.root else { return false };
        while let Some((p, _)) = parent[v] {
            v = p;
        }
        v == r
    }

    /// Branch points in the root's tree.
    pub fn branch_points(&self) -> Vec<BranchPoint> {
        let (parent, order) = self.spanning_forest();
        let n = self.vertices.len();
        // deepest path below each vertex, children before parents
        let mut depth = vec![0.0f64; n];
        for &v in order.iter().rev() {
            if let Some((p, arc)) = parent[v] {
                depth[p] = depth[p].max(depth[v] + arc.length);
            }
        }
        let mut out = Vec::new();
        for v in 0..n {
            let is_root = Some(v) == self.root;
            if !self.rooted(&parent, v) || self.degree(v) < if is_root { 2 } else { 3 } {
                continue;
            }
            let mut arms: Vec<f64> = self.adjacency[v]
                .iter()
                .filter(|arc| parent[arc.to].is_some_and(|(p, a)| p == v && a == **arc))
                .map(|arc| arc.length + depth[arc.to])
                .collect();
            arms.sort_by(|a, b| b.total_cmp(a));
            let mut times: Vec<f64> = self.adjacency[v].iter().map(|a| a.t).collect();
            times.sort_by(f64::total_cmp);
            let k = if is_root { 1 } else { 2 };
            out.push(BranchPoint {
                vertex: v,
                position: if is_root { [f64::NAN; 2] } else { self.position(v) },
                onset: times[k],
                arms,
            });
        }
        out
    }

    /// Branch points with at least two arms longer than `length`.
    pub fn macro_branches(&self, length: f64) -> Vec<BranchPoint> {
        self.branch_points().into_iter().filter(|b| b.arms_longer_than(length) >= 2).collect()
    }

    /// Earliest onset among the branch points with two arms longer than
    /// `length`.
    pub fn branching_onset(&self, length: f64) -> Option<f64> {
        self.macro_branches(length).iter().map(|b| b.onset).min_by(f64::total_cmp)
    }

    /// Segments along the longest path from the root.
    pub fn dominant_path(&self) -> Vec<usize> {
        let Some(r) = self.root else { return Vec::new() };
        let (parent, order) = self.spanning_forest();
        let mut dist = vec![f64::NEG_INFINITY; self.vertices.len()];
        dist[r] = 0.0;
        for &v in &order {
            if let Some((p, arc)) = parent[v] {
                dist[v] = dist[p] + arc.length;
            }
        }
        let Some(mut v) = (0..dist.len()).filter(|&v| dist[v].is_finite()).max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a))) else {
            return Vec::new();
        };
        let mut path = Vec::new();
        while let Some((p, arc)) = parent[v] {
            path.extend(arc.segment);
            v = p;
        }
        path.reverse();
        path
    }

    pub fn path_length(&self, path: &[usize]) -> f64 {
        path.iter().map(|&k| self.segments[k].length).sum()
    }

    /// Least-squares direction of a path in degrees from `+x`, pointing
    /// away from `origin`.
    pub fn path_angle(&self, path: &[usize], origin: Point) -> Option<f64> {
        let pts: Vec<Point> = path.iter().flat_map(|&k| [self.segments[k].p0, self.segments[k].p1]).collect();
        fit_direction(&pts, origin).map(|d| d[1].atan2(d[0]).to_degrees())
    }
}

/// Principal axis of a point cloud, oriented so it points from `origin`
/// towards the centroid.
pub fn fit_direction(points: &[Point], origin: Point) -> Option<[f64; 2]> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let c = points.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0] / n, a[1] + p[1] / n]);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx + syy == 0.0 {
        return None;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut d = [theta.cos(), theta.sin()];
    if d[0] * (c[0] - origin[0]) + d[1] * (c[1] - origin[1]) < 0.0 {
        d = [-d[0], -d[1]];
    }
    Some(d)
}

/// Times at which cracks start from the original surface, one per start
/// edge, ascending.
pub fn initiation_times(segments: &[CrackSegment], initial_surface: &[bool]) -> Vec<f64> {
    let mut first: BTreeMap<usize, f64> = BTreeMap::new();
    let mut reached = std::collections::BTreeSet::new();
    for s in segments {
        if initial_surface.get(s.from_root).copied().unwrap_or(false) && !reached.contains(&s.from_root) {
            first.entry(s.from_root).or_insert(s.t_split);
        }
        reached.insert(s.to_root);
    }
    let mut t: Vec<f64> = first.into_values().collect();
    t.sort_by(f64::total_cmp);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn seg(id: usize, from: usize, to: usize, p0: Point, p1: Point, t: f64) -> CrackSegment {
        CrackSegment {
            id,
            element: id,
            from,
            to,
            from_root: from,
            to_root: to,
            p0,
            p1,
            length: distance(p0, p1),
            t_split: t,
            ud_cumulative: 0.0,
        }
    }

    /// A straight run from the tip that forks at (3, 0) into two arms.
    fn fork() -> (Vec<CrackSegment>, Vec<bool>) {
        let mut s = vec![
            seg(0, 0, 1, [0.0, 0.0], [1.0, 0.0], 1.0),
            seg(1, 1, 2, [1.0, 0.0], [2.0, 0.0], 2.0),
            seg(2, 2, 3, [2.0, 0.0], [3.0, 0.0], 3.0),
        ];
        let mut id = 3;
        for (dir, base) in [(1.0, 10), (-1.0, 20)] {
            let mut from = 3;
            for k in 0..4 {
                let x = 3.0 + k as f64;
                s.push(seg(id, from, base + k, [x, dir * k as f64], [x + 1.0, dir * (k + 1) as f64], 4.0 + id as f64));
                from = base + k;
                id += 1;
            }
        }
        let mut surface = vec![false; 30];
        surface[0] = true;
        (s, surface)
    }

    #[test]
    fn straight_crack_has_no_branches() {
        let (s, surface) = fork();
        let g = CrackGraph::new(&s[..3], &surface, Some([0.0, 0.0]), 1.0, f64::INFINITY);
        assert!(g.branch_points().is_empty());
        let path = g.dominant_path();
        assert_eq!(path, vec![0, 1, 2]);
        assert_relative_eq!(g.path_angle(&path, [0.0, 0.0]).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fork_is_a_macro_branch() {
        let (s, surface) = fork();
        let g = CrackGraph::new(&s, &surface, Some([0.0, 0.0]), 1.0, f64::INFINITY);
        let b = g.branch_points();
        assert_eq!(b.len(), 1);
        assert_eq!(g.vertices[b[0].vertex], 3);
        assert_relative_eq!(b[0].arms[0], 4.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(b[0].arms_longer_than(5.0), 2);
        assert_eq!(b[0].arms_longer_than(6.0), 0);
        // third arc at vertex 3 is the first segment of the second arm
        assert_eq!(b[0].onset, 11.0);
        assert_eq!(g.branching_onset(5.0), Some(11.0));
        // cut before the second arm exists
        let early = CrackGraph::new(&s, &surface, Some([0.0, 0.0]), 1.0, 10.0);
        assert!(early.macro_branches(0.5).is_empty());
    }

    #[test]
    fn dominant_path_angle() {
        let (s, _) = fork();
        let g = CrackGraph::new(&s[3..7], &[true; 30], Some([3.0, 0.0]), 1.0, f64::INFINITY);
        let path = g.dominant_path();
        assert_eq!(path.len(), 4);
        assert_relative_eq!(g.path_angle(&path, [3.0, 0.0]).unwrap(), 45.0, epsilon = 1e-9);
    }

    #[test]
    fn cracks_far_from_the_tip_are_not_rooted() {
        let (s, surface) = fork();
        let g = CrackGraph::new(&s, &surface, Some([50.0, 0.0]), 1.0, f64::INFINITY);
        assert!(g.branch_points().is_empty());
        assert!(g.dominant_path().is_empty());
    }

    #[test]
    fn initiations_ignore_continuations() {
        let (s, mut surface) = fork();
        surface[20] = true;
        // vertex 20 is reached by the fork before anything starts from it
        assert_eq!(initiation_times(&s, &surface), vec![1.0]);
    }

    #[test]
    fn pca_orientation() {
        let d = fit_direction(&[[0.0, 0.0], [1.0, -2.0], [2.0, -4.0]], [2.0, -4.0]).unwrap();
        assert!(d[0] < 0.0 && d[1] > 0.0);
        assert_relative_eq!(d[1] / d[0], -2.0, epsilon = 1e-12);
    }
}
