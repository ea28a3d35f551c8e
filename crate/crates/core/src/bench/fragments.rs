//! Fragment counting by union-find over shared edges.

use crate::mesh::Mesh;

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }

    /// Component label of each element, numbered by first appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        (0..n)
            .map(|x| {
                let r = self.find(x);
                if id[r] == usize::MAX {
                    id[r] = next;
                    next += 1;
                }
                id[r]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fragments {
    /// Component label per element.
    pub labels: Vec<usize>,
    /// Area per component, indexed by label.
    pub areas: Vec<f64>,
    pub major: usize,
}

impl Fragments {
    pub fn total(&self) -> usize {
        self.areas.len()
    }
}

/// Groups cells connected through shared edges. `areas[i]` is the area of
/// cell `i`; `links` lists cell pairs that share an edge.
pub fn group_cells(areas: &[f64], links: impl IntoIterator<Item = (usize, usize)>, major_fraction: f64) -> Fragments {
    let mut uf = UnionFind::new(areas.len());
    for (a, b) in links {
        uf.union(a, b);
    }
    let labels = uf.labels();
    let count = labels.iter().max().map_or(0, |&m| m + 1);
    let mut sums = vec![0.0; count];
    for (e, &l) in labels.iter().enumerate() {
        sums[l] += areas[e];
    }
    let total: f64 = areas.iter().sum();
    let major = sums.iter().filter(|&&a| a >= major_fraction * total).count();
    Fragments {
        labels,
        areas: sums,
        major,
    }
}

/// Fragments of a cracked mesh. Pieces with at least `major_fraction` of
/// the total area count as major.
pub fn count_fragments(mesh: &Mesh, major_fraction: f64) -> Fragments {
    let links = mesh
        .edges()
        .iter()
        .filter(|e| !e.is_boundary())
        .map(|e| (e.sides[0].element, e.sides[1].element));
    group_cells(mesh.areas(), links, major_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_rect_mesh, Diagonal, ElementKind};

    #[test]
    fn intact_mesh_is_one_piece() {
        let m = generate_rect_mesh(1.0, 1.0, 3, 3, ElementKind::Tri, Diagonal::Alternating, &[]).unwrap();
        let f = count_fragments(&m, 0.005);
        assert_eq!((f.total(), f.major), (1, 1));
        assert!((f.areas[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutting_a_strip_in_two() {
        let mut m = generate_rect_mesh(2.0, 1.0, 2, 1, ElementKind::Quad, Diagonal::Alternating, &[]).unwrap();
        let mid = (0..m.edge_count()).find(|&e| !m.edge(e).is_boundary()).unwrap();
        m.open_edge(mid).unwrap();
        let f = count_fragments(&m, 0.6);
        assert_eq!((f.total(), f.major), (2, 0));
        assert_eq!(f.labels, vec![0, 1]);
    }

    #[test]
    fn small_pieces_are_minor() {
        let f = group_cells(&[1.0, 1.0, 0.001], [(0, 1)], 0.005);
        assert_eq!((f.total(), f.major), (2, 1));
    }
}
