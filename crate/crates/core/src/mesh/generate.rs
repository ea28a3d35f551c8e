use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Element, ElementKind, Mesh, Point};
use crate::error::{Error, Result};

/// Diagonal layout used when structured cells are split into triangles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Diagonal {
    /// Checkerboard of the two diagonals, no preferred direction.
    #[default]
    Alternating,
    /// Every cell cut from its lower-left to its upper-right corner.
    Uniform,
}

/// A zero-width notch along a grid line, from `start` to `end`.
///
/// Nodes on the slit are duplicated so the two flanks separate. An endpoint
/// strictly inside the domain is the notch tip and stays shared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    pub start: Point,
    pub end: Point,
}

fn split_cell(out: &mut Vec<Element>, kind: ElementKind, flip: bool, p00: usize, p10: usize, p11: usize, p01: usize) {
    match kind {
        ElementKind::Quad => out.push(Element::quad(p00, p10, p11, p01)),
        ElementKind::Tri if !flip => {
            out.push(Element::tri(p00, p10, p11));
            out.push(Element::tri(p00, p11, p01));
        }
        ElementKind::Tri => {
            out.push(Element::tri(p00, p10, p01));
            out.push(Element::tri(p10, p11, p01));
        }
    }
}

/// Structured `nx` × `ny` grid over `[0, width] × [0, height]`.
pub fn generate_rect_mesh(
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    kind: ElementKind,
    diagonal: Diagonal,
    slits: &[Slit],
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::Config(format!("grid needs nx, ny >= 1 (got {nx} x {ny})")));
    }
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::Config(format!(
            "rectangle dimensions must be positive (got {width} x {height})"
        )));
    }
    let (dx, dy) = (width / nx as f64, height / ny as f64);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([i as f64 * dx, j as f64 * dy]);
        }
    }
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let flip = diagonal == Diagonal::Alternating && (i + j) % 2 == 1;
            split_cell(&mut elements, kind, flip, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }

    for slit in slits {
        let snap = |p: Point| -> Result<(usize, usize)> {
            let fi = p[0] / dx;
            let fj = p[1] / dy;
            let (i, j) = (fi.round(), fj.round());
            if (fi - i).abs() > 1e-6 || (fj - j).abs() > 1e-6 || i < 0.0 || j < 0.0 || i > nx as f64 || j > ny as f64 {
                return Err(Error::Config(format!(
                    "slit endpoint ({}, {}) is not a grid node of the {nx} x {ny} mesh",
                    p[0], p[1]
                )));
            }
            Ok((i as usize, j as usize))
        };
        let (i0, j0) = snap(slit.start)?;
        let (i1, j1) = snap(slit.end)?;
        let horizontal = j0 == j1;
        if !(horizontal || i0 == i1) || (i0 == i1 && j0 == j1) {
            return Err(Error::Config(format!(
                "slit from ({}, {}) to ({}, {}) must be a non-empty horizontal or vertical grid line",
                slit.start[0], slit.start[1], slit.end[0], slit.end[1]
            )));
        }
        let on_boundary = |i: usize, j: usize| i == 0 || j == 0 || i == nx || j == ny;
        let line: Vec<(usize, usize)> = if horizontal {
            (i0.min(i1)..=i0.max(i1)).map(|i| (i, j0)).collect()
        } else {
            (j0.min(j1)..=j0.max(j1)).map(|j| (i0, j)).collect()
        };
        let last = line.len() - 1;
        for (k, &(i, j)) in line.iter().enumerate() {
            let end = k == 0 || k == last;
            if end && !on_boundary(i, j) {
                continue;
            }
            let node = id(i, j);
            let fresh = nodes.len();
            nodes.push(nodes[node]);
            let cut = if horizontal { nodes[node][1] } else { nodes[node][0] };
            for el in elements.iter_mut() {
                if !el.nodes().contains(&node) {
                    continue;
                }
                let ids = el.nodes();
                let c = ids.iter().map(|&n| nodes[n][if horizontal { 1 } else { 0 }]).sum::<f64>() / ids.len() as f64;
                if c > cut {
                    for slot in el.nodes_mut() {
                        if *slot == node {
                            *slot = fresh;
                        }
                    }
                }
            }
        }
    }
    Mesh::new(nodes, elements)
}

/// Structured annulus, periodic in the hoop direction.
pub fn generate_annulus_mesh(r_in: f64, r_out: f64, n_radial: usize, n_hoop: usize, kind: ElementKind, diagonal: Diagonal) -> Result<Mesh> {
    if !(r_in > 0.0 && r_out > r_in) {
        return Err(Error::Config(format!(
            "annulus needs 0 < r_in < r_out (got {r_in}, {r_out})"
        )));
    }
    if n_radial == 0 || n_hoop < 3 {
        return Err(Error::Config(format!(
            "annulus needs n_radial >= 1 and n_hoop >= 3 (got {n_radial}, {n_hoop})"
        )));
    }
    let id = |i: usize, j: usize| i * n_hoop + (j % n_hoop);
    let mut nodes = Vec::with_capacity((n_radial + 1) * n_hoop);
    for i in 0..=n_radial {
        let r = r_in + (r_out - r_in) * i as f64 / n_radial as f64;
        for j in 0..n_hoop {
            let theta = std::f64::consts::TAU * j as f64 / n_hoop as f64;
            nodes.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    let mut elements = Vec::new();
    for i in 0..n_radial {
        for j in 0..n_hoop {
            let flip = diagonal == Diagonal::Alternating && (i + j) % 2 == 1;
            split_cell(&mut elements, kind, flip, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    Mesh::new(nodes, elements)
}

impl Mesh {
    /// Perturbs every node that is not on a free surface by a uniform random
    /// offset of up to `fraction` times its shortest incident edge, per axis.
    /// The stream is seeded, so the same seed gives the same mesh.
    pub fn jittered(&self, fraction: f64, seed: u64) -> Result<Mesh> {
        if !(0.0..0.5).contains(&fraction) {
            return Err(Error::Config(format!("jitter fraction {fraction} outside [0, 0.5)")));
        }
        let mut fixed = vec![false; self.node_count()];
        for id in self.boundary_edges() {
            for n in self.edge(id).nodes {
                fixed[n] = true;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = self.nodes().to_vec();
        for (n, p) in nodes.iter_mut().enumerate() {
            let (sx, sy): (f64, f64) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            if fixed[n] || fraction == 0.0 {
                continue;
            }
            let h = self
                .node_edges(n)
                .iter()
                .map(|&e| self.edge_length(e))
                .fold(f64::INFINITY, f64::min);
            p[0] += sx * fraction * h;
            p[1] += sy * fraction * h;
        }
        Mesh::new(nodes, self.elements().to_vec()).map_err(|e| Error::Config(format!("jitter of {fraction} inverted an element: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_counts() {
        let m = generate_rect_mesh(1.0, 1.0, 1, 1, ElementKind::Tri, Diagonal::Alternating, &[]).unwrap();
        assert_eq!((m.element_count(), m.node_count(), m.edge_count()), (2, 4, 5));
    }

    #[test]
    fn quad_patch_counts() {
        let m = generate_rect_mesh(1.0, 1.0, 2, 2, ElementKind::Quad, Diagonal::Alternating, &[]).unwrap();
        assert_eq!((m.element_count(), m.node_count(), m.edge_count()), (4, 9, 12));
        let interior: Vec<_> = m.edges().iter().filter(|e| e.sides.len() == 2).collect();
        assert_eq!(interior.len(), 4);
    }

    #[test]
    fn alternating_and_uniform_diagonals_differ() {
        let a = generate_rect_mesh(1.0, 1.0, 2, 1, ElementKind::Tri, Diagonal::Alternating, &[]).unwrap();
        let u = generate_rect_mesh(1.0, 1.0, 2, 1, ElementKind::Tri, Diagonal::Uniform, &[]).unwrap();
        let has = |m: &Mesh, pair: [usize; 2]| m.edges().iter().any(|e| e.nodes == pair);
        // second cell: corners 1, 2, 5, 4
        assert!(has(&a, [2, 4]) && !has(&a, [1, 5]));
        assert!(has(&u, [1, 5]) && !has(&u, [2, 4]));
    }

    #[test]
    fn mid_height_notch_separates_flanks() {
        // 0.1 x 0.04 plate, notch from the left edge to the centre
        let slit = Slit { start: [0.0, 0.02], end: [0.05, 0.02] };
        let m = generate_rect_mesh(0.1, 0.04, 20, 8, ElementKind::Tri, Diagonal::Alternating, &[slit]).unwrap();
        // 5 slit nodes from x = 0 to 0.0375 are duplicated; the tip at 0.05 is not
        assert_eq!(m.node_count(), 21 * 9 + 10);
        let on_slit = |p: Point| (p[1] - 0.02).abs() < 1e-12 && p[0] < 0.05 - 1e-9;
        let mut below = 0;
        let mut above = 0;
        for (e, el) in m.elements().iter().enumerate() {
            let c = m.element_centroid(e);
            for &n in el.nodes() {
                if on_slit(m.node(n)) {
                    if c[1] < 0.02 {
                        assert!(n < 21 * 9, "lower flank keeps the original nodes");
                        below += 1;
                    } else {
                        assert!(n >= 21 * 9, "upper flank uses the duplicates");
                        above += 1;
                    }
                }
            }
        }
        assert!(below > 0 && above > 0);
        let flank_edges = m
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, e)| e.is_boundary() && on_slit(m.quadrature(*i).midpoint))
            .count();
        assert_eq!(flank_edges, 20);
    }

    #[test]
    fn off_grid_slit_is_a_config_error() {
        let slit = Slit { start: [0.0, 0.013], end: [0.05, 0.013] };
        let err = generate_rect_mesh(0.1, 0.04, 20, 8, ElementKind::Tri, Diagonal::Alternating, &[slit]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let diagonal = Slit { start: [0.0, 0.0], end: [0.05, 0.02] };
        assert!(generate_rect_mesh(0.1, 0.04, 20, 8, ElementKind::Tri, Diagonal::Alternating, &[diagonal]).is_err());
    }

    #[test]
    fn annulus_counts() {
        let q = generate_annulus_mesh(1.0, 2.0, 1, 4, ElementKind::Quad, Diagonal::Alternating).unwrap();
        assert_eq!((q.element_count(), q.node_count()), (4, 8));
        let t = generate_annulus_mesh(1.0, 2.0, 1, 4, ElementKind::Tri, Diagonal::Alternating).unwrap();
        assert_eq!(t.element_count(), 8);
        let fine = generate_annulus_mesh(0.08, 0.15, 7, 60, ElementKind::Tri, Diagonal::Alternating).unwrap();
        assert_eq!(fine.node_count(), 8 * 60);
        assert_eq!(fine.element_count(), 2 * 7 * 60);
        assert!(fine.areas().iter().all(|&a| a > 0.0));
        // closed ring: only the inner and outer circles are free
        assert_eq!(fine.boundary_edges().count(), 120);
    }

    #[test]
    fn degenerate_annulus_is_a_config_error() {
        assert!(matches!(
            generate_annulus_mesh(0.15, 0.08, 2, 8, ElementKind::Quad, Diagonal::Alternating),
            Err(Error::Config(_))
        ));
        assert!(generate_annulus_mesh(0.0, 0.08, 2, 8, ElementKind::Quad, Diagonal::Alternating).is_err());
        assert!(generate_annulus_mesh(0.05, 0.08, 2, 2, ElementKind::Quad, Diagonal::Alternating).is_err());
    }

    #[test]
    fn jitter_is_seeded_and_keeps_free_surfaces() {
        let m = generate_rect_mesh(1.0, 1.0, 6, 6, ElementKind::Tri, Diagonal::Alternating, &[]).unwrap();
        let a = m.jittered(0.25, 42).unwrap();
        let b = m.jittered(0.25, 42).unwrap();
        let c = m.jittered(0.25, 43).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_ne!(a.nodes(), c.nodes());
        for id in m.boundary_edges() {
            for n in m.edge(id).nodes {
                assert_eq!(a.node(n), m.node(n));
            }
        }
        assert!((a.total_area() - 1.0).abs() < 1e-12);
    }
}
