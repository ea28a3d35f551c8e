//! Scenario geometry, meshing and boundary conditions.
//!
//! Boundary sets are found geometrically (edge midpoints and owning-element
//! centroids), so an imported mesh of the same geometry gets the same loads
//! as a generated one.

use crate::dynamics::LoadCase;
use crate::error::{Error, Result};
use crate::esfem::Material;
use crate::mesh::{generate_annulus_mesh, generate_rect_mesh, load_mesh, ElementKind, Mesh, Point, Slit};

use super::config::{BenchmarkConfig, Scenario};

/// Everything a run needs besides the material and tracking settings.
#[derive(Clone, Debug)]
pub struct Setup {
    pub mesh: Mesh,
    pub loads: LoadCase,
    /// Boundary edges cracks may not start from.
    pub non_crackable: Vec<usize>,
    /// Free-surface quadratures at the notch tip.
    pub seeds: Vec<usize>,
    pub notch_tip: Option<Point>,
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Boundary edges whose midpoint satisfies `pred(midpoint, owner centroid)`.
fn boundary_where(mesh: &Mesh, pred: impl Fn(Point, Point) -> bool) -> Vec<usize> {
    mesh.boundary_edges()
        .filter(|&id| pred(mesh.quadrature(id).midpoint, mesh.element_centroid(mesh.edge(id).sides[0].element)))
        .collect()
}

fn edge_nodes(mesh: &Mesh, edges: &[usize]) -> Vec<usize> {
    let mut n: Vec<usize> = edges.iter().flat_map(|&e| mesh.edge(e).nodes).collect();
    n.sort_unstable();
    n.dedup();
    n
}

/// Free-surface edges touching the node closest to `tip`.
fn tip_seeds(mesh: &Mesh, tip: Point) -> Vec<usize> {
    let node = (0..mesh.node_count())
        .min_by(|&a, &b| {
            let da = crate::mesh::distance(mesh.node(a), tip);
            let db = crate::mesh::distance(mesh.node(b), tip);
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .expect("mesh has nodes");
    mesh.node_edges(node).into_iter().filter(|&e| mesh.edge(e).is_boundary()).collect()
}

fn grid(cfg: &BenchmarkConfig, nx: usize, ny: usize) -> (usize, usize, ElementKind) {
    (cfg.mesh.nx.unwrap_or(nx), cfg.mesh.ny.unwrap_or(ny), cfg.mesh.kind.unwrap_or(ElementKind::Tri))
}

fn finish_mesh(cfg: &BenchmarkConfig, mesh: Mesh, default_jitter: f64) -> Result<Mesh> {
    let j = cfg.mesh.jitter.unwrap_or(default_jitter);
    if j > 0.0 {
        mesh.jittered(j, cfg.mesh.seed)
    } else {
        Ok(mesh)
    }
}

fn rect(cfg: &BenchmarkConfig, w: f64, h: f64, nx: usize, ny: usize, slit: Slit) -> Result<Mesh> {
    if let Some(f) = &cfg.mesh.file {
        return load_mesh(f);
    }
    let (nx, ny, kind) = grid(cfg, nx, ny);
    finish_mesh(cfg, generate_rect_mesh(w, h, nx, ny, kind, cfg.mesh.diagonal, &[slit])?, 0.0)
}

/// Builds mesh and boundary conditions for the configured scenario.
pub fn build(cfg: &BenchmarkConfig) -> Result<Setup> {
    let material: Material = cfg.material();
    let crack_loaded = cfg.tracking.crack_loaded_edges;
    let us = 1e-6;
    let setup = match &cfg.scenario {
        Scenario::Kalthoff(k) => {
            let tip = [k.notch_length, k.notch_y];
            let mesh = rect(cfg, k.width, k.height, 48, 48, Slit { start: [0.0, k.notch_y], end: tip })?;
            let tol = 1e-6 * k.width;
            let impact = boundary_where(&mesh, |m, c| near(m[0], 0.0, tol) && c[1] < k.notch_y);
            let bottom = boundary_where(&mesh, |m, _| near(m[1], 0.0, tol));
            if impact.is_empty() || bottom.is_empty() {
                return Err(Error::Config("mesh has no impact or symmetry edges".into()));
            }
            let mut loads = LoadCase::new(mesh.node_count());
            loads.ramp(&edge_nodes(&mesh, &impact), 0, k.v0, k.t0_us * us)?;
            loads.fix(&edge_nodes(&mesh, &bottom), 1)?;
            let non_crackable = if crack_loaded.unwrap_or(false) { Vec::new() } else { [impact, bottom].concat() };
            Setup {
                seeds: tip_seeds(&mesh, tip),
                mesh,
                loads,
                non_crackable,
                notch_tip: Some(tip),
            }
        }
        Scenario::Neumann(n) => {
            let y = 0.5 * n.height;
            let tip = [n.notch_length, y];
            let mesh = rect(cfg, n.width, n.height, 60, 20, Slit { start: [0.0, y], end: tip })?;
            let tol = 1e-6 * n.width;
            let top = boundary_where(&mesh, |m, _| near(m[1], n.height, tol));
            let bottom = boundary_where(&mesh, |m, _| near(m[1], 0.0, tol));
            let mut loads = LoadCase::new(mesh.node_count());
            loads.traction(top.clone(), [0.0, n.traction]);
            loads.traction(bottom.clone(), [0.0, -n.traction]);
            let non_crackable = if crack_loaded.unwrap_or(false) { Vec::new() } else { [top, bottom].concat() };
            Setup {
                seeds: tip_seeds(&mesh, tip),
                mesh,
                loads,
                non_crackable,
                notch_tip: Some(tip),
            }
        }
        Scenario::Dirichlet(d) => {
            let x = 0.5 * d.width;
            let tip = [x, d.height - d.notch_depth];
            let mesh = rect(cfg, d.width, d.height, 60, 60, Slit { start: [x, d.height], end: tip })?;
            let tol = 1e-6 * d.width;
            let flank = |right: bool| {
                boundary_where(&mesh, |m, c| near(m[0], x, tol) && m[1] > tip[1] && (c[0] > x) == right)
            };
            let (left, right) = (flank(false), flank(true));
            let tip_node = |nodes: Vec<usize>| -> Vec<usize> {
                nodes.into_iter().filter(|&n| crate::mesh::distance(mesh.node(n), tip) > tol).collect()
            };
            let mut loads = LoadCase::new(mesh.node_count());
            loads.ramp(&tip_node(edge_nodes(&mesh, &right)), 0, d.v0, d.t0_us * us)?;
            loads.fix(&tip_node(edge_nodes(&mesh, &left)), 0)?;
            // the edges at the tip have a free node and stay crackable
            let driven: Vec<usize> = [left, right]
                .concat()
                .into_iter()
                .filter(|&e| mesh.edge(e).nodes.iter().all(|&n| loads.is_constrained(n)))
                .collect();
            let non_crackable = if crack_loaded.unwrap_or(false) { Vec::new() } else { driven };
            Setup {
                seeds: tip_seeds(&mesh, tip),
                mesh,
                loads,
                non_crackable,
                notch_tip: Some(tip),
            }
        }
        Scenario::Cylinder(c) => {
            let mesh = match &cfg.mesh.file {
                Some(f) => load_mesh(f)?,
                None => {
                    let kind = cfg.mesh.kind.unwrap_or(ElementKind::Tri);
                    let m = generate_annulus_mesh(
                        c.r_in,
                        c.r_out,
                        cfg.mesh.n_radial.unwrap_or(24),
                        cfg.mesh.n_hoop.unwrap_or(320),
                        kind,
                        cfg.mesh.diagonal,
                    )?;
                    finish_mesh(cfg, m, 0.25)?
                }
            };
            let mid = 0.5 * (c.r_in + c.r_out);
            let bore = boundary_where(&mesh, |m, _| m[0].hypot(m[1]) < mid);
            let mut loads = LoadCase::new(mesh.node_count());
            loads.pressure(bore.clone(), c.p0, c.t0_us * us, c.tau_us * us)?;
            // the bore is where the radial cracks start
            let non_crackable = if crack_loaded.unwrap_or(true) { Vec::new() } else { bore };
            Setup {
                mesh,
                loads,
                non_crackable,
                seeds: Vec::new(),
                notch_tip: None,
            }
        }
    };
    material.validate()?;
    Ok(setup)
}
