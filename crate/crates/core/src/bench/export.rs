//! CSV and legacy VTK output, and a reader for our own VTK files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cem::CrackSegment;
use crate::error::{Error, Result};
use crate::esfem::{max_principal, StressState};
use crate::mesh::{ElementKind, Mesh, Point};

use super::fragments::{group_cells, Fragments};
use super::sim::Sample;

pub const TIMESERIES_HEADER: &str = "t_us,Ud_J_per_m,Ek,Es,Wext,fragments";
pub const CRACK_HEADER: &str = "segment_id,x0,y0,x1,y1,t_split_us,Ud_cumulative";

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn timeseries_csv(samples: &[Sample]) -> String {
    let mut s = String::from(TIMESERIES_HEADER);
    s.push('\n');
    for r in samples {
        let _ = writeln!(
            s,
            "{:.6},{:.9e},{:.9e},{:.9e},{:.9e},{}",
            r.t * 1e6,
            r.ud,
            r.kinetic,
            r.strain,
            r.external_work,
            r.fragments
        );
    }
    s
}

/// Writes the energy time series. An empty run gives a header-only file.
pub fn export_timeseries(samples: &[Sample], path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &timeseries_csv(samples))
}

pub fn crack_csv(segments: &[CrackSegment]) -> String {
    let mut s = String::from(CRACK_HEADER);
    s.push('\n');
    for c in segments {
        let _ = writeln!(
            s,
            "{},{:.9e},{:.9e},{:.9e},{:.9e},{:.6},{:.9e}",
            c.id,
            c.p0[0],
            c.p0[1],
            c.p1[0],
            c.p1[1],
            c.t_split * 1e6,
            c.ud_cumulative
        );
    }
    s
}

pub fn export_cracks(segments: &[CrackSegment], path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &crack_csv(segments))
}

/// Legacy ASCII VTK of the deformed mesh. Crack flanks are separate points,
/// so cracks render open.
pub fn vtk_string(mesh: &Mesh, u: &[f64], stress: &StressState) -> String {
    let mut s = String::new();
    let n = mesh.node_count();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\ncem2d snapshot\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n} double");
    for (i, p) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(s, "{:.12e} {:.12e} 0", p[0] + u[2 * i], p[1] + u[2 * i + 1]);
    }
    let size: usize = mesh.elements().iter().map(|e| e.nodes().len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", mesh.element_count());
    for e in mesh.elements() {
        let ids: Vec<String> = e.nodes().iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{} {}", ids.len(), ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.element_count());
    for e in mesh.elements() {
        let _ = writeln!(s, "{}", if e.kind == ElementKind::Tri { 5 } else { 9 });
    }
    let _ = writeln!(s, "POINT_DATA {n}\nVECTORS displacement double");
    for i in 0..n {
        let _ = writeln!(s, "{:.12e} {:.12e} 0", u[2 * i], u[2 * i + 1]);
    }
    let _ = writeln!(s, "VECTORS reference double");
    for p in mesh.nodes() {
        let _ = writeln!(s, "{:.12e} {:.12e} 0", p[0], p[1]);
    }
    let _ = writeln!(
        s,
        "CELL_DATA {}\nSCALARS max_principal_stress double 1\nLOOKUP_TABLE default",
        mesh.element_count()
    );
    for e in 0..mesh.element_count() {
        let _ = writeln!(s, "{:.9e}", max_principal(stress.element_stress(mesh, e)));
    }
    s
}

pub fn export_vtk(mesh: &Mesh, u: &[f64], stress: &StressState, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &vtk_string(mesh, u, stress))
}

/// Cells and points of a VTK unstructured grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtkGrid {
    pub points: Vec<Point>,
    /// Reference coordinates when the file carries them.
    pub reference: Option<Vec<Point>>,
    pub cells: Vec<Vec<usize>>,
}

/// Reads the subset of legacy ASCII VTK this crate writes.
pub fn read_vtk(path: impl AsRef<Path>) -> Result<VtkGrid> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<&str> = text.lines().collect();
    let err = |line: usize, msg: &str| Error::Parse {
        path: path.to_path_buf(),
        line: line + 1,
        msg: msg.to_string(),
    };
    let num = |line: usize, tok: &str| tok.parse::<f64>().map_err(|_| err(line, &format!("bad number {tok:?}")));
    let count = |line: usize, tok: Option<&str>| {
        tok.and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| err(line, "bad count"))
    };
    let mut grid = VtkGrid::default();
    let mut i = 0;
    let mut in_point_data = false;
    while i < lines.len() {
        let mut tok = lines[i].split_whitespace();
        match tok.next() {
            Some("POINTS") => {
                let n = count(i, tok.next())?;
                grid.points = read_points(&lines, i, n, &num, &err)?;
                i += n;
            }
            Some("CELLS") => {
                let n = count(i, tok.next())?;
                for k in 1..=n {
                    let l = lines.get(i + k).ok_or_else(|| err(i + k, "missing cell"))?;
                    let ids: Vec<usize> = l
                        .split_whitespace()
                        .map(|t| t.parse::<usize>().map_err(|_| err(i + k, "bad cell index")))
                        .collect::<Result<_>>()?;
                    match ids.split_first() {
                        Some((&m, rest)) if m == rest.len() && rest.iter().all(|&p| p < grid.points.len()) => {
                            grid.cells.push(rest.to_vec())
                        }
                        _ => return Err(err(i + k, "malformed cell")),
                    }
                }
                i += n;
            }
            Some("POINT_DATA") => in_point_data = true,
            Some("CELL_DATA") => in_point_data = false,
            Some("VECTORS") if in_point_data && tok.next() == Some("reference") => {
                grid.reference = Some(read_points(&lines, i, grid.points.len(), &num, &err)?);
                i += grid.points.len();
            }
            _ => {}
        }
        i += 1;
    }
    if grid.points.is_empty() || grid.cells.is_empty() {
        return Err(err(lines.len().saturating_sub(1), "no POINTS or CELLS section"));
    }
    Ok(grid)
}

fn read_points(
    lines: &[&str],
    at: usize,
    n: usize,
    num: &dyn Fn(usize, &str) -> Result<f64>,
    err: &dyn Fn(usize, &str) -> Error,
) -> Result<Vec<Point>> {
    (1..=n)
        .map(|k| {
            let l = lines.get(at + k).ok_or_else(|| err(at + k, "missing point"))?;
            let v: Vec<&str> = l.split_whitespace().collect();
            if v.len() < 2 {
                return Err(err(at + k, "point needs x and y"));
            }
            Ok([num(at + k, v[0])?, num(at + k, v[1])?])
        })
        .collect()
}

impl VtkGrid {
    /// Fragments of the grid: cells are joined when they share both end
    /// points of an edge. Areas use reference coordinates when present.
    pub fn fragments(&self, major_fraction: f64) -> Fragments {
        let pts = self.reference.as_deref().unwrap_or(&self.points);
        let areas: Vec<f64> = self
            .cells
            .iter()
            .map(|c| {
                let mut a = 0.0;
                for k in 0..c.len() {
                    let (p, q) = (pts[c[k]], pts[c[(k + 1) % c.len()]]);
                    a += p[0] * q[1] - q[0] * p[1];
                }
                0.5 * a.abs()
            })
            .collect();
        let mut edges: Vec<([usize; 2], usize)> = Vec::new();
        for (e, c) in self.cells.iter().enumerate() {
            for k in 0..c.len() {
                let (a, b) = (c[k], c[(k + 1) % c.len()]);
                edges.push(([a.min(b), a.max(b)], e));
            }
        }
        edges.sort_unstable();
        let links: Vec<(usize, usize)> = edges.windows(2).filter(|w| w[0].0 == w[1].0).map(|w| (w[0].1, w[1].1)).collect();
        group_cells(&areas, links, major_fraction)
    }
}
