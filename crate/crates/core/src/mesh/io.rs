//! Mesh files.
//!
//! The internal format is plain text with 0-based ids:
//!
//! ```text
//! nodes 4
//! elements 2
//! kind tri
//! 0 0
//! 1 0
//! 1 1
//! 0 1
//! 0 1 2
//! 0 2 3
//! ```
//!
//! Gmsh ASCII v2 files are also read. Only 3-node triangles (type 2) and
//! 4-node quadrilaterals (type 3) become elements; line and point entities
//! (types 1 and 15) are boundary tags and are skipped.

use std::fmt::Write as _;
use std::path::Path;

use super::{Element, ElementKind, Mesh, Point};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Internal,
    Gmsh,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("msh") => MeshFormat::Gmsh,
            _ => MeshFormat::Internal,
        }
    }
}

/// Reads a mesh, choosing the format from the extension (`.msh` is Gmsh).
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match MeshFormat::from_path(path) {
        MeshFormat::Internal => parse_internal(&text, path),
        MeshFormat::Gmsh => parse_gmsh(&text, path),
    }
}

pub fn write_internal(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_internal(mesh)?).map_err(|e| Error::io(path, e))
}

fn format_internal(mesh: &Mesh) -> Result<String> {
    let kind = mesh.elements().first().map_or(ElementKind::Tri, |e| e.kind);
    if mesh.elements().iter().any(|e| e.kind != kind) {
        return Err(Error::Argument("internal format holds one element kind per file".into()));
    }
    let mut s = String::new();
    let name = match kind {
        ElementKind::Tri => "tri",
        ElementKind::Quad => "quad",
    };
    let _ = writeln!(s, "nodes {}\nelements {}\nkind {name}", mesh.node_count(), mesh.element_count());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{:e} {:e}", p[0], p[1]);
    }
    for el in mesh.elements() {
        let ids: Vec<String> = el.nodes().iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    Ok(s)
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a Path) -> Self {
        Self {
            path,
            inner: text.lines().enumerate().peekable(),
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    /// Next non-blank line, trimmed, with its 1-based number.
    fn next(&mut self) -> Result<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() {
                return Ok((i + 1, t));
            }
        }
        Err(Error::Parse {
            path: self.path.to_path_buf(),
            line: 0,
            msg: "unexpected end of file".into(),
        })
    }

    fn numbers<T: std::str::FromStr>(&self, line: usize, text: &str) -> Result<Vec<T>> {
        text.split_whitespace()
            .map(|w| w.parse().map_err(|_| self.err(line, format!("cannot parse '{w}'"))))
            .collect()
    }
}

fn parse_internal(text: &str, path: &Path) -> Result<Mesh> {
    let mut lines = Lines::new(text, path);
    let mut header = |key: &str| -> Result<(usize, String)> {
        let (n, l) = lines.next()?;
        match l.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok((n, v.trim().to_string())),
            _ => Err(Error::Parse {
                path: path.to_path_buf(),
                line: n,
                msg: format!("expected '{key} <value>'"),
            }),
        }
    };
    let (ln, v) = header("nodes")?;
    let n_nodes: usize = v.parse().map_err(|_| Error::Parse { path: path.into(), line: ln, msg: format!("bad node count '{v}'") })?;
    let (ln, v) = header("elements")?;
    let n_elems: usize = v.parse().map_err(|_| Error::Parse { path: path.into(), line: ln, msg: format!("bad element count '{v}'") })?;
    let (ln, v) = header("kind")?;
    let kind = match v.as_str() {
        "tri" => ElementKind::Tri,
        "quad" => ElementKind::Quad,
        other => {
            return Err(Error::Parse {
                path: path.into(),
                line: ln,
                msg: format!("unknown element kind '{other}'"),
            })
        }
    };
    let mut nodes: Vec<Point> = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, l) = lines.next()?;
        let xy: Vec<f64> = lines.numbers(ln, l)?;
        if xy.len() != 2 {
            return Err(lines.err(ln, "node line needs exactly two coordinates"));
        }
        nodes.push([xy[0], xy[1]]);
    }
    let mut elements = Vec::with_capacity(n_elems);
    for _ in 0..n_elems {
        let (ln, l) = lines.next()?;
        let ids: Vec<usize> = lines.numbers(ln, l)?;
        if ids.len() != kind.node_count() {
            return Err(lines.err(ln, format!("expected {} node ids", kind.node_count())));
        }
        elements.push(Element::from_nodes(&ids).expect("length checked"));
    }
    Mesh::new(nodes, elements)
}

fn parse_gmsh(text: &str, path: &Path) -> Result<Mesh> {
    let mut lines = Lines::new(text, path);
    let mut nodes: Vec<Point> = Vec::new();
    let mut tag_to_index = std::collections::HashMap::new();
    let mut raw: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut saw_nodes = false;
    while let Ok((ln, l)) = lines.next() {
        match l {
            "$MeshFormat" => {
                let (ln, v) = lines.next()?;
                if !v.starts_with('2') {
                    return Err(lines.err(ln, format!("only Gmsh ASCII v2 is supported (found '{v}')")));
                }
                if v.split_whitespace().nth(1) != Some("0") {
                    return Err(lines.err(ln, "binary Gmsh files are not supported"));
                }
            }
            "$Nodes" => {
                let (ln, v) = lines.next()?;
                let n: usize = v.parse().map_err(|_| lines.err(ln, "bad node count"))?;
                for _ in 0..n {
                    let (ln, l) = lines.next()?;
                    let w: Vec<f64> = lines.numbers(ln, l)?;
                    if w.len() < 3 {
                        return Err(lines.err(ln, "node line needs an id and coordinates"));
                    }
                    tag_to_index.insert(w[0] as usize, nodes.len());
                    nodes.push([w[1], w[2]]);
                }
                saw_nodes = true;
            }
            "$Elements" => {
                let (ln, v) = lines.next()?;
                let n: usize = v.parse().map_err(|_| lines.err(ln, "bad element count"))?;
                for _ in 0..n {
                    let (ln, l) = lines.next()?;
                    let w: Vec<usize> = lines.numbers(ln, l)?;
                    if w.len() < 3 || w.len() < 3 + w[2] {
                        return Err(lines.err(ln, "truncated element line"));
                    }
                    let ty = w[1];
                    let ids = w[3 + w[2]..].to_vec();
                    match ty {
                        1 | 15 => {}
                        2 | 3 => raw.push((ln, ids)),
                        other => {
                            return Err(Error::UnsupportedElement {
                                kind: format!("gmsh type {other}"),
                                path: path.into(),
                            })
                        }
                    }
                }
            }
            _ if l.starts_with('$') => {}
            _ => return Err(lines.err(ln, format!("unexpected line '{l}'"))),
        }
    }
    if !saw_nodes {
        return Err(lines.err(0, "no $Nodes section"));
    }
    let mut elements = Vec::with_capacity(raw.len());
    for (ln, ids) in raw {
        let mapped = ids
            .iter()
            .map(|t| tag_to_index.get(t).copied().ok_or_else(|| lines.err(ln, format!("unknown node {t}"))))
            .collect::<Result<Vec<_>>>()?;
        let el = Element::from_nodes(&mapped).ok_or_else(|| lines.err(ln, "wrong node count for element type"))?;
        elements.push(el);
    }
    let (mesh, flipped) = Mesh::new_fix_orientation(nodes, elements)?;
    if !flipped.is_empty() {
        log::warn!("{}: reoriented {} clockwise elements", path.display(), flipped.len());
    }
    Ok(mesh)
}
