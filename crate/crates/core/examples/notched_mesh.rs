//! Mesh topology: a slit cut into a structured grid, then a crack opened
//! edge by edge from the slit tip.
//!
//!     cargo run --release --example notched_mesh

use cem2d::bench::count_fragments;
use cem2d::mesh::{generate_rect_mesh, Diagonal, ElementKind, Slit};

fn main() -> cem2d::Result<()> {
    let slit = Slit {
        start: [0.0, 0.5],
        end: [0.5, 0.5],
    };
    let mut mesh = generate_rect_mesh(1.0, 1.0, 10, 10, ElementKind::Tri, Diagonal::Alternating, &[slit])?;
    let pristine = generate_rect_mesh(1.0, 1.0, 10, 10, ElementKind::Tri, Diagonal::Alternating, &[])?;
    println!(
        "slit duplicated {} nodes and {} edges",
        mesh.node_count() - pristine.node_count(),
        mesh.edge_count() - pristine.edge_count()
    );
    println!("boundary edges: {} (was {})", mesh.boundary_edges().count(), pristine.boundary_edges().count());

    // open the grid line y = 0.5 from the slit tip to the right side
    let on_line = |m: &cem2d::mesh::Mesh, e: usize| {
        let [a, b] = m.edge(e).nodes;
        !m.edge(e).is_boundary() && m.node(a)[1] == 0.5 && m.node(b)[1] == 0.5
    };
    let mut line: Vec<usize> = (0..mesh.edge_count()).filter(|&e| on_line(&mesh, e)).collect();
    line.sort_by(|&a, &b| mesh.quadrature(a).midpoint[0].total_cmp(&mesh.quadrature(b).midpoint[0]));
    for e in line {
        let copies = mesh.open_edge(e)?;
        let f = count_fragments(&mesh, 0.005);
        println!(
            "opened edge {e:3} at x = {:.2}: {} new node(s), {} piece(s)",
            mesh.quadrature(e).midpoint[0],
            copies.len(),
            f.total()
        );
    }
    println!("area {:.12} after cutting", mesh.total_area());
    Ok(())
}
