//! Linear patch test of the edge-smoothed strain operator.
//!
//! Imposes an affine displacement on a jittered triangle mesh and checks
//! that every edge quadrature sees the same constant strain and that all
//! interior nodes are in equilibrium.
//!
//!     cargo run --release --example patch_test

use cem2d::esfem::{Formulation, Material, SmoothedStrainOperator, StressState};
use cem2d::mesh::{generate_rect_mesh, Diagonal, ElementKind};

fn main() -> cem2d::Result<()> {
    let mesh = generate_rect_mesh(1.0, 1.0, 8, 8, ElementKind::Tri, Diagonal::Alternating, &[])?.jittered(0.3, 42)?;
    let material = Material::new(200e9, 0.3, 7800.0, 1.0, Formulation::PlaneStrain)?;
    let op = SmoothedStrainOperator::new(&mesh);

    // u = A x + b
    let a = [[1e-3, 4e-4], [-2e-4, 5e-4]];
    let u: Vec<f64> = mesh
        .nodes()
        .iter()
        .flat_map(|p| [a[0][0] * p[0] + a[0][1] * p[1] + 1e-2, a[1][0] * p[0] + a[1][1] * p[1] - 3e-3])
        .collect();
    let exact = [a[0][0], a[1][1], a[0][1] + a[1][0]];

    let state = StressState::evaluate(&op, &material, &u);
    let worst = state
        .strain
        .iter()
        .flat_map(|e| (0..3).map(move |k| (e[k] - exact[k]).abs() / exact[k].abs()))
        .fold(0.0, f64::max);
    println!("{} quadratures, worst relative strain error {worst:.2e}", state.strain.len());

    let mut f = vec![0.0; u.len()];
    op.internal_force(&state.stress, &mut f);
    let mut on_boundary = vec![false; mesh.node_count()];
    for e in mesh.boundary_edges() {
        for n in mesh.edge(e).nodes {
            on_boundary[n] = true;
        }
    }
    let scale = (0..mesh.node_count()).filter(|&n| on_boundary[n]).map(|n| f[2 * n].hypot(f[2 * n + 1])).fold(0.0, f64::max);
    let interior = (0..mesh.node_count()).filter(|&n| !on_boundary[n]).map(|n| f[2 * n].hypot(f[2 * n + 1])).fold(0.0, f64::max);
    println!("largest interior force {:.2e} of the boundary scale", interior / scale);
    println!("strain energy {:.6e} J/m", state.strain_energy(&op));
    Ok(())
}
