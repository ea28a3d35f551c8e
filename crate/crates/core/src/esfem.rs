//! Edge-based smoothed strain, linear elasticity and force assembly.
//!
//! Every edge carries one integration point. Its strain is the area-weighted
//! average of the compatible strains of the one or two elements bordering the
//! edge, so the whole operator reduces to a list of nodal gradients per edge:
//! `eps = sum_k (bx_k ux_k, by_k uy_k, by_k ux_k + bx_k uy_k)`.
//!
//! Displacements and forces are interleaved `[x0, y0, x1, y1, ...]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::mesh::{ElementKind, Mesh, Point};

/// Voigt vector `(xx, yy, xy)`. Shear strain is engineering `gamma_12`.
pub type Voigt = [f64; 3];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    #[default]
    PlaneStrain,
    PlaneStress,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Young's modulus (Pa).
    #[serde(rename = "E")]
    pub e: f64,
    pub nu: f64,
    /// Density (kg/m³).
    pub rho: f64,
    /// Critical energy release rate (J/m²).
    #[serde(rename = "Gc")]
    pub gc: f64,
    #[serde(default)]
    pub formulation: Formulation,
}

impl Material {
    pub fn new(e: f64, nu: f64, rho: f64, gc: f64, formulation: Formulation) -> Result<Self> {
        let m = Self { e, nu, rho, gc, formulation };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e > 0.0) || !(0.0..0.5).contains(&self.nu) || !(self.rho > 0.0) || !(self.gc > 0.0) {
            return Err(Error::Config(format!(
                "material needs E > 0, 0 <= nu < 0.5, rho > 0, Gc > 0 (got E={}, nu={}, rho={}, Gc={})",
                self.e, self.nu, self.rho, self.gc
            )));
        }
        Ok(())
    }

    /// Elasticity matrix mapping engineering strain to stress.
    pub fn elasticity(&self) -> [[f64; 3]; 3] {
        let (e, nu) = (self.e, self.nu);
        match self.formulation {
            Formulation::PlaneStrain => {
                let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
                [
                    [c * (1.0 - nu), c * nu, 0.0],
                    [c * nu, c * (1.0 - nu), 0.0],
                    [0.0, 0.0, c * (1.0 - 2.0 * nu) / 2.0],
                ]
            }
            Formulation::PlaneStress => {
                let c = e / (1.0 - nu * nu);
                [[c, c * nu, 0.0], [c * nu, c, 0.0], [0.0, 0.0, c * (1.0 - nu) / 2.0]]
            }
        }
    }

    /// Dilatational wave speed (m/s).
    pub fn wave_speed(&self) -> f64 {
        let (e, nu, rho) = (self.e, self.nu, self.rho);
        match self.formulation {
            Formulation::PlaneStrain => (e * (1.0 - nu) / (rho * (1.0 + nu) * (1.0 - 2.0 * nu))).sqrt(),
            Formulation::PlaneStress => (e / (rho * (1.0 - nu * nu))).sqrt(),
        }
    }
}

pub fn constitutive_stress(strain: Voigt, material: &Material) -> Voigt {
    apply(&material.elasticity(), strain)
}

fn apply(c: &[[f64; 3]; 3], s: Voigt) -> Voigt {
    [
        c[0][0] * s[0] + c[0][1] * s[1] + c[0][2] * s[2],
        c[1][0] * s[0] + c[1][1] * s[1] + c[1][2] * s[2],
        c[2][0] * s[0] + c[2][1] * s[1] + c[2][2] * s[2],
    ]
}

/// Largest eigenvalue of the symmetric 2x2 tensor `[[xx, xy], [xy, yy]]`.
pub fn max_principal(s: Voigt) -> f64 {
    let mean = 0.5 * (s[0] + s[1]);
    let r = (0.5 * (s[0] - s[1])).hypot(s[2]);
    mean + r
}

/// Shape-function gradients of element `e` at the midpoint of local edge
/// `local`, in the element's node order. CST gradients are constant; QUAD
/// gradients come from the bilinear map evaluated at the parametric point of
/// the edge midpoint.
pub fn element_gradients(mesh: &Mesh, e: usize, local: usize) -> SmallVec<[[f64; 2]; 4]> {
    let el = mesh.element(e);
    let x: SmallVec<[Point; 4]> = el.nodes().iter().map(|&n| mesh.node(n)).collect();
    match el.kind {
        ElementKind::Tri => {
            let two_a = (x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1]);
            (0..3)
                .map(|i| {
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    [(x[j][1] - x[k][1]) / two_a, (x[k][0] - x[j][0]) / two_a]
                })
                .collect()
        }
        ElementKind::Quad => {
            const MID: [(f64, f64); 4] = [(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];
            const CORNER: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
            let (xi, eta) = MID[local];
            let dn: SmallVec<[(f64, f64); 4]> = CORNER
                .iter()
                .map(|&(a, b)| (0.25 * a * (1.0 + b * eta), 0.25 * b * (1.0 + a * xi)))
                .collect();
            let mut j = [[0.0; 2]; 2];
            for (d, p) in dn.iter().zip(&x) {
                j[0][0] += d.0 * p[0];
                j[0][1] += d.0 * p[1];
                j[1][0] += d.1 * p[0];
                j[1][1] += d.1 * p[1];
            }
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            dn.iter()
                .map(|d| [(j[1][1] * d.0 - j[0][1] * d.1) / det, (-j[1][0] * d.0 + j[0][0] * d.1) / det])
                .collect()
        }
    }
}

/// Smoothed strain rows of one edge quadrature.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuadratureOperator {
    pub nodes: SmallVec<[usize; 6]>,
    /// `sum_j w_j grad N_k^{A_j}` per node (1/m).
    pub grads: SmallVec<[[f64; 2]; 6]>,
    /// Integration measure, the bordering elements' area shares summed.
    pub measure: f64,
}

impl QuadratureOperator {
    pub fn build(mesh: &Mesh, q: usize) -> Self {
        let quad = mesh.quadrature(q);
        let edge = mesh.edge(q);
        let mut op = QuadratureOperator {
            measure: quad.area,
            ..Default::default()
        };
        for (side, &w) in edge.sides.iter().zip(&quad.weights) {
            let g = element_gradients(mesh, side.element, side.local);
            for (&n, gk) in mesh.element(side.element).nodes().iter().zip(&g) {
                match op.nodes.iter().position(|&m| m == n) {
                    Some(i) => {
                        op.grads[i][0] += w * gk[0];
                        op.grads[i][1] += w * gk[1];
                    }
                    None => {
                        op.nodes.push(n);
                        op.grads.push([w * gk[0], w * gk[1]]);
                    }
                }
            }
        }
        op
    }

    pub fn strain(&self, u: &[f64]) -> Voigt {
        let mut e = [0.0; 3];
        for (&n, g) in self.nodes.iter().zip(&self.grads) {
            let (ux, uy) = (u[2 * n], u[2 * n + 1]);
            e[0] += g[0] * ux;
            e[1] += g[1] * uy;
            e[2] += g[1] * ux + g[0] * uy;
        }
        e
    }

    /// Adds `measure * B^T sigma` into `f`.
    pub fn scatter(&self, sigma: Voigt, f: &mut [f64]) {
        for (&n, g) in self.nodes.iter().zip(&self.grads) {
            f[2 * n] += self.measure * (g[0] * sigma[0] + g[1] * sigma[2]);
            f[2 * n + 1] += self.measure * (g[1] * sigma[1] + g[0] * sigma[2]);
        }
    }
}

/// Smoothed strain operator over every edge quadrature of a mesh.
#[derive(Clone, Debug, Default)]
pub struct SmoothedStrainOperator {
    ops: Vec<QuadratureOperator>,
}

impl SmoothedStrainOperator {
    pub fn new(mesh: &Mesh) -> Self {
        Self {
            ops: (0..mesh.edge_count()).into_par_iter().map(|q| QuadratureOperator::build(mesh, q)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn get(&self, q: usize) -> &QuadratureOperator {
        &self.ops[q]
    }

    /// Rebuilds the rows touching `elements` after a topology change and
    /// appends rows for any new edges.
    pub fn refresh(&mut self, mesh: &Mesh, elements: &[usize]) {
        let mut qs: Vec<usize> = elements.iter().flat_map(|&e| mesh.element_edges(e).iter().copied()).collect();
        qs.extend(self.ops.len()..mesh.edge_count());
        qs.sort_unstable();
        qs.dedup();
        self.ops.resize_with(mesh.edge_count(), Default::default);
        for q in qs {
            self.ops[q] = QuadratureOperator::build(mesh, q);
        }
    }

    pub fn strains(&self, u: &[f64]) -> Vec<Voigt> {
        self.ops.par_iter().map(|op| op.strain(u)).collect()
    }

    /// Internal force `sum_q measure_q B_q^T sigma_q`. The scatter runs in
    /// quadrature order, so the result does not depend on the thread count.
    pub fn internal_force(&self, stresses: &[Voigt], f: &mut [f64]) {
        f.iter_mut().for_each(|x| *x = 0.0);
        for (op, &s) in self.ops.iter().zip(stresses) {
            op.scatter(s, f);
        }
    }
}

/// Per-quadrature strain and stress.
#[derive(Clone, Debug, Default)]
pub struct StressState {
    pub strain: Vec<Voigt>,
    pub stress: Vec<Voigt>,
}

impl StressState {
    pub fn evaluate(op: &SmoothedStrainOperator, material: &Material, u: &[f64]) -> Self {
        let c = material.elasticity();
        let (strain, stress) = op
            .ops
            .par_iter()
            .map(|q| {
                let e = q.strain(u);
                (e, apply(&c, e))
            })
            .unzip();
        Self { strain, stress }
    }

    /// `1/2 sum_q eps_q . sigma_q measure_q` (J/m).
    pub fn strain_energy(&self, op: &SmoothedStrainOperator) -> f64 {
        self.strain
            .iter()
            .zip(&self.stress)
            .zip(&op.ops)
            .map(|((e, s), q)| 0.5 * q.measure * (e[0] * s[0] + e[1] * s[1] + e[2] * s[2]))
            .sum()
    }

    /// Mean stress of the quadratures on the edges of element `e`.
    pub fn element_stress(&self, mesh: &Mesh, e: usize) -> Voigt {
        let ids = mesh.element_edges(e);
        let mut s = [0.0; 3];
        for &q in ids {
            for k in 0..3 {
                s[k] += self.stress[q][k];
            }
        }
        s.map(|v| v / ids.len() as f64)
    }
}

/// Lumped mass per node: each element hands `rho A / n` to each of its nodes.
pub fn lumped_mass(mesh: &Mesh, material: &Material) -> Vec<f64> {
    let mut m = vec![0.0; mesh.node_count()];
    for (el, &a) in mesh.elements().iter().zip(mesh.areas()) {
        let share = material.rho * a / el.nodes().len() as f64;
        for &n in el.nodes() {
            m[n] += share;
        }
    }
    m
}

/// Lumped mass of a single node, from its current element fan.
pub fn node_mass(mesh: &Mesh, material: &Material, n: usize) -> f64 {
    mesh.node_elements(n)
        .iter()
        .map(|&e| material.rho * mesh.areas()[e] / mesh.element(e).nodes().len() as f64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_rect_mesh, Diagonal, Element};
    use approx::assert_relative_eq;

    fn steel() -> Material {
        Material::new(190e9, 0.3, 8000.0, 2.213e4, Formulation::PlaneStrain).unwrap()
    }

    #[test]
    fn plane_stress_with_zero_poisson_is_identity_scaled() {
        let m = Material::new(1.0, 0.0, 1.0, 1.0, Formulation::PlaneStress).unwrap();
        assert_eq!(constitutive_stress([1e-3, 0.0, 0.0], &m), [1e-3, 0.0, 0.0]);
        assert_eq!(constitutive_stress([0.0; 3], &m), [0.0; 3]);
    }

    #[test]
    fn plane_strain_axial_stiffness() {
        let m = Material::new(32e9, 0.2, 2450.0, 3.0, Formulation::PlaneStrain).unwrap();
        let s = constitutive_stress([1e-4, 0.0, 0.0], &m);
        let expect = 32e9 * 0.8 / (1.2 * 0.6) * 1e-4;
        assert_relative_eq!(s[0], expect, max_relative = 1e-14);
        assert_relative_eq!(s[1], 32e9 * 0.2 / (1.2 * 0.6) * 1e-4, max_relative = 1e-14);
        assert_eq!(s[2], 0.0);
    }

    #[test]
    fn invalid_material_is_rejected() {
        assert!(Material::new(1.0, 0.5, 1.0, 1.0, Formulation::PlaneStrain).is_err());
        assert!(Material::new(-1.0, 0.2, 1.0, 1.0, Formulation::PlaneStrain).is_err());
        assert!(Material::new(1.0, 0.2, 1.0, 0.0, Formulation::PlaneStrain).is_err());
    }

    #[test]
    fn kalthoff_wave_speed() {
        let m = steel();
        let hand = (190e9 * 0.7 / (8000.0 * 1.3 * 0.4f64)).sqrt();
        assert_relative_eq!(m.wave_speed(), hand, max_relative = 1e-14);
        assert!((m.wave_speed() - 5654.0).abs() < 1.0);
    }

    #[test]
    fn principal_stress() {
        assert_eq!(max_principal([1e6, 0.0, 0.0]), 1e6);
        assert_relative_eq!(max_principal([0.0, 0.0, 1e6]), 1e6);
        assert_relative_eq!(max_principal([-2.0, -5.0, 0.0]), -2.0);
    }

    #[test]
    fn boundary_quadrature_of_one_triangle_is_plain_cst() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [2.0, 0.3], [0.4, 1.5]], vec![Element::tri(0, 1, 2)]).unwrap();
        let op = SmoothedStrainOperator::new(&mesh);
        let u = [0.1, -0.2, 0.35, 0.05, -0.07, 0.4];
        // independent textbook B matrix
        let (x, y) = ([0.0, 2.0, 0.4], [0.0, 0.3, 1.5]);
        let two_a = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
        let b = [y[1] - y[2], y[2] - y[0], y[0] - y[1]];
        let c = [x[2] - x[1], x[0] - x[2], x[1] - x[0]];
        let mut expect = [0.0; 3];
        for i in 0..3 {
            expect[0] += b[i] * u[2 * i] / two_a;
            expect[1] += c[i] * u[2 * i + 1] / two_a;
            expect[2] += (c[i] * u[2 * i] + b[i] * u[2 * i + 1]) / two_a;
        }
        for q in 0..3 {
            let e = op.get(q).strain(&u);
            for k in 0..3 {
                assert_relative_eq!(e[k], expect[k], max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn single_triangle_force_is_area_bt_sigma() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![Element::tri(0, 1, 2)]).unwrap();
        let op = SmoothedStrainOperator::new(&mesh);
        let sigma = [3.0, -1.0, 0.5];
        let mut f = vec![0.0; 6];
        op.internal_force(&[sigma; 3], &mut f);
        // B^T sigma A with A = 1/2; gradients (-1,-1), (1,0), (0,1)
        let g = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        for i in 0..3 {
            assert_relative_eq!(f[2 * i], 0.5 * (g[i][0] * sigma[0] + g[i][1] * sigma[2]), epsilon = 1e-15);
            assert_relative_eq!(f[2 * i + 1], 0.5 * (g[i][1] * sigma[1] + g[i][0] * sigma[2]), epsilon = 1e-15);
        }
    }

    #[test]
    fn quad_patch_reproduces_linear_fields() {
        let mesh = generate_rect_mesh(2.0, 1.0, 3, 2, ElementKind::Quad, Diagonal::Alternating, &[])
            .unwrap()
            .jittered(0.2, 7)
            .unwrap();
        let op = SmoothedStrainOperator::new(&mesh);
        let u: Vec<f64> = mesh.nodes().iter().flat_map(|p| [1e-3 * p[0] + 2e-3 * p[1] + 0.5, -4e-3 * p[0] + 3e-3 * p[1]]).collect();
        for e in op.strains(&u) {
            assert_relative_eq!(e[0], 1e-3, max_relative = 1e-12);
            assert_relative_eq!(e[1], 3e-3, max_relative = 1e-12);
            assert_relative_eq!(e[2], -2e-3, max_relative = 1e-10);
        }
    }

    #[test]
    fn quad_patch_center_mass() {
        let mesh = generate_rect_mesh(1.0, 1.0, 2, 2, ElementKind::Quad, Diagonal::Alternating, &[]).unwrap();
        let m = lumped_mass(&mesh, &steel());
        assert_relative_eq!(m[4], 4.0 * 8000.0 * 0.25 / 4.0, max_relative = 1e-15);
        let tri = Mesh::new(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]], vec![Element::tri(0, 1, 2)]).unwrap();
        let rho3 = Material::new(1.0, 0.2, 3.0, 1.0, Formulation::PlaneStrain).unwrap();
        assert_eq!(lumped_mass(&tri, &rho3), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn refresh_after_split_matches_rebuild() {
        let mut mesh = generate_rect_mesh(1.0, 1.0, 3, 3, ElementKind::Tri, Diagonal::Alternating, &[]).unwrap();
        let mut op = SmoothedStrainOperator::new(&mesh);
        let interior = (0..mesh.edge_count())
            .find(|&i| !mesh.edge(i).is_boundary() && mesh.edge(i).nodes.contains(&0))
            .unwrap();
        let touched: Vec<usize> = mesh.edge(interior).nodes.iter().flat_map(|&n| mesh.node_elements(n).to_vec()).collect();
        mesh.open_edge(interior).unwrap();
        op.refresh(&mesh, &touched);
        let fresh = SmoothedStrainOperator::new(&mesh);
        assert_eq!(op.len(), fresh.len());
        for q in 0..op.len() {
            assert_eq!(op.get(q), fresh.get(q), "quadrature {q}");
        }
    }
}
