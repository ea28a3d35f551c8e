//! Explicit central-difference integration with lumped mass.
//!
//! Velocities live at half steps. One call to [`SimState::advance`] takes the
//! state from `(u_n, v_{n-1/2})` to `(u_{n+1}, v_{n+1/2})` and reports the
//! energies at `t_n`: kinetic energy from the mean of the two half-step
//! velocities, and external work by trapezoid accumulation of the applied
//! loads plus the reactions at prescribed DOFs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esfem::Material;
use crate::mesh::Mesh;

/// `v = (t/t0) v0` up to `t0`, then `v0`.
pub fn ramp_velocity(t: f64, v0: f64, t0: f64) -> f64 {
    if t <= t0 {
        t / t0 * v0
    } else {
        v0
    }
}

/// Linear rise to `p0` over `t0`, then exponential decay with time constant
/// `tau`. All times in seconds.
pub fn pressure_history(t: f64, p0: f64, t0: f64, tau: f64) -> f64 {
    if t <= t0 {
        t / t0 * p0
    } else {
        p0 * (-(t - t0) / tau).exp()
    }
}

/// `safety * h_min / c_d` with `h_min` the shortest element edge.
pub fn stable_dt(mesh: &Mesh, material: &Material, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::Config(format!("dt safety {safety} outside (0, 1]")));
    }
    let scale = (mesh.total_area() / mesh.element_count().max(1) as f64).sqrt();
    let mut h_min = f64::INFINITY;
    for e in 0..mesh.element_count() {
        let h = mesh.element_min_edge(e);
        if !(h > 1e-9 * scale) {
            return Err(Error::DegenerateElement { element: e, length: h });
        }
        h_min = h_min.min(h);
    }
    Ok(safety * h_min / material.wave_speed())
}

/// Kinematic condition on one DOF.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Constraint {
    #[default]
    Free,
    Fixed,
    Ramp { v0: f64, t0: f64 },
}

impl Constraint {
    pub fn velocity(self, t: f64) -> Option<f64> {
        match self {
            Constraint::Free => None,
            Constraint::Fixed => Some(0.0),
            Constraint::Ramp { v0, t0 } => Some(ramp_velocity(t, v0, t0)),
        }
    }
}

/// Uniform traction (Pa) on a set of boundary edges, fixed direction.
#[derive(Clone, Debug, PartialEq)]
pub struct TractionLoad {
    pub edges: Vec<usize>,
    pub traction: [f64; 2],
}

/// Follower pressure on boundary edges, pushing into the material.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureLoad {
    pub edges: Vec<usize>,
    pub p0: f64,
    pub t0: f64,
    pub tau: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LostLoadPolicy {
    /// Skip the edge and log a warning.
    #[default]
    DropWarn,
    Error,
}

#[derive(Clone, Debug, Default)]
pub struct LoadCase {
    /// One entry per DOF, `[x0, y0, x1, ...]`.
    pub constraints: Vec<Constraint>,
    pub tractions: Vec<TractionLoad>,
    pub pressures: Vec<PressureLoad>,
    pub lost_load: LostLoadPolicy,
}

impl LoadCase {
    pub fn new(node_count: usize) -> Self {
        Self {
            constraints: vec![Constraint::Free; 2 * node_count],
            ..Default::default()
        }
    }

    fn constrain(&mut self, nodes: &[usize], dir: usize, c: Constraint) -> Result<()> {
        if dir > 1 {
            return Err(Error::Config(format!("direction {dir} is not 0 (x) or 1 (y)")));
        }
        for &n in nodes {
            let slot = self
                .constraints
                .get_mut(2 * n + dir)
                .ok_or_else(|| Error::Config(format!("constrained node {n} does not exist")))?;
            if *slot != Constraint::Free && *slot != c {
                return Err(Error::Config(format!(
                    "node {n} direction {dir} already carries {slot:?}"
                )));
            }
            *slot = c;
        }
        Ok(())
    }

    pub fn ramp(&mut self, nodes: &[usize], dir: usize, v0: f64, t0: f64) -> Result<()> {
        if !(t0 > 0.0) {
            return Err(Error::Config(format!("ramp time t0 = {t0} must be positive")));
        }
        self.constrain(nodes, dir, Constraint::Ramp { v0, t0 })
    }

    pub fn fix(&mut self, nodes: &[usize], dir: usize) -> Result<()> {
        self.constrain(nodes, dir, Constraint::Fixed)
    }

    pub fn traction(&mut self, edges: Vec<usize>, traction: [f64; 2]) {
        self.tractions.push(TractionLoad { edges, traction });
    }

    pub fn pressure(&mut self, edges: Vec<usize>, p0: f64, t0: f64, tau: f64) -> Result<()> {
        if !(t0 > 0.0 && tau > 0.0) {
            return Err(Error::Config(format!("pressure needs t0 > 0 and tau > 0 (got {t0}, {tau})")));
        }
        self.pressures.push(PressureLoad { edges, p0, t0, tau });
        Ok(())
    }

    /// Gives a freshly duplicated node the constraints of its original.
    pub fn duplicate_node(&mut self, original: usize, copy: usize) {
        if self.constraints.len() < 2 * (copy + 1) {
            self.constraints.resize(2 * (copy + 1), Constraint::Free);
        }
        self.constraints[2 * copy] = self.constraints[2 * original];
        self.constraints[2 * copy + 1] = self.constraints[2 * original + 1];
    }

    pub fn is_constrained(&self, node: usize) -> bool {
        self.constraints[2 * node] != Constraint::Free || self.constraints[2 * node + 1] != Constraint::Free
    }

    /// Edges carrying a traction or pressure.
    pub fn loaded_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.tractions
            .iter()
            .flat_map(|l| l.edges.iter().copied())
            .chain(self.pressures.iter().flat_map(|l| l.edges.iter().copied()))
    }

    /// Nodal loads at time `t` on the current configuration `X + u`. Edge
    /// loads are lumped half to each end node.
    pub fn external_forces(&self, mesh: &Mesh, u: &[f64], t: f64, f: &mut [f64]) -> Result<()> {
        f.iter_mut().for_each(|x| *x = 0.0);
        let current = |n: usize| {
            let p = mesh.node(n);
            [p[0] + u[2 * n], p[1] + u[2 * n + 1]]
        };
        let usable = |id: usize| -> Result<bool> {
            if mesh.edge(id).is_boundary() {
                return Ok(true);
            }
            match self.lost_load {
                LostLoadPolicy::DropWarn => {
                    log::warn!("loaded edge {id} is no longer on a free surface; its load is dropped");
                    Ok(false)
                }
                LostLoadPolicy::Error => Err(Error::Topology(format!("loaded edge {id} is no longer on a free surface"))),
            }
        };
        for load in &self.tractions {
            for &id in &load.edges {
                if !usable(id)? {
                    continue;
                }
                let [a, b] = mesh.edge(id).nodes;
                let (pa, pb) = (current(a), current(b));
                let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
                for n in [a, b] {
                    f[2 * n] += 0.5 * len * load.traction[0];
                    f[2 * n + 1] += 0.5 * len * load.traction[1];
                }
            }
        }
        for load in &self.pressures {
            let p = pressure_history(t, load.p0, load.t0, load.tau);
            for &id in &load.edges {
                if !usable(id)? {
                    continue;
                }
                // counter-clockwise traversal of the owning element: the
                // left normal points into the material
                let side = mesh.edge(id).sides[0];
                let (a, b) = mesh.element(side.element).local_edge(side.local);
                let (pa, pb) = (current(a), current(b));
                let inward = [-(pb[1] - pa[1]), pb[0] - pa[0]];
                for n in [a, b] {
                    f[2 * n] += 0.5 * p * inward[0];
                    f[2 * n + 1] += 0.5 * p * inward[1];
                }
            }
        }
        Ok(())
    }
}

/// Energies at one integer time level (J per unit thickness).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Energies {
    pub t: f64,
    pub kinetic: f64,
    pub external_work: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SimState {
    pub u: Vec<f64>,
    /// Half-step velocity, `v_{n-1/2}` before a step and `v_{n+1/2}` after.
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    /// Lumped nodal mass (kg/m).
    pub mass: Vec<f64>,
    pub t: f64,
    pub step: u64,
    pub external_work: f64,
    /// Effective external force at the previous time level.
    f_prev: Vec<f64>,
    dt_prev: f64,
}

impl SimState {
    pub fn new(mass: Vec<f64>) -> Self {
        let n = 2 * mass.len();
        Self {
            u: vec![0.0; n],
            v: vec![0.0; n],
            a: vec![0.0; n],
            mass,
            f_prev: vec![0.0; n],
            ..Default::default()
        }
    }

    pub fn node_count(&self) -> usize {
        self.mass.len()
    }

    /// Appends a node with the kinematic state of `original`, copied
    /// bitwise. The caller re-lumps the mass of both nodes.
    pub fn duplicate_node(&mut self, original: usize) -> usize {
        let copy = self.mass.len();
        for d in 0..2 {
            self.u.push(self.u[2 * original + d]);
            self.v.push(self.v[2 * original + d]);
            self.a.push(self.a[2 * original + d]);
            self.f_prev.push(0.0);
        }
        self.mass.push(0.0);
        copy
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Linear momentum `sum m v` with the current half-step velocity.
    pub fn momentum(&self) -> [f64; 2] {
        let mut p = [0.0; 2];
        for (n, &m) in self.mass.iter().enumerate() {
            p[0] += m * self.v[2 * n];
            p[1] += m * self.v[2 * n + 1];
        }
        p
    }

    /// One central-difference step from the forces at `t_n`.
    pub fn advance(&mut self, dt: f64, f_ext: &[f64], f_int: &[f64], constraints: &[Constraint]) -> Result<Energies> {
        let t = self.t;
        let mut kinetic = 0.0;
        let mut work = 0.0;
        for i in 0..self.u.len() {
            let m = self.mass[i / 2];
            let v_old = self.v[i];
            let f_eff = match constraints.get(i).and_then(|c| c.velocity(t + 0.5 * dt)) {
                Some(v) => {
                    self.v[i] = v;
                    self.a[i] = 0.0;
                    // reaction plus load: whatever keeps the DOF on its ramp
                    m * (v - v_old) / dt + f_int[i]
                }
                None => {
                    self.a[i] = (f_ext[i] - f_int[i]) / m;
                    self.v[i] = v_old + self.a[i] * dt;
                    f_ext[i]
                }
            };
            work += 0.5 * (self.f_prev[i] + f_eff) * v_old * self.dt_prev;
            self.f_prev[i] = f_eff;
            let v_mid = 0.5 * (v_old + self.v[i]);
            kinetic += 0.5 * m * v_mid * v_mid;
            self.u[i] += self.v[i] * dt;
        }
        self.external_work += work;
        let report = Energies {
            t,
            kinetic,
            external_work: self.external_work,
        };
        if !kinetic.is_finite() || !self.external_work.is_finite() || self.u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { step: self.step, time: t });
        }
        self.t += dt;
        self.dt_prev = dt;
        self.step += 1;
        Ok(report)
    }
}
