//! The time loop.
//!
//! Each step works at time level `t_n`: smoothed stresses from `u_n`, crack
//! tracking on those stresses, stresses again if the mesh changed, forces,
//! then the central-difference update to `u_{n+1}`. Energies reported for the
//! step belong to `t_n`.

use std::path::PathBuf;
use std::time::Instant;

use crate::cem::{CrackSegment, CrackTopology, SplitCriteria};
use crate::dynamics::{stable_dt, Energies, LoadCase, SimState};
use crate::error::{Error, Result};
use crate::esfem::{lumped_mass, Material, SmoothedStrainOperator, StressState};
use crate::mct::{mct_advance, sct_advance, TrackingOptions};
use crate::mesh::{Mesh, Point};

use super::analysis::{initiation_times, mean_edge_length, surface_mask, CrackGraph};
use super::config::BenchmarkConfig;
use super::fragments::count_fragments;
use super::scenario::{build, Setup};
use crate::cem::TrackingMode;

/// One row of the energy time series.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sample {
    /// Time (s).
    pub t: f64,
    pub ud: f64,
    pub kinetic: f64,
    pub strain: f64,
    pub external_work: f64,
    pub fragments: usize,
}

impl Sample {
    /// `|W - (Ek + Es + Ud)| / max(W, Es)`.
    pub fn balance_error(&self) -> f64 {
        let scale = self.external_work.max(self.strain);
        if scale > 0.0 {
            (self.external_work - (self.kinetic + self.strain + self.ud)).abs() / scale
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub samples: Vec<Sample>,
    pub steps: u64,
    pub dt: f64,
    pub splits: usize,
    pub wall_clock: std::time::Duration,
    pub final_fragments: usize,
    pub fragment_sizes: Vec<f64>,
    /// The crack polyline as split.
    pub segments: Vec<CrackSegment>,
    /// VTK files written during the run.
    pub snapshots: Vec<PathBuf>,
}

pub struct Simulation {
    pub mesh: Mesh,
    pub material: Material,
    pub loads: LoadCase,
    pub state: SimState,
    pub topology: CrackTopology,
    pub operator: SmoothedStrainOperator,
    pub stress: StressState,
    pub tracking: TrackingOptions,
    pub notch_tip: Option<Point>,
    pub dt: f64,
    pub bulk_viscosity: Option<f64>,
    pub major_fraction: f64,
    /// Surface edges of the mesh before any split.
    pub initial_surface: Vec<bool>,
    /// Mean edge length of the initial mesh.
    pub h: f64,
    /// Strain energy added by re-smoothing at fixed displacement when
    /// splits change the smoothing domains (J/m), summed over the run.
    pub split_energy: f64,
    f_ext: Vec<f64>,
    f_int: Vec<f64>,
    dt_reduced: bool,
}

/// What one step did.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub energies: Energies,
    pub strain_energy: f64,
    pub splits: usize,
}

impl Simulation {
    pub fn from_config(cfg: &BenchmarkConfig) -> Result<Self> {
        let setup = build(cfg)?;
        let mut criteria = SplitCriteria::new(cfg.material().gc, cfg.tracking.gamma);
        criteria.dominance = cfg.tracking.dominance;
        let mut sim = Self::new(setup, cfg.material(), criteria, cfg.tracking.mode, cfg.time.dt_safety)?;
        sim.tracking.max_splits_per_step = cfg.tracking.max_splits_per_step;
        sim.bulk_viscosity = cfg.time.bulk_viscosity;
        sim.major_fraction = cfg.output.major_fraction;
        Ok(sim)
    }

    pub fn new(setup: Setup, material: Material, criteria: SplitCriteria, mode: TrackingMode, dt_safety: f64) -> Result<Self> {
        material.validate()?;
        let Setup {
            mesh,
            loads,
            non_crackable,
            seeds,
            notch_tip,
        } = setup;
        let dt = stable_dt(&mesh, &material, dt_safety)?;
        let mut topology = CrackTopology::new(&mesh, criteria, mode);
        topology.set_crackable(non_crackable, false);
        topology.seeds = seeds;
        let operator = SmoothedStrainOperator::new(&mesh);
        let state = SimState::new(lumped_mass(&mesh, &material));
        let stress = StressState::evaluate(&operator, &material, &state.u);
        let n = 2 * mesh.node_count();
        let initial_surface = surface_mask(&mesh);
        let h = mean_edge_length(&mesh);
        Ok(Self {
            mesh,
            material,
            loads,
            state,
            topology,
            operator,
            stress,
            tracking: TrackingOptions::default(),
            notch_tip,
            dt,
            bulk_viscosity: None,
            major_fraction: 0.005,
            initial_surface,
            h,
            split_energy: 0.0,
            f_ext: vec![0.0; n],
            f_int: vec![0.0; n],
            dt_reduced: false,
        })
    }

    fn evaluate_stress(&mut self) {
        self.stress = StressState::evaluate(&self.operator, &self.material, &self.state.u);
        if let Some(b) = self.bulk_viscosity {
            let rate = self.operator.strains(&self.state.v);
            let c = self.material.wave_speed() * self.material.rho * b;
            for (q, r) in rate.iter().enumerate() {
                let compression = -(r[0] + r[1]);
                if compression > 0.0 {
                    let p = c * self.mesh.edge_length(q) * compression;
                    self.stress.stress[q][0] -= p;
                    self.stress.stress[q][1] -= p;
                }
            }
        }
    }

    /// Largest `omega^2` of the elements in `patch` and their neighbors,
    /// by power iteration with the rest of the mesh held still.
    pub fn patch_frequency_sq(&self, patch: &[usize]) -> f64 {
        let mut nodes: Vec<usize> = patch.iter().flat_map(|&e| self.mesh.element(e).nodes().to_vec()).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut quads: Vec<usize> = nodes
            .iter()
            .flat_map(|&n| self.mesh.node_elements(n).iter().flat_map(|&e| self.mesh.element_edges(e).to_vec()))
            .collect();
        quads.sort_unstable();
        quads.dedup();
        let dofs = 2 * self.mesh.node_count();
        let c = self.material.elasticity();
        let mut x = vec![0.0; dofs];
        for (k, &n) in nodes.iter().enumerate() {
            // deterministic, sign-alternating start vector
            x[2 * n] = if k % 2 == 0 { 1.0 } else { -0.7 };
            x[2 * n + 1] = if k % 3 == 0 { -1.0 } else { 0.6 };
        }
        let mut lambda = 0.0;
        let mut f = vec![0.0; dofs];
        for _ in 0..40 {
            for &n in &nodes {
                f[2 * n] = 0.0;
                f[2 * n + 1] = 0.0;
            }
            for &q in &quads {
                let op = self.operator.get(q);
                let e = op.strain(&x);
                let s = [
                    c[0][0] * e[0] + c[0][1] * e[1],
                    c[1][0] * e[0] + c[1][1] * e[1],
                    c[2][2] * e[2],
                ];
                op.scatter(s, &mut f);
            }
            let (mut num, mut den, mut norm) = (0.0, 0.0, 0.0);
            for &n in &nodes {
                let m = self.state.mass[n];
                for d in 0..2 {
                    let i = 2 * n + d;
                    num += x[i] * f[i];
                    den += m * x[i] * x[i];
                }
            }
            lambda = num / den;
            for &n in &nodes {
                let m = self.state.mass[n];
                for d in 0..2 {
                    let i = 2 * n + d;
                    x[i] = f[i] / m;
                    norm += x[i] * x[i];
                }
            }
            let norm = norm.sqrt();
            if norm == 0.0 {
                break;
            }
            for &n in &nodes {
                x[2 * n] /= norm;
                x[2 * n + 1] /= norm;
            }
        }
        lambda
    }

    /// Runs one step.
    pub fn step(&mut self) -> Result<StepReport> {
        self.evaluate_stress();
        let records = match self.topology.mode {
            TrackingMode::Mct => mct_advance(
                &mut self.topology,
                &mut self.mesh,
                &mut self.state,
                &mut self.loads,
                &self.material,
                &self.stress.stress,
                &self.tracking,
            )?,
            TrackingMode::Sct => sct_advance(
                &mut self.topology,
                &mut self.mesh,
                &mut self.state,
                &mut self.loads,
                &self.material,
                &self.stress.stress,
            )?,
        };
        if !records.is_empty() {
            let before = self.stress.strain_energy(&self.operator);
            let mut touched: Vec<usize> = records.iter().flat_map(|(_, r)| r.touched.iter().copied()).collect();
            touched.sort_unstable();
            touched.dedup();
            self.operator.refresh(&self.mesh, &touched);
            let n = 2 * self.mesh.node_count();
            self.f_ext.resize(n, 0.0);
            self.f_int.resize(n, 0.0);
            self.evaluate_stress();
            self.split_energy += self.stress.strain_energy(&self.operator) - before;
            self.check_stability(&touched)?;
        }
        self.loads.external_forces(&self.mesh, &self.state.u, self.state.t, &mut self.f_ext)?;
        self.operator.internal_force(&self.stress.stress, &mut self.f_int);
        let strain_energy = self.stress.strain_energy(&self.operator);
        let energies = self.state.advance(self.dt, &self.f_ext, &self.f_int, &self.loads.constraints)?;
        Ok(StepReport {
            energies,
            strain_energy,
            splits: records.len(),
        })
    }

    /// Splits stiffen the cut elements a little. If the local frequency
    /// bound is violated the step is cut once; a second violation is an
    /// error.
    fn check_stability(&mut self, touched: &[usize]) -> Result<()> {
        let omega = self.patch_frequency_sq(touched).sqrt();
        if omega * self.dt <= 0.95 * 2.0 {
            return Ok(());
        }
        if self.dt_reduced {
            return Err(Error::Divergence {
                step: self.state.step,
                time: self.state.t,
            });
        }
        let dt = 0.8 * 2.0 / omega;
        log::warn!("step {}: dt {:.3e} -> {:.3e} after a split", self.state.step, self.dt, dt);
        self.dt = dt;
        self.dt_reduced = true;
        Ok(())
    }

    /// Crack graph of the segments split up to `t_max` (s).
    pub fn crack_graph(&self, t_max: f64) -> CrackGraph {
        CrackGraph::new(&self.topology.segments, &self.initial_surface, self.notch_tip, self.h, t_max)
    }

    /// Times at which cracks started from the original surface.
    pub fn initiations(&self) -> Vec<f64> {
        initiation_times(&self.topology.segments, &self.initial_surface)
    }

    pub fn fragments(&self) -> usize {
        count_fragments(&self.mesh, self.major_fraction).major
    }

    /// Steps until `t_end` (s), sampling every `every` seconds. `on_sample`
    /// sees the simulation after each sample.
    pub fn run(&mut self, t_end: f64, every: f64, mut on_sample: impl FnMut(&Self, &Sample) -> Result<()>) -> Result<RunReport> {
        let start = Instant::now();
        let mut report = RunReport {
            dt: self.dt,
            ..Default::default()
        };
        let mut next = every;
        let eps = 1e-9 * every;
        if t_end > 0.0 {
            loop {
                let r = self.step()?;
                report.splits += r.splits;
                let t = r.energies.t;
                if t + eps >= next {
                    let s = Sample {
                        t,
                        ud: self.topology.dissipated,
                        kinetic: r.energies.kinetic,
                        strain: r.strain_energy,
                        external_work: r.energies.external_work,
                        fragments: self.fragments(),
                    };
                    report.samples.push(s);
                    on_sample(self, &s)?;
                    while next <= t + eps {
                        next += every;
                    }
                }
                if t + eps >= t_end {
                    break;
                }
            }
        }
        let f = count_fragments(&self.mesh, self.major_fraction);
        report.final_fragments = f.major;
        report.fragment_sizes = f.areas;
        report.segments = self.topology.segments.clone();
        report.steps = self.state.step;
        report.wall_clock = start.elapsed();
        Ok(report)
    }
}
