//! One benchmark run from config to files on disk.

use std::path::Path;

use crate::error::Result;

use super::config::BenchmarkConfig;
use super::export::{export_cracks, export_timeseries, export_vtk};
use super::sim::{RunReport, Simulation};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const CRACKS_FILE: &str = "cracks.csv";
pub const FINAL_VTK_FILE: &str = "final.vtk";

/// Runs `cfg` to its end time. With an output directory, writes the time
/// series, the crack polyline, snapshots at the configured cadence and the
/// final state there.
pub fn run(cfg: &BenchmarkConfig, out: Option<&Path>) -> Result<(Simulation, RunReport)> {
    cfg.validate()?;
    let mut sim = Simulation::from_config(cfg)?;
    let every = cfg.output.every_us * 1e-6;
    let snap_every = cfg.output.snapshot_every_us.map(|s| s * 1e-6);
    let mut next_snap = snap_every.unwrap_or(f64::INFINITY);
    let mut snapshots = Vec::new();
    let mut report = sim.run(cfg.t_end_us() * 1e-6, every, |sim, s| {
        if let (Some(dir), Some(step)) = (out, snap_every) {
            if s.t + 1e-9 * every >= next_snap {
                let path = dir.join(format!("snapshot_{:04}.vtk", snapshots.len()));
                export_vtk(&sim.mesh, &sim.state.u, &sim.stress, &path)?;
                log::info!("t = {:.1} us: wrote {}", s.t * 1e6, path.display());
                snapshots.push(path);
                while next_snap <= s.t + 1e-9 * every {
                    next_snap += step;
                }
            }
        }
        Ok(())
    })?;
    if let Some(dir) = out {
        export_timeseries(&report.samples, dir.join(TIMESERIES_FILE))?;
        export_cracks(&report.segments, dir.join(CRACKS_FILE))?;
        let path = dir.join(FINAL_VTK_FILE);
        export_vtk(&sim.mesh, &sim.state.u, &sim.stress, &path)?;
        snapshots.push(path);
    }
    report.snapshots = snapshots;
    Ok((sim, report))
}
