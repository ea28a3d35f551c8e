//! The four benchmark scenarios and everything needed to run them: config,
//! the time loop, fragment counting, crack-path analysis and file output.

pub mod analysis;
pub mod config;
pub mod export;
pub mod fragments;
pub mod run;
pub mod scenario;
pub mod sim;

pub use analysis::{initiation_times, mean_edge_length, surface_mask, BranchPoint, CrackGraph};
pub use config::{BenchmarkConfig, Scenario};
pub use export::{export_cracks, export_timeseries, export_vtk, read_vtk};
pub use fragments::{count_fragments, Fragments};
pub use run::run;
pub use scenario::{build, Setup};
pub use sim::{RunReport, Sample, Simulation};

/// Sizes the global thread pool from `CEM2D_THREADS` when set. Results do
/// not depend on the thread count.
pub fn init_threads_from_env() -> crate::Result<()> {
    let Ok(v) = std::env::var("CEM2D_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| crate::Error::Config(format!("CEM2D_THREADS={v:?} is not a thread count")))?;
    // a pool that is already up is left as it is
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
