//! Runs a packaged config to disk and reads the result back: time series
//! and crack CSVs, VTK snapshots, and a fragment count from the last one.
//!
//!     cargo run --release --example snapshots -- configs/neumann.toml out/neumann

use std::path::PathBuf;

use cem2d::bench::{self, read_vtk, BenchmarkConfig};

fn main() -> cem2d::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/neumann.toml").into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/snapshots".into()));
    let mut cfg = BenchmarkConfig::load(&config)?;
    cfg.output.snapshot_every_us.get_or_insert(20.0);
    let (_, report) = bench::run(&cfg, Some(&out))?;
    for s in &report.snapshots {
        let grid = read_vtk(s)?;
        let f = grid.fragments(cfg.output.major_fraction);
        println!("{}: {} points, {} cells, {} fragment(s)", s.display(), grid.points.len(), grid.cells.len(), f.total());
    }
    println!("{} rows in {}", report.samples.len(), out.join(bench::run::TIMESERIES_FILE).display());
    Ok(())
}
