use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cem2d::bench::{self, count_fragments, read_vtk, BenchmarkConfig};
use cem2d::cem::TrackingMode;
use cem2d::mesh::{load_mesh, write_internal};
use cem2d::{Error, Result};

#[derive(Parser)]
#[command(name = "cem2d", version, about = "2D explicit dynamic fracture with the crack element model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sct,
    Mct,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark config.
    Run {
        config: PathBuf,
        /// Output directory (default: `output.dir` from the config, else `out/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        dt_safety: Option<f64>,
        /// End time in microseconds.
        #[arg(long)]
        t_end: Option<f64>,
        /// VTK snapshot cadence in microseconds.
        #[arg(long)]
        snapshot_every: Option<f64>,
    },
    /// Count fragments in a VTK snapshot or a mesh file.
    Fragments {
        path: PathBuf,
        #[arg(long, default_value_t = 0.005)]
        major_fraction: f64,
    },
    /// Generate or inspect meshes.
    Mesh {
        #[command(subcommand)]
        command: MeshCommand,
    },
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Write the mesh of a benchmark config in the internal format.
    Gen {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print counts and sizes of a mesh file.
    Info { path: PathBuf },
}

fn run(
    config: &Path,
    out: Option<PathBuf>,
    mode: Option<Mode>,
    gamma: Option<f64>,
    dt_safety: Option<f64>,
    t_end: Option<f64>,
    snapshot_every: Option<f64>,
) -> Result<()> {
    let mut cfg = BenchmarkConfig::load(config)?;
    if let Some(m) = mode {
        cfg.tracking.mode = match m {
            Mode::Sct => TrackingMode::Sct,
            Mode::Mct => TrackingMode::Mct,
        };
    }
    if let Some(g) = gamma {
        cfg.tracking.gamma = g;
    }
    if let Some(s) = dt_safety {
        cfg.time.dt_safety = s;
    }
    if t_end.is_some() {
        cfg.time.t_end_us = t_end;
    }
    if snapshot_every.is_some() {
        cfg.output.snapshot_every_us = snapshot_every;
    }
    cfg.validate()?;
    let dir = out
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.label()));
    let (sim, report) = bench::run(&cfg, Some(&dir))?;
    let last = report.samples.last().copied().unwrap_or_default();
    println!("{}: {} elements, {} steps, dt {:.3e} s, {:.2?}", cfg.label(), sim.mesh.element_count(), report.steps, report.dt, report.wall_clock);
    println!(
        "t = {:.1} us  Ud = {:.4e} J/m  Ek = {:.4e}  Es = {:.4e}  W = {:.4e}",
        last.t * 1e6,
        last.ud,
        last.kinetic,
        last.strain,
        last.external_work
    );
    println!("{} crack segments, {} major fragments", report.segments.len(), report.final_fragments);
    println!("output in {}", dir.display());
    Ok(())
}

fn fragments(path: &Path, major_fraction: f64) -> Result<()> {
    let f = if path.extension().is_some_and(|e| e == "vtk") {
        read_vtk(path)?.fragments(major_fraction)
    } else {
        count_fragments(&load_mesh(path)?, major_fraction)
    };
    let total: f64 = f.areas.iter().sum();
    println!("fragments {} major {}", f.total(), f.major);
    let mut areas = f.areas.clone();
    areas.sort_by(|a, b| b.total_cmp(a));
    for a in areas.iter().filter(|&&a| a >= major_fraction * total) {
        println!("{a:.6e} ({:.2}%)", 100.0 * a / total);
    }
    Ok(())
}

fn mesh_info(path: &Path) -> Result<()> {
    let m = load_mesh(path)?;
    let boundary = m.boundary_edges().count();
    let min_h = (0..m.element_count()).map(|e| m.element_min_edge(e)).fold(f64::INFINITY, f64::min);
    println!("nodes {}", m.node_count());
    println!("elements {}", m.element_count());
    println!("edges {} ({boundary} on the boundary)", m.edge_count());
    println!("area {:.6e}", m.total_area());
    println!("mean edge {:.4e}, shortest {:.4e}", bench::mean_edge_length(&m), min_h);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = bench::init_threads_from_env().and_then(|()| match cli.command {
        Command::Run {
            config,
            out,
            mode,
            gamma,
            dt_safety,
            t_end,
            snapshot_every,
        } => run(&config, out, mode, gamma, dt_safety, t_end, snapshot_every),
        Command::Fragments { path, major_fraction } => fragments(&path, major_fraction),
        Command::Mesh { command } => match command {
            MeshCommand::Gen { config, output } => {
                let setup = bench::build(&BenchmarkConfig::load(config)?)?;
                write_internal(&setup.mesh, &output)?;
                println!("{} elements -> {}", setup.mesh.element_count(), output.display());
                Ok(())
            }
            MeshCommand::Info { path } => mesh_info(&path),
        },
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Parse { .. } | Error::UnsupportedElement { .. } | Error::Argument(_) => 2,
                Error::Divergence { .. } => 3,
                _ => 1,
            })
        }
    }
}
