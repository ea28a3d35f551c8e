//! Fragmentation of a thick ring under a decaying bore pressure.
//!
//!     cargo run --release --example cylinder -- [n_radial n_hoop]

use cem2d::bench::{BenchmarkConfig, Scenario, Simulation};

fn main() -> cem2d::Result<()> {
    env_logger::init();
    let args: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("cell counts")).collect();
    let mut cfg = BenchmarkConfig::new(Scenario::Cylinder(Default::default()));
    if let [nr, nh] = args[..] {
        cfg.mesh.n_radial = Some(nr);
        cfg.mesh.n_hoop = Some(nh);
    }
    let mut sim = Simulation::from_config(&cfg)?;
    println!("{} elements", sim.mesh.element_count());
    let report = sim.run(cfg.t_end_us() * 1e-6, 5e-6, |sim, s| {
        println!(
            "t = {:4.1} us  p = {:5.1} MPa  segments {:5}  major fragments {:3}",
            s.t * 1e6,
            1e-6 * cem2d::dynamics::pressure_history(s.t, 400e6, 1e-6, 100e-6),
            sim.topology.segments.len(),
            s.fragments
        );
        Ok(())
    })?;
    let starts = sim.initiations();
    println!(
        "{} cracks started from the surface, the first at {:.1} us",
        starts.len(),
        starts.first().map_or(f64::NAN, |t| t * 1e6)
    );
    let total: f64 = report.fragment_sizes.iter().sum();
    let mut major: Vec<f64> = report.fragment_sizes.iter().map(|a| 100.0 * a / total).filter(|&p| p >= 0.5).collect();
    major.sort_by(|a, b| b.total_cmp(a));
    println!("{} major fragments (% of area): {:.1?}", major.len(), major);
    println!("{:.1?} for {} steps", report.wall_clock, report.steps);
    Ok(())
}
