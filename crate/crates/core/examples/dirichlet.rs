//! Compact tension under an imposed slot-opening velocity.
//!
//! Runs the three loading rates and compares crack patterns and dissipated
//! energy. The slow case grows a single crack, the fast ones branch.
//!
//!     cargo run --release --example dirichlet -- [v0 ...]

use cem2d::bench::{BenchmarkConfig, Scenario, Simulation};
use cem2d::bench::config::Dirichlet;

fn main() -> cem2d::Result<()> {
    env_logger::init();
    let speeds: Vec<f64> = std::env::args().skip(1).map(|s| s.parse().expect("velocity in m/s")).collect();
    let speeds = if speeds.is_empty() { vec![1.375, 3.318, 3.993] } else { speeds };
    for v0 in speeds {
        let cfg = BenchmarkConfig::new(Scenario::Dirichlet(Dirichlet {
            v0,
            ..Default::default()
        }));
        let mut sim = Simulation::from_config(&cfg)?;
        let report = sim.run(cfg.t_end_us() * 1e-6, 10e-6, |_, _| Ok(()))?;
        let h = sim.h;
        let graph = sim.crack_graph(f64::INFINITY);
        let path = graph.dominant_path();
        let tip = sim.notch_tip.expect("slotted block");
        println!(
            "v0 = {v0:5.3} m/s: Ud = {:6.2} J/m, {} segments, main crack {:.0} mm at {:.0} deg, {} macro-branch point(s), {:.1?}",
            sim.topology.dissipated,
            sim.topology.segments.len(),
            1e3 * graph.path_length(&path),
            graph.path_angle(&path, tip).unwrap_or(f64::NAN),
            graph.macro_branches(5.0 * h).len(),
            report.wall_clock
        );
    }
    Ok(())
}
