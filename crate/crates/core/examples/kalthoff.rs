//! Edge-on impact of a pre-notched steel plate.
//!
//! Runs the plate with the multiple-tip tracker (or `sct` as the first
//! argument for the single-tip one) and reports the angle of the main crack.
//!
//!     cargo run --release --example kalthoff -- [mct|sct] [t_end_us]

use cem2d::bench::{BenchmarkConfig, Scenario, Simulation};
use cem2d::cem::TrackingMode;

fn main() -> cem2d::Result<()> {
    env_logger::init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = BenchmarkConfig::new(Scenario::Kalthoff(Default::default()));
    if args.first().is_some_and(|a| a == "sct") {
        cfg.tracking.mode = TrackingMode::Sct;
    }
    let t_end = args.get(1).map_or(cfg.t_end_us(), |s| s.parse().expect("t_end in microseconds"));
    let mut sim = Simulation::from_config(&cfg)?;
    println!(
        "{} elements, dt = {:.3e} s, mode {:?}",
        sim.mesh.element_count(),
        sim.dt,
        cfg.tracking.mode
    );
    let report = sim.run(t_end * 1e-6, 10e-6, |_, s| {
        println!(
            "t = {:5.1} us  Ud = {:9.3} J/m  Ek = {:9.3}  Es = {:9.3}  W = {:9.3}  balance {:.2}%",
            s.t * 1e6,
            s.ud,
            s.kinetic,
            s.strain,
            s.external_work,
            100.0 * s.balance_error()
        );
        Ok(())
    })?;
    let graph = sim.crack_graph(f64::INFINITY);
    let path = graph.dominant_path();
    let tip = sim.notch_tip.expect("notched plate");
    println!(
        "{} segments, {} steps in {:.1?}",
        sim.topology.segments.len(),
        report.steps,
        report.wall_clock
    );
    match graph.path_angle(&path, tip) {
        Some(a) => println!("main crack: {:.1} mm at {:.1} deg from the notch axis", 1e3 * graph.path_length(&path), a),
        None => println!("no crack left the notch"),
    }
    println!("branch points: {}", graph.branch_points().len());
    Ok(())
}
