//! Pre-notched strip pulled apart by constant tractions on its long edges.
//!
//! The running crack bifurcates on its own; the example prints when and
//! where, and how the dissipated energy compares to a single straight crack.
//!
//!     cargo run --release --example neumann -- [t_end_us]

use cem2d::bench::{BenchmarkConfig, Scenario, Simulation};

fn main() -> cem2d::Result<()> {
    env_logger::init();
    let cfg = BenchmarkConfig::new(Scenario::Neumann(Default::default()));
    let Scenario::Neumann(plate) = &cfg.scenario else { unreachable!() };
    let t_end = std::env::args().nth(1).map_or(cfg.t_end_us(), |s| s.parse().expect("t_end in microseconds"));
    let mut sim = Simulation::from_config(&cfg)?;
    println!("{} elements, h = {:.2} mm", sim.mesh.element_count(), 1e3 * sim.h);
    let report = sim.run(t_end * 1e-6, 4e-6, |sim, s| {
        println!("t = {:5.1} us  Ud = {:7.4} J/m  segments {}", s.t * 1e6, s.ud, sim.topology.segments.len());
        Ok(())
    })?;
    let straight = cfg.material().gc * (plate.width - plate.notch_length);
    let ud = report.samples.last().map_or(0.0, |s| s.ud);
    println!("Ud = {ud:.4} J/m, {:.2}x the straight-crack bound {straight:.3} J/m", ud / straight);
    let h = sim.h;
    for b in sim.crack_graph(f64::INFINITY).macro_branches(3.0 * h) {
        // the root has no position of its own: cracks there start at the notch tip
        let at = if b.position[0].is_nan() {
            "the notch tip".to_string()
        } else {
            format!("({:.1}, {:.1}) mm", 1e3 * b.position[0], 1e3 * b.position[1])
        };
        println!(
            "branch at {at}, t = {:.1} us, arms {:?} mm",
            1e6 * b.onset,
            b.arms.iter().map(|a| (1e3 * a).round()).collect::<Vec<_>>()
        );
    }
    Ok(())
}
