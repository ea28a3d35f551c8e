//! The split decision: energy release rate at a stretched crack tip and
//! the element case tables with their split ratio.
//!
//!     cargo run --release --example split_criteria

use cem2d::cem::{evaluate_cst_split, evaluate_quad_split, release_rate, Dominance, SplitCriteria};

fn main() {
    // mode I: tip edge opened by 1 um, 10 MPa across a horizontal segment
    let g = release_rate([0.0, 1e-6], [0.0, 10e6, 0.0], [0.0, 0.0], [1.0, 0.0]);
    println!("opening tip, horizontal path: G = {g} J/m^2");
    // the same stretch pushing the faces together is rejected
    let g = release_rate([0.0, 1e-6], [0.0, -10e6, 0.0], [0.0, 0.0], [1.0, 0.0]);
    println!("closing tip: G = {g} J/m^2");

    let pairs = [(0.5, 0.8), (1.5, 0.5), (2.0, 1.5), (2.0, 1.95)];
    for gamma in [0.5, 1.0, 1.5, 2.0, 4.0] {
        let c = SplitCriteria::new(1.0, gamma);
        let row: Vec<String> = pairs
            .iter()
            .map(|&(a, b)| match evaluate_cst_split(0, [(1, a), (2, b)], &c).target {
                Some(t) => format!("({a}, {b}) -> G{t}"),
                None => format!("({a}, {b}) -> none"),
            })
            .collect();
        println!("triangle, gamma {gamma}: {}", row.join("  "));
    }

    let mut margin = SplitCriteria::new(1.0, 0.2);
    margin.dominance = Dominance::Margin;
    for g in [[2.0, 1.8, 0.3], [2.0, 1.5, 0.3], [0.9, 0.2, 0.1]] {
        let d = evaluate_quad_split(0, [(1, g[0]), (2, g[1]), (3, g[2])], &margin);
        println!("quad {g:?}, margin 0.2: {:?}", d.target);
    }
}
