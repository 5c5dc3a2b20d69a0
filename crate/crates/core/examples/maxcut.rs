//! Max-Cut bounds at levels 1 and 2 against brute force.
//!
//! `cargo run --example maxcut -- [graph6]` (default: a seeded random graph).

use rankhier::applications::{maxcut_bound, maxcut_bruteforce, Graph};
use rankhier::hierarchy::LevelSpec;
use rankhier::solver::SolverConfig;

fn main() -> rankhier::Result<()> {
    let g = match std::env::args().nth(1) {
        Some(s) => Graph::parse_graph6(&s)?,
        None => Graph::erdos_renyi(9, 0.5, 4),
    };
    let cfg = SolverConfig::default();
    println!("graph {} with {} vertices and {} edges", g.to_graph6()?, g.n_vertices(), g.n_edges());
    for spec in [LevelSpec::level1(), LevelSpec::reduced()] {
        let b = maxcut_bound(&g, &spec, &cfg)?;
        println!("level {}: {:.6} (certified {:?}, {:.2}s)", b.level, b.value, b.certified, b.seconds);
    }
    println!("maximum cut: {}", maxcut_bruteforce(&g)?);
    Ok(())
}
