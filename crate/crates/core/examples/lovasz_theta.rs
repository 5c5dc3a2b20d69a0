//! Lovász theta of the 5-cycle and of an 11-vertex graph with ϑ = 4.

use rankhier::applications::{lovasz_theta, Graph};
use rankhier::solver::SolverConfig;

fn main() -> rankhier::Result<()> {
    let cfg = SolverConfig::default();
    for (name, g) in [("C5", Graph::cycle(5)), ("Jzl[kWq_YE?", Graph::parse_graph6("Jzl[kWq_YE?")?)] {
        let b = lovasz_theta(&g, &cfg)?;
        println!("theta({name}) = {:.8} (certified {:?}, {:?})", b.value, b.certified, b.status);
    }
    println!("sqrt(5) = {:.8}", 5f64.sqrt());
    Ok(())
}
