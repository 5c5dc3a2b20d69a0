//! Relaxation values as the rank parameter grows continuously, on the
//! normalized Max-Cut problem of the 5-cycle.

use rankhier::applications::{maxcut_problem, Graph};
use rankhier::hierarchy::{rank_parameter_sweep, BuildOptions, LevelSpec};
use rankhier::solver::SolverConfig;

fn main() -> rankhier::Result<()> {
    let p = maxcut_problem(&Graph::cycle(5))?;
    let ks = [1.0, 1.25, 1.5, 2.0, 3.0, 5.0];
    let pts = rank_parameter_sweep(&p, &ks, &LevelSpec::reduced(), &BuildOptions::default(), &SolverConfig::default())?;
    for pt in pts {
        println!("k = {:<5} value {:.6} {:?}", pt.k, pt.value.unwrap_or(f64::NAN), pt.status);
    }
    Ok(())
}
