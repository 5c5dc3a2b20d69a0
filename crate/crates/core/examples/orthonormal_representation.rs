//! Excluding orthonormal representations: unit vectors on the vertices,
//! orthogonal on non-edges, in dimension k over ℝ and ℂ.

use rankhier::applications::{orthonormal_rep_check, Graph};
use rankhier::matrix::Field;
use rankhier::solver::SolverConfig;

fn main() -> rankhier::Result<()> {
    let g = Graph::parse_graph6("Jzl[kWq_YE?")?;
    let cfg = SolverConfig::default();
    for k in [4, 5] {
        for field in [Field::Real, Field::Complex] {
            let r = orthonormal_rep_check(&g, k, field, &cfg)?;
            println!("k={k} {field:?}: {:?} (margin {:.3e}, certified {:?})", r.verdict, r.margin.margin, r.margin.certified);
        }
    }
    Ok(())
}
