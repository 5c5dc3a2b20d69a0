//! The bundled interior-point solver on a hand-written standard-form
//! program: max y₀ subject to [[1 − y₀, 0], [0, 1 + y₀]] ⪰ 0.

use rankhier::conic::{svec_index, Cone, ConicProgram, ProgramMeta};
use rankhier::problem::Sense;
use rankhier::solver::{certify_upper_bound, solve, SolverConfig};

fn main() -> rankhier::Result<()> {
    // rows of A pair the parameter y with the slack coordinates; the slack
    // is c − Aᵀy with c = vec(𝟙)
    let d = 2;
    let cp = ConicProgram {
        blocks: vec![Cone::Psd(d)],
        nrows: 1,
        a: vec![(0, svec_index(d, 0, 0), 1.0), (0, svec_index(d, 1, 1), -1.0)],
        b: vec![1.0],
        c: vec![1.0, 0.0, 1.0],
        sense: Sense::Max,
        offset: 0.0,
        meta: ProgramMeta { trace_bounds: vec![Some(2.0)], ..Default::default() },
    };
    cp.validate()?;
    println!("{}", cp.to_json()?);
    let sol = solve(&cp, &SolverConfig::default())?;
    println!("status {:?}, value {:.8}, dual {:.8}, gap {:.1e}", sol.status, sol.primal_value, sol.dual_value, sol.gap);
    println!("certified bound {:.8}", certify_upper_bound(&cp, &sol)?);
    Ok(())
}
