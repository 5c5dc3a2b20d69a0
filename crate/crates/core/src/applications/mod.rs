//! Front-ends that phrase concrete problems as [`RankSdp`] instances, run
//! the hierarchy and interpret the results.

mod boolean;
mod graph;
mod graphrep;
mod states;

pub use boolean::{
    boolean_least_squares, boolean_problem, maxcut_bound, maxcut_bruteforce, maxcut_problem, pseudo_boolean_bound,
    pseudo_boolean_bruteforce, LeastSquaresReport,
};
pub use graph::{Graph, GRAPH6_MAX_VERTICES};
pub use graphrep::{lovasz_theta, orthonormal_rep_check, orthonormal_rep_problem, Exclusion, RepresentationReport};
pub use states::{
    choi_state, fidelity_fixture_state, fidelity_state, maximally_entangled_problem, mixed_unitary_check, pure_state_opt,
    quadratic_opt, unfaithfulness_bound, unfaithfulness_check, MixedUnitaryReport, UnfaithfulnessVerdict, Verdict,
};

use crate::error::Result;
use crate::hierarchy::{build, BuildOptions, LevelSpec, Relaxation};
use crate::problem::{RankSdp, Sense};
use crate::solver::{Solution, SolverConfig, Status};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// One relaxation value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub level: String,
    pub k: f64,
    pub sense: Sense,
    /// Solver value of the relaxation.
    pub value: f64,
    /// Rigorous bound in the optimization direction (upper for
    /// maximization, lower for minimization), when certification succeeded.
    pub certified: Option<f64>,
    pub status: Status,
    pub seconds: f64,
}

impl Bound {
    /// The certified bound, or the solver value when certification failed.
    pub fn best(&self) -> f64 {
        self.certified.unwrap_or(self.value)
    }
}

/// Builds and solves `p` at `spec`.
pub(crate) fn solve_level(
    p: &RankSdp,
    spec: &LevelSpec,
    opts: &BuildOptions,
    cfg: &SolverConfig,
) -> Result<(Bound, Relaxation, Solution)> {
    let start = Instant::now();
    let relax = build(p, spec, opts)?;
    let sol = relax.solve(cfg)?;
    let bound = Bound {
        level: spec.label(),
        k: p.rank_bound,
        sense: p.sense,
        value: sol.primal_value,
        certified: sol.certified_bound,
        status: sol.status,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((bound, relax, sol))
}

#[cfg(test)]
mod tests;
