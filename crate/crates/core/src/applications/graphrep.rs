//! Orthonormal representations of graphs (non-adjacent vertices get
//! orthogonal vectors) and the Lovász theta function.
//!
//! A representation by unit vectors in dimension `k` is a Gram matrix `Γ`
//! with unit diagonal, zeros on non-edges and rank at most `k`; the problem
//! works with `ρ = Γ/n`. For the convention where adjacent vertices are
//! orthogonal, pass the complement graph.

use super::{solve_level, Bound, Graph};
use crate::error::{Error, Result};
use crate::hierarchy::{build, BuildOptions, LevelSpec, PhaseSymmetry};
use crate::matrix::{Field, FieldMatrix, C64};
use crate::problem::{LinearFunctional, RankSdp, Sense};
use crate::solver::{feasibility_margin, MarginReport, SolverConfig};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exclusion {
    /// The level-2 relaxation is certified infeasible.
    ExcludedAtLevel2,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationReport {
    pub field: Field,
    pub k: usize,
    pub verdict: Exclusion,
    pub margin: MarginReport,
    pub seconds: f64,
}

fn symmetric_unit(n: usize, i: usize, j: usize) -> FieldMatrix {
    FieldMatrix::real_fn(n, n, |a, b| if (a, b) == (i, j) || (a, b) == (j, i) { if i == j { 1.0 } else { 0.5 } } else { 0.0 })
}

/// Feasibility problem for a `k`-dimensional representation over `field`.
pub fn orthonormal_rep_problem(g: &Graph, k: usize, field: Field) -> Result<RankSdp> {
    let n = g.n_vertices();
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("dimension {k} outside 1..={n}")));
    }
    let zero = FieldMatrix::zeros(field, n, n);
    let mut p = RankSdp::new(field, zero, Sense::Max)?.with_rank_bound(k as f64)?;
    for i in 0..n {
        p.push(LinearFunctional::eq(symmetric_unit(n, i, i), 1.0 / n as f64))?;
    }
    for j in 0..n {
        for i in 0..j {
            if g.has_edge(i, j) {
                continue;
            }
            p.push(LinearFunctional::eq(symmetric_unit(n, i, j), 0.0))?;
            if field == Field::Complex {
                let mut f = FieldMatrix::zeros(Field::Complex, n, n);
                f.set(i, j, C64::new(0.0, 0.5));
                f.set(j, i, C64::new(0.0, -0.5));
                p.push(LinearFunctional::eq(f, 0.0))?;
            }
        }
    }
    p.notes.push(format!("orthonormal representation in dimension {k}"));
    Ok(p)
}

/// Runs the feasibility margin of the level-2 relaxation with partial
/// transposes, scaled so that the relaxed Gram matrix has unit diagonal. A
/// certified negative margin excludes representations in dimension `k`
/// over `field`.
pub fn orthonormal_rep_check(g: &Graph, k: usize, field: Field, cfg: &SolverConfig) -> Result<RepresentationReport> {
    let start = Instant::now();
    let p = orthonormal_rep_problem(g, k, field)?;
    let modulus = (field == Field::Real).then_some(2);
    let opts = BuildOptions { symmetry: Some(PhaseSymmetry::per_basis_vector(g.n_vertices(), modulus)), ..Default::default() };
    let relax = build(&p, &LevelSpec::reduced().with_field(field), &opts)?;
    let margin = feasibility_margin(&relax.program.scaled(g.n_vertices() as f64)?, cfg)?;
    let verdict = if margin.infeasible { Exclusion::ExcludedAtLevel2 } else { Exclusion::Inconclusive };
    Ok(RepresentationReport { field, k, verdict, margin, seconds: start.elapsed().as_secs_f64() })
}

/// `θ(G) = max ⟨𝕁, B⟩` over `B ⪰ 0`, `Tr B = 1`, `B_ij = 0` on edges.
pub fn lovasz_theta(g: &Graph, cfg: &SolverConfig) -> Result<Bound> {
    let n = g.n_vertices();
    if n == 0 {
        return Err(Error::Invalid("theta needs at least one vertex".into()));
    }
    let ones = FieldMatrix::real_fn(n, n, |_, _| 1.0);
    let mut p = RankSdp::new(Field::Real, ones, Sense::Max)?.with_rank_bound(n as f64)?;
    for (i, j) in g.edges() {
        p.push(LinearFunctional::eq(symmetric_unit(n, i, j), 0.0))?;
    }
    Ok(solve_level(&p, &LevelSpec::level1(), &BuildOptions::default(), cfg)?.0)
}
