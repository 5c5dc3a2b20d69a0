//! Max-Cut, quadratic pseudo-Boolean optimization and Boolean least squares.
//!
//! A sign vector `x̃ ∈ {±1}ⁿ` is encoded as `ρ = x̃x̃ᵀ/n`, so every instance
//! is a trace-normalized real problem with `ρ_ii = 1/n` and rank one.

use super::{solve_level, Bound, Graph};
use crate::error::{Error, Result};
use crate::hierarchy::{BuildOptions, LevelSpec};
use crate::matrix::{Field, FieldMatrix};
use crate::oracles::{enumerate_boolean, OracleResult, MAX_BOOLEAN_VARS};
use crate::problem::{LinearFunctional, RankSdp, Sense};
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};

/// `max/min n·Tr(Lρ) + constant` over `ρ ⪰ 0`, `ρ_ii = 1/n`, rank one.
fn sign_problem(l: &FieldMatrix, constant: f64, sense: Sense) -> Result<RankSdp> {
    let n = l.nrows();
    let x = FieldMatrix::real_fn(n, n, |i, j| n as f64 * l.re(i, j) + if i == j { constant } else { 0.0 });
    let mut p = RankSdp::new(Field::Real, x, sense)?;
    for i in 0..n {
        let e = FieldMatrix::real_fn(n, n, |a, b| if a == i && b == i { 1.0 } else { 0.0 });
        p.push(LinearFunctional::eq(e, 1.0 / n as f64))?;
    }
    Ok(p)
}

/// Max-Cut as a rank-one problem: `¼ΣW − ¼·xᵀWx` with `ρ = xxᵀ/n`.
pub fn maxcut_problem(g: &Graph) -> Result<RankSdp> {
    let n = g.n_vertices();
    if n == 0 {
        return Err(Error::Invalid("Max-Cut needs at least one vertex".into()));
    }
    let w = g.adjacency();
    let l = w.scale(-0.25);
    let total = 2.0 * g.n_edges() as f64;
    let mut p = sign_problem(&l, total / 4.0, Sense::Max)?;
    p.notes.push(format!("Max-Cut of a graph with {n} vertices and {} edges", g.n_edges()));
    Ok(p)
}

/// Upper bound on the Max-Cut of `g`.
pub fn maxcut_bound(g: &Graph, spec: &LevelSpec, cfg: &SolverConfig) -> Result<Bound> {
    Ok(solve_level(&maxcut_problem(g)?, spec, &BuildOptions::default(), cfg)?.0)
}

/// Exact Max-Cut by enumerating bipartitions (the last vertex stays on
/// one side).
pub fn maxcut_bruteforce(g: &Graph) -> Result<usize> {
    let n = g.n_vertices();
    if n > MAX_BOOLEAN_VARS {
        return Err(Error::SizeBudget(format!("{n} vertices exceed {MAX_BOOLEAN_VARS}")));
    }
    if n <= 1 {
        return Ok(0);
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let r = enumerate_boolean(n - 1, Sense::Max, |x| {
        let side = |v: usize| if v == n - 1 { 1 } else { x[v] };
        edges.iter().filter(|&&(i, j)| side(i) != side(j)).count() as f64
    })?;
    Ok(r.value as usize)
}

/// Homogenized matrix `[[Q, c/2], [cᵀ/2, 0]]` with `Q` symmetrized.
fn lifted(q: &FieldMatrix, c: &[f64]) -> Result<FieldMatrix> {
    let m = c.len();
    if q.nrows() != m || q.ncols() != m {
        return Err(Error::Dimension(format!("Q is {}x{}, c has {m} entries", q.nrows(), q.ncols())));
    }
    Ok(FieldMatrix::real_fn(m + 1, m + 1, |i, j| match (i < m, j < m) {
        (true, true) => 0.5 * (q.re(i, j) + q.re(j, i)),
        (true, false) => 0.5 * c[i],
        (false, true) => 0.5 * c[j],
        (false, false) => 0.0,
    }))
}

/// `xᵀQx + cᵀx + constant` over `x ∈ {±1}ᵐ` as a rank-one problem on `m + 1`
/// dimensions.
pub fn boolean_problem(q: &FieldMatrix, c: &[f64], constant: f64, sense: Sense) -> Result<RankSdp> {
    let l = lifted(q, c)?;
    let mut p = sign_problem(&l, constant, sense)?;
    p.notes.push(format!("quadratic form in {} sign variables", c.len()));
    Ok(p)
}

/// Bound on `xᵀQx + cᵀx` over sign vectors.
pub fn pseudo_boolean_bound(q: &FieldMatrix, c: &[f64], spec: &LevelSpec, sense: Sense, cfg: &SolverConfig) -> Result<Bound> {
    Ok(solve_level(&boolean_problem(q, c, 0.0, sense)?, spec, &BuildOptions::default(), cfg)?.0)
}

fn quadratic_value(q: &FieldMatrix, c: &[f64], x: &[i8]) -> f64 {
    let m = c.len();
    let mut v = 0.0;
    for i in 0..m {
        v += c[i] * x[i] as f64;
        for j in 0..m {
            v += q.re(i, j) * (x[i] * x[j]) as f64;
        }
    }
    v
}

/// Exact optimum of `xᵀQx + cᵀx` by enumeration.
pub fn pseudo_boolean_bruteforce(q: &FieldMatrix, c: &[f64], sense: Sense) -> Result<OracleResult> {
    lifted(q, c)?;
    enumerate_boolean(c.len(), sense, |x| quadratic_value(q, c, x))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeastSquaresReport {
    /// Lower bound on `min ‖Ax − b‖²`.
    pub bound: Bound,
    /// Sign vector rounded from the relaxed state.
    pub rounded: Vec<i8>,
    /// `‖Ax − b‖²` at the rounded vector, an upper bound on the minimum.
    pub rounded_value: f64,
}

fn residual_norm2(a: &FieldMatrix, b: &[f64], x: &[i8]) -> f64 {
    (0..a.nrows()).map(|r| ((0..a.ncols()).map(|c| a.re(r, c) * x[c] as f64).sum::<f64>() - b[r]).powi(2)).sum()
}

/// `min ‖Ax − b‖²` over `x ∈ {±1}ᵈ`. The relaxed state is rounded by the
/// signs of its dominant eigenvector (zero entries round to +1), oriented
/// so that the homogenizing coordinate is +1.
pub fn boolean_least_squares(a: &FieldMatrix, b: &[f64], spec: &LevelSpec, cfg: &SolverConfig) -> Result<LeastSquaresReport> {
    let (m, d) = (a.nrows(), a.ncols());
    if m == 0 || d == 0 || b.len() != m {
        return Err(Error::Dimension(format!("A is {m}x{d}, b has {} entries", b.len())));
    }
    let a = a.to_real(1e-12)?;
    let q = a.transpose().matmul(&a)?;
    let c: Vec<f64> = (0..d).map(|j| -2.0 * (0..m).map(|r| a.re(r, j) * b[r]).sum::<f64>()).collect();
    let constant: f64 = b.iter().map(|v| v * v).sum();
    let p = boolean_problem(&q, &c, constant, Sense::Min)?;
    let (bound, relax, sol) = solve_level(&p, spec, &BuildOptions::default(), cfg)?;
    let sign = |v: f64| if v < 0.0 { -1i8 } else { 1 };
    let rounded: Vec<i8> = if sol.params.len() == relax.program.nrows && sol.params.iter().all(|v| v.is_finite()) {
        let rho = relax.marginal_state(&sol.params)?;
        let (_, vecs) = rho.eigh();
        let top = vecs.column(d);
        let orient = sign(top[d].re);
        (0..d).map(|i| sign(top[i].re) * orient).collect()
    } else {
        vec![1; d]
    };
    let rounded_value = residual_norm2(&a, b, &rounded);
    Ok(LeastSquaresReport { bound, rounded, rounded_value })
}

#[cfg(test)]
pub(super) fn least_squares_bruteforce(a: &FieldMatrix, b: &[f64]) -> Result<OracleResult> {
    enumerate_boolean(a.ncols(), Sense::Min, |x| residual_norm2(a, b, x))
}
