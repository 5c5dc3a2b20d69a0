//! Rigorous bounds from approximate witnesses, and the feasibility margin.

use super::{apply_a, solve, Solution, SolverConfig, Status};
use crate::conic::{svec_index, Cone, ConicProgram};
use crate::error::{Error, Result};
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

/// Largest relative equality residual a witness may have before repair.
const REPAIR_LIMIT: f64 = 1e-4;

/// Margins below this value certify infeasibility.
pub const MARGIN_TOL: f64 = 1e-6;

/// Upper bound on the trace of each block's slack over the feasible set,
/// from explicit bounds and from identities with positive coefficients.
fn block_trace_bounds(cp: &ConicProgram) -> Vec<Option<f64>> {
    let nb = cp.blocks.len();
    let mut out: Vec<Option<f64>> = (0..nb).map(|j| cp.meta.trace_bounds.get(j).copied().flatten()).collect();
    for id in &cp.meta.trace_identities {
        if id.terms.iter().any(|&(b, a)| a <= 0.0 || b >= nb) {
            continue;
        }
        for &(b, a) in &id.terms {
            let t = id.rhs / a;
            out[b] = Some(out[b].map_or(t, |o: f64| o.min(t)));
        }
    }
    out
}

fn smat(d: usize, v: &[f64]) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(d, d);
    for j in 0..d {
        for i in j..d {
            let x = v[svec_index(d, i, j)];
            if i == j {
                m[(i, i)] = x;
            } else {
                m[(i, j)] = x / std::f64::consts::SQRT_2;
                m[(j, i)] = x / std::f64::consts::SQRT_2;
            }
        }
    }
    m
}

fn min_eig(m: &Mat<f64>) -> Result<f64> {
    if m.nrows() == 1 {
        return Ok(m[(0, 0)]);
    }
    let ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Numerical("eigenvalue solver failed during certification".into()))?;
    Ok(ev[0])
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Certified bound on the relaxation optimum in the direction of its sense
/// (an upper bound for a maximization, a lower bound for a minimization).
///
/// The witness is first projected onto `A x = ±b`, then every cone violation
/// is charged against the trace bound of the corresponding slack, and the
/// floating-point residual of the projection against a bound on `‖y‖`.
pub fn certify_upper_bound(cp: &ConicProgram, sol: &Solution) -> Result<f64> {
    certify_checked(cp, sol, f64::INFINITY)
}

pub(crate) fn certify_checked(cp: &ConicProgram, sol: &Solution, max_final_residual: f64) -> Result<f64> {
    cp.validate()?;
    let x = sol.witness();
    if x.len() != cp.ncols() {
        return Err(Error::Dimension(format!("witness has {} entries, program has {}", x.len(), cp.ncols())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("witness is not finite".into()));
    }
    let sign = cp.sense_sign();
    let target: Vec<f64> = cp.b.iter().map(|v| sign * v).collect();
    let scale = norm(&target).max(1.0);
    let ax = apply_a(cp, &x);
    let r: Vec<f64> = target.iter().zip(&ax).map(|(t, a)| t - a).collect();
    if norm(&r) / scale > REPAIR_LIMIT {
        return Err(Error::Numerical(format!("witness residual {:.3e} is too large to repair", norm(&r) / scale)));
    }

    // A Aᵀ, accumulated column by column
    let m = cp.nrows;
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cp.ncols()];
    for &(row, col, v) in &cp.a {
        by_col[col].push((row, v));
    }
    let mut gram = Mat::<f64>::zeros(m, m);
    for col in &by_col {
        for &(i, a) in col {
            for &(k, b) in col {
                gram[(i, k)] += a * b;
            }
        }
    }
    let llt = gram
        .llt(Side::Lower)
        .map_err(|_| Error::Numerical("constraint rows are linearly dependent".into()))?;
    let mut xr = x.clone();
    let mut resid = r;
    for _ in 0..3 {
        let rhs = Mat::<f64>::from_fn(m, 1, |i, _| resid[i]);
        let sol_r = faer::linalg::solvers::Solve::solve(&llt, &rhs);
        for (col, entries) in by_col.iter().enumerate() {
            for &(i, a) in entries {
                xr[col] += a * sol_r[(i, 0)];
            }
        }
        let ax = apply_a(cp, &xr);
        resid = target.iter().zip(&ax).map(|(t, a)| t - a).collect();
    }
    let final_res = norm(&resid);
    if final_res / scale > max_final_residual {
        return Err(Error::Numerical(format!("repaired witness residual {:.3e} fails the re-check", final_res / scale)));
    }

    let bounds = block_trace_bounds(cp);
    let offs = cp.block_offsets();
    let mut penalty = 0.0;
    let mut all_bounded = true;
    for (j, blk) in cp.blocks.iter().enumerate() {
        let v = &xr[offs[j]..offs[j] + blk.width()];
        let deficit = match *blk {
            Cone::Psd(d) => (-min_eig(&smat(d, v))?).max(0.0),
            Cone::Nonneg(_) => v.iter().fold(0.0f64, |acc, &t| acc.max(-t)),
            Cone::Free(_) => 0.0,
        };
        match (bounds[j], blk) {
            (_, Cone::Free(_)) => {}
            (Some(t), _) => penalty += deficit * t,
            (None, _) => {
                all_bounded = false;
                if deficit > 0.0 {
                    return Err(Error::Numerical(format!(
                        "block {j} of the witness is outside its cone and has no trace bound"
                    )));
                }
            }
        }
    }
    let cx: f64 = cp.c.iter().zip(&xr).map(|(a, b)| a * b).sum();
    let mut residual_term = 0.0;
    if final_res > 0.0 {
        if !all_bounded {
            return Err(Error::Numerical("cannot bound the parameters without trace bounds on every block".into()));
        }
        let total: f64 = cp
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| !matches!(b, Cone::Free(_)))
            .map(|(j, _)| bounds[j].unwrap_or(0.0))
            .sum();
        let smallest = gram_min_eig(&by_col, m)?;
        if smallest <= 0.0 {
            return Err(Error::Numerical("constraint rows are numerically dependent".into()));
        }
        residual_term = final_res * (norm(&cp.c) + total) / smallest.sqrt();
    }
    let bound = cx + penalty + residual_term;
    Ok(sign * bound + cp.offset)
}

fn gram_min_eig(by_col: &[Vec<(usize, f64)>], m: usize) -> Result<f64> {
    let mut gram = Mat::<f64>::zeros(m, m);
    for col in by_col {
        for &(i, a) in col {
            for &(k, b) in col {
                gram[(i, k)] += a * b;
            }
        }
    }
    if m == 0 {
        return Ok(f64::INFINITY);
    }
    min_eig(&gram)
}

/// Result of [`feasibility_margin`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    /// Margin reached by the solver (largest t with every block ⪰ t·𝟙, capped at 1).
    #[serde(with = "super::nullable")]
    pub margin: f64,
    /// Rigorous upper bound on the margin, when available.
    pub certified: Option<f64>,
    pub status: Status,
    /// The relaxation is certified infeasible.
    pub infeasible: bool,
}

/// Program maximizing the common shift `t` of all cone blocks, with
/// `−1 ≤ t ≤ 1`. The original objective is discarded.
pub fn margin_program(cp: &ConicProgram) -> Result<ConicProgram> {
    cp.validate()?;
    let m = cp.nrows;
    let t = m;
    let offs = cp.block_offsets();
    let mut a = cp.a.clone();
    for (j, blk) in cp.blocks.iter().enumerate() {
        match *blk {
            Cone::Psd(d) => (0..d).for_each(|i| a.push((t, offs[j] + svec_index(d, i, i), 1.0))),
            Cone::Nonneg(w) => (0..w).for_each(|i| a.push((t, offs[j] + i, 1.0))),
            Cone::Free(_) => {}
        }
    }
    let cap = cp.ncols();
    a.push((t, cap, 1.0));
    a.push((t, cap + 1, -1.0));
    let mut blocks = cp.blocks.clone();
    blocks.push(Cone::Nonneg(2));
    let mut c = cp.c.clone();
    c.extend([1.0, 1.0]);
    let mut b = vec![0.0; m + 1];
    b[t] = 1.0;

    // traces of the shifted slacks grow by at most the block degree
    let degree = |blk: &Cone| match *blk {
        Cone::Psd(d) => d as f64,
        Cone::Nonneg(w) => w as f64,
        Cone::Free(_) => 0.0,
    };
    let mut bounds: Vec<Option<f64>> =
        cp.blocks.iter().enumerate().map(|(j, blk)| cp.meta.trace_bounds.get(j).copied().flatten().map(|v| v + degree(blk))).collect();
    for id in &cp.meta.trace_identities {
        if id.terms.iter().any(|&(bj, coef)| coef <= 0.0 || bj >= cp.blocks.len()) {
            continue;
        }
        let shifted = id.rhs + id.terms.iter().map(|&(bj, coef)| coef * degree(&cp.blocks[bj])).sum::<f64>();
        for &(bj, coef) in &id.terms {
            let v = shifted / coef;
            bounds[bj] = Some(bounds[bj].map_or(v, |o: f64| o.min(v)));
        }
    }
    bounds.push(Some(2.0));
    let mut meta = cp.meta.clone();
    meta.trace_bounds = bounds;
    meta.trace_identities.clear();
    if meta.block_labels.len() == cp.blocks.len() {
        meta.block_labels.push("margin cap".into());
    }
    meta.notes.push("feasibility margin".into());
    Ok(ConicProgram { blocks, nrows: m + 1, a, b, c, sense: crate::problem::Sense::Max, offset: 0.0, meta })
}

/// Largest common shift `t` such that every cone block of the relaxation
/// stays ⪰ t·𝟙 while all equalities hold. A certified negative margin
/// proves the relaxation infeasible.
pub fn feasibility_margin(cp: &ConicProgram, cfg: &SolverConfig) -> Result<MarginReport> {
    let mp = margin_program(cp)?;
    let sol = solve(&mp, cfg)?;
    let certified = match sol.status {
        Status::Optimal | Status::MaxIter | Status::NumericalTrouble => certify_upper_bound(&mp, &sol).ok(),
        _ => None,
    };
    let infeasible = match sol.status {
        Status::Infeasible => true,
        _ => certified.is_some_and(|c| c < -MARGIN_TOL),
    };
    let margin = match sol.status {
        Status::Infeasible => f64::NEG_INFINITY,
        _ => sol.primal_value,
    };
    Ok(MarginReport { margin, certified, status: sol.status, infeasible })
}
