//! Bundled conic solver, bound certification and solver backends.

mod backend;
mod certify;
mod ipm;

pub use backend::{backend_from_env, Backend, Bundled, External, SOLVER_ENV};
pub use certify::{certify_upper_bound, feasibility_margin, margin_program, MarginReport, MARGIN_TOL};

use crate::conic::{svec_index, Cone, ConicProgram, PresolveOutcome};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Outcome of a solve, phrased for the modeled relaxation: `Infeasible`
/// means the relaxation has no feasible parameters, `Unbounded` that its
/// value is unbounded in the optimization direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalTrouble,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iters: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_damping: f64,
    pub presolve: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { feas_tol: 1e-8, gap_tol: 1e-7, max_iters: 200, step_damping: 0.99, presolve: true }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.feas_tol) || !ok(self.gap_tol) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if !(self.step_damping > 0.0 && self.step_damping < 1.0) {
            return Err(Error::Invalid("step damping must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Solver output.
///
/// * `primal_value` is the relaxation objective at `params` (a lower bound on
///   the optimum for a maximization, up to residuals).
/// * `dual_value` is the objective of the witness `dual_point` (an upper
///   bound for a maximization, up to residuals).
/// * `primal_point` holds the slack `c − Aᵀy` per block and `dual_point` the
///   witness `x` per block, both in scaled lower-triangle vectorization.
///
/// For `Infeasible` the witness is a certificate ray; for `Unbounded` the
/// parameters are an improving ray. Values that do not exist are NaN
/// (serialized as `null`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    #[serde(with = "nullable")]
    pub primal_value: f64,
    #[serde(with = "nullable")]
    pub dual_value: f64,
    #[serde(default)]
    pub params: Vec<f64>,
    pub primal_point: Vec<Vec<f64>>,
    pub dual_point: Vec<Vec<f64>>,
    #[serde(with = "nullable")]
    pub gap: f64,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_bound: Option<f64>,
    #[serde(default, with = "nullable")]
    pub primal_residual: f64,
    #[serde(default, with = "nullable")]
    pub dual_residual: f64,
}

mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl Solution {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Witness as one flat vector in column order.
    pub fn witness(&self) -> Vec<f64> {
        self.dual_point.iter().flatten().copied().collect()
    }

    fn empty(status: Status, cp: &ConicProgram) -> Solution {
        Solution {
            status,
            primal_value: f64::NAN,
            dual_value: f64::NAN,
            params: Vec::new(),
            primal_point: split_blocks(cp, &vec![0.0; cp.ncols()]),
            dual_point: split_blocks(cp, &vec![0.0; cp.ncols()]),
            gap: f64::NAN,
            iterations: 0,
            certified_bound: None,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
        }
    }
}

pub(crate) fn split_blocks(cp: &ConicProgram, flat: &[f64]) -> Vec<Vec<f64>> {
    let offs = cp.block_offsets();
    cp.blocks.iter().zip(offs).map(|(b, o)| flat[o..o + b.width()].to_vec()).collect()
}

/// Slack `c − Aᵀy`.
pub fn slack(cp: &ConicProgram, y: &[f64]) -> Vec<f64> {
    let mut s = cp.c.clone();
    for &(r, c, v) in &cp.a {
        s[c] -= v * y[r];
    }
    s
}

/// `A x`.
pub fn apply_a(cp: &ConicProgram, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cp.nrows];
    for &(r, c, v) in &cp.a {
        out[r] += v * x[c];
    }
    out
}

/// Solve with the backend selected by the environment (bundled by default).
pub fn solve(cp: &ConicProgram, cfg: &SolverConfig) -> Result<Solution> {
    backend_from_env().solve(cp, cfg)
}

/// Solve with the bundled interior-point method.
pub fn solve_bundled(cp: &ConicProgram, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    cp.validate()?;
    faer::set_global_parallelism(faer::Par::Seq);
    let (work, columns) = if cfg.presolve {
        match cp.presolve()? {
            PresolveOutcome::Reduced { program, columns } => (program, columns),
            PresolveOutcome::Infeasible(_) => return Ok(Solution::empty(Status::Infeasible, cp)),
        }
    } else {
        (cp.clone(), (0..cp.ncols()).collect())
    };
    let data = ipm::Data::from_program(&work);
    let res = ipm::run(&data, cfg);

    let mut x_work = vec![0.0; work.ncols()];
    let offs = work.block_offsets();
    for (bi, blk) in work.blocks.iter().enumerate() {
        let o = offs[bi];
        match (*blk, data.slots[bi]) {
            (Cone::Psd(d), ipm::Slot::Psd(p)) => {
                let z = &res.z.psd[p];
                for j in 0..d {
                    for i in j..d {
                        let f = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
                        x_work[o + svec_index(d, i, j)] = f * z[(i, j)];
                    }
                }
            }
            (Cone::Nonneg(w), ipm::Slot::Lp(l)) => x_work[o..o + w].copy_from_slice(&res.z.lp[l..l + w]),
            (Cone::Free(w), ipm::Slot::Eq(l)) => x_work[o..o + w].copy_from_slice(&res.w[l..l + w]),
            _ => unreachable!("slot layout follows block layout"),
        }
    }
    let mut x = vec![0.0; cp.ncols()];
    for (k, &col) in columns.iter().enumerate() {
        x[col] = x_work[k];
    }
    let y = res.u.clone();
    let sign = cp.sense_sign();
    let finite_y = y.iter().all(|v| v.is_finite());
    let s = if finite_y { slack(cp, &y) } else { vec![f64::NAN; cp.ncols()] };
    let (primal_value, dual_value) = match res.status {
        Status::Infeasible | Status::Unbounded => (f64::NAN, f64::NAN),
        _ => {
            let by: f64 = cp.b.iter().zip(&y).map(|(a, b)| a * b).sum();
            let cx: f64 = cp.c.iter().zip(&x).map(|(a, b)| a * b).sum();
            (by + cp.offset, sign * cx + cp.offset)
        }
    };
    let gap = (dual_value - primal_value).abs() / primal_value.abs().max(1.0);
    let mut sol = Solution {
        status: res.status,
        primal_value,
        dual_value,
        params: y,
        primal_point: split_blocks(cp, &s),
        dual_point: split_blocks(cp, &x),
        gap,
        iterations: res.iterations,
        certified_bound: None,
        primal_residual: res.pres,
        dual_residual: res.dres,
    };
    if matches!(sol.status, Status::Optimal | Status::MaxIter | Status::NumericalTrouble) {
        if let Ok(c) = certify::certify_checked(cp, &sol, cfg.feas_tol / 10.0) {
            sol.certified_bound = Some(c);
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests;
