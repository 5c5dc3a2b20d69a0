//! Continuous rank parameter: sweeps, and the explicit map that carries a
//! reduced level-2 point at `k` to a feasible point at any `k' ≥ k`.

use super::{build, BuildOptions, Level, LevelSpec};
use crate::error::{Error, Result};
use crate::matrix::{kron, partial_trace, swap_operator, Field, FieldMatrix, TensorLayout};
use crate::problem::{RankSdp, Relation, Sense};
use crate::solver::{SolverConfig, Status};
use serde::{Deserialize, Serialize};

/// Tolerance of the monotonicity check in [`rank_parameter_sweep`].
pub const MONOTONE_TOL: f64 = 1e-7;

/// Blocks of a reduced level-2 point (`phi_phi` only over ℝ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    pub k: f64,
    pub field: Field,
    pub n: usize,
    pub phi_i: FieldMatrix,
    pub phi_v: FieldMatrix,
    pub phi_phi: Option<FieldMatrix>,
}

fn transpose_first(m: &FieldMatrix, n: usize) -> FieldMatrix {
    crate::matrix::partial_transpose(m, &TensorLayout { factor_dims: vec![n, n] }, &[0]).expect("n² layout")
}

fn comb(parts: &[(&FieldMatrix, f64)]) -> FieldMatrix {
    parts[1..].iter().fold(parts[0].0.scale(parts[0].1), |acc, (m, s)| acc.try_add(&m.scale(*s)).expect("equal shapes"))
}

fn neg_part(m: &FieldMatrix) -> f64 {
    (-m.min_eigenvalue()).max(0.0)
}

impl ReducedPoint {
    fn swap(&self) -> FieldMatrix {
        swap_operator(self.n).in_field(self.field).expect("real swap")
    }

    /// Two-copy marginal `Φ_{A₁B₁}` of the point.
    pub fn psi(&self) -> FieldMatrix {
        let k = self.k;
        match &self.phi_phi {
            Some(f) => comb(&[(&self.phi_i, k * k), (&self.phi_v, k), (f, k)]),
            None => comb(&[(&self.phi_i, k * k), (&self.phi_v, k)]),
        }
    }

    /// The point at rank parameter `k2 ≥ k` with the same two-copy marginal.
    pub fn transfer(&self, k2: f64) -> Result<ReducedPoint> {
        let k = self.k;
        if !(k2 >= k) {
            return Err(Error::Invalid(format!("cannot transfer from k = {k} down to k = {k2}")));
        }
        if k2 == k {
            return Ok(self.clone());
        }
        let v = self.swap();
        let (phi_i, phi_phi) = match &self.phi_phi {
            None => {
                let den = k2 * (k2 * k2 - 1.0);
                (comb(&[(&self.phi_i, k * (k * k2 - 1.0) / den), (&self.phi_v, k * (k2 - k) / den)]), None)
            }
            Some(f) => {
                let den = k2 * (k2 + 2.0) * (k2 - 1.0);
                let pi = comb(&[
                    (&self.phi_i, k * (k * k2 + k - 2.0) / den),
                    (&self.phi_v, k * (k2 - k) / den),
                    (f, k * (k2 - k) / den),
                ]);
                let pv = v.matmul(&pi)?;
                (pi, Some(transpose_first(&pv, self.n)))
            }
        };
        let phi_v = v.matmul(&phi_i)?;
        Ok(ReducedPoint { k: k2, field: self.field, n: self.n, phi_i, phi_v, phi_phi })
    }

    /// Largest violation of the reduced level-2 constraints of `p` (with
    /// partial-transpose blocks when `ppt`, over ℂ).
    pub fn violation(&self, p: &RankSdp, ppt: bool) -> Result<f64> {
        let (n, k) = (self.n, self.k);
        if p.dim_n != n {
            return Err(Error::Dimension(format!("point has n = {n}, problem has {}", p.dim_n)));
        }
        let v = self.swap();
        let (pi, pv) = (&self.phi_i, &self.phi_v);
        let mut worst = pi.hermitian_defect().max(pv.hermitian_defect());
        worst = worst.max(v.matmul(pi)?.distance(pv));
        worst = worst.max(neg_part(&comb(&[(pi, 1.0), (pv, 1.0)])));
        worst = worst.max(neg_part(&comb(&[(pi, 1.0), (pv, -1.0)])));
        match &self.phi_phi {
            Some(f) => {
                worst = worst.max(transpose_first(pi, n).distance(pi));
                worst = worst.max(transpose_first(pv, n).distance(f));
                worst = worst.max(v.matmul(f)?.distance(f));
                worst = worst.max(neg_part(&comb(&[(pi, 1.0), (pv, 1.0), (f, k)])));
            }
            None if ppt => {
                let (ti, tv) = (transpose_first(pi, n), transpose_first(pv, n));
                worst = worst.max(neg_part(&comb(&[(&ti, 1.0), (&tv, k)])));
                worst = worst.max(neg_part(&ti));
            }
            None => {}
        }
        let psi = self.psi();
        worst = worst.max((psi.trace().re - 1.0).abs());
        let layout = TensorLayout::new(vec![n, n])?;
        let id = FieldMatrix::identity(Field::Real, n);
        let side = |o: &FieldMatrix| -> Result<FieldMatrix> {
            partial_trace(&kron(o, &id)?.matmul(&psi)?, &layout, &[1])
        };
        for c in &p.constraints {
            let l = side(&c.coeff.try_sub(&id.scale(c.target))?)?;
            worst = worst.max(match c.relation {
                Relation::Eq => l.max_abs(),
                Relation::Leq => neg_part(&l.scale(-1.0)),
            });
        }
        for l in &p.lmi {
            let t = side(&id)?;
            let md = l.out_dim();
            let parts: Vec<Vec<FieldMatrix>> =
                l.maps.iter().map(|row| row.iter().map(side).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
            let blk = FieldMatrix::from_fn(Field::Complex, md * n, md * n, |i, j| {
                l.bound.get(i / n, j / n) * t.get(i % n, j % n) - parts[i / n][j / n].get(i % n, j % n)
            });
            worst = worst.max(neg_part(&blk));
        }
        Ok(worst)
    }
}

/// One entry of a rank-parameter sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k: f64,
    pub status: Status,
    pub value: Option<f64>,
    pub certified: Option<f64>,
    /// Set when the value moves against the expected direction by more than
    /// [`MONOTONE_TOL`], which can only come from solver inaccuracy.
    pub warning: Option<String>,
}

/// Relaxation values for increasing rank parameters. Non-integer values
/// are accepted at the reduced level 2 only.
pub fn rank_parameter_sweep(
    p: &RankSdp,
    ks: &[f64],
    spec: &LevelSpec,
    opts: &BuildOptions,
    cfg: &SolverConfig,
) -> Result<Vec<SweepPoint>> {
    if ks.windows(2).any(|w| w[1] < w[0]) || ks.iter().any(|&k| !(k >= 1.0)) {
        return Err(Error::Invalid("rank parameters must be ascending and at least 1".into()));
    }
    if spec.level != Level::L2Reduced && ks.iter().any(|k| k.fract() != 0.0) {
        return Err(Error::Invalid("non-integer rank parameters need the reduced level 2".into()));
    }
    let mut out: Vec<SweepPoint> = Vec::with_capacity(ks.len());
    let mut best: Option<f64> = None;
    for &k in ks {
        let q = p.clone().with_rank_bound(k)?;
        let sol = build(&q, spec, opts)?.solve(cfg)?;
        let value = sol.primal_value.is_finite().then_some(sol.primal_value);
        let mut warning = None;
        if let (Some(v), Some(b)) = (value, best) {
            let drift = match p.sense {
                Sense::Max => b - v,
                Sense::Min => v - b,
            };
            if drift > MONOTONE_TOL {
                warning = Some(format!("value moved against the rank parameter by {drift:.3e}; solver accuracy"));
            }
        }
        if let Some(v) = value {
            best = Some(best.map_or(v, |b| match p.sense {
                Sense::Max => b.max(v),
                Sense::Min => b.min(v),
            }));
        }
        out.push(SweepPoint { k, status: sol.status, value, certified: sol.certified_bound, warning });
    }
    Ok(out)
}
