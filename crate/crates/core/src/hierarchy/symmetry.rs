//! Diagonal phase symmetries supplied by the caller. A symmetry assigns an
//! integer charge vector to every basis vector of `ℂⁿ`; the group element
//! `g(θ) = diag(exp(i θ·q_j))` must leave the problem invariant. Relaxation
//! variables can then be restricted to charge-conserving entries, which
//! splits every block into independent sectors.

use crate::error::{Error, Result};
use crate::matrix::{pinv_solve, FieldMatrix, C64};
use crate::problem::{RankSdp, Relation};
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSymmetry {
    /// One charge vector per basis vector, all of equal length.
    pub charges: Vec<Vec<i64>>,
    /// Charges are conserved modulo this value (e.g. 2 for sign flips).
    #[serde(default)]
    pub modulus: Option<i64>,
}

impl PhaseSymmetry {
    pub fn new(charges: Vec<Vec<i64>>, modulus: Option<i64>) -> Result<Self> {
        let width = charges.first().map_or(0, Vec::len);
        if charges.iter().any(|q| q.len() != width) {
            return Err(Error::Invalid("charge vectors must have equal length".into()));
        }
        if modulus.is_some_and(|m| m < 2) {
            return Err(Error::Invalid("modulus must be at least 2".into()));
        }
        Ok(PhaseSymmetry { charges, modulus })
    }

    /// One independent U(1) (or ℤ_m) per basis vector.
    pub fn per_basis_vector(n: usize, modulus: Option<i64>) -> Self {
        let charges = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        PhaseSymmetry { charges, modulus }
    }

    pub fn dim(&self) -> usize {
        self.charges.len()
    }

    /// Total charge of the listed basis vectors minus that of `minus`.
    pub(crate) fn net(&self, plus: &[usize], minus: &[usize]) -> Vec<i64> {
        let width = self.charges.first().map_or(0, Vec::len);
        let mut out = vec![0i64; width];
        for &i in plus {
            out.iter_mut().zip(&self.charges[i]).for_each(|(o, q)| *o += q);
        }
        for &i in minus {
            out.iter_mut().zip(&self.charges[i]).for_each(|(o, q)| *o -= q);
        }
        if let Some(m) = self.modulus {
            out.iter_mut().for_each(|o| *o = o.rem_euclid(m));
        }
        out
    }

    pub(crate) fn conserves(&self, plus: &[usize], minus: &[usize]) -> bool {
        self.net(plus, minus).iter().all(|&v| v == 0)
    }

    fn phases(&self, rng: &mut ChaCha8Rng) -> Vec<C64> {
        let width = self.charges.first().map_or(0, Vec::len);
        let angles: Vec<f64> = (0..width)
            .map(|_| match self.modulus {
                Some(m) => std::f64::consts::TAU * rng.random_range(0..m) as f64 / m as f64,
                None => rng.random_range(0.0..std::f64::consts::TAU),
            })
            .collect();
        self.charges
            .iter()
            .map(|q| {
                let t: f64 = q.iter().zip(&angles).map(|(&c, a)| c as f64 * a).sum();
                C64::from_polar(1.0, t)
            })
            .collect()
    }

    /// Checks on random group elements that the objective, every inequality
    /// and the span of the equality constraints (with their targets) are
    /// invariant.
    pub fn verify(&self, p: &RankSdp) -> Result<()> {
        if self.dim() != p.dim_n {
            return Err(Error::Dimension(format!("symmetry acts on {} basis vectors, problem has {}", self.dim(), p.dim_n)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let eqs: Vec<(FieldMatrix, f64)> = p
            .constraints
            .iter()
            .filter(|c| c.relation == Relation::Eq)
            .map(|c| (c.coeff.to_complex(), c.target))
            .chain(p.normalized.then(|| (FieldMatrix::identity(p.field, p.dim_n).to_complex(), 1.0)))
            .collect();
        let gram = eq_gram(&eqs);
        for _ in 0..3 {
            let g = self.phases(&mut rng);
            let rot = |m: &FieldMatrix| {
                FieldMatrix::from_fn(crate::matrix::Field::Complex, m.nrows(), m.ncols(), |i, j| g[i] * m.get(i, j) * g[j].conj())
            };
            let close = |a: &FieldMatrix, b: &FieldMatrix| a.distance(b) <= 1e-9 * (1.0 + b.max_abs());
            if !close(&rot(&p.objective), &p.objective.to_complex()) {
                return Err(Error::Invalid("objective is not invariant under the phase symmetry".into()));
            }
            for c in p.constraints.iter().filter(|c| c.relation == Relation::Leq) {
                if !close(&rot(&c.coeff), &c.coeff.to_complex()) {
                    return Err(Error::Invalid("an inequality is not invariant under the phase symmetry".into()));
                }
            }
            for l in &p.lmi {
                if l.maps.iter().flatten().any(|m| !close(&rot(m), &m.to_complex())) {
                    return Err(Error::Invalid("a matrix inequality is not invariant under the phase symmetry".into()));
                }
            }
            for (c, t) in &eqs {
                let r = rot(c);
                let rhs: Vec<f64> = eqs.iter().map(|(e, _)| e.inner(&r)).collect();
                let lam = pinv_solve(&gram, &rhs)?;
                let mut fit = FieldMatrix::zeros(crate::matrix::Field::Complex, c.nrows(), c.ncols());
                let mut target = 0.0;
                for ((e, te), l) in eqs.iter().zip(&lam) {
                    fit = fit.try_add(&e.scale(*l))?;
                    target += l * te;
                }
                let scale = 1.0 + r.max_abs();
                if fit.distance(&r) > 1e-8 * scale || (target - t).abs() > 1e-8 * (1.0 + t.abs()) {
                    return Err(Error::Invalid("equality constraints are not invariant under the phase symmetry".into()));
                }
            }
        }
        Ok(())
    }
}

fn eq_gram(eqs: &[(FieldMatrix, f64)]) -> Mat<f64> {
    Mat::from_fn(eqs.len(), eqs.len(), |i, j| eqs[i].0.inner(&eqs[j].0))
}
