//! Level 1: the semidefinite relaxation without the rank constraint.

use super::linmat::{hermitian, variable, Acc, LinMat};
use super::model::Model;
use super::{fix_marginal, meta, BuildOptions, Layout, Relaxation};
use crate::error::{Error, Result};
use crate::matrix::{Field, C64};
use crate::problem::{RankSdp, Relation};

pub(super) fn build(p: &RankSdp, field: Field, opts: &BuildOptions) -> Result<Relaxation> {
    if opts.pair_objective.is_some() {
        return Err(Error::Invalid("pair objectives need a level-2 or higher relaxation".into()));
    }
    let n = p.dim_n;
    let mut m = Model::new(p.sense, meta("1", p.rank_bound, field, false));
    let sym = opts.symmetry.as_ref();
    let forbid = |i: usize, j: usize| sym.is_some_and(|s| !s.conserves(&[i], &[j]));
    let rho = variable(n, field, &[&hermitian], &forbid, &mut m.nparams);
    let minus = C64::new(-1.0, 0.0);
    let mut acc = Acc::default();

    if p.normalized {
        m.equal_zero(rho.trace().re().shifted(-1.0));
    }
    for (i, c) in p.constraints.iter().enumerate() {
        let val = rho.pair(&c.coeff);
        match c.relation {
            Relation::Eq => m.equal_zero(val.re().shifted(-c.target)),
            Relation::Leq => {
                acc.add(&val, minus);
                acc.add_const(C64::new(c.target, 0.0));
                let slack = LinMat { dim: 1, e: vec![acc.take()] };
                let bound = p.normalized.then(|| c.target.abs() + c.coeff.operator_norm());
                m.block(format!("inequality {i}"), slack, bound);
            }
        }
    }
    for (li, l) in p.lmi.iter().enumerate() {
        let vals: Vec<Vec<_>> = l.maps.iter().map(|row| row.iter().map(|mm| rho.pair(mm)).collect()).collect();
        let blk = LinMat::from_fn(l.out_dim(), |a, b| {
            acc.add(&vals[a][b], minus);
            acc.add_const(l.bound.get(a, b));
            acc.take()
        });
        let bound = p.normalized.then(|| {
            (0..l.out_dim()).map(|a| l.bound.get(a, a).re.abs() + l.maps[a][a].operator_norm()).sum::<f64>()
        });
        m.block(format!("matrix inequality {li}"), blk, bound);
    }
    m.objective = rho.pair(&p.objective).re();
    let rb = m.block("state", rho.clone(), p.normalized.then_some(1.0));
    if p.normalized {
        m.identities.push((vec![(rb, 1.0)], 1.0));
    }
    fix_marginal(&mut m, &rho, opts, field);
    Ok(Relaxation { program: m.lower(), field, dim_n: n, layout: Layout::Level1 { rho } })
}
