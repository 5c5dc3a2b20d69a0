//! Reduced level 2. The two-copy extension of a rank-`k` purification is
//! invariant under `U ⊗ U` on the purifying spaces (or `O ⊗ O` over ℝ),
//! so it is determined by a few `n² × n²` coefficient blocks. The rank
//! parameter then enters only as a scalar and may be any real `k ≥ 1`.
//!
//! Over ℂ the blocks are `Φ_I` and `Φ_V = VΦ_I`; over ℝ also
//! `Φ_φ = (VΦ_I)^{T_A}` with `Φ_I` transpose invariant. At `k = 1` the
//! blocks coincide up to scale and one matrix supported on the symmetric
//! subspace remains.

use super::linmat::{hermitian, sym_antisym_bases, variable, LinMat};
use super::model::Model;
use super::{fix_marginal, extension_constraints, meta, require_normalized, BuildOptions, Layout, Relaxation};
use crate::error::Result;
use crate::matrix::{Field, TensorLayout};
use crate::problem::RankSdp;

/// Rank parameters this close to 1 use the collapsed form.
const UNIT_RANK_TOL: f64 = 1e-12;

pub(super) fn build(p: &RankSdp, field: Field, ppt: bool, opts: &BuildOptions) -> Result<Relaxation> {
    require_normalized(p)?;
    let n = p.dim_n;
    let nn = n * n;
    let k = p.rank_bound;
    let swap = |r: usize| (r % n) * n + r / n;
    // ((a,b),(c,d)) ↦ ((c,b),(a,d)): transpose on the first factor
    let pt = |r: usize, c: usize| ((c / n) * n + r % n, (r / n) * n + c % n);
    let sym = opts.symmetry.as_ref();
    let forbid = |r: usize, c: usize| sym.is_some_and(|s| !s.conserves(&[r / n, r % n], &[c / n, c % n]));
    let g_both = |r: usize, c: usize| (swap(r), swap(c), false);
    let g_left = |r: usize, c: usize| (swap(r), c, false);
    let g_right = |r: usize, c: usize| (r, swap(c), false);
    let g_pt = |r: usize, c: usize| {
        let (a, b) = pt(r, c);
        (a, b, false)
    };
    let collapse = (k - 1.0).abs() < UNIT_RANK_TOL;
    let (sym_b, anti_b) = sym_antisym_bases(n);
    let level = if collapse { "2 (reduced, k = 1)" } else { "2 (reduced)" };
    let mut m = Model::new(p.sense, meta(level, k, field, ppt || field == Field::Real));

    let (psi, phi_i, phi_v, phi_phi) = match (field, collapse) {
        (Field::Complex, false) => {
            let phi_i = variable(nn, field, &[&hermitian, &g_both], &forbid, &mut m.nparams);
            let phi_v = phi_i.permuted(|r, c| (swap(r), c));
            let b1 = m.block(
                "symmetric part",
                LinMat::combine(&[(&phi_i, 1.0), (&phi_v, 1.0)]).compress(&sym_b),
                Some(2.0 / (k * (k + 1.0))),
            );
            let mut id = vec![(b1, k * (k + 1.0) / 2.0)];
            if !anti_b.is_empty() {
                let b2 = m.block(
                    "antisymmetric part",
                    LinMat::combine(&[(&phi_i, 1.0), (&phi_v, -1.0)]).compress(&anti_b),
                    Some(2.0 / (k * (k - 1.0))),
                );
                id.push((b2, k * (k - 1.0) / 2.0));
            }
            m.identities.push((id, 1.0));
            if ppt {
                let ti = phi_i.permuted(pt);
                let tv = phi_v.permuted(pt);
                let b3 = m.block("partial transpose", LinMat::combine(&[(&ti, 1.0), (&tv, k)]), Some(1.0));
                let b4 = m.block("partial transpose, identity part", ti, Some(1.0 / (k * k - 1.0)));
                m.identities.push((vec![(b3, 1.0), (b4, k * k - 1.0)], 1.0));
            }
            let psi = LinMat::combine(&[(&phi_i, k * k), (&phi_v, k)]);
            (psi, phi_i, phi_v, None)
        }
        (Field::Complex, true) => {
            let pm = variable(nn, field, &[&hermitian, &g_left, &g_right], &forbid, &mut m.nparams);
            let b1 = m.block("symmetric part", pm.compress(&sym_b), Some(1.0));
            m.identities.push((vec![(b1, 1.0)], 1.0));
            if ppt {
                let b3 = m.block("partial transpose", pm.permuted(pt), Some(1.0));
                m.identities.push((vec![(b3, 1.0)], 1.0));
            }
            let half = pm.scaled(0.5);
            (pm, half.clone(), half, None)
        }
        (Field::Real, false) => {
            let phi_i = variable(nn, field, &[&hermitian, &g_both, &g_pt], &forbid, &mut m.nparams);
            let phi_v = phi_i.permuted(|r, c| (swap(r), c));
            let phi_phi = phi_v.permuted(pt);
            let pair = k * (k + 1.0) / 2.0 - 1.0;
            let b1 = m.block(
                "symmetric part",
                LinMat::combine(&[(&phi_i, 1.0), (&phi_v, 1.0)]).compress(&sym_b),
                Some(1.0 / pair),
            );
            let mut id = vec![(b1, pair)];
            if !anti_b.is_empty() {
                let b2 = m.block(
                    "antisymmetric part",
                    LinMat::combine(&[(&phi_i, 1.0), (&phi_v, -1.0)]).compress(&anti_b),
                    Some(2.0 / (k * (k - 1.0))),
                );
                id.push((b2, k * (k - 1.0) / 2.0));
            }
            let b3 = m.block(
                "symmetric part with transpose term",
                LinMat::combine(&[(&phi_i, 1.0), (&phi_v, 1.0), (&phi_phi, k)]).compress(&sym_b),
                Some(1.0),
            );
            id.push((b3, 1.0));
            m.identities.push((id, 1.0));
            let psi = LinMat::combine(&[(&phi_i, k * k), (&phi_v, k), (&phi_phi, k)]);
            (psi, phi_i, phi_v, Some(phi_phi))
        }
        (Field::Real, true) => {
            let pm = variable(nn, field, &[&hermitian, &g_left, &g_right, &g_pt], &forbid, &mut m.nparams);
            let b1 = m.block("symmetric part", pm.compress(&sym_b), Some(1.0));
            m.identities.push((vec![(b1, 1.0)], 1.0));
            let third = pm.scaled(1.0 / 3.0);
            (pm, third.clone(), third.clone(), Some(third))
        }
    };

    m.equal_zero(psi.trace().re().shifted(-1.0));
    extension_constraints(&mut m, p, field, &|o| psi.apply_first(n, n, o))?;
    if let Some(o) = &opts.pair_objective {
        m.objective = psi.pair(o).re();
    }
    let rho = psi.partial_trace(&TensorLayout::new(vec![n, n])?, &[0]);
    fix_marginal(&mut m, &rho, opts, field);
    Ok(Relaxation { program: m.lower(), field, dim_n: n, layout: Layout::Reduced { k, phi_i, phi_v, phi_phi, rho } })
}
