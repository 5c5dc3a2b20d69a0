//! Level N: an N-party symmetric extension `Φ` on `(ℂⁿ ⊗ ℂᵏ)^{⊗N}`.
//!
//! `Φ` is parameterized so that it is supported on the symmetric subspace
//! (entries are tied under permutations of the parties on either side);
//! over ℝ it is also invariant under the partial transpose of one party,
//! which makes every entry a function of the multiset of its 2N indices.

use super::linmat::{hermitian, variable, Generator, LinMat};
use super::model::Model;
use super::{fix_marginal, extension_constraints, meta, require_normalized, BuildOptions, Layout, Relaxation};
use crate::error::{Error, Result};
use crate::matrix::{kron, symmetric_basis_sparse, Field, FieldMatrix, TensorLayout};
use crate::problem::RankSdp;

/// Largest tensor dimension `(nk)^N` accepted.
pub const TENSOR_BUDGET: usize = 1296;

pub(super) fn build(p: &RankSdp, field: Field, parties: usize, ppt: bool, opts: &BuildOptions) -> Result<Relaxation> {
    require_normalized(p)?;
    let k = p
        .integer_rank()
        .ok_or_else(|| Error::Invalid("level-N relaxations need an integer rank bound".into()))?;
    let n = p.dim_n;
    let d = n * k;
    let total = (0..parties)
        .try_fold(1usize, |acc, _| acc.checked_mul(d).filter(|&t| t <= TENSOR_BUDGET))
        .ok_or_else(|| Error::SizeBudget(format!("({d})^{parties} exceeds {TENSOR_BUDGET}")))?;
    let pow: Vec<usize> = (0..parties).map(|j| d.pow((parties - 1 - j) as u32)).collect();
    let digit = |x: usize, j: usize| (x / pow[j]) % d;
    let set_digit = |x: usize, j: usize, v: usize| x - digit(x, j) * pow[j] + v * pow[j];
    let swap_digits = move |x: usize, i: usize, j: usize| {
        let (a, b) = (digit(x, i), digit(x, j));
        set_digit(set_digit(x, i, b), j, a)
    };
    // exchange the first `s` digits between row and column
    let transpose_leading = move |r: usize, c: usize, s: usize| {
        let (mut r2, mut c2) = (r, c);
        for j in 0..s {
            r2 = set_digit(r2, j, digit(c, j));
            c2 = set_digit(c2, j, digit(r, j));
        }
        (r2, c2)
    };

    let sym = opts.symmetry.as_ref();
    let n_parts = |x: usize| (0..parties).map(|j| digit(x, j) / k).collect::<Vec<_>>();
    let forbid = |r: usize, c: usize| sym.is_some_and(|s| !s.conserves(&n_parts(r), &n_parts(c)));
    let lefts: Vec<Box<dyn Fn(usize, usize) -> (usize, usize, bool)>> = (0..parties - 1)
        .map(|t| Box::new(move |r: usize, c: usize| (swap_digits(r, t, t + 1), c, false)) as Box<_>)
        .collect();
    let rights: Vec<Box<dyn Fn(usize, usize) -> (usize, usize, bool)>> = (0..parties - 1)
        .map(|t| Box::new(move |r: usize, c: usize| (r, swap_digits(c, t, t + 1), false)) as Box<_>)
        .collect();
    let t_first = move |r: usize, c: usize| {
        let (a, b) = transpose_leading(r, c, 1);
        (a, b, false)
    };
    let mut gens: Vec<Generator> = vec![&hermitian];
    gens.extend(lefts.iter().map(|g| g.as_ref() as Generator));
    gens.extend(rights.iter().map(|g| g.as_ref() as Generator));
    if field == Field::Real {
        gens.push(&t_first);
    }

    let real_ppt = field == Field::Real;
    let label = format!("{parties}{}", if opts.compress { "" } else { " (uncompressed)" });
    let mut m = Model::new(p.sense, meta(&label, k as f64, field, ppt || real_ppt));
    if real_ppt && ppt {
        m.meta.notes.push("partial transposes are implied by transpose invariance over the reals".into());
    }
    let phi = variable(total, field, &gens, &forbid, &mut m.nparams);

    let main = if opts.compress { phi.compress(&symmetric_basis_sparse(d, parties)?) } else { phi.clone() };
    let b0 = m.block("symmetric extension", main, Some(1.0));
    m.identities.push((vec![(b0, 1.0)], 1.0));
    if ppt && field == Field::Complex {
        for s in 1..=parties / 2 {
            let blk = phi.permuted(|r, c| transpose_leading(r, c, s));
            let b = m.block(format!("partial transpose on {s} parties"), blk, Some(1.0));
            m.identities.push((vec![(b, 1.0)], 1.0));
        }
    }
    m.equal_zero(phi.trace().re().shifted(-1.0));

    let rest = total / d;
    let rest_basis = symmetric_basis_sparse(d, parties - 1)?;
    let id_k = FieldMatrix::identity(Field::Real, k);
    let side = |o: &FieldMatrix| -> LinMat {
        let lifted = kron(o, &id_k).expect("square operands");
        phi.apply_first(d, rest, &lifted).compress(&rest_basis)
    };
    extension_constraints(&mut m, p, field, &side)?;
    if let Some(o) = &opts.pair_objective {
        let layout = TensorLayout::new(vec![n, k, n, k, total / (d * d)])?;
        m.objective = phi.partial_trace(&layout, &[0, 2]).pair(o).re();
    }
    let rho = phi.partial_trace(&TensorLayout::new(vec![n, total / n])?, &[0]);
    fix_marginal(&mut m, &rho, opts, field);
    Ok(Relaxation { program: m.lower(), field, dim_n: n, layout: Layout::LevelN { rho } })
}
