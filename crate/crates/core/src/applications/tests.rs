use super::*;
use crate::matrix::{Field, FieldMatrix, C64};
use crate::oracles::{sample_pure_states, SampleConfig};
use crate::problem::{PairKind, PairTerm, QuadraticObjective};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn maxcut_small_graphs() {
    let l1 = LevelSpec::level1();
    let l2 = LevelSpec::reduced();
    let k2 = maxcut_bound(&Graph::complete(2), &l2, &cfg()).unwrap();
    assert!(close(k2.value, 1.0, 1e-6));
    let k3 = Graph::complete(3);
    assert!(close(maxcut_bound(&k3, &l2, &cfg()).unwrap().value, 2.0, 1e-6));
    assert!(close(maxcut_bound(&k3, &l1, &cfg()).unwrap().value, 2.25, 1e-6));
    let c5 = Graph::cycle(5);
    let b1 = maxcut_bound(&c5, &l1, &cfg()).unwrap();
    let b2 = maxcut_bound(&c5, &l2, &cfg()).unwrap();
    assert_eq!(maxcut_bruteforce(&c5).unwrap(), 4);
    assert!(close(b2.value, 4.0, 1e-6), "{}", b2.value);
    // 5/8·(5 + √5)·... the Goemans–Williamson value of C₅ is 25/8 + 25√5/40
    assert!(close(b1.value, 25.0 / 8.0 + 25.0 * 5f64.sqrt() / 40.0, 1e-6), "{}", b1.value);
    assert!(b1.certified.unwrap() >= b1.value - 1e-9);
}

#[test]
fn maxcut_bruteforce_values() {
    assert_eq!(maxcut_bruteforce(&Graph::empty(4)).unwrap(), 0);
    assert_eq!(maxcut_bruteforce(&Graph::complete(4)).unwrap(), 4);
    assert_eq!(maxcut_bruteforce(&Graph::complete(1)).unwrap(), 0);
    assert!(maxcut_bruteforce(&Graph::empty(25)).is_err());
}

#[test]
fn pseudo_boolean_trivial_instances() {
    let l2 = LevelSpec::reduced();
    let m = 3;
    let zero = FieldMatrix::zeros(Field::Real, m, m);
    let b = pseudo_boolean_bound(&zero, &[1.0, 0.0, 0.0], &l2, Sense::Max, &cfg()).unwrap();
    assert!(close(b.value, 1.0, 1e-6));
    let minus = FieldMatrix::identity(Field::Real, m).scale(-1.0);
    let b = pseudo_boolean_bound(&minus, &[0.0; 3], &l2, Sense::Max, &cfg()).unwrap();
    assert!(close(b.value, -(m as f64), 1e-6));
}

#[test]
fn pseudo_boolean_sandwich_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..4 {
        let m = 6;
        let q = FieldMatrix::real_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
        let c: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact = pseudo_boolean_bruteforce(&q, &c, Sense::Max).unwrap().value;
        let b1 = pseudo_boolean_bound(&q, &c, &LevelSpec::level1(), Sense::Max, &cfg()).unwrap();
        let b2 = pseudo_boolean_bound(&q, &c, &LevelSpec::reduced(), Sense::Max, &cfg()).unwrap();
        assert!(exact <= b2.best() + 1e-6 && b2.value <= b1.best() + 1e-6, "{exact} {} {}", b2.value, b1.value);
    }
}

#[test]
fn least_squares_trivial_instances() {
    let a = FieldMatrix::identity(Field::Real, 2);
    let r = boolean_least_squares(&a, &[1.0, 1.0], &LevelSpec::reduced(), &cfg()).unwrap();
    assert!(close(r.bound.value, 0.0, 1e-6));
    assert_eq!(r.rounded, vec![1, 1]);
    assert!(close(r.rounded_value, 0.0, 1e-12));
    let r = boolean_least_squares(&a, &[0.0, 0.0], &LevelSpec::reduced(), &cfg()).unwrap();
    assert!(close(r.bound.value, 2.0, 1e-6));
    assert!(close(r.rounded_value, 2.0, 1e-12));
}

#[test]
fn least_squares_bounds_bracket_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (m, d) = (5, 4);
    let a = FieldMatrix::real_fn(m, d, |_, _| rng.random_range(-1.0..1.0));
    let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let exact = boolean::least_squares_bruteforce(&a, &b).unwrap().value;
    let r = boolean_least_squares(&a, &b, &LevelSpec::reduced(), &cfg()).unwrap();
    assert!(r.bound.best() <= exact + 1e-6);
    assert!(r.rounded_value >= exact - 1e-9);
}

#[test]
fn orthonormal_representations_of_small_graphs() {
    // three mutually orthogonal vectors do not fit in one dimension
    let k3 = Graph::empty(3);
    let r = orthonormal_rep_check(&k3, 1, Field::Real, &cfg()).unwrap();
    assert_eq!(r.verdict, Exclusion::ExcludedAtLevel2, "{r:?}");
    for field in [Field::Real, Field::Complex] {
        let r = orthonormal_rep_check(&Graph::cycle(5), 5, field, &cfg()).unwrap();
        assert_eq!(r.verdict, Exclusion::Inconclusive, "{r:?}");
        assert!(r.margin.margin >= -1e-8);
    }
    assert!(orthonormal_rep_check(&k3, 4, Field::Real, &cfg()).is_err());
}

#[test]
fn theta_of_standard_graphs() {
    for n in [2, 4] {
        assert!(close(lovasz_theta(&Graph::complete(n), &cfg()).unwrap().value, 1.0, 1e-6));
    }
    assert!(close(lovasz_theta(&Graph::empty(3), &cfg()).unwrap().value, 3.0, 1e-6));
    assert!(close(lovasz_theta(&Graph::cycle(5), &cfg()).unwrap().value, 5f64.sqrt(), 1e-6));
}

fn phi_plus(n: usize) -> FieldMatrix {
    crate::matrix::max_entangled_projector(n).to_complex()
}

#[test]
fn maximally_entangled_state_is_not_certified_unfaithful() {
    let v = unfaithfulness_check(&phi_plus(2), &cfg(), Some(&SampleConfig { n_starts: 4, ..Default::default() })).unwrap();
    assert_eq!(v.verdict, Verdict::Inconclusive);
    assert!(close(v.bound.value, 1.0, 1e-6));
    assert!(close(v.lower_bound.unwrap(), 1.0, 1e-8));
}

#[test]
fn maximally_mixed_state_is_unfaithful() {
    let n = 3;
    let rho = FieldMatrix::identity(Field::Complex, n * n).scale(1.0 / (n * n) as f64);
    let v = unfaithfulness_check(&rho, &cfg(), None).unwrap();
    assert!(close(v.bound.value, 1.0 / 9.0, 1e-6));
    assert_eq!(v.verdict, Verdict::Unfaithful);
    assert!(unfaithfulness_check(&FieldMatrix::identity(Field::Complex, 5).scale(0.2), &cfg(), None).is_err());
}

fn kraus_unitary(u: FieldMatrix) -> Vec<FieldMatrix> {
    vec![u]
}

fn pauli() -> [FieldMatrix; 4] {
    let c = |re: f64, im: f64| C64::new(re, im);
    let m = |v: [C64; 4]| FieldMatrix::from_complex(2, 2, v.to_vec()).unwrap();
    [
        FieldMatrix::identity(Field::Complex, 2),
        m([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        m([c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        m([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    ]
}

#[test]
fn unitary_and_pauli_channels_are_not_excluded() {
    let id = choi_state(&kraus_unitary(FieldMatrix::identity(Field::Complex, 2))).unwrap();
    assert!(id.distance(&phi_plus(2)) < 1e-12);
    assert_eq!(mixed_unitary_check(&id, &cfg()).unwrap().verdict, Exclusion::Inconclusive);
    let depol: Vec<FieldMatrix> = pauli().iter().map(|p| p.scale(0.5)).collect();
    let j = choi_state(&depol).unwrap();
    assert!(j.distance(&FieldMatrix::identity(Field::Complex, 4).scale(0.25)) < 1e-12);
    assert_eq!(mixed_unitary_check(&j, &cfg()).unwrap().verdict, Exclusion::Inconclusive);
}

fn amplitude_damping(gamma: f64) -> Vec<FieldMatrix> {
    vec![
        FieldMatrix::real_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (1, 1) => (1.0 - gamma).sqrt(),
            _ => 0.0,
        }),
        FieldMatrix::real_fn(2, 2, |i, j| if (i, j) == (0, 1) { gamma.sqrt() } else { 0.0 }),
    ]
}

#[test]
fn amplitude_damping_is_not_mixed_unitary() {
    let j = choi_state(&amplitude_damping(0.3)).unwrap();
    let r = mixed_unitary_check(&j, &cfg()).unwrap();
    assert_eq!(r.verdict, Exclusion::ExcludedAtLevel2, "{r:?}");
    // invalid Choi matrices are rejected
    assert!(mixed_unitary_check(&FieldMatrix::identity(Field::Complex, 4), &cfg()).is_err());
    assert!(choi_state(&[FieldMatrix::identity(Field::Complex, 2).scale(0.5)]).is_err());
}

fn sigma(i: usize) -> FieldMatrix {
    pauli()[i].clone()
}

#[test]
fn pure_state_without_data_is_top_eigenvalue() {
    let x = FieldMatrix::real_fn(3, 3, |i, j| (i + j) as f64 - if i == j { 2.0 } else { 0.0 });
    let b = pure_state_opt(&x, &[], &LevelSpec::reduced(), &cfg()).unwrap();
    assert!(close(b.value, x.max_eigenvalue(), 1e-6));
}

#[test]
fn pure_state_fixed_by_complete_data() {
    // ⟨σ_x⟩ = ⟨σ_y⟩ = 0, ⟨σ_z⟩ = 1 fixes |0⟩
    let data = vec![(sigma(1), 0.0), (sigma(2), 0.0), (sigma(3), 1.0)];
    let x = FieldMatrix::diag_real(&[0.3, -0.7]);
    let b = pure_state_opt(&x, &data, &LevelSpec::reduced(), &cfg()).unwrap();
    assert!(close(b.value, 0.3, 1e-6));
    let bad = vec![(sigma(3), 1.5)];
    let b = pure_state_opt(&x, &bad, &LevelSpec::reduced(), &cfg()).unwrap();
    assert_eq!(b.status, Status::Infeasible);
}

#[test]
fn pure_state_bound_meets_sampling_on_a_qutrit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let herm = |rng: &mut ChaCha8Rng| {
        FieldMatrix::from_fn(Field::Complex, 3, 3, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .hermitian_part()
    };
    let x = herm(&mut rng);
    let ms = [herm(&mut rng), herm(&mut rng)];
    let psi: Vec<C64> = (0..3).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let psi: Vec<C64> = psi.iter().map(|v| v / norm).collect();
    let data: Vec<(FieldMatrix, f64)> = ms.iter().map(|m| (m.clone(), m.quad_form(&psi))).collect();
    let b = pure_state_opt(&x, &data, &LevelSpec::reduced(), &cfg()).unwrap();
    let mut p = RankSdp::new(Field::Complex, x, Sense::Max).unwrap();
    for (m, v) in &data {
        p.push(crate::problem::LinearFunctional::eq(m.clone(), *v)).unwrap();
    }
    let s = sample_pure_states(&p, &SampleConfig { seed: 1, ..Default::default() }).unwrap();
    assert!(s.value <= b.best() + 1e-6);
    assert!(close(s.value, b.value, 1e-4), "{} {}", s.value, b.value);
}

fn purity() -> QuadraticObjective {
    let id = FieldMatrix::identity(Field::Complex, 2);
    QuadraticObjective { terms: vec![PairTerm { x: id.clone(), y: id, kind: PairKind::Sandwich, weight: 1.0 }] }
}

#[test]
fn quadratic_objectives() {
    let base = RankSdp::new(Field::Complex, FieldMatrix::zeros(Field::Complex, 2, 2), Sense::Max).unwrap().with_rank_bound(2.0).unwrap();
    let b = quadratic_opt(&purity(), &base, &LevelSpec::reduced(), &cfg()).unwrap();
    assert!(close(b.value, 1.0, 1e-6));
    let mut constrained = base.clone();
    constrained.push(crate::problem::LinearFunctional::eq(sigma(3), 0.0)).unwrap();
    let b = quadratic_opt(&purity(), &constrained, &LevelSpec::reduced(), &cfg()).unwrap();
    assert!(close(b.value, 1.0, 1e-6));

    // variance of σ_z when ⟨σ_x⟩ = 1 forces |+⟩
    let z = sigma(3);
    let id = FieldMatrix::identity(Field::Complex, 2);
    let variance = QuadraticObjective {
        terms: vec![
            PairTerm { x: z.matmul(&z).unwrap(), y: id, kind: PairKind::ProductOfTraces, weight: 1.0 },
            PairTerm { x: z.clone(), y: z, kind: PairKind::ProductOfTraces, weight: -1.0 },
        ],
    };
    let mut plus = RankSdp::new(Field::Complex, FieldMatrix::zeros(Field::Complex, 2, 2), Sense::Min).unwrap();
    plus.push(crate::problem::LinearFunctional::eq(sigma(1), 1.0)).unwrap();
    let b = quadratic_opt(&variance, &plus, &LevelSpec::reduced(), &cfg()).unwrap();
    assert!(close(b.value, 1.0, 1e-6), "{}", b.value);
    assert!(quadratic_opt(&purity(), &base, &LevelSpec::level1(), &cfg()).is_err());
}
