//! Property tests for the structural invariants of each layer.

use proptest::prelude::*;
use rankhier::applications::{
    lovasz_theta, maxcut_bound, maxcut_bruteforce, maxcut_problem, orthonormal_rep_check, pseudo_boolean_bound,
    pseudo_boolean_bruteforce, Exclusion, Graph,
};
use rankhier::conic::ConicProgram;
use rankhier::hierarchy::{build, rank_parameter_sweep, BuildOptions, LevelSpec, MONOTONE_TOL};
use rankhier::matrix::{
    hermitian_to_real_embed, partial_trace, partial_transpose, swap_operator, symmetric_projector, symmetric_subspace_dim, Field,
    FieldMatrix, TensorLayout, C64,
};
use rankhier::oracles::{sample_pure_states, SampleConfig};
use rankhier::problem::{lift_quadratic, LinearFunctional, PairKind, PairTerm, QuadraticObjective, RankSdp, Sense};
use rankhier::solver::{solve, SolverConfig, Status};

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn complex_matrix(n: usize) -> impl Strategy<Value = FieldMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| FieldMatrix::from_complex(n, n, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

fn hermitian(n: usize) -> impl Strategy<Value = FieldMatrix> {
    complex_matrix(n).prop_map(|m| m.hermitian_part())
}

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
            Graph::new(n, pairs.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e)).unwrap()
        })
    })
}

fn layout_and_matrix() -> impl Strategy<Value = (Vec<usize>, FieldMatrix)> {
    prop::collection::vec(1usize..=3, 2..=3).prop_flat_map(|dims| {
        let total = dims.iter().product();
        (Just(dims), complex_matrix(total))
    })
}

/// Proper colouring of the complement, giving an orthonormal
/// representation (one basis vector per colour) of the graph.
fn complement_colours(g: &Graph) -> usize {
    let n = g.n_vertices();
    let mut colour = vec![usize::MAX; n];
    for v in 0..n {
        let used: Vec<usize> = (0..v).filter(|&u| !g.has_edge(u, v)).map(|u| colour[u]).collect();
        colour[v] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    colour.iter().max().map_or(0, |c| c + 1)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn partial_trace_preserves_the_trace((dims, m) in layout_and_matrix(), keep_mask in 0usize..8) {
        let layout = TensorLayout::new(dims.clone()).unwrap();
        let keep: Vec<usize> = (0..dims.len()).filter(|i| keep_mask >> i & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let t = partial_trace(&m, &layout, &keep).unwrap();
        let (a, b) = (t.trace(), m.trace());
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
    }

    #[test]
    fn partial_transpose_is_an_involution((dims, m) in layout_and_matrix(), mask in 0usize..8) {
        let layout = TensorLayout::new(dims.clone()).unwrap();
        let parts: Vec<usize> = (0..dims.len()).filter(|i| mask >> i & 1 == 1).collect();
        let twice = partial_transpose(&partial_transpose(&m, &layout, &parts).unwrap(), &layout, &parts).unwrap();
        prop_assert_eq!(twice.distance(&m), 0.0);
    }

    #[test]
    fn symmetric_projectors_are_orthogonal_projectors(d in 1usize..=4, n in 1usize..=3) {
        let p = symmetric_projector(d, n).unwrap();
        prop_assert!(p.matmul(&p).unwrap().distance(&p) <= 1e-12);
        prop_assert!(p.transpose().distance(&p) <= 1e-12);
        prop_assert_eq!(p.trace().re.round() as usize, symmetric_subspace_dim(d, n));
    }

    #[test]
    fn swap_squares_to_identity(d in 1usize..=5) {
        let v = swap_operator(d);
        prop_assert_eq!(v.matmul(&v).unwrap().distance(&FieldMatrix::identity(Field::Real, d * d)), 0.0);
    }

    #[test]
    fn real_embedding_preserves_the_spectrum_floor(h in hermitian(3)) {
        let e = hermitian_to_real_embed(&h).unwrap();
        prop_assert!(e.min_eigenvalue() >= h.min_eigenvalue() - 1e-10);
    }

    #[test]
    fn quadratic_lift_is_linear(x in hermitian(2), y in hermitian(2), w1 in -2.0f64..2.0, w2 in -2.0f64..2.0) {
        let base = RankSdp::new(Field::Complex, FieldMatrix::zeros(Field::Complex, 2, 2), Sense::Max).unwrap();
        let term = |x: &FieldMatrix, y: &FieldMatrix, kind, weight| PairTerm { x: x.clone(), y: y.clone(), kind, weight };
        let t1 = term(&x, &y, PairKind::Sandwich, 1.0);
        let t2 = term(&y, &x, PairKind::ProductOfTraces, 1.0);
        let single = |t: PairTerm| lift_quadratic(&QuadraticObjective { terms: vec![t] }, &base).unwrap();
        let both = lift_quadratic(
            &QuadraticObjective { terms: vec![term(&x, &y, PairKind::Sandwich, w1), term(&y, &x, PairKind::ProductOfTraces, w2)] },
            &base,
        )
        .unwrap();
        let sum = single(t1).scale(w1).try_add(&single(t2).scale(w2)).unwrap();
        prop_assert!(both.distance(&sum) <= 1e-12);
        prop_assert!(both.is_hermitian());
    }

    #[test]
    fn graph6_round_trips(g in graph(62)) {
        let s = g.to_graph6().unwrap();
        let back = Graph::parse_graph6(&s).unwrap();
        prop_assert_eq!(back.to_graph6().unwrap(), s);
        prop_assert_eq!(back, g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn maxcut_sandwich(g in graph(7)) {
        let brute = maxcut_bruteforce(&g).unwrap() as f64;
        let l1 = maxcut_bound(&g, &LevelSpec::level1(), &cfg()).unwrap();
        let l2 = maxcut_bound(&g, &LevelSpec::reduced(), &cfg()).unwrap();
        prop_assert!(brute <= l2.value + 1e-6 && l2.value <= l1.value + 1e-6, "{} {} {}", brute, l2.value, l1.value);
        prop_assert!(l2.certified.unwrap() >= brute - 1e-9);
    }

    #[test]
    fn pseudo_boolean_sandwich(q in prop::collection::vec(-1.0f64..1.0, 16), c in prop::collection::vec(-1.0f64..1.0, 4)) {
        let q = FieldMatrix::from_real(4, 4, &q).unwrap();
        let exact = pseudo_boolean_bruteforce(&q, &c, Sense::Max).unwrap().value;
        let l1 = pseudo_boolean_bound(&q, &c, &LevelSpec::level1(), Sense::Max, &cfg()).unwrap();
        let l2 = pseudo_boolean_bound(&q, &c, &LevelSpec::reduced(), Sense::Max, &cfg()).unwrap();
        prop_assert!(exact <= l2.value + 1e-6 && l2.value <= l1.value + 1e-6);
        prop_assert!(l1.certified.unwrap() >= exact - 1e-9 && l2.certified.unwrap() >= exact - 1e-9);
    }

    #[test]
    fn weak_duality_and_json_stability(g in graph(6)) {
        let p = maxcut_problem(&g).unwrap();
        for spec in [LevelSpec::level1(), LevelSpec::reduced()] {
            let cp = build(&p, &spec, &BuildOptions::default()).unwrap().program;
            let sol = solve(&cp, &cfg()).unwrap();
            prop_assert_eq!(sol.status, Status::Optimal);
            // raw iterates agree to the feasibility tolerance; the certified
            // bound dominates the solver value exactly
            prop_assert!(sol.dual_value + cfg().feas_tol >= sol.primal_value, "{} < {}", sol.dual_value, sol.primal_value);
            prop_assert!(sol.certified_bound.unwrap() + 1e-9 >= sol.primal_value);
            let again = solve(&ConicProgram::from_json(&cp.to_json().unwrap()).unwrap(), &cfg()).unwrap();
            prop_assert!((again.primal_value - sol.primal_value).abs() <= 1e-9);
            prop_assert_eq!(solve(&cp, &cfg()).unwrap(), sol);
        }
    }

    #[test]
    fn rank_parameter_is_monotone(g in graph(5)) {
        let p = maxcut_problem(&g).unwrap();
        let n = g.n_vertices() as f64;
        let ks: Vec<f64> = [1.0, 1.5, 2.0, 3.0].into_iter().filter(|&k| k <= n).collect();
        let pts = rank_parameter_sweep(&p, &ks, &LevelSpec::reduced(), &BuildOptions::default(), &cfg()).unwrap();
        for w in pts.windows(2) {
            prop_assert!(w[1].value.unwrap() >= w[0].value.unwrap() - MONOTONE_TOL);
        }
    }

    #[test]
    fn representation_exclusion_is_monotone_in_k(g in graph(5)) {
        let n = g.n_vertices();
        let mut excluded_above = false;
        for k in (1..=n).rev() {
            let r = orthonormal_rep_check(&g, k, Field::Real, &cfg()).unwrap();
            let excluded = r.verdict == Exclusion::ExcludedAtLevel2;
            prop_assert!(!excluded_above || excluded, "excluded at k+1 but not at k={}", k);
            excluded_above = excluded;
        }
    }

    #[test]
    fn theta_is_below_any_explicit_representation(g in graph(6)) {
        let theta = lovasz_theta(&g, &cfg()).unwrap();
        prop_assert!(theta.value <= complement_colours(&g) as f64 + 1e-6);
    }

    #[test]
    fn sampled_pure_states_stay_below_the_hierarchy(x in hermitian(3), m in hermitian(3), seed in 0u64..1000) {
        let target = m.eigenvalues().iter().sum::<f64>() / 3.0;
        let p = RankSdp::new(Field::Complex, x, Sense::Max).unwrap().with_constraint(LinearFunctional::eq(m, target)).unwrap();
        let sc = SampleConfig { n_starts: 8, seed, ..Default::default() };
        let s = sample_pure_states(&p, &sc).unwrap();
        prop_assert_eq!(&sample_pure_states(&p, &sc).unwrap(), &s);
        let sol = build(&p, &LevelSpec::reduced(), &BuildOptions::default()).unwrap().solve(&cfg()).unwrap();
        if s.found() {
            prop_assert!(s.value <= sol.primal_value + 1e-6, "{} > {}", s.value, sol.primal_value);
        }
    }
}
