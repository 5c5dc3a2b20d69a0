//! Published reference values that are cheap enough for every test run.

use rankhier::applications::{fidelity_fixture_state, fidelity_state, unfaithfulness_bound, unfaithfulness_check, Verdict};
use rankhier::hierarchy::LevelSpec;
use rankhier::matrix::C64;
use rankhier::oracles::SampleConfig;
use rankhier::solver::SolverConfig;

#[test]
fn fidelity_fixture_bound_meets_sampling() {
    let v = unfaithfulness_check(&fidelity_fixture_state(), &SolverConfig::default(), Some(&SampleConfig { n_starts: 16, ..Default::default() }))
        .unwrap();
    assert_eq!(v.verdict, Verdict::Unfaithful);
    assert!((v.xi2t - 0.24888).abs() <= 5e-4, "{}", v.xi2t);
    let lower = v.lower_bound.unwrap();
    assert!(lower <= v.xi2t + 1e-6 && v.xi2t - lower <= 5e-4, "{lower} vs {}", v.xi2t);
}

#[test]
fn printed_phase_gives_a_faithful_state() {
    // with β = (1 + i)/√2 the state overlaps φ⁺ above 1/4, so no bound can
    // certify it
    let beta = C64::new(1.0, 1.0) / 2f64.sqrt();
    let b = unfaithfulness_bound(&fidelity_state(23.0 / 40.0, beta), &LevelSpec::level1(), &SolverConfig::default()).unwrap();
    assert!(b.value > 0.25, "{}", b.value);
}
