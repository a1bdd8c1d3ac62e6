use qrelay::entropy::{relay_rates, EntropyContext};
use qrelay::relay::{
    run_relay, verify_against_rates, Factor, RelayConfig, RelayError, RelayInput, RelayMode, RelayResult,
    StructuredState,
};
use qrelay::resource::{Party, Resource};
use qrelay::states::ghz_abr;

fn pairs() -> StructuredState {
    StructuredState::phi_plus_pairs(&[("A", "R", 2), ("A", "C", 2)]).unwrap()
}

fn basis(register: &str) -> Factor {
    Factor::Basis { register: register.into(), dim: 2, value: 0 }
}

fn phi(left: &str, right: &str) -> Factor {
    Factor::PhiPlus { left: left.into(), right: right.into(), dim: 2 }
}

fn exact(s: &StructuredState, cfg: RelayConfig) -> Result<Vec<RelayResult>, RelayError> {
    run_relay(&RelayInput::Structured(s.clone()), &cfg)
}

fn cfg(ac: u32, cb: u32, pre: u32) -> RelayConfig {
    RelayConfig { qubits_ac: ac, qubits_cb: cb, preshared_cb_ebits: pre, ..Default::default() }
}

fn assert_exact(r: &RelayResult) {
    assert!((r.fidelity_final - 1.0).abs() < 1e-9, "final {}", r.fidelity_final);
    assert!(r.catalyst_deviation <= 1e-9, "catalyst {}", r.catalyst_deviation);
    for f in r.per_step_fidelities {
        assert!((f - 1.0).abs() < 1e-9, "{:?}", r.per_step_fidelities);
    }
}

#[test]
fn split_pairs_relay_is_exact_at_unit_rates() {
    let s = pairs();
    let results = exact(&s, cfg(1, 1, 1)).unwrap();
    let r = &results[0];
    assert_exact(r);
    assert!(r.step2_equivalence >= 1.0 - 1e-9);
    let l = &r.ledger;
    assert_eq!(l.total(Resource::QubitChannel, Party::Alice, Party::Charlie), 1.0);
    assert_eq!(l.total(Resource::Ebit, Party::Alice, Party::Charlie), -1.0);
    assert_eq!(l.total(Resource::QubitChannel, Party::Charlie, Party::Bob), 1.0);
    assert_eq!(l.total(Resource::Ebit, Party::Charlie, Party::Bob), 1.0);
    assert_eq!((r.ebits_consumed, r.ebits_produced), (1.0, 1.0));

    let ctx = EntropyContext::new(s.state().unwrap()).unwrap();
    let report = verify_against_rates(&results, &ctx);
    assert_eq!(report.passed(), Some(true));
    assert!(report.residual() < 1e-12);
    for x in relay_rates(&ctx).relay_quadruple().unwrap() {
        assert!((x - 1.0).abs() < 1e-9);
    }
}

#[test]
fn alice_charlie_pair_only_consumes_one_ebit() {
    let s = StructuredState::new(vec![phi("A", "C"), basis("B"), basis("R")]).unwrap();
    let r = &exact(&s, cfg(0, 0, 1)).unwrap()[0];
    assert_exact(r);
    assert_eq!(r.ebits_consumed, 1.0);
    assert_eq!(r.qubits_ac() + r.qubits_cb(), 0.0);
}

#[test]
fn alice_reference_pair_touches_no_ebits() {
    let s = StructuredState::new(vec![phi("A", "R"), basis("B"), basis("C")]).unwrap();
    let results = exact(&s, cfg(1, 1, 0)).unwrap();
    let r = &results[0];
    assert_exact(r);
    assert_eq!((r.ebits_consumed, r.ebits_produced), (0.0, 0.0));
    assert!(r.ledger.tallies().all(|(k, _, v)| k.resource != Resource::Ebit || v == 0.0));
    let ctx = EntropyContext::new(s.state().unwrap()).unwrap();
    assert_eq!(verify_against_rates(&results, &ctx).passed(), Some(true));
}

#[test]
fn null_c_reduces_to_coherent_merging() {
    // A shares one pair with R and one with B; C is absent.
    let s = StructuredState::new(vec![phi("A", "R"), phi("B", "A")]).unwrap();
    let results = exact(&s, cfg(2, 1, 0)).unwrap();
    assert_exact(&results[0]);
    let ctx = EntropyContext::new(s.state().unwrap()).unwrap();
    let report = verify_against_rates(&results, &ctx);
    let labels: Vec<&str> = report.trials[0].comparisons.iter().map(|c| c.label.as_str()).collect();
    assert!(labels.contains(&"coherent qubits") && labels.contains(&"coherent ebits"));
    assert_eq!(report.passed(), Some(true));
    assert_eq!(results[0].ebits_produced, 1.0);
}

#[test]
fn basis_bits_of_a_are_rebuilt_at_bob() {
    let s = StructuredState::new(vec![phi("A", "R"), basis("A"), phi("A", "C")]).unwrap();
    let results = exact(&s, cfg(1, 1, 1)).unwrap();
    assert_exact(&results[0]);
}

#[test]
fn several_copies_stay_exact() {
    let s = pairs();
    let results = exact(&s, RelayConfig { copies: 2, ..cfg(2, 2, 2) }).unwrap();
    assert_exact(&results[0]);
    let ctx = EntropyContext::new(s.state().unwrap()).unwrap();
    assert_eq!(verify_against_rates(&results, &ctx).passed(), Some(true));
}

#[test]
fn one_qubit_short_to_bob_loses_fidelity() {
    let s = pairs();
    let full = exact(&s, cfg(1, 1, 1)).unwrap()[0].fidelity_final;
    let short = exact(&s, cfg(1, 0, 1)).unwrap()[0].fidelity_final;
    assert!(full - short >= 0.05, "{full} vs {short}");
    assert!((short - 0.5).abs() < 1e-9);
}

#[test]
fn spare_preshared_ebits_are_untouched() {
    let r = &exact(&pairs(), cfg(1, 1, 3)).unwrap()[0];
    assert_exact(r);
    assert_eq!(r.ebits_consumed, 1.0);
}

#[test]
fn errors() {
    let s = pairs();
    assert!(matches!(
        exact(&s, cfg(1, 1, 0)),
        Err(RelayError::InsufficientPreshared { needed: 1, available: 0 })
    ));
    assert!(matches!(
        run_relay(&RelayInput::State(ghz_abr()), &cfg(1, 1, 1)),
        Err(RelayError::StructureRequired)
    ));
    let odd = StructuredState::phi_plus_pairs(&[("A", "R", 3)]).unwrap();
    assert!(matches!(exact(&odd, cfg(1, 1, 0)), Err(RelayError::Structure(_))));
    assert!(exact(&s, cfg(3, 1, 1)).is_err());
}

#[test]
fn approximate_mode_reports_without_asserting() {
    let c = RelayConfig { mode: RelayMode::Approximate, trials: 3, seed: 9, ..cfg(1, 1, 0) };
    let results = run_relay(&RelayInput::State(ghz_abr()), &c).unwrap();
    assert_eq!(results.len(), 3);
    for r in &results {
        assert!((0.0..=1.0).contains(&r.fidelity_final));
        assert!(r.catalyst_deviation <= 1e-9);
    }
    let report = verify_against_rates(&results, &EntropyContext::new(ghz_abr()).unwrap());
    assert_eq!(report.passed(), None);
    assert!(report.residual().is_finite());
    assert_eq!(results, run_relay(&RelayInput::State(ghz_abr()), &c).unwrap());
}

#[test]
fn approximate_mode_on_pairs_sending_everything() {
    let c = RelayConfig { mode: RelayMode::Approximate, trials: 2, seed: 1, ..cfg(2, 2, 0) };
    for r in run_relay(&RelayInput::Structured(pairs()), &c).unwrap() {
        assert!((r.fidelity_final - 1.0).abs() < 1e-9);
    }
}
