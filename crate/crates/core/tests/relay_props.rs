use proptest::prelude::*;

use qrelay::entropy::EntropyContext;
use qrelay::relay::{
    run_relay, verify_against_rates, Factor, GlobalState, Holder, QubitRole, RelayConfig, RelayError, RelayInput,
    StructuredState, PARTY_REGISTERS,
};
use qrelay::resource::Party;

fn factor() -> impl Strategy<Value = Factor> {
    let pair = (0usize..4, 1usize..4, prop::sample::select(vec![2usize, 2, 4])).prop_map(|(l, shift, dim)| {
        Factor::PhiPlus { left: PARTY_REGISTERS[l].into(), right: PARTY_REGISTERS[(l + shift) % 4].into(), dim }
    });
    let basis = (0usize..4, prop::sample::select(vec![1usize, 2, 4]), any::<prop::sample::Index>()).prop_map(
        |(r, dim, v)| Factor::Basis { register: PARTY_REGISTERS[r].into(), dim, value: v.index(dim) },
    );
    prop_oneof![3 => pair, 1 => basis]
}

fn structured() -> impl Strategy<Value = StructuredState> {
    prop::collection::vec(factor(), 1..=3).prop_map(|f| StructuredState::new(f).unwrap())
}

/// Structured states whose relay run, with the copy of `A` and the
/// pre-shared ebits it adds, stays well under the amplitude cap.
fn small_structured() -> impl Strategy<Value = StructuredState> {
    structured().prop_filter("relay state too large", |s| {
        let psi = s.state().unwrap();
        let a = psi.layout().dim_of("A").unwrap();
        let shared = 1usize << (2 * required(s).preshared_cb_ebits);
        psi.layout().total_dim() * a * shared <= 1 << 18
    })
}

/// Resource levels at which the relay should be exact: Alice sends
/// Charlie every qubit whose partner he lacks, keeps the ones paired with
/// him (one pre-shared ebit each), and Charlie forwards the reference part.
fn required(s: &StructuredState) -> RelayConfig {
    let roles = s.a_qubit_roles().unwrap();
    let count = |p: &str| roles.iter().filter(|r| matches!(r, QubitRole::Paired(x) if x == p)).count() as u32;
    RelayConfig {
        qubits_ac: count("R") + count("B"),
        qubits_cb: count("R"),
        preshared_cb_ebits: count("C"),
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_at_required_levels(s in small_structured()) {
        let cfg = required(&s);
        let results = run_relay(&RelayInput::Structured(s.clone()), &cfg).unwrap();
        let r = &results[0];
        prop_assert!((r.fidelity_final - 1.0).abs() <= 1e-9, "{:?} final {}", cfg, r.fidelity_final);
        prop_assert!(r.catalyst_deviation <= 1e-9, "catalyst {}", r.catalyst_deviation);
        prop_assert!(r.step2_equivalence >= 1.0 - 1e-9, "step 2 {}", r.step2_equivalence);
        prop_assert_eq!(r.ebits_consumed, cfg.preshared_cb_ebits as f64);
        let ctx = EntropyContext::new(s.state().unwrap()).unwrap();
        let report = verify_against_rates(&results, &ctx);
        prop_assert_eq!(report.passed(), Some(true), "{:?}", report);
    }

    #[test]
    fn too_few_preshared_ebits_is_an_error(s in structured()) {
        let cfg = required(&s);
        prop_assume!(cfg.preshared_cb_ebits > 0);
        let short = RelayConfig { preshared_cb_ebits: cfg.preshared_cb_ebits - 1, ..cfg };
        let is_short = matches!(
            run_relay(&RelayInput::Structured(s), &short),
            Err(RelayError::InsufficientPreshared { .. })
        );
        prop_assert!(is_short);
    }

    #[test]
    fn sending_moves_ownership_and_costs_log_dim(s in structured(), order in Just(PARTY_REGISTERS).prop_shuffle()) {
        let state = s.state().unwrap();
        let holder = |r: &str| match r {
            "A" => Holder::Party(Party::Alice),
            "B" => Party::Bob.into(),
            "C" => Party::Charlie.into(),
            _ => Holder::Reference,
        };
        let mut g = GlobalState::new(state.clone(), PARTY_REGISTERS.map(|r| (r.to_string(), holder(r)))).unwrap();
        let mut cost = 0.0;
        for r in order.iter().filter(|r| **r != "R") {
            let Holder::Party(from) = g.owner(r).unwrap() else { unreachable!() };
            let to = if from == Party::Bob { Party::Alice } else { Party::Bob };
            prop_assert!(g.send(r, to, from).is_err() || to == from);
            let q = g.send(r, from, to).unwrap();
            prop_assert_eq!(q, (state.layout().dim_of(r).unwrap() as f64).log2());
            prop_assert_eq!(g.owner(r), Some(Holder::Party(to)));
            cost += q;
        }
        g.audit().unwrap();
        let held: usize = [Party::Alice, Party::Bob, Party::Charlie]
            .into_iter()
            .map(|p| g.holdings(p.into()).len())
            .sum::<usize>()
            + g.holdings(Holder::Reference).len();
        prop_assert_eq!(held, 4);
        let total: f64 = ["A", "B", "C"].iter().map(|r| (state.layout().dim_of(r).unwrap() as f64).log2()).sum();
        prop_assert!((cost - total).abs() <= 1e-12);
        prop_assert_eq!(g.state(), &state);
    }
}

#[test]
fn registry_must_cover_every_register() {
    let s = StructuredState::phi_plus_pairs(&[("A", "R", 2)]).unwrap().state().unwrap();
    let partial = [("A".to_string(), Holder::Party(Party::Alice))];
    assert!(matches!(GlobalState::new(s, partial), Err(RelayError::Ownership(_))));
}
