use proptest::prelude::*;

use qrelay::entropy::{
    coherent_merging_rates, redistribution_rates, relay_rates, splitting_rates, EntropyContext, Protocol, RegSet,
};
use qrelay::resource::Resource;
use qrelay::states::{random_abcr, random_pure};

const TOL: f64 = 1e-9;
const A: RegSet = RegSet::A;
const B: RegSet = RegSet::B;
const C: RegSet = RegSet::C;
const R: RegSet = RegSet::R;

fn ctx(seed: u64) -> EntropyContext {
    EntropyContext::new(random_abcr(seed)).unwrap()
}

/// Random pure state with one of the party registers null.
fn with_null(seed: u64, null: &str) -> EntropyContext {
    let regs: Vec<(&str, usize)> =
        ["A", "B", "C", "R"].into_iter().map(|n| (n, if n == null { 1 } else { 2 })).collect();
    EntropyContext::new(random_pure(&regs, seed).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn purity_duality(seed in any::<u64>()) {
        let x = ctx(seed);
        for s in RegSet::all_subsets() {
            prop_assert!((x.entropy(s) - x.entropy(s.complement())).abs() <= TOL, "{}", s);
        }
    }

    #[test]
    fn conditional_mutual_information_duality(seed in any::<u64>()) {
        let x = ctx(seed);
        let (arb, arc) = (x.cond_mutual_info(A, R, B).unwrap(), x.cond_mutual_info(A, R, C).unwrap());
        prop_assert!((arb - arc).abs() <= TOL);
        prop_assert!(arb >= -TOL);
    }

    #[test]
    fn chain_rule(seed in any::<u64>()) {
        let x = ctx(seed);
        let lhs = x.mutual_info(A, R | C).unwrap();
        let rhs = x.mutual_info(A, C).unwrap() + x.cond_mutual_info(A, R, C).unwrap();
        prop_assert!((lhs - rhs).abs() <= TOL);
    }

    #[test]
    fn relay_second_leg_is_naive_minus_first_leg_ebits(seed in any::<u64>()) {
        let x = ctx(seed);
        let rates = relay_rates(&x);
        let naive = x.mutual_info(A, R | C).unwrap() / 2.0;
        // e_ac is signed: produced ebits are negative
        let expected = naive + rates.rate("e_ac").unwrap();
        prop_assert!((rates.rate("q_cb").unwrap() - expected).abs() <= TOL);
    }

    #[test]
    fn relay_without_charlie_is_coherent_merging(seed in any::<u64>()) {
        let x = with_null(seed, "C");
        let (relay, coherent) = (relay_rates(&x), coherent_merging_rates(&x));
        prop_assert!((relay.rate("q_cb").unwrap() - coherent.rate("qubits").unwrap()).abs() <= TOL);
        prop_assert!((relay.rate("e_cb").unwrap() - coherent.rate("ebits").unwrap()).abs() <= TOL);
        prop_assert!(relay.rate("e_ac").unwrap().abs() <= TOL);
    }

    #[test]
    fn redistribution_without_bob_is_splitting(seed in any::<u64>()) {
        let x = with_null(seed, "B");
        let (red, split) = (redistribution_rates(&x), splitting_rates(&x).unwrap());
        for label in ["qubits", "ebits"] {
            prop_assert!((red.rate(label).unwrap() - split.rate(label).unwrap()).abs() <= TOL, "{}", label);
        }
    }

    #[test]
    fn channel_rates_are_non_negative(seed in any::<u64>(), null in prop::sample::select(vec!["", "B", "C"])) {
        let x = if null.is_empty() { ctx(seed) } else { with_null(seed, null) };
        for p in Protocol::ALL {
            let Ok(report) = p.rates(&x) else { continue };
            for e in report.entries.iter().filter(|e| e.resource == Resource::QubitChannel) {
                prop_assert!(e.rate >= -TOL, "{} {}: {}", p.name(), e.label, e.rate);
            }
        }
    }
}
