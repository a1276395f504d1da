mod support {
    pub mod drs_oracle;
}

use meaningbank_core::drs::{drs_alpha_equal, merge, Condition, Drs, Ref};
use proptest::prelude::*;
use support::drs_oracle::{arb_drs, oracle_alpha, variant, FREE_BASE};

fn cfg() -> ProptestConfig {
    ProptestConfig {
        cases: 1000,
        ..ProptestConfig::default()
    }
}

#[test]
fn fixed_seed_suite() {
    support::drs_oracle::check_suite(200).unwrap();
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn alpha_agrees_with_bijection_oracle(a in arb_drs(6, true), b in arb_drs(6, true)) {
        prop_assert_eq!(drs_alpha_equal(&a, &b), oracle_alpha(&a, &b));
    }

    #[test]
    fn renamed_copies_are_alpha_equal(a in arb_drs(6, true), seed in any::<u64>()) {
        let b = variant(&a, seed);
        prop_assert!(oracle_alpha(&a, &b));
        prop_assert!(drs_alpha_equal(&a, &b));
        prop_assert!(drs_alpha_equal(&b, &a));
    }

    #[test]
    fn alpha_is_an_equivalence(a in arb_drs(6, true), s1 in any::<u64>(), s2 in any::<u64>(), c in arb_drs(6, true)) {
        let b = variant(&a, s1);
        let b2 = variant(&b, s2);
        prop_assert!(drs_alpha_equal(&a, &a));
        prop_assert!(drs_alpha_equal(&a, &b2));
        prop_assert_eq!(drs_alpha_equal(&a, &c), drs_alpha_equal(&c, &a));
        if drs_alpha_equal(&b, &c) {
            prop_assert!(drs_alpha_equal(&a, &c));
        }
    }

    #[test]
    fn mutation_breaks_alpha_equality(a in arb_drs(6, false), seed in any::<u64>()) {
        let mut b = variant(&a, seed);
        b.conditions.push(Condition::Pred1("mutant".into(), Ref::x(FREE_BASE)));
        prop_assert!(!drs_alpha_equal(&a, &b));
        prop_assert!(!oracle_alpha(&a, &b));
    }

    #[test]
    fn merge_identity(a in arb_drs(6, true)) {
        prop_assert!(drs_alpha_equal(&merge(&Drs::empty(), &a), &a));
        prop_assert!(drs_alpha_equal(&merge(&a, &Drs::empty()), &a));
    }

    #[test]
    fn merge_associative(a in arb_drs(3, true), b in arb_drs(3, true), c in arb_drs(3, true)) {
        let left = merge(&merge(&a, &b), &c);
        let right = merge(&a, &merge(&b, &c));
        prop_assert!(drs_alpha_equal(&left, &right), "{:?}\n{:?}", left, right);
        prop_assert!(oracle_alpha(&left, &right));
    }
}
