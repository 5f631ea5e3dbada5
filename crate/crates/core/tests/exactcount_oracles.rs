mod common;

use common::involutions;
use num_bigint::BigUint;
use proptest::prelude::*;
use shortcycles::exactcount::{
    brute_force_count, coefficient_oracle, exact_count, ln_biguint, nu_log,
};
use shortcycles::numeric::gamma::ln_factorial;

#[test]
fn involution_sequence() {
    let reference = involutions(20);
    // r ≤ n is a precondition; at n = 1 the bound r = 1 already admits every permutation.
    for n in 1..=20u64 {
        assert_eq!(
            exact_count(n, n.min(2)).unwrap().count,
            reference[n as usize],
            "n={n}"
        );
    }
    let head: Vec<u64> = (1..=7)
        .map(|n| exact_count(n, n.min(2)).unwrap().count.try_into().unwrap())
        .collect();
    assert_eq!(head, vec![1, 2, 4, 10, 26, 76, 232]);
}

#[test]
fn enumeration_agrees_for_n_up_to_eight() {
    for n in 1..=8u64 {
        for r in 1..=n {
            let exact = exact_count(n, r).unwrap().count;
            assert_eq!(
                exact,
                BigUint::from(brute_force_count(n, r).unwrap()),
                "n={n} r={r}"
            );
        }
    }
}

#[test]
fn float_recurrence_matches_big_integers() {
    for n in [1u64, 7, 50, 171, 500, 1200, 2000] {
        for r in [1, 2, 3, 5, 10, n] {
            if r > n {
                continue;
            }
            let exact = ln_biguint(&exact_count(n, r).unwrap().count) - ln_factorial(n);
            let float = nu_log(n, r).unwrap().ln();
            assert!(
                (float - exact).abs() <= 1e-10,
                "n={n} r={r}: {float} vs {exact}"
            );
        }
    }
}

#[test]
fn extended_precision_oracle_matches() {
    for n in [50u64, 500, 2000] {
        let root = (n as f64).sqrt().ceil() as u64;
        for r in [2, 5, root, n] {
            let oracle = coefficient_oracle(n, r, 30).unwrap().ln();
            let float = nu_log(n, r).unwrap().ln();
            assert!((float - oracle).abs() <= 1e-10, "n={n} r={r}");
        }
    }
}

#[test]
fn whole_symmetric_group_when_r_is_n() {
    for n in 1..=30u64 {
        assert!(nu_log(n, n).unwrap().ln().abs() <= 1e-13);
    }
}

proptest! {
    #[test]
    fn monotone_in_r(n in 2u64..400, r_frac in 0.0f64..1.0) {
        let r = 1 + ((n - 1) as f64 * r_frac) as u64;
        let lo = nu_log(n, r).unwrap().ln();
        let hi = nu_log(n, r + 1).unwrap().ln();
        prop_assert!(hi >= lo - 1e-12 * lo.abs());
    }

    #[test]
    fn exact_counts_monotone_in_r(n in 1u64..120, r_frac in 0.0f64..1.0) {
        let r = 1 + ((n - 1) as f64 * r_frac) as u64;
        let lo = exact_count(n, r).unwrap().count;
        let hi = exact_count(n, (r + 1).min(n)).unwrap().count;
        prop_assert!(hi >= lo);
    }

    #[test]
    fn out_of_range_pairs_rejected(n in 1u64..100, excess in 1u64..10) {
        prop_assert!(exact_count(n, n + excess).is_err());
        prop_assert!(nu_log(n, 0).is_err());
    }
}
