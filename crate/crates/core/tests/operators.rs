//! Properties of the Bellman operators on random instances.

use avgmdp::generate::{random_general, random_vector};
use avgmdp::{
    bellman_consistency, bellman_optimality, bellman_residual, span_seminorm, sup_error,
    DeterministicPolicy, ValueVector,
};
use proptest::prelude::*;

fn sizes() -> impl Strategy<Value = (usize, usize, u64, u64)> {
    (1usize..8, 1usize..4, any::<u64>(), any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn optimality_is_monotone((n, a, seed, vseed) in sizes(), bump in 0.0f64..2.0) {
        let m = random_general(n, a, seed).unwrap();
        let u = random_vector(n, vseed);
        let w = ValueVector::new(
            u.iter()
                .zip(random_vector(n, vseed ^ 1).iter())
                .map(|(x, y)| x + bump * y.abs())
                .collect(),
        );
        let (tu, _) = bellman_optimality(&m, &u).unwrap();
        let (tw, _) = bellman_optimality(&m, &w).unwrap();
        for s in 0..n {
            prop_assert!(tu[s] <= tw[s] + 1e-12);
        }
    }

    #[test]
    fn operators_commute_with_constants((n, a, seed, vseed) in sizes(), c in -10.0f64..10.0) {
        let m = random_general(n, a, seed).unwrap();
        let v = random_vector(n, vseed);
        let (tv, pi) = bellman_optimality(&m, &v).unwrap();
        let (tvc, _) = bellman_optimality(&m, &v.shift(c)).unwrap();
        prop_assert!(sup_error(&tvc, &tv.shift(c)).unwrap() <= 1e-12);
        let tp = bellman_consistency(&m, &pi, &v).unwrap();
        let tpc = bellman_consistency(&m, &pi, &v.shift(c)).unwrap();
        prop_assert!(sup_error(&tpc, &tp.shift(c)).unwrap() <= 1e-12);
        prop_assert!(sup_error(&tp, &tv).unwrap() <= 1e-12);
    }

    #[test]
    fn optimality_is_nonexpansive((n, a, seed, vseed) in sizes()) {
        let m = random_general(n, a, seed).unwrap();
        let u = random_vector(n, vseed).scale(5.0);
        let w = random_vector(n, vseed.wrapping_add(7)).scale(5.0);
        let (tu, _) = bellman_optimality(&m, &u).unwrap();
        let (tw, _) = bellman_optimality(&m, &w).unwrap();
        prop_assert!(sup_error(&tu, &tw).unwrap() <= sup_error(&u, &w).unwrap() + 1e-12);
    }

    #[test]
    fn span_is_at_most_twice_sup_error((n, _a, _seed, vseed) in sizes(), g in -3.0f64..3.0) {
        let x = random_vector(n, vseed).scale(4.0);
        let target = ValueVector::constant(n, g);
        prop_assert!(span_seminorm(&x) <= 2.0 * sup_error(&x, &target).unwrap() + 1e-12);
    }

    #[test]
    fn greedy_policy_dominates_others((n, a, seed, vseed) in sizes(), pick in any::<u64>()) {
        let m = random_general(n, a, seed).unwrap();
        let v = random_vector(n, vseed);
        let (tv, _) = bellman_optimality(&m, &v).unwrap();
        let pi = DeterministicPolicy::new((0..n).map(|s| ((pick >> s) as usize) % a).collect());
        let tp = bellman_consistency(&m, &pi, &v).unwrap();
        for s in 0..n {
            prop_assert!(tp[s] <= tv[s] + 1e-12);
        }
        let res = bellman_residual(&m, &v).unwrap();
        prop_assert!(sup_error(&res, &tv.sub(&v)).unwrap() == 0.0);
    }
}
