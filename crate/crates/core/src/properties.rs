//! Property tests over random sets, arcs and polynomials.

use std::collections::BTreeSet;

use crate::arcs::{canonical_omega, r, Arc, ArcSet};
use crate::arith::{mobius, prime_factors};
use crate::dilation::{balanced_function, count_function, exact_l1, extract_certified, maximize_count, orbit_subset};
use crate::lp::{decompose, SparsePoly};
use crate::oracle::compare;
use crate::pipeline::{run, Command, Report, RunConfig};
use crate::sets::{default_threshold, is_kl_sumfree, load_set, structure, triadic_index, Format, IntegerSet};
use num::rational::Ratio;
use num::{BigRational, Zero};
use proptest::prelude::*;

fn set_of(v: &BTreeSet<u64>) -> IntegerSet {
    IntegerSet::from_u64(v.iter().copied()).unwrap()
}

fn fold_sums(x: &[u64], k: u32) -> BTreeSet<u64> {
    let mut s = BTreeSet::from([0u64]);
    for _ in 0..k {
        s = s.iter().flat_map(|&a| x.iter().map(move |&b| a + b)).collect();
    }
    s
}

fn small_set(max: u64, len: usize) -> impl Strategy<Value = BTreeSet<u64>> {
    prop::collection::btree_set(1..=max, 1..=len)
}

fn arc_strategy() -> impl Strategy<Value = ArcSet> {
    (1i64..=24, 0i64..24, 1i64..24).prop_filter_map("arc inside [0,1]", |(d, a, len)| {
        let (lo, hi) = (r(a, d), r(a + len, d));
        (lo < Ratio::from_integer(1) && hi <= Ratio::from_integer(1)).then(|| ArcSet::single(lo, hi).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sumfree_matches_naive(a in small_set(40, 8), k in 1u32..4, l in 1u32..4) {
        let v: Vec<u64> = a.iter().copied().collect();
        let naive = fold_sums(&v, k).is_disjoint(&fold_sums(&v, l));
        prop_assert_eq!(is_kl_sumfree(&set_of(&a), k, l).unwrap(), naive);
    }

    #[test]
    fn sumfree_is_hereditary(a in small_set(60, 10), mask in any::<u16>()) {
        let s = set_of(&a);
        if is_kl_sumfree(&s, 2, 1).unwrap() {
            let sub: BTreeSet<u64> = a.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
            prop_assert!(is_kl_sumfree(&set_of(&sub), 2, 1).unwrap());
        }
    }

    #[test]
    fn symdiff_matches_definition(a in small_set(200, 20)) {
        let rep = structure(&set_of(&a), default_threshold()).unwrap();
        let triple: BTreeSet<u64> = a.iter().map(|x| 3 * x).collect();
        let want: Vec<u128> = a.symmetric_difference(&triple).map(|&x| x as u128).collect();
        prop_assert_eq!(&rep.symdiff, &want);
        for (m, e) in rep.symdiff.iter().zip(&rep.epsilon) {
            prop_assert_eq!(*e == 1, a.contains(&(*m as u64)));
        }
    }

    #[test]
    fn pullback_preserves_measure(o in arc_strategy(), m in 1u32..20) {
        let p = o.pullback(m).unwrap();
        prop_assert_eq!(p.measure(), o.measure());
        // x lies in the pullback exactly when m·x lies in o
        for j in 0..97i64 {
            let x = r(2 * j + 1, 194);
            if !p.is_endpoint(x) && !o.is_endpoint(x * m as i64) {
                prop_assert_eq!(p.contains(x), o.contains(x * m as i64));
            }
        }
    }

    #[test]
    fn count_function_agrees_with_orbits(a in small_set(50, 8), o in arc_strategy(), num in 0i64..1000) {
        let s = set_of(&a);
        let f = count_function(&s, &o).unwrap();
        let x = r(2 * num + 1, 2002);
        if let Some(v) = f.eval(x) {
            let orbit = orbit_subset(&s, &o, x).unwrap();
            prop_assert_eq!(v, Ratio::from_integer(orbit.len() as i64));
        }
    }

    #[test]
    fn balanced_mean_zero_and_max_half_l1(a in small_set(60, 8)) {
        let omega = canonical_omega(2, 1, 1).unwrap();
        let f = balanced_function(&set_of(&a), &omega).unwrap();
        prop_assert!(f.integral().is_zero());
        let (_, max) = f.max();
        let max = BigRational::new((*max.numer()).into(), (*max.denom()).into());
        prop_assert!(max * BigRational::from_integer(2.into()) >= exact_l1(&f));
    }

    #[test]
    fn maximize_count_beats_mean(a in small_set(500, 15)) {
        let s = set_of(&a);
        let omega = canonical_omega(2, 1, 1).unwrap();
        let (x, count) = maximize_count(&s, &omega).unwrap();
        prop_assert!(3 * count >= a.len() as u64);
        let orbit = orbit_subset(&s, &omega, x).unwrap();
        prop_assert_eq!(orbit.len() as u64, count);
        prop_assert!(is_kl_sumfree(&orbit, 2, 1).unwrap());
    }

    #[test]
    fn extraction_certified(a in small_set(300, 12), pair in prop::sample::select(vec![(2u32, 1u32), (2, 4), (4, 8)])) {
        let s = set_of(&a);
        let c = extract_certified(&s, pair.0, pair.1, None).unwrap();
        prop_assert!(c.reverify(&s).unwrap());
        prop_assert!(is_kl_sumfree(&c.subset, pair.0, pair.1).unwrap());
        prop_assert!(c.subset.iter().all(|v| s.contains(v)));
    }

    #[test]
    fn oracle_dominates_extractor(a in small_set(80, 10)) {
        let c = compare(&set_of(&a), 2, 1).unwrap();
        prop_assert!(c.gap >= 0);
        prop_assert!(is_kl_sumfree(&c.witness, 2, 1).unwrap());
        prop_assert!(3 * c.oracle + 3 > a.len() + 2);
    }

    #[test]
    fn decomposition_is_invertible(a in prop::collection::btree_set(1u64..1_000_000, 1..30)) {
        let g = SparsePoly::unit_sum(&set_of(&a)).unwrap();
        let d = decompose(&g).unwrap();
        prop_assert_eq!(d.recompose(), g);
        for (k, b) in &d.blocks {
            prop_assert!(b.coeffs.keys().all(|&n| triadic_index(n as u128) == *k));
        }
    }

    #[test]
    fn mobius_matches_factorization(n in 1u64..100_000) {
        let mut m = n;
        let mut sign = 1i8;
        for p in prime_factors(n) {
            m /= p;
            if m % p == 0 {
                sign = 0;
                break;
            }
            sign = -sign;
        }
        prop_assert_eq!(mobius(n), sign);
    }

    #[test]
    fn lines_format_round_trips(a in small_set(1_000_000, 20)) {
        let text: String = a.iter().map(|v| format!("{v}\n")).collect();
        prop_assert_eq!(load_set(text.as_bytes(), Format::Lines).unwrap(), set_of(&a));
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(load_set(json.as_bytes(), Format::Json).unwrap(), set_of(&a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn report_round_trip(a in small_set(100, 8), l in prop::sample::select(vec![1u32, 4])) {
        let cfg = RunConfig { command: Command::Extract, input: Some("mem".into()), k: 2, l, ..RunConfig::default() };
        let rep = run(&cfg, Some(set_of(&a))).unwrap();
        let back = Report::from_json(&rep.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &rep);
        prop_assert!(back.reverify().unwrap());
        let again = run(&cfg, Some(set_of(&a))).unwrap();
        prop_assert_eq!(again.reproducible_json().unwrap(), rep.reproducible_json().unwrap());
    }
}

#[test]
fn arc_constructor_rejects_empty() {
    assert!(Arc::new(r(1, 2), r(1, 2)).is_err());
}
