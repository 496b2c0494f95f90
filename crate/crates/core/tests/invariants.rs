mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use unlearn_core::compression::{merge, vs_decode, vs_encode, VsEncoding};
use unlearn_core::cost::{ceil_log2 as lib_ceil_log2, count_bits};
use unlearn_core::dimensions::Dim;
use unlearn_core::hypset::HypSet;
use unlearn_core::schemes::SchemeSpec;
use unlearn_core::{
    erm_lexmin, is_realizable, remove, version_space, ClassHandle, Dataset, FiniteClass, Query,
};

fn class_strategy(max_m: usize, max_h: usize) -> impl Strategy<Value = FiniteClass> {
    (1..=max_m).prop_flat_map(move |m| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), m), 1..=max_h)
            .prop_map(move |rows| FiniteClass::new(m, rows).unwrap())
    })
}

fn dataset_strategy(m: usize, max_n: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec((0..m, any::<bool>()), 0..=max_n)
        .prop_map(|v| Dataset::from_pairs(v.into_iter().map(|(x, y)| lp(x, y))))
}

fn class_and_data() -> impl Strategy<Value = (FiniteClass, Dataset, Vec<bool>)> {
    class_strategy(6, 20).prop_flat_map(|c| {
        let m = c.domain_size();
        (Just(c), dataset_strategy(m, 12), prop::collection::vec(any::<bool>(), 12))
    })
}

fn query_of(d: &Dataset, mask: &[bool]) -> Vec<usize> {
    (1..=d.len()).filter(|&i| mask[i - 1]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn deletion_preserves_realizability((class, data, mask) in class_and_data()) {
        let h = ClassHandle::from(class.clone());
        let q = Query::new(query_of(&data, &mask)).unwrap();
        if is_realizable(&h, &data).unwrap() {
            prop_assert!(is_realizable(&h, &remove(&data, &q).unwrap()).unwrap());
        }
    }

    #[test]
    fn version_space_matches_brute_force((class, data, _) in class_and_data()) {
        let vs = version_space(&class, &data);
        let want = brute_vs(&class, &pairs_of(&data));
        prop_assert_eq!(vs.members(), want.clone());
        let h = ClassHandle::from(class.clone());
        prop_assert_eq!(!vs.is_empty(), is_realizable(&h, &data).unwrap());
    }

    #[test]
    fn version_space_of_union_is_intersection((class, a, mask) in class_and_data()) {
        let m = class.domain_size();
        let b = Dataset::from_pairs(
            mask.iter().enumerate().map(|(i, &y)| lp(i % m, y)).take(a.len() % 5),
        );
        let joint = version_space(&class, &a.concat(&b));
        let meet = version_space(&class, &a).intersection(&version_space(&class, &b));
        prop_assert_eq!(joint, meet);
    }

    #[test]
    fn erm_is_lex_min_loss((class, data, _) in class_and_data()) {
        let got = erm_lexmin(&class, &data);
        prop_assert_eq!(got, brute_erm(&class, &pairs_of(&data)));
        let vs = version_space(&class, &data);
        if let Some(first) = vs.lex_min() {
            prop_assert_eq!(got, first);
        }
    }

    #[test]
    fn erm_ignores_item_order((class, data, _) in class_and_data()) {
        let mut pairs = pairs_of(&data);
        pairs.reverse();
        prop_assert_eq!(erm_lexmin(&class, &data), erm_lexmin(&class, &Dataset::from_pairs(pairs)));
    }

    #[test]
    fn merge_is_a_commutative_monoid(
        (class, a, mask) in class_and_data(),
        seed in any::<u64>(),
    ) {
        let h = ClassHandle::from(class.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = rand_dataset(&mut rng, class.domain_size(), mask.iter().filter(|&&x| x).count() % 6);
        let c = rand_dataset(&mut rng, class.domain_size(), 3);
        let (ea, eb, ec) = (
            vs_encode(&h, &a).unwrap(),
            vs_encode(&h, &b).unwrap(),
            vs_encode(&h, &c).unwrap(),
        );
        let id = VsEncoding::identity();
        prop_assert_eq!(merge(&h, &ea, &id).unwrap(), ea.clone());
        prop_assert_eq!(merge(&h, &ea, &eb).unwrap(), merge(&h, &eb, &ea).unwrap());
        let left = merge(&h, &merge(&h, &ea, &eb).unwrap(), &ec).unwrap();
        let right = merge(&h, &ea, &merge(&h, &eb, &ec).unwrap()).unwrap();
        prop_assert_eq!(left.clone(), right);
        prop_assert_eq!(left, vs_encode(&h, &a.concat(&b).concat(&c)).unwrap());
    }

    #[test]
    fn encoding_is_order_and_duplicate_invariant((class, data, _) in class_and_data()) {
        let h = ClassHandle::from(class.clone());
        let enc = vs_encode(&h, &data).unwrap();
        let mut shuffled = pairs_of(&data);
        shuffled.reverse();
        shuffled.extend(pairs_of(&data).into_iter().take(2));
        prop_assert_eq!(&enc, &vs_encode(&h, &Dataset::from_pairs(shuffled)).unwrap());
        prop_assert_eq!(vs_decode(&class, &enc).members(), brute_vs(&class, &pairs_of(&data)));
    }

    #[test]
    fn encoding_json_round_trip((class, data, _) in class_and_data()) {
        let enc = vs_encode(&ClassHandle::from(class), &data).unwrap();
        let text = serde_json::to_string(&enc).unwrap();
        prop_assert_eq!(serde_json::from_str::<VsEncoding>(&text).unwrap(), enc);
    }

    #[test]
    fn schemes_agree_with_retraining((class, data, mask) in class_and_data(), k in 1usize..=3) {
        let h = ClassHandle::from(class.clone());
        let q = query_of(&data, &mask);
        let small: Vec<usize> = q.iter().copied().take(k).collect();
        let surv = survivors(&data, &q);
        let surv_small = survivors(&data, &small);
        for spec in [SchemeSpec::Trivial, SchemeSpec::Merkle, SchemeSpec::Bounded { k }] {
            let scheme = spec.build(&h).unwrap();
            let dep = scheme.deploy(&data).unwrap();
            let (query, expect) = if matches!(spec, SchemeSpec::Bounded { .. }) {
                (&small, brute_realizable(&class, &surv_small))
            } else {
                (&q, brute_realizable(&class, &surv))
            };
            let got = dep.unlearn(&Query::new(query.clone()).unwrap()).unwrap();
            prop_assert_eq!(got, unlearn_core::schemes::Answer::Realizable(expect));
        }
    }

    #[test]
    fn bounded_scheme_rejects_large_queries((class, data, _) in class_and_data()) {
        prop_assume!(data.len() >= 3);
        let scheme = SchemeSpec::Bounded { k: 2 }.build(&ClassHandle::from(class)).unwrap();
        let dep = scheme.deploy(&data).unwrap();
        prop_assert!(dep.unlearn(&Query::new([1, 2, 3]).unwrap()).is_err());
    }

    #[test]
    fn hypset_matches_btreeset(
        len in 1usize..200,
        a in prop::collection::vec(0usize..200, 0..40),
        b in prop::collection::vec(0usize..200, 0..40),
    ) {
        let a: BTreeSet<usize> = a.into_iter().filter(|&i| i < len).collect();
        let b: BTreeSet<usize> = b.into_iter().filter(|&i| i < len).collect();
        let ha = HypSet::from_indices(len, a.iter().copied());
        let hb = HypSet::from_indices(len, b.iter().copied());
        let inter: Vec<usize> = a.intersection(&b).copied().collect();
        prop_assert_eq!(ha.intersection(&hb).iter().collect::<Vec<_>>(), inter);
        prop_assert_eq!(ha.count(), a.len());
        prop_assert_eq!(ha.first(), a.iter().next().copied());
        prop_assert_eq!(ha.is_subset(&hb), a.is_subset(&b));
    }

    #[test]
    fn bit_counts(n in 0usize..1_000_000) {
        prop_assert_eq!(lib_ceil_log2(n.max(1)), ceil_log2(n.max(1)));
        // count_bits(n) is the width needed to write any value in 0..=n
        prop_assert_eq!(count_bits(n), ceil_log2(n + 1));
        if n > 0 {
            prop_assert!(n < 1 << count_bits(n));
        }
    }

    #[test]
    fn dim_json_round_trip(v in prop::option::of(0usize..1000)) {
        let d = v.map_or(Dim::CapExceeded, Dim::Value);
        let text = serde_json::to_string(&d).unwrap();
        prop_assert_eq!(serde_json::from_str::<Dim>(&text).unwrap(), d);
    }
}

/// Both class views answer identically on every support, for every class
/// drawn over at most five points.
#[test]
fn oracle_and_finite_paths_agree_exhaustively() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in 0..60 {
        let m = 1 + t % 5;
        let class = rand_class(&mut rng, m, 1 + t % 16);
        let finite = ClassHandle::from(class.clone());
        let oracle = finite.to_oracle();
        for s in subsets(&all_pairs(m)) {
            let a = finite.realizable(&s).unwrap();
            assert_eq!(a, oracle.realizable(&s).unwrap(), "{s:?}");
            assert_eq!(a, brute_realizable(&class, &s));
        }
    }
}

#[test]
fn duplicate_rows_are_merged() {
    let c = FiniteClass::new(2, vec![vec![true, false], vec![true, false], vec![false, false]]).unwrap();
    assert_eq!(c.len(), 2);
}
