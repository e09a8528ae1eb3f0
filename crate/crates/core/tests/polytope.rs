mod common;

use common::*;
use proptest::prelude::*;
use sfm_core::greedy::greedy_base;
use sfm_core::lattice::{enumerate_tuples, space_size, LatticeTuple};
use sfm_core::oracle::{brute_min, normalize};
use sfm_core::polytope::*;
use sfm_core::{Oracle, PVector, Rat};

#[test]
fn apply_examples() {
    let x = vec_i(2, 3, &[1, 2, 3, -1, 0, 5]);
    assert_eq!(apply(&x, &tup("0,0", 3)).unwrap(), Rat::from_int(0));
    assert_eq!(apply(&x, &tup("a2,0", 3)).unwrap(), Rat::from_int(2));
    assert_eq!(apply(&x, &tup("1,0", 3)).unwrap(), Rat::from_int(5));
    assert_eq!(apply(&x, &tup("1,1", 3)).unwrap(), Rat::from_int(10));
    assert_eq!(apply(&x, &tup("a1,1", 3)).unwrap(), Rat::from_int(6));
    assert!(apply(&x, &tup("0", 3)).is_err());
    assert!(apply(&x, &tup("0,0", 4)).is_err());
    let h = vec_r(1, 3, &[(1, 2), (-1, 2), (3, 2)]);
    assert_eq!(apply(&h, &tup("1", 3)).unwrap(), Rat::from_int(2));
}

#[test]
fn selector_examples() {
    let t = tup("1,a2,1", 3);
    let all = enumerate_ineqs(&t, BUDGET).unwrap();
    assert_eq!(all.len(), 9);
    assert!(all.iter().all(|s| s.tuple(3) == t));
    assert_eq!(all[0].choices, vec![Choice::Pair(1, 2), Choice::Atom(2), Choice::Pair(1, 2)]);
    assert_eq!(all[1].choices[2], Choice::Pair(1, 3));
    assert_eq!(enumerate_ineqs(&tup("0,0", 5), BUDGET).unwrap().len(), 1);
    assert!(enumerate_ineqs(&LatticeTuple::top(8, 5), 1000).is_err());

    let x = vec_i(1, 4, &[3, 1, 3, 2]);
    let (sel, v) = best_selector(&x, &tup("1", 4));
    assert_eq!(sel.choices, vec![Choice::Pair(1, 3)]);
    assert_eq!(v, Rat::from_int(6));
    assert_eq!(sel.dot(&x), v);
    assert_eq!(sel.to_vector(1, 4), vec_i(1, 4, &[1, 0, 1, 0]));
    assert_eq!(x.max_pairs(0), vec![(1, 3)]);
    let flat = vec_i(1, 3, &[2, 2, 2]);
    assert_eq!(flat.max_pairs(0).len(), 3);
}

#[test]
fn unified_examples() {
    assert!(is_unified(&vec_i(1, 3, &[0, 0, 0])));
    assert!(is_unified(&vec_i(1, 3, &[5, 1, 1])));
    assert!(is_unified(&vec_i(2, 3, &[1, 1, 4, -2, -2, -2])));
    assert!(!is_unified(&vec_i(1, 3, &[1, 1, 0])));
    assert!(!is_unified(&vec_i(1, 4, &[3, 2, 1, 1])));
    let u = unify(&vec_i(2, 3, &[3, 2, 1, 1, 1, 0]));
    assert_eq!(u, vec_i(2, 3, &[3, 1, 1, 1, 0, 0]));
    assert!(is_unified(&u));
    assert_eq!(s_value(&vec_i(2, 3, &[3, 2, 1, -1, -1, -4])), Rat::from_int(4 - 5));
    assert_eq!(s_value(&vec_r(1, 3, &[(1, 2), (0, 1), (0, 1)])), Rat::new(1, 2));
}

#[test]
fn membership_examples() {
    let f = e1();
    assert!(is_member_dense(&vec_i(1, 3, &[1, 0, 0]), &f, BUDGET).unwrap().is_member());
    assert!(is_member_dense(&vec_r(1, 3, &[(1, 2), (1, 2), (1, 2)]), &f, BUDGET).unwrap().is_member());
    match is_member_dense(&vec_i(1, 3, &[1, 1, 0]), &f, BUDGET).unwrap() {
        Membership::Violated { tuple, selector } => {
            assert_eq!(tuple, tup("1", 3));
            assert_eq!(selector.choices, vec![Choice::Pair(1, 2)]);
        }
        Membership::Member => panic!("(1,1,0) lies outside"),
    }
    let tight = tight_tuples_dense(&vec_i(1, 3, &[1, 0, 0]), &f, BUDGET).unwrap();
    assert_eq!(tight, vec![tup("0", 3), tup("a1", 3), tup("1", 3)]);
    assert!(tight_tuples_dense(&vec_i(1, 3, &[2, 0, 0]), &f, BUDGET).is_err());
    assert!(is_member_dense(&vec_i(2, 3, &[0; 6]), &f, BUDGET).is_err());
    // A negative value at the bottom empties the polyhedron.
    let neg = table(1, 3, |t| if t.is_bottom() { -1 } else { 0 });
    assert!(!is_member_dense(&vec_i(1, 3, &[-9, -9, -9]), &neg, BUDGET).unwrap().is_member());
}

#[test]
fn dense_system_shape() {
    let sys = dense_system(&e1(), BUDGET).unwrap();
    // three atoms plus three pairs at the top
    assert_eq!(sys.rows.len(), 6);
    assert_eq!(sys.dim, 3);
    let sys = dense_system(&constant(2, 3, 0), BUDGET).unwrap();
    // 15 non-bottom tuples without a top, 8 with one (3 pairs each), 1 with two (9)
    assert_eq!(sys.rows.len(), 15 + 24 + 9);
}

#[test]
fn vector_json() {
    let x = vec_r(2, 3, &[(1, 2), (0, 1), (-3, 1), (7, 4), (2, 1), (0, 1)]);
    let v = x.to_json();
    assert_eq!(v["n"], 2);
    assert_eq!(v["entries"][0][0], 1);
    assert_eq!(v["entries"][0][1], "a1");
    assert_eq!(v["entries"][0][2], "1/2");
    assert_eq!(PVector::from_json(&v).unwrap(), x);
    let bad = serde_json::json!({"n": 1, "k": 3, "entries": [[1, "a4", "1/1"]]});
    assert!(PVector::from_json(&bad).is_err());
    let bad = serde_json::json!({"n": 1, "k": 3, "entries": [[1, "a1", "1/0"]]});
    assert!(PVector::from_json(&bad).is_err());
    let bad = serde_json::json!({"n": 1, "k": 3, "entries": [[1, "a1", "1/1"], [1, "a1", "2/1"]]});
    assert!(PVector::from_json(&bad).is_err());
}

fn arb_vector(n: usize, k: usize) -> impl Strategy<Value = PVector> {
    prop::collection::vec(-8i64..=8, n * k)
        .prop_map(move |v| PVector::new(n, k, v.into_iter().map(|p| Rat::new(p, 2)).collect()).unwrap())
}

fn arb_shape() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((1, 3)), Just((2, 3)), Just((3, 3)), Just((2, 4)), Just((1, 5))]
}

fn arb_vector_and_tuples() -> impl Strategy<Value = (PVector, LatticeTuple, LatticeTuple)> {
    arb_shape().prop_flat_map(|(n, k)| {
        let size = space_size(n, k) as usize;
        (arb_vector(n, k), 0..size, 0..size).prop_map(move |(x, a, b)| {
            (x, LatticeTuple::from_index(n, k, a), LatticeTuple::from_index(n, k, b))
        })
    })
}

fn small_instance() -> impl Strategy<Value = sfm_core::TabulatedFunction> {
    (prop_oneof![Just((1, 3)), Just((2, 3)), Just((1, 4))], 0u64..10_000).prop_map(|((n, k), s)| gen(n, k, 10, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluation_is_supermodular((x, s, t) in arb_vector_and_tuples()) {
        let lhs = apply(&x, &s).unwrap() + apply(&x, &t).unwrap();
        let rhs = apply(&x, &s.meet(&t).unwrap()).unwrap() + apply(&x, &s.join(&t).unwrap()).unwrap();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn evaluation_is_best_selector((x, s, _t) in arb_vector_and_tuples()) {
        let best = enumerate_ineqs(&s, BUDGET).unwrap().iter().map(|e| e.dot(&x)).max().unwrap();
        prop_assert_eq!(&best, &apply(&x, &s).unwrap());
        let (sel, v) = best_selector(&x, &s);
        prop_assert_eq!(sel.dot(&x), v.clone());
        prop_assert_eq!(v, best);
    }

    #[test]
    fn unify_is_unified(x in arb_shape().prop_flat_map(|(n, k)| arb_vector(n, k))) {
        let u = unify(&x);
        prop_assert!(is_unified(&u));
        prop_assert!(u.entrywise_le(&x));
        prop_assert_eq!(s_value(&u), s_value(&x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lowering_entries_keeps_membership(f in small_instance(), drops in prop::collection::vec(0i64..6, 8)) {
        let g = normalize(&f);
        let x = greedy_base(&g).vector;
        prop_assert!(is_member_dense(&x, &g, BUDGET).unwrap().is_member());
        prop_assert!(is_member_dense(&x.negative_part(), &g, BUDGET).unwrap().is_member());
        let lowered: Vec<Rat> = x.entries().iter().zip(drops.iter().cycle()).map(|(v, d)| v - Rat::new(*d, 2)).collect();
        let y = PVector::new(x.n(), x.k(), lowered).unwrap();
        prop_assert!(y.entrywise_le(&x));
        prop_assert!(is_member_dense(&y, &g, BUDGET).unwrap().is_member());
    }

    #[test]
    fn tight_sets_are_sublattices(f in small_instance(), drops in prop::collection::vec(0i64..3, 8)) {
        let g = normalize(&f);
        let x = greedy_base(&g).vector;
        // Lowering some entries keeps membership and thins the tight set.
        let lowered: Vec<Rat> = x.entries().iter().zip(drops.iter().cycle()).map(|(v, d)| v - Rat::from_int(d / 2)).collect();
        for y in [x.clone(), PVector::new(x.n(), x.k(), lowered).unwrap()] {
            let tight = tight_tuples_dense(&y, &g, BUDGET).unwrap();
            for a in &tight {
                for b in &tight {
                    prop_assert!(tight.contains(&a.meet(b).unwrap()), "meet of {} and {}", a, b);
                    prop_assert!(tight.contains(&a.join(b).unwrap()), "join of {} and {}", a, b);
                }
            }
        }
    }

    #[test]
    fn weak_duality(f in small_instance(), drops in prop::collection::vec(0i64..4, 8)) {
        let g = normalize(&f);
        let (min, _) = brute_min(&g, BUDGET).unwrap();
        let x = greedy_base(&g).vector.negative_part();
        let lowered: Vec<Rat> = x.entries().iter().zip(drops.iter().cycle()).map(|(v, d)| v - Rat::new(*d, 2)).collect();
        for z in [x.clone(), PVector::new(x.n(), x.k(), lowered).unwrap()] {
            prop_assert!(z.is_nonpositive());
            prop_assert!(is_member_dense(&z, &g, BUDGET).unwrap().is_member());
            prop_assert!(apply(&z, &LatticeTuple::top(g.n(), g.k())).unwrap() <= Rat::from_int(min));
        }
    }
}

#[test]
fn membership_matches_definition() {
    for seed in 0..10 {
        let f = gen(2, 3, 6, seed);
        let x = vec_r(2, 3, &[(1, 2), (-1, 1), (0, 1), (3, 2), (-1, 2), (1, 1)]);
        let brute = enumerate_tuples(2, 3, BUDGET).unwrap().all(|t| x.eval(&t) <= Rat::from_int(f.eval(&t)));
        assert_eq!(is_member_dense(&x, &f, BUDGET).unwrap().is_member(), brute);
    }
}
