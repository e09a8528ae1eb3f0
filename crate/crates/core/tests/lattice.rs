mod common;

use common::*;
use proptest::prelude::*;
use sfm_core::lattice::*;
use sfm_core::oracle::rank_penalty;

fn k3(kind: ElementKind) -> DiamondElement {
    DiamondElement::new(3, kind).unwrap()
}

#[test]
fn meet_join_of_atoms() {
    let (a1, a2, a3) = (k3(atom(1)), k3(atom(2)), k3(atom(3)));
    assert_eq!(meet(a1, a2).unwrap().kind(), ElementKind::Bottom);
    assert_eq!(join(a1, a2).unwrap().kind(), ElementKind::Top);
    assert_eq!(meet(k3(ElementKind::Top), a3).unwrap().kind(), atom(3));
}

#[test]
fn mixed_k_is_rejected() {
    let a = DiamondElement::atom(3, 1).unwrap();
    let b = DiamondElement::atom(4, 1).unwrap();
    assert!(meet(a, b).is_err());
    assert!(join(a, b).is_err());
    assert!(a.leq(&b).is_err());
    assert!(tup("a1,0", 3).meet(&tup("a1,0", 4)).is_err());
}

#[test]
fn invalid_elements() {
    assert!(DiamondElement::atom(3, 4).is_err());
    assert!(DiamondElement::atom(3, 0).is_err());
    assert!(DiamondElement::bottom(2).is_err());
    assert!(LatticeTuple::parse("a4", 3).is_err());
    assert!(LatticeTuple::parse("", 3).is_err());
}

#[test]
fn rank_examples() {
    assert_eq!(LatticeTuple::bottom(3, 3).rank(), 0);
    assert_eq!(LatticeTuple::top(3, 3).rank(), 6);
    assert_eq!(tup("1,a2,0", 3).rank(), 3);
}

#[test]
fn chain_prefix_examples() {
    assert_eq!(chain_prefix(3, 3, 0).unwrap(), tup("0,0,0", 3));
    assert_eq!(chain_prefix(3, 3, 3).unwrap(), tup("1,1,1", 3));
    assert_eq!(chain_prefix(3, 3, 1).unwrap(), tup("1,0,0", 3));
    assert!(chain_prefix(3, 3, 4).is_err());
}

#[test]
fn enumeration_counts() {
    assert_eq!(enumerate_tuples(1, 3, 100).unwrap().count(), 5);
    assert_eq!(enumerate_tuples(2, 3, 100).unwrap().count(), 25);
    assert_eq!(enumerate_tuples(3, 4, 1000).unwrap().count(), 216);
    assert!(enumerate_tuples(3, 4, 100).is_err());
}

#[test]
fn enumeration_order_is_lexicographic_and_complete() {
    let all: Vec<LatticeTuple> = enumerate_tuples(2, 3, 100).unwrap().collect();
    assert_eq!(all[0], tup("0,0", 3));
    assert_eq!(all[1], tup("0,a1", 3));
    assert_eq!(all[4], tup("0,1", 3));
    assert_eq!(all[5], tup("a1,0", 3));
    for (i, t) in all.iter().enumerate() {
        assert_eq!(t.index(), i);
        assert_eq!(&LatticeTuple::from_index(2, 3, i), t);
    }
    let mut sorted = all.clone();
    sorted.dedup();
    assert_eq!(sorted.len(), 25);
}

#[test]
fn interval_examples() {
    let t = tup("a2,1", 3);
    assert_eq!(interval(&t, &t).unwrap().collect::<Vec<_>>(), vec![t.clone()]);
    assert_eq!(interval(&tup("0", 3), &tup("1", 3)).unwrap().count(), 5);
    let got: Vec<_> = interval(&tup("0,a1", 3), &tup("a1,a1", 3)).unwrap().collect();
    assert_eq!(got, vec![tup("0,a1", 3), tup("a1,a1", 3)]);
    assert!(interval(&tup("a1", 3), &tup("a2", 3)).is_err());
}

#[test]
fn text_round_trip() {
    for t in enumerate_tuples(2, 4, 100).unwrap() {
        assert_eq!(LatticeTuple::parse(&t.to_string(), 4).unwrap(), t);
    }
    assert_eq!(tup("a1,0,1", 3).to_string(), "a1,0,1");
}

#[test]
fn single_coordinate_axioms_exhaustive() {
    for k in 3..=5 {
        let els: Vec<DiamondElement> =
            (0..k + 2).map(|c| DiamondElement::new(k, ElementKind::from_code(c, k)).unwrap()).collect();
        for &x in &els {
            assert_eq!(meet(x, x).unwrap(), x);
            assert_eq!(join(x, x).unwrap(), x);
            for &y in &els {
                assert_eq!(meet(x, y).unwrap(), meet(y, x).unwrap());
                assert_eq!(join(x, y).unwrap(), join(y, x).unwrap());
                assert_eq!(meet(x, join(x, y).unwrap()).unwrap(), x);
                assert_eq!(join(x, meet(x, y).unwrap()).unwrap(), x);
                let le = x.leq(&y).unwrap();
                assert_eq!(le, meet(x, y).unwrap() == x);
                assert_eq!(le, join(x, y).unwrap() == y);
                for &z in &els {
                    let m1 = meet(meet(x, y).unwrap(), z).unwrap();
                    let m2 = meet(x, meet(y, z).unwrap()).unwrap();
                    assert_eq!(m1, m2);
                    let j1 = join(join(x, y).unwrap(), z).unwrap();
                    let j2 = join(x, join(y, z).unwrap()).unwrap();
                    assert_eq!(j1, j2);
                }
            }
        }
    }
}

#[test]
fn covers_differ_by_one_rank() {
    for t in enumerate_tuples(2, 3, 100).unwrap() {
        for u in t.upper_covers() {
            assert_eq!(u.rank(), t.rank() + 1);
            assert!(t.leq(&u).unwrap());
            assert!(u.lower_covers().contains(&t));
        }
    }
    assert!(LatticeTuple::top(2, 3).upper_covers().is_empty());
    assert_eq!(LatticeTuple::bottom(2, 3).upper_covers().len(), 6);
}

fn arb_tuple(n: usize, k: usize) -> impl Strategy<Value = LatticeTuple> {
    let size = (k + 2).pow(n as u32);
    (0..size).prop_map(move |i| LatticeTuple::from_index(n, k, i))
}

fn arb_triple() -> impl Strategy<Value = (LatticeTuple, LatticeTuple, LatticeTuple)> {
    (1usize..=4, 3usize..=5).prop_flat_map(|(n, k)| (arb_tuple(n, k), arb_tuple(n, k), arb_tuple(n, k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tuple_lattice_axioms((s, t, u) in arb_triple()) {
        let m = |a: &LatticeTuple, b: &LatticeTuple| a.meet(b).unwrap();
        let j = |a: &LatticeTuple, b: &LatticeTuple| a.join(b).unwrap();
        prop_assert_eq!(m(&s, &t), m(&t, &s));
        prop_assert_eq!(j(&s, &t), j(&t, &s));
        prop_assert_eq!(m(&m(&s, &t), &u), m(&s, &m(&t, &u)));
        prop_assert_eq!(j(&j(&s, &t), &u), j(&s, &j(&t, &u)));
        prop_assert_eq!(m(&s, &s), s.clone());
        prop_assert_eq!(m(&s, &j(&s, &t)), s.clone());
        prop_assert_eq!(j(&s, &m(&s, &t)), s.clone());
    }

    #[test]
    fn order_matches_meet_and_join((s, t, _u) in arb_triple()) {
        let le = s.leq(&t).unwrap();
        prop_assert_eq!(le, s.meet(&t).unwrap() == s);
        prop_assert_eq!(le, s.join(&t).unwrap() == t);
    }

    #[test]
    fn rank_is_modular((s, t, _u) in arb_triple()) {
        let lhs = s.rank() + t.rank();
        let rhs = s.meet(&t).unwrap().rank() + s.join(&t).unwrap().rank();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rank_penalty_is_strictly_submodular((s, t, _u) in arb_triple()) {
        let lhs = rank_penalty(&s.meet(&t).unwrap()) + rank_penalty(&s.join(&t).unwrap());
        let rhs = rank_penalty(&s) + rank_penalty(&t);
        let comparable = s.leq(&t).unwrap() || t.leq(&s).unwrap();
        if comparable {
            prop_assert_eq!(lhs, rhs);
        } else {
            prop_assert!(lhs < rhs);
        }
    }

    #[test]
    fn interval_is_exactly_the_order_interval((s, t, _u) in arb_triple()) {
        let (a, b) = (s.meet(&t).unwrap(), s.join(&t).unwrap());
        let got: Vec<_> = interval(&a, &b).unwrap().collect();
        let want: Vec<_> = enumerate_tuples(a.n(), a.k(), 1 << 20)
            .unwrap()
            .filter(|x| a.leq(x).unwrap() && x.leq(&b).unwrap())
            .collect();
        prop_assert_eq!(got.len() as u128, interval_size(&a, &b));
        prop_assert_eq!(got, want);
    }
}
