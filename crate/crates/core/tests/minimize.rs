mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfm_core::lattice::{ElementKind, LatticeTuple};
use sfm_core::lpengine::{solve_lp_dense, Engine, LpOutcome};
use sfm_core::minimize::*;
use sfm_core::oracle::{brute_min, normalize, shift, strictify, Oracle};
use sfm_core::polytope::{dense_system, is_member_dense, is_unified, s_value, tight_tuples_dense};
use sfm_core::setsfm::Backend;
use num_traits::Zero;
use sfm_core::{PVector, Rat, TabulatedFunction};

fn cfg() -> MinimizeConfig {
    MinimizeConfig::default()
}

fn dense_max(f: &dyn Oracle, c: &PVector) -> Rat {
    match solve_lp_dense(&dense_system(f, BUDGET).unwrap(), c.entries()) {
        LpOutcome::Optimal { value, .. } => value,
        other => panic!("dense LP: {other:?}"),
    }
}

fn random_vector(rng: &mut impl Rng, n: usize, k: usize, r: i64) -> PVector {
    PVector::new(n, k, (0..n * k).map(|_| Rat::new(rng.gen_range(-2 * r..=2 * r), 2)).collect()).unwrap()
}

#[test]
fn chain_shape_validation() {
    let ch = vec![tup("0,0", 3), tup("a1,0", 3), tup("1,1", 3)];
    assert!(TightChain::new(ch.clone(), 1).is_ok());
    assert!(TightChain::new(ch.clone(), 0).is_err());
    assert!(TightChain::new(vec![tup("0,0", 3), tup("1,1", 3)], 1).is_err());
    assert!(TightChain::new(vec![tup("0,0", 3), tup("1,1", 3)], 2).is_ok());
    assert!(TightChain::new(vec![tup("a1,0", 3), tup("1,1", 3)], 2).is_err());
    assert!(TightChain::new(vec![tup("0,0", 3), tup("a1,0", 3), tup("a2,a1", 3), tup("1,1", 3)], 2).is_err());
    assert!(TightChain::new(Vec::new(), 2).is_err());
}

#[test]
fn chain_separate_examples() {
    let f = e1();
    let chain = TightChain::new(vec![tup("0", 3), tup("1", 3)], 1).unwrap();
    let inside = vec_r(1, 3, &[(1, 2), (1, 2), (1, 2)]);
    assert!(chain_separate(&inside, &f, &chain, Backend::MinNorm).unwrap().is_member());
    // x(1) = 1 but x(a1) = 3/2 > 1
    let outside = vec_r(1, 3, &[(3, 2), (-1, 2), (-1, 2)]);
    match chain_separate(&outside, &f, &chain, Backend::Exhaustive).unwrap() {
        ChainVerdict::Violated { tuple, selector } => {
            assert_eq!(tuple, tup("a1", 3));
            assert!(selector.dot(&outside) > Rat::from_int(f.eval(&tuple)));
        }
        ChainVerdict::Member => panic!("violation missed"),
    }
    // chain tuples must be tight
    let loose = vec_i(1, 3, &[0, 0, 0]);
    assert!(chain_separate(&loose, &f, &chain, Backend::MinNorm).is_err());
    // a negative bottom value is reported at the bottom
    let neg = table(1, 3, |t| if t.is_bottom() { -1 } else { 0 });
    let v = chain_separate(&vec_i(1, 3, &[0, 0, 0]), &neg, &chain, Backend::MinNorm).unwrap();
    assert!(matches!(v, ChainVerdict::Violated { tuple, .. } if tuple.is_bottom()));
}

#[test]
fn chain_separate_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut members, mut outside) = (0, 0);
    for round in 0..150u64 {
        let (n, k) = [(1, 3), (2, 3), (3, 3), (2, 4)][round as usize % 4];
        let f = normalize(gen(n, k, 10, round));
        let chain = random_coarse_chain(&mut rng, n, k, 0.4);
        let x = make_tight(&random_vector(&mut rng, n, k, 5), &f, &chain);
        let tc = TightChain::new(chain, n).unwrap();
        let dense = is_member_dense(&x, &f, BUDGET).unwrap().is_member();
        for backend in [Backend::Exhaustive, Backend::MinNorm] {
            let v = chain_separate(&x, &f, &tc, backend).unwrap();
            assert_eq!(v.is_member(), dense, "round {round}: x = {x}");
            if let ChainVerdict::Violated { tuple, selector } = v {
                assert!(selector.dot(&x) > Rat::from_int(f.eval(&tuple)));
            }
        }
        if dense {
            members += 1;
        } else {
            outside += 1;
        }
    }
    assert!(members > 10 && outside > 10, "{members} members, {outside} outside");
}

#[test]
fn direction_on_e1() {
    let f = strictify(e1()).unwrap();
    let ones = vec_i(1, 3, &[1, 1, 1]);
    let start = greedy_state(&f);
    let d = improving_direction(&start, &ones).unwrap();
    assert_eq!(d.value, Rat::from_int(1));
    assert_eq!(ones.dot(&d.z).unwrap(), Rat::from_int(1));
    let mut stats = WalkStats::default();
    let StrictOutcome::Optimal(best) = optimize_strict(&f, &ones, None, &cfg(), &mut stats).unwrap() else {
        panic!("bounded objective");
    };
    assert_eq!(improving_direction(&best, &ones).unwrap().value, Rat::from_int(0));
    assert_eq!(ones.dot(&best.x).unwrap(), dense_max(&f, &ones));
    assert!(stats.steps >= 1);
}

#[test]
fn face_optimize_on_e1() {
    let f = strictify(e1()).unwrap();
    let ones = vec_i(1, 3, &[1, 1, 1]);
    let start = greedy_state(&f);
    let d = improving_direction(&start, &ones).unwrap();
    let face: Vec<TightTuple> = start
        .chain
        .iter()
        .filter_map(|tt| {
            let (v, pairs) = tt.best_against(&d.z);
            v.is_zero().then(|| TightTuple { tuple: tt.tuple.clone(), pairs })
        })
        .collect();
    assert!(face.first().unwrap().tuple.is_bottom() && face.last().unwrap().tuple.is_top());
    let FaceOutcome::Optimal(y) = face_optimize(&ones, &f, &face, &cfg()).unwrap() else {
        panic!("bounded face");
    };
    assert!(is_member_dense(&y, &f, BUDGET).unwrap().is_member());
    assert!(ones.dot(&y).unwrap() - ones.dot(&start.x).unwrap() >= Rat::new(1, 2));
    for tt in &face {
        assert_eq!(y.eval(&tt.tuple), Rat::from_int(f.eval(&tt.tuple)));
    }
}

fn check_walk(f: &dyn Oracle, c: &PVector) -> std::result::Result<(), TestCaseError> {
    let mut state = greedy_state(f);
    for _ in 0..10_000 {
        let dir = improving_direction(&state, c).unwrap();
        let at_dense_max = c.dot(&state.x).unwrap() == dense_max(f, c);
        prop_assert!(dir.value.is_zero() || dir.value == Rat::from_int(1));
        prop_assert_eq!(dir.value.is_zero(), at_dense_max);
        match improve_vertex(&state, f, c, &cfg()).unwrap() {
            Step::Optimal => return Ok(()),
            Step::Unbounded(_) => prop_assert!(false, "walk left a bounded polyhedron"),
            Step::Improved { state: next, gain } => {
                prop_assert!(gain >= Rat::new(1, 2));
                prop_assert_eq!(gain, c.dot(&next.x).unwrap() - c.dot(&state.x).unwrap());
                let ts = next.chain_tuples();
                prop_assert!(TightChain::new(ts.clone(), 2).is_ok());
                // for strict f the recovered chain is the whole tight set
                let mut all = tight_tuples_dense(&next.x, f, BUDGET).unwrap();
                let mut sorted = ts.clone();
                all.sort_by_key(|t| t.index());
                sorted.sort_by_key(|t| t.index());
                prop_assert_eq!(sorted, all);
                for t in &ts {
                    prop_assert_eq!(next.x.eval(t), Rat::from_int(f.eval(t)));
                }
                prop_assert!(is_member_dense(&next.x, f, BUDGET).unwrap().is_member());
                state = next;
            }
        }
    }
    prop_assert!(false, "walk did not terminate");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn vertex_walk_matches_dense(
        shape in prop_oneof![Just((1, 3)), Just((2, 3)), Just((1, 4)), Just((2, 4))],
        seed in 0u64..1_000_000,
        weights in prop::collection::vec(0i64..4, 8),
    ) {
        let (n, k) = shape;
        let f = strictify(normalize(gen(n, k, 10, seed))).unwrap();
        let c = PVector::from_ints(n, k, &weights[..n * k]).unwrap();
        check_walk(&f, &c)?;
    }

    #[test]
    fn optimize_p_matches_dense(
        shape in prop_oneof![Just((1, 3)), Just((2, 3)), Just((1, 4))],
        seed in 0u64..1_000_000,
        weights in prop::collection::vec(0i64..4, 8),
    ) {
        let (n, k) = shape;
        let f = normalize(gen(n, k, 10, seed));
        let c = PVector::from_ints(n, k, &weights[..n * k]).unwrap();
        let mut stats = MinimizeStats::default();
        match optimize_p(&f, &c, &cfg(), &mut stats).unwrap() {
            POutcome::Optimal { value, point, chain } => {
                prop_assert_eq!(&value, &dense_max(&f, &c));
                prop_assert_eq!(c.dot(&point).unwrap(), value);
                prop_assert!(is_member_dense(&point, &f, BUDGET).unwrap().is_member());
                for tt in &chain {
                    prop_assert_eq!(point.eval(&tt.tuple), Rat::from_int(f.eval(&tt.tuple)));
                }
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

#[test]
fn optimize_p_examples() {
    let mut stats = MinimizeStats::default();
    let ones = vec_i(1, 3, &[1, 1, 1]);
    match optimize_p(&e1(), &ones, &cfg(), &mut stats).unwrap() {
        POutcome::Optimal { value, point, .. } => {
            assert_eq!(value, Rat::new(3, 2));
            assert_eq!(point, vec_r(1, 3, &[(1, 2), (1, 2), (1, 2)]));
        }
        other => panic!("{other:?}"),
    }
    match optimize_p(&e2(), &ones, &cfg(), &mut stats).unwrap() {
        POutcome::Optimal { value, point, .. } => {
            assert_eq!(value, Rat::from_int(-3));
            assert_eq!(point, vec_i(1, 3, &[-1, -1, -1]));
        }
        other => panic!("{other:?}"),
    }
    // fractional objectives are scaled, not rejected
    let c = vec_r(1, 3, &[(1, 3), (1, 3), (1, 3)]);
    assert!(matches!(optimize_p(&e1(), &c, &cfg(), &mut stats).unwrap(), POutcome::Optimal { value, .. } if value == Rat::new(1, 2)));
    match optimize_p(&e1(), &vec_i(1, 3, &[1, -1, 0]), &cfg(), &mut stats).unwrap() {
        POutcome::Unbounded { ray } => assert!(ray.is_nonpositive() && ray.get(0, 2).is_negative()),
        other => panic!("{other:?}"),
    }
    let neg = table(1, 3, |t| if t.is_bottom() { -1 } else { 0 });
    assert_eq!(optimize_p(&neg, &ones, &cfg(), &mut stats).unwrap(), POutcome::Empty);
    assert!(optimize_p(&e1(), &vec_i(2, 3, &[1; 6]), &cfg(), &mut stats).is_err());
}

#[test]
fn optimize_p_against_half_grid() {
    let grid = half_grid(3, 4);
    for seed in 0..12u64 {
        let f = normalize(gen(1, 3, 3, seed));
        let c = vec_i(1, 3, &[(seed % 3) as i64, 1, (seed % 2) as i64 + 1]);
        let brute = grid
            .iter()
            .filter_map(|p| {
                let x = PVector::new(1, 3, p.clone()).unwrap();
                is_member_dense(&x, &f, BUDGET).unwrap().is_member().then(|| c.dot(&x).unwrap())
            })
            .max()
            .unwrap();
        let mut stats = MinimizeStats::default();
        let POutcome::Optimal { value, .. } = optimize_p(&f, &c, &cfg(), &mut stats).unwrap() else {
            panic!("bounded");
        };
        assert_eq!(value, brute, "seed {seed}");
    }
}

#[test]
fn separate_zero_examples() {
    let mut stats = MinimizeStats::default();
    assert_eq!(separate_zero(&e1(), &cfg(), &mut stats).unwrap(), ZeroVerdict::Inside);
    match separate_zero(&e2(), &cfg(), &mut stats).unwrap() {
        ZeroVerdict::Violated { tuple, value } => {
            assert!(value < 0);
            assert_eq!(e2().eval(&tuple), value);
        }
        ZeroVerdict::Inside => panic!("E2 takes negative values"),
    }
    let neg = table(1, 3, |t| if t.is_bottom() { -1 } else { 5 });
    assert!(matches!(separate_zero(&neg, &cfg(), &mut stats).unwrap(), ZeroVerdict::Violated { tuple, .. } if tuple.is_bottom()));
    assert!(stats.separations >= 2);
}

#[test]
fn separate_zero_matches_minimum() {
    for seed in 0..40u64 {
        let (n, k) = [(1, 3), (2, 3), (3, 3), (1, 4), (2, 5)][seed as usize % 5];
        let base = gen(n, k, 12, seed);
        let (min, _) = brute_min(&base, BUDGET).unwrap();
        for delta in [-min, -min - 1] {
            let f = shift(&base, delta);
            let mut stats = MinimizeStats::default();
            for engine in [Engine::CuttingPlane, Engine::Ellipsoid] {
                let c = MinimizeConfig { engine, ..cfg() };
                match separate_zero(&f, &c, &mut stats).unwrap() {
                    ZeroVerdict::Inside => assert!(min + delta >= 0),
                    ZeroVerdict::Violated { tuple, value } => {
                        assert!(min + delta < 0);
                        assert_eq!(f.eval(&tuple), value);
                        assert!(value < 0);
                    }
                }
            }
        }
    }
}

#[test]
fn min_value_matches_brute() {
    for seed in 0..30u64 {
        let (n, k) = [(1, 3), (2, 3), (3, 3), (2, 4), (1, 5)][seed as usize % 5];
        let f = gen(n, k, 20, seed);
        let mut stats = MinimizeStats::default();
        assert_eq!(min_value(&f, &cfg(), &mut stats).unwrap(), brute_min(&f, BUDGET).unwrap().0);
    }
}

#[test]
fn minimize_examples() {
    let r = minimize(&e1(), &cfg()).unwrap();
    assert_eq!((r.min, r.argmin.to_string()), (0, "0".to_string()));
    assert!(r.dual.is_none());
    let r = minimize(&e2(), &cfg()).unwrap();
    assert_eq!((r.min, r.argmin.to_string()), (-2, "1".to_string()));
    let r = minimize(&constant(3, 3, 5), &cfg()).unwrap();
    assert_eq!((r.min, r.argmin.clone()), (5, LatticeTuple::bottom(3, 3)));
    // the second coordinate is minimized at a2 and at the top; a2 comes first
    let f = table(2, 3, |t| match t.get(1) {
        ElementKind::Atom(2) | ElementKind::Top => -1,
        _ => 0,
    });
    let r = minimize(&f, &cfg()).unwrap();
    assert_eq!((r.min, r.argmin.to_string()), (-1, "0,a2".to_string()));
}

fn check_dual(f: &TabulatedFunction, min: i64, z: &PVector) {
    // the dual is relative to f - f(0)
    let g = normalize(f);
    let f0 = f.eval(&LatticeTuple::bottom(f.n(), f.k()));
    assert!(is_member_dense(z, &g, BUDGET).unwrap().is_member());
    assert!(z.is_nonpositive());
    assert!(is_unified(z));
    assert_eq!(z.eval(&LatticeTuple::top(f.n(), f.k())), Rat::from_int(min - f0));
    assert_eq!(s_value(z), Rat::from_int(min - f0));
}

#[test]
fn minimize_matches_brute_with_duals() {
    let c = MinimizeConfig { emit_dual: true, ..cfg() };
    for seed in 0..40u64 {
        let (n, k) = sweep_shapes()[seed as usize % 7];
        let f = gen(n, k, 20, 1000 + seed);
        let (min, _) = brute_min(&f, BUDGET).unwrap();
        let r = minimize(&f, &c).unwrap();
        assert_eq!(r.min, min, "seed {seed}");
        assert_eq!(f.eval(&r.argmin), min);
        check_dual(&f, min, r.dual.as_ref().unwrap());
        if let Some(g) = &r.stats.walk.min_gain {
            assert!(g >= &Rat::new(1, 2));
        }
    }
}

#[test]
fn minimize_with_ellipsoid_engine() {
    let c = MinimizeConfig { engine: Engine::Ellipsoid, ..cfg() };
    for seed in 0..10u64 {
        let f = gen(2, 3, 20, 77 + seed);
        let r = minimize(&f, &c).unwrap();
        assert_eq!(r.min, brute_min(&f, BUDGET).unwrap().0);
        assert_eq!(f.eval(&r.argmin), r.min);
    }
}

#[test]
fn trace_records_steps() {
    let c = MinimizeConfig { trace: true, ..cfg() };
    let r = minimize(&gen(2, 3, 20, 3), &c).unwrap();
    assert_eq!(r.stats.walk.trace.len(), r.stats.walk.steps);
    assert!(r.stats.walk.optimizations >= 1);
    let quiet = minimize(&gen(2, 3, 20, 3), &cfg()).unwrap();
    assert!(quiet.stats.walk.trace.is_empty());
    assert_eq!((quiet.min, quiet.argmin), (r.min, r.argmin));
}
