#![allow(dead_code)]

use sfm_core::lattice::{ElementKind, LatticeTuple};
use sfm_core::oracle::random_submodular;
use sfm_core::{PVector, Rat, TabulatedFunction};

pub const BUDGET: u128 = 1 << 20;

/// n=1, k=3: 0 at the bottom, 1 elsewhere.
pub fn e1() -> TabulatedFunction {
    TabulatedFunction::from_fn(1, 3, BUDGET, |t| if t.is_bottom() { 0 } else { 1 }).unwrap()
}

/// n=1, k=3: 0 at the bottom, -1 on atoms, -2 at the top.
pub fn e2() -> TabulatedFunction {
    TabulatedFunction::from_fn(1, 3, BUDGET, |t| -(t.rank() as i64)).unwrap()
}

pub fn constant(n: usize, k: usize, c: i64) -> TabulatedFunction {
    TabulatedFunction::from_fn(n, k, BUDGET, |_| c).unwrap()
}

pub fn table(n: usize, k: usize, f: impl Fn(&LatticeTuple) -> i64) -> TabulatedFunction {
    TabulatedFunction::from_fn(n, k, BUDGET, f).unwrap()
}

pub fn vec_i(n: usize, k: usize, v: &[i64]) -> PVector {
    PVector::from_ints(n, k, v).unwrap()
}

pub fn vec_r(n: usize, k: usize, v: &[(i64, i64)]) -> PVector {
    PVector::new(n, k, v.iter().map(|&(p, q)| Rat::new(p, q)).collect()).unwrap()
}

pub fn tup(s: &str, k: usize) -> LatticeTuple {
    LatticeTuple::parse(s, k).unwrap()
}

pub fn atom(a: u8) -> ElementKind {
    ElementKind::Atom(a)
}

pub fn gen(n: usize, k: usize, bound: i64, seed: u64) -> TabulatedFunction {
    random_submodular(n, k, bound, seed).unwrap()
}

/// The instance mix of the oracle-equivalence sweep.
pub fn sweep_shapes() -> Vec<(usize, usize)> {
    vec![(1, 3), (2, 3), (3, 3), (1, 4), (2, 4), (1, 5), (2, 5)]
}

/// Every point of `(1/2) Z^d` with coordinates in `[-r, r]`, flattened.
pub fn half_grid(d: usize, r: i64) -> Vec<Vec<Rat>> {
    let vals: Vec<Rat> = (-2 * r..=2 * r).map(|v| Rat::new(v, 2)).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |v| {
                    let mut p = p.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// A random chain from the bottom to the top: a random maximal chain with a
/// random subset of its interior dropped.
pub fn random_coarse_chain(rng: &mut impl rand::Rng, n: usize, k: usize, keep: f64) -> Vec<LatticeTuple> {
    use rand::seq::SliceRandom;
    let mut moves: Vec<usize> = (0..n).flat_map(|i| [i, i]).collect();
    moves.shuffle(rng);
    let mut t = LatticeTuple::bottom(n, k);
    let mut out = vec![t.clone()];
    for (step, &i) in moves.iter().enumerate() {
        let next = match t.get(i) {
            ElementKind::Bottom => ElementKind::Atom(rng.gen_range(1..=k as u8)),
            _ => ElementKind::Top,
        };
        t.set(i, next);
        if step + 1 == moves.len() || rng.gen_bool(keep) {
            out.push(t.clone());
        }
    }
    out
}

/// Adjusts `x` step by step until it is tight on `chain` for `f` with
/// `f(0) = 0`; earlier chain tuples keep their values.
pub fn make_tight(x: &PVector, f: &dyn sfm_core::Oracle, chain: &[LatticeTuple]) -> PVector {
    let mut x = x.clone();
    for w in chain.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let delta = Rat::from_int(f.eval(cur)) - x.eval(cur);
        let i = (0..cur.n()).find(|&i| prev.get(i) != cur.get(i)).expect("chain steps change a coordinate");
        match (prev.get(i), cur.get(i)) {
            (ElementKind::Bottom, ElementKind::Atom(a)) => {
                let v = x.get(i, a as usize) + &delta;
                x.set(i, a as usize, v);
            }
            (ElementKind::Bottom, ElementKind::Top) => {
                let half = &delta / &Rat::from_int(2);
                for a in 1..=x.k() {
                    let v = x.get(i, a) + &half;
                    x.set(i, a, v);
                }
            }
            (ElementKind::Atom(a), ElementKind::Top) => {
                // keep x(i,a); one other atom completes the pair, the rest stay below
                let a = a as usize;
                let ((_, _), pair) = x.top_pair(i);
                let target = pair + &delta;
                let xa = x.get(i, a).clone();
                let partner = &target - &xa;
                let low = if xa < partner { xa.clone() } else { partner.clone() };
                let b_star = if a == 1 { 2 } else { 1 };
                for b in 1..=x.k() {
                    if b == b_star {
                        x.set(i, b, partner.clone());
                    } else if b != a {
                        let v = if x.get(i, b) < &low { x.get(i, b).clone() } else { low.clone() };
                        x.set(i, b, v);
                    }
                }
            }
            other => panic!("not a chain step: {other:?}"),
        }
    }
    x
}

/// A random submodular set function on `m` elements: weighted cut plus a
/// concave function of a weighted cardinality plus a modular term.
#[derive(Clone, Debug)]
pub struct SetInstance {
    m: usize,
    edges: Vec<(usize, usize, i64)>,
    weights: Vec<i64>,
    modular: Vec<Rat>,
}

impl SetInstance {
    pub fn random(m: usize, seed: u64) -> SetInstance {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                if rng.gen_bool(0.3) {
                    edges.push((a, b, rng.gen_range(0..4)));
                }
            }
        }
        let weights = (0..m).map(|_| rng.gen_range(0..3)).collect();
        let modular = (0..m).map(|_| Rat::new(rng.gen_range(-8..=8), 2)).collect();
        SetInstance { m, edges, weights, modular }
    }

    pub fn value(&self, s: u64) -> Rat {
        let inside = |e: usize| s >> e & 1 == 1;
        let cut: i64 = self.edges.iter().filter(|(a, b, _)| inside(*a) != inside(*b)).map(|e| e.2).sum();
        let w: i64 = (0..self.m).filter(|&e| inside(e)).map(|e| self.weights[e]).sum();
        // min(w, 3) is concave in w
        let concave = w.min(3);
        let modular: Rat = (0..self.m).filter(|&e| inside(e)).map(|e| self.modular[e].clone()).sum();
        Rat::from_int(cut + concave) + modular
    }

    pub fn oracle(&self) -> sfm_core::setsfm::FnSetOracle<impl Fn(u64) -> Rat + '_> {
        sfm_core::setsfm::FnSetOracle { m: self.m, f: move |s| self.value(s) }
    }
}
