//! Membership in `P_M(f)` for a vector that is tight on a chain from the
//! bottom to the top: only tuples between consecutive chain members need
//! checking, and each such interval reduces to set function minimization.

use crate::error::{precondition, Result};
use crate::lattice::{ElementKind, LatticeTuple};
use crate::oracle::Oracle;
use crate::polytope::{best_selector, AtomPairSelector, Choice, PVector};
use crate::rational::Rat;
use crate::setsfm::{min_set, Backend, SetOracle};

/// A weakly increasing chain `0 = t_1 <= ... <= t_m = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightChain {
    tuples: Vec<LatticeTuple>,
    jump_bound: usize,
}

impl TightChain {
    /// Validates the chain shape; tightness is checked by [`chain_separate`].
    pub fn new(tuples: Vec<LatticeTuple>, jump_bound: usize) -> Result<Self> {
        let (Some(first), Some(last)) = (tuples.first(), tuples.last()) else {
            return precondition("empty chain");
        };
        if !first.is_bottom() || !last.is_top() {
            return precondition("chain must run from the bottom to the top");
        }
        for w in tuples.windows(2) {
            if !w[0].leq(&w[1])? {
                return precondition(format!("chain not increasing at {} -> {}", w[0], w[1]));
            }
            let j = w[0].jumps_to(&w[1]).len();
            if j > jump_bound {
                return precondition(format!("{j} jumps between {} and {}", w[0], w[1]));
            }
        }
        Ok(TightChain { tuples, jump_bound })
    }

    pub fn tuples(&self) -> &[LatticeTuple] {
        &self.tuples
    }

    pub fn jump_bound(&self) -> usize {
        self.jump_bound
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainVerdict {
    Member,
    Violated { tuple: LatticeTuple, selector: AtomPairSelector },
}

impl ChainVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, ChainVerdict::Member)
    }
}

/// Tuples of an interval `[a, b]`: jump coordinates take any value `z`,
/// the other changed coordinates are switched on by a subset `Y`.
pub(crate) struct Segment<'a> {
    pub a: &'a LatticeTuple,
    pub b: &'a LatticeTuple,
    pub jumps: Vec<usize>,
    pub binary: Vec<usize>,
}

impl<'a> Segment<'a> {
    pub fn new(a: &'a LatticeTuple, b: &'a LatticeTuple) -> Segment<'a> {
        let jumps = a.jumps_to(b);
        let binary = (0..a.n()).filter(|&i| a.get(i) != b.get(i) && !jumps.contains(&i)).collect();
        Segment { a, b, jumps, binary }
    }

    /// All assignments to the jump coordinates, in enumeration order.
    pub fn jump_values(&self) -> Vec<Vec<ElementKind>> {
        let k = self.a.k();
        let mut out = vec![Vec::new()];
        for _ in &self.jumps {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..k + 2).map(move |c| {
                        let mut p = p.clone();
                        p.push(ElementKind::from_code(c, k));
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn tuple(&self, z: &[ElementKind], y: u64) -> LatticeTuple {
        let mut t = self.a.clone();
        for (&i, &e) in self.jumps.iter().zip(z) {
            t.set(i, e);
        }
        for (bit, &i) in self.binary.iter().enumerate() {
            if y >> bit & 1 == 1 {
                t.set(i, self.b.get(i));
            }
        }
        t
    }
}

/// `Y -> f(t(z, Y)) - x(t(z, Y))` on one segment.
pub(crate) struct SlackFn<'a> {
    pub seg: &'a Segment<'a>,
    pub z: &'a [ElementKind],
    pub f: &'a dyn Oracle,
    pub x: &'a PVector,
}

impl SetOracle for SlackFn<'_> {
    fn ground_size(&self) -> usize {
        self.seg.binary.len()
    }
    fn eval(&self, y: u64) -> Rat {
        let t = self.seg.tuple(self.z, y);
        Rat::from_int(self.f.eval(&t)) - self.x.eval(&t)
    }
}

/// Decides `x in P_M(f)` given that `x` is tight on every chain tuple.
pub fn chain_separate(x: &PVector, f: &dyn Oracle, chain: &TightChain, backend: Backend) -> Result<ChainVerdict> {
    let (n, k) = (f.n(), f.k());
    let bottom = LatticeTuple::bottom(n, k);
    if f.eval(&bottom) < 0 {
        let selector = AtomPairSelector { choices: vec![Choice::Skip; n] };
        return Ok(ChainVerdict::Violated { tuple: bottom, selector });
    }
    for t in chain.tuples() {
        if x.eval(t) != Rat::from_int(f.eval(t)) {
            return precondition(format!("chain tuple {t} is not tight"));
        }
    }
    for w in chain.tuples().windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let seg = Segment::new(&w[0], &w[1]);
        for z in seg.jump_values() {
            let g = SlackFn { seg: &seg, z: &z, f, x };
            let m = min_set(&g, backend)?;
            if m.value.is_negative() {
                let tuple = seg.tuple(&z, m.set);
                let (selector, _) = best_selector(x, &tuple);
                return Ok(ChainVerdict::Violated { tuple, selector });
            }
        }
    }
    Ok(ChainVerdict::Member)
}
