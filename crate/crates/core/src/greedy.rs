//! The greedy base vector and helpers on the dual side.

use crate::error::{precondition, Result, SfmError};
use crate::lattice::{chain_prefix, enumerate_tuples, ElementKind, LatticeTuple};
use crate::oracle::Oracle;
use crate::polytope::{is_member_dense, is_unified, PVector};
use crate::rational::Rat;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyResult {
    pub vector: PVector,
    /// `p_1..p_n`, 1-based atoms.
    pub top_atoms: Vec<u8>,
    /// `v_0, v_0[1=p_1], v_1, ..., v_n`.
    pub chain: Vec<LatticeTuple>,
}

/// Greedy vector along the prefix chain; `O(n k)` oracle calls.
pub fn greedy_base(f: &dyn Oracle) -> GreedyResult {
    let (n, k) = (f.n(), f.k());
    let mut x = PVector::zero(n, k);
    let mut top_atoms = Vec::with_capacity(n);
    let mut chain = Vec::with_capacity(2 * n + 1);
    let mut v = chain_prefix(n, k, 0).expect("valid prefix");
    let mut fv = f.eval(&v);
    for i in 0..n {
        chain.push(v.clone());
        let mut best: Option<(i64, u8)> = None;
        for a in 1..=k as u8 {
            let val = f.eval(&v.with(i, ElementKind::Atom(a)));
            if best.map_or(true, |(b, _)| val > b) {
                best = Some((val, a));
            }
        }
        let (fp, p) = best.unwrap();
        chain.push(v.with(i, ElementKind::Atom(p)));
        let next = v.with(i, ElementKind::Top);
        let fnext = f.eval(&next);
        for a in 1..=k {
            let val = if a == p as usize { fp as i128 - fv as i128 } else { fnext as i128 - fp as i128 };
            x.set(i, a, Rat::from(val as i64));
        }
        top_atoms.push(p);
        v = next;
        fv = fnext;
    }
    chain.push(v);
    GreedyResult { vector: x, top_atoms, chain }
}

/// `x^-(1)` for the greedy vector `x`; at most `min f` when `f(0) = 0`.
pub fn dual_lower_bound(f: &dyn Oracle) -> i64 {
    let g = greedy_base(f);
    let neg = g.vector.negative_part();
    neg.eval(&LatticeTuple::top(f.n(), f.k()))
        .to_i64()
        .expect("greedy vector is integral")
}

/// Largest `alpha` with `x + alpha d` in `P_M(f)`, for `d` supported on
/// coordinate `i`. `None` means unbounded.
fn ratio_test(x: &PVector, d: &PVector, i: usize, f: &dyn Oracle, budget: u128) -> Result<Option<Rat>> {
    let (n, k) = (x.n(), x.k());
    let mut best: Option<Rat> = None;
    for t in enumerate_tuples(n, k, budget)? {
        let options: Vec<(Rat, Rat)> = match t.get(i) {
            ElementKind::Bottom => continue,
            ElementKind::Atom(a) => vec![(x.get(i, a as usize).clone(), d.get(i, a as usize).clone())],
            ElementKind::Top => {
                let mut v = Vec::new();
                for a in 1..=k {
                    for b in a + 1..=k {
                        v.push((x.get(i, a) + x.get(i, b), d.get(i, a) + d.get(i, b)));
                    }
                }
                v
            }
        };
        let rest = x.eval(&t.with(i, ElementKind::Bottom));
        let ft = Rat::from_int(f.eval(&t));
        for (xv, dv) in options {
            if dv.is_positive() {
                let slack = &ft - &rest - xv;
                let alpha = slack / dv;
                if best.as_ref().map_or(true, |b| &alpha < b) {
                    best = Some(alpha);
                }
            }
        }
    }
    Ok(best)
}

fn argmax_atoms(x: &PVector, i: usize) -> Vec<usize> {
    let c = x.coord(i);
    let m = c.iter().max().unwrap();
    (0..c.len()).filter(|&a| &c[a] == m).map(|a| a + 1).collect()
}

/// Raise `z` to a base vector by the two exchange steps run to a fixed point.
pub fn lift_to_base(z: &PVector, f: &dyn Oracle, budget: u128) -> Result<PVector> {
    let (n, k) = (f.n(), f.k());
    if z.n() != n || z.k() != k {
        return Err(SfmError::DimensionMismatch { expected: n * k, got: z.dim() });
    }
    if !z.is_nonpositive() || !is_unified(z) {
        return precondition("lift_to_base needs a non-positive unified vector");
    }
    if !is_member_dense(z, f, budget)?.is_member() {
        return precondition("lift_to_base needs a member of P_M(f)");
    }
    let cap = 64 * n * k * (n * k + 1);
    let mut x = z.clone();
    'outer: for _ in 0..cap {
        // Raise a dominating entry as far as possible.
        for i in 0..n {
            for p in argmax_atoms(&x, i) {
                let d = PVector::unit(n, k, i, p);
                match ratio_test(&x, &d, i, f, budget)? {
                    Some(a) if a.is_positive() => {
                        x = x.add_scaled(&a, &d)?;
                        continue 'outer;
                    }
                    Some(_) => {}
                    None => return Err(SfmError::Internal("unbounded unit direction".into())),
                }
            }
        }
        // Raise the dominated entries together, never past the dominating one.
        for i in 0..n {
            for p in argmax_atoms(&x, i) {
                let mut d = PVector::coord_ones(n, k, i);
                d.set(i, p, Rat::zero());
                let Some(alpha) = ratio_test(&x, &d, i, f, budget)? else {
                    return Err(SfmError::Internal("unbounded exchange direction".into()));
                };
                if !alpha.is_positive() {
                    continue;
                }
                let other = if p == 1 { 2 } else { 1 };
                let gap = x.get(i, p) - x.get(i, other);
                let step = alpha.min(gap);
                if step.is_positive() {
                    x = x.add_scaled(&step, &d)?;
                    continue 'outer;
                }
            }
        }
        return Ok(x);
    }
    Err(SfmError::IterationCap(cap))
}
