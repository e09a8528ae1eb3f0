//! Submodular set function minimization on ground sets of up to 64 elements.
//!
//! Subsets are `u64` bit masks. Two backends: exhaustive enumeration, and
//! the Fujishige-Wolfe minimum-norm base algorithm in exact arithmetic.

use crate::error::{precondition, Result, SfmError};
use crate::lpengine::{solve_lp_dense, LinearSystem, LpOutcome, Relation};
use crate::rational::Rat;
use num_traits::{One, Zero};

pub trait SetOracle {
    fn ground_size(&self) -> usize;
    fn eval(&self, set: u64) -> Rat;
}

/// A closure-backed set function.
pub struct FnSetOracle<F> {
    pub m: usize,
    pub f: F,
}

impl<F: Fn(u64) -> Rat> SetOracle for FnSetOracle<F> {
    fn ground_size(&self) -> usize {
        self.m
    }
    fn eval(&self, set: u64) -> Rat {
        (self.f)(set)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Backend {
    Exhaustive,
    #[default]
    MinNorm,
}

impl std::str::FromStr for Backend {
    type Err = SfmError;
    fn from_str(s: &str) -> Result<Backend> {
        match s {
            "exhaustive" => Ok(Backend::Exhaustive),
            "minnorm" => Ok(Backend::MinNorm),
            _ => Err(SfmError::Parse(format!("unknown set backend {s:?}"))),
        }
    }
}

pub const EXHAUSTIVE_LIMIT: usize = 20;
const MINNORM_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetMin {
    pub set: u64,
    pub value: Rat,
}

fn full(m: usize) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

/// Minimum value and a minimizer. The exhaustive backend returns the
/// numerically smallest minimizing mask.
pub fn min_set(g: &dyn SetOracle, backend: Backend) -> Result<SetMin> {
    let m = g.ground_size();
    if m > 64 {
        return precondition("ground sets are limited to 64 elements");
    }
    if m == 0 {
        return Ok(SetMin { set: 0, value: g.eval(0) });
    }
    match backend {
        Backend::Exhaustive => exhaustive(g),
        Backend::MinNorm => min_norm(g),
    }
}

fn exhaustive(g: &dyn SetOracle) -> Result<SetMin> {
    let m = g.ground_size();
    if m > EXHAUSTIVE_LIMIT {
        return Err(SfmError::BudgetExceeded { needed: 1u128 << m, budget: 1u128 << EXHAUSTIVE_LIMIT });
    }
    let mut best = SetMin { set: 0, value: g.eval(0) };
    for s in 1..=full(m) {
        let v = g.eval(s);
        if v < best.value {
            best = SetMin { set: s, value: v };
        }
    }
    Ok(best)
}

/// Greedy base vertex for ordering `order`, relative to `g(empty)`.
fn greedy_vertex(g: &dyn SetOracle, order: &[usize], g0: &Rat) -> Vec<Rat> {
    let mut x = vec![Rat::zero(); g.ground_size()];
    let mut s = 0u64;
    let mut prev = g0.clone();
    for &e in order {
        s |= 1 << e;
        let v = g.eval(s);
        x[e] = &v - &prev;
        prev = v;
    }
    x
}

fn vdot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The vertex minimizing `<w, q>` over the base polytope.
fn linear_min(g: &dyn SetOracle, w: &[Rat], g0: &Rat) -> Vec<Rat> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[a].cmp(&w[b]).then(a.cmp(&b)));
    greedy_vertex(g, &order, g0)
}

/// Affine minimizer of the norm over the points: solves the bordered Gram system.
fn affine_min_norm(points: &[Vec<Rat>]) -> Option<Vec<Rat>> {
    let k = points.len();
    let mut a = vec![vec![Rat::zero(); k + 2]; k + 1];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = vdot(&points[i], &points[j]);
        }
        a[i][k] = Rat::one();
        a[k][i] = Rat::one();
    }
    a[k][k + 1] = Rat::one();
    solve_square(a).map(|mut sol| {
        sol.truncate(k);
        sol
    })
}

/// Gauss-Jordan on an augmented matrix; `None` if singular.
fn solve_square(mut a: Vec<Vec<Rat>>) -> Option<Vec<Rat>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        let prow = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, p) in row.iter_mut().zip(&prow) {
                    if !p.is_zero() {
                        *v -= &f * p;
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

fn combo(points: &[Vec<Rat>], w: &[Rat]) -> Vec<Rat> {
    let m = points[0].len();
    let mut x = vec![Rat::zero(); m];
    for (p, c) in points.iter().zip(w) {
        if c.is_zero() {
            continue;
        }
        for (xi, pi) in x.iter_mut().zip(p) {
            *xi += c * pi;
        }
    }
    x
}

/// The exact minimum-norm point of the base polytope of `g - g(empty)`.
pub fn min_norm_point(g: &dyn SetOracle) -> Result<Vec<Rat>> {
    let m = g.ground_size();
    let g0 = g.eval(0);
    let order: Vec<usize> = (0..m).collect();
    let mut corral = vec![greedy_vertex(g, &order, &g0)];
    let mut w = vec![Rat::one()];
    let mut x = corral[0].clone();
    for _ in 0..MINNORM_CAP {
        let q = linear_min(g, &x, &g0);
        // Optimality: <x, q> >= <x, x>.
        if vdot(&x, &q) >= vdot(&x, &x) {
            return Ok(x);
        }
        if corral.contains(&q) {
            return Err(SfmError::Internal("min-norm step repeated a corral vertex".into()));
        }
        corral.push(q);
        w.push(Rat::zero());
        // Minor cycles.
        loop {
            let alpha = affine_min_norm(&corral)
                .ok_or_else(|| SfmError::Internal("corral lost affine independence".into()))?;
            if alpha.iter().all(|a| a.is_positive()) {
                w = alpha;
                break;
            }
            // Step from w toward alpha until a weight hits zero.
            let mut theta = Rat::one();
            for (wi, ai) in w.iter().zip(&alpha) {
                if !ai.is_positive() {
                    let t = wi / (wi - ai);
                    if t < theta {
                        theta = t;
                    }
                }
            }
            let nw: Vec<Rat> = w.iter().zip(&alpha).map(|(wi, ai)| wi + &theta * (ai - wi)).collect();
            let mut keep_c = Vec::new();
            let mut keep_w = Vec::new();
            for (p, wi) in corral.into_iter().zip(nw) {
                if wi.is_positive() {
                    keep_c.push(p);
                    keep_w.push(wi);
                }
            }
            corral = keep_c;
            w = keep_w;
        }
        x = combo(&corral, &w);
    }
    Err(SfmError::IterationCap(MINNORM_CAP))
}

fn min_norm(g: &dyn SetOracle) -> Result<SetMin> {
    let x = min_norm_point(g)?;
    let mut set = 0u64;
    for (e, v) in x.iter().enumerate() {
        if v.is_negative() {
            set |= 1 << e;
        }
    }
    let value = g.eval(set);
    let dual: Rat = x.iter().filter(|v| v.is_negative()).sum::<Rat>() + g.eval(0);
    if dual != value {
        return Err(SfmError::Internal(
            "min-norm duality gap: the set function is not submodular".into(),
        ));
    }
    Ok(SetMin { set, value })
}

/// The restriction `Y -> g(A | Y)` on the free elements `B \ A`.
struct Interval<'a> {
    g: &'a dyn SetOracle,
    base: u64,
    free: Vec<usize>,
}

impl Interval<'_> {
    fn lift(&self, y: u64) -> u64 {
        let mut s = self.base;
        for (i, &e) in self.free.iter().enumerate() {
            if y >> i & 1 == 1 {
                s |= 1 << e;
            }
        }
        s
    }
}

impl SetOracle for Interval<'_> {
    fn ground_size(&self) -> usize {
        self.free.len()
    }
    fn eval(&self, y: u64) -> Rat {
        self.g.eval(self.lift(y))
    }
}

/// Minimum over `{Y : A <= Y <= B}`.
pub fn min_over_interval(g: &dyn SetOracle, a: u64, b: u64, backend: Backend) -> Result<SetMin> {
    if a & !b != 0 {
        return precondition("interval lower bound is not contained in the upper bound");
    }
    let free: Vec<usize> = (0..64).filter(|&e| (b & !a) >> e & 1 == 1).collect();
    let r = Interval { g, base: a, free };
    let res = min_set(&r, backend)?;
    Ok(SetMin { set: r.lift(res.set), value: res.value })
}

/// Every minimizer in `[A, B]`, at most `cap` of them, in increasing mask order.
pub fn all_minimizers(g: &dyn SetOracle, a: u64, b: u64, backend: Backend, cap: usize) -> Result<Vec<u64>> {
    let best = min_over_interval(g, a, b, backend)?;
    let mut out = Vec::new();
    collect(g, a, b, &best.value, backend, cap, &mut out)?;
    out.sort_unstable();
    Ok(out)
}

fn collect(
    g: &dyn SetOracle,
    a: u64,
    b: u64,
    target: &Rat,
    backend: Backend,
    cap: usize,
    out: &mut Vec<u64>,
) -> Result<()> {
    if a == b {
        if &g.eval(a) == target {
            if out.len() >= cap {
                return Err(SfmError::BudgetExceeded { needed: cap as u128 + 1, budget: cap as u128 });
            }
            out.push(a);
        }
        return Ok(());
    }
    if &min_over_interval(g, a, b, backend)?.value != target {
        return Ok(());
    }
    let e = (b & !a).trailing_zeros();
    collect(g, a | 1 << e, b, target, backend, cap, out)?;
    collect(g, a, b & !(1 << e), target, backend, cap, out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdmondsReport {
    pub min: Rat,
    pub dual: Rat,
    pub holds: bool,
}

/// Checks `min g = max { x^-(V) : x in B(g) } + g(empty)`.
///
/// Weak duality is checked at every greedy vertex examined. Equality needs a
/// convex combination of greedy vertices in general: up to 6 elements the
/// maximum is computed by an LP over all orderings; beyond that it is read
/// off the minimum-norm base.
pub fn edmonds_check(g: &dyn SetOracle) -> Result<EdmondsReport> {
    let m = g.ground_size();
    if m > 12 {
        return Err(SfmError::BudgetExceeded { needed: m as u128, budget: 12 });
    }
    let g0 = g.eval(0);
    let min = exhaustive(g)?.value;
    let neg_sum = |x: &[Rat]| -> Rat { x.iter().filter(|v| v.is_negative()).sum::<Rat>() + &g0 };
    let mut weak = true;
    let dual = if m <= 6 {
        let mut verts: Vec<Vec<Rat>> = Vec::new();
        let mut order: Vec<usize> = (0..m).collect();
        loop {
            let v = greedy_vertex(g, &order, &g0);
            weak &= neg_sum(&v) <= min;
            if !verts.contains(&v) {
                verts.push(v);
            }
            if !next_permutation(&mut order) {
                break;
            }
        }
        // max sum_e z_e  s.t.  z <= sum_j mu_j v_j,  z <= 0,  mu in the simplex.
        let nv = verts.len();
        let mut sys = LinearSystem::new(m + nv);
        for e in 0..m {
            sys.set_bounds(e, None, Some(Rat::zero()));
            let mut row = vec![Rat::zero(); m + nv];
            row[e] = Rat::one();
            for (j, v) in verts.iter().enumerate() {
                row[m + j] = -&v[e];
            }
            sys.add_row(row, Relation::Le, Rat::zero());
        }
        for j in 0..nv {
            sys.set_bounds(m + j, Some(Rat::zero()), None);
        }
        let mut simplex = vec![Rat::zero(); m + nv];
        for j in 0..nv {
            simplex[m + j] = Rat::one();
        }
        sys.add_row(simplex, Relation::Eq, Rat::one());
        let mut obj = vec![Rat::zero(); m + nv];
        for o in obj.iter_mut().take(m) {
            *o = Rat::one();
        }
        match solve_lp_dense(&sys, &obj) {
            LpOutcome::Optimal { value, .. } => value + &g0,
            _ => return Err(SfmError::Internal("duality LP has no optimum".into())),
        }
    } else {
        let x = min_norm_point(g)?;
        neg_sum(&x)
    };
    Ok(EdmondsReport { holds: weak && dual == min, min, dual })
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
