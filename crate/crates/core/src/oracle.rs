//! Value oracles on `M_k^n`, their transforms and brute-force references.

use crate::error::{precondition, Result, SfmError};
use crate::lattice::{enumerate_tuples, space_size, check_budget, ElementKind, LatticeTuple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};
use std::sync::atomic::{AtomicU64, Ordering};

/// An integer-valued function on `M_k^n` accessed by evaluation only.
pub trait Oracle: Send + Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn eval(&self, t: &LatticeTuple) -> i64;
    /// An upper bound on `max |f|` if one is known without enumeration.
    fn value_bound(&self) -> Option<i64> {
        None
    }
}

impl<T: Oracle + ?Sized> Oracle for &T {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn k(&self) -> usize {
        (**self).k()
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        (**self).eval(t)
    }
    fn value_bound(&self) -> Option<i64> {
        (**self).value_bound()
    }
}

impl<T: Oracle + ?Sized> Oracle for Box<T> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn k(&self) -> usize {
        (**self).k()
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        (**self).eval(t)
    }
    fn value_bound(&self) -> Option<i64> {
        (**self).value_bound()
    }
}

/// A complete value table indexed by enumeration position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TabulatedFunction {
    n: usize,
    k: usize,
    values: Vec<i64>,
    max_abs: i64,
}

impl TabulatedFunction {
    pub fn new(n: usize, k: usize, values: Vec<i64>) -> Result<Self> {
        let size = space_size(n, k);
        if n == 0 || k < 3 {
            return precondition(format!("need n >= 1 and k >= 3, got n={n}, k={k}"));
        }
        if values.len() as u128 != size {
            return Err(SfmError::DimensionMismatch { expected: size as usize, got: values.len() });
        }
        let max_abs = values
            .iter()
            .map(|v| v.checked_abs().ok_or_else(|| SfmError::Overflow("value i64::MIN".into())))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(0);
        Ok(TabulatedFunction { n, k, values, max_abs })
    }

    pub fn from_fn(n: usize, k: usize, budget: u128, f: impl Fn(&LatticeTuple) -> i64) -> Result<Self> {
        let values = enumerate_tuples(n, k, budget)?.map(|t| f(&t)).collect();
        Self::new(n, k, values)
    }

    /// Tabulate any oracle.
    pub fn from_oracle(f: &dyn Oracle, budget: u128) -> Result<Self> {
        Self::from_fn(f.n(), f.k(), budget, |t| f.eval(t))
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn max_abs(&self) -> i64 {
        self.max_abs
    }

    pub fn to_json(&self) -> Value {
        let mut vals = Map::new();
        for (i, v) in self.values.iter().enumerate() {
            let t = LatticeTuple::from_index(self.n, self.k, i);
            vals.insert(t.to_string(), Value::from(*v));
        }
        serde_json::json!({ "n": self.n, "k": self.k, "values": Value::Object(vals) })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |name: &str| {
            v.get(name)
                .and_then(Value::as_u64)
                .ok_or_else(|| SfmError::Parse(format!("missing or non-integer field {name:?}")))
        };
        let n = field("n")? as usize;
        let k = field("k")? as usize;
        if n == 0 || !(3..=255).contains(&k) {
            return Err(SfmError::Parse(format!("invalid sizes n={n}, k={k}")));
        }
        let size = space_size(n, k);
        check_budget(size, 1 << 24)?;
        let map = v
            .get("values")
            .and_then(Value::as_object)
            .ok_or_else(|| SfmError::Parse("missing object field \"values\"".into()))?;
        let mut values = vec![None; size as usize];
        for (key, val) in map {
            let t = LatticeTuple::parse(key, k)?;
            if t.n() != n {
                return Err(SfmError::Parse(format!("tuple {key:?} has length {} not {n}", t.n())));
            }
            let x = val
                .as_i64()
                .ok_or_else(|| SfmError::Parse(format!("value for {key:?} is not an integer")))?;
            let slot = &mut values[t.index()];
            if slot.is_some() {
                return Err(SfmError::Parse(format!("duplicate tuple {key:?}")));
            }
            *slot = Some(x);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    SfmError::Parse(format!("missing value for {}", LatticeTuple::from_index(n, k, i)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, k, values)
    }
}

impl Oracle for TabulatedFunction {
    fn n(&self) -> usize {
        self.n
    }
    fn k(&self) -> usize {
        self.k
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        debug_assert_eq!(t.n(), self.n);
        self.values[t.index()]
    }
    fn value_bound(&self) -> Option<i64> {
        Some(self.max_abs)
    }
}

/// A closure-backed oracle.
pub struct FnOracle<F> {
    n: usize,
    k: usize,
    f: F,
    bound: Option<i64>,
}

impl<F: Fn(&LatticeTuple) -> i64 + Send + Sync> FnOracle<F> {
    pub fn new(n: usize, k: usize, f: F) -> Self {
        FnOracle { n, k, f, bound: None }
    }

    pub fn with_bound(mut self, bound: i64) -> Self {
        self.bound = Some(bound);
        self
    }
}

impl<F: Fn(&LatticeTuple) -> i64 + Send + Sync> Oracle for FnOracle<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn k(&self) -> usize {
        self.k
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        (self.f)(t)
    }
    fn value_bound(&self) -> Option<i64> {
        self.bound
    }
}

/// Counts evaluations of the wrapped oracle.
pub struct CountingOracle<O> {
    inner: O,
    calls: AtomicU64,
}

impl<O: Oracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        CountingOracle { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl<O: Oracle> Oracle for CountingOracle<O> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn k(&self) -> usize {
        self.inner.k()
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(t)
    }
    fn value_bound(&self) -> Option<i64> {
        self.inner.value_bound()
    }
}

/// `f - f(0)`.
pub struct Normalized<O> {
    inner: O,
    offset: i64,
}

impl<O: Oracle> Normalized<O> {
    pub fn offset(&self) -> i64 {
        self.offset
    }
}

pub fn normalize<O: Oracle>(f: O) -> Normalized<O> {
    let offset = f.eval(&LatticeTuple::bottom(f.n(), f.k()));
    Normalized { inner: f, offset }
}

impl<O: Oracle> Oracle for Normalized<O> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn k(&self) -> usize {
        self.inner.k()
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        self.inner.eval(t) - self.offset
    }
    fn value_bound(&self) -> Option<i64> {
        self.inner.value_bound().map(|b| b.saturating_mul(2))
    }
}

/// `f + delta`.
pub struct Shifted<O> {
    inner: O,
    delta: i64,
}

pub fn shift<O: Oracle>(f: O, delta: i64) -> Shifted<O> {
    Shifted { inner: f, delta }
}

impl<O: Oracle> Oracle for Shifted<O> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn k(&self) -> usize {
        self.inner.k()
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        self.inner.eval(t) + self.delta
    }
    fn value_bound(&self) -> Option<i64> {
        self.inner.value_bound().map(|b| b.saturating_add(self.delta.saturating_abs()))
    }
}

/// `(n^2 + 1) f(t) + rho(t)(2n - rho(t))`.
pub struct Strictified<O> {
    inner: O,
    mult: i64,
}

impl<O: Oracle> Strictified<O> {
    pub fn multiplier(&self) -> i64 {
        self.mult
    }
}

/// The strictly submodular perturbation; fails when values could overflow.
pub fn strictify<O: Oracle>(f: O) -> Result<Strictified<O>> {
    let n = f.n() as i64;
    strictify_with(f, n * n + 1)
}

/// Strictification with an explicit multiplier `mult >= n^2 + 1`.
pub fn strictify_with<O: Oracle>(f: O, mult: i64) -> Result<Strictified<O>> {
    let n = f.n() as i64;
    if mult < n * n + 1 {
        return precondition(format!("multiplier {mult} below n^2+1"));
    }
    if let Some(b) = f.value_bound() {
        b.checked_mul(mult)
            .and_then(|v| v.checked_add(n * n))
            .ok_or_else(|| SfmError::Overflow(format!("strictify of bound {b} by {mult}")))?;
    }
    Ok(Strictified { inner: f, mult })
}

pub fn rank_penalty(t: &LatticeTuple) -> i64 {
    let r = t.rank() as i64;
    r * (2 * t.n() as i64 - r)
}

impl<O: Oracle> Oracle for Strictified<O> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn k(&self) -> usize {
        self.inner.k()
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        self.mult * self.inner.eval(t) + rank_penalty(t)
    }
    fn value_bound(&self) -> Option<i64> {
        let n = self.n() as i64;
        self.inner.value_bound().map(|b| b.saturating_mul(self.mult).saturating_add(n * n))
    }
}

/// Replaces the value at the bottom by 0. For `f(0) >= 0` this keeps
/// `P_M(f)` and (strict) submodularity.
pub struct ZeroBottom<O> {
    inner: O,
}

pub fn zero_bottom<O: Oracle>(f: O) -> ZeroBottom<O> {
    ZeroBottom { inner: f }
}

impl<O: Oracle> Oracle for ZeroBottom<O> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn k(&self) -> usize {
        self.inner.k()
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        if t.is_bottom() {
            0
        } else {
            self.inner.eval(t)
        }
    }
    fn value_bound(&self) -> Option<i64> {
        self.inner.value_bound()
    }
}

/// `t -> f(prefix ++ t)` on `M_k^(n - |prefix|)`.
pub struct Restricted<O> {
    inner: O,
    prefix: Vec<ElementKind>,
}

pub fn restrict<O: Oracle>(f: O, prefix: Vec<ElementKind>) -> Result<Restricted<O>> {
    if prefix.len() >= f.n() {
        return precondition("restriction must leave at least one free coordinate");
    }
    Ok(Restricted { inner: f, prefix })
}

impl<O: Oracle> Oracle for Restricted<O> {
    fn n(&self) -> usize {
        self.inner.n() - self.prefix.len()
    }
    fn k(&self) -> usize {
        self.inner.k()
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        let mut items = self.prefix.clone();
        items.extend_from_slice(t.items());
        self.inner.eval(&LatticeTuple::from_raw(self.k(), items))
    }
    fn value_bound(&self) -> Option<i64> {
        self.inner.value_bound()
    }
}

/// Largest absolute value, from the hint or by enumeration.
pub fn max_abs(f: &dyn Oracle, budget: u128) -> Result<i64> {
    if let Some(b) = f.value_bound() {
        return Ok(b);
    }
    let mut m = 0i64;
    for t in enumerate_tuples(f.n(), f.k(), budget)? {
        m = m.max(f.eval(&t).saturating_abs());
    }
    Ok(m)
}

/// Result of a submodularity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmodularityReport {
    pub submodular: bool,
    pub strict: bool,
    pub witness: Option<(LatticeTuple, LatticeTuple)>,
}

/// Exhaustive pair check. `strict` in the report refers to incomparable pairs.
pub fn is_submodular(f: &dyn Oracle, budget: u128) -> Result<SubmodularityReport> {
    let size = space_size(f.n(), f.k());
    check_budget(size.saturating_mul(size), budget.saturating_mul(budget))?;
    let table = TabulatedFunction::from_oracle(f, budget)?;
    let tuples: Vec<LatticeTuple> = enumerate_tuples(f.n(), f.k(), budget)?.collect();
    let mut strict = true;
    for (i, s) in tuples.iter().enumerate() {
        for t in &tuples[i + 1..] {
            let lhs = table.eval(&s.meet_unchecked(t)) + table.eval(&s.join_unchecked(t));
            let rhs = table.values[i] + table.eval(t);
            if lhs > rhs {
                return Ok(SubmodularityReport {
                    submodular: false,
                    strict: false,
                    witness: Some((s.clone(), t.clone())),
                });
            }
            if lhs == rhs && !s.leq_unchecked(t) && !t.leq_unchecked(s) {
                strict = false;
            }
        }
    }
    Ok(SubmodularityReport { submodular: true, strict, witness: None })
}

/// Random pair check for spaces too large to square.
pub fn is_submodular_sampled(f: &dyn Oracle, samples: usize, seed: u64) -> SubmodularityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut strict = true;
    for _ in 0..samples {
        let s = random_tuple(&mut rng, f.n(), f.k());
        let t = random_tuple(&mut rng, f.n(), f.k());
        let lhs = f.eval(&s.meet_unchecked(&t)) + f.eval(&s.join_unchecked(&t));
        let rhs = f.eval(&s) + f.eval(&t);
        if lhs > rhs {
            return SubmodularityReport { submodular: false, strict: false, witness: Some((s, t)) };
        }
        if lhs == rhs && !s.leq_unchecked(&t) && !t.leq_unchecked(&s) {
            strict = false;
        }
    }
    SubmodularityReport { submodular: true, strict, witness: None }
}

pub fn random_tuple(rng: &mut impl Rng, n: usize, k: usize) -> LatticeTuple {
    let items = (0..n).map(|_| ElementKind::from_code(rng.gen_range(0..k + 2), k)).collect();
    LatticeTuple::from_raw(k, items)
}

/// `x -> min_{y <= x} f(y)`, tabulated.
pub fn monotone_closure(f: &dyn Oracle, budget: u128) -> Result<TabulatedFunction> {
    let (n, k) = (f.n(), f.k());
    let mut values: Vec<i64> = Vec::with_capacity(space_size(n, k) as usize);
    // Lower covers have smaller indices, so one pass in order suffices.
    for t in enumerate_tuples(n, k, budget)? {
        let mut v = f.eval(&t);
        for c in t.lower_covers() {
            v = v.min(values[c.index()]);
        }
        values.push(v);
    }
    TabulatedFunction::new(n, k, values)
}

/// Global minimum and its first minimizer in enumeration order.
pub fn brute_min(f: &dyn Oracle, budget: u128) -> Result<(i64, LatticeTuple)> {
    brute_min_par(f, budget, 1)
}

/// `brute_min` split over `jobs` threads; the answer does not depend on `jobs`.
pub fn brute_min_par(f: &dyn Oracle, budget: u128, jobs: usize) -> Result<(i64, LatticeTuple)> {
    let (n, k) = (f.n(), f.k());
    let size = space_size(n, k);
    check_budget(size, budget)?;
    let size = size as usize;
    let jobs = jobs.clamp(1, size);
    let chunk = size.div_ceil(jobs);
    let best = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                s.spawn(move || {
                    let mut best: Option<(i64, usize)> = None;
                    for idx in j * chunk..((j + 1) * chunk).min(size) {
                        let v = f.eval(&LatticeTuple::from_index(n, k, idx));
                        if best.map_or(true, |(b, _)| v < b) {
                            best = Some((v, idx));
                        }
                    }
                    best
                })
            })
            .collect();
        handles
            .into_iter()
            .filter_map(|h| h.join().expect("brute-force worker panicked"))
            .min()
    });
    let (v, idx) = best.ok_or_else(|| SfmError::Internal("empty tuple space".into()))?;
    Ok((v, LatticeTuple::from_index(n, k, idx)))
}

/// A deterministic random submodular table with `|f| <= value_bound`.
///
/// Built as a sum of unary submodular terms, concave functions of the rank
/// on random coordinate subsets and a constant. Each draw is checked and
/// rejected on failure.
pub fn random_submodular(n: usize, k: usize, value_bound: i64, seed: u64) -> Result<TabulatedFunction> {
    const ATTEMPTS: usize = 64;
    if value_bound < 0 {
        return precondition("value bound must be non-negative");
    }
    let budget = crate::lattice::DEFAULT_BUDGET.max(space_size(n, k));
    check_budget(space_size(n, k), 1 << 20)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..ATTEMPTS {
        // Shrink the components on later attempts so the bound can be met.
        let scale = (value_bound / (1 + n as i64 + attempt as i64)).max(0);
        let f = draw_sum(&mut rng, n, k, scale, value_bound);
        let table = TabulatedFunction::from_fn(n, k, budget, |t| f(t))?;
        if table.max_abs() > value_bound {
            continue;
        }
        let ok = if space_size(n, k) <= 1300 {
            is_submodular(&table, budget)?.submodular
        } else {
            is_submodular_sampled(&table, 20_000, seed ^ attempt as u64).submodular
        };
        if !ok {
            return Err(SfmError::Internal("generated function failed the submodularity check".into()));
        }
        return Ok(table);
    }
    Err(SfmError::Internal(format!("no instance within bound {value_bound} after {ATTEMPTS} draws")))
}

type Term = Box<dyn Fn(&LatticeTuple) -> i64>;

fn draw_sum(rng: &mut ChaCha8Rng, n: usize, k: usize, scale: i64, bound: i64) -> Term {
    let mut terms: Vec<Term> = Vec::new();
    let w = |rng: &mut ChaCha8Rng| if scale == 0 { 0 } else { rng.gen_range(0..=scale) };
    // Unary terms phi(Top) <= phi(a) + phi(b) - phi(Bottom) for all atoms a != b.
    for i in 0..n {
        let bot = w(rng) - scale / 2;
        let atoms: Vec<i64> = (0..k).map(|_| w(rng) - scale / 2).collect();
        let mut sorted = atoms.clone();
        sorted.sort();
        let top = sorted[0] + sorted[1] - bot - w(rng) / 2;
        terms.push(Box::new(move |t: &LatticeTuple| match t.get(i) {
            ElementKind::Bottom => bot,
            ElementKind::Atom(a) => atoms[a as usize - 1],
            ElementKind::Top => top,
        }));
    }
    // Concave functions of the rank restricted to a coordinate subset.
    let groups = rng.gen_range(1..=n + 1);
    for _ in 0..groups {
        let subset: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        if subset.is_empty() {
            continue;
        }
        let cap = rng.gen_range(0..=2 * subset.len()) as i64;
        let weight = w(rng) / (2 * subset.len() as i64).max(1);
        let capped = rng.gen_bool(0.5);
        terms.push(Box::new(move |t: &LatticeTuple| {
            let r: i64 = subset.iter().map(|&i| t.get(i).rank() as i64).sum();
            if capped {
                weight * r.min(cap)
            } else {
                -weight * (r - cap).max(0)
            }
        }));
    }
    let offset = if bound == 0 { 0 } else { rng.gen_range(-bound / 4..=bound / 4) };
    Box::new(move |t: &LatticeTuple| offset + terms.iter().map(|g| g(t)).sum::<i64>())
}
