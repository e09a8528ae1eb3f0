//! Minimization through separation of the zero vector from `P_M(f)`.
//!
//! Optimization over `P_M(f)` walks between vertices of the polyhedron of a
//! strictly submodular perturbation; membership of `0` is decided by column
//! generation on top of it, and the minimum value by binary search.

pub mod chain;
pub mod walk;

pub use chain::{chain_separate, ChainVerdict, TightChain};
pub use walk::{
    face_optimize, greedy_state, improve_vertex, improving_direction, optimize_strict, Direction, FaceOutcome, Step,
    StrictOutcome, TightTuple, VertexState, WalkStats,
};

use crate::error::{internal, Result, SfmError};
use crate::greedy::{dual_lower_bound, greedy_base};
use crate::lattice::{ElementKind, LatticeTuple};
use crate::lpengine::{membership_from_optimization, Engine, OptAnswer, OptimizationOracle, ZeroMembership};
use crate::oracle::{normalize, restrict, shift, strictify, strictify_with, zero_bottom, FnOracle, Oracle};
use crate::polytope::PVector;
use crate::rational::{common_denominator, Rat};
use crate::setsfm::Backend;
use std::collections::HashMap;
use walk::{chain_system, solve_unique};

#[derive(Clone, Debug)]
pub struct MinimizeConfig {
    pub backend: Backend,
    /// Engine of the outer column generation.
    pub engine: Engine,
    /// Vertex steps per strict optimization.
    pub max_steps: usize,
    /// Rounds of column generation per separation.
    pub max_rounds: usize,
    pub trace: bool,
    pub emit_dual: bool,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            backend: Backend::MinNorm,
            engine: Engine::CuttingPlane,
            max_steps: 1_000_000,
            max_rounds: 100_000,
            trace: false,
            emit_dual: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MinimizeStats {
    pub separations: usize,
    pub walk: WalkStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum POutcome {
    Empty,
    Unbounded { ray: PVector },
    Optimal { value: Rat, point: PVector, chain: Vec<TightTuple> },
}

/// Maximize `<c, y>` over `P_M(f)` for submodular integer-valued `f`.
///
/// The optimum is found for `M f + rho(2n - rho)` and mapped back by
/// solving its tight selectors against `f`; `M` doubles until the mapped
/// point is feasible.
pub fn optimize_p(f: &dyn Oracle, c: &PVector, cfg: &MinimizeConfig, stats: &mut MinimizeStats) -> Result<POutcome> {
    let (n, k) = (f.n(), f.k());
    if c.n() != n || c.k() != k {
        return Err(SfmError::DimensionMismatch { expected: n * k, got: c.dim() });
    }
    if f.eval(&LatticeTuple::bottom(n, k)) < 0 {
        return Ok(POutcome::Empty);
    }
    if let Some(j) = c.entries().iter().position(Rat::is_negative) {
        let mut ray = PVector::zero(n, k);
        ray.set(j / k, j % k + 1, Rat::from_int(-1));
        return Ok(POutcome::Unbounded { ray });
    }
    let den = Rat::from_bigint(common_denominator(c.entries()));
    let ci = c.scale(&den);
    let g = zero_bottom(f);
    let mut mult = (n * n + 1) as i64;
    loop {
        let fs = strictify_with(&g, mult)?;
        let state = match optimize_strict(&fs, &ci, None, cfg, &mut stats.walk)? {
            StrictOutcome::Optimal(s) => s,
            StrictOutcome::Unbounded(_) => return internal("non-negative objective unbounded"),
        };
        let (rows, rhs) = chain_system(&state.chain, &g);
        if let Some(y) = solve_unique(&rows, &rhs) {
            let y = PVector::new(n, k, y)?;
            let tuples = state.chain_tuples();
            // A pair outside the chain's selectors may overshoot f at a Top.
            let tight = tuples.iter().all(|t| y.eval(t) == Rat::from_int(g.eval(t)));
            let feasible = match TightChain::new(tuples.clone(), n) {
                Ok(ch) if tight => chain_separate(&y, &g, &ch, cfg.backend)?.is_member(),
                _ => false,
            };
            if feasible {
                let value = c.dot(&y)?;
                let chain = tuples.iter().map(|t| TightTuple::of(&y, t)).collect();
                return Ok(POutcome::Optimal { value, point: y, chain });
            }
        }
        mult = mult
            .checked_mul(2)
            .ok_or_else(|| SfmError::Overflow("perturbation multiplier".into()))?;
    }
}

/// Optimization oracle over a strictly submodular `f` with `f(0) = 0`,
/// warm-started from its previous optimum.
struct StrictOpt<'a> {
    f: &'a dyn Oracle,
    cfg: &'a MinimizeConfig,
    stats: &'a mut MinimizeStats,
    last: Option<VertexState>,
}

impl OptimizationOracle for StrictOpt<'_> {
    fn dim(&self) -> usize {
        self.f.n() * self.f.k()
    }
    fn maximize(&mut self, c: &[Rat]) -> Result<OptAnswer> {
        let c = PVector::new(self.f.n(), self.f.k(), c.to_vec())?;
        match optimize_strict(self.f, &c, self.last.take(), self.cfg, &mut self.stats.walk)? {
            StrictOutcome::Unbounded(ray) => Ok(OptAnswer::Unbounded { ray: ray.into_entries() }),
            StrictOutcome::Optimal(state) => {
                let value = c.dot(&state.x)?;
                let tight = state.chain.iter().map(|t| (t.tuple.clone(), self.f.eval(&t.tuple))).collect();
                let point = state.x.entries().to_vec();
                self.last = Some(state);
                Ok(OptAnswer::Optimal { point, value, tight })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroVerdict {
    Inside,
    /// `f(tuple) = value < 0`.
    Violated { tuple: LatticeTuple, value: i64 },
}

/// Decides `0 in P_M(f)`, i.e. `min f >= 0`.
pub fn separate_zero(f: &dyn Oracle, cfg: &MinimizeConfig, stats: &mut MinimizeStats) -> Result<ZeroVerdict> {
    stats.separations += 1;
    let bottom = LatticeTuple::bottom(f.n(), f.k());
    let f0 = f.eval(&bottom);
    if f0 < 0 {
        return Ok(ZeroVerdict::Violated { tuple: bottom, value: f0 });
    }
    // For integer f, (n^2+1) f + rho(2n - rho) is negative exactly where f is.
    let fs = zero_bottom(strictify(f)?);
    let mut opt = StrictOpt { f: &fs, cfg, stats, last: None };
    match membership_from_optimization(&mut opt, cfg.engine, cfg.max_rounds)? {
        ZeroMembership::Inside { .. } => Ok(ZeroVerdict::Inside),
        ZeroMembership::Violated { tuple, .. } => {
            let value = f.eval(&tuple);
            if value >= 0 {
                return internal(format!("separation returned {tuple} with f = {value}"));
            }
            Ok(ZeroVerdict::Violated { tuple, value })
        }
    }
}

/// `min f` by binary search over shifted separations.
pub fn min_value(f: &dyn Oracle, cfg: &MinimizeConfig, stats: &mut MinimizeStats) -> Result<i64> {
    let offset = f.eval(&LatticeTuple::bottom(f.n(), f.k()));
    let fno = normalize(f);
    let (mut lo, mut hi) = (dual_lower_bound(&fno), 0i64);
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        match separate_zero(&shift(&fno, -mid), cfg, stats)? {
            ZeroVerdict::Inside => lo = mid,
            ZeroVerdict::Violated { tuple, .. } => hi = fno.eval(&tuple),
        }
    }
    Ok(lo + offset)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimizeResult {
    pub min: i64,
    pub argmin: LatticeTuple,
    /// `z <= 0`, unified, in `P_M(f - f(0))` with `z(1) = min f - f(0)`;
    /// only on request.
    pub dual: Option<PVector>,
    pub stats: MinimizeStats,
}

/// Minimum and a minimizer of a submodular integer-valued `f`.
pub fn minimize(f: &dyn Oracle, cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    let (n, k) = (f.n(), f.k());
    let mut stats = MinimizeStats::default();
    let min = min_value(f, cfg, &mut stats)?;
    let mut prefix: Vec<ElementKind> = Vec::with_capacity(n);
    for i in 0..n {
        let mut chosen = None;
        for code in 0..k + 2 {
            let e = ElementKind::from_code(code, k);
            let mut cand = prefix.clone();
            cand.push(e);
            let keeps = if i + 1 == n {
                f.eval(&LatticeTuple::from_raw(k, cand.clone())) == min
            } else {
                let r = restrict(f, cand.clone())?;
                matches!(separate_zero(&shift(&r, -(min + 1)), cfg, &mut stats)?, ZeroVerdict::Violated { .. })
            };
            if keeps {
                chosen = Some(cand);
                break;
            }
        }
        prefix = match chosen {
            Some(p) => p,
            None => return internal(format!("no element of coordinate {i} keeps the minimum {min}")),
        };
    }
    let argmin = LatticeTuple::from_raw(k, prefix);
    let dual = if cfg.emit_dual { Some(dual_vector(f, min, cfg, &mut stats)?) } else { None };
    Ok(MinimizeResult { min, argmin, dual, stats })
}

/// `t -> f(t ++ suffix)`.
struct Suffixed<'a> {
    inner: &'a dyn Oracle,
    suffix: Vec<ElementKind>,
}

impl Oracle for Suffixed<'_> {
    fn n(&self) -> usize {
        self.inner.n() - self.suffix.len()
    }
    fn k(&self) -> usize {
        self.inner.k()
    }
    fn eval(&self, t: &LatticeTuple) -> i64 {
        let mut items = t.items().to_vec();
        items.extend_from_slice(&self.suffix);
        self.inner.eval(&LatticeTuple::from_raw(self.k(), items))
    }
    fn value_bound(&self) -> Option<i64> {
        self.inner.value_bound()
    }
}

/// Greedy vector of the monotone closure `t -> min_{s <= t} f(s)`, with the
/// closure evaluated on the greedy chain by restricted minimization.
fn dual_vector(f: &dyn Oracle, min: i64, cfg: &MinimizeConfig, stats: &mut MinimizeStats) -> Result<PVector> {
    let (n, k) = (f.n(), f.k());
    let offset = f.eval(&LatticeTuple::bottom(n, k));
    let fno = normalize(f);
    let mut table: HashMap<LatticeTuple, i64> = HashMap::new();
    let low = |free: usize, suffix: Vec<ElementKind>, stats: &mut MinimizeStats| -> Result<i64> {
        if free == 0 {
            return Ok(fno.eval(&LatticeTuple::from_raw(k, suffix)));
        }
        min_value(&Suffixed { inner: &fno, suffix }, cfg, stats)
    };
    let mut v_prev = 0i64;
    for i in 0..n {
        let prefix = vec![ElementKind::Top; i];
        let zeros = |rest: usize| vec![ElementKind::Bottom; rest];
        for a in 1..=k as u8 {
            let mut suffix = vec![ElementKind::Atom(a)];
            suffix.extend(zeros(n - i - 1));
            let ai = low(i, suffix, stats)?;
            let mut t = prefix.clone();
            t.push(ElementKind::Atom(a));
            t.extend(zeros(n - i - 1));
            table.insert(LatticeTuple::from_raw(k, t), v_prev.min(ai));
        }
        let v_next = if i + 1 == n { min - offset } else { low(i + 1, zeros(n - i - 1), stats)? };
        let mut t = prefix;
        t.push(ElementKind::Top);
        t.extend(zeros(n - i - 1));
        table.insert(LatticeTuple::from_raw(k, t), v_next);
        v_prev = v_next;
    }
    table.insert(LatticeTuple::bottom(n, k), 0);
    let closure = FnOracle::new(n, k, move |t: &LatticeTuple| {
        *table.get(t).expect("greedy queries only the prefix chain and its atom neighbours")
    });
    let z = greedy_base(&closure).vector;
    let total = z.eval(&LatticeTuple::top(n, k));
    if total != Rat::from_int(min - offset) || !z.is_nonpositive() {
        return internal(format!("dual vector sums to {total}, expected {}", min - offset));
    }
    Ok(z)
}
