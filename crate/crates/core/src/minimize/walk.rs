//! Walking between vertices of `P_M(f)` for strictly submodular `f`.
//!
//! A vertex is stored with its tight tuples (a chain for strict `f`) and,
//! at every Top coordinate of a tight tuple, the atom pairs attaining the
//! vector's maximum pair sum there. Those data determine all tight
//! selectors without listing them.

use super::chain::{chain_separate, ChainVerdict, Segment, SlackFn, TightChain};
use super::MinimizeConfig;
use crate::error::{internal, Result, SfmError};
use crate::greedy::greedy_base;
use crate::lattice::{ElementKind, LatticeTuple};
use crate::lpengine::{
    oracle_optimize, Engine, OracleOptConfig, OracleOutcome, Relation, Row, SepResult, SeparationOracle,
};
use crate::oracle::Oracle;
use crate::polytope::{best_selector, AtomPairSelector, Choice, PVector};
use crate::rational::Rat;
use crate::setsfm::{all_minimizers, SetOracle};
use num_traits::{One, Zero};

/// A tight tuple with the admissible pairs at its Top coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightTuple {
    pub tuple: LatticeTuple,
    /// Empty except at Top coordinates.
    pub pairs: Vec<Vec<(u8, u8)>>,
}

impl TightTuple {
    pub fn of(x: &PVector, t: &LatticeTuple) -> TightTuple {
        let pairs = (0..t.n())
            .map(|i| if t.get(i) == ElementKind::Top { x.max_pairs(i) } else { Vec::new() })
            .collect();
        TightTuple { tuple: t.clone(), pairs }
    }

    fn selector_with(&self, i: usize, pair: Option<(u8, u8)>) -> AtomPairSelector {
        let choices = self
            .tuple
            .items()
            .iter()
            .enumerate()
            .map(|(j, &e)| match e {
                ElementKind::Bottom => Choice::Skip,
                ElementKind::Atom(a) => Choice::Atom(a),
                ElementKind::Top => {
                    let (a, b) = if j == i { pair.unwrap() } else { self.pairs[j][0] };
                    Choice::Pair(a, b)
                }
            })
            .collect();
        AtomPairSelector { choices }
    }

    pub fn base_selector(&self) -> AtomPairSelector {
        self.selector_with(usize::MAX, None)
    }

    /// The base selector plus every single-coordinate swap of a pair.
    pub fn spanning_selectors(&self) -> Vec<AtomPairSelector> {
        let mut out = vec![self.base_selector()];
        for (i, ps) in self.pairs.iter().enumerate() {
            for &p in ps.iter().skip(1) {
                out.push(self.selector_with(i, Some(p)));
            }
        }
        out
    }

    /// Value of the best admissible selector against `z`, and per coordinate
    /// the admissible pairs attaining it.
    pub fn best_against(&self, z: &PVector) -> (Rat, Vec<Vec<(u8, u8)>>) {
        let mut total = Rat::zero();
        let mut argmax = vec![Vec::new(); self.pairs.len()];
        for (i, &e) in self.tuple.items().iter().enumerate() {
            match e {
                ElementKind::Bottom => {}
                ElementKind::Atom(a) => total += z.get(i, a as usize),
                ElementKind::Top => {
                    let vals: Vec<Rat> =
                        self.pairs[i].iter().map(|&(a, b)| z.get(i, a as usize) + z.get(i, b as usize)).collect();
                    let m = vals.iter().max().unwrap().clone();
                    argmax[i] = self.pairs[i].iter().zip(&vals).filter(|(_, v)| **v == m).map(|(p, _)| *p).collect();
                    total += m;
                }
            }
        }
        (total, argmax)
    }

    /// Rows fixing every admissible selector to the same value: the base
    /// row first, then pair differences (right-hand side zero).
    pub fn equality_rows(&self, n: usize, k: usize) -> Vec<Vec<Rat>> {
        let base = self.base_selector().to_vector(n, k).into_entries();
        let mut rows = vec![base];
        for (i, ps) in self.pairs.iter().enumerate() {
            if let Some(&(a0, b0)) = ps.first() {
                for &(a, b) in ps.iter().skip(1) {
                    let mut r = vec![Rat::zero(); n * k];
                    r[i * k + a as usize - 1] += Rat::one();
                    r[i * k + b as usize - 1] += Rat::one();
                    r[i * k + a0 as usize - 1] -= Rat::one();
                    r[i * k + b0 as usize - 1] -= Rat::one();
                    rows.push(r);
                }
            }
        }
        rows
    }
}

/// A vertex with its complete tight chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexState {
    pub x: PVector,
    pub chain: Vec<TightTuple>,
}

impl VertexState {
    pub fn chain_tuples(&self) -> Vec<LatticeTuple> {
        self.chain.iter().map(|t| t.tuple.clone()).collect()
    }
}

/// The greedy vertex. For strict `f` its chain is maximal and so equals
/// the whole tight set.
pub fn greedy_state(f: &dyn Oracle) -> VertexState {
    let g = greedy_base(f);
    let chain = g.chain.iter().map(|t| TightTuple::of(&g.vector, t)).collect();
    VertexState { x: g.vector, chain }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Direction {
    pub z: PVector,
    /// 0 when the vertex is optimal, 1 otherwise.
    pub value: Rat,
}

struct DirectionSep<'a> {
    chain: &'a [TightTuple],
    n: usize,
    k: usize,
}

impl SeparationOracle for DirectionSep<'_> {
    fn dim(&self) -> usize {
        self.n * self.k
    }
    fn separate(&mut self, point: &[Rat]) -> Result<SepResult> {
        let z = PVector::new(self.n, self.k, point.to_vec())?;
        for tt in self.chain {
            let (v, argmax) = tt.best_against(&z);
            if v.is_positive() {
                let sel = TightTuple { tuple: tt.tuple.clone(), pairs: argmax }.base_selector();
                let row = Row::new(sel.to_vector(self.n, self.k).into_entries(), Relation::Le, Rat::zero());
                return Ok(SepResult::Cut(row));
            }
        }
        Ok(SepResult::Inside)
    }
}

/// `max <c, z>` over `<e, z> <= 0` for all tight `e` and `<c, z> <= 1`.
pub fn improving_direction(state: &VertexState, c: &PVector) -> Result<Direction> {
    let (n, k) = (state.x.n(), state.x.k());
    let mut seeds = Vec::new();
    let mut secondary = vec![Rat::zero(); n * k];
    for tt in &state.chain {
        for sel in tt.spanning_selectors() {
            let row = sel.to_vector(n, k).into_entries();
            for (s, r) in secondary.iter_mut().zip(&row) {
                *s += r;
            }
            seeds.push(Row::new(row, Relation::Le, Rat::zero()));
        }
    }
    seeds.push(Row::new(c.entries().to_vec(), Relation::Le, Rat::one()));
    let cfg = OracleOptConfig {
        engine: Engine::CuttingPlane,
        seed_rows: seeds,
        secondary: Some(secondary),
        ..Default::default()
    };
    let mut sep = DirectionSep { chain: &state.chain, n, k };
    match oracle_optimize(&mut sep, c.entries(), &cfg)? {
        OracleOutcome::Optimal { point, value, .. } => {
            if !value.is_zero() && !value.is_one() {
                return internal(format!("direction value {value} is neither 0 nor 1"));
            }
            Ok(Direction { z: PVector::new(n, k, point)?, value })
        }
        _ => internal("direction LP must have an optimum"),
    }
}

struct FaceSep<'a> {
    f: &'a dyn Oracle,
    face: &'a [TightTuple],
    chain: TightChain,
    cfg: &'a MinimizeConfig,
}

impl SeparationOracle for FaceSep<'_> {
    fn dim(&self) -> usize {
        self.f.n() * self.f.k()
    }
    fn separate(&mut self, point: &[Rat]) -> Result<SepResult> {
        let (n, k) = (self.f.n(), self.f.k());
        let y = PVector::new(n, k, point.to_vec())?;
        // A pair outside the admissible set may not beat the admissible ones.
        for tt in self.face {
            let (sel, v) = best_selector(&y, &tt.tuple);
            let ft = Rat::from_int(self.f.eval(&tt.tuple));
            if v > ft {
                return Ok(SepResult::Cut(Row::new(sel.to_vector(n, k).into_entries(), Relation::Le, ft)));
            }
        }
        match chain_separate(&y, self.f, &self.chain, self.cfg.backend)? {
            ChainVerdict::Member => Ok(SepResult::Inside),
            ChainVerdict::Violated { tuple, selector } => {
                let ft = Rat::from_int(self.f.eval(&tuple));
                Ok(SepResult::Cut(Row::new(selector.to_vector(n, k).into_entries(), Relation::Le, ft)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaceOutcome {
    Optimal(PVector),
    Unbounded(PVector),
}

/// `max <c, y>` over `P_M(f)` with every admissible selector of every face
/// tuple held tight. The face tuples must form a chain from bottom to top
/// with at most two jumps per step.
pub fn face_optimize(c: &PVector, f: &dyn Oracle, face: &[TightTuple], cfg: &MinimizeConfig) -> Result<FaceOutcome> {
    let (n, k) = (f.n(), f.k());
    let mut seeds = Vec::new();
    for tt in face {
        let ft = Rat::from_int(f.eval(&tt.tuple));
        for (idx, row) in tt.equality_rows(n, k).into_iter().enumerate() {
            let rhs = if idx == 0 { ft.clone() } else { Rat::zero() };
            seeds.push(Row::new(row, Relation::Eq, rhs));
        }
    }
    let bottom = LatticeTuple::bottom(n, k);
    for i in 0..n {
        for a in 1..=k {
            let t = bottom.with(i, ElementKind::Atom(a as u8));
            seeds.push(Row::new(
                PVector::unit(n, k, i, a).into_entries(),
                Relation::Le,
                Rat::from_int(f.eval(&t)),
            ));
        }
    }
    let chain = TightChain::new(face.iter().map(|t| t.tuple.clone()).collect(), 2)?;
    let mut sep = FaceSep { f, face, chain, cfg };
    let opt = OracleOptConfig {
        engine: Engine::CuttingPlane,
        seed_rows: seeds,
        secondary: Some(vec![Rat::one(); n * k]),
        ..Default::default()
    };
    match oracle_optimize(&mut sep, c.entries(), &opt)? {
        OracleOutcome::Optimal { point, .. } => Ok(FaceOutcome::Optimal(PVector::new(n, k, point)?)),
        OracleOutcome::Unbounded { ray, .. } => Ok(FaceOutcome::Unbounded(PVector::new(n, k, ray)?)),
        OracleOutcome::Empty => internal("face of a feasible vertex is empty"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Optimal,
    Improved { state: VertexState, gain: Rat },
    Unbounded(PVector),
}

/// All `y`-tight tuples strictly between `a` and `b`.
fn tight_between(y: &PVector, f: &dyn Oracle, a: &LatticeTuple, b: &LatticeTuple, cfg: &MinimizeConfig) -> Result<Vec<LatticeTuple>> {
    let seg = Segment::new(a, b);
    let mut out = Vec::new();
    for z in seg.jump_values() {
        let g = SlackFn { seg: &seg, z: &z, f, x: y };
        let full = if seg.binary.is_empty() { 0 } else { (1u64 << seg.binary.len()) - 1 };
        let mins = all_minimizers(&g, 0, full, cfg.backend, 4 * a.n() + 4)?;
        for m in mins {
            let t = seg.tuple(&z, m);
            if t != *a && t != *b && SetOracle::eval(&g, m).is_zero() {
                out.push(t);
            }
        }
    }
    Ok(out)
}

/// Rank of a set of rows, by exact elimination.
pub(crate) fn row_rank(rows: &[Vec<Rat>]) -> usize {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][col].recip();
        let prow: Vec<Rat> = m[rank].iter().map(|v| v * &inv).collect();
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for (v, pv) in m[r].iter_mut().zip(&prow) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
        }
        m[rank] = prow;
        rank += 1;
    }
    rank
}

/// Unique solution of `rows . y = rhs`, if the rows have full column rank
/// and the system is consistent.
pub(crate) fn solve_unique(rows: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let cols = rows.first()?.len();
    let mut m: Vec<Vec<Rat>> = rows.iter().zip(rhs).map(|(r, b)| {
        let mut r = r.clone();
        r.push(b.clone());
        r
    }).collect();
    let mut rank = 0;
    for col in 0..cols {
        let p = (rank..m.len()).find(|&r| !m[r][col].is_zero())?;
        m.swap(rank, p);
        let inv = m[rank][col].recip();
        let prow: Vec<Rat> = m[rank].iter().map(|v| v * &inv).collect();
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for (v, pv) in m[r].iter_mut().zip(&prow) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
        }
        m[rank] = prow;
        rank += 1;
    }
    if m[rank..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some(m[..cols].iter().map(|r| r[cols].clone()).collect())
}

/// Rows of all admissible selectors of a chain, with right-hand sides from `f`.
pub(crate) fn chain_system(chain: &[TightTuple], f: &dyn Oracle) -> (Vec<Vec<Rat>>, Vec<Rat>) {
    let (n, k) = (f.n(), f.k());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for tt in chain {
        for (idx, r) in tt.equality_rows(n, k).into_iter().enumerate() {
            if r.iter().all(Zero::is_zero) {
                continue;
            }
            rows.push(r);
            rhs.push(if idx == 0 { Rat::from_int(f.eval(&tt.tuple)) } else { Rat::zero() });
        }
    }
    (rows, rhs)
}

fn format_chain(chain: &[TightTuple]) -> String {
    chain.iter().map(|t| t.tuple.to_string()).collect::<Vec<_>>().join(" < ")
}

/// One improvement step from a vertex of `P_M(f)`, `f` strictly submodular
/// and `c` integral.
pub fn improve_vertex(state: &VertexState, f: &dyn Oracle, c: &PVector, cfg: &MinimizeConfig) -> Result<Step> {
    let (n, k) = (f.n(), f.k());
    let dir = improving_direction(state, c)?;
    if dir.value.is_zero() {
        return Ok(Step::Optimal);
    }
    // Tuples whose admissible selectors stay tight along the direction.
    let mut face: Vec<TightTuple> = Vec::new();
    for tt in &state.chain {
        let (v, argmax) = tt.best_against(&dir.z);
        if v.is_zero() {
            face.push(TightTuple { tuple: tt.tuple.clone(), pairs: argmax });
        }
    }
    let ends_ok = face.first().is_some_and(|t| t.tuple.is_bottom()) && face.last().is_some_and(|t| t.tuple.is_top());
    if !ends_ok {
        return internal(format!("direction face misses an end of the chain: {}", format_chain(&face)));
    }
    for w in face.windows(2) {
        let j = w[0].tuple.jumps_to(&w[1].tuple).len();
        if j > 2 {
            return internal(format!("{j} jumps between {} and {}", w[0].tuple, w[1].tuple));
        }
    }
    let y = match face_optimize(c, f, &face, cfg)? {
        FaceOutcome::Optimal(y) => y,
        FaceOutcome::Unbounded(ray) => return Ok(Step::Unbounded(ray)),
    };
    let gain = c.dot(&y)? - c.dot(&state.x)?;
    if gain < Rat::new(1, 2) {
        return internal(format!("improvement step gained only {gain}"));
    }
    let mut tuples: Vec<LatticeTuple> = face.iter().map(|t| t.tuple.clone()).collect();
    for w in face.windows(2) {
        tuples.extend(tight_between(&y, f, &w[0].tuple, &w[1].tuple, cfg)?);
    }
    tuples.sort_by_key(|t| (t.rank(), t.index()));
    tuples.dedup();
    for w in tuples.windows(2) {
        if !w[0].leq_unchecked(&w[1]) {
            return internal(format!("tight tuples {} and {} are incomparable", w[0], w[1]));
        }
    }
    let chain: Vec<TightTuple> = tuples.iter().map(|t| TightTuple::of(&y, t)).collect();
    for tt in &chain {
        if y.eval(&tt.tuple) != Rat::from_int(f.eval(&tt.tuple)) {
            return internal(format!("recovered tuple {} is not tight", tt.tuple));
        }
    }
    let (rows, _) = chain_system(&chain, f);
    if row_rank(&rows) != n * k {
        return internal("recovered tight selectors do not pin a vertex");
    }
    Ok(Step::Improved { state: VertexState { x: y, chain }, gain })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrictOutcome {
    Optimal(VertexState),
    Unbounded(PVector),
}

/// Running totals of the vertex walk.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WalkStats {
    pub optimizations: usize,
    pub steps: usize,
    /// Smallest objective gain of any accepted step.
    pub min_gain: Option<Rat>,
    pub trace: Vec<String>,
}

/// Maximize integral `c >= 0` over `P_M(f)` for strictly submodular `f`.
pub fn optimize_strict(
    f: &dyn Oracle,
    c: &PVector,
    start: Option<VertexState>,
    cfg: &MinimizeConfig,
    stats: &mut WalkStats,
) -> Result<StrictOutcome> {
    if !c.is_integral() {
        return Err(SfmError::Precondition("vertex walk needs an integral objective".into()));
    }
    stats.optimizations += 1;
    let mut state = start.unwrap_or_else(|| greedy_state(f));
    for _ in 0..cfg.max_steps {
        match improve_vertex(&state, f, c, cfg)? {
            Step::Optimal => return Ok(StrictOutcome::Optimal(state)),
            Step::Unbounded(ray) => return Ok(StrictOutcome::Unbounded(ray)),
            Step::Improved { state: next, gain } => {
                stats.steps += 1;
                if stats.min_gain.as_ref().map_or(true, |g| &gain < g) {
                    stats.min_gain = Some(gain.clone());
                }
                if cfg.trace {
                    stats.trace.push(format!("step gain {gain}: x = {}; chain {}", next.x, format_chain(&next.chain)));
                }
                state = next;
            }
        }
    }
    Err(SfmError::IterationCap(cfg.max_steps))
}
