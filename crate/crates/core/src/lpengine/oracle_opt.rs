//! Optimization from separation, and membership of the origin from
//! optimization.

use super::ellipsoid::Ellipsoid;
use super::simplex::{feasibility, solve_lp_lex, LpOutcome};
use super::{dot, LinearSystem, Relation, Row};
use crate::error::{internal, precondition, Result, SfmError};
use crate::lattice::LatticeTuple;
use crate::rational::{common_denominator, Rat};
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SepResult {
    Inside,
    /// A `<=` row violated by the query point.
    Cut(Row),
}

pub trait SeparationOracle {
    fn dim(&self) -> usize;
    fn separate(&mut self, point: &[Rat]) -> Result<SepResult>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Exact LP relaxations refined by separation cuts.
    #[default]
    CuttingPlane,
    /// Floating central-cut ellipsoid, rounded to the half grid and
    /// re-verified exactly; falls back to exact cuts when rounding fails.
    Ellipsoid,
}

impl std::str::FromStr for Engine {
    type Err = SfmError;
    fn from_str(s: &str) -> Result<Engine> {
        match s {
            "cuttingplane" => Ok(Engine::CuttingPlane),
            "ellipsoid" => Ok(Engine::Ellipsoid),
            _ => Err(SfmError::Parse(format!("unknown engine {s:?}"))),
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::CuttingPlane => "cuttingplane",
            Engine::Ellipsoid => "ellipsoid",
        })
    }
}

#[derive(Clone, Debug)]
pub struct OracleOptConfig {
    /// Box `|x_j| <= R`; required by the ellipsoid engine.
    pub radius: Option<Rat>,
    pub engine: Engine,
    /// Rows known to be valid, added to every relaxation.
    pub seed_rows: Vec<Row>,
    /// Tie-breaking objective among optima of the main one.
    pub secondary: Option<Vec<Rat>>,
    pub max_rounds: usize,
}

impl Default for OracleOptConfig {
    fn default() -> Self {
        OracleOptConfig {
            radius: None,
            engine: Engine::CuttingPlane,
            seed_rows: Vec::new(),
            secondary: None,
            max_rounds: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Optimal { point: Vec<Rat>, value: Rat, cuts: Vec<Row> },
    Empty,
    Unbounded { point: Vec<Rat>, ray: Vec<Rat> },
}

/// Maximize `objective` over the set described by `sep` (intersected with the
/// seed rows and the box).
pub fn oracle_optimize(
    sep: &mut dyn SeparationOracle,
    objective: &[Rat],
    cfg: &OracleOptConfig,
) -> Result<OracleOutcome> {
    let dim = sep.dim();
    if objective.len() != dim {
        return Err(SfmError::DimensionMismatch { expected: dim, got: objective.len() });
    }
    match cfg.engine {
        Engine::CuttingPlane => cutting_plane(sep, objective, cfg, Vec::new()),
        Engine::Ellipsoid => {
            let Some(r) = cfg.radius.clone() else {
                return precondition("the ellipsoid engine needs a box radius");
            };
            let (candidate, cuts) = ellipsoid_search(sep, objective, cfg, &r)?;
            if let Some((point, value)) = candidate {
                if cfg.secondary.is_none() {
                    return Ok(OracleOutcome::Optimal { point, value, cuts });
                }
            }
            cutting_plane(sep, objective, cfg, cuts)
        }
    }
}

fn cutting_plane(
    sep: &mut dyn SeparationOracle,
    objective: &[Rat],
    cfg: &OracleOptConfig,
    extra: Vec<Row>,
) -> Result<OracleOutcome> {
    let dim = sep.dim();
    let mut sys = LinearSystem::new(dim);
    if let Some(r) = &cfg.radius {
        for j in 0..dim {
            sys.set_bounds(j, Some(-r), Some(r.clone()));
        }
    }
    for row in cfg.seed_rows.iter().chain(&extra) {
        sys.push(row.clone());
    }
    let mut objs = vec![objective.to_vec()];
    if let Some(s) = &cfg.secondary {
        objs.push(s.clone());
    }
    let mut cuts = extra;
    for _ in 0..cfg.max_rounds {
        match solve_lp_lex(&sys, &objs) {
            LpOutcome::Infeasible { .. } => return Ok(OracleOutcome::Empty),
            LpOutcome::Unbounded { point, ray } => match probe_ray(sep, &point, &ray)? {
                // The ray is only trusted after steps up to 2^64 along it stay inside.
                None => return Ok(OracleOutcome::Unbounded { point, ray }),
                Some(row) => {
                    cuts.push(row.clone());
                    sys.push(row);
                }
            },
            LpOutcome::Optimal { point, value } => match sep.separate(&point)? {
                SepResult::Inside => return Ok(OracleOutcome::Optimal { point, value, cuts }),
                SepResult::Cut(row) => {
                    if row.satisfied(&point) {
                        return internal("separation oracle returned a non-separating row");
                    }
                    cuts.push(row.clone());
                    sys.push(row);
                }
            },
        }
    }
    Err(SfmError::IterationCap(cfg.max_rounds))
}

/// A cut at `point` or at `point + 2^j ray` for some `j < 64`.
fn probe_ray(sep: &mut dyn SeparationOracle, point: &[Rat], ray: &[Rat]) -> Result<Option<Row>> {
    let mut step = Rat::zero();
    for j in 0..=64 {
        let p: Vec<Rat> = point.iter().zip(ray).map(|(x, d)| x + d * &step).collect();
        if let SepResult::Cut(row) = sep.separate(&p)? {
            if row.satisfied(&p) {
                return internal("separation oracle returned a non-separating row");
            }
            return Ok(Some(row));
        }
        step = if j == 0 { Rat::one() } else { &step * Rat::from_int(2) };
    }
    Ok(None)
}

fn to_f64(v: &[Rat]) -> Vec<f64> {
    v.iter().map(Rat::to_f64).collect()
}

/// Returns an exactly verified half-grid optimum candidate, if found, plus
/// all cuts seen.
fn ellipsoid_search(
    sep: &mut dyn SeparationOracle,
    objective: &[Rat],
    cfg: &OracleOptConfig,
    radius: &Rat,
) -> Result<(Option<(Vec<Rat>, Rat)>, Vec<Row>)> {
    const EPS: f64 = 0.125;
    let dim = sep.dim();
    let r = radius.to_f64();
    let c = to_f64(objective);
    let mut ell = Ellipsoid::ball(vec![0.0; dim], r * (dim as f64).sqrt() + 1.0);
    let mut cuts: Vec<Row> = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let cap = 200 * (dim + 1) * (dim + 1) * 64;
    for _ in 0..cap {
        let x = ell.center.clone();
        if let Some(j) = (0..dim).find(|&j| x[j].abs() > r) {
            let mut g = vec![0.0; dim];
            g[j] = x[j].signum();
            if !ell.cut(&g) {
                break;
            }
            continue;
        }
        let violated_seed = cfg.seed_rows.iter().find(|row| {
            let lhs: f64 = row.coef.iter().zip(&x).map(|(a, b)| a.to_f64() * b).sum();
            lhs > row.rhs.to_f64()
        });
        let g = if let Some(row) = violated_seed {
            to_f64(&row.coef)
        } else {
            let exact: Vec<Rat> = x.iter().map(|v| Rat::from_f64(*v).unwrap_or_else(Rat::zero)).collect();
            match sep.separate(&exact)? {
                SepResult::Cut(row) => {
                    let g = to_f64(&row.coef);
                    cuts.push(row);
                    g
                }
                SepResult::Inside => {
                    let val: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
                    if best.as_ref().map_or(true, |(_, b)| val > *b) {
                        best = Some((x.clone(), val));
                    }
                    c.iter().map(|v| -v).collect()
                }
            }
        };
        if let Some((_, b)) = &best {
            let top: f64 = c.iter().zip(&ell.center).map(|(a, b)| a * b).sum::<f64>() + ell.width(&c);
            if top - b <= EPS {
                break;
            }
        }
        if !ell.cut(&g) {
            break;
        }
    }
    let Some((xb, vb)) = best else {
        return Ok((None, cuts));
    };
    // The optimum lies in [vb, vb + EPS] and on the half grid.
    let target = Rat::new((2.0 * vb - 1e-9).ceil() as i64, 2);
    if target.to_f64() > vb + EPS + 1e-9 {
        return Ok((None, cuts));
    }
    let rounded: Vec<Rat> = xb.iter().map(|v| Rat::round_half_grid(*v)).collect();
    let seeds_ok = cfg.seed_rows.iter().all(|row| row.satisfied(&rounded));
    let boxed = rounded.iter().all(|v| v.abs() <= *radius);
    if seeds_ok && boxed && dot(objective, &rounded) == target {
        if let SepResult::Inside = sep.separate(&rounded)? {
            return Ok((Some((rounded, target)), cuts));
        }
    }
    Ok((None, cuts))
}

/// Answer of a linear optimization oracle over `P_M(f)`-shaped sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptAnswer {
    Empty,
    Unbounded { ray: Vec<Rat> },
    /// `tight` lists tight tuples of `point` with their function values.
    Optimal { point: Vec<Rat>, value: Rat, tight: Vec<(LatticeTuple, i64)> },
}

pub trait OptimizationOracle {
    fn dim(&self) -> usize;
    /// Maximize `c . y`; `c` is integral and non-negative.
    fn maximize(&mut self, c: &[Rat]) -> Result<OptAnswer>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroMembership {
    /// `sum_j weights_j vertices_j >= 0` with weights summing to one.
    Inside { vertices: Vec<Vec<Rat>>, weights: Vec<Rat> },
    /// `f(tuple) = value < 0` at a tuple tight for the optimum of `objective`.
    Violated { tuple: LatticeTuple, value: i64, objective: Vec<Rat> },
}

fn integral_objective(lambda: &[Rat]) -> Vec<Rat> {
    let l = Rat::from_bigint(common_denominator(lambda));
    lambda.iter().map(|v| v * &l).collect()
}

/// `floor(2^bits lambda)`, entrywise.
fn rounded_objective(lambda: &[Rat], bits: u32) -> Vec<Rat> {
    let scale = Rat::from_int(1i64 << bits);
    lambda.iter().map(|v| (v * &scale).floor()).collect()
}

fn violation_from(answer: &OptAnswer, objective: Vec<Rat>) -> Result<Option<ZeroMembership>> {
    match answer {
        OptAnswer::Empty => internal("optimization oracle reported an empty polyhedron"),
        OptAnswer::Unbounded { .. } => internal("non-negative objective unbounded over a down-closed set"),
        OptAnswer::Optimal { value, tight, .. } => {
            if !value.is_negative() {
                return Ok(None);
            }
            let worst = tight.iter().min_by_key(|(_, v)| *v);
            match worst {
                Some((t, v)) if *v < 0 => {
                    Ok(Some(ZeroMembership::Violated { tuple: t.clone(), value: *v, objective }))
                }
                _ => internal("negative optimum without a negative tight tuple"),
            }
        }
    }
}

/// Decides `0 in P` for a down-closed `P` with recession cone `R^N_{<=0}`.
///
/// Column generation over weight vectors `lambda` in the simplex: `0` lies
/// outside iff `max_{y in P} <lambda, y> < 0` for some `lambda`.
pub fn membership_from_optimization(
    opt: &mut dyn OptimizationOracle,
    engine: Engine,
    max_rounds: usize,
) -> Result<ZeroMembership> {
    let n = opt.dim();
    let mut columns: Vec<Vec<Rat>> = Vec::new();
    let push = |columns: &mut Vec<Vec<Rat>>, answer: &OptAnswer| -> Result<()> {
        if let OptAnswer::Optimal { point, .. } = answer {
            if !columns.contains(point) {
                columns.push(point.clone());
            }
        }
        Ok(())
    };
    let ones = vec![Rat::one(); n];
    let first = opt.maximize(&ones)?;
    if let Some(v) = violation_from(&first, ones)? {
        return Ok(v);
    }
    push(&mut columns, &first)?;
    if engine == Engine::Ellipsoid {
        if let Some(v) = ellipsoid_weights(opt, &mut columns, max_rounds)? {
            return Ok(v);
        }
    }
    for _ in 0..max_rounds {
        // min t  s.t.  <lambda, y_j> <= t,  sum lambda = 1,  lambda >= 0.
        let mut sys = LinearSystem::new(n + 1);
        for j in 0..n {
            sys.set_bounds(j, Some(Rat::zero()), None);
        }
        let mut simplex = vec![Rat::one(); n + 1];
        simplex[n] = Rat::zero();
        sys.add_row(simplex, Relation::Eq, Rat::one());
        for y in &columns {
            let mut row = y.clone();
            row.push(-Rat::one());
            sys.add_row(row, Relation::Le, Rat::zero());
        }
        let mut obj = vec![Rat::zero(); n + 1];
        obj[n] = -Rat::one();
        let (lambda, t) = match solve_lp_lex(&sys, &[obj]) {
            LpOutcome::Optimal { point, .. } => {
                let t = point[n].clone();
                (point[..n].to_vec(), t)
            }
            _ => return internal("weight LP must have an optimum"),
        };
        if !t.is_negative() {
            let weights = convex_weights(&columns)?;
            return Ok(ZeroMembership::Inside { vertices: columns, weights });
        }
        let mut answer = None;
        // Rounded weights keep the oracle's arithmetic small; any of them
        // is accepted if it yields a violation or a column beating `t`.
        for bits in [4u32, 8, 16, 32] {
            let c = rounded_objective(&lambda, bits);
            if c.iter().all(Zero::is_zero) {
                continue;
            }
            let a = opt.maximize(&c)?;
            if let Some(v) = violation_from(&a, c)? {
                return Ok(v);
            }
            if matches!(&a, OptAnswer::Optimal { point, .. } if dot(&lambda, point) > t) {
                answer = Some(a);
                break;
            }
        }
        let answer = match answer {
            Some(a) => a,
            None => {
                let c = integral_objective(&lambda);
                let a = opt.maximize(&c)?;
                if let Some(v) = violation_from(&a, c)? {
                    return Ok(v);
                }
                a
            }
        };
        let before = columns.len();
        push(&mut columns, &answer)?;
        if columns.len() == before {
            return internal("column generation stalled on a repeated vertex");
        }
    }
    Err(SfmError::IterationCap(max_rounds))
}

/// Weights `mu` in the simplex with `sum mu_j y_j >= 0`.
fn convex_weights(columns: &[Vec<Rat>]) -> Result<Vec<Rat>> {
    let m = columns.len();
    let n = columns.first().map_or(0, Vec::len);
    let mut sys = LinearSystem::nonnegative(m);
    sys.add_row(vec![Rat::one(); m], Relation::Eq, Rat::one());
    for i in 0..n {
        sys.add_row(columns.iter().map(|y| y[i].clone()).collect(), Relation::Ge, Rat::zero());
    }
    feasibility(&sys).ok_or_else(|| SfmError::Internal("no convex weights for an inside verdict".into()))
}

/// Ellipsoid over the weight cube, proposing objectives to the oracle.
fn ellipsoid_weights(
    opt: &mut dyn OptimizationOracle,
    columns: &mut Vec<Vec<Rat>>,
    max_rounds: usize,
) -> Result<Option<ZeroMembership>> {
    let n = opt.dim();
    let mut ell = Ellipsoid::ball(vec![0.5; n], (n as f64).sqrt());
    let scale = (1u64 << 20) as f64;
    for _ in 0..max_rounds.min(400 * (n + 1) * (n + 1)) {
        let x = ell.center.clone();
        let sum: f64 = x.iter().sum();
        let g: Vec<f64> = if let Some(j) = (0..n).find(|&j| x[j] < 0.0) {
            let mut g = vec![0.0; n];
            g[j] = -1.0;
            g
        } else if let Some(j) = (0..n).find(|&j| x[j] > 1.0) {
            let mut g = vec![0.0; n];
            g[j] = 1.0;
            g
        } else if sum < 1.0 {
            vec![-1.0; n]
        } else {
            let c: Vec<Rat> = x.iter().map(|v| Rat::from_int((v * scale).round() as i64)).collect();
            if c.iter().all(Zero::is_zero) {
                vec![-1.0; n]
            } else {
                let answer = opt.maximize(&c)?;
                if let Some(v) = violation_from(&answer, c)? {
                    return Ok(Some(v));
                }
                let OptAnswer::Optimal { point, .. } = &answer else {
                    return internal("unexpected optimization answer");
                };
                if !columns.contains(point) {
                    columns.push(point.clone());
                }
                to_f64(point)
            }
        };
        if !ell.cut(&g) {
            break;
        }
    }
    Ok(None)
}
