//! Certificates for the minimum value, a prover for small instances and a
//! verifier that only needs oracle access.
//!
//! A certificate lists a minimizer, `N + 1` vertices of `P_M(f)` (`N = nk`)
//! each with a tight chain of `2n` tuples, and a unified integral `c <= 0`.
//! The verifier recomputes convex weights `lambda` and a residual `y <= 0`
//! with `sum lambda_i x_i + y = c`.

use crate::error::{internal, precondition, Result, SfmError};
use crate::greedy::greedy_base;
use crate::lattice::LatticeTuple;
use crate::lpengine::{feasibility, vertices_dense, LinearSystem, Relation};
use crate::minimize::{chain_separate, TightChain};
use crate::oracle::{brute_min, monotone_closure, normalize, CountingOracle, Oracle};
use crate::polytope::{dense_system, is_unified, tight_tuples_dense, PVector};
use crate::rational::Rat;
use crate::setsfm::Backend;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::HashSet;
use std::fmt;

pub const CERT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub version: u64,
    pub n: usize,
    pub k: usize,
    pub claimed_min: i64,
    pub witness: LatticeTuple,
    pub vectors: Vec<PVector>,
    pub chains: Vec<Vec<LatticeTuple>>,
    pub dual: PVector,
}

/// Verification stages, in the order they run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Structure,
    Feasibility,
    ChainShape,
    Tightness,
    Membership,
    Dual,
}

impl Check {
    /// 0 for structural problems, 1..=5 for the semantic checks.
    pub fn number(self) -> u8 {
        match self {
            Check::Structure => 0,
            Check::Feasibility => 1,
            Check::ChainShape => 2,
            Check::Tightness => 3,
            Check::Membership => 4,
            Check::Dual => 5,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Check::Structure => "structure",
            Check::Feasibility => "feasibility",
            Check::ChainShape => "chain-shape",
            Check::Tightness => "tightness",
            Check::Membership => "membership",
            Check::Dual => "dual",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject { check: Check, reason: String },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
    pub fn check(&self) -> Option<Check> {
        match self {
            Verdict::Accept => None,
            Verdict::Reject { check, .. } => Some(*check),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub verdict: Verdict,
    pub oracle_calls: u64,
}

fn reject(check: Check, reason: impl Into<String>) -> Verdict {
    Verdict::Reject { check, reason: reason.into() }
}

/// Builds a certificate by enumeration; `budget` bounds the tuple count.
pub fn prove(f: &dyn Oracle, budget: u128) -> Result<Certificate> {
    let (n, k) = (f.n(), f.k());
    let big_n = n * k;
    let (claimed_min, witness) = brute_min(f, budget)?;
    let fno = normalize(f);
    let closure = monotone_closure(&fno, budget)?;
    let dual = greedy_base(&closure).vector;
    let sys = dense_system(&fno, budget)?;
    let verts = vertices_dense(&sys, 64)?;
    if verts.is_empty() {
        return internal("no vertices found");
    }
    let weights = decomposition_weights(&verts, &dual)
        .ok_or_else(|| SfmError::Internal("dual vector is not dominated by a convex combination of vertices".into()))?;
    let mut chosen: Vec<usize> = (0..verts.len()).filter(|&j| weights[j].is_positive()).collect();
    if chosen.len() > big_n + 1 {
        return internal(format!("{} vertices in the decomposition, more than N+1", chosen.len()));
    }
    while chosen.len() < big_n + 1 {
        chosen.push(chosen[0]);
    }
    let mut vectors = Vec::with_capacity(big_n + 1);
    let mut chains = Vec::with_capacity(big_n + 1);
    for j in chosen {
        let x = PVector::new(n, k, verts[j].clone())?;
        chains.push(tight_chain(&x, &fno, budget)?);
        vectors.push(x);
    }
    Ok(Certificate { version: CERT_VERSION, n, k, claimed_min, witness, vectors, chains, dual })
}

/// Basic solution `lambda` of `sum lambda_j v_j <= c`, `sum lambda = 1`,
/// `lambda >= 0`; the slack is the residual `y`.
fn decomposition_weights(verts: &[Vec<Rat>], c: &PVector) -> Option<Vec<Rat>> {
    let m = verts.len();
    let d = c.dim();
    // Variables: lambda (m, >= 0) then y (d, <= 0).
    let mut sys = LinearSystem::new(m + d);
    for j in 0..m {
        sys.set_bounds(j, Some(Rat::zero()), None);
    }
    for e in 0..d {
        sys.set_bounds(m + e, None, Some(Rat::zero()));
    }
    let mut ones = vec![Rat::zero(); m + d];
    ones[..m].fill(Rat::one());
    sys.add_row(ones, Relation::Eq, Rat::one());
    for e in 0..d {
        let mut row: Vec<Rat> = verts.iter().map(|v| v[e].clone()).collect();
        row.extend((0..d).map(|e2| if e2 == e { Rat::one() } else { Rat::zero() }));
        sys.add_row(row, Relation::Eq, c.entries()[e].clone());
    }
    feasibility(&sys).map(|p| p[..m].to_vec())
}

/// A chain of exactly `2n` tight tuples from bottom to top with at most one
/// Bottom-to-Top jump per step.
fn tight_chain(x: &PVector, f: &dyn Oracle, budget: u128) -> Result<Vec<LatticeTuple>> {
    let (n, k) = (f.n(), f.k());
    let tight = tight_tuples_dense(x, f, budget)?;
    let bottom = LatticeTuple::bottom(n, k);
    let top = LatticeTuple::top(n, k);
    if !tight.contains(&bottom) || !tight.contains(&top) {
        return internal("vertex not tight at both ends");
    }
    let mut dead = HashSet::new();
    let mut path = vec![bottom];
    if !extend_chain(&tight, &top, &mut path, &mut dead) {
        return internal(format!("no tight chain with single jumps for vertex {x}"));
    }
    let target = 2 * n;
    if path.len() > target {
        // Only a saturated chain (2n+1 tuples) is too long; its steps are
        // covers, so dropping the second tuple leaves at most one jump.
        path.remove(1);
    }
    while path.len() < target {
        path.insert(0, path[0].clone());
    }
    Ok(path)
}

fn extend_chain(
    tight: &[LatticeTuple],
    top: &LatticeTuple,
    path: &mut Vec<LatticeTuple>,
    dead: &mut HashSet<LatticeTuple>,
) -> bool {
    let cur = path.last().unwrap().clone();
    if &cur == top {
        return true;
    }
    if dead.contains(&cur) {
        return false;
    }
    let above: Vec<&LatticeTuple> = tight.iter().filter(|t| **t != cur && cur.leq_unchecked(t)).collect();
    let mut next: Vec<&LatticeTuple> = above
        .iter()
        .copied()
        .filter(|t| !above.iter().any(|s| s != t && s.leq_unchecked(t)))
        .filter(|t| cur.jumps_to(t).len() <= 1)
        .collect();
    next.sort_by_key(|t| (t.rank(), t.index()));
    for t in next {
        path.push(t.clone());
        if extend_chain(tight, top, path, dead) {
            return true;
        }
        path.pop();
    }
    dead.insert(cur);
    false
}

/// Checks a certificate against `f`, counting oracle calls.
pub fn verify(cert: &Certificate, f: &dyn Oracle) -> VerifyReport {
    let counted = CountingOracle::new(f);
    let verdict = run_checks(cert, &counted);
    VerifyReport { verdict, oracle_calls: counted.calls() }
}

fn structure(cert: &Certificate, f: &dyn Oracle) -> Option<String> {
    let (n, k) = (f.n(), f.k());
    if cert.version != CERT_VERSION {
        return Some(format!("unsupported certificate version {}", cert.version));
    }
    if cert.n != n || cert.k != k {
        return Some(format!("certificate for n={}, k={}; instance has n={n}, k={k}", cert.n, cert.k));
    }
    if cert.vectors.len() != n * k + 1 {
        return Some(format!("{} vectors, expected {}", cert.vectors.len(), n * k + 1));
    }
    if cert.chains.len() != cert.vectors.len() {
        return Some(format!("{} chains for {} vectors", cert.chains.len(), cert.vectors.len()));
    }
    let shape_ok = |v: &PVector| v.n() == n && v.k() == k;
    if !cert.vectors.iter().all(shape_ok) || !shape_ok(&cert.dual) {
        return Some("vector shape does not match the instance".into());
    }
    let tuple_ok = |t: &LatticeTuple| t.n() == n && t.k() == k;
    if !tuple_ok(&cert.witness) || !cert.chains.iter().flatten().all(tuple_ok) {
        return Some("tuple shape does not match the instance".into());
    }
    None
}

fn run_checks(cert: &Certificate, f: &dyn Oracle) -> Verdict {
    if let Some(reason) = structure(cert, f) {
        return reject(Check::Structure, reason);
    }
    let (n, k) = (f.n(), f.k());
    let fno = normalize(f);
    let verts: Vec<Vec<Rat>> = cert.vectors.iter().map(|v| v.entries().to_vec()).collect();
    if decomposition_weights(&verts, &cert.dual).is_none() {
        return reject(Check::Feasibility, "no convex weights with a non-positive residual");
    }
    let bottom = LatticeTuple::bottom(n, k);
    let top = LatticeTuple::top(n, k);
    for (j, ch) in cert.chains.iter().enumerate() {
        if ch.len() != 2 * n {
            return reject(Check::ChainShape, format!("chain {} has {} tuples, expected {}", j + 1, ch.len(), 2 * n));
        }
        if ch[0] != bottom || ch[2 * n - 1] != top {
            return reject(Check::ChainShape, format!("chain {} does not run from bottom to top", j + 1));
        }
        for w in ch.windows(2) {
            if !w[0].leq_unchecked(&w[1]) {
                return reject(Check::ChainShape, format!("chain {}: {} is not below {}", j + 1, w[0], w[1]));
            }
            if w[0].jumps_to(&w[1]).len() > 1 {
                return reject(Check::ChainShape, format!("chain {}: two jumps from {} to {}", j + 1, w[0], w[1]));
            }
        }
    }
    for (j, (x, ch)) in cert.vectors.iter().zip(&cert.chains).enumerate() {
        for t in ch {
            let ft = fno.eval(t);
            if x.eval(t) != Rat::from_int(ft) {
                return reject(Check::Tightness, format!("vector {}: {} != f({t}) = {ft}", j + 1, x.eval(t)));
            }
        }
    }
    for (j, (x, ch)) in cert.vectors.iter().zip(&cert.chains).enumerate() {
        let chain = match TightChain::new(ch.clone(), 1) {
            Ok(c) => c,
            Err(e) => return reject(Check::ChainShape, e.to_string()),
        };
        match chain_separate(x, &fno, &chain, Backend::MinNorm) {
            Ok(v) if v.is_member() => {}
            Ok(_) => return reject(Check::Membership, format!("vector {} is outside the polyhedron", j + 1)),
            Err(e) => return reject(Check::Membership, e.to_string()),
        }
    }
    let c = &cert.dual;
    if !c.is_nonpositive() {
        return reject(Check::Dual, "dual vector has a positive entry");
    }
    if !c.is_integral() {
        return reject(Check::Dual, "dual vector is not integral");
    }
    if !is_unified(c) {
        return reject(Check::Dual, "dual vector is not unified");
    }
    let total = c.eval(&top);
    let fw = fno.eval(&cert.witness);
    if total != Rat::from_int(fw) {
        return reject(Check::Dual, format!("c(1) = {total} but f(witness) - f(0) = {fw}"));
    }
    let raw = f.eval(&cert.witness);
    if raw != cert.claimed_min {
        return reject(Check::Dual, format!("claimed minimum {} but f(witness) = {raw}", cert.claimed_min));
    }
    Verdict::Accept
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        let chains: Vec<Vec<String>> =
            self.chains.iter().map(|c| c.iter().map(LatticeTuple::to_string).collect()).collect();
        json!({
            "version": self.version,
            "n": self.n,
            "k": self.k,
            "claimed_min": self.claimed_min,
            "witness": self.witness.to_string(),
            "vectors": self.vectors.iter().map(PVector::to_json).collect::<Vec<_>>(),
            "chains": chains,
            "dual": self.dual.to_json(),
        })
    }

    /// Parses a certificate, listing every malformed field.
    pub fn from_json(v: &Value) -> Result<Certificate> {
        let mut errs: Vec<String> = Vec::new();
        let version = v.get("version").and_then(Value::as_u64);
        match version {
            None => errs.push("version: missing or not an integer".into()),
            Some(ver) if ver != CERT_VERSION => {
                return Err(SfmError::Parse(format!("unsupported certificate version {ver} (expected {CERT_VERSION})")));
            }
            _ => {}
        }
        let uint = |name: &str, errs: &mut Vec<String>| {
            let r = v.get(name).and_then(Value::as_u64).map(|x| x as usize);
            if r.is_none() {
                errs.push(format!("{name}: missing or not an integer"));
            }
            r
        };
        let n = uint("n", &mut errs);
        let k = uint("k", &mut errs);
        let claimed_min = v.get("claimed_min").and_then(Value::as_i64);
        if claimed_min.is_none() {
            errs.push("claimed_min: missing or not an integer".into());
        }
        let tuple = |s: Option<&Value>, what: &str, errs: &mut Vec<String>| -> Option<LatticeTuple> {
            let (Some(s), Some(k)) = (s.and_then(Value::as_str), k) else {
                errs.push(format!("{what}: missing or not a string"));
                return None;
            };
            match LatticeTuple::parse(s, k) {
                Ok(t) => Some(t),
                Err(e) => {
                    errs.push(format!("{what}: {e}"));
                    None
                }
            }
        };
        let witness = tuple(v.get("witness"), "witness", &mut errs);
        let mut vectors = Vec::new();
        match v.get("vectors").and_then(Value::as_array) {
            None => errs.push("vectors: missing or not an array".into()),
            Some(list) => {
                for (j, item) in list.iter().enumerate() {
                    match PVector::from_json(item) {
                        Ok(x) => vectors.push(x),
                        Err(e) => errs.push(format!("vectors[{j}]: {e}")),
                    }
                }
            }
        }
        let mut chains = Vec::new();
        match v.get("chains").and_then(Value::as_array) {
            None => errs.push("chains: missing or not an array".into()),
            Some(list) => {
                for (j, ch) in list.iter().enumerate() {
                    match ch.as_array() {
                        None => errs.push(format!("chains[{j}]: not an array")),
                        Some(ts) => {
                            let parsed: Vec<Option<LatticeTuple>> = ts
                                .iter()
                                .enumerate()
                                .map(|(i, t)| tuple(Some(t), &format!("chains[{j}][{i}]"), &mut errs))
                                .collect();
                            chains.push(parsed.into_iter().flatten().collect());
                        }
                    }
                }
            }
        }
        let dual = match v.get("dual").map(PVector::from_json) {
            Some(Ok(d)) => Some(d),
            Some(Err(e)) => {
                errs.push(format!("dual: {e}"));
                None
            }
            None => {
                errs.push("dual: missing".into());
                None
            }
        };
        if !errs.is_empty() {
            return Err(SfmError::Parse(errs.join("; ")));
        }
        Ok(Certificate {
            version: version.unwrap(),
            n: n.unwrap(),
            k: k.unwrap(),
            claimed_min: claimed_min.unwrap(),
            witness: witness.unwrap(),
            vectors,
            chains,
            dual: dual.unwrap(),
        })
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("certificate serializes")
    }

    pub fn parse(text: &str) -> Result<Certificate> {
        let v: Value = serde_json::from_str(text).map_err(|e| SfmError::Parse(format!("certificate: {e}")))?;
        Certificate::from_json(&v)
    }
}

/// Ways to damage a valid certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// Raise the largest entry of the first vector by one.
    RaiseVectorEntry,
    /// Swap the first two distinct adjacent tuples of the first chain.
    SwapChainTuples,
    /// Claim a minimum one larger.
    ClaimedMinPlusOne,
    /// Lower a non-distinguished entry of the dual in the first coordinate.
    Deunify,
    /// Push a dual entry above every vector's entry there.
    BreakFeasibility,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::RaiseVectorEntry,
        Mutation::SwapChainTuples,
        Mutation::ClaimedMinPlusOne,
        Mutation::Deunify,
        Mutation::BreakFeasibility,
    ];
}

pub fn mutate(cert: &Certificate, m: Mutation) -> Result<Certificate> {
    let mut out = cert.clone();
    match m {
        Mutation::RaiseVectorEntry => {
            let x = &mut out.vectors[0];
            let (j, v) = x
                .entries()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(j, v)| (j, v.clone()))
                .unwrap();
            let k = x.k();
            x.set(j / k, j % k + 1, v + Rat::one());
        }
        Mutation::SwapChainTuples => {
            let ch = &mut out.chains[0];
            let Some(p) = (0..ch.len() - 1).find(|&p| ch[p] != ch[p + 1]) else {
                return precondition("chain has no distinct adjacent tuples");
            };
            ch.swap(p, p + 1);
        }
        Mutation::ClaimedMinPlusOne => out.claimed_min += 1,
        Mutation::Deunify => {
            let c = &mut out.dual;
            let coord = c.coord(0).to_vec();
            let max = coord.iter().max().unwrap();
            let p = coord.iter().position(|v| v == max).unwrap();
            let a = if p == 0 { 2 } else { 1 };
            c.set(0, a, &coord[a - 1] - Rat::one());
        }
        Mutation::BreakFeasibility => {
            let hi = out.vectors.iter().map(|x| x.get(0, 1).clone()).max().unwrap();
            out.dual.set(0, 1, hi + Rat::one());
        }
    }
    Ok(out)
}
