//! Vectors on `[n] x A`, evaluation on tuples and the inequality system of
//! `P_M(f)`.
//!
//! Coordinates are 0-based and atoms 1-based in the Rust API; the JSON
//! format uses 1-based coordinates.

use crate::error::{precondition, Result, SfmError};
use crate::lattice::{check_budget, enumerate_tuples, ElementKind, LatticeTuple};
use crate::lpengine::{LinearSystem, Relation};
use crate::oracle::Oracle;
use crate::rational::Rat;
use num_traits::Zero;
use serde_json::Value;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PVector {
    n: usize,
    k: usize,
    entries: Vec<Rat>,
}

impl PVector {
    pub fn new(n: usize, k: usize, entries: Vec<Rat>) -> Result<Self> {
        if entries.len() != n * k {
            return Err(SfmError::DimensionMismatch { expected: n * k, got: entries.len() });
        }
        Ok(PVector { n, k, entries })
    }

    pub fn from_ints(n: usize, k: usize, entries: &[i64]) -> Result<Self> {
        Self::new(n, k, entries.iter().map(|&v| Rat::from_int(v)).collect())
    }

    pub fn zero(n: usize, k: usize) -> Self {
        PVector { n, k, entries: vec![Rat::zero(); n * k] }
    }

    /// `chi_{i,a}`.
    pub fn unit(n: usize, k: usize, i: usize, a: usize) -> Self {
        let mut v = Self::zero(n, k);
        v.entries[i * k + a - 1] = Rat::from_int(1);
        v
    }

    /// `chi_i`: ones on every atom of coordinate `i`.
    pub fn coord_ones(n: usize, k: usize, i: usize) -> Self {
        let mut v = Self::zero(n, k);
        for a in 1..=k {
            v.entries[i * k + a - 1] = Rat::from_int(1);
        }
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Rat> {
        self.entries
    }

    pub fn get(&self, i: usize, a: usize) -> &Rat {
        &self.entries[i * self.k + a - 1]
    }

    pub fn set(&mut self, i: usize, a: usize, v: Rat) {
        self.entries[i * self.k + a - 1] = v;
    }

    fn same_shape(&self, other: &PVector) -> Result<()> {
        if self.n != other.n || self.k != other.k {
            return Err(SfmError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }

    pub fn add(&self, other: &PVector) -> Result<PVector> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(PVector { n: self.n, k: self.k, entries })
    }

    pub fn sub(&self, other: &PVector) -> Result<PVector> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(PVector { n: self.n, k: self.k, entries })
    }

    pub fn scale(&self, s: &Rat) -> PVector {
        let entries = self.entries.iter().map(|a| a * s).collect();
        PVector { n: self.n, k: self.k, entries }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: &Rat, other: &PVector) -> Result<PVector> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + s * b).collect();
        Ok(PVector { n: self.n, k: self.k, entries })
    }

    pub fn dot(&self, other: &PVector) -> Result<Rat> {
        self.same_shape(other)?;
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).sum())
    }

    /// `x^-`: entrywise `min(0, x)`.
    pub fn negative_part(&self) -> PVector {
        let entries = self
            .entries
            .iter()
            .map(|v| if v.is_negative() { v.clone() } else { Rat::zero() })
            .collect();
        PVector { n: self.n, k: self.k, entries }
    }

    pub fn entrywise_le(&self, other: &PVector) -> bool {
        self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b)
    }

    pub fn is_nonpositive(&self) -> bool {
        self.entries.iter().all(|v| !v.is_positive())
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(Rat::is_integer)
    }

    pub fn coord(&self, i: usize) -> &[Rat] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    /// Largest pair sum at coordinate `i`, with its lexicographically first pair.
    pub fn top_pair(&self, i: usize) -> ((u8, u8), Rat) {
        let c = self.coord(i);
        let (mut b1, mut b2) = (0usize, 1usize);
        if c[1] > c[0] {
            (b1, b2) = (1, 0);
        }
        for j in 2..c.len() {
            if c[j] > c[b1] {
                b2 = b1;
                b1 = j;
            } else if c[j] > c[b2] {
                b2 = j;
            }
        }
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        // Among equal-sum pairs prefer the lowest indices.
        let best = &c[b1] + &c[b2];
        let pair = first_pair_with_sum(c, &best).unwrap_or((lo as u8 + 1, hi as u8 + 1));
        (pair, best)
    }

    /// Every pair `(a, b)`, `a < b`, attaining the largest pair sum at coordinate `i`.
    pub fn max_pairs(&self, i: usize) -> Vec<(u8, u8)> {
        let (_, best) = self.top_pair(i);
        let c = self.coord(i);
        let mut out = Vec::new();
        for a in 0..c.len() {
            for b in a + 1..c.len() {
                if &c[a] + &c[b] == best {
                    out.push((a as u8 + 1, b as u8 + 1));
                }
            }
        }
        out
    }

    fn coord_value(&self, i: usize, e: ElementKind) -> Rat {
        match e {
            ElementKind::Bottom => Rat::zero(),
            ElementKind::Atom(a) => self.get(i, a as usize).clone(),
            ElementKind::Top => self.top_pair(i).1,
        }
    }

    /// `x(t)`; panics on shape mismatch, see [`apply`] for the checked form.
    pub fn eval(&self, t: &LatticeTuple) -> Rat {
        assert_eq!(t.n(), self.n, "tuple length does not match vector");
        t.items().iter().enumerate().map(|(i, &e)| self.coord_value(i, e)).sum()
    }

    pub fn to_json(&self) -> Value {
        let mut entries = Vec::with_capacity(self.dim());
        for i in 0..self.n {
            for a in 1..=self.k {
                entries.push(serde_json::json!([i + 1, format!("a{a}"), self.get(i, a).to_pq()]));
            }
        }
        serde_json::json!({ "n": self.n, "k": self.k, "entries": entries })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |name: &str| {
            v.get(name)
                .and_then(Value::as_u64)
                .ok_or_else(|| SfmError::Parse(format!("vector: missing integer field {name:?}")))
        };
        let (n, k) = (field("n")? as usize, field("k")? as usize);
        if n == 0 || k < 3 || n.saturating_mul(k) > 1 << 20 {
            return Err(SfmError::Parse(format!("vector: invalid sizes n={n}, k={k}")));
        }
        let list = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| SfmError::Parse("vector: missing array field \"entries\"".into()))?;
        let mut slots: Vec<Option<Rat>> = vec![None; n * k];
        for item in list {
            let bad = || SfmError::Parse(format!("vector: malformed entry {item}"));
            let arr = item.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
            let i = arr[0].as_u64().ok_or_else(bad)? as usize;
            let a = arr[1]
                .as_str()
                .and_then(|s| s.strip_prefix('a'))
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(bad)?;
            if i == 0 || i > n || a == 0 || a > k {
                return Err(SfmError::Parse(format!("vector: entry {item} out of range")));
            }
            let val: Rat = match &arr[2] {
                Value::String(s) => s.parse().map_err(|_| bad())?,
                Value::Number(x) => Rat::from_int(x.as_i64().ok_or_else(bad)?),
                _ => return Err(bad()),
            };
            let slot = &mut slots[(i - 1) * k + a - 1];
            if slot.is_some() {
                return Err(SfmError::Parse(format!("vector: duplicate entry {item}")));
            }
            *slot = Some(val);
        }
        let entries = slots
            .into_iter()
            .map(|s| s.ok_or_else(|| SfmError::Parse("vector: missing entries".into())))
            .collect::<Result<Vec<_>>>()?;
        PVector::new(n, k, entries)
    }
}

fn first_pair_with_sum(c: &[Rat], s: &Rat) -> Option<(u8, u8)> {
    for a in 0..c.len() {
        for b in a + 1..c.len() {
            if &(&c[a] + &c[b]) == s {
                return Some((a as u8 + 1, b as u8 + 1));
            }
        }
    }
    None
}

impl fmt::Debug for PVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = (0..self.n)
            .map(|i| {
                let c: Vec<String> = self.coord(i).iter().map(|v| v.to_string()).collect();
                format!("({})", c.join(","))
            })
            .collect();
        f.write_str(&coords.join(" "))
    }
}

/// `x(t)` with shape checks.
pub fn apply(x: &PVector, t: &LatticeTuple) -> Result<Rat> {
    if t.n() != x.n() {
        return Err(SfmError::DimensionMismatch { expected: x.n(), got: t.n() });
    }
    if t.k() != x.k() {
        return Err(SfmError::KMismatch(x.k(), t.k()));
    }
    Ok(x.eval(t))
}

/// The choice one selector makes at a single coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Choice {
    Skip,
    Atom(u8),
    /// Distinct atoms, first < second.
    Pair(u8, u8),
}

/// One member `e` of `I(t)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomPairSelector {
    pub choices: Vec<Choice>,
}

impl AtomPairSelector {
    pub fn dot(&self, x: &PVector) -> Rat {
        self.choices
            .iter()
            .enumerate()
            .map(|(i, c)| match *c {
                Choice::Skip => Rat::zero(),
                Choice::Atom(a) => x.get(i, a as usize).clone(),
                Choice::Pair(a, b) => x.get(i, a as usize) + x.get(i, b as usize),
            })
            .sum()
    }

    /// The 0/1 coefficient vector of `e`.
    pub fn to_vector(&self, n: usize, k: usize) -> PVector {
        let mut v = PVector::zero(n, k);
        let one = Rat::from_int(1);
        for (i, c) in self.choices.iter().enumerate() {
            match *c {
                Choice::Skip => {}
                Choice::Atom(a) => v.set(i, a as usize, one.clone()),
                Choice::Pair(a, b) => {
                    v.set(i, a as usize, one.clone());
                    v.set(i, b as usize, one.clone());
                }
            }
        }
        v
    }

    /// The tuple whose inequality family contains this selector.
    pub fn tuple(&self, k: usize) -> LatticeTuple {
        let items = self
            .choices
            .iter()
            .map(|c| match *c {
                Choice::Skip => ElementKind::Bottom,
                Choice::Atom(a) => ElementKind::Atom(a),
                Choice::Pair(..) => ElementKind::Top,
            })
            .collect();
        LatticeTuple::from_raw(k, items)
    }
}

fn pairs(k: usize) -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    for a in 1..=k as u8 {
        for b in a + 1..=k as u8 {
            out.push((a, b));
        }
    }
    out
}

/// All members of `I(t)`, Top coordinates varying fastest at the end.
pub fn enumerate_ineqs(t: &LatticeTuple, budget: u128) -> Result<Vec<AtomPairSelector>> {
    let k = t.k();
    let tops = t.items().iter().filter(|&&e| e == ElementKind::Top).count();
    let per = (k * (k - 1) / 2) as u128;
    check_budget(per.saturating_pow(tops as u32), budget)?;
    let all = pairs(k);
    let mut out = vec![AtomPairSelector { choices: Vec::with_capacity(t.n()) }];
    for &e in t.items() {
        match e {
            ElementKind::Bottom => out.iter_mut().for_each(|s| s.choices.push(Choice::Skip)),
            ElementKind::Atom(a) => out.iter_mut().for_each(|s| s.choices.push(Choice::Atom(a))),
            ElementKind::Top => {
                out = out
                    .into_iter()
                    .flat_map(|s| {
                        all.iter().map(move |&(a, b)| {
                            let mut s = s.clone();
                            s.choices.push(Choice::Pair(a, b));
                            s
                        })
                    })
                    .collect();
            }
        }
    }
    Ok(out)
}

/// A selector of `I(t)` attaining `x(t)`.
pub fn best_selector(x: &PVector, t: &LatticeTuple) -> (AtomPairSelector, Rat) {
    let mut value = Rat::zero();
    let choices = t
        .items()
        .iter()
        .enumerate()
        .map(|(i, &e)| match e {
            ElementKind::Bottom => Choice::Skip,
            ElementKind::Atom(a) => {
                value += x.get(i, a as usize);
                Choice::Atom(a)
            }
            ElementKind::Top => {
                let ((a, b), s) = x.top_pair(i);
                value += s;
                Choice::Pair(a, b)
            }
        })
        .collect();
    (AtomPairSelector { choices }, value)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member,
    Violated { tuple: LatticeTuple, selector: AtomPairSelector },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }
}

fn check_shape(x: &PVector, f: &dyn Oracle) -> Result<()> {
    if x.n() != f.n() || x.k() != f.k() {
        return Err(SfmError::DimensionMismatch { expected: f.n() * f.k(), got: x.dim() });
    }
    Ok(())
}

/// Membership in `P_M(f)` by scanning every tuple.
pub fn is_member_dense(x: &PVector, f: &dyn Oracle, budget: u128) -> Result<Membership> {
    check_shape(x, f)?;
    for t in enumerate_tuples(f.n(), f.k(), budget)? {
        let (sel, v) = best_selector(x, &t);
        if v > Rat::from_int(f.eval(&t)) {
            return Ok(Membership::Violated { tuple: t, selector: sel });
        }
    }
    Ok(Membership::Member)
}

/// Every `x`-tight tuple, in enumeration order.
pub fn tight_tuples_dense(x: &PVector, f: &dyn Oracle, budget: u128) -> Result<Vec<LatticeTuple>> {
    check_shape(x, f)?;
    let mut out = Vec::new();
    for t in enumerate_tuples(f.n(), f.k(), budget)? {
        let v = x.eval(&t);
        let ft = Rat::from_int(f.eval(&t));
        if v > ft {
            return precondition(format!("vector violates the inequality at {t}"));
        }
        if v == ft {
            out.push(t);
        }
    }
    Ok(out)
}

/// Some atom dominates each coordinate and the others are equal there.
pub fn is_unified(x: &PVector) -> bool {
    (0..x.n()).all(|i| {
        let c = x.coord(i);
        let max = c.iter().max().unwrap();
        (0..c.len()).any(|p| {
            &c[p] == max && {
                let mut rest = (0..c.len()).filter(|&a| a != p).map(|a| &c[a]);
                let first = rest.next().unwrap();
                rest.all(|v| v == first)
            }
        })
    })
}

/// Keep a (lowest-index) maximum per coordinate, lower the rest to the minimum.
pub fn unify(x: &PVector) -> PVector {
    if is_unified(x) {
        return x.clone();
    }
    let mut out = x.clone();
    for i in 0..x.n() {
        let c = x.coord(i);
        let max = c.iter().max().unwrap();
        let min = c.iter().min().unwrap().clone();
        let p = c.iter().position(|v| v == max).unwrap();
        for a in 0..c.len() {
            if a != p {
                out.set(i, a + 1, min.clone());
            }
        }
    }
    out
}

/// `S(x) = sum_i (min_a x(i,a) + max_a x(i,a))`.
pub fn s_value(x: &PVector) -> Rat {
    (0..x.n())
        .map(|i| {
            let c = x.coord(i);
            c.iter().min().unwrap() + c.iter().max().unwrap()
        })
        .sum()
}

/// The full system `<e, x> <= f(t)` over all tuples and selectors.
pub fn dense_system(f: &dyn Oracle, budget: u128) -> Result<LinearSystem> {
    let (n, k) = (f.n(), f.k());
    let mut sys = LinearSystem::new(n * k);
    for t in enumerate_tuples(n, k, budget)? {
        let rhs = Rat::from_int(f.eval(&t));
        if t.is_bottom() {
            if rhs.is_negative() {
                sys.add_row(vec![Rat::zero(); n * k], Relation::Le, rhs);
            }
            continue;
        }
        for sel in enumerate_ineqs(&t, budget)? {
            sys.add_row(sel.to_vector(n, k).into_entries(), Relation::Le, rhs.clone());
        }
    }
    Ok(sys)
}
