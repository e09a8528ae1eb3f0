//! Diamonds `M_k` and their products `M_k^n`.
//!
//! Elements are ordered `Bottom < Atom(1) < ... < Atom(k) < Top` for
//! enumeration purposes only; in the lattice order the atoms are pairwise
//! incomparable. Tuples are enumerated with coordinate 0 most significant.

use crate::error::{precondition, Result, SfmError};
use std::fmt;

/// Default cap on the number of tuples any dense enumeration may visit.
pub const DEFAULT_BUDGET: u128 = 20_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Bottom,
    /// 1-based atom index.
    Atom(u8),
    Top,
}

impl ElementKind {
    pub fn rank(self) -> usize {
        match self {
            ElementKind::Bottom => 0,
            ElementKind::Atom(_) => 1,
            ElementKind::Top => 2,
        }
    }

    pub fn leq(self, other: ElementKind) -> bool {
        match (self, other) {
            (ElementKind::Bottom, _) | (_, ElementKind::Top) => true,
            (ElementKind::Atom(a), ElementKind::Atom(b)) => a == b,
            _ => false,
        }
    }

    pub fn meet(self, other: ElementKind) -> ElementKind {
        if self.leq(other) {
            self
        } else if other.leq(self) {
            other
        } else {
            ElementKind::Bottom
        }
    }

    pub fn join(self, other: ElementKind) -> ElementKind {
        if self.leq(other) {
            other
        } else if other.leq(self) {
            self
        } else {
            ElementKind::Top
        }
    }

    /// Position in the enumeration order: 0, 1..=k, k+1.
    pub fn code(self, k: usize) -> usize {
        match self {
            ElementKind::Bottom => 0,
            ElementKind::Atom(a) => a as usize,
            ElementKind::Top => k + 1,
        }
    }

    pub fn from_code(code: usize, k: usize) -> ElementKind {
        if code == 0 {
            ElementKind::Bottom
        } else if code <= k {
            ElementKind::Atom(code as u8)
        } else {
            ElementKind::Top
        }
    }

    fn text(self) -> String {
        match self {
            ElementKind::Bottom => "0".into(),
            ElementKind::Top => "1".into(),
            ElementKind::Atom(a) => format!("a{a}"),
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if !(3..=255).contains(&k) {
        return precondition(format!("diamond size k={k} must lie in 3..=255"));
    }
    Ok(())
}

fn check_kind(kind: ElementKind, k: usize) -> Result<()> {
    if let ElementKind::Atom(a) = kind {
        if a == 0 || a as usize > k {
            return Err(SfmError::OutOfRange(format!("atom {a} not in 1..={k}")));
        }
    }
    Ok(())
}

/// One element of `M_k`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiamondElement {
    k: u8,
    kind: ElementKind,
}

impl DiamondElement {
    pub fn new(k: usize, kind: ElementKind) -> Result<Self> {
        check_k(k)?;
        check_kind(kind, k)?;
        Ok(DiamondElement { k: k as u8, kind })
    }

    pub fn bottom(k: usize) -> Result<Self> {
        Self::new(k, ElementKind::Bottom)
    }

    pub fn top(k: usize) -> Result<Self> {
        Self::new(k, ElementKind::Top)
    }

    pub fn atom(k: usize, a: usize) -> Result<Self> {
        if a == 0 || a > k {
            return Err(SfmError::OutOfRange(format!("atom {a} not in 1..={k}")));
        }
        Self::new(k, ElementKind::Atom(a as u8))
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn rank(&self) -> usize {
        self.kind.rank()
    }

    fn same_k(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(SfmError::KMismatch(self.k(), other.k()));
        }
        Ok(())
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.same_k(other)?;
        Ok(self.kind.leq(other.kind))
    }

    pub fn parse(s: &str, k: usize) -> Result<Self> {
        Self::new(k, parse_kind(s, k)?)
    }
}

impl fmt::Display for DiamondElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.kind.text())
    }
}

pub fn meet(x: DiamondElement, y: DiamondElement) -> Result<DiamondElement> {
    x.same_k(&y)?;
    Ok(DiamondElement { k: x.k, kind: x.kind.meet(y.kind) })
}

pub fn join(x: DiamondElement, y: DiamondElement) -> Result<DiamondElement> {
    x.same_k(&y)?;
    Ok(DiamondElement { k: x.k, kind: x.kind.join(y.kind) })
}

fn parse_kind(s: &str, k: usize) -> Result<ElementKind> {
    let s = s.trim();
    let kind = match s {
        "0" => ElementKind::Bottom,
        "1" => ElementKind::Top,
        _ => {
            let idx = s
                .strip_prefix('a')
                .and_then(|r| r.parse::<usize>().ok())
                .ok_or_else(|| SfmError::Parse(format!("bad element {s:?}")))?;
            if idx == 0 || idx > k {
                return Err(SfmError::Parse(format!("atom {s:?} out of range for k={k}")));
            }
            ElementKind::Atom(idx as u8)
        }
    };
    Ok(kind)
}

/// A tuple in `M_k^n`, `n >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeTuple {
    k: u8,
    items: Vec<ElementKind>,
}

impl LatticeTuple {
    pub fn new(k: usize, items: Vec<ElementKind>) -> Result<Self> {
        check_k(k)?;
        for &it in &items {
            check_kind(it, k)?;
        }
        Ok(LatticeTuple { k: k as u8, items })
    }

    /// Construction without validation; callers guarantee atoms are in range.
    pub(crate) fn from_raw(k: usize, items: Vec<ElementKind>) -> Self {
        LatticeTuple { k: k as u8, items }
    }

    pub fn bottom(n: usize, k: usize) -> Self {
        LatticeTuple { k: k as u8, items: vec![ElementKind::Bottom; n] }
    }

    pub fn top(n: usize, k: usize) -> Self {
        LatticeTuple { k: k as u8, items: vec![ElementKind::Top; n] }
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn items(&self) -> &[ElementKind] {
        &self.items
    }

    pub fn get(&self, i: usize) -> ElementKind {
        self.items[i]
    }

    pub fn element(&self, i: usize) -> DiamondElement {
        DiamondElement { k: self.k, kind: self.items[i] }
    }

    /// Copy with coordinate `i` replaced.
    pub fn with(&self, i: usize, kind: ElementKind) -> Self {
        let mut t = self.clone();
        t.items[i] = kind;
        t
    }

    pub fn set(&mut self, i: usize, kind: ElementKind) {
        self.items[i] = kind;
    }

    pub fn rank(&self) -> usize {
        self.items.iter().map(|e| e.rank()).sum()
    }

    pub fn is_bottom(&self) -> bool {
        self.items.iter().all(|&e| e == ElementKind::Bottom)
    }

    pub fn is_top(&self) -> bool {
        self.items.iter().all(|&e| e == ElementKind::Top)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(SfmError::KMismatch(self.k(), other.k()));
        }
        if self.n() != other.n() {
            return Err(SfmError::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        Ok(())
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.compatible(other)?;
        Ok(self.leq_unchecked(other))
    }

    pub(crate) fn leq_unchecked(&self, other: &Self) -> bool {
        self.items.iter().zip(&other.items).all(|(a, b)| a.leq(*b))
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(self.meet_unchecked(other))
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(self.join_unchecked(other))
    }

    pub(crate) fn meet_unchecked(&self, other: &Self) -> Self {
        let items = self.items.iter().zip(&other.items).map(|(a, b)| a.meet(*b)).collect();
        LatticeTuple { k: self.k, items }
    }

    pub(crate) fn join_unchecked(&self, other: &Self) -> Self {
        let items = self.items.iter().zip(&other.items).map(|(a, b)| a.join(*b)).collect();
        LatticeTuple { k: self.k, items }
    }

    /// Position in the enumeration order.
    pub fn index(&self) -> usize {
        let base = self.k() + 2;
        self.items.iter().fold(0, |acc, e| acc * base + e.code(self.k()))
    }

    pub fn from_index(n: usize, k: usize, mut idx: usize) -> Self {
        let base = k + 2;
        let mut items = vec![ElementKind::Bottom; n];
        for i in (0..n).rev() {
            items[i] = ElementKind::from_code(idx % base, k);
            idx /= base;
        }
        LatticeTuple { k: k as u8, items }
    }

    /// Coordinates where `self` is Bottom and `other` is Top.
    pub fn jumps_to(&self, other: &Self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.items[i] == ElementKind::Bottom && other.items[i] == ElementKind::Top)
            .collect()
    }

    /// Tuples covering `self` from above.
    pub fn upper_covers(&self) -> Vec<Self> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            match self.items[i] {
                ElementKind::Bottom => {
                    for a in 1..=self.k {
                        out.push(self.with(i, ElementKind::Atom(a)));
                    }
                }
                ElementKind::Atom(_) => out.push(self.with(i, ElementKind::Top)),
                ElementKind::Top => {}
            }
        }
        out
    }

    /// Tuples covered by `self`.
    pub fn lower_covers(&self) -> Vec<Self> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            match self.items[i] {
                ElementKind::Top => {
                    for a in 1..=self.k {
                        out.push(self.with(i, ElementKind::Atom(a)));
                    }
                }
                ElementKind::Atom(_) => out.push(self.with(i, ElementKind::Bottom)),
                ElementKind::Bottom => {}
            }
        }
        out
    }

    pub fn parse(s: &str, k: usize) -> Result<Self> {
        check_k(k)?;
        let items = s
            .split(',')
            .map(|p| parse_kind(p, k))
            .collect::<Result<Vec<_>>>()?;
        if items.is_empty() {
            return Err(SfmError::Parse("empty tuple".into()));
        }
        Ok(LatticeTuple { k: k as u8, items })
    }
}

impl fmt::Display for LatticeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.items.iter().map(|e| e.text()).collect();
        f.write_str(&parts.join(","))
    }
}

/// `v_i`: the first `i` coordinates Top, the rest Bottom.
pub fn chain_prefix(n: usize, k: usize, i: usize) -> Result<LatticeTuple> {
    check_k(k)?;
    if i > n {
        return Err(SfmError::OutOfRange(format!("prefix length {i} exceeds n={n}")));
    }
    let mut t = LatticeTuple::bottom(n, k);
    for j in 0..i {
        t.items[j] = ElementKind::Top;
    }
    Ok(t)
}

/// Number of tuples in `M_k^n`, saturating.
pub fn space_size(n: usize, k: usize) -> u128 {
    let mut s: u128 = 1;
    for _ in 0..n {
        s = s.saturating_mul(k as u128 + 2);
    }
    s
}

pub fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(SfmError::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// All tuples of `M_k^n` in enumeration order.
pub fn enumerate_tuples(n: usize, k: usize, budget: u128) -> Result<TupleIter> {
    check_k(k)?;
    if n == 0 {
        return precondition("n must be at least 1");
    }
    check_budget(space_size(n, k), budget)?;
    let bottom = LatticeTuple::bottom(n, k);
    Ok(TupleIter { choices: vec![all_elements(k); n], pos: vec![0; n], current: Some(bottom) })
}

fn all_elements(k: usize) -> Vec<ElementKind> {
    (0..k + 2).map(|c| ElementKind::from_code(c, k)).collect()
}

fn between(lo: ElementKind, hi: ElementKind, k: usize) -> Vec<ElementKind> {
    all_elements(k).into_iter().filter(|e| lo.leq(*e) && e.leq(hi)).collect()
}

/// All `t` with `a <= t <= b`, in enumeration order.
pub fn interval(a: &LatticeTuple, b: &LatticeTuple) -> Result<TupleIter> {
    if !a.leq(b)? {
        return precondition(format!("interval bounds not ordered: {a} vs {b}"));
    }
    let k = a.k();
    let choices: Vec<Vec<ElementKind>> =
        a.items.iter().zip(&b.items).map(|(&x, &y)| between(x, y, k)).collect();
    Ok(TupleIter { pos: vec![0; choices.len()], current: Some(a.clone()), choices })
}

/// Size of `interval(a, b)` without enumerating it; assumes `a <= b`.
pub fn interval_size(a: &LatticeTuple, b: &LatticeTuple) -> u128 {
    let k = a.k();
    a.items
        .iter()
        .zip(&b.items)
        .map(|(&x, &y)| between(x, y, k).len() as u128)
        .fold(1u128, |acc, s| acc.saturating_mul(s))
}

/// Odometer over a product of per-coordinate choice lists.
pub struct TupleIter {
    choices: Vec<Vec<ElementKind>>,
    pos: Vec<usize>,
    current: Option<LatticeTuple>,
}

impl Iterator for TupleIter {
    type Item = LatticeTuple;

    fn next(&mut self) -> Option<LatticeTuple> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = self.choices.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            self.pos[i] += 1;
            if self.pos[i] < self.choices[i].len() {
                cur.items[i] = self.choices[i][self.pos[i]];
                break;
            }
            self.pos[i] = 0;
            cur.items[i] = self.choices[i][0];
        }
        Some(out)
    }
}
