//! Bounded-variable primal simplex over exact rationals, Bland's rule.
//!
//! Each constraint row gets a slack `A_r x + s_r = b_r` whose bounds encode
//! the relation. Rows whose slack cannot absorb the initial residual get an
//! artificial variable; phase 1 drives those to zero. Several objectives are
//! optimized lexicographically: a later objective may only move variables
//! whose reduced costs vanish for every earlier one.

use super::{dot, LinearSystem, Relation};
use crate::rational::Rat;
use num_traits::{One, Zero};

/// Multipliers proving infeasibility: `y` on rows, and on lower/upper bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Farkas {
    pub rows: Vec<Rat>,
    pub lower: Vec<Rat>,
    pub upper: Vec<Rat>,
}

impl Farkas {
    /// Checks `y A + u - l = 0`, sign conditions and `y b + u.hi - l.lo < 0`.
    pub fn verify(&self, sys: &LinearSystem) -> bool {
        if self.rows.len() != sys.rows.len() || self.lower.len() != sys.dim || self.upper.len() != sys.dim {
            return false;
        }
        let mut total = Rat::zero();
        let mut g = vec![Rat::zero(); sys.dim];
        for (y, row) in self.rows.iter().zip(&sys.rows) {
            let ok = match row.rel {
                Relation::Le => !y.is_negative(),
                Relation::Ge => !y.is_positive(),
                Relation::Eq => true,
            };
            if !ok {
                return false;
            }
            if y.is_zero() {
                continue;
            }
            total += y * &row.rhs;
            for (gj, a) in g.iter_mut().zip(&row.coef) {
                if !a.is_zero() {
                    *gj += y * a;
                }
            }
        }
        for j in 0..sys.dim {
            let (l, u) = (&self.lower[j], &self.upper[j]);
            if l.is_negative() || u.is_negative() || &g[j] + u - l != Rat::zero() {
                return false;
            }
            if !l.is_zero() {
                match &sys.lower[j] {
                    Some(lo) => total -= l * lo,
                    None => return false,
                }
            }
            if !u.is_zero() {
                match &sys.upper[j] {
                    Some(hi) => total += u * hi,
                    None => return false,
                }
            }
        }
        total.is_negative()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { point: Vec<Rat>, value: Rat },
    Infeasible { farkas: Option<Farkas> },
    /// A feasible point and a direction along which the objective grows.
    Unbounded { point: Vec<Rat>, ray: Vec<Rat> },
}

/// Maximize `objective . x` over `sys`.
pub fn solve_lp_dense(sys: &LinearSystem, objective: &[Rat]) -> LpOutcome {
    solve_lp_lex(sys, &[objective.to_vec()])
}

/// Lexicographic maximization; the reported value is that of the first objective.
pub fn solve_lp_lex(sys: &LinearSystem, objectives: &[Vec<Rat>]) -> LpOutcome {
    for c in objectives {
        assert_eq!(c.len(), sys.dim, "objective length does not match system dimension");
    }
    let mut tab = Tableau::build(sys);
    if tab.n_art > 0 {
        let mut c1 = vec![Rat::zero(); tab.ncols];
        for j in tab.art_start..tab.ncols {
            c1[j] = -Rat::one();
        }
        tab.objs = vec![tab.reduced_costs(&c1)];
        tab.run(0);
        let infeasibility: Rat = (tab.art_start..tab.ncols).map(|j| tab.x[j].clone()).sum();
        if infeasibility.is_positive() {
            let farkas = tab.farkas(sys);
            return LpOutcome::Infeasible { farkas };
        }
        for j in tab.art_start..tab.ncols {
            tab.lo[j] = Some(Rat::zero());
            tab.up[j] = Some(Rat::zero());
        }
    }
    tab.objs = objectives
        .iter()
        .map(|c| {
            let mut full = vec![Rat::zero(); tab.ncols];
            full[..sys.dim].clone_from_slice(c);
            tab.reduced_costs(&full)
        })
        .collect();
    for level in 0..objectives.len() {
        if let Some((j, up)) = tab.run(level) {
            let ray = tab.ray(j, up);
            return LpOutcome::Unbounded { point: tab.x[..sys.dim].to_vec(), ray };
        }
    }
    tab.crossover();
    let point = tab.x[..sys.dim].to_vec();
    let value = objectives.first().map_or(Rat::zero(), |c| dot(c, &point));
    LpOutcome::Optimal { point, value }
}

/// A feasible point, or `None` when the system is infeasible.
pub fn feasibility(sys: &LinearSystem) -> Option<Vec<Rat>> {
    match solve_lp_lex(sys, &[]) {
        LpOutcome::Optimal { point, .. } => Some(point),
        LpOutcome::Unbounded { point, .. } => Some(point),
        LpOutcome::Infeasible { .. } => None,
    }
}

struct Tableau {
    dim: usize,
    m: usize,
    ncols: usize,
    art_start: usize,
    n_art: usize,
    a: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    x: Vec<Rat>,
    lo: Vec<Option<Rat>>,
    up: Vec<Option<Rat>>,
    objs: Vec<Vec<Rat>>,
}

impl Tableau {
    fn build(sys: &LinearSystem) -> Tableau {
        let d = sys.dim;
        let m = sys.rows.len();
        let mut x: Vec<Rat> = (0..d)
            .map(|j| {
                sys.lower[j]
                    .clone()
                    .or_else(|| sys.upper[j].clone())
                    .unwrap_or_else(Rat::zero)
            })
            .collect();
        let mut lo = sys.lower.clone();
        let mut up = sys.upper.clone();
        let mut need_art = Vec::with_capacity(m);
        let mut slack_vals = Vec::with_capacity(m);
        for row in &sys.rows {
            let resid = &row.rhs - dot(&row.coef, &x);
            let fits = match row.rel {
                Relation::Le => !resid.is_negative(),
                Relation::Ge => !resid.is_positive(),
                Relation::Eq => resid.is_zero(),
            };
            let (slo, sup) = match row.rel {
                Relation::Le => (Some(Rat::zero()), None),
                Relation::Ge => (None, Some(Rat::zero())),
                Relation::Eq => (Some(Rat::zero()), Some(Rat::zero())),
            };
            lo.push(slo);
            up.push(sup);
            if fits {
                slack_vals.push(resid);
                need_art.push(None);
            } else {
                slack_vals.push(Rat::zero());
                need_art.push(Some(resid));
            }
        }
        x.extend(slack_vals);
        let n_art = need_art.iter().filter(|r| r.is_some()).count();
        let art_start = d + m;
        let ncols = art_start + n_art;
        let mut a = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = art_start;
        for (r, row) in sys.rows.iter().enumerate() {
            let mut t = vec![Rat::zero(); ncols];
            t[..d].clone_from_slice(&row.coef);
            t[d + r] = Rat::one();
            match &need_art[r] {
                None => basis.push(d + r),
                Some(resid) => {
                    if resid.is_negative() {
                        for v in t.iter_mut() {
                            if !v.is_zero() {
                                *v = -&*v;
                            }
                        }
                    }
                    t[next_art] = Rat::one();
                    x.push(resid.abs());
                    lo.push(Some(Rat::zero()));
                    up.push(None);
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            a.push(t);
        }
        let mut is_basic = vec![false; ncols];
        for &b in &basis {
            is_basic[b] = true;
        }
        Tableau { dim: d, m, ncols, art_start, n_art, a, basis, is_basic, x, lo, up, objs: Vec::new() }
    }

    fn reduced_costs(&self, c: &[Rat]) -> Vec<Rat> {
        let mut d = c.to_vec();
        for r in 0..self.m {
            let cb = &c[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.a[r].iter().enumerate() {
                if !v.is_zero() {
                    d[j] -= cb * v;
                }
            }
        }
        d
    }

    fn fixed(&self, j: usize) -> bool {
        matches!((&self.lo[j], &self.up[j]), (Some(l), Some(u)) if l == u)
    }

    fn entering(&self, level: usize) -> Option<(usize, bool)> {
        for j in 0..self.ncols {
            if self.is_basic[j] || self.fixed(j) {
                continue;
            }
            if self.objs[..level].iter().any(|o| !o[j].is_zero()) {
                continue;
            }
            let dj = &self.objs[level][j];
            if dj.is_positive() && self.up[j].as_ref().map_or(true, |u| &self.x[j] < u) {
                return Some((j, true));
            }
            if dj.is_negative() && self.lo[j].as_ref().map_or(true, |l| &self.x[j] > l) {
                return Some((j, false));
            }
        }
        None
    }

    /// Smallest step for moving column `j`, ties to the smallest variable index.
    fn ratio(&self, j: usize, up: bool) -> Option<(Rat, usize, Option<usize>)> {
        let mut best: Option<(Rat, usize, Option<usize>)> = None;
        let mut consider = |theta: Rat, var: usize, row: Option<usize>| {
            let better = match &best {
                None => true,
                Some((t, v, _)) => theta < *t || (theta == *t && var < *v),
            };
            if better {
                best = Some((theta, var, row));
            }
        };
        if up {
            if let Some(u) = &self.up[j] {
                consider(u - &self.x[j], j, None);
            }
        } else if let Some(l) = &self.lo[j] {
            consider(&self.x[j] - l, j, None);
        }
        for r in 0..self.m {
            let alpha = &self.a[r][j];
            if alpha.is_zero() {
                continue;
            }
            let b = self.basis[r];
            let increases = alpha.is_negative() == up;
            let mag = alpha.abs();
            if increases {
                if let Some(u) = &self.up[b] {
                    consider((u - &self.x[b]) / &mag, b, Some(r));
                }
            } else if let Some(l) = &self.lo[b] {
                consider((&self.x[b] - l) / &mag, b, Some(r));
            }
        }
        best
    }

    fn step(&mut self, j: usize, up: bool, theta: &Rat, row: Option<usize>) {
        if !theta.is_zero() {
            let step = if up { theta.clone() } else { -theta };
            self.x[j] += &step;
            for r in 0..self.m {
                let alpha = &self.a[r][j];
                if !alpha.is_zero() {
                    let delta = alpha * &step;
                    self.x[self.basis[r]] -= delta;
                }
            }
        }
        if let Some(r) = row {
            self.pivot(r, j);
        }
    }

    /// Optimizes objective `level`; returns the entering column on unboundedness.
    fn run(&mut self, level: usize) -> Option<(usize, bool)> {
        while let Some((j, up)) = self.entering(level) {
            let Some((theta, _, row)) = self.ratio(j, up) else {
                return Some((j, up));
            };
            self.step(j, up, &theta, row);
        }
        None
    }

    /// Pivots nonbasic free columns into the basis where possible, so the
    /// final point is a vertex whenever the feasible set is pointed. All
    /// reduced costs of such columns vanish at an optimum, so objectives
    /// are unchanged.
    fn crossover(&mut self) {
        for j in 0..self.dim {
            if self.is_basic[j] || self.lo[j].is_some() || self.up[j].is_some() {
                continue;
            }
            for up in [true, false] {
                if let Some((theta, _, Some(row))) = self.ratio(j, up) {
                    self.step(j, up, &theta, Some(row));
                    break;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.a[r][j].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for v in self.a[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let nz: Vec<usize> = (0..self.ncols).filter(|&q| !self.a[r][q].is_zero()).collect();
        let prow: Vec<(usize, Rat)> = nz.iter().map(|&q| (q, self.a[r][q].clone())).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i][j].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.a[i];
            for (q, v) in &prow {
                row[*q] -= &f * v;
            }
        }
        for obj in self.objs.iter_mut() {
            let f = obj[j].clone();
            if f.is_zero() {
                continue;
            }
            for (q, v) in &prow {
                obj[*q] -= &f * v;
            }
        }
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }

    fn ray(&self, j: usize, up: bool) -> Vec<Rat> {
        let sign = if up { Rat::one() } else { -Rat::one() };
        let mut ray = vec![Rat::zero(); self.dim];
        if j < self.dim {
            ray[j] = sign.clone();
        }
        for r in 0..self.m {
            let b = self.basis[r];
            if b < self.dim && !self.a[r][j].is_zero() {
                ray[b] = -(&self.a[r][j] * &sign);
            }
        }
        ray
    }

    /// Phase-1 duals, checked as an infeasibility proof before returning.
    fn farkas(&self, sys: &LinearSystem) -> Option<Farkas> {
        let mut y = vec![Rat::zero(); self.m];
        for i in 0..self.m {
            if self.basis[i] >= self.art_start {
                for (r, yr) in y.iter_mut().enumerate() {
                    let v = &self.a[i][self.dim + r];
                    if !v.is_zero() {
                        *yr -= v;
                    }
                }
            }
        }
        for cand in [y.clone(), y.iter().map(|v| -v).collect::<Vec<_>>()] {
            let mut g = vec![Rat::zero(); sys.dim];
            for (yr, row) in cand.iter().zip(&sys.rows) {
                if yr.is_zero() {
                    continue;
                }
                for (gj, a) in g.iter_mut().zip(&row.coef) {
                    if !a.is_zero() {
                        *gj += yr * a;
                    }
                }
            }
            let lower = g.iter().map(|v| if v.is_positive() { v.clone() } else { Rat::zero() }).collect();
            let upper = g.iter().map(|v| if v.is_negative() { -v } else { Rat::zero() }).collect();
            let f = Farkas { rows: cand, lower, upper };
            if f.verify(sys) {
                return Some(f);
            }
        }
        None
    }
}
