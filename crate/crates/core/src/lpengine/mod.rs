//! Exact linear programming and oracle-driven optimization.

mod dd;
mod ellipsoid;
mod oracle_opt;
mod simplex;

pub use dd::vertices_dense;
pub use oracle_opt::{
    membership_from_optimization, oracle_optimize, Engine, OptAnswer, OptimizationOracle,
    OracleOptConfig, OracleOutcome, SepResult, SeparationOracle, ZeroMembership,
};
pub use simplex::{feasibility, solve_lp_dense, solve_lp_lex, Farkas, LpOutcome};

use crate::rational::Rat;
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub coef: Vec<Rat>,
    pub rel: Relation,
    pub rhs: Rat,
}

impl Row {
    pub fn new(coef: Vec<Rat>, rel: Relation, rhs: Rat) -> Row {
        Row { coef, rel, rhs }
    }

    pub fn lhs(&self, x: &[Rat]) -> Rat {
        dot(&self.coef, x)
    }

    pub fn satisfied(&self, x: &[Rat]) -> bool {
        let l = self.lhs(x);
        match self.rel {
            Relation::Le => l <= self.rhs,
            Relation::Eq => l == self.rhs,
            Relation::Ge => l >= self.rhs,
        }
    }
}

pub(crate) fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

/// Rows plus optional per-variable bounds. Variables are free by default.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub dim: usize,
    pub rows: Vec<Row>,
    pub lower: Vec<Option<Rat>>,
    pub upper: Vec<Option<Rat>>,
}

impl LinearSystem {
    pub fn new(dim: usize) -> Self {
        LinearSystem { dim, rows: Vec::new(), lower: vec![None; dim], upper: vec![None; dim] }
    }

    /// All variables bounded below by zero.
    pub fn nonnegative(dim: usize) -> Self {
        let mut s = Self::new(dim);
        s.lower = vec![Some(Rat::zero()); dim];
        s
    }

    pub fn add_row(&mut self, coef: Vec<Rat>, rel: Relation, rhs: Rat) {
        assert_eq!(coef.len(), self.dim, "row length does not match system dimension");
        self.rows.push(Row { coef, rel, rhs });
    }

    pub fn push(&mut self, row: Row) {
        assert_eq!(row.coef.len(), self.dim, "row length does not match system dimension");
        self.rows.push(row);
    }

    pub fn set_bounds(&mut self, j: usize, lo: Option<Rat>, hi: Option<Rat>) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        x.len() == self.dim
            && self.rows.iter().all(|r| r.satisfied(x))
            && (0..self.dim).all(|j| {
                self.lower[j].as_ref().map_or(true, |l| &x[j] >= l)
                    && self.upper[j].as_ref().map_or(true, |u| &x[j] <= u)
            })
    }
}
