//! Submodular function minimization over products of diamond lattices.
//!
//! A diamond `M_k` has a bottom, `k >= 3` pairwise incomparable atoms and a
//! top. Functions on `M_k^n` are given by value oracles; minimization runs
//! through separation and optimization over the submodular polyhedron
//! `P_M(f)`, with exact rational arithmetic throughout.

pub mod certify;
pub mod error;
pub mod greedy;
pub mod lattice;
pub mod lpengine;
pub mod minimize;
pub mod oracle;
pub mod polytope;
pub mod rational;
pub mod setsfm;

pub use error::{Result, SfmError};
pub use lattice::{DiamondElement, ElementKind, LatticeTuple};
pub use oracle::{Oracle, TabulatedFunction};
pub use polytope::PVector;
pub use rational::Rat;
