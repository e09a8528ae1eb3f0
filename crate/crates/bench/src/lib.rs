//! Fixed inputs shared by the benchmarks.

use sfm_core::oracle::random_submodular;
use sfm_core::TabulatedFunction;

/// Seeded instance with values bounded by 20.
pub fn instance(n: usize, k: usize, seed: u64) -> TabulatedFunction {
    random_submodular(n, k, 20, seed).expect("generator succeeds at bench sizes")
}
