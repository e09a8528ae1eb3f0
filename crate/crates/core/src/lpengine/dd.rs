//! Vertex enumeration by the double description method on the homogenized
//! cone `{(x, tau) : a x <= b tau, tau >= 0}`, with integer rays and the
//! combinatorial adjacency test.

use super::{LinearSystem, Relation};
use crate::error::{Result, SfmError};
use crate::rational::{common_denominator, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

#[derive(Clone)]
struct Ray {
    v: Vec<BigInt>,
    zeros: Vec<u64>,
}

fn bit_set(s: &mut [u64], i: usize) {
    s[i / 64] |= 1 << (i % 64);
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn ones(a: &[u64]) -> usize {
    a.iter().map(|w| w.count_ones() as usize).sum()
}

fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut s = BigInt::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    v
}

/// `s * p + t * q`.
fn combine(s: &BigInt, p: &[BigInt], t: &BigInt, q: &[BigInt]) -> Vec<BigInt> {
    primitive(p.iter().zip(q).map(|(x, y)| s * x + t * y).collect())
}

fn integer_row(coef: &[Rat], rhs: &Rat, sign: i64) -> Vec<BigInt> {
    let l = common_denominator(coef.iter().chain(std::iter::once(rhs)));
    let scale = |r: &Rat| (r.numer() * (&l / r.denom())) * sign;
    let mut h: Vec<BigInt> = coef.iter().map(scale).collect();
    h.push(-scale(rhs));
    h
}

/// All vertices of `sys`, which must have at most `max_dim` variables.
/// Returns an empty list when the system is infeasible or has no vertices.
pub fn vertices_dense(sys: &LinearSystem, max_dim: usize) -> Result<Vec<Vec<Rat>>> {
    let d = sys.dim;
    if d > max_dim {
        return Err(SfmError::BudgetExceeded { needed: d as u128, budget: max_dim as u128 });
    }
    let dd = d + 1;
    // Homogenized halfspaces h . (x, tau) <= 0.
    let mut hs: Vec<Vec<BigInt>> = Vec::new();
    let mut tau = vec![BigInt::zero(); dd];
    tau[d] = BigInt::from(-1);
    hs.push(tau);
    for j in 0..d {
        let mut e = vec![Rat::zero(); d];
        e[j] = Rat::from_int(1);
        if let Some(u) = &sys.upper[j] {
            hs.push(integer_row(&e, u, 1));
        }
        if let Some(l) = &sys.lower[j] {
            hs.push(integer_row(&e, l, -1));
        }
    }
    for row in &sys.rows {
        match row.rel {
            Relation::Le => hs.push(integer_row(&row.coef, &row.rhs, 1)),
            Relation::Ge => hs.push(integer_row(&row.coef, &row.rhs, -1)),
            Relation::Eq => {
                hs.push(integer_row(&row.coef, &row.rhs, 1));
                hs.push(integer_row(&row.coef, &row.rhs, -1));
            }
        }
    }
    let words = hs.len().div_ceil(64);
    let mut lineality: Vec<Vec<BigInt>> = (0..dd)
        .map(|j| {
            let mut e = vec![BigInt::zero(); dd];
            e[j] = BigInt::from(1);
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();
    let mut processed = vec![0u64; words];
    for (c, h) in hs.iter().enumerate() {
        if let Some(pos) = lineality.iter().position(|l| !idot(h, l).is_zero()) {
            let mut ls = lineality.swap_remove(pos);
            let mut s = idot(h, &ls);
            if s.is_positive() {
                ls.iter_mut().for_each(|x| *x = -&*x);
                s = -s;
            }
            let neg_s = -&s;
            for l in lineality.iter_mut() {
                let hl = idot(h, l);
                if !hl.is_zero() {
                    *l = combine(&neg_s, l, &hl, &ls);
                }
            }
            for r in rays.iter_mut() {
                let hr = idot(h, &r.v);
                if !hr.is_zero() {
                    r.v = combine(&neg_s, &r.v, &hr, &ls);
                }
                bit_set(&mut r.zeros, c);
            }
            rays.push(Ray { v: ls, zeros: processed.clone() });
        } else {
            let vals: Vec<BigInt> = rays.iter().map(|r| idot(h, &r.v)).collect();
            let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
            let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
            let min_common = (dd - lineality.len()).saturating_sub(2);
            let mut next: Vec<Ray> = Vec::new();
            for &p in &pos {
                for &q in &neg {
                    let common: Vec<u64> =
                        rays[p].zeros.iter().zip(&rays[q].zeros).map(|(a, b)| a & b).collect();
                    if ones(&common) < min_common {
                        continue;
                    }
                    let blocked = rays
                        .iter()
                        .enumerate()
                        .any(|(i, r)| i != p && i != q && subset(&common, &r.zeros));
                    if blocked {
                        continue;
                    }
                    let v = combine(&vals[p], &rays[q].v, &(-&vals[q]), &rays[p].v);
                    let mut zeros = common;
                    bit_set(&mut zeros, c);
                    next.push(Ray { v, zeros });
                }
            }
            let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + next.len());
            for (i, mut r) in rays.into_iter().enumerate() {
                if vals[i].is_zero() {
                    bit_set(&mut r.zeros, c);
                    kept.push(r);
                } else if vals[i].is_negative() {
                    kept.push(r);
                }
            }
            kept.extend(next);
            rays = kept;
        }
        bit_set(&mut processed, c);
    }
    if !lineality.is_empty() {
        return Ok(Vec::new());
    }
    let mut out: Vec<Vec<Rat>> = rays
        .iter()
        .filter(|r| r.v[d].is_positive())
        .map(|r| {
            let t = &r.v[d];
            r.v[..d]
                .iter()
                .map(|x| Rat::from_big(num_rational::BigRational::new(x.clone(), t.clone())))
                .collect()
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}
