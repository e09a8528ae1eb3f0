//! Exact rationals with a machine-word fast path.
//!
//! Values are kept in the small representation whenever numerator and
//! denominator fit in an `i64`; arithmetic falls back to big integers on
//! overflow and demotes the result again when possible.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

#[derive(Clone)]
enum Repr {
    Small(Ratio<i64>),
    Big(BigRational),
}

/// An exact rational number.
#[derive(Clone)]
pub struct Rat(Repr);

impl Rat {
    pub fn from_int(v: i64) -> Rat {
        Rat::small(Ratio::from_integer(v))
    }

    /// `num / den`; panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Rat {
        assert!(den != 0, "zero denominator");
        match (num.checked_neg(), den.checked_neg()) {
            (Some(_), Some(_)) => Rat::small(Ratio::new(num, den)),
            _ => Rat::big(BigRational::new(BigInt::from(num), BigInt::from(den))),
        }
    }

    pub fn from_big(v: BigRational) -> Rat {
        Rat::big(v)
    }

    pub fn from_bigint(v: BigInt) -> Rat {
        Rat::big(BigRational::from_integer(v))
    }

    fn small(r: Ratio<i64>) -> Rat {
        if *r.numer() == i64::MIN || *r.denom() == i64::MIN {
            Rat(Repr::Big(BigRational::new_raw(
                BigInt::from(*r.numer()),
                BigInt::from(*r.denom()),
            )))
        } else {
            Rat(Repr::Small(r))
        }
    }

    fn big(r: BigRational) -> Rat {
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            if n != i64::MIN && d != i64::MIN {
                return Rat(Repr::Small(Ratio::new_raw(n, d)));
            }
        }
        Rat(Repr::Big(r))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => {
                BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
            }
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.numer()),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.denom()),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_integer(),
            Repr::Big(r) => r.is_integer(),
        }
    }

    /// The value as an `i64` if it is an integer in range.
    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(r) if r.is_integer() => Some(*r.numer()),
            Repr::Big(r) if r.is_integer() => r.numer().to_i64(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Exact conversion of a finite float.
    pub fn from_f64(v: f64) -> Option<Rat> {
        BigRational::from_float(v).map(Rat::big)
    }

    pub fn floor(&self) -> Rat {
        match &self.0 {
            Repr::Small(r) => Rat::from_int(r.numer().div_euclid(*r.denom())),
            Repr::Big(r) => Rat::big(r.floor()),
        }
    }

    pub fn ceil(&self) -> Rat {
        match &self.0 {
            // num-rational's ceil adds numer + denom, which can overflow.
            Repr::Small(r) => {
                let (p, q) = (*r.numer(), *r.denom());
                let fl = p.div_euclid(q);
                Rat::from_int(if p.rem_euclid(q) == 0 { fl } else { fl + 1 })
            }
            Repr::Big(r) => Rat::big(r.ceil()),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_positive(),
            Repr::Big(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_negative(),
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            Repr::Small(r) => Rat::small(r.recip()),
            Repr::Big(r) => Rat::big(r.recip()),
        }
    }

    /// True when `2 * self` is an integer.
    pub fn is_half_integer(&self) -> bool {
        let d = self.denom();
        d == BigInt::one() || d == BigInt::from(2)
    }

    /// Nearest point of the grid `(1/2)Z`, ties rounded up.
    pub fn round_half_grid(v: f64) -> Rat {
        Rat::new((v * 2.0).round() as i64, 2)
    }

    /// Canonical `p/q` text, always with an explicit denominator.
    pub fn to_pq(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    pub fn max(self, other: Rat) -> Rat {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Rat) -> Rat {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rat>>(values: I) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()))
}

/// Reduces `num / den` computed in 128 bits; `None` if it does not fit.
fn from_wide(num: i128, den: i128) -> Option<Rat> {
    let g = num.gcd(&den);
    let (mut n, mut d) = (num / g, den / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    match (i64::try_from(n), i64::try_from(d)) {
        (Ok(n), Ok(d)) if n != i64::MIN => Some(Rat(Repr::Small(Ratio::new_raw(n, d)))),
        _ => None,
    }
}

fn parts(r: &Ratio<i64>) -> (i128, i128) {
    (*r.numer() as i128, *r.denom() as i128)
}

fn add_wide(a: &Ratio<i64>, b: &Ratio<i64>) -> Option<Rat> {
    let ((p, q), (r, s)) = (parts(a), parts(b));
    from_wide(p * s + r * q, q * s)
}

fn sub_wide(a: &Ratio<i64>, b: &Ratio<i64>) -> Option<Rat> {
    let ((p, q), (r, s)) = (parts(a), parts(b));
    from_wide(p * s - r * q, q * s)
}

fn mul_wide(a: &Ratio<i64>, b: &Ratio<i64>) -> Option<Rat> {
    let ((p, q), (r, s)) = (parts(a), parts(b));
    from_wide(p * r, q * s)
}

fn div_wide(a: &Ratio<i64>, b: &Ratio<i64>) -> Option<Rat> {
    let ((p, q), (r, s)) = (parts(a), parts(b));
    from_wide(p * s, q * r)
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident, $wide:ident) => {
        impl<'a, 'b> $tr<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
                    if let Some(r) = a.$checked(b) {
                        return Rat::small(r);
                    }
                    if let Some(r) = $wide(a, b) {
                        return r;
                    }
                }
                Rat::big(self.to_big().$method(rhs.to_big()))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
        impl<'b> $tr<&'b Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add, add_wide);
binop!(Sub, sub, checked_sub, sub_wide);
binop!(Mul, mul, checked_mul, mul_wide);

impl<'a, 'b> Div<&'b Rat> for &'a Rat {
    type Output = Rat;
    fn div(self, rhs: &'b Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = a.checked_div(b) {
                return Rat::small(r);
            }
            if let Some(r) = div_wide(a, b) {
                return r;
            }
        }
        Rat::big(self.to_big() / rhs.to_big())
    }
}
impl Div<Rat> for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        (&self).div(&rhs)
    }
}
impl<'b> Div<&'b Rat> for Rat {
    type Output = Rat;
    fn div(self, rhs: &'b Rat) -> Rat {
        (&self).div(rhs)
    }
}
impl<'a> Div<Rat> for &'a Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        self.div(&rhs)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match &self.0 {
            Repr::Small(r) => Rat(Repr::Small(-r)),
            Repr::Big(r) => Rat::big(-r),
        }
    }
}
impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = &*self + rhs;
    }
}
impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = &*self + &rhs;
    }
}
impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        *self = &*self - rhs;
    }
}
impl SubAssign<Rat> for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        *self = &*self - &rhs;
    }
}
impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        *self = &*self * rhs;
    }
}

impl Zero for Rat {
    fn zero() -> Rat {
        Rat::from_int(0)
    }
    fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_zero(),
            Repr::Big(r) => r.is_zero(),
        }
    }
}

impl One for Rat {
    fn one() -> Rat {
        Rat::from_int(1)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl From<i64> for Rat {
    fn from(v: i64) -> Rat {
        Rat::from_int(v)
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Rat) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            // Canonical forms never mix small and big for the same value.
            _ => false,
        }
    }
}
impl Eq for Rat {}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(r) => {
                r.numer().hash(state);
                r.denom().hash(state);
            }
            Repr::Big(r) => {
                r.numer().hash(state);
                r.denom().hash(state);
            }
        }
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}
impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) => write!(f, "{}", r),
            Repr::Big(r) => write!(f, "{}", r),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRatError(pub String);

impl fmt::Display for ParseRatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational {:?}", self.0)
    }
}

impl std::error::Error for ParseRatError {}

impl FromStr for Rat {
    type Err = ParseRatError;
    fn from_str(s: &str) -> Result<Rat, ParseRatError> {
        let err = || ParseRatError(s.to_string());
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Rat::big(BigRational::new(n, d)))
    }
}
