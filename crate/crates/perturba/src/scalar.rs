//! Scalar abstraction: exact rationals (the default — every identity in the
//! perturbation calculus is checked with residual exactly zero) and `f64`
//! with an explicit comparison tolerance for the analytic pipelines.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

pub type Rat = BigRational;

/// Comparison tolerance for `f64` computations. Exact scalars ignore it.
///
/// Two floats are considered equal when |x - y| <= tau * (1 + max(|x|, |y|)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub tau: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { tau: 1e-9 }
    }
}

impl Tol {
    pub fn new(tau: f64) -> Self {
        Tol { tau }
    }
}

/// Outcome of examining a candidate pivot during row reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotClass {
    Zero,
    /// Magnitude within [tau/10, 10 tau]: the rank decision would be a guess.
    Ambiguous,
    Usable,
}

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact and zero tests need no tolerance.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Multiplicative inverse; `None` for (exact) zero.
    fn inv(&self) -> Option<Self>;
    /// Structural zero test (exact, no tolerance).
    fn is_zero(&self) -> bool;
    /// Zero test used in rank decisions: exact for rationals, thresholded for floats.
    fn is_zero_within(&self, tol: &Tol) -> bool;
    fn approx_eq(&self, rhs: &Self, tol: &Tol) -> bool;
    /// |x| as f64 (approximate for big rationals; used for pivot choice and norms).
    fn magnitude(&self) -> f64;
    fn to_f64(&self) -> f64;
    fn pivot_class(&self, tol: &Tol) -> PivotClass;
    /// Strictly greater than zero (exact sign for rationals).
    fn is_positive(&self) -> bool;
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as One>::one()
    }
    fn from_i64(n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat::new(BigInt::from(num), BigInt::from(den))
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_zero_within(&self, _tol: &Tol) -> bool {
        Zero::is_zero(self)
    }
    fn approx_eq(&self, rhs: &Self, _tol: &Tol) -> bool {
        self == rhs
    }
    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn pivot_class(&self, _tol: &Tol) -> PivotClass {
        if Zero::is_zero(self) {
            PivotClass::Zero
        } else {
            PivotClass::Usable
        }
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_zero_within(&self, tol: &Tol) -> bool {
        self.abs() <= tol.tau
    }
    fn approx_eq(&self, rhs: &Self, tol: &Tol) -> bool {
        (self - rhs).abs() <= tol.tau * (1.0 + self.abs().max(rhs.abs()))
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pivot_class(&self, tol: &Tol) -> PivotClass {
        let m = self.abs();
        if m < tol.tau / 10.0 {
            PivotClass::Zero
        } else if m <= tol.tau * 10.0 {
            PivotClass::Ambiguous
        } else {
            PivotClass::Usable
        }
    }
    fn is_positive(&self) -> bool {
        *self > 0.0
    }
}

/// Parse "p/q" or "p" into an exact rational.
pub fn rat_from_str(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if Zero::is_zero(&q) {
                None
            } else {
                Some(Rat::new(p, q))
            }
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(Rat::from_integer(p))
        }
    }
}
