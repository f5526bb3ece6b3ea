//! Scalar abstractions shared by the field, series and barrier code.
//!
//! [`Arith`] is the ring interface (enough to evaluate polynomials and
//! Leibniz sums); [`Real`] adds division and ordering. `f64`, [`BigReal`],
//! [`Interval`](crate::interval::Interval) and
//! [`Poly`](crate::poly::Poly) implement the parts they can.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

pub trait Arith:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

pub trait Real: Arith + Div<Output = Self> + PartialOrd {
    /// True when plain summation loses enough digits that compensated sums pay off.
    const NEEDS_COMPENSATION: bool;
    /// False when the exponent range is effectively unbounded.
    const BOUNDED_EXPONENT: bool;

    fn sqrt(&self) -> Self;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// Scientific notation with 17 significant digits.
    fn to_sci(&self) -> String;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_f64(num as f64) / Self::from_f64(den as f64)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Arith for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Real for f64 {
    const NEEDS_COMPENSATION: bool = true;
    const BOUNDED_EXPONENT: bool = true;

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn to_sci(&self) -> String {
        format!("{:.16e}", self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

/// Working precision of [`BigReal`] in bits.
pub const BIG_PRECISION: usize = 256;

type Big = FBig<HalfEven, 2>;

/// Binary floating point with [`BIG_PRECISION`] bits and an unbounded exponent.
#[derive(Clone, PartialEq)]
pub struct BigReal(Big);

impl BigReal {
    fn wrap(x: Big) -> Self {
        BigReal(x.with_precision(BIG_PRECISION).value())
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci())
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci())
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.0.cmp(&other.0))
    }
}

impl Add for BigReal {
    type Output = BigReal;
    fn add(self, rhs: BigReal) -> BigReal {
        BigReal(self.0 + rhs.0)
    }
}

impl Sub for BigReal {
    type Output = BigReal;
    fn sub(self, rhs: BigReal) -> BigReal {
        BigReal(self.0 - rhs.0)
    }
}

impl Mul for BigReal {
    type Output = BigReal;
    fn mul(self, rhs: BigReal) -> BigReal {
        BigReal(self.0 * rhs.0)
    }
}

impl Div for BigReal {
    type Output = BigReal;
    fn div(self, rhs: BigReal) -> BigReal {
        BigReal(self.0 / rhs.0)
    }
}

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl Arith for BigReal {
    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "BigReal::from_f64 on non-finite value {x}");
        BigReal::wrap(Big::try_from(x).expect("finite f64 converts exactly"))
    }
}

impl Real for BigReal {
    const NEEDS_COMPENSATION: bool = false;
    const BOUNDED_EXPONENT: bool = false;

    fn sqrt(&self) -> Self {
        BigReal(self.0.sqrt())
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn to_sci(&self) -> String {
        let dec: FBig<HalfEven, 10> = self.0.clone().with_base_and_precision::<10>(17).value();
        format!("{:e}", dec)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigReal::wrap(Big::from(num)) / BigReal::wrap(Big::from(den))
    }
    fn from_usize(n: usize) -> Self {
        BigReal::wrap(Big::from(n as u64))
    }
}

/// Sum of `terms`; Neumaier-compensated when `compensated` is set.
pub fn sum_terms<T: Real>(terms: impl IntoIterator<Item = T>, compensated: bool) -> T {
    let mut s = T::zero();
    if !compensated {
        for t in terms {
            s = s + t;
        }
        return s;
    }
    let mut c = T::zero();
    for t in terms {
        let u = s.clone() + t.clone();
        if s.abs() >= t.abs() {
            c = c + ((s - u.clone()) + t);
        } else {
            c = c + ((t - u.clone()) + s);
        }
        s = u;
    }
    s + c
}
