//! Outward-rounded interval arithmetic on `f64` endpoints.
//!
//! Rounding is done without touching the FPU mode: every endpoint operation
//! recovers its exact rounding error with an error-free transform (TwoSum,
//! FMA-based TwoProduct, FMA remainders for division and square root) and steps
//! one ulp outward only when the rounded result is on the wrong side. Exact
//! results therefore stay exact.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Arith;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval endpoints [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("division by an interval containing zero: {0}")]
    DivisionByIntervalContainingZero(Interval),
    #[error("square root of an interval with negative part: {0}")]
    NegativeSqrt(Interval),
    #[error("box has no splittable dimension")]
    DegenerateBox,
    #[error("box is unbounded")]
    UnboundedBox,
    #[error("box has no dimensions")]
    EmptyBox,
    #[error("cannot parse interval endpoint {0:?}")]
    Parse(String),
}

/// Closed interval `[lo, hi]` with `lo <= hi`; endpoints may be infinite.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[String; 2]", into = "[String; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

// Rounding helpers. `exact` is the rounded result, `err` the signed error
// (true = exact + err) when it is representable.

fn fix_down(s: f64, err: f64) -> f64 {
    if s == f64::INFINITY {
        return f64::MAX;
    }
    if !s.is_finite() {
        return s;
    }
    if err < 0.0 || err.is_nan() {
        s.next_down()
    } else {
        s
    }
}

fn fix_up(s: f64, err: f64) -> f64 {
    if s == f64::NEG_INFINITY {
        return f64::MIN;
    }
    if !s.is_finite() {
        return s;
    }
    if err > 0.0 || err.is_nan() {
        s.next_up()
    } else {
        s
    }
}

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

fn inf_operand(a: f64, b: f64) -> bool {
    a.is_infinite() || b.is_infinite()
}

pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if inf_operand(a, b) {
        return s;
    }
    fix_down(s, two_sum_err(a, b, s))
}

pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if inf_operand(a, b) {
        return s;
    }
    fix_up(s, two_sum_err(a, b, s))
}

// Products below this magnitude may have inexact FMA residuals (underflow).
const TINY: f64 = 1e-290;

fn mul_err(a: f64, b: f64, p: f64) -> f64 {
    if p.abs() < TINY && p != 0.0 {
        return f64::NAN;
    }
    if p == 0.0 {
        // a*b underflowed to zero unless an operand is zero.
        return if a == 0.0 || b == 0.0 {
            0.0
        } else if (a > 0.0) == (b > 0.0) {
            1.0
        } else {
            -1.0
        };
    }
    a.mul_add(b, -p)
}

pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if inf_operand(a, b) {
        return p;
    }
    fix_down(p, mul_err(a, b, p))
}

pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if inf_operand(a, b) {
        return p;
    }
    fix_up(p, mul_err(a, b, p))
}

fn div_err(a: f64, b: f64, q: f64) -> f64 {
    if q == 0.0 {
        if a == 0.0 {
            return 0.0;
        }
        return if (a > 0.0) == (b > 0.0) { 1.0 } else { -1.0 };
    }
    if q.abs() < TINY || a.abs() < TINY {
        return f64::NAN;
    }
    // a = q*b + r exactly; true quotient = q + r/b.
    let r = (-q).mul_add(b, a);
    if r == 0.0 {
        0.0
    } else if (r > 0.0) == (b > 0.0) {
        1.0
    } else {
        -1.0
    }
}

fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if inf_operand(a, b) {
        return q;
    }
    fix_down(q, div_err(a, b, q))
}

fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if inf_operand(a, b) {
        return q;
    }
    fix_up(q, div_err(a, b, q))
}

fn sqrt_err(x: f64, s: f64) -> f64 {
    if s == 0.0 || s.is_infinite() {
        return 0.0;
    }
    if x < TINY {
        return f64::NAN;
    }
    (-s).mul_add(s, x)
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(IntervalError::InvalidBounds { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x).expect("point interval from a non-NaN finite value")
    }

    pub fn entire() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    /// Smallest interval containing the real number whose nearest double is `x`,
    /// i.e. `x` widened by one ulp on each side.
    pub fn around(x: f64) -> Self {
        Interval::new(x.next_down(), x.next_up()).expect("finite value")
    }

    /// Enclosure of the rational `num/den`.
    pub fn ratio(num: i64, den: i64) -> Result<Self, IntervalError> {
        let n = Interval::point(num as f64);
        let d = Interval::point(den as f64);
        assert!((num as f64) as i64 == num && (den as f64) as i64 == den, "ratio parts exceed 2^53");
        iv_div(n, d)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        add_up(self.hi, -self.lo)
    }

    pub fn mid(&self) -> f64 {
        if self.lo.is_infinite() || self.hi.is_infinite() {
            return if self.lo.is_infinite() && self.hi.is_infinite() {
                0.0
            } else if self.lo.is_infinite() {
                f64::MIN
            } else {
                f64::MAX
            };
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    pub fn rad(&self) -> f64 {
        let m = self.mid();
        add_up(self.hi, -m).max(add_up(m, -self.lo))
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0.0
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Tight square: never dips below zero.
    pub fn sqr(&self) -> Interval {
        let a = self.lo.abs().min(self.hi.abs());
        let b = self.lo.abs().max(self.hi.abs());
        let lo = if self.contains_zero() { 0.0 } else { mul_down(a, a) };
        Interval { lo, hi: mul_up(b, b) }
    }

    /// Tight integer power.
    pub fn powi(&self, n: u32) -> Interval {
        match n {
            0 => Interval::point(1.0),
            1 => *self,
            _ if n % 2 == 0 => {
                let h = self.powi(n / 2);
                h.sqr()
            }
            _ => {
                let lo = if self.lo >= 0.0 { pow_nonneg(self.lo, n, false) } else { -pow_nonneg(-self.lo, n, true) };
                let hi = if self.hi >= 0.0 { pow_nonneg(self.hi, n, true) } else { -pow_nonneg(-self.hi, n, false) };
                Interval { lo, hi }
            }
        }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval { lo: 0.0, hi: self.hi.max(-self.lo) }
        }
    }

    pub fn sqrt(&self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeSqrt(*self));
        }
        let s_lo = self.lo.sqrt();
        let s_hi = self.hi.sqrt();
        let lo = if sqrt_err(self.lo, s_lo) < 0.0 || sqrt_err(self.lo, s_lo).is_nan() {
            s_lo.next_down().max(0.0)
        } else {
            s_lo
        };
        let hi = if sqrt_err(self.hi, s_hi) > 0.0 || sqrt_err(self.hi, s_hi).is_nan() {
            s_hi.next_up()
        } else {
            s_hi
        };
        Ok(Interval { lo, hi })
    }

    /// Decimal endpoint strings that parse back to the same doubles.
    pub fn to_strings(&self) -> [String; 2] {
        [format!("{:e}", self.lo), format!("{:e}", self.hi)]
    }

    /// Parse decimal endpoints, widening each outward by one ulp.
    pub fn parse_widened(lo: &str, hi: &str) -> Result<Interval, IntervalError> {
        let l: f64 = lo.trim().parse().map_err(|_| IntervalError::Parse(lo.to_string()))?;
        let h: f64 = hi.trim().parse().map_err(|_| IntervalError::Parse(hi.to_string()))?;
        let l = if l.is_finite() { l.next_down() } else { l };
        let h = if h.is_finite() { h.next_up() } else { h };
        Interval::new(l, h)
    }
}

fn pow_nonneg(x: f64, n: u32, up: bool) -> f64 {
    let mut acc = x;
    for _ in 1..n {
        acc = if up { mul_up(acc, x) } else { mul_down(acc, x) };
    }
    acc
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl TryFrom<[String; 2]> for Interval {
    type Error = IntervalError;
    fn try_from(v: [String; 2]) -> Result<Self, Self::Error> {
        Interval::parse_widened(&v[0], &v[1])
    }
}

impl From<Interval> for [String; 2] {
    fn from(i: Interval) -> Self {
        i.to_strings()
    }
}

pub fn iv_add(a: Interval, b: Interval) -> Interval {
    Interval { lo: add_down(a.lo, b.lo), hi: add_up(a.hi, b.hi) }
}

pub fn iv_sub(a: Interval, b: Interval) -> Interval {
    Interval { lo: add_down(a.lo, -b.hi), hi: add_up(a.hi, -b.lo) }
}

pub fn iv_mul(a: Interval, b: Interval) -> Interval {
    let lo = mul_down(a.lo, b.lo)
        .min(mul_down(a.lo, b.hi))
        .min(mul_down(a.hi, b.lo))
        .min(mul_down(a.hi, b.hi));
    let hi = mul_up(a.lo, b.lo)
        .max(mul_up(a.lo, b.hi))
        .max(mul_up(a.hi, b.lo))
        .max(mul_up(a.hi, b.hi));
    Interval { lo, hi }
}

pub fn iv_div(a: Interval, b: Interval) -> Result<Interval, IntervalError> {
    if b.contains_zero() {
        return Err(IntervalError::DivisionByIntervalContainingZero(b));
    }
    let c = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
    let lo = c.iter().map(|&(x, y)| div_down(x, y)).fold(f64::INFINITY, f64::min);
    let hi = c.iter().map(|&(x, y)| div_up(x, y)).fold(f64::NEG_INFINITY, f64::max);
    Ok(Interval { lo, hi })
}

/// Horner enclosure of `sum coeffs[i] x^i`.
pub fn iv_eval_poly(coeffs: &[Interval], x: Interval) -> Interval {
    assert!(!coeffs.is_empty(), "iv_eval_poly needs at least one coefficient");
    let mut acc = *coeffs.last().unwrap();
    for c in coeffs.iter().rev().skip(1) {
        acc = iv_add(iv_mul(acc, x), *c);
    }
    acc
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        iv_add(self, rhs)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        iv_sub(self, rhs)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        iv_mul(self, rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Arith for Interval {
    fn from_f64(x: f64) -> Self {
        Interval::point(x)
    }
}

/// Product of one or more intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox {
    pub dims: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> Result<Self, IntervalError> {
        if dims.is_empty() {
            return Err(IntervalError::EmptyBox);
        }
        Ok(IntervalBox { dims })
    }

    pub fn from_interval(i: Interval) -> Self {
        IntervalBox { dims: vec![i] }
    }

    pub fn width(&self) -> f64 {
        self.dims.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims.len() && self.dims.iter().zip(x).all(|(d, v)| d.contains(*v))
    }

    /// Halve along the widest dimension (lowest index on ties).
    pub fn split(&self) -> Result<(IntervalBox, IntervalBox), IntervalError> {
        let mut best: Option<(usize, f64)> = None;
        for (i, d) in self.dims.iter().enumerate() {
            if !d.is_bounded() {
                return Err(IntervalError::UnboundedBox);
            }
            let w = d.width();
            if w > 0.0 && best.is_none_or(|(_, bw)| w > bw) {
                best = Some((i, w));
            }
        }
        let (i, _) = best.ok_or(IntervalError::DegenerateBox)?;
        let d = self.dims[i];
        let m = d.mid();
        if m <= d.lo() || m >= d.hi() {
            return Err(IntervalError::DegenerateBox);
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.dims[i] = Interval { lo: d.lo(), hi: m };
        right.dims[i] = Interval { lo: m, hi: d.hi() };
        Ok((left, right))
    }
}

pub fn box_split(b: &IntervalBox) -> Result<(IntervalBox, IntervalBox), IntervalError> {
    b.split()
}
