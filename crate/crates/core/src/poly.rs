//! Dense univariate polynomials over any [`Arith`] scalar.
//!
//! `Poly<Interval>` is the workhorse of barrier certification: the field is
//! evaluated symbolically along a polynomial curve, so the crossing quantity
//! becomes a polynomial with interval coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use crate::interval::{iv_eval_poly, Interval};
use crate::scalar::Arith;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    /// Ascending coefficients; never empty.
    coeffs: Vec<T>,
}

impl<T: Arith> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Poly { coeffs: vec![c] }
    }

    /// The identity polynomial `t`.
    pub fn identity() -> Self {
        Poly { coeffs: vec![T::zero(), T::one()] }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Poly::constant(T::zero());
        }
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| T::from_f64(i as f64) * c.clone())
            .collect();
        Poly { coeffs: c }
    }

    /// Substitute `t -> s*t`.
    pub fn scale_arg(&self, s: &T) -> Self {
        let mut p = T::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.clone() * p.clone());
            p = p * s.clone();
        }
        Poly { coeffs: out }
    }

    /// Coefficients of `p(m + s)` in powers of `s`.
    pub fn taylor_shift(&self, m: &T) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let add = m.clone() * c[j + 1].clone();
                c[j] = c[j].clone() + add;
            }
        }
        Poly { coeffs: c }
    }

    pub fn map<U: Arith>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

impl Poly<f64> {
    pub fn to_interval(&self) -> Poly<Interval> {
        self.map(|&c| Interval::point(c))
    }
}

impl Poly<Interval> {
    /// Enclosure of the range over `x`: the intersection of plain Horner and
    /// the centered (Taylor-shifted) form.
    pub fn enclose(&self, x: Interval) -> Interval {
        let horner = iv_eval_poly(&self.coeffs, x);
        if !x.is_bounded() || self.coeffs.len() <= 2 {
            return horner;
        }
        let m = x.mid();
        let shifted = self.taylor_shift(&Interval::point(m));
        let s = x - Interval::point(m);
        let mut acc = shifted.coeffs[0];
        for (i, c) in shifted.coeffs.iter().enumerate().skip(1) {
            acc = acc + *c * s.powi(i as u32);
        }
        let lo = horner.lo().max(acc.lo());
        let hi = horner.hi().min(acc.hi());
        if lo <= hi {
            Interval::new(lo, hi).expect("ordered bounds")
        } else {
            // Both are enclosures of a non-empty set, so this only happens
            // through a bug; fall back to the hull to stay sound.
            horner.hull(&acc)
        }
    }
}

fn zip_with<T: Arith>(a: &[T], b: &[T], f: impl Fn(T, T) -> T) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(T::zero);
            let y = b.get(i).cloned().unwrap_or_else(T::zero);
            f(x, y)
        })
        .collect()
}

impl<T: Arith> Add for Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: Poly<T>) -> Poly<T> {
        Poly { coeffs: zip_with(&self.coeffs, &rhs.coeffs, |x, y| x + y) }
    }
}

impl<T: Arith> Sub for Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: Poly<T>) -> Poly<T> {
        Poly { coeffs: zip_with(&self.coeffs, &rhs.coeffs, |x, y| x - y) }
    }
}

impl<T: Arith> Mul for Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: Poly<T>) -> Poly<T> {
        let n = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut out: Vec<Option<T>> = vec![None; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let p = a.clone() * b.clone();
                out[i + j] = Some(match out[i + j].take() {
                    Some(acc) => acc + p,
                    None => p,
                });
            }
        }
        Poly { coeffs: out.into_iter().map(|c| c.unwrap_or_else(T::zero)).collect() }
    }
}

impl<T: Arith> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl<T: Arith> Arith for Poly<T> {
    fn from_f64(x: f64) -> Self {
        Poly::constant(T::from_f64(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_eval() {
        let p = Poly::new(vec![1.0, 2.0]);
        let q = Poly::new(vec![0.0, 0.0, 3.0]);
        let s = p.clone() * q.clone() + p.clone();
        assert_eq!(s.coeffs(), &[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(s.eval(&2.0), 1.0 + 4.0 + 12.0 + 48.0);
        assert_eq!(s.derivative().coeffs(), &[2.0, 6.0, 18.0]);
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let p = Poly::new(vec![1.0, -3.0, 0.5, 2.0]);
        let q = p.taylor_shift(&1.5);
        for s in [-1.0, 0.0, 0.25, 2.0] {
            assert!((q.eval(&s) - p.eval(&(1.5 + s))).abs() < 1e-12);
        }
    }

    #[test]
    fn centered_enclosure_is_tighter_and_sound() {
        let p = Poly::new(vec![0.0, 1.0, 1.0]).to_interval();
        let x = Interval::new(-1.0, 2.0).unwrap();
        let e = p.enclose(x);
        assert!(e.subset_of(&Interval::new(-3.0, 6.0).unwrap()));
        for i in 0..=300 {
            let t = -1.0 + 3.0 * i as f64 / 300.0;
            assert!(e.contains(t + t * t));
        }
        let narrow = Interval::new(0.9, 1.1).unwrap();
        let e = p.enclose(narrow);
        assert!(e.width() < 0.65);
    }
}
