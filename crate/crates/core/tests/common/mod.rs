#![allow(dead_code)]

use implosion_core::interval::Interval;
use rand::Rng;

/// `lo <= s + e <= hi` for the exact value `s + e`, with `|e|` below half an ulp of `s`.
pub fn contains_exact(iv: &Interval, s: f64, e: f64) -> bool {
    let above = iv.lo() < s || (iv.lo() == s && e >= 0.0);
    let below = s < iv.hi() || (s == iv.hi() && e <= 0.0);
    above && below
}

pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

pub fn exact_add(a: f64, b: f64) -> (f64, f64) {
    two_sum(a, b)
}

pub fn exact_sub(a: f64, b: f64) -> (f64, f64) {
    two_sum(a, -b)
}

pub fn exact_mul(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Quotient plus a correction with the sign of the true remainder.
pub fn exact_div(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    let r = (-q).mul_add(b, a);
    (q, r / b)
}

pub fn exact_sqrt(a: f64) -> (f64, f64) {
    let s = a.sqrt();
    if s == 0.0 {
        return (0.0, 0.0);
    }
    let r = (-s).mul_add(s, a);
    (s, r / (2.0 * s))
}

/// A float with a random mantissa over a wide but overflow-safe exponent range,
/// sometimes a small integer so exact cases occur.
pub fn wide_float<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..10) {
        0 => rng.gen_range(-8..=8) as f64,
        1 => 0.0,
        _ => {
            let m: f64 = rng.gen_range(-1.0..1.0);
            m * 2f64.powi(rng.gen_range(-40..40))
        }
    }
}

pub fn random_interval<R: Rng>(rng: &mut R) -> Interval {
    let a = wide_float(rng);
    let b = if rng.gen_bool(0.2) { a } else { wide_float(rng) };
    Interval::new(a.min(b), a.max(b)).unwrap()
}

pub fn sample_in<R: Rng>(rng: &mut R, iv: &Interval) -> f64 {
    match rng.gen_range(0..8) {
        0 => iv.lo(),
        1 => iv.hi(),
        _ => {
            let t: f64 = rng.gen_range(0.0..=1.0);
            (iv.lo() + t * (iv.hi() - iv.lo())).clamp(iv.lo(), iv.hi())
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Sqr,
    Sqrt,
}

pub const OPS: [Op; 6] = [Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sqr, Op::Sqrt];

/// Runs `n` random containment trials of `op`; returns the number of violations
/// and how many trials were actually evaluated.
pub fn containment_trials<R: Rng>(rng: &mut R, op: Op, n: usize) -> (usize, usize) {
    use implosion_core::interval::{iv_add, iv_div, iv_mul, iv_sub};
    let mut bad = 0;
    let mut done = 0;
    while done < n {
        let x = random_interval(rng);
        let y = random_interval(rng);
        let a = sample_in(rng, &x);
        let b = sample_in(rng, &y);
        let ok = match op {
            Op::Add => {
                let (s, e) = exact_add(a, b);
                contains_exact(&iv_add(x, y), s, e)
            }
            Op::Sub => {
                let (s, e) = exact_sub(a, b);
                contains_exact(&iv_sub(x, y), s, e)
            }
            Op::Mul => {
                let (s, e) = exact_mul(a, b);
                contains_exact(&iv_mul(x, y), s, e)
            }
            Op::Div => {
                if y.contains_zero() {
                    if iv_div(x, y).is_ok() {
                        bad += 1;
                    }
                    done += 1;
                    continue;
                }
                let (s, e) = exact_div(a, b);
                contains_exact(&iv_div(x, y).unwrap(), s, e)
            }
            Op::Sqr => {
                let (s, e) = exact_mul(a, a);
                contains_exact(&x.sqr(), s, e)
            }
            Op::Sqrt => {
                let xa = x.abs();
                let a = a.abs();
                let (s, e) = exact_sqrt(a);
                contains_exact(&xa.sqrt().unwrap(), s, e)
            }
        };
        if !ok {
            bad += 1;
        }
        done += 1;
    }
    (bad, done)
}
