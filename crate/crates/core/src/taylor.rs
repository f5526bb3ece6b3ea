//! Taylor expansion of the smooth profile at the sonic point.
//!
//! Coefficients use the derivative convention: `W_n` is the n-th ξ-derivative
//! at ξ = 0, so the series is `sum ξ^n/n! (W_n, Z_n)`. Every field component is
//! quadratic in (W, Z), so composing it with the series is a finite Leibniz sum
//! with binomial weights.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::euler::{find_ps, k_of_r, sonic_data, sonic_data_real, Field, GasParams, Gamma, Quad};
use crate::scalar::{sum_terms, Real};

/// Guard on |n - k| below which the Z_n division is refused.
pub const RESONANCE_GUARD: f64 = 1e-8;
/// |n - k| below this is reported as a near-resonance warning.
pub const NEAR_RESONANCE: f64 = 1e-3;
/// Coefficients above this magnitude abort an f64 run.
pub const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Component {
    NW,
    DW,
    NZ,
    DZ,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceWarning {
    pub n: usize,
    pub gap: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct TaylorOptions {
    /// Divide through near-resonant orders instead of failing.
    pub allow_resonant: bool,
    /// Force compensated summation; by default it is used for f64 when N > 100.
    pub compensated: Option<bool>,
}

impl Default for TaylorOptions {
    fn default() -> Self {
        TaylorOptions { allow_resonant: false, compensated: None }
    }
}

#[derive(Clone, Debug)]
pub struct ProfileSeries<T = f64> {
    pub params: GasParams,
    pub order: usize,
    pub w: Vec<T>,
    pub z: Vec<T>,
    /// k(r) from the sonic eigenvalues.
    pub k_at_r: f64,
    /// k as it appears in the Z recurrence, (d - Z_1 b)/D_{Z,1}.
    pub k_recurrence: T,
    pub warnings: Vec<ResonanceWarning>,
    field: Field<T>,
}

struct Binomials<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Real> Binomials<T> {
    fn new() -> Self {
        Binomials { rows: vec![vec![T::one()]] }
    }

    fn row(&mut self, n: usize) -> &[T] {
        while self.rows.len() <= n {
            let prev = self.rows.last().unwrap();
            let m = prev.len();
            let mut next = Vec::with_capacity(m + 1);
            next.push(T::one());
            for j in 1..m {
                next.push(prev[j - 1].clone() + prev[j].clone());
            }
            next.push(T::one());
            self.rows.push(next);
        }
        &self.rows[n]
    }
}

fn is_affine<T: Real>(q: &Quad<T>) -> bool {
    let z = T::zero();
    q.cww == z && q.cwz == z && q.czz == z
}

/// n-th ξ-derivative at 0 of `q(W(ξ), Z(ξ))` from derivative coefficients.
fn compose<T: Real>(q: &Quad<T>, w: &[T], z: &[T], n: usize, binom: &[T], compensated: bool) -> T {
    let lin = q.cw.clone() * w[n].clone() + q.cz.clone() * z[n].clone();
    let base = if n == 0 { lin + q.c0.clone() } else { lin };
    if is_affine(q) {
        return base;
    }
    let terms = (0..=n).map(|j| {
        let quad = q.cww.clone() * w[j].clone() * w[n - j].clone()
            + q.cwz.clone() * w[j].clone() * z[n - j].clone()
            + q.czz.clone() * z[j].clone() * z[n - j].clone();
        binom[j].clone() * quad
    });
    base + sum_terms(terms, compensated)
}

fn sin_angle<T: Real>(a: (&T, &T), b: &[T; 2]) -> T {
    let cross = a.0.clone() * b[1].clone() - a.1.clone() * b[0].clone();
    let na = (a.0.clone() * a.0.clone() + a.1.clone() * a.1.clone()).sqrt();
    let nb = (b[0].clone() * b[0].clone() + b[1].clone() * b[1].clone()).sqrt();
    (cross / (na * nb)).abs()
}

/// (W_1, Z_1) on the nu_minus branch, with the sonic data used.
fn first_order_real<T: Real>(g: &GasParams) -> Result<((T, T), (T, T), T)> {
    let (ps, nu, k) = if T::BOUNDED_EXPONENT {
        let sd = sonic_data(g)?;
        let ps = (T::from_f64(sd.ps.0), T::from_f64(sd.ps.1));
        let nu = [T::from_f64(sd.nu_minus[0]), T::from_f64(sd.nu_minus[1])];
        (ps, nu, T::from_f64(sd.k))
    } else {
        let sd = sonic_data_real::<T>(g)?;
        (sd.ps, sd.nu_minus, sd.k)
    };
    let f = Field::<T>::real(g);
    let (w0, z0) = ps.clone();
    let w1 = f.nw.eval(&w0, &z0) / f.dw.eval(&w0, &z0);
    let a = f.dz.cw.clone();
    let b = f.dz.cz.clone();
    let (c, d) = f.nz.grad(&w0, &z0);
    // b Z1^2 + (a W1 - d) Z1 - c W1 = 0
    let qa = b;
    let qb = a * w1.clone() - d;
    let qc = -(c * w1.clone());
    let disc = qb.clone() * qb.clone() - T::from_f64(4.0) * qa.clone() * qc;
    if disc < T::zero() {
        return Err(Error::BranchAmbiguity { angle: f64::NAN });
    }
    let sq = disc.sqrt();
    let two_a = T::from_f64(2.0) * qa;
    let roots = [(-qb.clone() + sq.clone()) / two_a.clone(), (-qb - sq) / two_a];
    let angles: Vec<T> = roots.iter().map(|z1| sin_angle((&w1, z1), &nu)).collect();
    let pick = if angles[0] <= angles[1] { 0 } else { 1 };
    if angles[pick] > T::from_f64(1e-6) {
        return Err(Error::BranchAmbiguity { angle: angles[pick].to_f64() });
    }
    let _ = k;
    Ok((ps, (w1, roots[pick].clone()), T::zero()))
}

pub fn first_order(g: &GasParams) -> Result<(f64, f64)> {
    let (_, p1, _) = first_order_real::<f64>(g)?;
    Ok(p1)
}

pub fn taylor_at_ps(g: &GasParams, order: usize) -> Result<ProfileSeries<f64>> {
    taylor_at_ps_with::<f64>(g, order, TaylorOptions::default())
}

/// Series to order `order` in the scalar type `T`.
pub fn taylor_at_ps_with<T: Real>(g: &GasParams, order: usize, opts: TaylorOptions) -> Result<ProfileSeries<T>> {
    let ((w0, z0), (w1, z1), _) = first_order_real::<T>(g)?;
    let field = Field::<T>::real(g);
    let k_at_r = if g.gamma.is_monatomic() && g.r >= 1.0 { k_of_r(g.gamma, g.r)? } else { sonic_data(g)?.k };
    let compensated = opts.compensated.unwrap_or(T::NEEDS_COMPENSATION && order > 100);

    let dw0 = field.dw.eval(&w0, &z0);
    let a = field.dz.cw.clone();
    let b = field.dz.cz.clone();
    let (_, d) = field.nz.grad(&w0, &z0);
    let dz1 = a.clone() * w1.clone() + b.clone() * z1.clone();
    let k_rec = (d - z1.clone() * b.clone()) / dz1.clone();

    let mut w = vec![w0];
    let mut z = vec![z0];
    let mut warnings = Vec::new();
    if order >= 1 {
        w.push(w1);
        z.push(z1.clone());
    }
    let gap1 = (T::one() - k_rec.clone()).abs().to_f64();
    if gap1 < NEAR_RESONANCE {
        warnings.push(ResonanceWarning { n: 1, gap: gap1 });
    }
    let mut binom = Binomials::<T>::new();
    let dw_coef = |m: usize, w: &[T], z: &[T]| -> T {
        if m == 0 {
            dw0.clone()
        } else {
            field.dw.cw.clone() * w[m].clone() + field.dw.cz.clone() * z[m].clone()
        }
    };
    let dz_coef = |m: usize, w: &[T], z: &[T]| -> T { a.clone() * w[m].clone() + b.clone() * z[m].clone() };

    for n in 2..=order {
        // W_n from the (n-1)-th derivative of D_W W' = N_W.
        let row = binom.row(n - 1).to_vec();
        let nw = compose(&field.nw, &w, &z, n - 1, &row, compensated);
        let sum = sum_terms((0..=n - 2).map(|j| row[j].clone() * dw_coef(n - 1 - j, &w, &z) * w[j + 1].clone()), compensated);
        let wn = (nw - sum) / dw0.clone();
        w.push(wn);
        // Z_n from the n-th derivative of D_Z Z' = N_Z with Z_n set to zero on the right.
        z.push(T::zero());
        let row = binom.row(n).to_vec();
        let nz0 = compose(&field.nz, &w, &z, n, &row, compensated);
        let dzn0 = dz_coef(n, &w, &z);
        let mid = sum_terms((1..=n - 2).map(|j| row[j].clone() * dz_coef(n - j, &w, &z) * z[j + 1].clone()), compensated);
        let rhs = nz0 - z1.clone() * dzn0 - mid;
        let gap = (T::from_usize(n) - k_rec.clone()).abs().to_f64();
        if gap < RESONANCE_GUARD && !opts.allow_resonant {
            return Err(Error::ResonanceSingular { n, k: k_rec.to_f64(), gap });
        }
        if gap < NEAR_RESONANCE {
            warnings.push(ResonanceWarning { n, gap });
        }
        let zn = rhs / (dz1.clone() * (T::from_usize(n) - k_rec.clone()));
        if T::BOUNDED_EXPONENT {
            let (wv, zv) = (w[n].to_f64(), zn.to_f64());
            if !(wv.abs() <= OVERFLOW_LIMIT) || !(zv.abs() <= OVERFLOW_LIMIT) {
                let value = if zv.abs() <= OVERFLOW_LIMIT { wv } else { zv };
                return Err(Error::CoefficientOverflow { n, value });
            }
        }
        z[n] = zn;
    }
    Ok(ProfileSeries { params: *g, order, w, z, k_at_r, k_recurrence: k_rec, warnings, field })
}

impl<T: Real> ProfileSeries<T> {
    /// n-th coefficient of a field component along the series.
    pub fn compose_coeffs(&self, which: Component, n: usize) -> Result<T> {
        if n > self.order {
            return Err(Error::OrderExceeded { n, order: self.order });
        }
        let mut b = Binomials::<T>::new();
        let row = b.row(n).to_vec();
        let q = match which {
            Component::NW => &self.field.nw,
            Component::DW => &self.field.dw,
            Component::NZ => &self.field.nz,
            Component::DZ => &self.field.dz,
        };
        Ok(compose(q, &self.w, &self.z, n, &row, false))
    }

    /// Truncated series and its ξ-derivative at `xi`, using orders `0..=deg`.
    pub fn eval_deg(&self, xi: &T, deg: usize) -> ((T, T), (T, T)) {
        let deg = deg.min(self.order);
        let mut pw = T::zero();
        let mut pz = T::zero();
        let mut dw = T::zero();
        let mut dz = T::zero();
        // term = xi^n / n!
        let mut term = T::one();
        for n in 0..=deg {
            pw = pw + self.w[n].clone() * term.clone();
            pz = pz + self.z[n].clone() * term.clone();
            if n < deg {
                dw = dw + self.w[n + 1].clone() * term.clone();
                dz = dz + self.z[n + 1].clone() * term.clone();
            }
            term = term * xi.clone() / T::from_usize(n + 1);
        }
        ((pw, pz), (dw, dz))
    }

    pub fn eval(&self, xi: &T) -> (T, T) {
        self.eval_deg(xi, self.order).0
    }

    /// Max-norm residual of `D W' - N` for the degree-`deg` truncation.
    pub fn residual(&self, xi: &T, deg: usize) -> T {
        let deg = deg.min(self.order);
        let (w, z) = {
            let mut pw = T::zero();
            let mut pz = T::zero();
            let mut term = T::one();
            for n in 0..=deg {
                pw = pw + self.w[n].clone() * term.clone();
                pz = pz + self.z[n].clone() * term.clone();
                term = term * xi.clone() / T::from_usize(n + 1);
            }
            (pw, pz)
        };
        let (dw, dz) = {
            let mut dw = T::zero();
            let mut dz = T::zero();
            let mut term = T::one();
            for n in 0..deg {
                dw = dw + self.w[n + 1].clone() * term.clone();
                dz = dz + self.z[n + 1].clone() * term.clone();
                term = term * xi.clone() / T::from_usize(n + 1);
            }
            (dw, dz)
        };
        let e = self.field.eval(&w, &z);
        let rw = (e.d_w * dw - e.n_w).abs();
        let rz = (e.d_z * dz - e.n_z).abs();
        if rw > rz {
            rw
        } else {
            rz
        }
    }

    pub fn to_f64(&self) -> ProfileSeries<f64> {
        ProfileSeries {
            params: self.params,
            order: self.order,
            w: self.w.iter().map(Real::to_f64).collect(),
            z: self.z.iter().map(Real::to_f64).collect(),
            k_at_r: self.k_at_r,
            k_recurrence: self.k_recurrence.to_f64(),
            warnings: self.warnings.clone(),
            field: Field::new(&self.params),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["n", "W_n", "Z_n"])?;
        for n in 0..=self.order {
            wtr.write_record([n.to_string(), self.w[n].to_sci(), self.z[n].to_sci()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

impl ProfileSeries<f64> {
    pub fn field(&self) -> &Field<f64> {
        &self.field
    }

    pub fn ps(&self) -> (f64, f64) {
        (self.w[0], self.z[0])
    }
}

/// Least-squares slope of log10(residual) against log10(ξ).
pub fn residual_slope<T: Real>(series: &ProfileSeries<T>, deg: usize, xis: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xis
        .iter()
        .map(|&x| {
            let r = series.residual(&T::from_f64(x), deg);
            (x.log10(), log10_real(&r))
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// log10 that survives magnitudes outside the f64 range.
pub fn log10_real<T: Real>(x: &T) -> f64 {
    let s = x.abs().to_sci();
    match s.split_once('e') {
        Some((m, e)) => m.parse::<f64>().unwrap_or(f64::NAN).abs().log10() + e.parse::<f64>().unwrap_or(f64::NAN),
        None => s.parse::<f64>().unwrap_or(f64::NAN).log10(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub k: f64,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub error: Option<String>,
}

/// Coefficients 0..=order on an evenly spaced r grid (parallel over r).
pub fn r_sweep(gamma: Gamma, rmin: f64, rmax: f64, steps: usize, order: usize) -> Vec<SweepRow> {
    let steps = steps.max(2);
    (0..steps)
        .into_par_iter()
        .map(|i| {
            let r = rmin + (rmax - rmin) * i as f64 / (steps - 1) as f64;
            let g = GasParams::new(gamma, r);
            let opts = TaylorOptions { allow_resonant: true, compensated: None };
            match taylor_at_ps_with::<f64>(&g, order, opts) {
                Ok(s) => SweepRow { r, k: s.k_at_r, w: s.w, z: s.z, error: None },
                Err(e) => SweepRow { r, k: f64::NAN, w: vec![], z: vec![], error: Some(e.to_string()) },
            }
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], order: usize, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["r".to_string(), "k".to_string()];
    header.extend((0..=order).map(|n| format!("W_{n}")));
    header.extend((0..=order).map(|n| format!("Z_{n}")));
    wtr.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.r.to_sci(), row.k.to_sci()];
        for v in [&row.w, &row.z] {
            for n in 0..=order {
                rec.push(v.get(n).map_or_else(|| "nan".to_string(), |x| x.to_sci()));
            }
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

fn zn_at(gamma: Gamma, r: f64, n: usize) -> Option<f64> {
    let opts = TaylorOptions { allow_resonant: true, compensated: None };
    taylor_at_ps_with::<f64>(&GasParams::new(gamma, r), n, opts).ok().map(|s| s.z[n])
}

/// Poles of Z_n along a sweep: each sign change between grid neighbours is
/// bisected, and kept when |Z_n| grows toward the limit point.
pub fn locate_poles(gamma: Gamma, rows: &[SweepRow], n: usize) -> Vec<f64> {
    let mut poles = Vec::new();
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (Some(&za), Some(&zb)) = (a.z.get(n), b.z.get(n)) else { continue };
        if !(za.is_finite() && zb.is_finite()) || za.signum() == zb.signum() {
            continue;
        }
        let (mut lo, mut hi) = (a.r, b.r);
        let slo = za.signum();
        let mut pole = None;
        for _ in 0..80 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            match zn_at(gamma, m, n) {
                Some(v) if v.is_finite() => {
                    if v.signum() == slo {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                _ => {
                    pole = Some(m);
                    break;
                }
            }
        }
        let m = pole.unwrap_or(0.5 * (lo + hi));
        let end = za.abs().max(zb.abs());
        let near = [lo, hi].iter().filter_map(|&r| zn_at(gamma, r, n)).fold(0.0f64, |acc, v| acc.max(v.abs()));
        if pole.is_some() || near > end {
            poles.push(m);
        }
    }
    poles
}

/// Sonic point shortcut used by callers that only need (W_0, Z_0).
pub fn series_origin(g: &GasParams) -> Result<(f64, f64)> {
    let p = find_ps(g)?;
    Ok((p.w, p.z))
}
