//! Barrier curves around the sonic point and their crossing quantities.
//!
//! A parametric barrier is a pair of polynomials in t. Its crossing quantity
//! is the wedge `F(b(t)) ∧ b'(t)` of the psi-field with the tangent. For curves
//! that leave P_s to the right (decreasing ξ), negative means trajectories cross
//! upward. Curves that leave to the left run the other way, so the sign flips;
//! [`ParamBarrier::upward_sign`] carries that.
//!
//! The implicit barrier B_fr is traced through a rational parameterization in
//! τ ∈ [0, 1). Its crossing quantity is rescaled by `(1-τ)^5`, which makes it a
//! polynomial, so both kinds certify through the same `Poly<Interval>` path.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::euler::{find_po, psi_jacobian, Field, GasParams, PhasePoint, Quad};
use crate::interval::Interval;
use crate::poly::Poly;
use crate::scalar::Arith;
use crate::taylor::ProfileSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    LeftOfPs,
    RightOfPs,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BarrierLabel {
    Bnl,
    Bfl,
    Bnr { n: usize, beta: f64 },
}

impl BarrierLabel {
    pub fn name(&self) -> String {
        match self {
            BarrierLabel::Bnl => "b_nl".into(),
            BarrierLabel::Bfl => "b_fl".into(),
            BarrierLabel::Bnr { n, .. } => format!("b_nr{n}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamBarrier {
    pub label: BarrierLabel,
    pub w_poly: Vec<f64>,
    pub z_poly: Vec<f64>,
    pub t_max: f64,
    pub side: Side,
    #[serde(skip)]
    pub params: GasParams,
}

impl ParamBarrier {
    pub fn w(&self) -> Poly<f64> {
        Poly::new(self.w_poly.clone())
    }

    pub fn z(&self) -> Poly<f64> {
        Poly::new(self.z_poly.clone())
    }

    pub fn point(&self, t: f64) -> PhasePoint {
        PhasePoint::new(self.w().eval(&t), self.z().eval(&t))
    }

    pub fn tangent(&self, t: f64) -> (f64, f64) {
        (self.w().derivative().eval(&t), self.z().derivative().eval(&t))
    }

    /// Sign of the crossing quantity that means "trajectories cross upward".
    pub fn upward_sign(&self) -> f64 {
        match self.side {
            Side::RightOfPs => -1.0,
            Side::LeftOfPs => 1.0,
        }
    }

    pub fn with_domain(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }
}

/// `(W - W0 - Z/2 + Z0/2)(W + Z - F0) - F1 (W + Z - W0 - Z0)`.
#[derive(Clone, Debug, Serialize)]
pub struct ImplicitBarrier {
    pub f0: f64,
    pub f1: f64,
    pub anchor: (f64, f64),
    pub first_order: (f64, f64),
    /// +1 or -1; makes the traced tangent at P_s point along -(W_1, Z_1).
    pub orientation: f64,
    pub tau_max: f64,
    #[serde(skip)]
    pub params: GasParams,
}

pub fn make_b_nl(series: &ProfileSeries) -> Result<ParamBarrier> {
    if series.order < 3 {
        return Err(Error::OrderExceeded { n: 3, order: series.order });
    }
    let mut fact = 1.0;
    let mut w = Vec::new();
    let mut z = Vec::new();
    for i in 0..=3 {
        if i > 0 {
            fact *= i as f64;
        }
        w.push(series.w[i] / fact);
        z.push(series.z[i] / fact);
    }
    Ok(ParamBarrier { label: BarrierLabel::Bnl, w_poly: w, z_poly: z, t_max: 1.0, side: Side::LeftOfPs, params: series.params })
}

/// Eigenvector of the psi-Jacobian at P_o for the eigenvalue of largest modulus.
pub fn po_dominant_direction(g: &GasParams) -> Result<(PhasePoint, [f64; 2], f64)> {
    let po = find_po(g)?;
    let j = psi_jacobian(po, g);
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return Err(Error::ComplexEigenvalues { disc });
    }
    let l1 = 0.5 * (tr + disc.sqrt());
    let l2 = 0.5 * (tr - disc.sqrt());
    let lam = if l1.abs() >= l2.abs() { l1 } else { l2 };
    let a = [j[0][1], lam - j[0][0]];
    let b = [lam - j[1][1], j[1][0]];
    let v = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) { a } else { b };
    let n = v[0].hypot(v[1]);
    Ok((po, [v[0] / n, v[1] / n], lam))
}

pub fn make_b_fl(g: &GasParams, series: &ProfileSeries) -> Result<ParamBarrier> {
    let (po, e, _) = po_dominant_direction(g)?;
    let (w0, z0) = series.ps();
    let (w1, z1) = (series.w[1], series.z[1]);
    let (dw, dz) = (po.w - w0, po.z - z0);
    let den = w1 * e[1] - z1 * e[0];
    if den.abs() < 1e-14 {
        return Err(Error::DegenerateEndpoint);
    }
    let b1 = 2.0 * (dw * e[1] - dz * e[0]) / den;
    let b2 = 2.0 * (dw - b1 * w1);
    let b3 = 2.0 * (dz - b1 * z1);
    Ok(ParamBarrier {
        label: BarrierLabel::Bfl,
        w_poly: vec![w0, b1 * w1, b2 / 2.0],
        z_poly: vec![z0, b1 * z1, b3 / 2.0],
        t_max: 1.0,
        side: Side::LeftOfPs,
        params: *g,
    })
}

/// `t_max = c β |k - n|^{1/(n-1)}`.
pub fn b_nr_domain(k: f64, n: usize, beta: f64, c: f64) -> f64 {
    c * beta * (k - n as f64).abs().powf(1.0 / (n as f64 - 1.0))
}

/// Series truncated at order n in (-t), plus `β|Z_n| (-t)^{n+1}/(n+1)!` in Z.
pub fn make_b_nr(series: &ProfileSeries, n: usize, beta: f64) -> Result<ParamBarrier> {
    if series.order < n {
        return Err(Error::OrderExceeded { n, order: series.order });
    }
    if !(beta > 0.0) {
        return Err(Error::DomainError(format!("beta must be positive, got {beta}")));
    }
    let mut fact = 1.0;
    let mut w = Vec::new();
    let mut z = Vec::new();
    for i in 0..=n {
        if i > 0 {
            fact *= i as f64;
        }
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        w.push(s * series.w[i] / fact);
        z.push(s * series.z[i] / fact);
    }
    fact *= (n + 1) as f64;
    let s = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
    z.push(s * beta * series.z[n].abs() / fact);
    Ok(ParamBarrier {
        label: BarrierLabel::Bnr { n, beta },
        w_poly: w,
        z_poly: z,
        t_max: b_nr_domain(series.k_at_r, n, beta, 1.0),
        side: Side::RightOfPs,
        params: series.params,
    })
}

pub fn make_b_fr(g: &GasParams, series: &ProfileSeries) -> Result<ImplicitBarrier> {
    let (w0, z0) = series.ps();
    let (w1, z1) = (series.w[1], series.z[1]);
    if (w1 + z1).abs() < 1e-12 {
        return Err(Error::TangentDegenerate(w1 + z1));
    }
    let f0 = -2.0 * (g.r - 1.0);
    let f1 = (w0 + z0 - f0) * (w1 - z1 / 2.0) / (w1 + z1);
    let mut b = ImplicitBarrier {
        f0,
        f1,
        anchor: (w0, z0),
        first_order: (w1, z1),
        orientation: 1.0,
        tau_max: 0.99,
        params: *g,
    };
    let (gw, gz) = b.grad(w0, z0);
    // rotated gradient (-B_Z, B_W) against -(W1, Z1)
    let dot = -(-gz * w1 + gw * z1);
    b.orientation = if dot >= 0.0 { 1.0 } else { -1.0 };
    Ok(b)
}

impl ImplicitBarrier {
    fn c0(&self) -> f64 {
        self.anchor.0 - self.anchor.1 / 2.0
    }

    fn s0(&self) -> f64 {
        self.anchor.0 + self.anchor.1
    }

    pub fn value(&self, w: f64, z: f64) -> f64 {
        (w - z / 2.0 - self.c0()) * (w + z - self.f0) - self.f1 * (w + z - self.s0())
    }

    pub fn grad(&self, w: f64, z: f64) -> (f64, f64) {
        let l = w - z / 2.0 - self.c0();
        let m = w + z - self.f0;
        (m + l - self.f1, -0.5 * m + l - self.f1)
    }

    /// Point of the nullset at parameter τ ∈ [0, 1).
    pub fn point(&self, tau: f64) -> PhasePoint {
        let s = self.s0() + tau * (self.f0 - self.s0());
        let u = -self.f1 * tau / (1.0 - tau);
        let w = (2.0 * u + 2.0 * self.c0() + s) / 3.0;
        PhasePoint::new(w, s - w)
    }

    /// Oriented crossing quantity `σ ∇B · F`; positive means downward.
    pub fn crossing(&self, tau: f64) -> f64 {
        let p = self.point(tau);
        let f = Field::new(&self.params);
        let (fw, fz) = f.psi(&p.w, &p.z);
        let (gw, gz) = self.grad(p.w, p.z);
        self.orientation * (fw * gw + fz * gz)
    }

    /// `(1-τ)^5` times the crossing quantity, as a polynomial in τ.
    pub fn crossing_poly(&self) -> Result<Poly<Interval>> {
        let iv = Interval::point;
        let tau = Poly::<Interval>::identity();
        let h = Poly::constant(iv(1.0)) - tau.clone();
        let s = Poly::constant(iv(self.s0())) + tau.clone() * Poly::constant(iv(self.f0) - iv(self.s0()));
        let c0 = Poly::constant(iv(self.anchor.0) - iv(self.anchor.1) * iv(0.5));
        let third = Interval::ratio(1, 3)?;
        // W = What/h, Z = Zhat/h
        let what = (Poly::constant(iv(-2.0) * iv(self.f1)) * tau.clone()
            + (Poly::constant(iv(2.0)) * c0.clone() + s.clone()) * h.clone())
            * Poly::constant(third);
        let zhat = s.clone() * h.clone() - what.clone();
        let field = Field::<Poly<Interval>>::from_alpha_r(
            Poly::constant(self.params.gamma.alpha_interval()?),
            Poly::constant(iv(self.params.r)),
        );
        let nw = homog2(&field.nw, &what, &zhat, &h);
        let nz = homog2(&field.nz, &what, &zhat, &h);
        let dw = homog2(&field.dw, &what, &zhat, &h);
        let dz = homog2(&field.dz, &what, &zhat, &h);
        // (1-τ) ∇B
        let m = what.clone() + zhat.clone() - Poly::constant(iv(self.f0)) * h.clone();
        let l = what.clone() - zhat.clone() * Poly::constant(iv(0.5)) - c0 * h.clone();
        let f1 = Poly::constant(iv(self.f1)) * h.clone();
        let gw = m.clone() + l.clone() - f1.clone();
        let gz = -(m * Poly::constant(iv(0.5))) + l - f1;
        // (1-τ)^4 F times (1-τ) ∇B
        let fw = nw * dz;
        let fz = nz * dw;
        Ok((fw * gw + fz * gz) * Poly::constant(iv(self.orientation)))
    }
}

/// `h^2 q(W/h, Z/h)` for a quadratic `q`.
fn homog2<T: Arith>(q: &Quad<T>, w: &T, z: &T, h: &T) -> T {
    q.c0.clone() * h.clone() * h.clone()
        + q.cw.clone() * w.clone() * h.clone()
        + q.cz.clone() * z.clone() * h.clone()
        + q.cww.clone() * w.clone() * w.clone()
        + q.cwz.clone() * w.clone() * z.clone()
        + q.czz.clone() * z.clone() * z.clone()
}

/// Crossing quantity `F(b(t)) ∧ b'(t)` at a point.
pub fn crossing_sign_param(b: &ParamBarrier, t: f64) -> f64 {
    let p = b.point(t);
    let (bw, bz) = b.tangent(t);
    let f = Field::new(&b.params);
    let (fw, fz) = f.psi(&p.w, &p.z);
    fw * bz - fz * bw
}

/// The crossing quantity as a polynomial in t with interval coefficients.
pub fn crossing_poly(b: &ParamBarrier) -> Result<Poly<Interval>> {
    crossing_poly_from(&b.w_poly, &b.z_poly, &b.params)
}

pub fn crossing_poly_from(w_coeffs: &[f64], z_coeffs: &[f64], g: &GasParams) -> Result<Poly<Interval>> {
    let w = Poly::new(w_coeffs.to_vec()).to_interval();
    let z = Poly::new(z_coeffs.to_vec()).to_interval();
    let field = Field::<Poly<Interval>>::from_alpha_r(
        Poly::constant(g.gamma.alpha_interval()?),
        Poly::constant(Interval::point(g.r)),
    );
    let (fw, fz) = field.psi(&w, &z);
    Ok(fw * z.derivative() - fz * w.derivative())
}

/// Enclosure of the crossing quantity over `t`.
pub fn crossing_sign_interval(b: &ParamBarrier, t: Interval) -> Result<Interval> {
    Ok(crossing_poly(b)?.enclose(t))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Two-term principal part of the b_nr_n crossing quantity near r_n.
pub fn asymptotic_p_nr(n: usize, beta: f64, series: &ProfileSeries, t: f64) -> f64 {
    let f = series.field();
    let (w0, z0) = series.ps();
    let nw0 = f.nw.eval(&w0, &z0);
    let dz1 = f.dz.cw * series.w[1] + f.dz.cz * series.z[1];
    let dzz = f.dz.cz;
    let zn = series.z[n];
    let mt = -t;
    (nw0 * dz1).abs() * beta / factorial(n + 1) * zn.abs() * mt.powi(n as i32 + 1)
        + (dzz * nw0).abs() / (factorial(n) * factorial(n - 1)) * zn * zn * mt.powi(2 * n as i32 - 1)
}

/// D_Z along a barrier, as an exact polynomial in t.
pub fn dz_poly(b: &ParamBarrier) -> Poly<f64> {
    let f = Field::new(&b.params);
    Poly::constant(f.dz.c0) + b.w() * Poly::constant(f.dz.cw) + b.z() * Poly::constant(f.dz.cz)
}

pub fn dz_along_bnr4(b: &ParamBarrier, t: f64) -> f64 {
    dz_poly(b).eval(&t)
}

/// Leading part `-D_{Z,1} t + ∂_Z D_Z Z_4 t^4/4!` of D_Z along b_nr_4.
/// For γ = 5/3 this is `-(W_1 + 2 Z_1)/3 t + Z_4/36 t^4`.
pub fn dz_bnr4_leading(series: &ProfileSeries, t: f64) -> f64 {
    let f = series.field();
    let dz1 = f.dz.cw * series.w[1] + f.dz.cz * series.z[1];
    -dz1 * t + f.dz.cz * series.z[4] / 24.0 * t.powi(4)
}

/// Log-spaced scan grid on (lo, hi], finest near lo.
fn scan_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let a = lo.max(hi * 1e-9).ln();
    let b = hi.ln();
    (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect()
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    while hi - lo > tol {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if (f(m) > 0.0) == (flo > 0.0) {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// First sign change of `f` on (lo, hi], refined to `tol`.
pub fn first_sign_change(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, samples: usize, tol: f64) -> Option<f64> {
    let grid = scan_grid(lo, hi, samples);
    let mut prev: Option<(f64, f64)> = None;
    for &t in &grid {
        let v = f(t);
        if v == 0.0 {
            return Some(t);
        }
        if let Some((tp, vp)) = prev {
            if (v > 0.0) != (vp > 0.0) {
                return Some(bisect(f, tp, t, tol));
            }
        }
        prev = Some((t, v));
    }
    None
}

/// Zero of D_Z along b_nr_4 in (0, t_max].
pub fn dz_crossing_bnr4(b: &ParamBarrier, t_max: f64) -> Result<f64> {
    let p = dz_poly(b);
    let f = |t: f64| p.eval(&t);
    first_sign_change(&f, 1e-9 * t_max, t_max, 20000, 1e-12).ok_or_else(|| Error::NoCrossing {
        what: "D_Z along b_nr4".into(),
        lo: 0.0,
        hi: t_max,
    })
}

/// Validity time: first sign change of the crossing quantity.
/// Below `t_lo` the quantity is at the rounding floor, since it vanishes to
/// high order at P_s.
pub fn validity_time(b: &ParamBarrier, t_lo: f64, t_hi: f64) -> Option<f64> {
    let f = |t: f64| crossing_sign_param(b, t);
    first_sign_change(&f, t_lo, t_hi, 20000, 1e-12)
}

pub enum BarrierRef<'a> {
    Param(&'a ParamBarrier),
    Implicit(&'a ImplicitBarrier),
}

/// Signed distance-like function of a point to a parametric curve: wedge of the
/// nearest-point tangent with the offset.
fn side_of(curve: &ParamBarrier, p: PhasePoint) -> f64 {
    let n = 400;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=n {
        let s = curve.t_max * i as f64 / n as f64;
        let d = curve.point(s).dist(&p);
        if d < best.0 {
            best = (d, s);
        }
    }
    let mut s = best.1;
    let (w, z) = (curve.w(), curve.z());
    let (w1, z1) = (w.derivative(), z.derivative());
    let (w2, z2) = (w1.derivative(), z1.derivative());
    for _ in 0..30 {
        let (dw, dz) = (w.eval(&s) - p.w, z.eval(&s) - p.z);
        let g = dw * w1.eval(&s) + dz * z1.eval(&s);
        let gp = w1.eval(&s).powi(2) + z1.eval(&s).powi(2) + dw * w2.eval(&s) + dz * z2.eval(&s);
        if gp == 0.0 {
            break;
        }
        let step = g / gp;
        s = (s - step).clamp(0.0, curve.t_max);
        if step.abs() < 1e-15 {
            break;
        }
    }
    let (dw, dz) = (p.w - w.eval(&s), p.z - z.eval(&s));
    w1.eval(&s) * dz - z1.eval(&s) * dw
}

/// Smallest positive parameter of `b1` at which it meets `b2`.
pub fn barrier_intersection(b1: &ParamBarrier, b2: BarrierRef<'_>) -> Result<f64> {
    let hi = b1.t_max;
    let lo = 1e-6 * hi.min(1.0);
    let f: Box<dyn Fn(f64) -> f64> = match b2 {
        BarrierRef::Implicit(ib) => Box::new(move |t| {
            let p = b1.point(t);
            ib.value(p.w, p.z)
        }),
        BarrierRef::Param(c) => Box::new(move |t| side_of(c, b1.point(t))),
    };
    let grid = scan_grid(lo, hi, 20000);
    if grid.iter().all(|&t| f(t).abs() < 1e-13) {
        return Ok(0.0);
    }
    first_sign_change(&*f, lo, hi, 20000, 1e-12).ok_or_else(|| Error::NoBarrierIntersection(b1.label.name()))
}

#[derive(Serialize)]
pub struct ParamDescriptor<'a> {
    pub kind: &'static str,
    pub label: String,
    pub gamma: String,
    pub r: f64,
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub side: Side,
    pub t_domain: [f64; 2],
    pub w_coeffs: &'a [f64],
    pub z_coeffs: &'a [f64],
}

pub fn descriptor(b: &ParamBarrier) -> ParamDescriptor<'_> {
    let (beta, n) = match b.label {
        BarrierLabel::Bnr { n, beta } => (Some(beta), Some(n)),
        _ => (None, None),
    };
    ParamDescriptor {
        kind: "parametric",
        label: b.label.name(),
        gamma: b.params.gamma.to_string(),
        r: b.params.r,
        beta,
        n,
        side: b.side,
        t_domain: [0.0, b.t_max],
        w_coeffs: &b.w_poly,
        z_coeffs: &b.z_poly,
    }
}

#[derive(Serialize)]
pub struct ImplicitDescriptor {
    pub kind: &'static str,
    pub label: &'static str,
    pub gamma: String,
    pub r: f64,
    pub f0: f64,
    pub f1: f64,
    pub anchor: [f64; 2],
    pub tau_domain: [f64; 2],
}

pub fn implicit_descriptor(b: &ImplicitBarrier) -> ImplicitDescriptor {
    ImplicitDescriptor {
        kind: "implicit",
        label: "B_fr",
        gamma: b.params.gamma.to_string(),
        r: b.params.r,
        f0: b.f0,
        f1: b.f1,
        anchor: [b.anchor.0, b.anchor.1],
        tau_domain: [0.0, b.tau_max],
    }
}

/// Samples (t, W, Z, crossing) along a parametric barrier.
pub fn write_barrier_csv<W: Write>(b: &ParamBarrier, t_hi: f64, samples: usize, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["t", "W", "Z", "crossing"])?;
    for i in 0..=samples {
        let t = t_hi * i as f64 / samples as f64;
        let p = b.point(t);
        wtr.write_record([fmt17(t), fmt17(p.w), fmt17(p.z), fmt17(crossing_sign_param(b, t))])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_implicit_csv<W: Write>(b: &ImplicitBarrier, samples: usize, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["tau", "W", "Z", "crossing"])?;
    for i in 0..=samples {
        let tau = b.tau_max * i as f64 / samples as f64;
        let p = b.point(tau);
        wtr.write_record([fmt17(tau), fmt17(p.w), fmt17(p.z), fmt17(b.crossing(tau))])?;
    }
    wtr.flush()?;
    Ok(())
}

pub(crate) fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

#[derive(Clone, Debug, Serialize)]
pub struct NullclinePoint {
    pub curve: &'static str,
    pub branch: usize,
    pub w: f64,
    pub z: f64,
}

/// Polylines of D_W = 0, D_Z = 0, N_W = 0, N_Z = 0 inside a box.
pub fn nullclines(g: &GasParams, w_range: (f64, f64), z_range: (f64, f64), samples: usize) -> Vec<NullclinePoint> {
    let f = Field::new(g);
    let mut out = Vec::new();
    let curves: [(&'static str, &Quad<f64>); 4] = [("D_W", &f.dw), ("D_Z", &f.dz), ("N_W", &f.nw), ("N_Z", &f.nz)];
    for (name, q) in curves {
        for i in 0..=samples {
            let w = w_range.0 + (w_range.1 - w_range.0) * i as f64 / samples as f64;
            // q(w, Z) = a2 Z^2 + a1 Z + a0
            let a2 = q.czz;
            let a1 = q.cz + q.cwz * w;
            let a0 = q.c0 + q.cw * w + q.cww * w * w;
            let roots: Vec<f64> = if a2 == 0.0 {
                if a1 == 0.0 {
                    vec![]
                } else {
                    vec![-a0 / a1]
                }
            } else {
                let d = a1 * a1 - 4.0 * a2 * a0;
                if d < 0.0 {
                    vec![]
                } else {
                    let s = d.sqrt();
                    vec![(-a1 - s) / (2.0 * a2), (-a1 + s) / (2.0 * a2)]
                }
            };
            for (branch, z) in roots.into_iter().enumerate() {
                if z >= z_range.0 && z <= z_range.1 {
                    out.push(NullclinePoint { curve: name, branch, w, z });
                }
            }
        }
    }
    out
}

pub fn write_nullclines_csv<W: Write>(pts: &[NullclinePoint], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["curve", "branch", "W", "Z"])?;
    for p in pts {
        wtr.write_record([p.curve.to_string(), p.branch.to_string(), fmt17(p.w), fmt17(p.z)])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSample {
    pub w: f64,
    pub z: f64,
    pub f_w: f64,
    pub f_z: f64,
}

/// The psi-field on an `nw × nz` grid, W outer, Z inner.
pub fn portrait_grid(g: &GasParams, w_range: (f64, f64), z_range: (f64, f64), nw: usize, nz: usize) -> Vec<GridSample> {
    let f = Field::new(g);
    let at = |r: (f64, f64), i: usize, n: usize| if n <= 1 { r.0 } else { r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64 };
    let mut out = Vec::with_capacity(nw * nz);
    for i in 0..nw {
        let w = at(w_range, i, nw);
        for j in 0..nz {
            let z = at(z_range, j, nz);
            let (f_w, f_z) = f.psi(&w, &z);
            out.push(GridSample { w, z, f_w, f_z });
        }
    }
    out
}

pub fn write_grid_csv<W: Write>(grid: &[GridSample], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["W", "Z", "F_W", "F_Z"])?;
    for s in grid {
        wtr.write_record([fmt17(s.w), fmt17(s.z), fmt17(s.f_w), fmt17(s.f_z)])?;
    }
    wtr.flush()?;
    Ok(())
}
