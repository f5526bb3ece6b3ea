//! The self-similar (W, Z) phase plane.
//!
//! Every field component is a quadratic polynomial in (W, Z), stored as a
//! [`Quad`] whose coefficients live in any [`Arith`] scalar. That one
//! representation serves plain `f64` evaluation, multiprecision Taylor
//! recurrences and symbolic evaluation along barrier curves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalError};
use crate::scalar::{Arith, Real};

/// Rational adiabatic exponent `num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gamma {
    num: i64,
    den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Gamma {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den <= 0 || num <= den {
            return Err(Error::InvalidGamma(format!("{num}/{den} (need gamma > 1)")));
        }
        let g = gcd(num, den);
        Ok(Gamma { num: num / g, den: den / g })
    }

    pub fn monatomic() -> Self {
        Gamma { num: 5, den: 3 }
    }

    pub fn diatomic() -> Self {
        Gamma { num: 7, den: 5 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_monatomic(&self) -> bool {
        *self == Gamma::monatomic()
    }

    /// alpha = (gamma - 1)/2 as a reduced fraction.
    pub fn alpha_ratio(&self) -> (i64, i64) {
        let (n, d) = (self.num - self.den, 2 * self.den);
        let g = gcd(n, d);
        (n / g, d / g)
    }

    pub fn alpha<T: Real>(&self) -> T {
        let (n, d) = self.alpha_ratio();
        T::from_ratio(n, d)
    }

    pub fn alpha_interval(&self) -> std::result::Result<Interval, IntervalError> {
        let (n, d) = self.alpha_ratio();
        Interval::ratio(n, d)
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Gamma {
    type Err = Error;

    /// Accepts `p/q` or a terminating decimal such as `1.4`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidGamma(s.to_string());
        if let Some((a, b)) = s.split_once('/') {
            let n: i64 = a.trim().parse().map_err(|_| bad())?;
            let d: i64 = b.trim().parse().map_err(|_| bad())?;
            return Gamma::new(n, d);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10i64.pow(frac.len() as u32);
        let i: i64 = int.parse().map_err(|_| bad())?;
        let f: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        Gamma::new(i * den + f, den)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub gamma: Gamma,
    pub r: f64,
}

impl GasParams {
    pub fn new(gamma: Gamma, r: f64) -> Self {
        GasParams { gamma, r }
    }

    pub fn alpha(&self) -> f64 {
        self.gamma.alpha()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub w: f64,
    pub z: f64,
}

impl PhasePoint {
    pub fn new(w: f64, z: f64) -> Self {
        PhasePoint { w, z }
    }

    pub fn norm(&self) -> f64 {
        self.w.hypot(self.z)
    }

    pub fn dist(&self, o: &PhasePoint) -> f64 {
        (self.w - o.w).hypot(self.z - o.z)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldEval<T = f64> {
    pub n_w: T,
    pub d_w: T,
    pub n_z: T,
    pub d_z: T,
}

/// `c0 + cw W + cz Z + cww W^2 + cwz W Z + czz Z^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quad<T> {
    pub c0: T,
    pub cw: T,
    pub cz: T,
    pub cww: T,
    pub cwz: T,
    pub czz: T,
}

impl<T: Arith> Quad<T> {
    pub fn eval(&self, w: &T, z: &T) -> T {
        self.c0.clone()
            + self.cw.clone() * w.clone()
            + self.cz.clone() * z.clone()
            + self.cww.clone() * w.clone() * w.clone()
            + self.cwz.clone() * w.clone() * z.clone()
            + self.czz.clone() * z.clone() * z.clone()
    }

    pub fn grad(&self, w: &T, z: &T) -> (T, T) {
        let two = T::from_f64(2.0);
        let gw = self.cw.clone() + two.clone() * self.cww.clone() * w.clone() + self.cwz.clone() * z.clone();
        let gz = self.cz.clone() + self.cwz.clone() * w.clone() + two * self.czz.clone() * z.clone();
        (gw, gz)
    }

    /// Coefficients `[a0, a1, a2]` of `t -> q(p0 + t d)`.
    pub fn along(&self, p0: (&T, &T), d: (&T, &T)) -> [T; 3] {
        let (w0, z0) = p0;
        let (dw, dz) = d;
        let two = T::from_f64(2.0);
        let a0 = self.eval(w0, z0);
        let (gw, gz) = self.grad(w0, z0);
        let a1 = gw * dw.clone() + gz * dz.clone();
        let a2 = self.cww.clone() * dw.clone() * dw.clone()
            + self.cwz.clone() * dw.clone() * dz.clone()
            + self.czz.clone() * dz.clone() * dz.clone();
        let _ = two;
        [a0, a1, a2]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Quad<U> {
        Quad {
            c0: f(&self.c0),
            cw: f(&self.cw),
            cz: f(&self.cz),
            cww: f(&self.cww),
            cwz: f(&self.cwz),
            czz: f(&self.czz),
        }
    }
}

/// The four quadratic components `N_W, D_W, N_Z, D_Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub nw: Quad<T>,
    pub dw: Quad<T>,
    pub nz: Quad<T>,
    pub dz: Quad<T>,
}

impl<T: Arith> Field<T> {
    pub fn from_alpha_r(alpha: T, r: T) -> Self {
        let zero = T::zero();
        let one = T::one();
        let half = T::from_f64(0.5);
        let a_half = half.clone() * alpha.clone();
        let p = half.clone() * (one.clone() + alpha.clone()); // (1+a)/2
        let m = half.clone() * (one.clone() - alpha.clone()); // (1-a)/2
        let s = half.clone() + alpha.clone(); // (1+2a)/2
        Field {
            nw: Quad {
                c0: zero.clone(),
                cw: -r.clone(),
                cz: zero.clone(),
                cww: -s.clone(),
                cwz: -m.clone(),
                czz: a_half.clone(),
            },
            dw: Quad {
                c0: one.clone(),
                cw: p.clone(),
                cz: m.clone(),
                cww: zero.clone(),
                cwz: zero.clone(),
                czz: zero.clone(),
            },
            nz: Quad {
                c0: zero.clone(),
                cw: zero.clone(),
                cz: -r,
                cww: a_half,
                cwz: -m.clone(),
                czz: -s,
            },
            dz: Quad { c0: one, cw: m, cz: p, cww: zero.clone(), cwz: zero.clone(), czz: zero },
        }
    }

    pub fn eval(&self, w: &T, z: &T) -> FieldEval<T> {
        FieldEval {
            n_w: self.nw.eval(w, z),
            d_w: self.dw.eval(w, z),
            n_z: self.nz.eval(w, z),
            d_z: self.dz.eval(w, z),
        }
    }

    /// `(N_W D_Z, N_Z D_W)`.
    pub fn psi(&self, w: &T, z: &T) -> (T, T) {
        let e = self.eval(w, z);
        (e.n_w * e.d_z, e.n_z * e.d_w)
    }

    /// Jacobian of the psi-field by the product rule on closed-form gradients.
    pub fn psi_jacobian(&self, w: &T, z: &T) -> [[T; 2]; 2] {
        let e = self.eval(w, z);
        let (nww, nwz) = self.nw.grad(w, z);
        let (dzw, dzz) = self.dz.grad(w, z);
        let (nzw, nzz) = self.nz.grad(w, z);
        let (dww, dwz) = self.dw.grad(w, z);
        [
            [
                nww * e.d_z.clone() + e.n_w.clone() * dzw,
                nwz * e.d_z + e.n_w * dzz,
            ],
            [
                nzw * e.d_w.clone() + e.n_z.clone() * dww,
                nzz * e.d_w + e.n_z * dwz,
            ],
        ]
    }
}

impl Field<f64> {
    pub fn new(g: &GasParams) -> Self {
        Field::from_alpha_r(g.alpha(), g.r)
    }
}

impl<T: Real> Field<T> {
    pub fn real(g: &GasParams) -> Self {
        Field::from_alpha_r(g.gamma.alpha::<T>(), T::from_f64(g.r))
    }
}

impl Field<Interval> {
    /// Field with an enclosure of alpha and the point value of r.
    pub fn interval(g: &GasParams) -> Result<Self> {
        Ok(Field::from_alpha_r(g.gamma.alpha_interval()?, Interval::point(g.r)))
    }
}

pub fn field_xi(p: PhasePoint, g: &GasParams) -> FieldEval {
    Field::new(g).eval(&p.w, &p.z)
}

pub fn field_psi(p: PhasePoint, g: &GasParams) -> [f64; 2] {
    let (a, b) = Field::new(g).psi(&p.w, &p.z);
    [a, b]
}

pub fn psi_jacobian(p: PhasePoint, g: &GasParams) -> [[f64; 2]; 2] {
    Field::new(g).psi_jacobian(&p.w, &p.z)
}

/// Roots of `a2 t^2 + a1 t + a0` without cancellation; `None` if complex.
fn quadratic_roots<T: Real>(c: &[T; 3]) -> Option<(T, T)> {
    let [a0, a1, a2] = c.clone();
    let zero = T::zero();
    if a2 == zero {
        if a1 == zero {
            return None;
        }
        let t = -a0 / a1;
        return Some((t.clone(), t));
    }
    let disc = a1.clone() * a1.clone() - T::from_f64(4.0) * a2.clone() * a0.clone();
    if disc < zero {
        return None;
    }
    let sq = disc.sqrt();
    let qq = if a1 >= zero {
        -T::from_f64(0.5) * (a1 + sq)
    } else {
        -T::from_f64(0.5) * (a1 - sq)
    };
    let t1 = qq.clone() / a2;
    let t2 = if qq == zero { t1.clone() } else { a0 / qq };
    Some((t1, t2))
}

/// Newton polish of a common zero of two quadratics.
fn newton2(f: &Quad<f64>, g: &Quad<f64>, mut w: f64, mut z: f64) -> (f64, f64) {
    for _ in 0..4 {
        let (fv, gv) = (f.eval(&w, &z), g.eval(&w, &z));
        let (fw, fz) = f.grad(&w, &z);
        let (gw, gz) = g.grad(&w, &z);
        let det = fw * gz - fz * gw;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dw = (fv * gz - fz * gv) / det;
        let dz = (fw * gv - fv * gw) / det;
        let (nw, nz) = (w - dw, z - dz);
        let old = fv.abs().max(gv.abs());
        if f.eval(&nw, &nz).abs().max(g.eval(&nw, &nz).abs()) > old {
            break;
        }
        w = nw;
        z = nz;
    }
    (w, z)
}

/// Sonic point in any real type: intersection of D_Z = 0 with N_Z = 0,
/// taking the root with the larger W.
pub fn find_ps_real<T: Real>(g: &GasParams) -> Result<(T, T)> {
    let f = Field::<T>::real(g);
    let alpha = g.gamma.alpha::<T>();
    let one = T::one();
    let p = -T::from_f64(2.0) / (one.clone() - alpha.clone());
    let q = -(one.clone() + alpha.clone()) / (one - alpha);
    let zero = T::zero();
    let c = f.nz.along((&p, &zero), (&q, &T::one()));
    let none = || Error::NoSonicPoint { gamma: g.gamma.to_string(), r: g.r };
    let (z1, z2) = quadratic_roots(&c).ok_or_else(none)?;
    let w1 = p.clone() + q.clone() * z1.clone();
    let w2 = p + q * z2.clone();
    let (w, z) = if w1 >= w2 { (w1, z1) } else { (w2, z2) };
    if !(w > z) || f.dw.eval(&w, &z) == zero {
        return Err(none());
    }
    Ok((w, z))
}

pub fn find_ps(g: &GasParams) -> Result<PhasePoint> {
    let (w, z) = find_ps_real::<f64>(g)?;
    let f = Field::new(g);
    let (w, z) = newton2(&f.dz, &f.nz, w, z);
    Ok(PhasePoint::new(w, z))
}

/// Nullcline intersection N_W = N_Z = 0 with W > Z. It lies on
/// W + Z = -2r/(1+3 alpha), where N_W - N_Z vanishes off the diagonal.
pub fn find_po_real<T: Real>(g: &GasParams) -> Result<(T, T)> {
    let f = Field::<T>::real(g);
    let alpha = g.gamma.alpha::<T>();
    let s = -T::from_f64(2.0) * T::from_f64(g.r) / (T::one() + T::from_f64(3.0) * alpha);
    let zero = T::zero();
    let c = f.nw.along((&zero, &s), (&T::one(), &-T::one()));
    let none = || Error::NoIntersection { gamma: g.gamma.to_string(), r: g.r };
    let (t1, t2) = quadratic_roots(&c).ok_or_else(none)?;
    let t = if t1 > t2 { t1 } else { t2 };
    let (w, z) = (t.clone(), s - t);
    if !(w > z) {
        return Err(none());
    }
    Ok((w, z))
}

pub fn find_po(g: &GasParams) -> Result<PhasePoint> {
    let (w, z) = find_po_real::<f64>(g)?;
    let f = Field::new(g);
    let (w, z) = newton2(&f.nw, &f.nz, w, z);
    Ok(PhasePoint::new(w, z))
}

/// Linearization of the psi-flow at the sonic point.
///
/// Both eigenvalues are positive. `lambda_minus` is the slow one and
/// `nu_minus` its eigenvector, the tangent of the smooth profile;
/// `k = lambda_plus / lambda_minus >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SonicData<T = f64> {
    pub ps: (T, T),
    pub jacobian: [[T; 2]; 2],
    pub lambda_minus: T,
    pub lambda_plus: T,
    pub nu_minus: [T; 2],
    pub nu_plus: [T; 2],
    pub k: T,
}

impl SonicData<f64> {
    pub fn ps_point(&self) -> PhasePoint {
        PhasePoint::new(self.ps.0, self.ps.1)
    }
}

fn eigvec<T: Real>(j: &[[T; 2]; 2], lam: &T) -> [T; 2] {
    let zero = T::zero();
    let a = [j[0][1].clone(), lam.clone() - j[0][0].clone()];
    let b = [lam.clone() - j[1][1].clone(), j[1][0].clone()];
    let na = a[0].clone() * a[0].clone() + a[1].clone() * a[1].clone();
    let nb = b[0].clone() * b[0].clone() + b[1].clone() * b[1].clone();
    let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
    if n == zero {
        return [T::one(), zero];
    }
    let n = n.sqrt();
    let mut v = [v[0].clone() / n.clone(), v[1].clone() / n];
    let tiny = T::from_f64(1e-300);
    let lead = if v[0].abs() > tiny { v[0].clone() } else { v[1].clone() };
    if lead < zero {
        v = [-v[0].clone(), -v[1].clone()];
    }
    v
}

pub fn sonic_data_real<T: Real>(g: &GasParams) -> Result<SonicData<T>> {
    let (w, z) = find_ps_real::<T>(g)?;
    let f = Field::<T>::real(g);
    let j = f.psi_jacobian(&w, &z);
    let tr = j[0][0].clone() + j[1][1].clone();
    let det = j[0][0].clone() * j[1][1].clone() - j[0][1].clone() * j[1][0].clone();
    let mut disc = tr.clone() * tr.clone() - T::from_f64(4.0) * det.clone();
    let zero = T::zero();
    if disc < zero {
        if -disc.clone() <= T::from_f64(1e-12) * tr.clone() * tr.clone() {
            disc = zero.clone();
        } else {
            return Err(Error::ComplexEigenvalues { disc: disc.to_f64() });
        }
    }
    let sq = disc.sqrt();
    let half = T::from_f64(0.5);
    let big = if tr >= zero { half * (tr + sq) } else { half * (tr - sq) };
    let small = if big == zero { zero } else { det / big.clone() };
    let (slow, fast) = if small.abs() <= big.abs() { (small, big) } else { (big, small) };
    let k = fast.clone() / slow.clone();
    let nu_minus = eigvec(&j, &slow);
    let nu_plus = eigvec(&j, &fast);
    Ok(SonicData { ps: (w, z), jacobian: j, lambda_minus: slow, lambda_plus: fast, nu_minus, nu_plus, k })
}

pub fn sonic_data(g: &GasParams) -> Result<SonicData<f64>> {
    let ps = find_ps(g)?;
    let mut sd = sonic_data_real::<f64>(g)?;
    if sd.ps != (ps.w, ps.z) {
        // recompute the linearization at the polished point
        let f = Field::new(g);
        let j = f.psi_jacobian(&ps.w, &ps.z);
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let disc = (tr * tr - 4.0 * det).max(0.0);
        let big = 0.5 * (tr + tr.signum() * disc.sqrt());
        let small = det / big;
        let (slow, fast) = if small.abs() <= big.abs() { (small, big) } else { (big, small) };
        sd = SonicData {
            ps: (ps.w, ps.z),
            jacobian: j,
            lambda_minus: slow,
            lambda_plus: fast,
            nu_minus: eigvec(&j, &slow),
            nu_plus: eigvec(&j, &fast),
            k: fast / slow,
        };
    }
    Ok(sd)
}

/// Upper end r* of the sonic window: the double root of the P_s quadratic.
pub fn r_star(gamma: Gamma) -> f64 {
    let a: f64 = gamma.alpha();
    let p = -2.0 / (1.0 - a);
    let q = -(1.0 + a) / (1.0 - a);
    let qa = 0.5 * a * q * q - 0.5 * (1.0 - a) * q - 0.5 * (1.0 + 2.0 * a);
    let b0 = a * p * q - 0.5 * (1.0 - a) * p;
    let c = 0.5 * a * p * p;
    b0 - 2.0 * (qa * c).sqrt()
}

/// Closed form of k(r) for gamma = 5/3.
pub fn k_closed_form(r: f64) -> Result<f64> {
    let rs = 3.0 - 3f64.sqrt();
    if !(1.0..rs).contains(&r) {
        return Err(Error::DomainError(format!("r = {r} outside [1, 3 - sqrt 3)")));
    }
    let s = (2.0 * r - 2.0).sqrt();
    Ok((r - 2.0 - s) / (r - 2.0 + s))
}

/// k(r) for any gamma: the closed form for 5/3, the Jacobian otherwise.
pub fn k_of_r(gamma: Gamma, r: f64) -> Result<f64> {
    if gamma.is_monatomic() {
        return k_closed_form(r);
    }
    if r >= r_star(gamma) {
        return Err(Error::DomainError(format!("r = {r} beyond r* = {}", r_star(gamma))));
    }
    if r == 1.0 {
        return Ok(1.0);
    }
    Ok(sonic_data(&GasParams::new(gamma, r))?.k)
}

/// Inverse of the increasing map r -> k(r) on [1, r*).
pub fn r_of_k(kk: f64, gamma: Gamma) -> Result<f64> {
    if !(kk >= 1.0) {
        return Err(Error::NotBracketed { kk });
    }
    if kk == 1.0 {
        return Ok(1.0);
    }
    let rs = r_star(gamma);
    let mut lo = 1.0;
    let mut hi = rs;
    for _ in 0..40 {
        let h = hi.next_down();
        match k_of_r(gamma, h) {
            Ok(k) if k > kk => {
                hi = h;
                break;
            }
            _ => hi = 0.5 * (lo + hi) + 0.5 * (hi - lo) * (1.0 - 1e-3),
        }
    }
    if k_of_r(gamma, hi).map_or(true, |k| k <= kk) {
        return Err(Error::NotBracketed { kk });
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let k = k_of_r(gamma, m)?;
        if (k - kk).abs() < 1e-12 {
            return Ok(m);
        }
        if k < kk {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn to_riemann(u: f64, sigma: f64) -> (f64, f64) {
    (u + sigma, u - sigma)
}

pub fn from_riemann(w: f64, z: f64) -> (f64, f64) {
    ((w + z) / 2.0, (w - z) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g53(r: f64) -> GasParams {
        GasParams::new(Gamma::monatomic(), r)
    }

    #[test]
    fn gamma_parsing() {
        assert_eq!("5/3".parse::<Gamma>().unwrap(), Gamma::monatomic());
        assert_eq!("1.4".parse::<Gamma>().unwrap(), Gamma::diatomic());
        assert_eq!("10/6".parse::<Gamma>().unwrap(), Gamma::monatomic());
        assert!("1".parse::<Gamma>().is_err());
        assert!("x/3".parse::<Gamma>().is_err());
        assert_eq!(Gamma::monatomic().alpha_ratio(), (1, 3));
        assert_eq!(Gamma::diatomic().alpha_ratio(), (1, 5));
    }

    #[test]
    fn origin_and_affine_denominators() {
        let e = field_xi(PhasePoint::new(0.0, 0.0), &g53(1.2));
        assert_eq!(e, FieldEval { n_w: 0.0, d_w: 1.0, n_z: 0.0, d_z: 1.0 });
        let e = field_xi(PhasePoint::new(1.0, -1.0), &g53(1.2));
        assert!((e.d_z - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn psi_first_component_hand_value() {
        let v = field_psi(PhasePoint::new(1.0, -1.0), &g53(1.1));
        assert!((v[0] + 43.0 / 45.0).abs() < 1e-14);
    }

    #[test]
    fn sonic_point_values() {
        let ps = find_ps(&g53(1.13)).unwrap();
        assert!((ps.w - 2.1498226838861934).abs() < 1e-13);
        assert!((ps.z + 2.5749113419430962).abs() < 1e-13);
        let e = field_xi(ps, &g53(1.13));
        assert!(e.d_z.abs() < 1e-13 && e.n_z.abs() < 1e-13);
        assert!(e.d_w.abs() > 1.0);
    }

    #[test]
    fn r_star_matches_closed_form_for_monatomic() {
        assert!((r_star(Gamma::monatomic()) - (3.0 - 3f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn po_is_mirror_free_root() {
        let g = g53(1.13);
        let po = find_po(&g).unwrap();
        assert!((po.w - 0.413608707).abs() < 1e-8);
        assert!((po.z + 1.543608706).abs() < 1e-8);
        let v = field_psi(po, &g);
        assert!(v[0].abs() < 1e-13 && v[1].abs() < 1e-13);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let g = g53(1.17);
        let p = PhasePoint::new(0.7, -1.9);
        let j = psi_jacobian(p, &g);
        let h = 1e-6;
        for c in 0..2 {
            let (dw, dz) = if c == 0 { (h, 0.0) } else { (0.0, h) };
            let a = field_psi(PhasePoint::new(p.w + dw, p.z + dz), &g);
            let b = field_psi(PhasePoint::new(p.w - dw, p.z - dz), &g);
            for row in 0..2 {
                let fd = (a[row] - b[row]) / (2.0 * h);
                assert!((fd - j[row][c]).abs() < 1e-6, "row {row} col {c}");
            }
        }
    }

    #[test]
    fn eigen_pairs() {
        let sd = sonic_data(&g53(1.13)).unwrap();
        for (lam, v) in [(sd.lambda_minus, sd.nu_minus), (sd.lambda_plus, sd.nu_plus)] {
            let jv = [
                sd.jacobian[0][0] * v[0] + sd.jacobian[0][1] * v[1],
                sd.jacobian[1][0] * v[0] + sd.jacobian[1][1] * v[1],
            ];
            assert!((jv[0] - lam * v[0]).abs() < 1e-10 && (jv[1] - lam * v[1]).abs() < 1e-10);
            assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-14);
        }
        assert!(0.0 < sd.lambda_minus && sd.lambda_minus < sd.lambda_plus);
        assert!((sd.k - k_closed_form(1.13).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn resonant_exponents() {
        let r2 = 11.0 - 3.0 * 11f64.sqrt();
        let r3 = 6.0 - 2.0 * 6f64.sqrt();
        let r4 = (43.0 - 5.0 * 43f64.sqrt()) / 9.0;
        for (r, k) in [(r2, 2.0), (r3, 3.0), (r4, 4.0)] {
            assert!((k_closed_form(r).unwrap() - k).abs() < 1e-10);
            assert!((sonic_data(&g53(r)).unwrap().k - k).abs() < 1e-9);
            assert!((r_of_k(k, Gamma::monatomic()).unwrap() - r).abs() < 1e-11);
        }
        assert_eq!(k_closed_form(1.0).unwrap(), 1.0);
        assert_eq!(r_of_k(1.0, Gamma::monatomic()).unwrap(), 1.0);
        assert!(k_closed_form(3.0 - 3f64.sqrt() - 1e-6).unwrap() > 1e3);
        assert!(k_closed_form(1.3).is_err());
    }

    #[test]
    fn diatomic_window() {
        let g = Gamma::diatomic();
        let r3 = r_of_k(3.0, g).unwrap();
        let r4 = r_of_k(4.0, g).unwrap();
        // 50-digit mpmath oracle
        assert!((r3 - 1.0703743786758344).abs() < 1e-12);
        assert!((r4 - 1.0949749631888783).abs() < 1e-12);
        assert!(find_ps(&GasParams::new(g, 1.079404)).is_ok());
    }

    #[test]
    fn riemann_round_trip() {
        assert_eq!(to_riemann(0.0, 1.0), (1.0, -1.0));
        assert_eq!(from_riemann(2.0, 0.0), (1.0, 1.0));
    }
}
