//! Trajectory integration in ψ-time, classification of the two smooth branches
//! leaving P_s, and bisection on r.
//!
//! The ψ-field `(N_W D_Z, N_Z D_W)` is polynomial, so trajectories pass the
//! sonic lines without trouble; ξ is carried along as a third component with
//! `dξ/dψ = D_W D_Z`.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::barriers::fmt17;
use crate::error::{Error, Result};
use crate::euler::{find_po, r_of_k, Field, Gamma, GasParams, PhasePoint};
use crate::taylor::{taylor_at_ps_with, ProfileSeries, TaylorOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    HitsDW,
    HitsDZ,
    ReachesOrigin,
    ConvergesToPo,
    /// Runs off toward P_0, where |P| grows without bound.
    Escapes,
    Timeout,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BranchSide {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sample {
    pub psi: f64,
    pub w: f64,
    pub z: f64,
    pub xi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub r: f64,
    pub gamma: String,
    pub side: Option<BranchSide>,
    /// Smallest W - Z seen along the run.
    pub min_w_minus_z: f64,
}

impl Trajectory {
    pub fn last(&self) -> Sample {
        *self.samples.last().expect("trajectory has a start sample")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["psi", "W", "Z", "xi"])?;
        for s in &self.samples {
            wtr.write_record([fmt17(s.psi), fmt17(s.w), fmt17(s.z), fmt17(s.xi)])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Cap on the ξ advance per step; used when sampling profiles.
    pub max_dxi: Option<f64>,
    /// Integrate backward in ψ.
    pub reverse: bool,
    pub origin_radius: f64,
    pub escape_radius: f64,
    pub po_radius: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
            max_dxi: None,
            reverse: false,
            origin_radius: 1e-4,
            escape_radius: 1e3,
            po_radius: 1e-6,
        }
    }
}

type State = [f64; 3];

// Dormand-Prince 5(4)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct System {
    field: Field<f64>,
    sign: f64,
}

impl System {
    fn rhs(&self, y: &State) -> State {
        let e = self.field.eval(&y[0], &y[1]);
        [self.sign * e.n_w * e.d_z, self.sign * e.n_z * e.d_w, self.sign * e.d_w * e.d_z]
    }

    /// One DP step; returns the 5th-order state and the error estimate.
    fn step(&self, y: &State, h: f64) -> (State, State) {
        let mut k = [[0.0; 3]; 7];
        k[0] = self.rhs(y);
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..3 {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = self.rhs(&ys);
        }
        let mut y5 = *y;
        let mut err = [0.0; 3];
        for s in 0..7 {
            for i in 0..3 {
                y5[i] += h * B5[s] * k[s][i];
                err[i] += h * (B5[s] - B4[s]) * k[s][i];
            }
        }
        (y5, err)
    }
}

struct Events {
    field: Field<f64>,
    po: Option<PhasePoint>,
    origin_radius: f64,
    escape_radius: f64,
    po_radius: f64,
}

impl Events {
    /// Event functions in contract order; each fires on a sign change.
    fn values(&self, y: &State) -> [f64; 5] {
        let p = PhasePoint::new(y[0], y[1]);
        let n = p.norm();
        [
            self.field.dw.eval(&y[0], &y[1]),
            self.field.dz.eval(&y[0], &y[1]),
            n - self.origin_radius,
            self.escape_radius - n,
            self.po.map_or(1.0, |po| p.dist(&po) - self.po_radius),
        ]
    }

    fn tag(i: usize) -> Termination {
        [Termination::HitsDW, Termination::HitsDZ, Termination::ReachesOrigin, Termination::Escapes, Termination::ConvergesToPo][i]
    }
}

fn changed(a: f64, b: f64) -> bool {
    (a > 0.0) != (b > 0.0) || b == 0.0
}

/// Integrates the ψ-field from `start` until the first event.
pub fn integrate_psi(start: PhasePoint, xi0: f64, g: &GasParams, opts: &IntegratorOptions) -> Result<Trajectory> {
    let field = Field::new(g);
    let sys = System { field: field.clone(), sign: if opts.reverse { -1.0 } else { 1.0 } };
    let ev = Events {
        field,
        po: find_po(g).ok(),
        origin_radius: opts.origin_radius,
        escape_radius: opts.escape_radius,
        po_radius: opts.po_radius,
    };
    let mut y: State = [start.w, start.z, xi0];
    let mut psi = 0.0;
    let mut samples = vec![Sample { psi, w: y[0], z: y[1], xi: y[2] }];
    let mut min_wz = y[0] - y[1];
    let mk = |samples, termination, min_wz| Trajectory {
        samples,
        termination,
        r: g.r,
        gamma: g.gamma.to_string(),
        side: None,
        min_w_minus_z: min_wz,
    };

    let mut gv = ev.values(&y);
    for i in [2, 4] {
        if gv[i] <= 0.0 {
            return Ok(mk(samples, Events::tag(i), min_wz));
        }
    }
    let speed = {
        let f = sys.rhs(&y);
        f[0].hypot(f[1]).max(1e-300)
    };
    let mut h = (1e-3 * (1.0 + PhasePoint::new(y[0], y[1]).norm()) / speed).min(1e-2);

    for _ in 0..opts.max_steps {
        if let Some(mx) = opts.max_dxi {
            let f = sys.rhs(&y);
            if f[2] != 0.0 {
                h = h.min(mx / f[2].abs());
            }
        }
        let (yn, err) = sys.step(&y, h);
        let mut en = 0.0;
        for i in 0..3 {
            let sc = opts.atol + opts.rtol * y[i].abs().max(yn[i].abs());
            en += (err[i] / sc).powi(2);
        }
        let en = (en / 3.0).sqrt();
        if !en.is_finite() || en > 1.0 {
            let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).max(0.1) } else { 0.1 };
            h *= fac;
            if h < 1e-14 * (1.0 + psi.abs()) {
                return Err(Error::StepSizeUnderflow { psi });
            }
            continue;
        }
        let gn = ev.values(&yn);
        let fired: Vec<usize> = (0..5).filter(|&i| changed(gv[i], gn[i])).collect();
        if !fired.is_empty() {
            let mut best: Option<(f64, usize, State)> = None;
            for &i in &fired {
                let (mut lo, mut hi) = (0.0, 1.0);
                let mut yhi = yn;
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    let (ym, _) = sys.step(&y, m * h);
                    let v = ev.values(&ym)[i];
                    if changed(gv[i], v) {
                        hi = m;
                        yhi = ym;
                    } else {
                        lo = m;
                    }
                    if hi - lo < 1e-15 || v.abs() < 1e-13 {
                        break;
                    }
                }
                if best.as_ref().is_none_or(|b| hi < b.0) {
                    best = Some((hi, i, yhi));
                }
            }
            let (theta, i, ye) = best.expect("at least one event fired");
            psi += theta * h * sys.sign;
            min_wz = min_wz.min(ye[0] - ye[1]);
            samples.push(Sample { psi, w: ye[0], z: ye[1], xi: ye[2] });
            return Ok(mk(samples, Events::tag(i), min_wz));
        }
        y = yn;
        gv = gn;
        psi += h * sys.sign;
        min_wz = min_wz.min(y[0] - y[1]);
        samples.push(Sample { psi, w: y[0], z: y[1], xi: y[2] });
        h *= (0.9 * en.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    Ok(mk(samples, Termination::Timeout, min_wz))
}

pub const DEFAULT_DELTA: f64 = 1e-2;
pub const LAUNCH_ORDER: usize = 16;

/// Launch data for one branch: series point at ξ = `xi` and the ψ direction
/// that moves ξ further from zero.
fn launch(series: &ProfileSeries, xi: f64) -> (PhasePoint, bool) {
    let (w, z) = series.eval(&xi);
    let e = series.field().eval(&w, &z);
    let reverse = e.d_w * e.d_z * xi.signum() < 0.0;
    (PhasePoint::new(w, z), reverse)
}

/// ξ sign of the branch that leaves P_s away from the origin.
pub fn right_xi_sign(series: &ProfileSeries) -> Result<f64> {
    let (w0, z0) = series.ps();
    let (w1, z1) = (series.w[1], series.z[1]);
    let radial = w0 * w1 + z0 * z1;
    if radial.abs() < 1e-12 * w0.hypot(z0) * w1.hypot(z1) {
        return Err(Error::AmbiguousOrientation);
    }
    Ok(if radial > 0.0 { 1.0 } else { -1.0 })
}

pub fn launch_series(g: &GasParams) -> Result<ProfileSeries> {
    taylor_at_ps_with::<f64>(g, LAUNCH_ORDER, TaylorOptions { allow_resonant: true, ..Default::default() })
}

pub fn branch_trajectory(g: &GasParams, side: BranchSide, delta: f64, opts: &IntegratorOptions) -> Result<Trajectory> {
    let series = launch_series(g)?;
    branch_from_series(&series, side, delta, opts)
}

pub fn branch_from_series(
    series: &ProfileSeries,
    side: BranchSide,
    delta: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let s = right_xi_sign(series)?;
    let xi = match side {
        BranchSide::Right => s * delta,
        BranchSide::Left => -s * delta,
    };
    let (p, reverse) = launch(series, xi);
    let o = IntegratorOptions { reverse, ..opts.clone() };
    let mut t = integrate_psi(p, xi, &series.params, &o)?;
    t.side = Some(side);
    Ok(t)
}

pub fn classify_right_with(g: &GasParams, delta: f64, opts: &IntegratorOptions) -> Result<Termination> {
    Ok(branch_trajectory(g, BranchSide::Right, delta, opts)?.termination)
}

pub fn classify_right(g: &GasParams, delta: f64) -> Result<Termination> {
    classify_right_with(g, delta, &IntegratorOptions::default())
}

pub fn classify_left(g: &GasParams, delta: f64) -> Result<Termination> {
    Ok(branch_trajectory(g, BranchSide::Left, delta, &IntegratorOptions::default())?.termination)
}

/// Classification at `delta` and `delta/2`; the two must agree.
pub fn classify_right_checked(g: &GasParams, delta: f64, opts: &IntegratorOptions) -> Result<(Termination, bool)> {
    let (a, b) = rayon::join(|| classify_right_with(g, delta, opts), || classify_right_with(g, delta / 2.0, opts));
    let (a, b) = (a?, b?);
    Ok((a, a == b))
}

#[derive(Clone, Debug, Serialize)]
pub struct BisectStep {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    pub tag: Termination,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShootReport {
    pub gamma: String,
    pub n: usize,
    pub r_n: f64,
    pub r_n1: f64,
    pub bracket: [f64; 2],
    pub endpoint_tags: [Termination; 2],
    pub endpoint_richardson_agree: bool,
    pub tol_r: f64,
    pub delta: f64,
    pub rtol: f64,
    pub history: Vec<BisectStep>,
    pub iterations: usize,
    pub r: f64,
    /// Range of r whose right branch runs out to the escape radius.
    pub escape_window: Option<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct ShootOptions {
    pub delta: f64,
    /// Offset of the bracket ends from r_n and r_{n+1}.
    pub eps: f64,
    pub integrator: IntegratorOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { delta: DEFAULT_DELTA, eps: 1e-3, integrator: IntegratorOptions::default() }
    }
}

pub fn find_r_bisect(gamma: Gamma, n: usize, tol_r: f64) -> Result<f64> {
    Ok(find_r_bisect_with(gamma, n, tol_r, &ShootOptions::default())?.r)
}

/// Bisects the HitsDW / HitsDZ boundary in (r_n + ε, r_{n+1} - ε).
pub fn find_r_bisect_with(gamma: Gamma, n: usize, tol_r: f64, opts: &ShootOptions) -> Result<ShootReport> {
    let r_n = r_of_k(n as f64, gamma)?;
    let r_n1 = r_of_k(n as f64 + 1.0, gamma)?;
    let (mut lo, mut hi) = (r_n + opts.eps, r_n1 - opts.eps);
    let classify = |r: f64| classify_right_checked(&GasParams::new(gamma, r), opts.delta, &opts.integrator);
    let (a, b) = rayon::join(|| classify(lo), || classify(hi));
    let ((ta, ra), (tb, rb)) = (a?, b?);
    if ta == tb {
        return Err(Error::DichotomyFailed(ta.to_string()));
    }
    if ta != Termination::HitsDW || tb != Termination::HitsDZ {
        return Err(Error::UnexpectedClassification(format!("endpoints {ta} / {tb}")));
    }
    let mut report = ShootReport {
        gamma: gamma.to_string(),
        n,
        r_n,
        r_n1,
        bracket: [lo, hi],
        endpoint_tags: [ta, tb],
        endpoint_richardson_agree: ra && rb,
        tol_r,
        delta: opts.delta,
        rtol: opts.integrator.rtol,
        history: Vec::new(),
        iterations: 0,
        r: 0.5 * (lo + hi),
        escape_window: None,
    };
    while hi - lo > tol_r {
        let mid = 0.5 * (lo + hi);
        let tag = classify_right_with(&GasParams::new(gamma, mid), opts.delta, &opts.integrator)?;
        report.history.push(BisectStep { lo, hi, mid, tag });
        report.iterations += 1;
        match tag {
            Termination::HitsDW => lo = mid,
            Termination::HitsDZ => hi = mid,
            Termination::Escapes => {
                // refine both edges of the escape window and return its centre
                let tag = |r: f64| classify_right_with(&GasParams::new(gamma, r), opts.delta, &opts.integrator);
                let (mut a, mut b) = (lo, mid);
                while b - a > tol_r {
                    let m = 0.5 * (a + b);
                    let t = tag(m)?;
                    report.history.push(BisectStep { lo: a, hi: b, mid: m, tag: t });
                    if t == Termination::HitsDW {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let left = 0.5 * (a + b);
                let (mut a, mut b) = (mid, hi);
                while b - a > tol_r {
                    let m = 0.5 * (a + b);
                    let t = tag(m)?;
                    report.history.push(BisectStep { lo: a, hi: b, mid: m, tag: t });
                    if t == Termination::HitsDZ {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                let right = 0.5 * (a + b);
                report.iterations = report.history.len();
                report.escape_window = Some([left, right]);
                report.r = 0.5 * (left + right);
                return Ok(report);
            }
            other => return Err(Error::UnexpectedClassification(other.to_string())),
        }
    }
    report.r = 0.5 * (lo + hi);
    Ok(report)
}

/// Right-branch classification at many r values, in parallel.
pub fn classify_scan(gamma: Gamma, rs: &[f64], delta: f64) -> Vec<Result<Termination>> {
    rs.par_iter().map(|&r| classify_right(&GasParams::new(gamma, r), delta)).collect()
}
