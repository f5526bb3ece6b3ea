//! Global profile W(ξ), Z(ξ) assembled from the sonic-point series and the two
//! integrated branches, and the physical fields it induces.

use std::io::Write;

use serde::Serialize;

use crate::barriers::fmt17;
use crate::error::{Error, Result};
use crate::euler::{Field, GasParams};
use crate::shooting::{branch_from_series, launch_series, BranchSide, IntegratorOptions, Termination};
use crate::taylor::ProfileSeries;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileNode {
    pub xi: f64,
    pub w: f64,
    pub z: f64,
    pub dw: f64,
    pub dz: f64,
}

#[derive(Clone, Debug)]
pub struct Profile {
    pub params: GasParams,
    pub nodes: Vec<ProfileNode>,
    pub delta: f64,
    pub series: ProfileSeries,
    pub terminations: [Termination; 2],
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhysicalState {
    pub w: f64,
    pub z: f64,
    pub u: f64,
    pub sigma: f64,
    pub rho: f64,
}

pub const PROFILE_MAX_DXI: f64 = 5e-3;

impl Profile {
    pub fn build(g: &GasParams, delta: f64, max_dxi: f64) -> Result<Profile> {
        let series = launch_series(g)?;
        let opts = IntegratorOptions { max_dxi: Some(max_dxi), ..Default::default() };
        let field = Field::new(g);
        let mut nodes = Vec::new();
        let mut terms = [Termination::Timeout; 2];
        for (k, side) in [BranchSide::Left, BranchSide::Right].into_iter().enumerate() {
            let t = branch_from_series(&series, side, delta, &opts)?;
            terms[k] = t.termination;
            let dir = t.samples[0].xi.signum();
            let mut last = t.samples[0].xi;
            for (i, s) in t.samples.iter().enumerate() {
                // stop once ξ turns back, i.e. past a sonic line
                if i > 0 && (s.xi - last) * dir <= 0.0 {
                    break;
                }
                let e = field.eval(&s.w, &s.z);
                if e.d_w == 0.0 || e.d_z == 0.0 {
                    break;
                }
                nodes.push(ProfileNode { xi: s.xi, w: s.w, z: s.z, dw: e.n_w / e.d_w, dz: e.n_z / e.d_z });
                last = s.xi;
            }
        }
        nodes.sort_by(|a, b| a.xi.total_cmp(&b.xi));
        Ok(Profile { params: *g, nodes, delta, series, terminations: terms })
    }

    pub fn xi_range(&self) -> (f64, f64) {
        (self.nodes[0].xi, self.nodes[self.nodes.len() - 1].xi)
    }

    /// (W, Z) at ξ: the series inside |ξ| <= δ, cubic Hermite outside.
    pub fn eval(&self, xi: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.xi_range();
        if !(xi >= lo && xi <= hi) {
            return Err(Error::OutOfProfileRange { xi, lo, hi });
        }
        if xi.abs() <= self.delta {
            return Ok(self.series.eval(&xi));
        }
        let i = self.nodes.partition_point(|n| n.xi <= xi).clamp(1, self.nodes.len() - 1);
        let (a, b) = (&self.nodes[i - 1], &self.nodes[i]);
        let h = b.xi - a.xi;
        let s = (xi - a.xi) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Ok((
            h00 * a.w + h10 * h * a.dw + h01 * b.w + h11 * h * b.dw,
            h00 * a.z + h10 * h * a.dz + h01 * b.z + h11 * h * b.dz,
        ))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["xi", "W", "Z"])?;
        for n in &self.nodes {
            wtr.write_record([fmt17(n.xi), fmt17(n.w), fmt17(n.z)])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Self-similar variable ξ = ln R - ln(T - t)/r.
pub fn similarity_variable(r: f64, big_t: f64, t: f64, radius: f64) -> f64 {
    radius.ln() - (big_t - t).ln() / r
}

/// Riemann invariants, velocity, sound speed and density at (t, R).
pub fn reconstruct_physical(profile: &Profile, big_t: f64, t: f64, radius: f64) -> Result<PhysicalState> {
    if !(t < big_t) || !(radius > 0.0) {
        return Err(Error::DomainError(format!("need t < T and R > 0, got t={t}, T={big_t}, R={radius}")));
    }
    let r = profile.params.r;
    let xi = similarity_variable(r, big_t, t, radius);
    let (ww, zz) = profile.eval(xi)?;
    let scale = radius / (r * (big_t - t));
    let (w, z) = (scale * ww, scale * zz);
    let u = 0.5 * (w + z);
    let sigma = 0.5 * (w - z);
    let alpha = profile.params.alpha();
    let rho = if sigma > 0.0 { (alpha * sigma).powf(1.0 / alpha) } else { 0.0 };
    Ok(PhysicalState { w, z, u, sigma, rho })
}

/// Relative residual of the Riemann-invariant equations at (t, R), by central
/// differences with relative step `eps`.
///
/// The scale includes `|w|/(T - t)`, the size of each piece of `∂_t w`; near
/// the origin those pieces cancel at linear order and the remaining terms are
/// quadratic in the profile.
pub fn riemann_residual(profile: &Profile, big_t: f64, t: f64, radius: f64, eps: f64) -> Result<f64> {
    let alpha = profile.params.alpha();
    let ht = eps * (big_t - t);
    let hr = eps * radius;
    let c = reconstruct_physical(profile, big_t, t, radius)?;
    let tp = reconstruct_physical(profile, big_t, t + ht, radius)?;
    let tm = reconstruct_physical(profile, big_t, t - ht, radius)?;
    let rp = reconstruct_physical(profile, big_t, t, radius + hr)?;
    let rm = reconstruct_physical(profile, big_t, t, radius - hr)?;
    let mut worst: f64 = 0.0;
    for comp in 0..2 {
        let pick = |s: &PhysicalState| if comp == 0 { s.w } else { s.z };
        let dt = (pick(&tp) - pick(&tm)) / (2.0 * ht);
        let dr = (pick(&rp) - pick(&rm)) / (2.0 * hr);
        let speed = if comp == 0 {
            0.5 * (c.w + c.z) + 0.5 * alpha * (c.w - c.z)
        } else {
            0.5 * (c.w + c.z) - 0.5 * alpha * (c.w - c.z)
        };
        let source = if comp == 0 { 1.0 } else { -1.0 } * alpha / (2.0 * radius) * (c.w * c.w - c.z * c.z);
        let terms = [dt, speed * dr, source];
        let natural = pick(&c).abs() / (big_t - t);
        let scale = terms.iter().map(|x| x.abs()).fold(natural, f64::max).max(1e-300);
        worst = worst.max((terms[0] + terms[1] + terms[2]).abs() / scale);
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhysicalRow {
    pub t: f64,
    pub radius: f64,
    pub xi: f64,
    pub u: f64,
    pub sigma: f64,
    pub rho: f64,
}

/// Physical fields on log-spaced radii for each requested time.
pub fn physical_table(profile: &Profile, big_t: f64, times: &[f64], r_range: (f64, f64), samples: usize) -> Result<Vec<PhysicalRow>> {
    let mut rows = Vec::new();
    let (a, b) = (r_range.0.ln(), r_range.1.ln());
    for &t in times {
        for i in 0..samples {
            let radius = if samples == 1 { r_range.0 } else { (a + (b - a) * i as f64 / (samples - 1) as f64).exp() };
            let s = reconstruct_physical(profile, big_t, t, radius)?;
            let xi = similarity_variable(profile.params.r, big_t, t, radius);
            rows.push(PhysicalRow { t, radius, xi, u: s.u, sigma: s.sigma, rho: s.rho });
        }
    }
    Ok(rows)
}

pub fn write_physical_csv<W: Write>(rows: &[PhysicalRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["t", "R", "xi", "u", "sigma", "rho"])?;
    for r in rows {
        wtr.write_record([fmt17(r.t), fmt17(r.radius), fmt17(r.xi), fmt17(r.u), fmt17(r.sigma), fmt17(r.rho)])?;
    }
    wtr.flush()?;
    Ok(())
}
