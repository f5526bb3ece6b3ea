//! Branch-and-bound sign certification with interval enclosures.
//!
//! Boxes are processed depth first, left child first, so the leaf list of a
//! certificate is canonical. Leaves always tile the input box: when a negative
//! box stops the search early, the unvisited remainder is recorded as
//! `Pending` leaves.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::barriers::{asymptotic_p_nr, crossing_poly_from, BarrierRef, ImplicitBarrier};
use crate::error::{Error, Result};
use crate::euler::{Gamma, GasParams};
use crate::interval::{Interval, IntervalBox};
use crate::taylor::ProfileSeries;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_BUDGET: usize = 10_000_000;
pub const DEFAULT_T_MIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Proved,
    Disproved,
    Inconclusive,
}

impl Verdict {
    /// Associative merge: Disproved dominates, then Inconclusive.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Disproved, _) | (_, Disproved) => Disproved,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Proved,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeafStatus {
    Positive,
    Negative,
    /// Width fell below the tolerance without a definite sign.
    Undetermined,
    /// Not visited because the search stopped at a negative box.
    Pending,
}

impl LeafStatus {
    fn of(enc: &Interval) -> Option<LeafStatus> {
        if enc.is_positive() {
            Some(LeafStatus::Positive)
        } else if enc.is_negative() {
            Some(LeafStatus::Negative)
        } else {
            None
        }
    }

    fn verdict(self) -> Verdict {
        match self {
            LeafStatus::Positive => Verdict::Proved,
            LeafStatus::Negative => Verdict::Disproved,
            _ => Verdict::Inconclusive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    #[serde(rename = "box")]
    pub bbox: IntervalBox,
    pub enclosure: Interval,
    pub status: LeafStatus,
}

/// What a crossing certificate was computed for; enough to rebuild the
/// interval function on re-check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrossingSpec {
    Parametric {
        label: String,
        gamma: String,
        r: f64,
        w_coeffs: Vec<f64>,
        z_coeffs: Vec<f64>,
        claimed_sign: f64,
    },
    Implicit {
        gamma: String,
        r: f64,
        f0: f64,
        f1: f64,
        anchor: [f64; 2],
        first_order: [f64; 2],
        orientation: f64,
        claimed_sign: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub condition_id: String,
    #[serde(rename = "box")]
    pub domain: IntervalBox,
    pub tolerance: f64,
    pub leaf_count: usize,
    pub max_depth_reached: usize,
    pub witness: Option<Leaf>,
    pub leaves: Option<Vec<Leaf>>,
    pub crossing: Option<CrossingSpec>,
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub tol: f64,
    pub budget: usize,
    pub record_leaves: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { tol: DEFAULT_TOL, budget: DEFAULT_BUDGET, record_leaves: true }
    }
}

/// Proves `f > 0` on `domain` by bisection, or finds a box where `f < 0`.
pub fn prove_positive<F>(f: F, domain: &IntervalBox, condition_id: &str, opts: &CertifyOptions) -> Result<Certificate>
where
    F: Fn(&IntervalBox) -> Result<Interval>,
{
    let mut stack = vec![(domain.clone(), 0usize)];
    let mut leaves = Vec::new();
    let mut leaf_count = 0usize;
    let mut evaluations = 0usize;
    let mut max_depth = 0usize;
    let mut verdict = Verdict::Proved;
    let mut witness = None;

    while let Some((b, depth)) = stack.pop() {
        evaluations += 1;
        if evaluations > opts.budget {
            return Err(Error::BudgetExhausted { budget: opts.budget, condition: condition_id.to_string() });
        }
        max_depth = max_depth.max(depth);
        let enc = f(&b)?;
        let status = match LeafStatus::of(&enc) {
            Some(s) => s,
            None if b.width() < opts.tol => LeafStatus::Undetermined,
            None => match b.split() {
                Ok((l, r)) => {
                    stack.push((r, depth + 1));
                    stack.push((l, depth + 1));
                    continue;
                }
                Err(_) => LeafStatus::Undetermined,
            },
        };
        let leaf = Leaf { bbox: b, enclosure: enc, status };
        verdict = verdict.combine(status.verdict());
        leaf_count += 1;
        if status == LeafStatus::Negative {
            witness = Some(leaf.clone());
        }
        if opts.record_leaves {
            leaves.push(leaf);
        }
        if status == LeafStatus::Negative {
            break;
        }
    }
    // remaining boxes, in the order they would have been visited
    while let Some((b, _)) = stack.pop() {
        leaf_count += 1;
        if opts.record_leaves {
            let enc = f(&b)?;
            leaves.push(Leaf { bbox: b, enclosure: enc, status: LeafStatus::Pending });
        }
    }
    Ok(Certificate {
        verdict,
        condition_id: condition_id.to_string(),
        domain: domain.clone(),
        tolerance: opts.tol,
        leaf_count,
        max_depth_reached: max_depth,
        witness,
        leaves: opts.record_leaves.then_some(leaves),
        crossing: None,
    })
}

fn crossing_spec(target: &BarrierRef<'_>, claimed_sign: f64) -> CrossingSpec {
    match target {
        BarrierRef::Param(b) => CrossingSpec::Parametric {
            label: b.label.name(),
            gamma: b.params.gamma.to_string(),
            r: b.params.r,
            w_coeffs: b.w_poly.clone(),
            z_coeffs: b.z_poly.clone(),
            claimed_sign,
        },
        BarrierRef::Implicit(b) => CrossingSpec::Implicit {
            gamma: b.params.gamma.to_string(),
            r: b.params.r,
            f0: b.f0,
            f1: b.f1,
            anchor: [b.anchor.0, b.anchor.1],
            first_order: [b.first_order.0, b.first_order.1],
            orientation: b.orientation,
            claimed_sign,
        },
    }
}

impl CrossingSpec {
    fn claimed_sign(&self) -> f64 {
        match self {
            CrossingSpec::Parametric { claimed_sign, .. } | CrossingSpec::Implicit { claimed_sign, .. } => *claimed_sign,
        }
    }

    fn condition_id(&self, range: &Interval) -> String {
        let (label, gamma, r) = match self {
            CrossingSpec::Parametric { label, gamma, r, .. } => (label.as_str(), gamma, r),
            CrossingSpec::Implicit { gamma, r, .. } => ("B_fr", gamma, r),
        };
        let sign = if self.claimed_sign() > 0.0 { "+" } else { "-" };
        format!("{sign}P[{label}] > 0 on [{:e}, {:e}], gamma={gamma}, r={r}", range.lo(), range.hi())
    }

    /// `claimed_sign · P` as a polynomial in the barrier parameter.
    fn signed_poly(&self) -> Result<crate::poly::Poly<Interval>> {
        let p = match self {
            CrossingSpec::Parametric { gamma, r, w_coeffs, z_coeffs, .. } => {
                let g = GasParams::new(gamma.parse::<Gamma>()?, *r);
                crossing_poly_from(w_coeffs, z_coeffs, &g)?
            }
            CrossingSpec::Implicit { gamma, r, f0, f1, anchor, first_order, orientation, .. } => {
                let g = GasParams::new(gamma.parse::<Gamma>()?, *r);
                ImplicitBarrier {
                    f0: *f0,
                    f1: *f1,
                    anchor: (anchor[0], anchor[1]),
                    first_order: (first_order[0], first_order[1]),
                    orientation: *orientation,
                    tau_max: 1.0,
                    params: g,
                }
                .crossing_poly()?
            }
        };
        let s = self.claimed_sign();
        if s != 1.0 && s != -1.0 {
            return Err(Error::Certificate(format!("claimed sign must be +1 or -1, got {s}")));
        }
        Ok(p.map(|c| *c * Interval::point(s)))
    }
}

/// Certifies `claimed_sign · P(t) > 0` for `t` in `t_range`.
///
/// For the implicit barrier the certified quantity is `(1-τ)^5 P^fr(τ)`, which
/// has the same sign on `[0, 1)`.
pub fn certify_crossing(
    target: BarrierRef<'_>,
    t_range: Interval,
    claimed_sign: f64,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let spec = crossing_spec(&target, claimed_sign);
    let p = spec.signed_poly()?;
    let id = spec.condition_id(&t_range);
    let domain = IntervalBox::from_interval(t_range);
    let mut cert = prove_positive(|b| Ok(p.enclose(b.dims[0])), &domain, &id, opts)?;
    cert.crossing = Some(spec);
    Ok(cert)
}

pub fn certificate_export(c: &Certificate, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(c)?)?;
    Ok(())
}

pub fn certificate_import(path: &Path) -> Result<Certificate> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn volume(b: &IntervalBox) -> f64 {
    b.dims.iter().map(|d| d.width()).product()
}

/// Checks that the leaves cover `domain` without overlapping beyond `slack`.
pub fn check_partition(domain: &IntervalBox, leaves: &[Leaf], slack: f64) -> Result<()> {
    let d = domain.dim();
    for l in leaves {
        if l.bbox.dim() != d {
            return Err(Error::Certificate("leaf dimension mismatch".into()));
        }
        for (a, b) in l.bbox.dims.iter().zip(&domain.dims) {
            if a.lo() < b.lo() - slack || a.hi() > b.hi() + slack {
                return Err(Error::Certificate("leaf outside the certified box".into()));
            }
        }
    }
    if d == 1 {
        let mut iv: Vec<Interval> = leaves.iter().map(|l| l.bbox.dims[0]).collect();
        iv.sort_by(|a, b| a.lo().total_cmp(&b.lo()));
        let dom = domain.dims[0];
        let mut reach = dom.lo();
        if iv.first().is_none_or(|a| a.lo() > reach + slack) {
            return Err(Error::Certificate("leaves do not start at the box edge".into()));
        }
        for a in &iv {
            if a.lo() > reach + slack {
                return Err(Error::Certificate(format!("gap in leaf cover at {:e}", reach)));
            }
            if a.lo() < reach - slack {
                return Err(Error::Certificate(format!("overlapping leaves at {:e}", a.lo())));
            }
            reach = a.hi();
        }
        if reach < dom.hi() - slack {
            return Err(Error::Certificate("leaves stop short of the box edge".into()));
        }
        return Ok(());
    }
    let total: f64 = leaves.iter().map(|l| volume(&l.bbox)).sum();
    let v = volume(domain);
    if (total - v).abs() > 1e-9 * v + slack {
        return Err(Error::Certificate(format!("leaf volume {total:e} differs from box volume {v:e}")));
    }
    Ok(())
}

/// Re-evaluates every leaf of a crossing certificate and returns the verdict
/// the fresh enclosures support. Errors if it differs from the stored one.
pub fn recheck(c: &Certificate) -> Result<Verdict> {
    let spec = c.crossing.as_ref().ok_or_else(|| Error::Certificate("no crossing description".into()))?;
    let leaves = c.leaves.as_ref().ok_or_else(|| Error::Certificate("no leaves recorded".into()))?;
    if leaves.len() != c.leaf_count {
        return Err(Error::Certificate("leaf count mismatch".into()));
    }
    let slack = 1e-12 * c.domain.width().max(1.0);
    check_partition(&c.domain, leaves, slack)?;
    let p = spec.signed_poly()?;
    let mut verdict = Verdict::Proved;
    for l in leaves {
        let fresh = p.enclose(l.bbox.dims[0]);
        let v = match (l.status, LeafStatus::of(&fresh)) {
            (LeafStatus::Pending, _) | (LeafStatus::Undetermined, _) => Verdict::Inconclusive,
            (s, Some(f)) if s == f => s.verdict(),
            (s, _) => {
                return Err(Error::Certificate(format!(
                    "leaf {:?} stored as {s:?} re-evaluates to {fresh:?}",
                    l.bbox.dims[0]
                )))
            }
        };
        verdict = verdict.combine(v);
    }
    if verdict != c.verdict {
        return Err(Error::Certificate(format!("stored verdict {:?}, re-check gives {verdict:?}", c.verdict)));
    }
    Ok(verdict)
}

/// Sign of the two-term asymptotic of a b_nr crossing on the excluded segment (0, t_min].
#[derive(Clone, Debug, Serialize)]
pub struct NearFieldReport {
    pub t_min: f64,
    pub samples: usize,
    pub asymptotic_sign: f64,
    pub single_signed: bool,
}

pub fn near_field_report(series: &ProfileSeries, n: usize, beta: f64, t_min: f64) -> NearFieldReport {
    let samples = 64;
    let vals: Vec<f64> = (0..samples)
        .map(|i| {
            let t = t_min * 10f64.powf(-6.0 * i as f64 / (samples - 1) as f64);
            asymptotic_p_nr(n, beta, series, t)
        })
        .collect();
    let s = vals[0].signum();
    NearFieldReport { t_min, samples, asymptotic_sign: s, single_signed: vals.iter().all(|v| v.signum() == s) }
}
