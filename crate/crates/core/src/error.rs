use thiserror::Error;

use crate::interval::IntervalError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid adiabatic exponent: {0}")]
    InvalidGamma(String),
    #[error("{0}")]
    DomainError(String),
    #[error("no sonic point for gamma={gamma}, r={r}")]
    NoSonicPoint { gamma: String, r: f64 },
    #[error("no nullcline intersection with W > Z for gamma={gamma}, r={r}")]
    NoIntersection { gamma: String, r: f64 },
    #[error("complex eigenvalues at the sonic point (discriminant {disc:e})")]
    ComplexEigenvalues { disc: f64 },
    #[error("k = {kk} is not attained on (1, r*)")]
    NotBracketed { kk: f64 },
    #[error("order {n} exceeds series order {order}")]
    OrderExceeded { n: usize, order: usize },
    #[error("neither first-order root aligns with nu_minus (sin angle {angle:e})")]
    BranchAmbiguity { angle: f64 },
    #[error("resonance at n={n}: |n - k| = {gap:e} with k = {k}")]
    ResonanceSingular { n: usize, k: f64, gap: f64 },
    #[error("coefficient overflow at n={n} (|Z_n| = {value:e}); rerun with multiprecision")]
    CoefficientOverflow { n: usize, value: f64 },
    #[error("degenerate endpoint system for b_fl")]
    DegenerateEndpoint,
    #[error("W1 + Z1 = {0:e} is too small to build B_fr")]
    TangentDegenerate(f64),
    #[error("no sign change of {what} on [{lo}, {hi}]")]
    NoCrossing { what: String, lo: f64, hi: f64 },
    #[error("no intersection of {0} within the domain")]
    NoBarrierIntersection(String),
    #[error("xi = {xi} is outside the sampled profile [{lo}, {hi}]")]
    OutOfProfileRange { xi: f64, lo: f64, hi: f64 },
    #[error("neither nu_minus orientation moves off the origin at first order")]
    AmbiguousOrientation,
    #[error("step size underflow at psi = {psi}")]
    StepSizeUnderflow { psi: f64 },
    #[error("dichotomy failed: both ends classify as {0}")]
    DichotomyFailed(String),
    #[error("unexpected classification {0} during bisection")]
    UnexpectedClassification(String),
    #[error("leaf budget of {budget} exhausted before a verdict ({condition})")]
    BudgetExhausted { budget: usize, condition: String },
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("certificate check failed: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
