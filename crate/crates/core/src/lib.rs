//! Self-similar imploding profiles of the isentropic Euler equations in the
//! (W, Z) phase plane: field and sonic-point data, Taylor series at P_s,
//! barrier curves with interval certification, and shooting in r.

pub mod barriers;
pub mod certify;
pub mod error;
pub mod euler;
pub mod interval;
pub mod poly;
pub mod profile;
pub mod scalar;
pub mod shooting;
pub mod taylor;

pub use barriers::{BarrierRef, ImplicitBarrier, ParamBarrier, Side};
pub use certify::{Certificate, CertifyOptions, Verdict};
pub use error::{Error, Result};
pub use euler::{Gamma, GasParams, PhasePoint, SonicData};
pub use interval::{Interval, IntervalBox, IntervalError};
pub use poly::Poly;
pub use profile::{PhysicalState, Profile};
pub use scalar::{BigReal, Real};
pub use shooting::{ShootReport, Termination, Trajectory};
pub use taylor::ProfileSeries;
