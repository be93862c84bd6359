//! Stratonovich integration of `dx = X_0 dt + sum_k X_k o dB^k`, optionally
//! together with the flow Jacobian and the logarithm of the conformal factor.

mod brownian;
mod integrate;

pub use brownian::BrownianPath;
pub use integrate::{
    drift_diffusion, integrate, integrate_augmented, integrate_final, step, AugmentedState,
    AugmentedTrajectory, Trajectory, MIDPOINT_MAX_ITERATIONS, MIDPOINT_TOLERANCE,
};

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::HamiltonianSystem;

/// A Stratonovich SDE with `d + 1` vector fields on `R^dim`: field `0` is the
/// drift, fields `1..=d` multiply the Brownian increments.
pub trait SdeSystem {
    fn dim(&self) -> usize;
    fn noise_dim(&self) -> usize;

    /// Writes field `i` into `out[i * dim..(i + 1) * dim]`.
    fn eval_fields(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Writes `d X_i / d x` row-major into `out[i * dim^2..(i + 1) * dim^2]`.
    fn eval_jacobians(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Rates whose Stratonovich integral is `-log(lambda)`; for contact
    /// systems these are the Reeb derivatives `iota_R dH_i`.
    fn eval_reeb_rates(&self, _x: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
}

impl SdeSystem for HamiltonianSystem {
    fn dim(&self) -> usize {
        HamiltonianSystem::dim(self)
    }

    fn noise_dim(&self) -> usize {
        HamiltonianSystem::noise_dim(self)
    }

    fn eval_fields(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.eval_fields_into(x, out)
    }

    fn eval_jacobians(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.eval_jacobians_into(x, out)
    }

    fn eval_reeb_rates(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.eval_reeb_rates_into(x, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Scheme {
    /// Predictor–corrector (Heun); trapezoidal in state.
    #[cfg_attr(feature = "serde", serde(rename = "heun"))]
    EulerHeun,
    /// Implicit midpoint solved by fixed-point iteration.
    #[cfg_attr(feature = "serde", serde(rename = "midpoint"))]
    StratonovichMidpoint,
}

impl Scheme {
    pub fn id(self) -> &'static str {
        match self {
            Scheme::EulerHeun => "heun",
            Scheme::StratonovichMidpoint => "midpoint",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heun" => Ok(Scheme::EulerHeun),
            "midpoint" => Ok(Scheme::StratonovichMidpoint),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown scheme `{other}` (expected heun or midpoint)"
            ))),
        }
    }
}

/// Number of steps of size `dt` from `t0` to `t_end`; `dt` must divide the
/// interval to within `1e-12` (relative to the interval length when it
/// exceeds one).
pub fn steps_between(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidStep { dt });
    }
    let span = t_end - t0;
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "final time {t_end} must exceed initial time {t0}"
        )));
    }
    let n = libm::round(span / dt);
    if libm::fabs(n * dt - span) > 1e-12 * span.max(1.0) || n < 1.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "dt = {dt} does not divide T - t0 = {span}"
        )));
    }
    Ok(n as usize)
}
