use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::{integrate_augmented, integrate_final, BrownianPath, Scheme};
use crate::geometry::HamiltonianSystem;

use super::defect::contact_defect;

/// What "error" means at one refinement level.
pub enum ErrorMeasure<'a> {
    /// `|x_T - x_T^finest|_inf` against the finest grid of the same path.
    /// The finest level serves as reference only and gets no entry.
    FinestReference,
    /// Maximum contact-defect sup norm over the grid.
    ContactDefect,
    /// `|x_T - exact(path)|_inf` with an exact terminal value per path.
    Exact(&'a dyn Fn(&BrownianPath) -> Vec<f64>),
}

/// Errors per step size, coarsest first, averaged over the supplied paths.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log2(errors[i] / errors[i + 1])`.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Runs level `k` on `path.coarsen(2^k)` for `k = 0..levels`.
pub fn convergence_study(
    sys: &HamiltonianSystem,
    x0: &[f64],
    finest_paths: &[BrownianPath],
    scheme: Scheme,
    levels: usize,
    measure: ErrorMeasure<'_>,
) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 levels, got {levels}")));
    }
    if finest_paths.is_empty() {
        return Err(Error::InvalidArgument("no Brownian paths supplied".into()));
    }
    let first_level = match measure {
        ErrorMeasure::FinestReference => 1,
        _ => 0,
    };
    let mut sums = alloc::vec![0.0; levels - first_level];
    for path in finest_paths {
        let coarse: Vec<BrownianPath> = (0..levels)
            .map(|k| path.coarsen(1 << k))
            .collect::<Result<_>>()?;
        let reference = match measure {
            ErrorMeasure::FinestReference => Some(integrate_final(sys, x0, path, scheme)?),
            ErrorMeasure::Exact(f) => Some(f(path)),
            ErrorMeasure::ContactDefect => None,
        };
        for k in first_level..levels {
            let err = match &reference {
                Some(r) => sup_distance(&integrate_final(sys, x0, &coarse[k], scheme)?, r),
                None => {
                    let traj = integrate_augmented(sys, x0, &coarse[k], scheme)?;
                    contact_defect(&traj, sys.chart())?.max
                }
            };
            sums[k - first_level] += err;
        }
    }
    let n = finest_paths.len() as f64;
    // coarsest first
    let mut dts = Vec::new();
    let mut errors = Vec::new();
    for k in (first_level..levels).rev() {
        dts.push(finest_paths[0].dt * (1u64 << k) as f64);
        errors.push(sums[k - first_level] / n);
    }
    let orders = errors.windows(2).map(|w| libm::log2(w[0] / w[1])).collect();
    Ok(ConvergenceReport { dts, errors, orders })
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).fold(0.0, f64::max)
}
