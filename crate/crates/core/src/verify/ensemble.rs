use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{Expr, Tape};
use crate::flow::{integrate_final, steps_between, BrownianPath, Scheme};
use crate::geometry::HamiltonianSystem;

/// Shared settings of an ensemble; stream `i` drives path `i`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleSpec {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub scheme: Scheme,
    /// Noise components (0-based) whose increments are replaced by zero.
    #[cfg_attr(feature = "serde", serde(default))]
    pub zeroed_components: Vec<usize>,
}

impl EnsembleSpec {
    pub fn path(&self, noise_dim: usize, stream: u64) -> Result<BrownianPath> {
        let n = steps_between(self.t0, self.t_end, self.dt)?;
        let p = BrownianPath::sample(self.t0, noise_dim, n, self.dt, self.master_seed, stream)?;
        Ok(if self.zeroed_components.is_empty() {
            p
        } else {
            p.with_components_zeroed(&self.zeroed_components)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleStats {
    pub n_paths: usize,
    pub observable: String,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `sqrt(variance / n_paths)`, the standard error of the mean.
    pub standard_error: f64,
    /// Standard error of the sample variance, from the fourth central moment.
    pub variance_standard_error: f64,
}

impl EnsembleStats {
    /// Samples are reduced in the given order, so results depend only on
    /// the ordering of the slice.
    pub fn from_samples(observable: String, samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 paths, got {n}")));
        }
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let mut m2 = 0.0;
        let mut m4 = 0.0;
        for &s in samples {
            let d = s - mean;
            let d2 = d * d;
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = m2 / (nf - 1.0);
        let m4 = m4 / nf;
        let var_of_var = (m4 - variance * variance * (nf - 3.0) / (nf - 1.0)) / nf;
        Ok(EnsembleStats {
            n_paths: n,
            observable,
            mean,
            variance,
            standard_error: libm::sqrt(variance / nf),
            variance_standard_error: libm::sqrt(var_of_var.max(0.0)),
        })
    }
}

/// Observable at the final state of stream `stream`.
pub fn sample_observable(
    sys: &HamiltonianSystem,
    x0: &[f64],
    spec: &EnsembleSpec,
    observable: &Tape,
    stream: u64,
) -> Result<f64> {
    let path = spec.path(sys.noise_dim(), stream)?;
    let x = integrate_final(sys, x0, &path, spec.scheme)?;
    sys.eval_tape(observable, &x)
}

/// Sequential ensemble over streams `0..n_paths`.
pub fn monte_carlo(
    sys: &HamiltonianSystem,
    x0: &[f64],
    spec: &EnsembleSpec,
    observable: &Expr,
) -> Result<EnsembleStats> {
    if spec.n_paths < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 paths, got {}", spec.n_paths)));
    }
    let tape = sys.compile_expr(observable)?;
    let samples = (0..spec.n_paths as u64)
        .map(|s| sample_observable(sys, x0, spec, &tape, s))
        .collect::<Result<Vec<_>>>()?;
    EnsembleStats::from_samples(format!("{observable}"), &samples)
}
