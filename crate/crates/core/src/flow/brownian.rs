use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Brownian increments on a uniform grid, shared by every scheme and
/// refinement level that needs "the same noise".
///
/// Increments are stored step-major: `increment(s)[k]` is `B^k(t_{s+1}) - B^k(t_s)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BrownianPath {
    pub t0: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub noise_dim: usize,
    pub master_seed: u64,
    pub stream_index: u64,
    increments: Vec<f64>,
}

impl BrownianPath {
    /// Samples `N(0, dt)` increments, drawing noise components in order
    /// within each step (see [`crate::rng`] for the generator pipeline).
    pub fn sample(
        t0: f64,
        noise_dim: usize,
        n_steps: usize,
        dt: f64,
        master_seed: u64,
        stream_index: u64,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep { dt });
        }
        let mut rng = StreamRng::new(master_seed, stream_index);
        let scale = libm::sqrt(dt);
        let increments = (0..n_steps * noise_dim)
            .map(|_| scale * rng.standard_normal())
            .collect();
        Ok(BrownianPath {
            t0,
            dt,
            n_steps,
            noise_dim,
            master_seed,
            stream_index,
            increments,
        })
    }

    /// Builds a path from explicit increments (step-major).
    pub fn from_increments(t0: f64, dt: f64, noise_dim: usize, increments: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep { dt });
        }
        let n_steps = if noise_dim == 0 { 0 } else { increments.len() / noise_dim };
        if noise_dim > 0 && !increments.len().is_multiple_of(noise_dim) {
            return Err(Error::DimensionMismatch {
                expected: n_steps * noise_dim,
                found: increments.len(),
            });
        }
        Ok(BrownianPath {
            t0,
            dt,
            n_steps,
            noise_dim,
            master_seed: 0,
            stream_index: 0,
            increments,
        })
    }

    /// A noise-free grid of `n_steps` steps.
    pub fn deterministic(t0: f64, dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep { dt });
        }
        Ok(BrownianPath {
            t0,
            dt,
            n_steps,
            noise_dim: 0,
            master_seed: 0,
            stream_index: 0,
            increments: Vec::new(),
        })
    }

    pub fn increment(&self, step: usize) -> &[f64] {
        &self.increments[step * self.noise_dim..(step + 1) * self.noise_dim]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps)
    }

    pub fn time(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    /// Sums consecutive blocks of `factor` increments: the same sample path
    /// on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.n_steps.is_multiple_of(factor) {
            return Err(Error::IndivisibleFactor {
                n_steps: self.n_steps,
                factor,
            });
        }
        let n = self.n_steps / factor;
        let d = self.noise_dim;
        let mut inc = vec![0.0; n * d];
        for s in 0..n {
            for k in 0..d {
                let mut acc = 0.0;
                for sub in 0..factor {
                    acc += self.increments[(s * factor + sub) * d + k];
                }
                inc[s * d + k] = acc;
            }
        }
        Ok(BrownianPath {
            dt: self.dt * factor as f64,
            n_steps: n,
            increments: inc,
            ..self.clone()
        })
    }

    /// Copy with the listed noise components (0-based) set to zero.
    pub fn with_components_zeroed(&self, components: &[usize]) -> Self {
        let mut out = self.clone();
        for s in 0..self.n_steps {
            for &k in components {
                if k < self.noise_dim {
                    out.increments[s * self.noise_dim + k] = 0.0;
                }
            }
        }
        out
    }

    /// `B^k(t_end) - B^k(t0)`, summed left to right.
    pub fn total(&self, k: usize) -> f64 {
        (0..self.n_steps).map(|s| self.increments[s * self.noise_dim + k]).sum()
    }

    /// `B^k(t_step) - B^k(t0)`.
    pub fn value_at(&self, k: usize, step: usize) -> f64 {
        (0..step).map(|s| self.increments[s * self.noise_dim + k]).sum()
    }
}
