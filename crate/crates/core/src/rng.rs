//! Deterministic random streams.
//!
//! Pipeline, identical on every platform:
//!
//! 1. `seed = splitmix64_mix(master_seed + stream_index * 0x9E3779B97F4A7C15)`
//! 2. `Xoshiro256PlusPlus::seed_from_u64(seed)` (state expanded by SplitMix64)
//! 3. uniforms on `[0, 1)` from the top 53 bits of each `u64`
//! 4. standard normals by the polar Box–Muller method: each attempt draws two
//!    uniforms `u, v`, maps them to `[-1, 1)`, and is accepted when
//!    `0 < s = u^2 + v^2 < 1`; an accepted attempt yields the pair
//!    `u * f, v * f` with `f = sqrt(-2 ln s / s)`, returned in that order.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer.
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Normal and uniform variates for one `(master_seed, stream_index)` pair.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl StreamRng {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let seed = splitmix64_mix(master_seed.wrapping_add(stream_index.wrapping_mul(GOLDEN_GAMMA)));
        StreamRng {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = libm::sqrt(-2.0 * libm::log(s) / s);
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}
