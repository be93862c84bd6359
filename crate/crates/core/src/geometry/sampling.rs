use alloc::vec::Vec;
use core::f64::consts::PI;

use super::chart::{Chart, ChartKind};
use crate::rng::StreamRng;

/// Lower margin for sampled `theta` angles: draws lie in `[0.1, pi - 0.1]`.
pub const THETA_MARGIN: f64 = 0.1;

/// Draws `count` states for property checks.
///
/// Darboux coordinates are uniform on `[-2, 2]`. Sasaki–Einstein states have
/// `theta_i` uniform on `[0.1, pi - 0.1]`, `phi_i` on `[-pi, pi)` and `psi`
/// on `[0, 4 pi)`.
pub fn sample_states(chart: &Chart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = StreamRng::new(seed, u64::MAX);
    (0..count)
        .map(|_| match chart.kind() {
            ChartKind::Darboux { .. } => (0..chart.dim()).map(|_| rng.uniform_in(-2.0, 2.0)).collect(),
            ChartKind::SasakiEinstein => {
                let t1 = rng.uniform_in(THETA_MARGIN, PI - THETA_MARGIN);
                let t2 = rng.uniform_in(THETA_MARGIN, PI - THETA_MARGIN);
                let f1 = rng.uniform_in(-PI, PI);
                let f2 = rng.uniform_in(-PI, PI);
                let psi = rng.uniform_in(0.0, 4.0 * PI);
                alloc::vec![t1, t2, f1, f2, psi]
            }
        })
        .collect()
}
