use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{BrownianPath, Scheme, SdeSystem};
use crate::error::{Error, Result};

pub const MIDPOINT_TOLERANCE: f64 = 1e-13;
pub const MIDPOINT_MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `log(lambda_t)`, integrated with the same quadrature as the state.
    pub log_lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub x: Vec<f64>,
    /// `d x_t / d x_0`.
    pub jacobian: DMatrix<f64>,
    pub log_lambda: f64,
}

impl AugmentedState {
    pub fn lambda(&self) -> f64 {
        libm::exp(self.log_lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<AugmentedState>,
}

impl AugmentedTrajectory {
    pub fn last(&self) -> &AugmentedState {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Drift `X_0(x)` and diffusion columns `X_1(x)..X_d(x)`.
pub fn drift_diffusion<S: SdeSystem + ?Sized>(sys: &S, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let dim = sys.dim();
    let mut buf = vec![0.0; (sys.noise_dim() + 1) * dim];
    sys.eval_fields(x, &mut buf)?;
    let mut chunks = buf.chunks(dim).map(<[f64]>::to_vec);
    let drift = chunks.next().unwrap_or_default();
    Ok((drift, chunks.collect()))
}

/// Per-step scratch buffers sized for one system.
struct Work {
    dim: usize,
    d: usize,
    fields: Vec<f64>,
    fields2: Vec<f64>,
    jac: Vec<f64>,
    jac2: Vec<f64>,
    rates: Vec<f64>,
    rates2: Vec<f64>,
    inc: Vec<f64>,
    inc2: Vec<f64>,
    xt: Vec<f64>,
}

impl Work {
    fn new<S: SdeSystem + ?Sized>(sys: &S) -> Self {
        let dim = sys.dim();
        let d = sys.noise_dim();
        Work {
            dim,
            d,
            fields: vec![0.0; (d + 1) * dim],
            fields2: vec![0.0; (d + 1) * dim],
            jac: vec![0.0; (d + 1) * dim * dim],
            jac2: vec![0.0; (d + 1) * dim * dim],
            rates: vec![0.0; d + 1],
            rates2: vec![0.0; d + 1],
            inc: vec![0.0; dim],
            inc2: vec![0.0; dim],
            xt: vec![0.0; dim],
        }
    }
}

/// `a dt + sum_k b_k dW_k`.
fn combine(fields: &[f64], dim: usize, dw: &[f64], dt: f64, out: &mut [f64]) {
    for c in 0..dim {
        let mut acc = fields[c] * dt;
        for (k, w) in dw.iter().enumerate() {
            acc += fields[(k + 1) * dim + c] * w;
        }
        out[c] = acc;
    }
}

fn combine_scalar(rates: &[f64], dw: &[f64], dt: f64) -> f64 {
    let mut acc = rates[0] * dt;
    for (k, w) in dw.iter().enumerate() {
        acc += rates[k + 1] * w;
    }
    acc
}

/// `DA dt + sum_k DB_k dW_k`.
fn combine_jacobian(jac: &[f64], dim: usize, dw: &[f64], dt: f64) -> DMatrix<f64> {
    let block = dim * dim;
    DMatrix::from_fn(dim, dim, |r, c| {
        let idx = r * dim + c;
        let mut acc = jac[idx] * dt;
        for (k, w) in dw.iter().enumerate() {
            acc += jac[(k + 1) * block + idx] * w;
        }
        acc
    })
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, a| m.max(a.abs()))
}

/// Solves `x' = x + inc((x + x') / 2)` by fixed-point iteration, starting
/// from the Euler predictor. Leaves the converged midpoint in `w.xt`.
fn midpoint_solve<S: SdeSystem + ?Sized>(
    sys: &S,
    x: &[f64],
    dw: &[f64],
    dt: f64,
    w: &mut Work,
) -> Result<Vec<f64>> {
    let dim = w.dim;
    sys.eval_fields(x, &mut w.fields)?;
    combine(&w.fields, dim, dw, dt, &mut w.inc);
    let mut next: Vec<f64> = x.iter().zip(&w.inc).map(|(a, b)| a + b).collect();
    let mut residual = f64::INFINITY;
    for _ in 0..MIDPOINT_MAX_ITERATIONS {
        for c in 0..dim {
            w.xt[c] = 0.5 * (x[c] + next[c]);
        }
        sys.eval_fields(&w.xt, &mut w.fields)?;
        combine(&w.fields, dim, dw, dt, &mut w.inc);
        residual = 0.0;
        for c in 0..dim {
            let v = x[c] + w.inc[c];
            residual = residual.max((v - next[c]).abs());
            next[c] = v;
        }
        if !residual.is_finite() {
            break;
        }
        if residual <= MIDPOINT_TOLERANCE * sup_norm(&next).max(1.0) {
            for c in 0..dim {
                w.xt[c] = 0.5 * (x[c] + next[c]);
            }
            return Ok(next);
        }
    }
    Err(Error::MidpointDivergence {
        iterations: MIDPOINT_MAX_ITERATIONS,
        residual,
    })
}

/// One step of the chosen scheme; returns the new state and the increment
/// of `log(lambda)`.
fn step_with_lambda<S: SdeSystem + ?Sized>(
    sys: &S,
    x: &[f64],
    dw: &[f64],
    dt: f64,
    scheme: Scheme,
    w: &mut Work,
) -> Result<(Vec<f64>, f64)> {
    let dim = w.dim;
    match scheme {
        Scheme::EulerHeun => {
            sys.eval_fields(x, &mut w.fields)?;
            sys.eval_reeb_rates(x, &mut w.rates)?;
            combine(&w.fields, dim, dw, dt, &mut w.inc);
            for c in 0..dim {
                w.xt[c] = x[c] + w.inc[c];
            }
            sys.eval_fields(&w.xt, &mut w.fields2)?;
            sys.eval_reeb_rates(&w.xt, &mut w.rates2)?;
            combine(&w.fields2, dim, dw, dt, &mut w.inc2);
            let next = (0..dim).map(|c| x[c] + 0.5 * (w.inc[c] + w.inc2[c])).collect();
            let dl = -0.5 * (combine_scalar(&w.rates, dw, dt) + combine_scalar(&w.rates2, dw, dt));
            Ok((next, dl))
        }
        Scheme::StratonovichMidpoint => {
            let next = midpoint_solve(sys, x, dw, dt, w)?;
            sys.eval_reeb_rates(&w.xt, &mut w.rates)?;
            Ok((next, -combine_scalar(&w.rates, dw, dt)))
        }
    }
}

fn check_inputs<S: SdeSystem + ?Sized>(sys: &S, x0: &[f64], path: &BrownianPath) -> Result<()> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: x0.len(),
        });
    }
    if path.noise_dim != sys.noise_dim() && path.n_steps > 0 {
        return Err(Error::DimensionMismatch {
            expected: sys.noise_dim(),
            found: path.noise_dim,
        });
    }
    Ok(())
}

/// Zero increments of the system's width, for deterministic grids.
fn increment_for<'a>(path: &'a BrownianPath, zeros: &'a [f64], s: usize) -> &'a [f64] {
    if path.noise_dim == 0 {
        zeros
    } else {
        path.increment(s)
    }
}

/// One step from `x` with increments `dw` (length `d`).
pub fn step<S: SdeSystem + ?Sized>(
    sys: &S,
    x: &[f64],
    dw: &[f64],
    dt: f64,
    scheme: Scheme,
) -> Result<Vec<f64>> {
    if dw.len() != sys.noise_dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.noise_dim(),
            found: dw.len(),
        });
    }
    let mut w = Work::new(sys);
    Ok(step_with_lambda(sys, x, dw, dt, scheme, &mut w)?.0)
}

/// Integrates over the whole grid of `path`, recording every state.
pub fn integrate<S: SdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    path: &BrownianPath,
    scheme: Scheme,
) -> Result<Trajectory> {
    check_inputs(sys, x0, path)?;
    let mut w = Work::new(sys);
    let zeros = vec![0.0; w.d];
    let mut traj = Trajectory {
        times: Vec::with_capacity(path.n_steps + 1),
        states: Vec::with_capacity(path.n_steps + 1),
        log_lambda: Vec::with_capacity(path.n_steps + 1),
    };
    traj.times.push(path.t0);
    traj.states.push(x0.to_vec());
    traj.log_lambda.push(0.0);
    let mut x = x0.to_vec();
    let mut ll = 0.0;
    for s in 0..path.n_steps {
        let dw = increment_for(path, &zeros, s);
        let (next, dl) = step_with_lambda(sys, &x, dw, path.dt, scheme, &mut w)?;
        x = next;
        ll += dl;
        traj.times.push(path.time(s + 1));
        traj.states.push(x.clone());
        traj.log_lambda.push(ll);
    }
    Ok(traj)
}

/// Final state only.
pub fn integrate_final<S: SdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    path: &BrownianPath,
    scheme: Scheme,
) -> Result<Vec<f64>> {
    check_inputs(sys, x0, path)?;
    let mut w = Work::new(sys);
    let zeros = vec![0.0; w.d];
    let mut x = x0.to_vec();
    for s in 0..path.n_steps {
        let dw = increment_for(path, &zeros, s);
        x = step_with_lambda(sys, &x, dw, path.dt, scheme, &mut w)?.0;
    }
    Ok(x)
}

/// Co-integrates state, flow Jacobian and `log(lambda)` with the same
/// increments and scheme.
///
/// For both schemes the Jacobian update is the exact derivative of the
/// discrete state map, so it agrees with finite differences of
/// [`integrate_final`] up to the differencing error.
pub fn integrate_augmented<S: SdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    path: &BrownianPath,
    scheme: Scheme,
) -> Result<AugmentedTrajectory> {
    check_inputs(sys, x0, path)?;
    let mut w = Work::new(sys);
    let dim = w.dim;
    let zeros = vec![0.0; w.d];
    let mut traj = AugmentedTrajectory {
        times: Vec::with_capacity(path.n_steps + 1),
        states: Vec::with_capacity(path.n_steps + 1),
    };
    let mut cur = AugmentedState {
        x: x0.to_vec(),
        jacobian: DMatrix::identity(dim, dim),
        log_lambda: 0.0,
    };
    traj.times.push(path.t0);
    traj.states.push(cur.clone());
    for s in 0..path.n_steps {
        let dw = increment_for(path, &zeros, s);
        cur = augmented_step(sys, &cur, dw, path.dt, scheme, &mut w)?;
        traj.times.push(path.time(s + 1));
        traj.states.push(cur.clone());
    }
    Ok(traj)
}

fn augmented_step<S: SdeSystem + ?Sized>(
    sys: &S,
    cur: &AugmentedState,
    dw: &[f64],
    dt: f64,
    scheme: Scheme,
    w: &mut Work,
) -> Result<AugmentedState> {
    let dim = w.dim;
    let x = &cur.x;
    match scheme {
        Scheme::EulerHeun => {
            sys.eval_fields(x, &mut w.fields)?;
            sys.eval_jacobians(x, &mut w.jac)?;
            sys.eval_reeb_rates(x, &mut w.rates)?;
            combine(&w.fields, dim, dw, dt, &mut w.inc);
            let m1 = combine_jacobian(&w.jac, dim, dw, dt);
            for c in 0..dim {
                w.xt[c] = x[c] + w.inc[c];
            }
            let k1 = &m1 * &cur.jacobian;
            let j_pred = &cur.jacobian + &k1;

            sys.eval_fields(&w.xt, &mut w.fields2)?;
            sys.eval_jacobians(&w.xt, &mut w.jac2)?;
            sys.eval_reeb_rates(&w.xt, &mut w.rates2)?;
            combine(&w.fields2, dim, dw, dt, &mut w.inc2);
            let m2 = combine_jacobian(&w.jac2, dim, dw, dt);
            let k2 = &m2 * &j_pred;

            let next = (0..dim).map(|c| x[c] + 0.5 * (w.inc[c] + w.inc2[c])).collect();
            let jacobian = &cur.jacobian + (k1 + k2) * 0.5;
            let dl = -0.5 * (combine_scalar(&w.rates, dw, dt) + combine_scalar(&w.rates2, dw, dt));
            Ok(AugmentedState {
                x: next,
                jacobian,
                log_lambda: cur.log_lambda + dl,
            })
        }
        Scheme::StratonovichMidpoint => {
            let next = midpoint_solve(sys, x, dw, dt, w)?;
            sys.eval_jacobians(&w.xt, &mut w.jac)?;
            sys.eval_reeb_rates(&w.xt, &mut w.rates)?;
            let half = combine_jacobian(&w.jac, dim, dw, dt) * 0.5;
            let id = DMatrix::<f64>::identity(dim, dim);
            let lhs = &id - &half;
            let rhs = (&id + &half) * &cur.jacobian;
            let jacobian = lhs.lu().solve(&rhs).ok_or(Error::MidpointDivergence {
                iterations: 0,
                residual: f64::NAN,
            })?;
            Ok(AugmentedState {
                x: next,
                jacobian,
                log_lambda: cur.log_lambda - combine_scalar(&w.rates, dw, dt),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `dx = A x dt + c x o dB` on R^2.
    struct Linear {
        a: [[f64; 2]; 2],
        c: f64,
    }

    impl SdeSystem for Linear {
        fn dim(&self) -> usize {
            2
        }
        fn noise_dim(&self) -> usize {
            1
        }
        fn eval_fields(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
            for r in 0..2 {
                out[r] = self.a[r][0] * x[0] + self.a[r][1] * x[1];
                out[2 + r] = self.c * x[r];
            }
            Ok(())
        }
        fn eval_jacobians(&self, _x: &[f64], out: &mut [f64]) -> Result<()> {
            out[..4].copy_from_slice(&[self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1]]);
            out[4..].copy_from_slice(&[self.c, 0.0, 0.0, self.c]);
            Ok(())
        }
    }

    #[test]
    fn zero_increment_zero_drift_is_identity() {
        let sys = Linear { a: [[0.0; 2]; 2], c: 0.0 };
        for scheme in [Scheme::EulerHeun, Scheme::StratonovichMidpoint] {
            assert_eq!(step(&sys, &[1.5, -2.0], &[0.0], 0.1, scheme).unwrap(), vec![1.5, -2.0]);
        }
    }

    #[test]
    fn heun_matches_second_order_taylor_for_linear_drift() {
        let a = [[0.0, 1.0], [-2.0, -0.3]];
        let sys = Linear { a, c: 0.0 };
        let x = [0.7, -0.4];
        let h = 0.05;
        let ax = [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]];
        let aax = [a[0][0] * ax[0] + a[0][1] * ax[1], a[1][0] * ax[0] + a[1][1] * ax[1]];
        let got = step(&sys, &x, &[0.0], h, Scheme::EulerHeun).unwrap();
        for i in 0..2 {
            let taylor = x[i] + h * ax[i] + 0.5 * h * h * aax[i];
            assert!((got[i] - taylor).abs() < 1e-15, "{got:?}");
        }
    }

    #[test]
    fn step_rejects_wrong_increment_width() {
        let sys = Linear { a: [[0.0; 2]; 2], c: 1.0 };
        assert!(matches!(
            step(&sys, &[1.0, 1.0], &[0.1, 0.2], 0.1, Scheme::EulerHeun),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn midpoint_divergence_is_reported() {
        // stiff step: x' = x + 100 * x_mid has fixed-point map with slope 50
        let sys = Linear { a: [[100.0, 0.0], [0.0, 100.0]], c: 0.0 };
        let err = step(&sys, &[1.0, 1.0], &[0.0], 1.0, Scheme::StratonovichMidpoint).unwrap_err();
        assert!(matches!(err, Error::MidpointDivergence { iterations: 50, .. }));
    }

    #[test]
    fn augmented_jacobian_matches_fd_for_both_schemes() {
        let sys = Linear { a: [[0.0, 1.0], [-1.0, -0.2]], c: 0.3 };
        let path = BrownianPath::sample(0.0, 1, 200, 0.005, 3, 0).unwrap();
        let x0 = [0.4, 0.9];
        for scheme in [Scheme::EulerHeun, Scheme::StratonovichMidpoint] {
            let traj = integrate_augmented(&sys, &x0, &path, scheme).unwrap();
            let j = &traj.last().jacobian;
            for c in 0..2 {
                let h = 1e-6;
                let mut xp = x0;
                xp[c] += h;
                let mut xm = x0;
                xm[c] -= h;
                let fp = integrate_final(&sys, &xp, &path, scheme).unwrap();
                let fm = integrate_final(&sys, &xm, &path, scheme).unwrap();
                for r in 0..2 {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    assert!((fd - j[(r, c)]).abs() < 1e-8, "{scheme} {r}{c}: {fd} vs {}", j[(r, c)]);
                }
            }
        }
    }

    #[test]
    fn integrate_records_grid() {
        let sys = Linear { a: [[0.0; 2]; 2], c: 1.0 };
        let path = BrownianPath::sample(1.0, 1, 4, 0.25, 0, 0).unwrap();
        let t = integrate(&sys, &[1.0, 2.0], &path, Scheme::EulerHeun).unwrap();
        assert_eq!(t.times, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(t.states.len(), 5);
        assert_eq!(t.log_lambda, vec![0.0; 5]);
    }
}
