use contact_core::catalog::{dissipative_default, dissipative_system, sasaki_einstein_system};
use contact_core::flow::{drift_diffusion, integrate, integrate_augmented, integrate_final, step};
use contact_core::verify::{convergence_study, ErrorMeasure};
use contact_core::{BrownianPath, Chart, HamiltonianSystem, Scheme};
use proptest::prelude::*;

const SCHEMES: [Scheme; 2] = [Scheme::EulerHeun, Scheme::StratonovichMidpoint];

#[test]
fn increment_moments_over_a_million_draws() {
    let dt = 0.01;
    let p = BrownianPath::sample(0.0, 4, 250_000, dt, 20261016, 0).unwrap();
    let inc = p.increments();
    let n = inc.len() as f64;
    assert_eq!(inc.len(), 1_000_000);
    let mean = inc.iter().sum::<f64>() / n;
    let var = inc.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() <= 4.0 * dt.sqrt() / n.sqrt(), "mean {mean}");
    assert!((var / dt - 1.0).abs() <= 0.02, "variance {var}");
}

#[test]
fn coarsened_increments_have_scaled_variance() {
    let (dt, m) = (0.01, 8);
    let mut acc = Vec::new();
    for s in 0..500 {
        let p = BrownianPath::sample(0.0, 2, 64, dt, 5, s).unwrap().coarsen(m).unwrap();
        assert!((p.dt - m as f64 * dt).abs() < 1e-15);
        acc.extend_from_slice(p.increments());
    }
    let n = acc.len() as f64;
    let var = acc.iter().map(|v| v * v).sum::<f64>() / n;
    assert!((var / (m as f64 * dt) - 1.0).abs() <= 0.02 * 4.0, "variance {var} over {n} samples");
}

#[test]
fn paths_are_reproducible_and_streams_differ() {
    let a = BrownianPath::sample(0.0, 3, 100, 0.01, 77, 4).unwrap();
    let b = BrownianPath::sample(0.0, 3, 100, 0.01, 77, 4).unwrap();
    let c = BrownianPath::sample(0.0, 3, 100, 0.01, 77, 5).unwrap();
    let bits = |p: &BrownianPath| p.increments().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_ne!(bits(&a), bits(&c));
}

#[test]
fn drift_diffusion_examples() {
    let sys = dissipative_default();
    let (a, b) = drift_diffusion(&sys, &[1.0, 0.0, 2.0, 0.0, 0.0]).unwrap();
    assert_eq!(a, vec![2.0, 0.0, -2.0, 0.0, 1.5]);
    assert_eq!(b, vec![vec![0.0, 0.0, 0.0, 0.0, 0.1]]);
    // with the opposite sign on the constant noise Hamiltonian
    let plus = HamiltonianSystem::from_sources(
        Chart::darboux(2),
        "(p1^2+p2^2)/2 + (q1^2+q2^2)/2 + 0.5*z",
        &["0.1"],
        vec![],
    )
    .unwrap();
    let (a, b) = drift_diffusion(&plus, &[1.0, 0.0, 2.0, 0.0, 0.0]).unwrap();
    assert_eq!(a, vec![2.0, 0.0, -2.0, 0.0, 1.5]);
    assert_eq!(b, vec![vec![0.0, 0.0, 0.0, 0.0, -0.1]]);
    let zero = HamiltonianSystem::from_sources(Chart::darboux(1), "0", &["0", "0"], vec![]).unwrap();
    let (a, b) = drift_diffusion(&zero, &[0.4, 0.2, -1.0]).unwrap();
    assert!(a.iter().chain(b.iter().flatten()).all(|v| *v == 0.0));
}

#[test]
fn zero_increments_and_zero_drift_fix_the_state() {
    let zero = HamiltonianSystem::from_sources(Chart::darboux(1), "0", &["p1*q1"], vec![]).unwrap();
    for s in SCHEMES {
        assert_eq!(step(&zero, &[0.4, 0.2, -1.0], &[0.0], 0.1, s).unwrap(), vec![0.4, 0.2, -1.0]);
    }
}

#[test]
fn reeb_hamiltonian_translates_z() {
    let sys = HamiltonianSystem::from_sources(Chart::darboux(2), "1", &[], vec![]).unwrap();
    let path = BrownianPath::deterministic(0.5, 0.01, 100).unwrap();
    let x0 = [0.1, 0.2, 0.3, 0.4, 0.7];
    for s in SCHEMES {
        let tr = integrate(&sys, &x0, &path, s).unwrap();
        for (t, x) in tr.times.iter().zip(&tr.states) {
            assert_eq!(&x[..4], &x0[..4]);
            assert!((x[4] - (0.7 - (t - 0.5))).abs() < 1e-13);
        }
    }
}

#[test]
fn damped_oscillator_loses_energy() {
    let sys = dissipative_system(1.0, 0.5, 0.0, "(q1^2+q2^2)/2").unwrap();
    let path = BrownianPath::sample(0.0, 1, 4000, 1e-3, 1, 0).unwrap();
    let tr = integrate(&sys, &[1.0, -0.5, 2.0, 0.3, 0.0], &path, Scheme::EulerHeun).unwrap();
    let energy = |x: &Vec<f64>| (x[2] * x[2] + x[3] * x[3]) / 2.0 + (x[0] * x[0] + x[1] * x[1]) / 2.0;
    for w in tr.states.windows(2) {
        assert!(energy(&w[1]) <= energy(&w[0]) + 1e-15);
    }
    assert!(energy(tr.states.last().unwrap()) < 0.5 * energy(&tr.states[0]));
}

#[test]
fn theta_moves_only_with_streams_four_and_five() {
    let sys = sasaki_einstein_system();
    let x0 = [1.2, 1.9, 0.3, -0.4, 0.0];
    let path = BrownianPath::sample(0.0, 5, 1000, 1e-3, 3, 0).unwrap().with_components_zeroed(&[3, 4]);
    let tr = integrate(&sys, &x0, &path, Scheme::EulerHeun).unwrap();
    for x in &tr.states {
        assert_eq!((x[0], x[1]), (x0[0], x0[1]));
    }
    let last = tr.states.last().unwrap();
    assert!((last[2] - (x0[2] + path.total(1))).abs() < 1e-12);
    assert!((last[4] - (3.0 + 3.0 * path.total(0))).abs() < 1e-12);
}

#[test]
fn augmented_state_starts_at_identity() {
    let sys = dissipative_default();
    let path = BrownianPath::sample(0.0, 1, 10, 1e-2, 3, 0).unwrap();
    let tr = integrate_augmented(&sys, &[1.0, 0.0, 2.0, 0.0, 0.0], &path, Scheme::EulerHeun).unwrap();
    let s0 = &tr.states[0];
    assert_eq!(s0.jacobian, nalgebra::DMatrix::identity(5, 5));
    assert_eq!(s0.log_lambda, 0.0);
    for w in tr.times.windows(2) {
        assert!(w[1] > w[0]);
        assert!(((w[1] - w[0]) - 1e-2).abs() < 1e-15);
    }
}

#[test]
fn dissipative_log_lambda_is_exact_at_every_step() {
    let sys = dissipative_default();
    let path = BrownianPath::sample(0.0, 1, 2000, 1e-3, 8, 0).unwrap();
    for s in SCHEMES {
        let tr = integrate_augmented(&sys, &[1.0, 0.0, 2.0, 0.0, 0.0], &path, s).unwrap();
        for (t, st) in tr.times.iter().zip(&tr.states) {
            assert!((st.log_lambda + 0.5 * t).abs() <= 1e-12, "{s} t={t}");
        }
    }
}

#[test]
fn sasaki_einstein_lambda_is_one() {
    let sys = sasaki_einstein_system();
    let path = BrownianPath::sample(0.0, 5, 20, 1e-3, 8, 0).unwrap();
    let tr = integrate_augmented(&sys, &[1.5, 1.6, 0.0, 0.0, 0.0], &path, Scheme::EulerHeun).unwrap();
    assert!(tr.states.iter().all(|s| s.log_lambda == 0.0));
}

/// With no noise, `lambda_t = exp(-int_0^t R(H0)(x_s) ds)`. `H0 = p1^2/2 + z^2/2`
/// has `R(H0) = z`, which varies along the flow.
#[test]
fn deterministic_lambda_matches_reeb_quadrature() {
    let sys = HamiltonianSystem::from_sources(Chart::darboux(1), "p1^2/2 + z^2/2", &[], vec![]).unwrap();
    let x0 = [0.2, 0.8, 0.5];
    let reference = |dt: f64, n: usize| {
        let tr = integrate(&sys, &x0, &BrownianPath::deterministic(0.0, dt, n).unwrap(), Scheme::EulerHeun).unwrap();
        // trapezoid rule on z along a fine trajectory
        let integral: f64 = tr.states.windows(2).map(|w| 0.5 * (w[0][2] + w[1][2]) * dt).sum();
        (-integral).exp()
    };
    let exact = reference(1e-5, 100_000);
    let err = |n: usize| {
        let path = BrownianPath::deterministic(0.0, 1.0 / n as f64, n).unwrap();
        let tr = integrate_augmented(&sys, &x0, &path, Scheme::EulerHeun).unwrap();
        (tr.last().lambda() - exact).abs()
    };
    let (e1, e2) = (err(100), err(200));
    assert!(e1 < 1e-4, "{e1}");
    assert!((e1 / e2).log2() > 1.8, "{e1} {e2}");
}

#[test]
fn schemes_agree_to_first_order() {
    let sys = HamiltonianSystem::from_sources(
        Chart::darboux(1),
        "p1^2/2 + q1^2/2 + 0.3*z",
        &["0.4*p1*q1", "0.2*sin(q1)"],
        vec![],
    )
    .unwrap();
    let x0 = [0.5, -0.3, 0.1];
    let fine = BrownianPath::sample(0.0, 2, 4000, 2.5e-4, 12, 0).unwrap();
    let gap = |factor: usize| {
        let p = fine.coarsen(factor).unwrap();
        let a = integrate(&sys, &x0, &p, Scheme::EulerHeun).unwrap();
        let b = integrate(&sys, &x0, &p, Scheme::StratonovichMidpoint).unwrap();
        a.states
            .iter()
            .zip(&b.states)
            .flat_map(|(u, v)| u.iter().zip(v).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    };
    let (g4, g2, g1) = (gap(4), gap(2), gap(1));
    assert!(g4 < 0.05, "{g4}");
    assert!(g2 < g4 && g1 < g2, "{g4} {g2} {g1}");
}

/// `dx = x o dB` written as a contact system: Darboux `n = 0`, `H1 = -z`.
fn geometric_bm() -> HamiltonianSystem {
    HamiltonianSystem::from_sources(Chart::darboux(0), "0", &["-z"], vec![]).unwrap()
}

#[test]
fn geometric_brownian_motion_strong_order() {
    let sys = geometric_bm();
    let paths: Vec<_> = (0..200).map(|s| BrownianPath::sample(0.0, 1, 1000, 1e-3, 31, s).unwrap()).collect();
    let exact = |p: &BrownianPath| vec![p.total(0).exp()];
    let rep = convergence_study(&sys, &[1.0], &paths, Scheme::EulerHeun, 3, ErrorMeasure::Exact(&exact)).unwrap();
    assert!(rep.min_order() >= 0.8, "{rep:?}");
}

#[test]
fn deterministic_quadratic_drift_is_second_order() {
    let sys = HamiltonianSystem::from_sources(Chart::darboux(1), "p1^3/3 + q1^2/2", &[], vec![]).unwrap();
    let path = BrownianPath::deterministic(0.0, 1.0 / 512.0, 512).unwrap();
    let rep =
        convergence_study(&sys, &[0.5, 0.3, 0.0], &[path], Scheme::EulerHeun, 4, ErrorMeasure::FinestReference).unwrap();
    assert!(rep.min_order() >= 1.9, "{rep:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn integration_is_bitwise_deterministic(seed in any::<u64>(), stream in 0u64..1000) {
        let sys = dissipative_default();
        let x0 = [1.0, 0.0, 2.0, 0.0, 0.0];
        for s in SCHEMES {
            let p1 = BrownianPath::sample(0.0, 1, 50, 1e-2, seed, stream).unwrap();
            let p2 = BrownianPath::sample(0.0, 1, 50, 1e-2, seed, stream).unwrap();
            let a = integrate_augmented(&sys, &x0, &p1, s).unwrap();
            let b = integrate_augmented(&sys, &x0, &p2, s).unwrap();
            prop_assert_eq!(&a, &b);
            let f = integrate_final(&sys, &x0, &p1, s).unwrap();
            prop_assert_eq!(&f, &a.last().x);
            prop_assert!(a.states.iter().all(|st| st.lambda().is_finite() && st.lambda() > 0.0));
        }
    }
}
