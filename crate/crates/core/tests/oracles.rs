//! Closed-form propagator against the quadrature and RK4 oracles.

use djcm::oracle::{
    adaptive_simpson, integrate_pair, integrate_single, rate_from_spectral_density,
    IntegratorConfig,
};
use djcm::propagator::{
    accumulated_i_minus, accumulated_i_plus, decay_rate_minus, decay_rate_plus,
};
use djcm::{initial_state, propagate_pair, propagate_single, DjcmState, DressedState3, JcmParams};

const RATE_TOL: f64 = 1e-8;
const FD_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;

fn rate_params() -> Vec<JcmParams> {
    [(5.0, 1.0), (0.05, 1.0), (5.0, 50.0)]
        .iter()
        .map(|&(lambda, omega)| JcmParams::scaled(omega, lambda).unwrap())
        .collect()
}

fn grid(end: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| end * k as f64 / n as f64)
}

#[test]
fn rates_match_quadrature() {
    for p in rate_params() {
        for t in grid(10.0, 400) {
            let minus = rate_from_spectral_density(&p, p.omega0 - p.omega, t).unwrap();
            let plus = rate_from_spectral_density(&p, p.omega0 + p.omega, t).unwrap();
            assert!(
                (minus - decay_rate_minus(&p, t).unwrap()).abs() < RATE_TOL,
                "{p:?} t={t}"
            );
            assert!(
                (plus - decay_rate_plus(&p, t).unwrap()).abs() < RATE_TOL,
                "{p:?} t={t}"
            );
        }
    }
}

#[test]
fn frozen_rate_values() {
    // High-precision quadrature values.
    let p = JcmParams::scaled(1.0, 1.0).unwrap();
    assert!((decay_rate_minus(&p, 1.0).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-14);

    let cases = [
        (1.0, 5.0, 1.0, 0.866_598_874_548_133),
        (1.0, 0.05, 3.0, -0.005_900_207_461_530_405),
        (50.0, 5.0, 0.5, 0.001_222_069_762_529_833),
    ];
    for (omega, lambda, t, expected) in cases {
        let p = JcmParams::scaled(omega, lambda).unwrap();
        assert!(
            (decay_rate_plus(&p, t).unwrap() - expected).abs() < 1e-12,
            "Ω={omega} λ={lambda}"
        );
        let q = rate_from_spectral_density(&p, p.omega0 + p.omega, t).unwrap();
        assert!((q - expected).abs() < RATE_TOL);
    }
}

#[test]
fn accumulated_integrals_differentiate_to_rates() {
    for p in rate_params() {
        for t in grid(10.0, 200).skip(1) {
            let dm = (accumulated_i_minus(&p, t + FD_STEP).unwrap()
                - accumulated_i_minus(&p, t - FD_STEP).unwrap())
                / (2.0 * FD_STEP);
            let dp = (accumulated_i_plus(&p, t + FD_STEP).unwrap()
                - accumulated_i_plus(&p, t - FD_STEP).unwrap())
                / (2.0 * FD_STEP);
            assert!(
                (dm - decay_rate_minus(&p, t).unwrap()).abs() < FD_TOL,
                "{p:?} t={t}"
            );
            assert!(
                (dp - decay_rate_plus(&p, t).unwrap()).abs() < FD_TOL,
                "{p:?} t={t}"
            );
        }
    }
}

#[test]
fn i_minus_derivative_at_reference_point() {
    let p = JcmParams::scaled(1.0, 5.0).unwrap();
    let t = 0.7;
    let d = (accumulated_i_minus(&p, t + FD_STEP).unwrap()
        - accumulated_i_minus(&p, t - FD_STEP).unwrap())
        / (2.0 * FD_STEP);
    assert!((d - decay_rate_minus(&p, t).unwrap()).abs() < FD_TOL);
}

#[test]
fn i_plus_derivative_on_short_grid() {
    let p = JcmParams::scaled(1.0, 5.0).unwrap();
    for k in 1..=50 {
        let t = 0.1 * k as f64;
        let d = (accumulated_i_plus(&p, t + FD_STEP).unwrap()
            - accumulated_i_plus(&p, t - FD_STEP).unwrap())
            / (2.0 * FD_STEP);
        assert!(
            (d - decay_rate_plus(&p, t).unwrap()).abs() < FD_TOL,
            "t={t}"
        );
    }
}

#[test]
fn accumulated_integrals_match_numeric_integration() {
    for p in rate_params() {
        for t in [0.3, 2.0, 10.0] {
            let minus = |s: f64| decay_rate_minus(&p, s).unwrap();
            let plus = |s: f64| decay_rate_plus(&p, s).unwrap();
            let panels = 400;
            let num = |f: &dyn Fn(f64) -> f64| -> f64 {
                (0..panels)
                    .map(|k| {
                        let a = t * k as f64 / panels as f64;
                        let b = t * (k + 1) as f64 / panels as f64;
                        adaptive_simpson(&f, a, b, 1e-13)
                    })
                    .sum()
            };
            assert!((num(&minus) - accumulated_i_minus(&p, t).unwrap()).abs() < 1e-9);
            assert!((num(&plus) - accumulated_i_plus(&p, t).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn i_minus_long_time_asymptote() {
    let p = JcmParams::scaled(1.0, 5.0).unwrap();
    let t = 10.0; // λt = 50
    let asymptote = p.gamma0 * t - p.gamma0 / p.lambda;
    assert!((accumulated_i_minus(&p, t).unwrap() - asymptote).abs() < 1e-12);
}

#[test]
fn single_partition_minus_branch_matches_rk4() {
    let p = JcmParams::scaled(1.0, 5.0).unwrap();
    let r0 = DressedState3::basis_projector(1);
    let cfg = IntegratorConfig::for_params(&[p], 1.0, 1);
    let traj = integrate_single(&r0, &p, &cfg).unwrap();
    let numeric = traj.states.last().unwrap();
    let exact = propagate_single(&r0, &p, 1.0).unwrap();
    assert!(exact.matrix().max_abs_diff(numeric) < 1e-6);

    let r22 = (-accumulated_i_minus(&p, 1.0).unwrap() / 2.0).exp();
    assert!((exact.matrix()[(1, 1)].re - r22).abs() < 1e-14);
    assert!((exact.matrix()[(2, 2)].re - (1.0 - r22)).abs() < 1e-14);
}

#[test]
fn single_partition_coherent_state_matches_rk4() {
    let p = JcmParams::new(3.0, 1.0, 1.0, 5.0).unwrap();
    let v = [0.6, 0.48, 0.64].map(|x| djcm::C64::new(x, 0.0));
    let r0 = DressedState3::new(djcm::ComplexMatrix::projector(&v)).unwrap();
    let cfg = IntegratorConfig::for_params(&[p], 15.0, 10);
    let traj = integrate_single(&r0, &p, &cfg).unwrap();
    for (t, numeric) in traj.times.iter().zip(&traj.states) {
        let exact = propagate_single(&r0, &p, *t).unwrap();
        assert!(exact.matrix().max_abs_diff(numeric) < 1e-6, "t={t}");
    }
}

fn pair_deviation(r0: &DjcmState, p: JcmParams, t_end: f64) -> f64 {
    let cfg = IntegratorConfig::for_params(&[p], t_end, 25);
    let traj = integrate_pair(r0, &p, &p, &cfg).unwrap();
    assert!(traj.max_trace_drift < 1e-8);
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, numeric)| {
            propagate_pair(r0, &p, &p, *t)
                .unwrap()
                .matrix()
                .max_abs_diff(numeric)
        })
        .fold(0.0, f64::max)
}

#[test]
fn pair_markovian_matches_rk4() {
    let p = JcmParams::scaled(1.0, 5.0).unwrap();
    assert!(pair_deviation(&initial_state(1.0).unwrap(), p, 15.0) < 1e-6);
}

#[test]
fn pair_strong_memory_matches_rk4() {
    let p = JcmParams::scaled(1.0, 0.05).unwrap();
    assert!(pair_deviation(&initial_state(1.0).unwrap(), p, 50.0) < 1e-5);
}

#[test]
fn pair_mixed_strong_coupling_matches_rk4() {
    let p = JcmParams::scaled(50.0, 5.0).unwrap();
    assert!(pair_deviation(&initial_state(0.5).unwrap(), p, 10.0) < 1e-5);
}

#[test]
fn pair_unequal_partitions_match_rk4() {
    let pa = JcmParams::new(2.0, 1.0, 1.0, 5.0).unwrap();
    let pb = JcmParams::new(0.0, 3.0, 0.5, 0.5).unwrap();
    let r0 = initial_state(0.7).unwrap();
    let cfg = IntegratorConfig::for_params(&[pa, pb], 10.0, 20);
    let traj = integrate_pair(&r0, &pa, &pb, &cfg).unwrap();
    for (t, numeric) in traj.times.iter().zip(&traj.states) {
        let exact = propagate_pair(&r0, &pa, &pb, *t).unwrap();
        assert!(exact.matrix().max_abs_diff(numeric) < 1e-6, "t={t}");
    }
}

/// Global error ratio between steps `h` and `h/2`.
fn rk4_convergence_ratio() -> f64 {
    let p = JcmParams::scaled(1.0, 1.0).unwrap();
    let r0 = initial_state(1.0).unwrap();
    let t_end = 5.0;
    let exact = propagate_pair(&r0, &p, &p, t_end).unwrap();
    let err = |step: f64| {
        let cfg = IntegratorConfig {
            step,
            t_end,
            record_every: usize::MAX,
        };
        let traj = integrate_pair(&r0, &p, &p, &cfg).unwrap();
        exact.matrix().max_abs_diff(traj.states.last().unwrap())
    };
    let h = IntegratorConfig::max_step(&[p]);
    err(h) / err(h / 2.0)
}

#[test]
fn rk4_is_fourth_order() {
    let ratio = rk4_convergence_ratio();
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}
