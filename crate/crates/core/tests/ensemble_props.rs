use pairdecay::ensemble::{
    analytic_collective_variance, analytic_momentum_sum_variance, crossover_time, propagate,
    sample_equilibrium, standard_quantum_limit, Ensemble, EnsembleSpec,
};
use pairdecay::{DecayParams, PairState, Vec3};
use proptest::prelude::*;

proptest! {
    // Four equally spaced samples of a parabola have zero third difference.
    #[test]
    fn variance_is_quadratic_in_time(
        m1 in 0.1f64..10.0, m2 in 0.1f64..10.0, sigma in 1e-3f64..10.0,
        t0 in 0.0f64..100.0, h in 0.1f64..50.0,
    ) {
        let p = DecayParams::new(m1, m2, 1.0, sigma).unwrap();
        let v: Vec<f64> = (0..4).map(|k| analytic_collective_variance(&p, t0 + k as f64 * h)).collect();
        let third = v[3] - 3.0 * v[2] + 3.0 * v[1] - v[0];
        prop_assert!(third.abs() < 1e-12 * v[3]);
        let second = v[2] - 2.0 * v[1] + v[0];
        prop_assert!((second - sigma / 2.0 * h * h).abs() < 1e-12 * v[2]);
    }

    #[test]
    fn standard_quantum_limit_holds(m in 0.1f64..10.0, sigma in 1e-3f64..10.0, t in 0.0f64..1e4) {
        let p = DecayParams::new(m, m, 1.0, sigma).unwrap();
        let var_sum = analytic_collective_variance(&p, t) / (m * m);
        prop_assert!(var_sum >= standard_quantum_limit(m, t) * (1.0 - 1e-12));
    }

    #[test]
    fn propagation_scales_packets(
        sigma in 0.01f64..5.0, alpha in 0.1f64..5.0, t in 0.0f64..20.0,
        cm in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
        d in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
    ) {
        let p = DecayParams::new(1.0, 3.0, alpha, sigma).unwrap();
        let cm = Vec3::new(cm.0, cm.1, cm.2);
        let d = Vec3::new(d.0, d.1, d.2);
        let s0 = PairState::from_cm_separation(&p, cm, d, 0.0);
        let st = propagate(&p, &s0, t);
        prop_assert!((st.separation() - d * (1.0 + (t / (2.0 * p.mu() * alpha)).powi(2)).sqrt()).norm() < 1e-12 * (1.0 + d.norm()) * (1.0 + t));
        let back = propagate(&p, &s0, 0.0);
        prop_assert!((back.r1 - s0.r1).norm() + (back.r2 - s0.r2).norm() < 1e-14 * (1.0 + s0.r1.norm() + s0.r2.norm()));
    }
}

#[test]
fn limit_touched_at_crossover() {
    let (m, sigma) = (2.0, 0.05);
    let p = DecayParams::new(m, m, 1.0, sigma).unwrap();
    let tc = crossover_time(&p);
    let var_sum = analytic_collective_variance(&p, tc) / (m * m);
    assert!((var_sum - standard_quantum_limit(m, tc)).abs() < 1e-12 * var_sum);
}

#[test]
fn same_seed_same_samples() {
    let p = DecayParams::new(1.0, 1.0, 1.0, 0.3).unwrap();
    let a = sample_equilibrium(&EnsembleSpec::new(500, 4, p).unwrap()).unwrap();
    let b = sample_equilibrium(&EnsembleSpec::new(500, 4, p).unwrap()).unwrap();
    let c = sample_equilibrium(&EnsembleSpec::new(500, 5, p).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn limit_wave_cannot_be_sampled() {
    let p = DecayParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
    assert!(EnsembleSpec::new(10, 1, p).is_err());
}

#[test]
fn momentum_sum_variance_is_a_single_datum() {
    let p = DecayParams::new(1.0, 2.0, 0.7, 0.4).unwrap();
    let ens = Ensemble::sample(&EnsembleSpec::new(100_000, 21, p).unwrap()).unwrap();
    let m = ens.momentum_sum_moments();
    let expected = analytic_momentum_sum_variance(&p);
    assert!((m.var - expected).abs() < 3.0 * m.var_se(), "{} vs {expected}", m.var);
    // propagating positions leaves the momentum sample untouched
    let before = ens.momenta.clone();
    let _ = ens.collective_variance(50.0);
    assert_eq!(before, ens.momenta);
}

#[test]
fn empirical_sum_respects_the_limit() {
    let m = 1.0;
    let p = DecayParams::new(m, m, 1.0, 0.1).unwrap();
    let ens = Ensemble::sample(&EnsembleSpec::new(100_000, 8, p).unwrap()).unwrap();
    for t in [0.0, 1.0, 10.0, crossover_time(&p), 100.0, 1000.0] {
        let mo = ens.position_sum_moments(t);
        assert!(mo.var + 3.0 * mo.var_se() >= standard_quantum_limit(m, t), "t = {t}");
    }
}

#[test]
fn analytic_shortcut_matches_rk4() {
    let p = DecayParams::new(1.0, 2.0, 0.5, 0.8).unwrap();
    let ens = Ensemble::sample(&EnsembleSpec::new(100, 3, p).unwrap()).unwrap();
    let err = ens.spot_check(5.0, 1e-3, 100).unwrap();
    assert!(err < 1e-8, "{err:e}");
}
