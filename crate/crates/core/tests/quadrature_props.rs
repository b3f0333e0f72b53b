use ineqlab::funcmodel::FunctionSpec;
use ineqlab::quadrature::{integrate, integrate_param, integrate_weighted_s, QuadConfig};
use proptest::prelude::*;

#[test]
fn weight_normalization() {
    let cfg = QuadConfig::with_tol(1e-10);
    for i in 1..=10 {
        let s = i as f64 / 10.0;
        let r = integrate_weighted_s(|_| 1.0, s, &cfg).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-8, "s={s}: {}", r.value);
        assert!(r.converged);
    }
}

#[test]
fn change_of_variable_identity() {
    let cfg = QuadConfig::with_tol(1e-10);
    let (a, b) = (0.0, 1.0);
    for s in [0.3, 0.5, 0.8, 1.0] {
        let direct = integrate(|t: f64| ((1.0 - t.powf(s)).powf(1.0 / s) * a + t * b).exp(), 0.0, 1.0, 1e-10).unwrap();
        let weighted =
            integrate_weighted_s(|t: f64| (t * a + (1.0 - t.powf(s)).powf(1.0 / s) * b).exp(), s, &cfg).unwrap();
        assert!((direct.value - weighted.value).abs() <= 1e-7, "s={s}: {} vs {}", direct.value, weighted.value);
    }
}

#[test]
fn frozen_integrals() {
    let f = FunctionSpec::exp_pow(1.0, 2.0).unwrap();
    let r = integrate_param(&f, 0.0, 1.0, &QuadConfig::default()).unwrap();
    assert!((r.value - 1.462651745907181609).abs() < 1e-10);
    // Beta(2, 2) as a weighted integral at s = 1
    let r = integrate_weighted_s(|t| t * (1.0 - t), 1.0, &QuadConfig::default()).unwrap();
    assert!((r.value - 1.0 / 6.0).abs() < 1e-12);
}

/// Closed-form means of the exponential and power families.
fn family_and_truth() -> impl Strategy<Value = (FunctionSpec, f64, f64, f64)> {
    let exp = (-5.0f64..5.0, 0.0f64..1.0, 0.1f64..2.0).prop_map(|(lambda, a, w)| {
        let f = FunctionSpec::exp_affine(lambda, 0.0).unwrap().with_domain(ineqlab::Interval::new(0.0, 3.0).unwrap()).unwrap();
        let b = (a + w).min(3.0);
        let truth = if lambda.abs() < 1e-12 { b - a } else { ((lambda * b).exp() - (lambda * a).exp()) / lambda };
        (f, a, b, truth / (b - a))
    });
    let pow = (0.1f64..4.0, 0.0f64..1.0, 0.1f64..2.0).prop_map(|(r, a, w)| {
        let f = FunctionSpec::pow(r).unwrap().with_domain(ineqlab::Interval::new(0.0, 3.0).unwrap()).unwrap();
        let b = (a + w).min(3.0);
        let truth = (b.powf(r + 1.0) - a.powf(r + 1.0)) / (r + 1.0);
        (f, a, b, truth / (b - a))
    });
    prop_oneof![exp, pow]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn error_estimate_is_honest((f, a, b, truth) in family_and_truth()) {
        let r = integrate_param(&f, a, b, &QuadConfig::default()).unwrap();
        let err = (r.value - truth).abs();
        // the estimate bounds the error up to rounding in the closed form itself
        prop_assert!(err <= 10.0 * r.err_est + 4.0 * f64::EPSILON * truth.abs(), "{} on [{}, {}]: err {} est {}", f, a, b, err, r.err_est);
    }
}
