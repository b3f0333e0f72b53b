use ineqlab::means::{
    am_gm_gap, arithmetic_mean, geometric_mean, k_factor, log_mean, mu_ratio, power_lemma_margin, MuRatio,
    PositiveValue,
};
use proptest::prelude::*;

fn pv(x: f64) -> PositiveValue {
    PositiveValue::new(x).unwrap()
}

/// `10^e` for `e` in `[-6, 6]`.
fn log_scale() -> impl Strategy<Value = f64> {
    (-6.0f64..6.0).prop_map(|e| 10f64.powf(e))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn g_le_l_le_a(p in log_scale(), q in log_scale()) {
        prop_assume!(p != q);
        let (g, l, a) = (geometric_mean(pv(p), pv(q)), log_mean(pv(p), pv(q)), arithmetic_mean(p, q));
        prop_assert!(g <= l * (1.0 + 1e-15), "G={g} L={l}");
        prop_assert!(l <= a * (1.0 + 1e-15), "L={l} A={a}");
    }

    #[test]
    fn k_is_log_mean_against_one(mu in log_scale()) {
        prop_assert!(rel(k_factor(pv(mu)), log_mean(pv(mu), pv(1.0))) < 1e-12);
    }

    #[test]
    fn means_are_symmetric(p in log_scale(), q in log_scale()) {
        prop_assert_eq!(log_mean(pv(p), pv(q)), log_mean(pv(q), pv(p)));
        prop_assert_eq!(arithmetic_mean(p, q), arithmetic_mean(q, p));
        prop_assert!(rel(geometric_mean(pv(p), pv(q)), geometric_mean(pv(q), pv(p))) < 1e-15);
    }

    #[test]
    fn means_increase_in_each_argument(p in log_scale(), q in log_scale(), bump in 1.001f64..10.0) {
        let p2 = p * bump;
        prop_assert!(log_mean(pv(p2), pv(q)) >= log_mean(pv(p), pv(q)));
        prop_assert!(geometric_mean(pv(p2), pv(q)) >= geometric_mean(pv(p), pv(q)));
        prop_assert!(arithmetic_mean(p2, q) >= arithmetic_mean(p, q));
    }

    #[test]
    fn am_gm_gap_non_negative(p in log_scale(), q in log_scale(), t in 0.0f64..=1.0) {
        prop_assert!(am_gm_gap(pv(p), pv(q), t).unwrap() >= 0.0);
    }

    #[test]
    fn mu_ratio_is_ratio_of_powers(fa in 0.01f64..1.0, fb in 0.01f64..1.0, u in 0.1f64..3.0, v in 0.1f64..3.0) {
        let mu = mu_ratio(&MuRatio::new(pv(fa), pv(fb), u, v).unwrap()).unwrap().get();
        prop_assert!(rel(mu, fa.powf(u) / fb.powf(v)) < 1e-12);
    }

    #[test]
    fn power_lemma_random(rho in 1e-9f64..=1.0, t in 1e-9f64..=1.0, s in 1e-3f64..=1.0) {
        prop_assert!(power_lemma_margin(rho, t, s).unwrap() >= 0.0);
    }
}

#[test]
fn log_mean_of_equal_arguments() {
    for e in -60..=60 {
        let p = 10f64.powf(e as f64 / 10.0);
        assert!(rel(log_mean(pv(p), pv(p)), p) < 1e-12, "p={p}");
    }
}

#[test]
fn log_mean_continuous_across_series_switch() {
    for d in [0.99e-4, 1.0e-4, 1.01e-4, -0.99e-4, -1.01e-4] {
        let mu: f64 = 1.0 + d;
        let exact = d / mu.ln();
        assert!(rel(k_factor(pv(mu)), exact) < 1e-11, "d={d}");
    }
}

#[test]
fn frozen_values() {
    assert!((log_mean(pv(2.0), pv(8.0)) - 4.328085122666890).abs() < 1e-14);
    assert!((power_lemma_margin(0.5, 0.5, 0.5).unwrap() - 0.2283490887176486).abs() < 1e-14);
    let e = std::f64::consts::E;
    assert!((am_gm_gap(pv(1.0), pv(e), 0.5).unwrap() - 0.2104196435293945).abs() < 1e-14);
}
