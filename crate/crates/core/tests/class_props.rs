use ineqlab::classcheck::{condition_margin, falsify, ConvexityClass as C, SamplePoint};
use ineqlab::funcmodel::{builtin_suite, parse_spec, FunctionSpec};
use ineqlab::harness::validate_builtin_labels;
use proptest::prelude::*;

fn spec(s: &str) -> FunctionSpec {
    parse_spec(s).unwrap()
}

fn any_builtin() -> impl Strategy<Value = FunctionSpec> {
    let specs: Vec<FunctionSpec> = builtin_suite().into_iter().map(|e| e.spec).collect();
    proptest::sample::select(specs)
}

/// A point inside `f`'s domain.
fn point_in(f: &FunctionSpec) -> impl Strategy<Value = SamplePoint> {
    let d = f.domain();
    (d.lo..=d.hi, d.lo..=d.hi, 0.0f64..=1.0).prop_map(|(x, y, weight)| SamplePoint { x, y, weight })
}

fn builtin_and_point() -> impl Strategy<Value = (FunctionSpec, SamplePoint)> {
    any_builtin().prop_flat_map(|f| {
        let p = point_in(&f);
        (Just(f), p)
    })
}

fn margin(cls: C, f: &FunctionSpec, p: &SamplePoint) -> f64 {
    condition_margin(&cls, f, p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn second_sense_reduces_at_s_one((f, p) in builtin_and_point()) {
        let (slog, log) = (margin(C::SLogSecond { s: 1.0 }, &f, &p), margin(C::LogConvex, &f, &p));
        prop_assert!((slog - log).abs() <= 1e-12);
        let (sconv, conv) = (margin(C::SConvexSecond { s: 1.0 }, &f, &p), margin(C::Convex, &f, &p));
        prop_assert!((sconv - conv).abs() <= 1e-12);
    }

    #[test]
    fn m_log_reduces_at_m_one((f, p) in builtin_and_point()) {
        let (mlog, log) = (margin(C::MLogConvex { m: 1.0 }, &f, &p), margin(C::LogConvex, &f, &p));
        prop_assert!((mlog - log).abs() <= 1e-12);
    }

    #[test]
    fn alpha_m_reduces_at_alpha_one((f, p) in builtin_and_point(), m in 0.01f64..=1.0) {
        let lhs = condition_margin(&C::AlphaMLogConvex { alpha: 1.0, m }, &f, &p);
        let rhs = condition_margin(&C::MLogConvex { m }, &f, &p);
        match (lhs, rhs) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b),
            // m-scaled points can leave a domain that starts above 0
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn second_sense_margin_at_weight_endpoints((f, p) in builtin_and_point(), s in 0.05f64..=1.0, w in prop::bool::ANY) {
        let p = SamplePoint { weight: if w { 1.0 } else { 0.0 }, ..p };
        for cls in [C::SLogSecond { s }, C::SConvexSecond { s }, C::LogConvex, C::Convex] {
            prop_assert!(margin(cls, &f, &p) >= 0.0, "{} at {:?}", cls, p);
        }
    }

    #[test]
    fn exp_m_log_identity(x in 0.0f64..=1.0, y in 0.0f64..=1.0, t in 0.0f64..=1.0, m in 0.01f64..=1.0) {
        let f = spec("exp_affine(lambda=1,c=0)");
        let p = SamplePoint { x, y, weight: t };
        let c = ineqlab::classcheck::condition(&C::MLogConvex { m }, &f, &p).unwrap();
        prop_assert!((c.lhs - c.rhs).abs() <= 1e-12 * c.rhs.abs().max(1.0));
    }

    #[test]
    fn builtins_positive_on_grid(f in any_builtin()) {
        let d = f.domain();
        for i in 0..=1000 {
            let x = d.lo + d.width() * i as f64 / 1000.0;
            prop_assert!(f.evaluate(x).unwrap() > 0.0, "{} at {}", f, x);
        }
    }
}

#[test]
fn render_parse_round_trip() {
    for e in builtin_suite() {
        let text = e.spec.to_string();
        assert_eq!(parse_spec(&text).unwrap(), e.spec, "{text}");
    }
    let nested = spec("product(exp_affine(lambda=-1,c=0),pow(r=2)@[0.1,1])@[0.2,1]");
    assert_eq!(parse_spec(&nested.to_string()).unwrap(), nested);
}

#[test]
fn falsify_is_deterministic() {
    let f = spec("exp_affine(lambda=-1,c=0)");
    let cls = C::SLogSecond { s: 0.5 };
    assert_eq!(falsify(&cls, &f, 2000, 9), falsify(&cls, &f, 2000, 9));
}

#[test]
fn exp_is_s_log_first_for_every_s() {
    let f = spec("exp_affine(lambda=1,c=0)");
    for i in 1..=10 {
        let s = i as f64 / 10.0;
        let r = falsify(&C::SLogFirst { s }, &f, 10_000, 42);
        assert!(r.worst.is_none(), "s={s}: {:?}", r.worst);
    }
}

#[test]
fn monotone_log_convex_is_s_log_first() {
    for text in ["exp_pow(sigma=1,r=2)", "exp_affine(lambda=2,c=0.5)", "product(exp_affine(lambda=1,c=0),exp_pow(sigma=1,r=2))"] {
        let f = spec(text);
        for s in [0.2, 0.5, 0.9] {
            assert!(falsify(&C::SLogFirst { s }, &f, 5_000, 3).worst.is_none(), "{text} s={s}");
        }
    }
}

#[test]
fn builtin_labels_confirmed() {
    let bad: Vec<_> = validate_builtin_labels(10_000, 42).into_iter().filter(|c| !c.confirmed).collect();
    assert!(bad.is_empty(), "{bad:#?}");
}
