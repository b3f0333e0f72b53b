//! Special means and the scalar factors the bounds are assembled from.
//!
//! Powers `x^y` of positive bases are taken as `exp(y ln x)` after the base
//! has been validated positive. Near-equal arguments of the logarithmic mean
//! switch to a truncated series so that `L(p, q)` stays accurate as
//! `ln(p/q) -> 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this distance from 1 the `k` factor uses its Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// A strictly positive, finite real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PositiveValue(f64);

impl PositiveValue {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!(
                "expected a strictly positive finite value, got {value}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0.ln()
    }
}

impl TryFrom<f64> for PositiveValue {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PositiveValue> for f64 {
    fn from(v: PositiveValue) -> f64 {
        v.0
    }
}

/// Exponent pair applied to two endpoint values: `fa^u * fb^(-v)`.
///
/// The same shape serves as `μ`, `η`, `ω` and `ℓ` in the K-type bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuRatio {
    pub fa: PositiveValue,
    pub fb: PositiveValue,
    pub u: f64,
    pub v: f64,
}

impl MuRatio {
    pub fn new(fa: PositiveValue, fb: PositiveValue, u: f64, v: f64) -> Result<Self> {
        // zero exponents are admitted: they give the trivial ratio 1
        if !(u.is_finite() && v.is_finite() && u >= 0.0 && v >= 0.0) {
            return Err(Error::Domain(format!(
                "ratio exponents must be finite and non-negative, got u={u}, v={v}"
            )));
        }
        Ok(Self { fa, fb, u, v })
    }
}

/// `x^y` for positive `x`, evaluated as `exp(y ln x)`.
#[inline]
pub fn pow_pos(x: PositiveValue, y: f64) -> f64 {
    (y * x.ln()).exp()
}

pub fn arithmetic_mean(p: f64, q: f64) -> f64 {
    0.5 * (p + q)
}

pub fn geometric_mean(p: PositiveValue, q: PositiveValue) -> f64 {
    let (p, q) = (p.get(), q.get());
    let prod = p * q;
    if prod.is_finite() && prod > 0.0 {
        prod.sqrt()
    } else {
        p.sqrt() * q.sqrt()
    }
}

/// Logarithmic mean `(p - q) / (ln p - ln q)`, with `L(p, p) = p`.
///
/// Computed as `min * k(max / min)` which makes it exactly symmetric and
/// routes near-equal pairs through the series branch of [`k_factor`].
pub fn log_mean(p: PositiveValue, q: PositiveValue) -> f64 {
    let (hi, lo) = if p.get() >= q.get() { (p, q) } else { (q, p) };
    if hi == lo {
        return hi.get();
    }
    let ratio = hi.get() / lo.get();
    if ratio.is_finite() {
        lo.get() * k_raw(ratio)
    } else {
        (hi.get() - lo.get()) / (hi.ln() - lo.ln())
    }
}

/// `k(μ) = (μ - 1) / ln μ` for `μ != 1`, `k(1) = 1`.
pub fn k_factor(mu: PositiveValue) -> f64 {
    k_raw(mu.get())
}

fn k_raw(mu: f64) -> f64 {
    let d = mu - 1.0;
    if d == 0.0 {
        1.0
    } else if d.abs() < SERIES_THRESHOLD {
        1.0 + d * (0.5 + d * (-1.0 / 12.0 + d / 24.0))
    } else if d.abs() < 0.5 {
        d / d.ln_1p()
    } else {
        // for small mu, 1 + d cancels and ln_1p loses digits
        d / mu.ln()
    }
}

/// `fa^u * fb^(-v)` computed in log space.
pub fn mu_ratio(r: &MuRatio) -> Result<PositiveValue> {
    let log_mu = r.u * r.fa.ln() - r.v * r.fb.ln();
    let mu = log_mu.exp();
    if !mu.is_finite() || mu == 0.0 {
        return Err(Error::Range(format!(
            "ratio fa^u * fb^-v = exp({log_mu:e}) is not representable \
             (fa={}, fb={}, u={}, v={})",
            r.fa.get(),
            r.fb.get(),
            r.u,
            r.v
        )));
    }
    PositiveValue::new(mu)
}

/// `ρ^{ts} - ρ^{t^s}`, non-negative for `0 < ρ, t, s <= 1`.
///
/// Evaluated as `-ρ^{ts} · expm1(g ln ρ)` with the exponent gap
/// `g = t^s - ts = t^s (1 - s t^{1-s})`; each factor of `g` is non-negative
/// in floating point, so the sign survives rounding.
pub fn power_lemma_margin(rho: f64, t: f64, s: f64) -> Result<f64> {
    for (name, v) in [("rho", rho), ("t", t), ("s", s)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Domain(format!("{name} must lie in (0, 1], got {v}")));
        }
    }
    let ln_rho = rho.ln();
    let ln_t = t.ln();
    let t_pow_s = (s * ln_t).exp();
    let gap = t_pow_s * (1.0 - s * ((1.0 - s) * ln_t).exp());
    let base = (t * s * ln_rho).exp();
    Ok(-base * (gap * ln_rho).exp_m1())
}

/// `(tp + (1-t)q) - p^t q^{1-t}`, the arithmetic-geometric gap.
pub fn am_gm_gap(p: PositiveValue, q: PositiveValue, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("weight must lie in [0, 1], got {t}")));
    }
    if p == q || t == 0.0 || t == 1.0 {
        return Ok(0.0);
    }
    // A - G = q [t expm1(x) - expm1(t x)] with x = ln(p/q)
    let x = p.ln() - q.ln();
    let bracket = if x.abs() < 1e-2 {
        let mut sum = 0.0;
        let mut x_pow_over_fact = x;
        let mut t_pow = t;
        for n in 2..=12 {
            x_pow_over_fact *= x / n as f64;
            t_pow *= t;
            sum += (t - t_pow) * x_pow_over_fact;
        }
        sum
    } else {
        t * x.exp_m1() - (t * x).exp_m1()
    };
    Ok(q.get() * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn pv(x: f64) -> PositiveValue {
        PositiveValue::new(x).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(arithmetic_mean(4.0, 9.0), 6.5);
        assert_eq!(arithmetic_mean(3.25, 3.25), 3.25);
        assert!((arithmetic_mean(1.0, E) - 1.859141).abs() < 1e-6);
    }

    #[test]
    fn geometric_examples() {
        assert_eq!(geometric_mean(pv(4.0), pv(9.0)), 6.0);
        assert_eq!(geometric_mean(pv(0.3), pv(0.3)), 0.3);
        assert!((geometric_mean(pv(1.0), pv(E)) - 1.648721).abs() < 1e-6);
        assert!(PositiveValue::new(0.0).is_err());
        assert!(PositiveValue::new(-2.0).is_err());
        assert!(PositiveValue::new(f64::INFINITY).is_err());
    }

    #[test]
    fn log_mean_examples() {
        assert_eq!(log_mean(pv(7.5), pv(7.5)), 7.5);
        assert!((log_mean(pv(1.0), pv(E)) - (E - 1.0)).abs() < 1e-14);
        // mpmath: 6 / ln 4
        assert!((log_mean(pv(2.0), pv(8.0)) - 4.328_085_122_666_890).abs() < 1e-14);
    }

    #[test]
    fn log_mean_continuous_at_diagonal() {
        let p = 3.0;
        for rel in [1e-15, 1e-12, 1e-9, 1e-6, 9.9e-5, 1.01e-4, 1e-3] {
            let q = p * (1.0 + rel);
            let l = log_mean(pv(p), pv(q));
            // series oracle around the diagonal: L ≈ p (1 + rel/2 - rel^2/12)
            let oracle = p * (1.0 + rel / 2.0 - rel * rel / 12.0 + rel.powi(3) / 24.0);
            assert!(((l - oracle) / oracle).abs() < 1e-12, "rel={rel}: {l} vs {oracle}");
        }
    }

    #[test]
    fn k_factor_examples() {
        assert_eq!(k_factor(pv(1.0)), 1.0);
        assert!((k_factor(pv(E)) - 1.718282).abs() < 1e-6);
        assert!((k_factor(pv(1.0 + 1e-13)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_factor_series_matches_direct_at_threshold() {
        for d in [SERIES_THRESHOLD * 0.999, -SERIES_THRESHOLD * 0.999] {
            let series = k_raw(1.0 + d);
            let direct = d / d.ln_1p();
            assert!((series - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn mu_ratio_examples() {
        let c = pv(0.37);
        assert_eq!(mu_ratio(&MuRatio::new(c, c, 1.0, 1.0).unwrap()).unwrap().get(), 1.0);
        let r = MuRatio::new(pv(1.0), pv((-1.0f64).exp()), 1.0, 1.0).unwrap();
        assert!((mu_ratio(&r).unwrap().get() - E).abs() < 1e-15);
        let r = MuRatio::new(pv(0.5), pv(0.5), 0.0, 0.0).unwrap();
        assert_eq!(mu_ratio(&r).unwrap().get(), 1.0);
    }

    #[test]
    fn mu_ratio_overflow_is_range_error() {
        let r = MuRatio::new(pv(1e300), pv(1e-300), 3.0, 3.0).unwrap();
        assert!(matches!(mu_ratio(&r), Err(Error::Range(_))));
        let r = MuRatio::new(pv(1e-300), pv(1e300), 3.0, 3.0).unwrap();
        assert!(matches!(mu_ratio(&r), Err(Error::Range(_))));
        assert!(MuRatio::new(pv(1.0), pv(1.0), -1.0, 1.0).is_err());
    }

    #[test]
    fn power_lemma_examples() {
        assert_eq!(power_lemma_margin(1.0, 0.5, 0.5).unwrap(), 0.0);
        let direct = 0.5f64.powf(0.25) - 0.5f64.powf(0.5f64.sqrt());
        let m = power_lemma_margin(0.5, 0.5, 0.5).unwrap();
        assert!((m - 0.228_349_088_717_648_6).abs() < 1e-14);
        assert!((m - direct).abs() < 1e-14);
        assert_eq!(power_lemma_margin(0.9, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn power_lemma_rejects_out_of_domain() {
        assert!(power_lemma_margin(0.0, 0.5, 0.5).is_err());
        assert!(power_lemma_margin(1.1, 0.5, 0.5).is_err());
        assert!(power_lemma_margin(0.5, 0.0, 0.5).is_err());
        assert!(power_lemma_margin(0.5, 0.5, 1.5).is_err());
        assert!(power_lemma_margin(0.5, f64::NAN, 0.5).is_err());
    }

    #[test]
    fn am_gm_examples() {
        assert_eq!(am_gm_gap(pv(2.2), pv(2.2), 0.5).unwrap(), 0.0);
        assert!((am_gm_gap(pv(4.0), pv(9.0), 0.5).unwrap() - 0.5).abs() < 1e-14);
        // mpmath: (1+e)/2 - sqrt(e)
        assert!((am_gm_gap(pv(1.0), pv(E), 0.5).unwrap() - 0.210_419_643_529_394_5).abs() < 1e-14);
        assert_eq!(am_gm_gap(pv(1.0), pv(5.0), 0.0).unwrap(), 0.0);
        assert!(am_gm_gap(pv(1.0), pv(5.0), 1.5).is_err());
    }

    #[test]
    fn am_gm_series_branch_matches_direct() {
        let (p, q, t): (f64, f64, f64) = (1.009, 1.0, 0.3);
        let direct = (t * p + (1.0 - t) * q) - p.powf(t) * q.powf(1.0 - t);
        let gap = am_gm_gap(pv(p), pv(q), t).unwrap();
        assert!((gap - direct).abs() < 1e-15, "{gap} vs {direct}");
    }
}
