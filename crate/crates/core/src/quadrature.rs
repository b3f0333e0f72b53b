//! Adaptive Gauss-Kronrod quadrature.
//!
//! Each panel is integrated with the 15-point Kronrod rule; the embedded
//! 7-point Gauss rule provides the error estimate (QUADPACK scaling). The
//! panel with the largest estimated error is bisected until the global
//! estimate falls below `tol * max(1, |value|)` or the evaluation cap is hit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::FunctionSpec;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes, plus the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const EVALS_PER_PANEL: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub tol: f64,
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_evals: DEFAULT_MAX_EVALS }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParams(format!("tolerance must be > 0, got {}", self.tol)));
        }
        if self.max_evals < EVALS_PER_PANEL {
            return Err(Error::InvalidParams(format!(
                "evaluation cap must be at least {EVALS_PER_PANEL}, got {}",
                self.max_evals
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub err_est: f64,
    pub evals: usize,
    /// `false` when the evaluation cap or the floating-point resolution was
    /// reached before the tolerance; callers must treat it as a failure.
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn sample(f: &impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Singularity { abscissa: x })
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = sample(f, center)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = sample(f, center - dx)?;
        let f2 = sample(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    Ok(Panel { a, b, value: res_k * half, err })
}

/// `∫_a^b f` with the default evaluation cap.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    integrate_with(f, a, b, &QuadConfig::with_tol(tol))
}

pub fn integrate_with(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParams(format!("integration bounds need a < b, got [{a}, {b}]")));
    }
    let first = gk15(&f, a, b)?;
    let mut evals = EVALS_PER_PANEL;
    let mut value = first.value;
    let mut err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    // panels that can no longer be bisected in floating point
    let mut frozen: Vec<Panel> = Vec::new();
    let mut iterations = 0usize;

    let converged = loop {
        if err <= cfg.tol * value.abs().max(1.0) {
            break true;
        }
        if evals + 2 * EVALS_PER_PANEL > cfg.max_evals {
            break false;
        }
        let Some(worst) = heap.pop() else { break false };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            frozen.push(worst);
            continue;
        }
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        evals += 2 * EVALS_PER_PANEL;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        iterations += 1;
        // running sums drift; resynchronise now and then
        if iterations % 256 == 0 {
            value = heap.iter().chain(&frozen).map(|p| p.value).sum();
            err = heap.iter().chain(&frozen).map(|p| p.err).sum();
        }
    };

    let value: f64 = heap.iter().chain(&frozen).map(|p| p.value).sum();
    let err_est: f64 = heap.iter().chain(&frozen).map(|p| p.err).sum();
    Ok(QuadResult {
        value,
        err_est,
        evals,
        converged: converged && err_est <= cfg.tol * value.abs().max(1.0),
    })
}

/// Mean value of `f` over `[a, b]`, computed both as
/// `∫_0^1 f(ta + (1-t)b) dt` and as `(b-a)^{-1} ∫_a^b f(x) dx`.
/// Returns the second form after checking that the two agree within
/// `10 * tol`.
pub fn integrate_param(f: &FunctionSpec, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let dom = f.domain();
    if !(a < b && dom.contains(a) && dom.contains(b)) {
        return Err(Error::Domain(format!("[{a}, {b}] is not a sub-interval of {dom} for {f}")));
    }
    let t_form = integrate_with(|t| f.eval_raw(t * a + (1.0 - t) * b), 0.0, 1.0, cfg)?;
    let x_form = integrate_with(|x| f.eval_raw(x), a, b, cfg)?;
    let width = b - a;
    let mean = QuadResult {
        value: x_form.value / width,
        err_est: x_form.err_est / width,
        evals: t_form.evals + x_form.evals,
        converged: t_form.converged && x_form.converged,
    };
    if mean.converged {
        let gap = (t_form.value - mean.value).abs();
        if gap > 10.0 * cfg.tol * mean.value.abs().max(1.0) {
            return Err(Error::SelfCheck(format!(
                "t-form {} and x-form {} of the mean of {f} differ by {gap:e}",
                t_form.value, mean.value
            )));
        }
    }
    Ok(mean)
}

/// `∫_0^1 g(t) t^{s-1} (1 - t^s)^{1/s - 1} dt`, evaluated after `u = t^s` as
/// `s^{-1} ∫_0^1 g(u^{1/s}) (1-u)^{1/s-1} du`, which is free of the `t = 0`
/// singularity.
pub fn integrate_weighted_s(g: impl Fn(f64) -> f64, s: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParams(format!("s must lie in (0, 1], got {s}")));
    }
    let inv_s = 1.0 / s;
    let expo = inv_s - 1.0;
    if expo == 0.0 {
        return integrate_with(g, 0.0, 1.0, cfg);
    }
    integrate_with(|u| inv_s * g(u.powf(inv_s)) * (1.0 - u).powf(expo), 0.0, 1.0, cfg)
}
