//! Verifiers for the Hermite-Hadamard type inequality chains.
//!
//! Every verifier follows the same pattern: check the hypotheses with the
//! [`hypothesis_gate`], compute every member of the chain to quadrature
//! accuracy, and grade the chain only if the gate passed. A refuted gate
//! still carries the computed chain for inspection.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classcheck::{hypothesis_gate, ConvexityClass, GateReport, Hypothesis};
use crate::error::{Error, Result};
use crate::funcmodel::{FunctionSpec, Interval};
use crate::means::{self, k_factor, log_mean, mu_ratio, pow_pos, MuRatio, PositiveValue};
use crate::quadrature::{
    integrate_param, integrate_weighted_s, integrate_with, QuadConfig, QuadResult, DEFAULT_MAX_EVALS,
    DEFAULT_TOL,
};

/// Absolute floor added to the pass threshold `-(10 tol + PASS_FLOOR)`.
pub const PASS_FLOOR: f64 = 1e-12;
/// Agreement required between a corollary's L-form and its K-form.
pub const COROLLARY_RTOL: f64 = 1e-10;
/// Tolerance on `1/p + 1/q = 1` and `α + β = 1`.
const CONJUGATE_RTOL: f64 = 1e-12;

pub const DEFAULT_BUDGET: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CorollaryVariant {
    Product,
    Young,
    Holder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    Hh,
    DmGeometric,
    DmChain,
    Pachpatte,
    FirstMidpoint,
    FirstHolder,
    SecondUpper,
    SecondK,
    ProductK,
    YoungK,
    HolderK,
    CorollaryL(CorollaryVariant),
}

impl TheoremId {
    pub const ALL: [TheoremId; 14] = [
        TheoremId::Hh,
        TheoremId::DmGeometric,
        TheoremId::DmChain,
        TheoremId::Pachpatte,
        TheoremId::FirstMidpoint,
        TheoremId::FirstHolder,
        TheoremId::SecondUpper,
        TheoremId::SecondK,
        TheoremId::ProductK,
        TheoremId::YoungK,
        TheoremId::HolderK,
        TheoremId::CorollaryL(CorollaryVariant::Product),
        TheoremId::CorollaryL(CorollaryVariant::Young),
        TheoremId::CorollaryL(CorollaryVariant::Holder),
    ];

    pub fn two_functions(self) -> bool {
        matches!(
            self,
            TheoremId::Pachpatte
                | TheoremId::ProductK
                | TheoremId::YoungK
                | TheoremId::HolderK
                | TheoremId::CorollaryL(_)
        )
    }

    pub fn uses_s(self) -> bool {
        matches!(
            self,
            TheoremId::FirstMidpoint
                | TheoremId::FirstHolder
                | TheoremId::SecondUpper
                | TheoremId::SecondK
                | TheoremId::ProductK
                | TheoremId::YoungK
                | TheoremId::HolderK
        )
    }

    pub fn uses_alpha(self) -> bool {
        matches!(self, TheoremId::YoungK | TheoremId::CorollaryL(CorollaryVariant::Young))
    }

    pub fn uses_pq(self) -> bool {
        matches!(
            self,
            TheoremId::FirstHolder | TheoremId::HolderK | TheoremId::CorollaryL(CorollaryVariant::Holder)
        )
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TheoremId::Hh => "hh",
            TheoremId::DmGeometric => "dm-geometric",
            TheoremId::DmChain => "dm-chain",
            TheoremId::Pachpatte => "pachpatte",
            TheoremId::FirstMidpoint => "first-midpoint",
            TheoremId::FirstHolder => "first-holder",
            TheoremId::SecondUpper => "second-upper",
            TheoremId::SecondK => "second-K",
            TheoremId::ProductK => "product-K",
            TheoremId::YoungK => "young-K",
            TheoremId::HolderK => "holder-K",
            TheoremId::CorollaryL(CorollaryVariant::Product) => "corollary-L:product",
            TheoremId::CorollaryL(CorollaryVariant::Young) => "corollary-L:young",
            TheoremId::CorollaryL(CorollaryVariant::Holder) => "corollary-L:holder",
        };
        f.write_str(s)
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.to_string() == s.trim())
            .ok_or_else(|| Error::InvalidParams(format!("unknown theorem id `{s}`")))
    }
}

impl Serialize for TheoremId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TheoremId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Interval, exponents and numerical settings of one verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub interval: Interval,
    pub s: f64,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub tol: f64,
    pub max_evals: usize,
    /// Falsifier samples per gated class.
    pub budget: usize,
    pub seed: u64,
}

impl TheoremParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Ok(Self {
            interval: Interval::new(a, b)?,
            s: 1.0,
            p: None,
            q: None,
            alpha: None,
            beta: None,
            tol: DEFAULT_TOL,
            max_evals: DEFAULT_MAX_EVALS,
            budget: DEFAULT_BUDGET,
            seed: DEFAULT_SEED,
        })
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    /// Either exponent may be omitted; it is then derived from the other.
    pub fn with_pq(mut self, p: Option<f64>, q: Option<f64>) -> Self {
        self.p = p;
        self.q = q;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_budget(mut self, budget: usize, seed: u64) -> Self {
        self.budget = budget;
        self.seed = seed;
        self
    }

    pub fn a(&self) -> f64 {
        self.interval.lo
    }

    pub fn b(&self) -> f64 {
        self.interval.hi
    }

    pub fn quad(&self) -> QuadConfig {
        QuadConfig { tol: self.tol, max_evals: self.max_evals }
    }

    /// Completes and checks the parameters `id` needs; drops the rest.
    pub fn normalized_for(&self, id: TheoremId) -> Result<TheoremParams> {
        let bad = |msg: String| Err(Error::InvalidParams(format!("{id}: {msg}")));
        let mut out = *self;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.budget == 0 {
            return bad("falsifier budget must be at least 1".into());
        }
        if id.uses_s() {
            if !(self.s > 0.0 && self.s <= 1.0) {
                return bad(format!("s must lie in (0, 1], got {}", self.s));
            }
        } else {
            out.s = 1.0;
        }
        if id.uses_pq() {
            let (p, q) = match (self.p, self.q) {
                (Some(p), Some(q)) => (p, q),
                (Some(p), None) => (p, p / (p - 1.0)),
                (None, Some(q)) => (q / (q - 1.0), q),
                (None, None) => return bad("needs --p and/or --q".into()),
            };
            if !(p.is_finite() && q.is_finite()) || p == 0.0 || q == 0.0 {
                return bad(format!("exponents must be finite and non-zero, got p={p}, q={q}"));
            }
            if (1.0 / p + 1.0 / q - 1.0).abs() > CONJUGATE_RTOL {
                return bad(format!("1/p + 1/q must equal 1, got p={p}, q={q}"));
            }
            let negative_pattern = (p < 0.0 && q > 0.0 && q < 1.0) || (q < 0.0 && p > 0.0 && p < 1.0);
            match id {
                TheoremId::FirstHolder if !negative_pattern => {
                    return bad(format!("needs exactly one negative exponent, got p={p}, q={q}"))
                }
                TheoremId::HolderK | TheoremId::CorollaryL(_) if !(p > 1.0 && q > 1.0) => {
                    return bad(format!("needs p, q > 1, got p={p}, q={q}"))
                }
                _ => {}
            }
            out.p = Some(p);
            out.q = Some(q);
        } else {
            out.p = None;
            out.q = None;
        }
        if id.uses_alpha() {
            let (alpha, beta) = match (self.alpha, self.beta) {
                (Some(a), Some(b)) => (a, b),
                (Some(a), None) => (a, 1.0 - a),
                (None, Some(b)) => (1.0 - b, b),
                (None, None) => return bad("needs --alpha".into()),
            };
            if !(alpha > 0.0 && beta > 0.0) || (alpha + beta - 1.0).abs() > CONJUGATE_RTOL {
                return bad(format!("needs α, β > 0 with α + β = 1, got α={alpha}, β={beta}"));
            }
            out.alpha = Some(alpha);
            out.beta = Some(beta);
        } else {
            out.alpha = None;
            out.beta = None;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisRefuted,
    Divergent,
    DomainError,
}

impl Status {
    pub const ALL: [Status; 5] = [
        Status::Pass,
        Status::Fail,
        Status::HypothesisRefuted,
        Status::Divergent,
        Status::DomainError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::HypothesisRefuted => "hypothesis-refuted",
            Status::Divergent => "divergent",
            Status::DomainError => "domain-error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadStats {
    pub tol: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: TheoremId,
    pub params: TheoremParams,
    pub functions: Vec<FunctionSpec>,
    /// Members of the inequality chain, smallest claimed first.
    pub chain: Vec<NamedValue>,
    /// `chain[i+1] - chain[i]`.
    pub slacks: Vec<NamedValue>,
    pub min_slack: Option<f64>,
    pub status: Status,
    pub gate: GateReport,
    pub quadrature: QuadStats,
    /// Intermediate quantities (Hölder factors, ratios, cross-checks).
    pub aux: Vec<NamedValue>,
    pub diagnostic: Option<String>,
}

impl TheoremReport {
    pub fn chain_values(&self) -> Vec<f64> {
        self.chain.iter().map(|c| c.value).collect()
    }
}

/// `min_slack >= -(10 tol + 1e-12)`.
pub fn pass_threshold(tol: f64) -> f64 {
    -(10.0 * tol + PASS_FLOOR)
}

// ---------------------------------------------------------------------------
// chain computation

enum ChainError {
    Domain(String),
    Divergent(String),
}

impl From<Error> for ChainError {
    fn from(e: Error) -> Self {
        match e {
            Error::Singularity { .. } | Error::SelfCheck(_) => ChainError::Divergent(e.to_string()),
            other => ChainError::Domain(other.to_string()),
        }
    }
}

type ChainResult<T> = std::result::Result<T, ChainError>;

struct Ctx {
    cfg: QuadConfig,
    evals: usize,
    converged: bool,
    chain: Vec<NamedValue>,
    aux: Vec<NamedValue>,
    diagnostic: Option<String>,
}

impl Ctx {
    fn new(cfg: QuadConfig) -> Self {
        Self { cfg, evals: 0, converged: true, chain: Vec::new(), aux: Vec::new(), diagnostic: None }
    }

    fn record(&mut self, r: QuadResult) -> f64 {
        self.evals += r.evals;
        self.converged &= r.converged;
        r.value
    }

    fn push(&mut self, name: &str, value: f64) {
        self.chain.push(NamedValue { name: name.into(), value });
    }

    fn aux(&mut self, name: &str, value: f64) {
        self.aux.push(NamedValue { name: name.into(), value });
    }

    fn mean(&mut self, f: &FunctionSpec, iv: Interval) -> ChainResult<f64> {
        let r = integrate_param(f, iv.lo, iv.hi, &self.cfg)?;
        Ok(self.record(r))
    }

    /// `(b-a)^{-1} ∫_a^b h`.
    fn mean_of(&mut self, h: impl Fn(f64) -> f64, iv: Interval) -> ChainResult<f64> {
        let r = integrate_with(h, iv.lo, iv.hi, &self.cfg)?;
        Ok(self.record(r) / iv.width())
    }

    fn unit_integral(&mut self, h: impl Fn(f64) -> f64) -> ChainResult<f64> {
        let r = integrate_with(h, 0.0, 1.0, &self.cfg)?;
        Ok(self.record(r))
    }
}

fn eval(f: &FunctionSpec, x: f64) -> ChainResult<f64> {
    Ok(f.evaluate(x)?)
}

fn positive(f: &FunctionSpec, x: f64) -> ChainResult<PositiveValue> {
    Ok(PositiveValue::new(f.evaluate(x)?)
        .map_err(|_| Error::Domain(format!("{f} vanishes at x={x}")))?)
}

fn k_of(fa: PositiveValue, fb: PositiveValue, u: f64, v: f64) -> ChainResult<f64> {
    Ok(k_factor(mu_ratio(&MuRatio::new(fa, fb, u, v)?)?))
}

fn pos(v: f64) -> ChainResult<PositiveValue> {
    Ok(PositiveValue::new(v)?)
}

/// Mean of `G(f(x), f(a+b-x))` over `[a, b]`.
fn mean_reflected_gm(ctx: &mut Ctx, f: &FunctionSpec, iv: Interval) -> ChainResult<f64> {
    let (a, b) = (iv.lo, iv.hi);
    ctx.mean_of(|x| (f.eval_raw(x) * f.eval_raw(a + b - x)).sqrt(), iv)
}

fn endpoints_in_domain(fs: &[&FunctionSpec], iv: Interval) -> ChainResult<()> {
    for f in fs {
        if !f.domain().contains_interval(&iv) {
            return Err(ChainError::Domain(format!(
                "[{}, {}] is not inside the domain {} of {f}",
                iv.lo,
                iv.hi,
                f.domain()
            )));
        }
    }
    Ok(())
}

fn k_form_product(f: &FunctionSpec, g: &FunctionSpec, iv: Interval, s: f64) -> ChainResult<f64> {
    let fga = pos(eval(f, iv.lo)? * eval(g, iv.lo)?)?;
    let fgb = pos(eval(f, iv.hi)? * eval(g, iv.hi)?)?;
    Ok(pow_pos(fgb, s) * k_of(fga, fgb, s, s)?)
}

fn k_form_young(f: &FunctionSpec, g: &FunctionSpec, iv: Interval, s: f64, alpha: f64, beta: f64) -> ChainResult<f64> {
    let (fa, fb) = (positive(f, iv.lo)?, positive(f, iv.hi)?);
    let (ga, gb) = (positive(g, iv.lo)?, positive(g, iv.hi)?);
    let (ua, ub) = (s / alpha, s / beta);
    Ok(alpha * pow_pos(fb, ua) * k_of(fa, fb, ua, ua)? + beta * pow_pos(gb, ub) * k_of(ga, gb, ub, ub)?)
}

fn k_form_holder(f: &FunctionSpec, g: &FunctionSpec, iv: Interval, s: f64, p: f64, q: f64) -> ChainResult<f64> {
    let (fa, fb) = (positive(f, iv.lo)?, positive(f, iv.hi)?);
    let (ga, gb) = (positive(g, iv.lo)?, positive(g, iv.hi)?);
    let fgb = pos(fb.get() * gb.get())?;
    let kw = pos(k_of(fa, fb, s * p, s * p)?)?;
    let kl = pos(k_of(ga, gb, s * q, s * q)?)?;
    Ok(pow_pos(fgb, s) * pow_pos(kw, 1.0 / p) * pow_pos(kl, 1.0 / q))
}

fn compute_chain(
    id: TheoremId,
    f: &FunctionSpec,
    g: Option<&FunctionSpec>,
    params: &TheoremParams,
    ctx: &mut Ctx,
) -> ChainResult<()> {
    let iv = params.interval;
    let (a, b, s) = (iv.lo, iv.hi, params.s);
    let mut fs = vec![f];
    fs.extend(g);
    endpoints_in_domain(&fs, iv)?;
    let g = || g.expect("second function checked by verify");

    match id {
        TheoremId::Hh => {
            let mid = eval(f, means::arithmetic_mean(a, b))?;
            let mean = ctx.mean(f, iv)?;
            let ends = means::arithmetic_mean(eval(f, a)?, eval(f, b)?);
            ctx.push("f((a+b)/2)", mid);
            ctx.push("mean f", mean);
            ctx.push("(f(a)+f(b))/2", ends);
        }
        TheoremId::DmGeometric => {
            let mid = eval(f, means::arithmetic_mean(a, b))?;
            let gm = mean_reflected_gm(ctx, f, iv)?;
            let ends = means::geometric_mean(positive(f, a)?, positive(f, b)?);
            ctx.push("f(A(a,b))", mid);
            ctx.push("mean G(f(x),f(a+b-x))", gm);
            ctx.push("G(f(a),f(b))", ends);
        }
        TheoremId::DmChain => {
            let (fa, fb) = (positive(f, a)?, positive(f, b)?);
            let mid = eval(f, means::arithmetic_mean(a, b))?;
            let log_mean_f = ctx.mean_of(|x| f.ln_raw(x), iv)?;
            let gm = mean_reflected_gm(ctx, f, iv)?;
            let mean = ctx.mean(f, iv)?;
            ctx.push("f((a+b)/2)", mid);
            ctx.push("exp(mean ln f)", log_mean_f.exp());
            ctx.push("mean G(f(x),f(a+b-x))", gm);
            ctx.push("mean f", mean);
            ctx.push("L(f(a),f(b))", log_mean(fa, fb));
            ctx.push("(f(a)+f(b))/2", means::arithmetic_mean(fa.get(), fb.get()));
        }
        TheoremId::Pachpatte => {
            let g = g();
            let fg = FunctionSpec::product(f, g)?;
            let lhs = 4.0 * ctx.mean(&fg, iv)?;
            let (fa, fb) = (positive(f, a)?, positive(f, b)?);
            let (ga, gb) = (positive(g, a)?, positive(g, b)?);
            let rhs = (fa.get() + fb.get()) * log_mean(fa, fb) + (ga.get() + gb.get()) * log_mean(ga, gb);
            ctx.push("4 mean fg", lhs);
            ctx.push("[f(a)+f(b)]L(f(a),f(b)) + [g(a)+g(b)]L(g(a),g(b))", rhs);
        }
        TheoremId::FirstMidpoint => {
            let point = (a + b) / 2f64.powf(1.0 / s);
            if f.domain().snap(point).is_none() {
                return Err(ChainError::Domain(format!(
                    "(a+b)/2^(1/s) = {point} lies outside the domain {} of {f}",
                    f.domain()
                )));
            }
            let lhs = eval(f, point)?;
            let gm = mean_reflected_gm(ctx, f, iv)?;
            ctx.push("f((a+b)/2^(1/s))", lhs);
            ctx.push("mean G(f(x),f(a+b-x))", gm);
        }
        TheoremId::FirstHolder => {
            let (p, q) = (params.p.expect("normalized"), params.q.expect("normalized"));
            let dom = f.domain();
            let left_domain = Cell::new(None::<f64>);
            // F(t) = f(t a + (1 - t^s)^{1/s} b), as ln F
            let ln_big_f = |t: f64| {
                let x = t * a + (1.0 - t.powf(s)).powf(1.0 / s) * b;
                match dom.snap(x) {
                    Some(x) => f.ln_raw(x),
                    None => {
                        left_domain.set(Some(x));
                        f64::NAN
                    }
                }
            };
            // ln w(t) = (1/s - 1) ln(1 - t^s) + (s - 1) ln t
            let ln_w = |t: f64| {
                let e1 = 1.0 / s - 1.0;
                let e2 = s - 1.0;
                let mut acc = 0.0;
                if e1 != 0.0 {
                    acc += e1 * (1.0 - t.powf(s)).ln();
                }
                if e2 != 0.0 {
                    acc += e2 * t.ln();
                }
                acc
            };
            let cfg = ctx.cfg;
            let factors = (|| -> Result<(QuadResult, QuadResult)> {
                let r1 = integrate_with(|t| (p * ln_big_f(t)).exp(), 0.0, 1.0, &cfg)?;
                // (F w)^q = F^q w^{q-1} · w, the trailing w is absorbed by the substitution
                let r2 = integrate_weighted_s(|t| (q * ln_big_f(t) + (q - 1.0) * ln_w(t)).exp(), s, &cfg)?;
                Ok((r1, r2))
            })();
            if let Some(x) = left_domain.get() {
                return Err(ChainError::Domain(format!(
                    "t a + (1-t^s)^(1/s) b reaches {x}, outside the domain {dom} of {f}"
                )));
            }
            let (r1, r2) = factors?;
            let i1 = ctx.record(r1);
            let i2 = ctx.record(r2);
            let factor_p = (i1.ln() / p).exp();
            let factor_q = (i2.ln() / q).exp();
            ctx.aux("(int F^p)^(1/p)", factor_p);
            ctx.aux("(int (F w)^q)^(1/q)", factor_q);
            ctx.push("(int F^p)^(1/p) (int (F w)^q)^(1/q)", factor_p * factor_q);
            ctx.push("f(a)f(b)", eval(f, a)? * eval(f, b)?);
        }
        TheoremId::SecondUpper | TheoremId::SecondK => {
            let (fa, fb) = (positive(f, a)?, positive(f, b)?);
            let mean = ctx.mean(f, iv)?;
            let (la, lb) = (fa.ln(), fb.ln());
            let upper = ctx.unit_integral(|t| (t.powf(s) * la + (1.0 - t).powf(s) * lb).exp())?;
            ctx.push("mean f", mean);
            ctx.push("int f(a)^(t^s) f(b)^((1-t)^s) dt", upper);
            if id == TheoremId::SecondK {
                let mu = mu_ratio(&MuRatio::new(fa, fb, s, s)?)?;
                ctx.aux("mu(s,s)", mu.get());
                ctx.aux("k(mu(s,s))", k_factor(mu));
                ctx.push("f(b)^s k(mu(s,s))", pow_pos(fb, s) * k_factor(mu));
            }
        }
        TheoremId::ProductK => {
            let fg = FunctionSpec::product(f, g())?;
            let mean = ctx.mean(&fg, iv)?;
            ctx.push("mean fg", mean);
            ctx.push("[f(b)g(b)]^s k(eta(s,s))", k_form_product(f, g(), iv, s)?);
        }
        TheoremId::YoungK => {
            let (alpha, beta) = (params.alpha.expect("normalized"), params.beta.expect("normalized"));
            let fg = FunctionSpec::product(f, g())?;
            let mean = ctx.mean(&fg, iv)?;
            ctx.push("mean fg", mean);
            ctx.push(
                "alpha f(b)^(s/alpha) k(omega) + beta g(b)^(s/beta) k(ell)",
                k_form_young(f, g(), iv, s, alpha, beta)?,
            );
        }
        TheoremId::HolderK => {
            let (p, q) = (params.p.expect("normalized"), params.q.expect("normalized"));
            let fg = FunctionSpec::product(f, g())?;
            let mean = ctx.mean(&fg, iv)?;
            ctx.push("mean fg", mean);
            ctx.push(
                "[f(b)g(b)]^s k(omega(sp,sp))^(1/p) k(ell(sq,sq))^(1/q)",
                k_form_holder(f, g(), iv, s, p, q)?,
            );
        }
        TheoremId::CorollaryL(variant) => {
            let g = g();
            let fg = FunctionSpec::product(f, g)?;
            let mean = ctx.mean(&fg, iv)?;
            let (fa, fb) = (positive(f, a)?, positive(f, b)?);
            let (ga, gb) = (positive(g, a)?, positive(g, b)?);
            let (name, l_form, k_form) = match variant {
                CorollaryVariant::Product => (
                    "L(f(a)g(a), f(b)g(b))",
                    log_mean(pos(fa.get() * ga.get())?, pos(fb.get() * gb.get())?),
                    k_form_product(f, g, iv, 1.0)?,
                ),
                CorollaryVariant::Young => {
                    let (alpha, beta) = (params.alpha.expect("normalized"), params.beta.expect("normalized"));
                    let l = alpha * log_mean(pos(pow_pos(fa, 1.0 / alpha))?, pos(pow_pos(fb, 1.0 / alpha))?)
                        + beta * log_mean(pos(pow_pos(ga, 1.0 / beta))?, pos(pow_pos(gb, 1.0 / beta))?);
                    (
                        "alpha L(f(a)^(1/alpha), f(b)^(1/alpha)) + beta L(g(a)^(1/beta), g(b)^(1/beta))",
                        l,
                        k_form_young(f, g, iv, 1.0, alpha, beta)?,
                    )
                }
                CorollaryVariant::Holder => {
                    let (p, q) = (params.p.expect("normalized"), params.q.expect("normalized"));
                    let lf = pos(log_mean(pos(pow_pos(fa, p))?, pos(pow_pos(fb, p))?))?;
                    let lg = pos(log_mean(pos(pow_pos(ga, q))?, pos(pow_pos(gb, q))?))?;
                    (
                        "L(f(a)^p, f(b)^p)^(1/p) L(g(a)^q, g(b)^q)^(1/q)",
                        pow_pos(lf, 1.0 / p) * pow_pos(lg, 1.0 / q),
                        k_form_holder(f, g, iv, 1.0, p, q)?,
                    )
                }
            };
            let gap = (l_form - k_form).abs();
            ctx.aux("K-form at s=1", k_form);
            ctx.aux("|L-form - K-form|", gap);
            if gap > COROLLARY_RTOL * k_form.abs().max(1.0) {
                ctx.diagnostic = Some(format!(
                    "L-form {l_form} and K-form {k_form} disagree by {gap:e}"
                ));
            }
            ctx.push("mean fg", mean);
            ctx.push(name, l_form);
        }
    }
    Ok(())
}

fn hypotheses(id: TheoremId, params: &TheoremParams) -> Vec<Hypothesis> {
    use Hypothesis::*;
    let s = params.s;
    let ends = vec![params.a(), params.b()];
    match id {
        TheoremId::Hh => vec![Member(ConvexityClass::Convex)],
        TheoremId::DmGeometric | TheoremId::DmChain | TheoremId::Pachpatte | TheoremId::CorollaryL(_) => {
            vec![Member(ConvexityClass::LogConvex)]
        }
        TheoremId::FirstMidpoint | TheoremId::FirstHolder => {
            vec![Member(ConvexityClass::SLogFirst { s }), Nondecreasing]
        }
        TheoremId::SecondUpper | TheoremId::ProductK => vec![Member(ConvexityClass::SLogSecond { s })],
        TheoremId::SecondK | TheoremId::YoungK | TheoremId::HolderK => {
            vec![Member(ConvexityClass::SLogSecond { s }), AtMostOne(ends)]
        }
    }
}

fn run_gate(id: TheoremId, f: &FunctionSpec, g: Option<&FunctionSpec>, params: &TheoremParams) -> GateReport {
    let hyps = hypotheses(id, params);
    let mut gate = hypothesis_gate(&hyps, f, params.budget, params.seed);
    if let Some(g) = g {
        gate.extend(hypothesis_gate(&hyps, g, params.budget, params.seed.wrapping_add(1)));
        if id == TheoremId::ProductK {
            let ends = Hypothesis::AtMostOne(vec![params.a(), params.b()]);
            if let Ok(fg) = FunctionSpec::product(f, g) {
                gate.extend(hypothesis_gate(&[ends], &fg, params.budget, params.seed));
            }
        }
    }
    gate
}

/// Gates, computes and grades one theorem.
///
/// Invalid parameters are an `Err`; everything that goes wrong numerically
/// is reported through [`Status`].
pub fn verify(
    id: TheoremId,
    f: &FunctionSpec,
    g: Option<&FunctionSpec>,
    params: &TheoremParams,
) -> Result<TheoremReport> {
    let params = params.normalized_for(id)?;
    let g = if id.two_functions() {
        Some(g.ok_or_else(|| Error::InvalidParams(format!("{id} needs a second function")))?)
    } else {
        None
    };
    let gate = run_gate(id, f, g, &params);

    let mut ctx = Ctx::new(params.quad());
    let outcome = compute_chain(id, f, g, &params, &mut ctx);

    let slacks: Vec<NamedValue> = ctx
        .chain
        .windows(2)
        .map(|w| NamedValue {
            name: format!("{} <= {}", w[0].name, w[1].name),
            value: w[1].value - w[0].value,
        })
        .collect();
    let min_slack = slacks
        .iter()
        .map(|s| s.value)
        .reduce(f64::min)
        .filter(|m| m.is_finite());

    let mut diagnostic = ctx.diagnostic.take();
    let status = if !gate.passed() {
        Status::HypothesisRefuted
    } else {
        match outcome {
            Err(ChainError::Domain(msg)) => {
                diagnostic = Some(msg);
                Status::DomainError
            }
            Err(ChainError::Divergent(msg)) => {
                diagnostic = Some(msg);
                Status::Divergent
            }
            Ok(()) if !ctx.converged => {
                diagnostic = Some("quadrature did not reach the requested tolerance".into());
                Status::Divergent
            }
            Ok(()) => match min_slack {
                Some(m) if m >= pass_threshold(params.tol) && diagnostic.is_none() => Status::Pass,
                Some(_) => Status::Fail,
                None => {
                    diagnostic.get_or_insert_with(|| "chain contains non-finite values".into());
                    Status::Divergent
                }
            },
        }
    };

    let mut functions = vec![f.clone()];
    functions.extend(g.cloned());
    Ok(TheoremReport {
        theorem: id,
        params,
        functions,
        chain: ctx.chain,
        slacks,
        min_slack,
        status,
        gate,
        quadrature: QuadStats { tol: params.tol, evals: ctx.evals, converged: ctx.converged },
        aux: ctx.aux,
        diagnostic,
    })
}

pub fn verify_hh(f: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::Hh, f, None, params)
}

pub fn verify_dm_geometric(f: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::DmGeometric, f, None, params)
}

pub fn verify_dm_chain(f: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::DmChain, f, None, params)
}

pub fn verify_pachpatte(f: &FunctionSpec, g: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::Pachpatte, f, Some(g), params)
}

pub fn verify_first_midpoint(f: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::FirstMidpoint, f, None, params)
}

pub fn verify_first_holder(f: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::FirstHolder, f, None, params)
}

pub fn verify_second_upper(f: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::SecondUpper, f, None, params)
}

pub fn verify_second_k(f: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::SecondK, f, None, params)
}

pub fn verify_product_k(f: &FunctionSpec, g: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::ProductK, f, Some(g), params)
}

pub fn verify_young_k(f: &FunctionSpec, g: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::YoungK, f, Some(g), params)
}

pub fn verify_holder_k(f: &FunctionSpec, g: &FunctionSpec, params: &TheoremParams) -> Result<TheoremReport> {
    verify(TheoremId::HolderK, f, Some(g), params)
}

pub fn verify_corollary_l(
    variant: CorollaryVariant,
    f: &FunctionSpec,
    g: &FunctionSpec,
    params: &TheoremParams,
) -> Result<TheoremReport> {
    verify(TheoremId::CorollaryL(variant), f, Some(g), params)
}
