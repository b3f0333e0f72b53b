//! Defining inequalities of the convexity classes and a seeded search for
//! counterexamples.
//!
//! Every class is checked through [`condition`], which returns the two sides
//! of its defining inequality at a [`SamplePoint`]. The margin is
//! `rhs - lhs`; a point violates the class when the margin drops below
//! `-VIOLATION_RTOL * max(1, |lhs|)`.
//!
//! Multiplicative classes are evaluated in log space: both sides are formed
//! as `ln f` combinations and exponentiated only for reporting.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::funcmodel::FunctionSpec;

pub const VIOLATION_RTOL: f64 = 1e-9;

/// Outer sweeps of the coordinate-wise refinement.
pub const REFINE_STEPS: usize = 20;
/// Golden-section iterations per coordinate and sweep.
const GOLDEN_ITERS: usize = 40;
/// Grid size of the monotonicity probe.
pub const MONOTONE_GRID: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvexityClass {
    Convex,
    SConvexFirst { s: f64 },
    SConvexSecond { s: f64 },
    LogConvex,
    MLogConvex { m: f64 },
    AlphaMLogConvex { alpha: f64, m: f64 },
    SLogFirst { s: f64 },
    SLogSecond { s: f64 },
}

fn unit_param(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParams(format!("{name} must lie in (0, 1], got {v}")))
    }
}

impl ConvexityClass {
    /// Rejects parameters outside `(0, 1]`.
    pub fn validate(self) -> Result<Self> {
        match self {
            Self::Convex | Self::LogConvex => {}
            Self::SConvexFirst { s }
            | Self::SConvexSecond { s }
            | Self::SLogFirst { s }
            | Self::SLogSecond { s } => {
                unit_param("s", s)?;
            }
            Self::MLogConvex { m } => {
                unit_param("m", m)?;
            }
            Self::AlphaMLogConvex { alpha, m } => {
                unit_param("alpha", alpha)?;
                unit_param("m", m)?;
            }
        }
        Ok(self)
    }

    /// First-sense kinds sample `α` and derive `β = (1 - α^s)^{1/s}`.
    pub fn is_first_sense(&self) -> bool {
        matches!(self, Self::SConvexFirst { .. } | Self::SLogFirst { .. })
    }

    pub fn is_multiplicative(&self) -> bool {
        !matches!(
            self,
            Self::Convex | Self::SConvexFirst { .. } | Self::SConvexSecond { .. }
        )
    }

    /// Class identifiers accepted by the CLI.
    pub const IDS: [&'static str; 8] = [
        "convex",
        "s-convex-1:s=<v>",
        "s-convex-2:s=<v>",
        "log-convex",
        "m-log:m=<v>",
        "am-log:alpha=<v>,m=<v>",
        "s-log-1:s=<v>",
        "s-log-2:s=<v>",
    ];
}

impl fmt::Display for ConvexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Convex => write!(f, "convex"),
            Self::SConvexFirst { s } => write!(f, "s-convex-1:s={s}"),
            Self::SConvexSecond { s } => write!(f, "s-convex-2:s={s}"),
            Self::LogConvex => write!(f, "log-convex"),
            Self::MLogConvex { m } => write!(f, "m-log:m={m}"),
            Self::AlphaMLogConvex { alpha, m } => write!(f, "am-log:alpha={alpha},m={m}"),
            Self::SLogFirst { s } => write!(f, "s-log-1:s={s}"),
            Self::SLogSecond { s } => write!(f, "s-log-2:s={s}"),
        }
    }
}

impl FromStr for ConvexityClass {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParams(format!("class `{text}`: {msg}"));
        let (kind, rest) = match text.split_once(':') {
            Some((k, r)) => (k.trim(), Some(r)),
            None => (text.trim(), None),
        };
        let mut params: Vec<(&str, f64)> = Vec::new();
        if let Some(rest) = rest {
            for item in rest.split(',') {
                let (k, v) = item.split_once('=').ok_or_else(|| bad("expected name=value"))?;
                let v: f64 = v.trim().parse().map_err(|_| bad("parameter is not a number"))?;
                params.push((k.trim(), v));
            }
        }
        let expect = |names: &[&str]| -> Result<Vec<f64>> {
            if params.len() != names.len() {
                return Err(bad(&format!("expected parameters {names:?}")));
            }
            names
                .iter()
                .map(|n| {
                    params
                        .iter()
                        .find(|(k, _)| k == n)
                        .map(|(_, v)| *v)
                        .ok_or_else(|| bad(&format!("missing parameter `{n}`")))
                })
                .collect()
        };
        let class = match kind {
            "convex" => {
                expect(&[])?;
                Self::Convex
            }
            "log-convex" => {
                expect(&[])?;
                Self::LogConvex
            }
            "s-convex-1" => Self::SConvexFirst { s: expect(&["s"])?[0] },
            "s-convex-2" => Self::SConvexSecond { s: expect(&["s"])?[0] },
            "m-log" => Self::MLogConvex { m: expect(&["m"])?[0] },
            "am-log" => {
                let v = expect(&["alpha", "m"])?;
                Self::AlphaMLogConvex { alpha: v[0], m: v[1] }
            }
            "s-log-1" => Self::SLogFirst { s: expect(&["s"])?[0] },
            "s-log-2" => Self::SLogSecond { s: expect(&["s"])?[0] },
            _ => return Err(bad("unknown class")),
        };
        class.validate()
    }
}

impl Serialize for ConvexityClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConvexityClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A point tuple of a defining inequality. `weight` is `t`, or `α` for the
/// first-sense classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Which condition failed: a class id, `nondecreasing` or `f(x)<=1`.
    pub condition: String,
    pub point: SamplePoint,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Both sides of a defining inequality at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl Condition {
    pub fn is_violation(&self) -> bool {
        is_violation(self.lhs, self.margin)
    }
}

pub fn is_violation(lhs: f64, margin: f64) -> bool {
    margin < -VIOLATION_RTOL * lhs.abs().max(1.0)
}

/// `w * ln v` with the convention `0 * ln 0 = 0` (i.e. `0^0 = 1`).
#[inline]
fn weighted_log(w: f64, ln_v: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * ln_v
    }
}

fn from_logs(ln_lhs: f64, ln_rhs: f64) -> Condition {
    let lhs = ln_lhs.exp();
    let rhs = ln_rhs.exp();
    let mut margin = rhs - lhs;
    if !margin.is_finite() {
        // both sides overflowed; keep the sign from log space
        margin = (ln_rhs - ln_lhs).signum() * f64::INFINITY;
    }
    Condition { lhs, rhs, margin }
}

/// Evaluates the defining inequality of `cls` for `f` at `p`.
pub fn condition(cls: &ConvexityClass, f: &FunctionSpec, p: &SamplePoint) -> Result<Condition> {
    let dom = f.domain();
    if !dom.contains(p.x) || !dom.contains(p.y) {
        return Err(Error::Domain(format!(
            "sample point x={}, y={} outside {}",
            p.x, p.y, dom
        )));
    }
    let w = p.weight;
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain(format!("weight {w} outside [0, 1]")));
    }
    let (x, y) = (p.x, p.y);
    let cond = match *cls {
        ConvexityClass::Convex => {
            let z = w * x + (1.0 - w) * y;
            let lhs = f.evaluate(z)?;
            let rhs = w * f.evaluate(x)? + (1.0 - w) * f.evaluate(y)?;
            Condition { lhs, rhs, margin: rhs - lhs }
        }
        ConvexityClass::SConvexFirst { s } => {
            let a_s = w.powf(s);
            let beta = (1.0 - a_s).powf(1.0 / s);
            let lhs = f.evaluate(w * x + beta * y)?;
            let rhs = a_s * f.evaluate(x)? + (1.0 - a_s) * f.evaluate(y)?;
            Condition { lhs, rhs, margin: rhs - lhs }
        }
        ConvexityClass::SConvexSecond { s } => {
            let z = w * x + (1.0 - w) * y;
            let lhs = f.evaluate(z)?;
            let rhs = w.powf(s) * f.evaluate(x)? + (1.0 - w).powf(s) * f.evaluate(y)?;
            Condition { lhs, rhs, margin: rhs - lhs }
        }
        ConvexityClass::LogConvex => {
            let z = w * x + (1.0 - w) * y;
            let ln_rhs =
                weighted_log(w, f.ln_evaluate(x)?) + weighted_log(1.0 - w, f.ln_evaluate(y)?);
            from_logs(f.ln_evaluate(z)?, ln_rhs)
        }
        ConvexityClass::MLogConvex { m } => {
            let z = w * x + m * (1.0 - w) * y;
            let ln_rhs =
                weighted_log(w, f.ln_evaluate(x)?) + weighted_log(m * (1.0 - w), f.ln_evaluate(y)?);
            from_logs(f.ln_evaluate(z)?, ln_rhs)
        }
        ConvexityClass::AlphaMLogConvex { alpha, m } => {
            let z = w * x + m * (1.0 - w) * y;
            let t_a = w.powf(alpha);
            let ln_rhs =
                weighted_log(t_a, f.ln_evaluate(x)?) + weighted_log(m * (1.0 - t_a), f.ln_evaluate(y)?);
            from_logs(f.ln_evaluate(z)?, ln_rhs)
        }
        ConvexityClass::SLogFirst { s } => {
            let a_s = w.powf(s);
            let beta = (1.0 - a_s).powf(1.0 / s);
            let ln_rhs =
                weighted_log(a_s, f.ln_evaluate(x)?) + weighted_log(1.0 - a_s, f.ln_evaluate(y)?);
            from_logs(f.ln_evaluate(w * x + beta * y)?, ln_rhs)
        }
        ConvexityClass::SLogSecond { s } => {
            let z = w * x + (1.0 - w) * y;
            let ln_rhs = weighted_log(w.powf(s), f.ln_evaluate(x)?)
                + weighted_log((1.0 - w).powf(s), f.ln_evaluate(y)?);
            from_logs(f.ln_evaluate(z)?, ln_rhs)
        }
    };
    Ok(cond)
}

/// `rhs - lhs` of the defining inequality; non-negative where it holds.
pub fn condition_margin(cls: &ConvexityClass, f: &FunctionSpec, p: &SamplePoint) -> Result<f64> {
    condition(cls, f, p).map(|c| c.margin)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Falsification {
    /// Most negative margin found, if any point violated the class.
    pub worst: Option<Violation>,
    pub evaluated: usize,
    /// Sampled points whose evaluation left the function's domain.
    pub skipped: usize,
}

impl Falsification {
    /// Keeps the deeper of two violations and sums the counters.
    pub fn merge(self, other: Falsification) -> Falsification {
        let worst = match (self.worst, other.worst) {
            (Some(a), Some(b)) => Some(if b.margin < a.margin { b } else { a }),
            (a, b) => a.or(b),
        };
        Falsification {
            worst,
            evaluated: self.evaluated + other.evaluated,
            skipped: self.skipped + other.skipped,
        }
    }
}

/// Random stream for shard `stream` of `seed`.
pub fn shard_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `budget` uniform sample points and returns the worst violation,
/// refined by coordinate-wise golden-section descent on the margin.
pub fn falsify(cls: &ConvexityClass, f: &FunctionSpec, budget: usize, seed: u64) -> Falsification {
    falsify_stream(cls, f, budget, seed, 0)
}

/// Splits the budget over `shards` independent streams of `seed` and
/// merges to the worst margin.
pub fn falsify_sharded(
    cls: &ConvexityClass,
    f: &FunctionSpec,
    budget: usize,
    seed: u64,
    shards: usize,
) -> Falsification {
    let shards = shards.max(1);
    (0..shards)
        .into_par_iter()
        .map(|i| {
            let share = budget / shards + usize::from(i < budget % shards);
            falsify_stream(cls, f, share, seed, i as u64)
        })
        .reduce(
            || Falsification { worst: None, evaluated: 0, skipped: 0 },
            Falsification::merge,
        )
}

fn falsify_stream(
    cls: &ConvexityClass,
    f: &FunctionSpec,
    budget: usize,
    seed: u64,
    stream: u64,
) -> Falsification {
    let dom = f.domain();
    let mut rng = shard_rng(seed, stream);
    let mut evaluated = 0;
    let mut skipped = 0;
    let mut worst: Option<(SamplePoint, Condition)> = None;
    for _ in 0..budget {
        let p = SamplePoint {
            x: rng.random_range(dom.lo..=dom.hi),
            y: rng.random_range(dom.lo..=dom.hi),
            weight: rng.random_range(0.0..=1.0),
        };
        match condition(cls, f, &p) {
            Ok(c) => {
                evaluated += 1;
                if c.is_violation() && worst.is_none_or(|(_, w)| c.margin < w.margin) {
                    worst = Some((p, c));
                }
            }
            Err(_) => skipped += 1,
        }
    }
    let worst = worst.map(|(p, c)| {
        let (p, c) = refine(cls, f, p, c);
        Violation {
            condition: cls.to_string(),
            point: p,
            lhs: c.lhs,
            rhs: c.rhs,
            margin: c.margin,
        }
    });
    Falsification { worst, evaluated, skipped }
}

fn refine(
    cls: &ConvexityClass,
    f: &FunctionSpec,
    mut best: SamplePoint,
    mut best_c: Condition,
) -> (SamplePoint, Condition) {
    let dom = f.domain();
    let bounds = [(dom.lo, dom.hi), (dom.lo, dom.hi), (0.0, 1.0)];
    let with = |p: SamplePoint, k: usize, v: f64| {
        let mut q = p;
        match k {
            0 => q.x = v,
            1 => q.y = v,
            _ => q.weight = v,
        }
        q
    };
    let score = |p: &SamplePoint| condition(cls, f, p).map_or(f64::INFINITY, |c| c.margin);

    for _ in 0..REFINE_STEPS {
        let mut improved = false;
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            let v = golden_min(|v| score(&with(best, k, v)), lo, hi);
            // endpoints of the coordinate range are frequent extremisers
            for cand in [v, lo, hi] {
                let q = with(best, k, cand);
                if let Ok(c) = condition(cls, f, &q) {
                    if c.margin < best_c.margin {
                        best = q;
                        best_c = c;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    (best, best_c)
}

fn golden_min(mut h: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut hc = h(c);
    let mut hd = h(d);
    for _ in 0..GOLDEN_ITERS {
        if hc < hd {
            hi = d;
            d = c;
            hd = hc;
            c = hi - inv_phi * (hi - lo);
            hc = h(c);
        } else {
            lo = c;
            c = d;
            hc = hd;
            d = lo + inv_phi * (hi - lo);
            hd = h(d);
        }
    }
    if hc < hd {
        c
    } else {
        d
    }
}

// ---------------------------------------------------------------------------
// hypothesis gate

/// One precondition of a theorem.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    Member(ConvexityClass),
    /// Monotone nondecreasing over the whole domain.
    Nondecreasing,
    /// `f(x) <= 1` at each listed point.
    AtMostOne(Vec<f64>),
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Member(c) => write!(f, "{c}"),
            Hypothesis::Nondecreasing => write!(f, "nondecreasing"),
            Hypothesis::AtMostOne(_) => write!(f, "f(x)<=1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCheck {
    pub function: FunctionSpec,
    pub hypothesis: String,
    pub passed: bool,
    pub violation: Option<Violation>,
    /// Samples skipped because they left the domain.
    pub skipped: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub checks: Vec<GateCheck>,
}

pub enum GateOutcome<'a> {
    Pass,
    Refuted(Vec<&'a Violation>),
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> Vec<&Violation> {
        self.checks.iter().filter_map(|c| c.violation.as_ref()).collect()
    }

    pub fn outcome(&self) -> GateOutcome<'_> {
        if self.passed() {
            GateOutcome::Pass
        } else {
            GateOutcome::Refuted(self.violations())
        }
    }

    pub fn extend(&mut self, other: GateReport) {
        self.checks.extend(other.checks);
    }
}

/// Checks every hypothesis for `f`. Class membership goes through
/// [`falsify`]; each check uses its own stream of `seed`.
pub fn hypothesis_gate(
    hypotheses: &[Hypothesis],
    f: &FunctionSpec,
    budget: usize,
    seed: u64,
) -> GateReport {
    let checks = hypotheses
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let (violation, skipped) = match h {
                Hypothesis::Member(cls) => {
                    let r = falsify_stream(cls, f, budget, seed, i as u64);
                    (r.worst, r.skipped)
                }
                Hypothesis::Nondecreasing => (monotone_probe(f), 0),
                Hypothesis::AtMostOne(points) => (at_most_one(f, points), 0),
            };
            GateCheck {
                function: f.clone(),
                hypothesis: h.to_string(),
                passed: violation.is_none(),
                violation,
                skipped,
            }
        })
        .collect();
    GateReport { checks }
}

fn monotone_probe(f: &FunctionSpec) -> Option<Violation> {
    let dom = f.domain();
    let xs: Vec<f64> = (0..=MONOTONE_GRID)
        .map(|i| dom.lo + dom.width() * i as f64 / MONOTONE_GRID as f64)
        .collect();
    let mut worst: Option<Violation> = None;
    for pair in xs.windows(2) {
        let (Ok(lo), Ok(hi)) = (f.evaluate(pair[0]), f.evaluate(pair[1])) else {
            continue;
        };
        let margin = hi - lo;
        if is_violation(lo, margin) && worst.as_ref().is_none_or(|w| margin < w.margin) {
            worst = Some(Violation {
                condition: "nondecreasing".into(),
                point: SamplePoint { x: pair[0], y: pair[1], weight: 0.0 },
                lhs: lo,
                rhs: hi,
                margin,
            });
        }
    }
    worst
}

fn at_most_one(f: &FunctionSpec, points: &[f64]) -> Option<Violation> {
    let mut worst: Option<Violation> = None;
    for &x in points {
        let (lhs, margin) = match f.evaluate(x) {
            Ok(v) => (v, 1.0 - v),
            Err(_) => (f64::INFINITY, f64::NEG_INFINITY),
        };
        if is_violation(lhs, margin) && worst.as_ref().is_none_or(|w| margin < w.margin) {
            worst = Some(Violation {
                condition: "f(x)<=1".into(),
                point: SamplePoint { x, y: x, weight: 1.0 },
                lhs,
                rhs: 1.0,
                margin,
            });
        }
    }
    worst
}
