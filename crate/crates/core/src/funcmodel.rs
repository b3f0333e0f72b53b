//! Closed-form test functions.
//!
//! A [`FunctionSpec`] is one of five families evaluated on an [`Interval`]
//! of `[0, ∞)`. Specs are written in a small grammar,
//!
//! ```text
//! family(name=value,...)@[lo,hi]
//! ```
//!
//! where the domain suffix defaults to `[0,1]`. `product` takes two nested
//! specs instead of named values; a child without its own suffix inherits
//! the product's domain.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classcheck::ConvexityClass;
use crate::error::{Error, Result};

/// Relative slack allowed when a computed point lands a rounding error
/// outside the domain.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Domain(format!("interval [{lo}, {hi}] is not finite")));
        }
        if lo < 0.0 {
            return Err(Error::Domain(format!("interval must lie in [0, ∞), got lo={lo}")));
        }
        if lo >= hi {
            return Err(Error::Domain(format!("interval needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Result<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Snaps `x` onto the interval when it is outside by no more than a
    /// rounding error; `None` when it is genuinely outside.
    pub fn snap(&self, x: f64) -> Option<f64> {
        if self.contains(x) {
            return Some(x);
        }
        let slack = DOMAIN_SLACK * self.lo.abs().max(self.hi.abs()).max(1.0);
        if x < self.lo && x >= self.lo - slack {
            Some(self.lo)
        } else if x > self.hi && x <= self.hi + slack {
            Some(self.hi)
        } else {
            None
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `c`, with `c > 0`.
    Const { c: f64 },
    /// `exp(λx + c)`.
    ExpAffine { lambda: f64, c: f64 },
    /// `exp(σ x^r)`, `σ = ±1`, `r > 0`.
    ExpPow { sigma: f64, r: f64 },
    /// `x^r`, `r > 0`. Vanishes at the origin.
    Pow { r: f64 },
    Product(Box<FunctionSpec>, Box<FunctionSpec>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Const { .. } => "const",
            Family::ExpAffine { .. } => "exp_affine",
            Family::ExpPow { .. } => "exp_pow",
            Family::Pow { .. } => "pow",
            Family::Product(..) => "product",
        }
    }
}

pub const FAMILY_NAMES: [&str; 5] = ["const", "exp_affine", "exp_pow", "pow", "product"];

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    family: Family,
    domain: Interval,
}

impl FunctionSpec {
    pub fn new(family: Family, domain: Interval) -> Result<Self> {
        validate_family(&family, &domain)?;
        Ok(Self { family, domain })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Family::Const { c }, Interval::unit())
    }

    pub fn exp_affine(lambda: f64, c: f64) -> Result<Self> {
        Self::new(Family::ExpAffine { lambda, c }, Interval::unit())
    }

    pub fn exp_pow(sigma: f64, r: f64) -> Result<Self> {
        Self::new(Family::ExpPow { sigma, r }, Interval::unit())
    }

    pub fn pow(r: f64) -> Result<Self> {
        Self::new(Family::Pow { r }, Interval::unit())
    }

    /// Pointwise product on the intersection of the two domains.
    pub fn product(f: &FunctionSpec, g: &FunctionSpec) -> Result<Self> {
        let domain = f.domain.intersect(&g.domain)?;
        Self::new(
            Family::Product(Box::new(f.clone()), Box::new(g.clone())),
            domain,
        )
    }

    pub fn with_domain(&self, domain: Interval) -> Result<Self> {
        Self::new(self.family.clone(), domain)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Closed-form value at `x`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let x = self.domain.snap(x).ok_or_else(|| {
            Error::Domain(format!("x={x} lies outside the domain {} of {self}", self.domain))
        })?;
        let v = self.eval_raw(x);
        if !v.is_finite() {
            return Err(Error::Range(format!("{self} is not finite at x={x}")));
        }
        if v == 0.0 && !self.may_vanish() {
            return Err(Error::Range(format!("{self} underflows at x={x}")));
        }
        Ok(v)
    }

    /// `ln f(x)`; exact for the exponential families, so no overflow for
    /// large exponents. `-inf` where `pow` vanishes.
    pub fn ln_evaluate(&self, x: f64) -> Result<f64> {
        let x = self.domain.snap(x).ok_or_else(|| {
            Error::Domain(format!("x={x} lies outside the domain {} of {self}", self.domain))
        })?;
        let v = self.ln_raw(x);
        if v.is_nan() || v == f64::INFINITY {
            return Err(Error::Range(format!("ln {self} is not finite at x={x}")));
        }
        Ok(v)
    }

    /// Evaluation without domain checks; used inside quadrature after the
    /// integration interval has been validated.
    pub(crate) fn eval_raw(&self, x: f64) -> f64 {
        match &self.family {
            Family::Const { c } => *c,
            Family::ExpAffine { lambda, c } => (lambda * x + c).exp(),
            Family::ExpPow { sigma, r } => (sigma * x.powf(*r)).exp(),
            Family::Pow { r } => x.powf(*r),
            Family::Product(f, g) => f.eval_raw(x) * g.eval_raw(x),
        }
    }

    pub(crate) fn ln_raw(&self, x: f64) -> f64 {
        match &self.family {
            Family::Const { c } => c.ln(),
            Family::ExpAffine { lambda, c } => lambda * x + c,
            Family::ExpPow { sigma, r } => sigma * x.powf(*r),
            Family::Pow { r } => r * x.ln(),
            Family::Product(f, g) => f.ln_raw(x) + g.ln_raw(x),
        }
    }

    fn may_vanish(&self) -> bool {
        match &self.family {
            Family::Pow { .. } => true,
            Family::Product(f, g) => f.may_vanish() || g.may_vanish(),
            _ => false,
        }
    }

    fn fmt_body(&self, f: &mut fmt::Formatter<'_>, parent: Option<&Interval>) -> fmt::Result {
        match &self.family {
            Family::Const { c } => write!(f, "const(c={c})")?,
            Family::ExpAffine { lambda, c } => write!(f, "exp_affine(lambda={lambda},c={c})")?,
            Family::ExpPow { sigma, r } => write!(f, "exp_pow(sigma={sigma},r={r})")?,
            Family::Pow { r } => write!(f, "pow(r={r})")?,
            Family::Product(a, b) => {
                write!(f, "product(")?;
                a.fmt_body(f, Some(&self.domain))?;
                write!(f, ",")?;
                b.fmt_body(f, Some(&self.domain))?;
                write!(f, ")")?;
            }
        }
        if parent != Some(&self.domain) {
            write!(f, "@{}", self.domain)?;
        }
        Ok(())
    }
}

/// Renders in the grammar accepted by [`parse_spec`]; top-level specs always
/// carry their domain.
impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_body(f, None)
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_spec(s)
    }
}

impl Serialize for FunctionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FunctionSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_spec(&s).map_err(serde::de::Error::custom)
    }
}

fn param_err(family: &str, name: &str, msg: impl Into<String>) -> Error {
    Error::Parameter {
        family: family.to_string(),
        name: name.to_string(),
        msg: msg.into(),
    }
}

fn validate_family(family: &Family, domain: &Interval) -> Result<()> {
    let finite = |fam: &str, name: &str, v: f64| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(param_err(fam, name, "must be finite"))
        }
    };
    match family {
        Family::Const { c } => {
            finite("const", "c", *c)?;
            if *c <= 0.0 {
                return Err(param_err("const", "c", format!("must be > 0, got {c}")));
            }
        }
        Family::ExpAffine { lambda, c } => {
            finite("exp_affine", "lambda", *lambda)?;
            finite("exp_affine", "c", *c)?;
        }
        Family::ExpPow { sigma, r } => {
            if *sigma != 1.0 && *sigma != -1.0 {
                return Err(param_err("exp_pow", "sigma", format!("must be -1 or 1, got {sigma}")));
            }
            finite("exp_pow", "r", *r)?;
            if *r <= 0.0 {
                return Err(param_err("exp_pow", "r", format!("must be > 0, got {r}")));
            }
        }
        Family::Pow { r } => {
            finite("pow", "r", *r)?;
            if *r <= 0.0 {
                return Err(param_err("pow", "r", format!("must be > 0, got {r}")));
            }
        }
        Family::Product(f, g) => {
            for child in [f, g] {
                if !child.domain.contains_interval(domain) {
                    return Err(param_err(
                        "product",
                        "domain",
                        format!("child domain {} does not cover {}", child.domain, domain),
                    ));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// parser

/// Parses `family(name=value,...)@[lo,hi]`.
pub fn parse_spec(text: &str) -> Result<FunctionSpec> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let node = p.spec()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    node.resolve(Interval::unit())
}

struct Node {
    name: String,
    params: Vec<(String, usize, f64)>,
    children: Vec<Node>,
    domain: Option<Interval>,
}

impl Node {
    fn resolve(self, inherited: Interval) -> Result<FunctionSpec> {
        let domain = self.domain.unwrap_or(inherited);
        let family = match self.name.as_str() {
            "product" => {
                if !self.params.is_empty() {
                    return Err(param_err("product", &self.params[0].0, "product takes two nested specs"));
                }
                let mut children = self.children.into_iter();
                match (children.next(), children.next(), children.next()) {
                    (Some(a), Some(b), None) => Family::Product(
                        Box::new(a.resolve(domain)?),
                        Box::new(b.resolve(domain)?),
                    ),
                    _ => return Err(param_err("product", "arguments", "expects exactly two specs")),
                }
            }
            name @ ("const" | "exp_affine" | "exp_pow" | "pow") => {
                let name = *FAMILY_NAMES.iter().find(|n| **n == name).expect("listed family");
                if !self.children.is_empty() {
                    return Err(param_err(name, "arguments", "nested specs are only allowed in product"));
                }
                let mut params = Params::new(name, self.params)?;
                let family = match name {
                    "const" => Family::Const { c: params.take("c")? },
                    "exp_affine" => Family::ExpAffine {
                        lambda: params.take("lambda")?,
                        c: params.take("c")?,
                    },
                    "exp_pow" => Family::ExpPow {
                        sigma: params.take("sigma")?,
                        r: params.take("r")?,
                    },
                    _ => Family::Pow { r: params.take("r")? },
                };
                params.finish()?;
                family
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        FunctionSpec::new(family, domain)
    }
}

struct Params {
    family: &'static str,
    items: Vec<(String, usize, f64)>,
}

impl Params {
    fn new(family: &'static str, items: Vec<(String, usize, f64)>) -> Result<Self> {
        for (i, (name, pos, _)) in items.iter().enumerate() {
            if items[..i].iter().any(|(n, _, _)| n == name) {
                return Err(Error::Parse {
                    pos: *pos,
                    msg: format!("duplicate parameter `{name}`"),
                });
            }
        }
        Ok(Self { family, items })
    }

    fn take(&mut self, name: &str) -> Result<f64> {
        match self.items.iter().position(|(n, _, _)| n == name) {
            Some(i) => Ok(self.items.remove(i).2),
            None => Err(param_err(self.family, name, "missing")),
        }
    }

    fn finish(self) -> Result<()> {
        match self.items.first() {
            None => Ok(()),
            Some((name, _, _)) => Err(param_err(self.family, name, "unknown parameter")),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Result<(String, usize)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos || self.src[start].is_ascii_digit() {
            self.pos = start;
            return Err(self.error("expected an identifier"));
        }
        Ok((String::from_utf8_lossy(&self.src[start..self.pos]).into_owned(), start))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'+' | b'-' | b'e' | b'E')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.error(format!("expected a finite decimal number, found `{text}`")))
            }
        }
    }

    fn spec(&mut self) -> Result<Node> {
        let (name, _) = self.ident()?;
        self.expect(b'(')?;
        let mut params = Vec::new();
        let mut children = Vec::new();
        if self.peek() != Some(b')') {
            loop {
                let save = self.pos;
                let (ident, ident_pos) = self.ident()?;
                match self.peek() {
                    Some(b'=') => {
                        self.pos += 1;
                        params.push((ident, ident_pos, self.number()?));
                    }
                    Some(b'(') => {
                        self.pos = save;
                        children.push(self.spec()?);
                    }
                    _ => return Err(self.error("expected `=` or `(`")),
                }
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => break,
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
        }
        self.expect(b')')?;
        let domain = if self.peek() == Some(b'@') {
            self.pos += 1;
            self.expect(b'[')?;
            let at = self.pos;
            let lo = self.number()?;
            self.expect(b',')?;
            let hi = self.number()?;
            self.expect(b']')?;
            Some(Interval::new(lo, hi).map_err(|e| Error::Parse { pos: at, msg: e.to_string() })?)
        } else {
            None
        };
        Ok(Node { name, params, children, domain })
    }
}

// ---------------------------------------------------------------------------
// built-in suite

/// A built-in function with conjectured class labels. Labels are claims to
/// be checked by the falsifier, not facts.
#[derive(Debug, Clone)]
pub struct BuiltinEntry {
    pub name: &'static str,
    pub spec: FunctionSpec,
    /// Classes the function is conjectured to belong to.
    pub holds: Vec<ConvexityClass>,
    /// Classes the function is conjectured to violate.
    pub fails: Vec<ConvexityClass>,
    pub nondecreasing: bool,
}

fn s_grid() -> impl Iterator<Item = f64> {
    (1..=10).map(|i| i as f64 / 10.0)
}

pub fn builtin_suite() -> Vec<BuiltinEntry> {
    use ConvexityClass as C;
    let parse = |s: &str| parse_spec(s).expect("built-in spec parses");

    let every_class = |s: f64| {
        vec![
            C::Convex,
            C::SConvexFirst { s },
            C::SConvexSecond { s },
            C::LogConvex,
            C::MLogConvex { m: s },
            C::AlphaMLogConvex { alpha: s, m: s },
            C::SLogFirst { s },
            C::SLogSecond { s },
        ]
    };

    let mut exp_x = vec![C::Convex, C::LogConvex];
    exp_x.extend([0.25, 0.5, 1.0].map(|m| C::MLogConvex { m }));
    exp_x.extend(s_grid().map(|s| C::SLogFirst { s }));
    exp_x.extend(s_grid().map(|s| C::SLogSecond { s }));

    let mut exp_x2 = vec![C::Convex, C::LogConvex];
    exp_x2.extend(s_grid().map(|s| C::SLogSecond { s }));

    vec![
        BuiltinEntry {
            name: "const(1)",
            spec: parse("const(c=1)"),
            holds: [0.1, 0.5, 1.0].into_iter().flat_map(every_class).collect(),
            fails: vec![],
            nondecreasing: true,
        },
        BuiltinEntry {
            name: "exp_affine(1,0)",
            spec: parse("exp_affine(lambda=1,c=0)"),
            holds: exp_x,
            fails: vec![],
            nondecreasing: true,
        },
        BuiltinEntry {
            name: "exp_pow(1,2)",
            spec: parse("exp_pow(sigma=1,r=2)"),
            holds: exp_x2,
            fails: vec![],
            nondecreasing: true,
        },
        BuiltinEntry {
            name: "exp_affine(-1,0)",
            spec: parse("exp_affine(lambda=-1,c=0)"),
            holds: vec![C::Convex, C::LogConvex, C::SLogSecond { s: 1.0 }],
            fails: [0.1, 0.5, 0.9].map(|s| C::SLogSecond { s }).to_vec(),
            nondecreasing: false,
        },
        BuiltinEntry {
            name: "exp_affine(-2,0)",
            spec: parse("exp_affine(lambda=-2,c=0)"),
            holds: vec![C::Convex, C::LogConvex, C::SLogSecond { s: 1.0 }],
            fails: vec![C::SLogSecond { s: 0.5 }],
            nondecreasing: false,
        },
        BuiltinEntry {
            name: "pow(2)",
            spec: parse("pow(r=2)@[0.1,1]"),
            holds: std::iter::once(C::Convex)
                .chain(s_grid().map(|s| C::SConvexSecond { s }))
                .collect(),
            fails: vec![C::LogConvex],
            nondecreasing: true,
        },
        BuiltinEntry {
            name: "pow(0.5)",
            spec: parse("pow(r=0.5)@[0.1,1]"),
            holds: (1..=5).map(|i| C::SConvexSecond { s: i as f64 / 10.0 }).collect(),
            fails: vec![C::Convex],
            nondecreasing: true,
        },
    ]
}

/// Finds a built-in by its short name (`exp_affine(1,0)`) or by its
/// rendered spec.
pub fn lookup(name: &str) -> Option<BuiltinEntry> {
    let rendered = parse_spec(name).ok().map(|s| s.to_string());
    builtin_suite()
        .into_iter()
        .find(|e| e.name == name || Some(e.spec.to_string()) == rendered)
}
