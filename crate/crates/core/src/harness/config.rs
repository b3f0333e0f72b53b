//! Sweep configuration files.
//!
//! One `key = value` per line; `#` starts a comment. Grid keys take a single
//! value, a list `[v1, v2, ...]` or `linspace(lo, hi, n)`. Function specs
//! contain commas, so list items are split only at top-level commas.
//!
//! ```text
//! theorem   = [second-upper, second-K]
//! function  = exp_pow(sigma=1,r=2)
//! s         = linspace(0.1, 1.0, 10)
//! a = 0
//! b = 1
//! seed = 42
//! out = results/second.json
//! csv = results/second.csv
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::FunctionSpec;
use crate::quadrature::{DEFAULT_MAX_EVALS, DEFAULT_TOL};
use crate::theorems::{TheoremId, DEFAULT_BUDGET, DEFAULT_SEED};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub theorems: Vec<TheoremId>,
    pub functions: Vec<FunctionSpec>,
    /// Second function for two-function theorems; empty means `g = f`.
    pub functions2: Vec<FunctionSpec>,
    pub s: Vec<f64>,
    pub alpha: Vec<f64>,
    /// `q` is always the conjugate of `p`.
    pub p: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_evals: usize,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            theorems: Vec::new(),
            functions: Vec::new(),
            functions2: Vec::new(),
            s: vec![1.0],
            alpha: vec![0.5],
            p: vec![2.0],
            a: vec![0.0],
            b: vec![1.0],
            samples: DEFAULT_BUDGET,
            seed: DEFAULT_SEED,
            tol: DEFAULT_TOL,
            max_evals: DEFAULT_MAX_EVALS,
            out: None,
            csv: None,
        }
    }
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config { line, msg };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let wrap = |e: Error| err(e.to_string());
            match key {
                "theorem" | "theorems" => {
                    cfg.theorems = items(value).map_err(wrap)?.iter().map(|s| s.parse()).collect::<Result<_>>().map_err(wrap)?
                }
                "function" | "functions" => cfg.functions = specs(value).map_err(wrap)?,
                "function2" | "functions2" => cfg.functions2 = specs(value).map_err(wrap)?,
                "s" => cfg.s = grid(value).map_err(wrap)?,
                "alpha" => cfg.alpha = grid(value).map_err(wrap)?,
                "p" => cfg.p = grid(value).map_err(wrap)?,
                "a" => cfg.a = grid(value).map_err(wrap)?,
                "b" => cfg.b = grid(value).map_err(wrap)?,
                "samples" => cfg.samples = scalar(value).map_err(wrap)?,
                "seed" => cfg.seed = scalar(value).map_err(wrap)?,
                "tol" => cfg.tol = scalar(value).map_err(wrap)?,
                "max_evals" => cfg.max_evals = scalar::<f64>(value).map_err(wrap)? as usize,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "csv" => cfg.csv = Some(PathBuf::from(value)),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Grids must be non-empty once a theorem is named. A config with no
    /// theorems is an empty sweep.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config { line: 0, msg: msg.into() });
        if self.theorems.is_empty() {
            return Ok(());
        }
        if self.functions.is_empty() {
            return bad("`function` is required");
        }
        for (name, g) in [("s", &self.s), ("alpha", &self.alpha), ("p", &self.p), ("a", &self.a), ("b", &self.b)] {
            if g.is_empty() {
                return bad(&format!("grid `{name}` is empty"));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return bad(&format!("grid `{name}` has a non-finite value"));
            }
        }
        if !(self.tol > 0.0) || self.samples == 0 || self.max_evals == 0 {
            return bad("tol, samples and max_evals must be positive");
        }
        Ok(())
    }
}

/// Splits a list body at commas outside brackets and parentheses.
fn items(value: &str) -> Result<Vec<String>> {
    let body = match value.strip_prefix('[') {
        Some(rest) => rest
            .strip_suffix(']')
            .ok_or_else(|| Error::InvalidParams(format!("unterminated list `{value}`")))?,
        None => return Ok(vec![value.to_string()]),
    };
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in body.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    if out.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidParams(format!("empty list item in `{value}`")));
    }
    Ok(out)
}

fn specs(value: &str) -> Result<Vec<FunctionSpec>> {
    items(value)?.iter().map(|s| s.parse()).collect()
}

fn scalar<T: std::str::FromStr>(value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParams(format!("cannot parse `{value}`")))
}

fn grid(value: &str) -> Result<Vec<f64>> {
    if let Some(args) = value.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let [lo, hi, n] = parts[..] else {
            return Err(Error::InvalidParams(format!("linspace takes 3 arguments, got `{value}`")));
        };
        let (lo, hi): (f64, f64) = (scalar(lo)?, scalar(hi)?);
        let n: usize = scalar(n)?;
        return Ok(match n {
            0 => vec![],
            1 => vec![lo],
            _ => (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                .collect(),
        });
    }
    items(value)?.iter().map(|s| scalar(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_linspace() {
        let cfg = SweepConfig::parse(
            "# demo\ntheorem = [hh, dm-chain]\nfunction = [pow(r=2)@[0.1,1], exp_affine(lambda=1,c=0)]\n\
             s = linspace(0.1, 1.0, 10)\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(cfg.theorems, vec![TheoremId::Hh, TheoremId::DmChain]);
        assert_eq!(cfg.functions.len(), 2);
        assert_eq!(cfg.functions[0].to_string(), "pow(r=2)@[0.1,1]");
        assert_eq!(cfg.s.len(), 10);
        assert_eq!(cfg.s[0], 0.1);
        assert_eq!(cfg.s[9], 1.0);
        assert!((cfg.s[4] - 0.5).abs() < 1e-15);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn reports_line_of_bad_key() {
        let err = SweepConfig::parse("theorem = hh\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn empty_config_is_empty_sweep() {
        let cfg = SweepConfig::parse("# nothing\n").unwrap();
        assert!(cfg.theorems.is_empty());
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(SweepConfig::parse("theorem = hh\nfunction = const(c=1)\ns = []\n").is_err());
    }
}
