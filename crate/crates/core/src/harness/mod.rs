//! Sweeps, report serialisation and the `ineqlab` command line.

pub mod cli;
pub mod config;
pub mod report;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::classcheck::{falsify, hypothesis_gate, ConvexityClass, Hypothesis};
use crate::funcmodel::{builtin_suite, FunctionSpec};

pub use config::SweepConfig;
pub use report::{to_canonical_json, ReportSet, Summary};
pub use sweep::{run_sweep, Cell};

/// Outcome of re-checking one conjectured label of the built-in suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCheck {
    pub function: FunctionSpec,
    /// Class id, or `nondecreasing`.
    pub label: String,
    /// Whether the label claims membership.
    pub claimed: bool,
    pub confirmed: bool,
    /// Worst margin found, if the falsifier found a violation.
    pub margin: Option<f64>,
}

fn label_check(f: &FunctionSpec, cls: &ConvexityClass, claimed: bool, budget: usize, seed: u64) -> LabelCheck {
    let worst = falsify(cls, f, budget, seed).worst;
    LabelCheck {
        function: f.clone(),
        label: cls.to_string(),
        claimed,
        confirmed: worst.is_none() == claimed,
        margin: worst.map(|v| v.margin),
    }
}

/// Re-validates every label of [`builtin_suite`] with the falsifier.
/// Labels are trusted only if this returns all-confirmed.
pub fn validate_builtin_labels(budget: usize, seed: u64) -> Vec<LabelCheck> {
    use rayon::prelude::*;
    let jobs: Vec<(FunctionSpec, Option<ConvexityClass>, bool)> = builtin_suite()
        .into_iter()
        .flat_map(|e| {
            let spec = e.spec.clone();
            e.holds
                .iter()
                .map(|c| (spec.clone(), Some(*c), true))
                .chain(e.fails.iter().map(|c| (spec.clone(), Some(*c), false)))
                .chain(std::iter::once((spec.clone(), None, e.nondecreasing)))
                .collect::<Vec<_>>()
        })
        .collect();
    jobs.par_iter()
        .map(|(f, cls, claimed)| match cls {
            Some(cls) => label_check(f, cls, *claimed, budget, seed),
            None => {
                let gate = hypothesis_gate(&[Hypothesis::Nondecreasing], f, budget, seed);
                let v = gate.violations().first().map(|v| v.margin);
                LabelCheck {
                    function: f.clone(),
                    label: "nondecreasing".into(),
                    claimed: *claimed,
                    confirmed: gate.passed() == *claimed,
                    margin: v,
                }
            }
        })
        .collect()
}
