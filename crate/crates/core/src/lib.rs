//! Numerical verification of Hermite-Hadamard type inequalities for
//! convex, log-convex and s-logarithmically convex functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`means`]: arithmetic, geometric and logarithmic means plus the `k(μ)` factor.
//! * [`funcmodel`]: closed-form test functions and their mini-grammar.
//! * [`classcheck`]: defining inequalities of each convexity class and a seeded falsifier.
//! * [`quadrature`]: adaptive Gauss-Kronrod integration, including the
//!   endpoint-singular weight `t^{s-1}(1-t^s)^{1/s-1}`.
//! * [`theorems`]: one verifier per inequality chain.
//! * [`harness`]: sweeps, report serialisation and the `ineqlab` CLI.

pub mod classcheck;
pub mod error;
pub mod funcmodel;
pub mod harness;
pub mod means;
pub mod quadrature;
pub mod theorems;

pub use classcheck::{ConvexityClass, SamplePoint, Violation};
pub use error::{Error, Result};
pub use funcmodel::{FunctionSpec, Interval};
pub use quadrature::{QuadConfig, QuadResult};
pub use theorems::{Status, TheoremId, TheoremParams, TheoremReport};
