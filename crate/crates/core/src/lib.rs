//! Consistent scoring functions, identification functions and their
//! transformations by bijections, with a Monte Carlo harness that checks
//! the consistency claims on concrete distributions.
//!
//! The building blocks:
//!
//! - [`transforms::Bijection`]: strictly monotone maps `g` and their inverses.
//! - [`scoring::ScoreSpec`]: a score family plus where `g` is applied.
//! - [`identification::IdentSpec`]: identification functions, likewise.
//! - [`functionals::FunctionalSpec`]: the quantity a score elicits.
//! - [`verify`]: seeded, deterministic consistency checks.
//!
//! ```
//! use elicit::{ScoreSpec, fit, ModelSpec};
//!
//! let score: ScoreSpec = "se@both:log".parse().unwrap();
//! let fit = fit(ModelSpec::Constant, &score, None, &[1.0, 4.0], None, 1e-10).unwrap();
//! assert!((fit.theta[0] - 2.0).abs() < 1e-8);
//! ```

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod functionals;
pub mod identification;
pub mod numerics;
pub mod scoring;
pub mod transforms;
pub mod verify;

pub use distributions::DistributionSpec;
pub use error::{Error, Result};
pub use estimation::{fit, FitResult, ModelSpec};
pub use evaluation::{nse, skill_score, transformed_climatology};
pub use functionals::{FunctionalSpec, FunctionalValue};
pub use identification::IdentSpec;
pub use numerics::Seed;
pub use scoring::{Prediction, ScoreSpec, TransformMode};
pub use transforms::Bijection;
pub use verify::{run_check, run_suite, CheckConfig, CheckKind, VerificationReport};
