//! Suite files: a TOML document with an optional master `seed` and one
//! `[[check]]` table per check. Specs use the same text encodings as the
//! rest of the crate (`se@both:log`, `lognormal(0,1)`, `quantile:tau=0.9`).
//!
//! ```toml
//! seed = 42
//!
//! [[check]]
//! name = "mean"
//! kind = "consistency"
//! dist = "normal(0,1)"
//! score = "se"
//! functional = "mean"
//! grid = [-2.0, 2.0]
//! ```

use std::str::FromStr;

use serde::Deserialize;

use super::{CheckConfig, CheckKind, Expectation, DEFAULT_N_INDICATOR};
use crate::error::{Error, Result};
use crate::identification::IdentFamily;
use crate::numerics::{Bracket, Seed};

/// Suites shipped with the library, addressable as `builtin:<name>`.
pub const BUILTIN_SUITES: &[(&str, &str)] = &[
    ("paper-core", include_str!("suites/paper-core.toml")),
    ("smoke", include_str!("suites/smoke.toml")),
    ("catalog-rows", include_str!("suites/catalog-rows.toml")),
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuite {
    seed: Option<u64>,
    #[serde(default, rename = "check")]
    checks: Vec<RawCheck>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    name: String,
    kind: CheckKind,
    dist: String,
    score: Option<String>,
    score2: Option<String>,
    ident: Option<String>,
    functional: Option<String>,
    target: Option<f64>,
    grid: Option<[f64; 2]>,
    points: Option<usize>,
    grid2: Option<[f64; 2]>,
    n: Option<usize>,
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
    g: Option<String>,
    map: Option<String>,
    #[serde(default)]
    offsets: Vec<f64>,
    seed: Option<u64>,
    #[serde(default)]
    expect: Expectation,
}

fn field<T: FromStr<Err = Error>>(
    check: &str,
    key: &str,
    value: Option<&String>,
) -> Result<Option<T>> {
    value
        .map(|s| {
            s.parse()
                .map_err(|e| Error::Parse(format!("check `{check}`, field `{key}`: {e}")))
        })
        .transpose()
}

fn bracket(check: &str, key: &str, value: Option<[f64; 2]>) -> Result<Option<Bracket>> {
    value
        .map(|[lo, hi]| {
            Bracket::new(lo, hi)
                .map_err(|e| Error::Parse(format!("check `{check}`, field `{key}`: {e}")))
        })
        .transpose()
}

impl RawCheck {
    fn into_config(self, seed: Seed) -> Result<CheckConfig> {
        let name = self.name.as_str();
        let dist = field(name, "dist", Some(&self.dist))?.expect("present");
        let mut cfg = CheckConfig::new(name, self.kind, dist);
        cfg.score = field(name, "score", self.score.as_ref())?;
        cfg.score2 = field(name, "score2", self.score2.as_ref())?;
        cfg.ident = field(name, "ident", self.ident.as_ref())?;
        cfg.functional = field(name, "functional", self.functional.as_ref())?;
        cfg.g = field(name, "g", self.g.as_ref())?;
        cfg.map = field(name, "map", self.map.as_ref())?;
        cfg.grid = bracket(name, "grid", self.grid)?;
        cfg.grid2 = bracket(name, "grid2", self.grid2)?;
        cfg.target = self.target;
        cfg.offsets = self.offsets;
        cfg.expect = self.expect;
        cfg.seed = self.seed.map_or(seed, Seed);
        if let Some(p) = self.points {
            cfg.points = p;
        }
        if let Some(t) = self.tol_abs {
            cfg.tol_abs = t;
        }
        if let Some(t) = self.tol_rel {
            cfg.tol_rel = t;
        }
        let indicator = cfg.score.is_some_and(|s| s.family.has_indicator())
            || cfg.score2.is_some_and(|s| s.family.has_indicator())
            || cfg
                .ident
                .is_some_and(|i| matches!(i.family, IdentFamily::Quantile { .. }));
        cfg.n = match self.n {
            Some(n) => n,
            None if indicator => DEFAULT_N_INDICATOR,
            None => cfg.n,
        };
        Ok(cfg)
    }
}

/// Parses a suite. `seed` overrides the file's master seed; check `i`
/// without an explicit seed gets `master.derive(1000 + i)`.
pub fn load_suite(text: &str, seed: Option<Seed>) -> Result<Vec<CheckConfig>> {
    let raw: RawSuite =
        toml::from_str(text).map_err(|e| Error::Parse(format!("suite: {}", e.message())))?;
    let master = seed.or(raw.seed.map(Seed)).unwrap_or_default();
    raw.checks
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.into_config(master.derive(1000 + i as u64)))
        .collect()
}

/// Loads one of [`BUILTIN_SUITES`] by name.
pub fn builtin_suite(name: &str, seed: Option<Seed>) -> Result<Vec<CheckConfig>> {
    let (_, text) = BUILTIN_SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| {
            let known: Vec<&str> = BUILTIN_SUITES.iter().map(|(n, _)| *n).collect();
            Error::Parse(format!(
                "unknown builtin suite `{name}` (known: {})",
                known.join(", ")
            ))
        })?;
    load_suite(text, seed)
}
