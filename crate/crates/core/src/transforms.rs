//! Monotone bijections `g` used to transform predictions and realizations.
//!
//! The catalog covers the log, exponential, power and Box-Cox families plus
//! identity and negation. Each bijection knows its domain, codomain and
//! orientation; evaluating outside the domain is an error rather than an
//! infinity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real interval whose endpoints may be infinite, open or closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const REAL: Interval = Interval::open(f64::NEG_INFINITY, f64::INFINITY);
    pub const POSITIVE: Interval = Interval::open(0.0, f64::INFINITY);
    pub const NONNEGATIVE: Interval = Interval::closed_open(0.0, f64::INFINITY);

    pub const fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub const fn closed_open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub const fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    /// True when every point of `other` lies in `self`.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        let lo_ok =
            other.lo > self.lo || (other.lo == self.lo && (self.lo_closed || !other.lo_closed));
        let hi_ok =
            other.hi < self.hi || (other.hi == self.hi && (self.hi_closed || !other.hi_closed));
        lo_ok && hi_ok
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl Monotonicity {
    pub fn sign(self) -> f64 {
        match self {
            Monotonicity::Increasing => 1.0,
            Monotonicity::Decreasing => -1.0,
        }
    }
}

/// One row of the bijection catalog, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bijection {
    Identity,
    Negate,
    /// `log t` on `(0, inf)`.
    Log,
    /// `log(a t + b)` on `(-b/a, inf)`, `a > 0`.
    AffineLog {
        a: f64,
        b: f64,
    },
    /// `log(t + b)` on `(-b, inf)`.
    ShiftedLog {
        b: f64,
    },
    Exp,
    /// `exp(a t + b)`, `a != 0`.
    AffineExp {
        a: f64,
        b: f64,
    },
    /// `t^a` on `[0, inf)`, `a > 0`.
    NonnegPower {
        a: f64,
    },
    /// `t^a` on `(0, inf)`, `a != 0`.
    Power {
        a: f64,
    },
    /// `(b t + c)^a` on `[-c/b, inf)`, `a, b > 0`.
    NonnegAffinePower {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `(b t + c)^a` on `(-c/b, inf)`, `a != 0`, `b > 0`.
    AffinePower {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `(t + c)^a` on `(-c, inf)`, `a != 0`.
    ShiftedPower {
        a: f64,
        c: f64,
    },
    /// `(t^a - 1) / a` on `(0, inf)`; `log t` when `a = 0`.
    BoxCox {
        a: f64,
    },
}

/// Catalog metadata used by listings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub formula: &'static str,
    pub inverse: &'static str,
    pub constraint: &'static str,
    pub functional: &'static str,
    pub example: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "identity",
        params: "",
        formula: "t",
        inverse: "t",
        constraint: "",
        functional: "𝔼_F[y]",
        example: "identity",
    },
    CatalogEntry {
        name: "negate",
        params: "",
        formula: "-t",
        inverse: "-t",
        constraint: "",
        functional: "𝔼_F[y]",
        example: "negate",
    },
    CatalogEntry {
        name: "log",
        params: "",
        formula: "log(t), t > 0",
        inverse: "exp(t)",
        constraint: "",
        functional: "exp(𝔼_F[log y])",
        example: "log",
    },
    CatalogEntry {
        name: "affine-log",
        params: "a,b",
        formula: "log(a t + b), t > -b/a",
        inverse: "(exp(t) - b)/a",
        constraint: "a > 0",
        functional: "(exp(𝔼_F[log(ay + b)]) - b)/a",
        example: "affine-log(2,1)",
    },
    CatalogEntry {
        name: "shifted-log",
        params: "b",
        formula: "log(t + b), t > -b",
        inverse: "exp(t) - b",
        constraint: "",
        functional: "exp(𝔼_F[log(y + b)]) - b",
        example: "shifted-log(1)",
    },
    CatalogEntry {
        name: "exp",
        params: "",
        formula: "exp(t)",
        inverse: "log(t)",
        constraint: "",
        functional: "log(𝔼_F[exp(y)])",
        example: "exp",
    },
    CatalogEntry {
        name: "affine-exp",
        params: "a,b",
        formula: "exp(a t + b)",
        inverse: "(log(t) - b)/a",
        constraint: "a != 0",
        functional: "(log(𝔼_F[exp(ay + b)]) - b)/a",
        example: "affine-exp(0.5,0)",
    },
    CatalogEntry {
        name: "nonneg-power",
        params: "a",
        formula: "t^a, t >= 0",
        inverse: "t^(1/a)",
        constraint: "a > 0",
        functional: "(𝔼_F[yᵃ])^{1/a}",
        example: "nonneg-power(2)",
    },
    CatalogEntry {
        name: "nonneg-affine-power",
        params: "a,b,c",
        formula: "(b t + c)^a, t >= -c/b",
        inverse: "(t^(1/a) - c)/b",
        constraint: "a > 0, b > 0",
        functional: "((𝔼_F[(by + c)ᵃ])^{1/a} - c)/b",
        example: "nonneg-affine-power(2,1,0)",
    },
    CatalogEntry {
        name: "power",
        params: "a",
        formula: "t^a, t > 0",
        inverse: "t^(1/a)",
        constraint: "a != 0",
        functional: "(𝔼_F[yᵃ])^{1/a}",
        example: "power(0.5)",
    },
    CatalogEntry {
        name: "affine-power",
        params: "a,b,c",
        formula: "(b t + c)^a, t > -c/b",
        inverse: "(t^(1/a) - c)/b",
        constraint: "a != 0, b > 0",
        functional: "((𝔼_F[(by + c)ᵃ])^{1/a} - c)/b",
        example: "affine-power(-1,1,1)",
    },
    CatalogEntry {
        name: "shifted-power",
        params: "a,c",
        formula: "(t + c)^a, t > -c",
        inverse: "t^(1/a) - c",
        constraint: "a != 0",
        functional: "(𝔼_F[(y + c)ᵃ])^{1/a} - c",
        example: "shifted-power(-1,1)",
    },
    CatalogEntry {
        name: "box-cox",
        params: "a",
        formula: "(t^a - 1)/a for a != 0, log(t) for a = 0; t > 0",
        inverse: "(a t + 1)^(1/a) / exp(t)",
        constraint: "",
        functional: "(𝔼_F[yᵃ])^{1/a} / exp(𝔼_F[log y])",
        example: "box-cox(0.25)",
    },
];

fn expect_params(name: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::parameter(
            name,
            format!("expects {n} parameter(s), got {}", params.len()),
        ));
    }
    if let Some(p) = params.iter().find(|p| !p.is_finite()) {
        return Err(Error::parameter(
            name,
            format!("parameter {p} is not finite"),
        ));
    }
    Ok(())
}

fn require(name: &str, ok: bool, constraint: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::parameter(name, format!("requires {constraint}")))
    }
}

/// Builds the catalog bijection `name` with `params`.
pub fn catalog(name: &str, params: &[f64]) -> Result<Bijection> {
    use Bijection::*;
    let bij = match name {
        "identity" => {
            expect_params(name, params, 0)?;
            Identity
        }
        "negate" => {
            expect_params(name, params, 0)?;
            Negate
        }
        "log" => {
            expect_params(name, params, 0)?;
            Log
        }
        "affine-log" => {
            expect_params(name, params, 2)?;
            require(name, params[0] > 0.0, "a > 0")?;
            AffineLog {
                a: params[0],
                b: params[1],
            }
        }
        "shifted-log" => {
            expect_params(name, params, 1)?;
            ShiftedLog { b: params[0] }
        }
        "exp" => {
            expect_params(name, params, 0)?;
            Exp
        }
        "affine-exp" => {
            expect_params(name, params, 2)?;
            require(name, params[0] != 0.0, "a != 0")?;
            AffineExp {
                a: params[0],
                b: params[1],
            }
        }
        "nonneg-power" => {
            expect_params(name, params, 1)?;
            require(name, params[0] > 0.0, "a > 0")?;
            NonnegPower { a: params[0] }
        }
        "power" => {
            expect_params(name, params, 1)?;
            require(name, params[0] != 0.0, "a != 0")?;
            Power { a: params[0] }
        }
        "nonneg-affine-power" => {
            expect_params(name, params, 3)?;
            require(name, params[0] > 0.0 && params[1] > 0.0, "a > 0, b > 0")?;
            NonnegAffinePower {
                a: params[0],
                b: params[1],
                c: params[2],
            }
        }
        "affine-power" => {
            expect_params(name, params, 3)?;
            require(name, params[0] != 0.0 && params[1] > 0.0, "a != 0, b > 0")?;
            AffinePower {
                a: params[0],
                b: params[1],
                c: params[2],
            }
        }
        "shifted-power" => {
            expect_params(name, params, 2)?;
            require(name, params[0] != 0.0, "a != 0")?;
            ShiftedPower {
                a: params[0],
                c: params[1],
            }
        }
        "box-cox" => {
            expect_params(name, params, 1)?;
            BoxCox { a: params[0] }
        }
        other => {
            return Err(Error::parameter(
                other,
                "unknown bijection (see `catalog` for the supported names)",
            ))
        }
    };
    Ok(bij)
}

impl Bijection {
    pub fn name(&self) -> &'static str {
        use Bijection::*;
        match self {
            Identity => "identity",
            Negate => "negate",
            Log => "log",
            AffineLog { .. } => "affine-log",
            ShiftedLog { .. } => "shifted-log",
            Exp => "exp",
            AffineExp { .. } => "affine-exp",
            NonnegPower { .. } => "nonneg-power",
            Power { .. } => "power",
            NonnegAffinePower { .. } => "nonneg-affine-power",
            AffinePower { .. } => "affine-power",
            ShiftedPower { .. } => "shifted-power",
            BoxCox { .. } => "box-cox",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        use Bijection::*;
        match *self {
            Identity | Negate | Log | Exp => vec![],
            AffineLog { a, b } | AffineExp { a, b } => vec![a, b],
            ShiftedLog { b } => vec![b],
            NonnegPower { a } | Power { a } | BoxCox { a } => vec![a],
            NonnegAffinePower { a, b, c } | AffinePower { a, b, c } => vec![a, b, c],
            ShiftedPower { a, c } => vec![a, c],
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Bijection::Identity)
    }

    pub fn domain(&self) -> Interval {
        use Bijection::*;
        match *self {
            Identity | Negate | Exp | AffineExp { .. } => Interval::REAL,
            Log | Power { .. } | BoxCox { .. } => Interval::POSITIVE,
            AffineLog { a, b } => Interval::open(-b / a, f64::INFINITY),
            ShiftedLog { b } => Interval::open(-b, f64::INFINITY),
            NonnegPower { .. } => Interval::NONNEGATIVE,
            NonnegAffinePower { b, c, .. } => Interval::closed_open(-c / b, f64::INFINITY),
            AffinePower { b, c, .. } => Interval::open(-c / b, f64::INFINITY),
            ShiftedPower { c, .. } => Interval::open(-c, f64::INFINITY),
        }
    }

    pub fn codomain(&self) -> Interval {
        use Bijection::*;
        match *self {
            Identity | Negate | Log | AffineLog { .. } | ShiftedLog { .. } => Interval::REAL,
            Exp | AffineExp { .. } | Power { .. } | AffinePower { .. } | ShiftedPower { .. } => {
                Interval::POSITIVE
            }
            NonnegPower { .. } | NonnegAffinePower { .. } => Interval::NONNEGATIVE,
            BoxCox { a } => {
                if a == 0.0 {
                    Interval::REAL
                } else if a > 0.0 {
                    Interval::open(-1.0 / a, f64::INFINITY)
                } else {
                    // t^a -> inf as t -> 0 and -> 0 as t -> inf
                    Interval::open(f64::NEG_INFINITY, -1.0 / a)
                }
            }
        }
    }

    /// Orientation for these particular parameter values.
    pub fn monotonicity(&self) -> Monotonicity {
        use Bijection::*;
        let increasing = match *self {
            Negate => false,
            AffineExp { a, .. } | Power { a } | AffinePower { a, .. } | ShiftedPower { a, .. } => {
                a > 0.0
            }
            _ => true,
        };
        if increasing {
            Monotonicity::Increasing
        } else {
            Monotonicity::Decreasing
        }
    }

    pub fn is_increasing(&self) -> bool {
        self.monotonicity() == Monotonicity::Increasing
    }

    /// `g(t)` without a domain check.
    #[inline]
    pub fn forward_unchecked(&self, t: f64) -> f64 {
        use Bijection::*;
        match *self {
            Identity => t,
            Negate => -t,
            Log => t.ln(),
            AffineLog { a, b } => (a * t + b).ln(),
            ShiftedLog { b } => (t + b).ln(),
            Exp => t.exp(),
            AffineExp { a, b } => (a * t + b).exp(),
            NonnegPower { a } | Power { a } => pow(t, a),
            NonnegAffinePower { a, b, c } | AffinePower { a, b, c } => pow(b * t + c, a),
            ShiftedPower { a, c } => pow(t + c, a),
            BoxCox { a } => {
                if a == 0.0 {
                    t.ln()
                } else {
                    (pow(t, a) - 1.0) / a
                }
            }
        }
    }

    /// `g^{-1}(t)` without a codomain check.
    #[inline]
    pub fn inverse_unchecked(&self, t: f64) -> f64 {
        use Bijection::*;
        match *self {
            Identity => t,
            Negate => -t,
            Log => t.exp(),
            AffineLog { a, b } => (t.exp() - b) / a,
            ShiftedLog { b } => t.exp() - b,
            Exp => t.ln(),
            AffineExp { a, b } => (t.ln() - b) / a,
            NonnegPower { a } | Power { a } => pow(t, 1.0 / a),
            NonnegAffinePower { a, b, c } | AffinePower { a, b, c } => (pow(t, 1.0 / a) - c) / b,
            ShiftedPower { a, c } => pow(t, 1.0 / a) - c,
            BoxCox { a } => {
                if a == 0.0 {
                    t.exp()
                } else {
                    pow(a * t + 1.0, 1.0 / a)
                }
            }
        }
    }

    #[inline]
    pub fn derivative_unchecked(&self, t: f64) -> f64 {
        use Bijection::*;
        match *self {
            Identity => 1.0,
            Negate => -1.0,
            Log => 1.0 / t,
            AffineLog { a, b } => a / (a * t + b),
            ShiftedLog { b } => 1.0 / (t + b),
            Exp => t.exp(),
            AffineExp { a, b } => a * (a * t + b).exp(),
            NonnegPower { a } | Power { a } => a * pow(t, a - 1.0),
            NonnegAffinePower { a, b, c } | AffinePower { a, b, c } => {
                a * b * pow(b * t + c, a - 1.0)
            }
            ShiftedPower { a, c } => a * pow(t + c, a - 1.0),
            BoxCox { a } => {
                if a == 0.0 {
                    1.0 / t
                } else {
                    pow(t, a - 1.0)
                }
            }
        }
    }

    /// `g(t)`; errors outside the domain.
    pub fn apply(&self, t: f64) -> Result<f64> {
        let domain = self.domain();
        if !domain.contains(t) {
            return Err(Error::domain(t, domain, format_args!("domain of {self}")));
        }
        Ok(self.forward_unchecked(t))
    }

    /// `g^{-1}(t)`; errors outside the codomain.
    pub fn invert(&self, t: f64) -> Result<f64> {
        let codomain = self.codomain();
        if !codomain.contains(t) {
            return Err(Error::domain(
                t,
                codomain,
                format_args!("codomain of {self}"),
            ));
        }
        Ok(self.inverse_unchecked(t))
    }

    /// `g'(t)`; errors outside the domain or where the derivative blows up
    /// (e.g. `t^0.5` at 0).
    pub fn deriv(&self, t: f64) -> Result<f64> {
        let domain = self.domain();
        if !domain.contains(t) {
            return Err(Error::domain(t, domain, format_args!("domain of {self}")));
        }
        let d = self.derivative_unchecked(t);
        if !d.is_finite() {
            return Err(Error::Evaluation { at: t, value: d });
        }
        Ok(d)
    }
}

#[inline]
fn pow(t: f64, a: f64) -> f64 {
    if a == 2.0 {
        t * t
    } else if a == 1.0 {
        t
    } else if a == -1.0 {
        1.0 / t
    } else if a == 0.5 {
        t.sqrt()
    } else {
        t.powf(a)
    }
}

/// Largest `|g^{-1}(g(t)) - t| / max(1, |t|)` over `grid`.
pub fn roundtrip_check(bij: &Bijection, grid: &[f64]) -> Result<f64> {
    grid.iter().try_fold(0.0f64, |worst, &t| {
        let back = bij.invert(bij.apply(t)?)?;
        Ok(worst.max((back - t).abs() / t.abs().max(1.0)))
    })
}

fn fmt_param(p: f64) -> String {
    format!("{p}")
}

impl fmt::Display for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            f.write_str(self.name())
        } else {
            let list: Vec<String> = params.into_iter().map(fmt_param).collect();
            write!(f, "{}({})", self.name(), list.join(","))
        }
    }
}

impl FromStr for Bijection {
    type Err = Error;

    /// Parses `name` or `name(p1,p2,...)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.find('(') {
            Some(open) => {
                let close = s
                    .rfind(')')
                    .filter(|&c| c == s.len() - 1)
                    .ok_or_else(|| Error::parse(format!("unbalanced parentheses in `{s}`")))?;
                let inner = &s[open + 1..close];
                let params = parse_number_list(inner)?;
                (&s[..open], params)
            }
            None => (s, Vec::new()),
        };
        catalog(name.trim(), &params)
    }
}

pub(crate) fn parse_number_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(format!("`{}` is not a number", p.trim())))
        })
        .collect()
}

impl Serialize for Bijection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bijection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
