//! `elicit`: score, fit and verify consistent scoring functions from the
//! command line.
//!
//! Exit codes: 0 success, 1 a verification check did not behave as
//! expected, 2 usage or parse error, 3 numeric or domain error.

mod data;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use data::Columns;
use elicit::evaluation::{skill_score, Optimum};
use elicit::functionals::FunctionalSpec;
use elicit::identification::IdentFamily;
use elicit::numerics::Bracket;
use elicit::scoring::{average_score, ConvexGenerator, ScoreFamily};
use elicit::transforms::CATALOG;
use elicit::verify::{builtin_suite, load_suite, run_suite, score_curve, VerificationReport};
use elicit::{
    fit, transformed_climatology, DistributionSpec, Error, ModelSpec, Prediction, ScoreSpec, Seed,
    TransformMode,
};

#[derive(Parser)]
#[command(
    name = "elicit",
    version,
    about = "Consistent scoring functions for transformed predictions and realizations"
)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, env = "ELICIT_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List bijections, score and identification families, and functionals.
    Catalog {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, value_enum, default_value_t = Family::All)]
        family: Family,
    },
    /// Average realized score of predictions `z` for realizations `y`.
    Score {
        #[arg(long)]
        score: ScoreSpec,
        /// CSV with columns y, z (and x2 for the mean-variance score).
        #[arg(long)]
        data: PathBuf,
        /// Also report the skill against a climatological reference.
        #[arg(long, value_enum)]
        skill: Option<Reference>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// M-estimate a model by minimizing the realized average score.
    Fit {
        #[arg(long)]
        model: ModelSpec,
        #[arg(long)]
        score: ScoreSpec,
        /// CSV with column y (and x for the linear model).
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and emit a JSON array of reports.
    Verify {
        /// Suite file, or `builtin:<name>`.
        #[arg(long)]
        suite: String,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall time per check (makes output run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Expected score over a grid of predictions, as CSV.
    Curve {
        #[arg(long)]
        score: ScoreSpec,
        #[arg(long)]
        dist: DistributionSpec,
        /// Grid bounds `a,b`.
        #[arg(long, value_parser = parse_bracket, allow_hyphen_values = true)]
        bracket: Bracket,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Monte Carlo draws (ignored for empirical laws).
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Family {
    All,
    Bijections,
    Scores,
    Idents,
    Functionals,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reference {
    /// The sample mean of y.
    Climatology,
    /// The climatology of the score's transform: g^{-1}(mean g(y)) and
    /// analogues.
    GClimatology,
}

/// A failed command and the exit code it maps to.
pub enum Failure {
    Usage(String),
    Numeric(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) | Failure::Verification(m) => m,
        }
    }
}

fn is_usage(e: &Error) -> bool {
    match e {
        Error::Parse(_)
        | Error::EmptyData
        | Error::LengthMismatch { .. }
        | Error::Parameter { .. } => true,
        Error::AtIndex { source, .. } => is_usage(source),
        _ => false,
    }
}

/// Library errors, with 0-based record indices shown as 1-based data rows.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = match &e {
            Error::AtIndex { index, source } => format!("row {}: {source}", index + 1),
            other => other.to_string(),
        };
        if is_usage(&e) {
            Failure::Usage(msg)
        } else {
            Failure::Numeric(msg)
        }
    }
}

fn parse_bracket(s: &str) -> Result<Bracket, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(format!("expected `a,b`, got `{s}`"));
    };
    let a: f64 = a.parse().map_err(|_| format!("bad bound `{a}`"))?;
    let b: f64 = b.parse().map_err(|_| format!("bad bound `{b}`"))?;
    Bracket::new(a, b).map_err(|e| e.to_string())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("elicit: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let seed = cli.seed.map(Seed);
    match cli.command {
        Command::Catalog { format, family } => catalog(format, family),
        Command::Score {
            score,
            data,
            skill,
            out,
        } => score_cmd(&score, &data, skill, out.as_deref()),
        Command::Fit {
            model,
            score,
            data,
            tol,
            out,
        } => {
            let needs_x = model == ModelSpec::Linear;
            let cols = Columns::read(&data, if needs_x { &["y", "x"] } else { &["y"] }, &[])?;
            let x = needs_x.then(|| cols.column("x"));
            let result = fit(model, &score, x, cols.column("y"), None, tol)?;
            emit(out.as_deref(), &to_json(&result))
        }
        Command::Verify {
            suite,
            jobs,
            out,
            timings,
        } => verify(&suite, seed, jobs, out.as_deref(), timings),
        Command::Curve {
            score,
            dist,
            bracket,
            points,
            n,
            out,
        } => {
            let rows = score_curve(&score, &dist, bracket, points, n, seed.unwrap_or_default())?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
            emit(
                out.as_deref(),
                &String::from_utf8(bytes).expect("csv is utf-8"),
            )
        }
    }
}

#[derive(Serialize)]
struct ListEntry {
    kind: &'static str,
    name: String,
    encoding: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    functional: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inverse: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constraint: Option<String>,
}

fn entry(kind: &'static str, name: &str, encoding: &str, functional: &str) -> ListEntry {
    ListEntry {
        kind,
        name: name.into(),
        encoding: encoding.into(),
        functional: Some(functional.into()),
        inverse: None,
        constraint: None,
    }
}

fn catalog(format: Format, family: Family) -> Result<(), Failure> {
    let mut rows = Vec::new();
    let want = |f: Family| family == Family::All || family == f;
    if want(Family::Bijections) {
        rows.extend(CATALOG.iter().map(|c| ListEntry {
            kind: "bijection",
            name: c.name.into(),
            encoding: c.example.into(),
            functional: Some(c.functional.into()),
            inverse: Some(c.inverse.into()),
            constraint: (!c.constraint.is_empty()).then(|| c.constraint.into()),
        }));
    }
    if want(Family::Scores) {
        let generators: Vec<&str> = ConvexGenerator::BUILTIN.iter().map(|g| g.name()).collect();
        for name in ScoreFamily::NAMES {
            rows.push(match name {
                "se" => entry("score", name, "se", "mean"),
                "ae" => entry("score", name, "ae", "median"),
                "gpl" => entry("score", name, "gpl:tau=0.9:g=log", "tau-quantile"),
                "apl" => entry("score", name, "apl:tau=0.9", "tau-quantile"),
                "expectile" => entry(
                    "score",
                    name,
                    "expectile:tau=0.75:phi=square",
                    "tau-expectile",
                ),
                "bregman" => ListEntry {
                    constraint: Some(format!("phi in {}", generators.join(", "))),
                    ..entry("score", name, "bregman:phi=exp", "mean")
                },
                _ => entry(
                    "score",
                    name,
                    "mv@realization:log",
                    "(mean, variance) of g(y)",
                ),
            });
        }
    }
    if want(Family::Idents) {
        for name in IdentFamily::NAMES {
            rows.push(match name {
                "mean" => entry("ident", name, "mean@both:log", "mean"),
                "quantile" => entry("ident", name, "quantile:tau=0.9", "tau-quantile"),
                "expectile" => entry("ident", name, "expectile:tau=0.75", "tau-expectile"),
                _ => entry(
                    "ident",
                    name,
                    "mv@realization:log",
                    "(mean, variance) of g(y)",
                ),
            });
        }
    }
    if want(Family::Functionals) {
        let examples = [
            FunctionalSpec::Mean,
            "quantile:tau=0.9".parse().expect("valid"),
            "expectile:tau=0.75".parse().expect("valid"),
            "gmean:g=log".parse().expect("valid"),
            "gexpectile:tau=0.75:g=log".parse().expect("valid"),
            "mvpair:g=log".parse().expect("valid"),
        ];
        for f in examples {
            let text = f.to_string();
            let name = text.split(':').next().unwrap_or_default().to_string();
            rows.push(ListEntry {
                kind: "functional",
                name,
                encoding: text,
                functional: None,
                inverse: None,
                constraint: None,
            });
        }
    }
    match format {
        Format::Json => emit(None, &to_json(&rows)),
        Format::Text => {
            let mut out = String::new();
            let mut last = "";
            for r in &rows {
                if r.kind != last {
                    if !last.is_empty() {
                        out.push('\n');
                    }
                    out.push_str(&format!("{}s\n", r.kind));
                    last = r.kind;
                }
                out.push_str(&format!(
                    "  {:<22} {:<32} {}\n",
                    r.name,
                    r.encoding,
                    r.functional.as_deref().unwrap_or("")
                ));
            }
            emit(None, &out)
        }
    }
}

#[derive(Serialize)]
struct ScoreReport {
    score: String,
    n: usize,
    average: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skill: Option<f64>,
}

fn score_cmd(
    score: &ScoreSpec,
    path: &Path,
    skill: Option<Reference>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let required: &[&str] = if score.is_pair() {
        &["y", "z", "x2"]
    } else {
        &["y", "z"]
    };
    let cols = Columns::read(path, required, &[])?;
    let y = cols.column("y");
    let z: Vec<Prediction> = if score.is_pair() {
        cols.column("z")
            .iter()
            .zip(cols.column("x2"))
            .map(|(&a, &b)| Prediction::Pair(a, b))
            .collect()
    } else {
        cols.column("z")
            .iter()
            .map(|&v| Prediction::Scalar(v))
            .collect()
    };
    let average = average_score(score, &z, y)?;
    let mut report = ScoreReport {
        score: score.to_string(),
        n: cols.rows(),
        average,
        reference: None,
        reference_score: None,
        skill: None,
    };
    if let Some(kind) = skill {
        if score.is_pair() {
            return Err(Failure::Usage("skill scores need a scalar score".into()));
        }
        let (label, value) = match kind {
            Reference::Climatology => ("climatology", y.iter().sum::<f64>() / y.len() as f64),
            Reference::GClimatology => ("g-climatology", g_climatology(score, y)?),
        };
        let reference = vec![Prediction::Scalar(value); y.len()];
        report.reference = Some(format!("{label} = {value}"));
        report.reference_score = Some(average_score(score, &reference, y)?);
        report.skill = Some(skill_score(score, &z, &reference, Optimum::ZeroOptimum, y)?);
    }
    emit(out, &to_json(&report))
}

/// The constant prediction a transformed squared error elicits from the sample.
fn g_climatology(score: &ScoreSpec, y: &[f64]) -> Result<f64, Failure> {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    match score.transform {
        TransformMode::Both(g) => Ok(transformed_climatology(&g, y)?),
        TransformMode::RealizationOnly(g) => {
            let w = y
                .iter()
                .map(|&v| g.apply(v))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(mean(&w))
        }
        TransformMode::PredictionOnly(g) => Ok(g.apply(mean(y))?),
        TransformMode::None => Err(Failure::Usage(format!(
            "g-climatology needs a transformed score, got `{score}`"
        ))),
    }
}

fn verify(
    suite: &str,
    seed: Option<Seed>,
    jobs: Option<usize>,
    out: Option<&Path>,
    timings: bool,
) -> Result<(), Failure> {
    let configs = match suite.strip_prefix("builtin:") {
        Some(name) => builtin_suite(name, seed),
        None => {
            let text = fs::read_to_string(suite)
                .map_err(|e| Failure::Usage(format!("cannot read suite {suite}: {e}")))?;
            load_suite(&text, seed)
        }
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut reports: Vec<VerificationReport> = run_suite(&configs, jobs)?;
    if !timings {
        reports.iter_mut().for_each(|r| r.ms = None);
    }
    emit(out, &to_json(&reports))?;
    let unexpected: Vec<&str> = reports
        .iter()
        .filter(|r| !r.as_expected())
        .map(|r| r.check.as_str())
        .collect();
    eprintln!(
        "{}/{} checks behaved as expected",
        reports.len() - unexpected.len(),
        reports.len()
    );
    if unexpected.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "unexpected outcome: {}",
            unexpected.join(", ")
        )))
    }
}
