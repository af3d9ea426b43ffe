//! Behaviour of the `elicit` binary: outputs, exit codes, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn elicit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elicit"))
        .args(args)
        .env_remove("ELICIT_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn catalog_json_has_box_cox_row() {
    let out = elicit(&["catalog", "--format", "json"]);
    assert!(out.status.success());
    let rows = json(&out);
    let row = rows
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "box-cox")
        .expect("box-cox listed");
    assert_eq!(row["functional"], "(𝔼_F[yᵃ])^{1/a} / exp(𝔼_F[log y])");
}

#[test]
fn catalog_text_and_families() {
    let out = elicit(&["catalog", "--family", "bijections"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("  ")).count() >= 12);
    let scores = json(&elicit(&[
        "catalog", "--family", "scores", "--format", "json",
    ]));
    assert_eq!(scores.as_array().unwrap().len(), 7);
}

#[test]
fn score_perfect_predictions() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "y,z\n1,1\n2.5,2.5\n4,4\n");
    let r = json(&elicit(&[
        "score",
        "--score",
        "se",
        "--data",
        s(&data),
        "--skill",
        "climatology",
    ]));
    assert_eq!(r["average"], 0.0);
    assert_eq!(r["skill"], 1.0);
}

#[test]
fn climatology_skill_is_nse() {
    let dir = TempDir::new().unwrap();
    let y = [1.0, 3.0, 2.0, 7.0, 4.0];
    let z = [1.5, 2.0, 2.5, 6.0, 4.5];
    let mut text = String::from("y,z\n");
    for (a, b) in y.iter().zip(&z) {
        text.push_str(&format!("{a},{b}\n"));
    }
    let data = write(&dir, "d.csv", &text);
    let r = json(&elicit(&[
        "score",
        "--score",
        "se",
        "--data",
        s(&data),
        "--skill",
        "climatology",
    ]));
    let expected = elicit::nse(&z, &y).unwrap();
    assert_eq!(r["skill"].as_f64().unwrap(), expected);
}

#[test]
fn reference_prediction_has_zero_skill() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "y,z\n1,2\n4,2\n");
    let r = json(&elicit(&[
        "score",
        "--score",
        "se@both:log",
        "--data",
        s(&data),
        "--skill",
        "g-climatology",
    ]));
    assert_eq!(r["skill"], 0.0);
}

#[test]
fn score_errors_name_rows_and_set_exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = write(&dir, "m.csv", "y\n1\n");
    let out = elicit(&["score", "--score", "se", "--data", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing column `z`"));

    let bad = write(&dir, "b.csv", "y,z\n1,1\n2,abc\n");
    let out = elicit(&["score", "--score", "se", "--data", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let domain = write(&dir, "n.csv", "y,z\n1,1\n-2,1\n");
    let out = elicit(&["score", "--score", "se@both:log", "--data", s(&domain)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let out = elicit(&["score", "--score", "nope", "--data", s(&domain)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mean_variance_scores_read_x2() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "y,z,x2\n1,1,1\n3,2,1\n");
    let r = json(&elicit(&["score", "--score", "mv", "--data", s(&data)]));
    // x2^-2 (x1^2 - 2 x2 - 2 x1 y + y^2): -2 and (4 - 2 - 12 + 9) = -1
    assert_eq!(r["average"], -1.5);
}

#[test]
fn fit_examples() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "y\n1\n2\n3\n");
    let r = json(&elicit(&[
        "fit",
        "--model",
        "constant",
        "--score",
        "se",
        "--data",
        s(&a),
    ]));
    assert!((r["theta"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(r["converged"], true);

    let b = write(&dir, "b.csv", "y\n1\n2\n100\n");
    let r = json(&elicit(&[
        "fit",
        "--model",
        "constant",
        "--score",
        "apl:tau=0.5",
        "--data",
        s(&b),
    ]));
    assert_eq!(r["theta"][0], 2.0);

    let c = write(&dir, "c.csv", "y\n1\n4\n");
    let r = json(&elicit(&[
        "fit",
        "--model",
        "constant",
        "--score",
        "se@both:log",
        "--data",
        s(&c),
    ]));
    assert!((r["theta"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let d = write(&dir, "d.csv", "x,y\n0,1\n1,3\n2,5\n");
    let r = json(&elicit(&[
        "fit",
        "--model",
        "linear",
        "--score",
        "se",
        "--data",
        s(&d),
    ]));
    assert!((r["theta"][1].as_f64().unwrap() - 2.0).abs() < 1e-8);
}

const WRONG: &str = r#"
[[check]]
name = "wrong-target"
kind = "consistency"
dist = "normal(0,1)"
score = "se"
target = 0.5
grid = [-2.0, 2.0]
n = 20000
"#;

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let wrong = write(&dir, "wrong.toml", WRONG);
    let out = elicit(&["verify", "--suite", s(&wrong), "--jobs", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let reports = json(&out);
    assert_eq!(reports[0]["pass"], false);
    for key in [
        "check", "pass", "estimate", "target", "stderr", "tol_abs", "tol_rel", "seed", "ms",
    ] {
        assert!(reports[0].get(key).is_some(), "missing {key}");
    }

    let malformed = write(
        &dir,
        "bad.toml",
        "[[check]]\nname = 'x'\nkind = 'nonsense'\n",
    );
    assert_eq!(
        elicit(&["verify", "--suite", s(&malformed)]).status.code(),
        Some(2)
    );
    assert_eq!(
        elicit(&["verify", "--suite", "builtin:nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        elicit(&["verify", "--suite", "/does/not/exist.toml"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_is_repeatable_and_seeded() {
    let run = |seed: &str| {
        elicit(&[
            "verify",
            "--suite",
            "builtin:smoke",
            "--seed",
            seed,
            "--jobs",
            "2",
        ])
    };
    let (a, b, c) = (run("3"), run("3"), run("4"));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);

    // the env var supplies the default seed
    let env = Command::new(env!("CARGO_BIN_EXE_elicit"))
        .args(["verify", "--suite", "builtin:smoke", "--jobs", "1"])
        .env("ELICIT_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
}

#[test]
fn verify_writes_out_file() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.json");
    let out = elicit(&[
        "verify",
        "--suite",
        "builtin:smoke",
        "--out",
        s(&out_path),
        "--timings",
    ]);
    assert!(out.status.success());
    let reports: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(reports[0]["ms"].as_f64().is_some());
}

fn curve(args: &[&str]) -> Vec<[f64; 3]> {
    let out = elicit(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["z", "escore", "stderr"]);
    reader
        .deserialize::<(f64, f64, f64)>()
        .map(|r| {
            let (a, b, c) = r.unwrap();
            [a, b, c]
        })
        .collect()
}

fn argmin(rows: &[[f64; 3]]) -> f64 {
    rows.iter().min_by(|a, b| a[1].total_cmp(&b[1])).unwrap()[0]
}

#[test]
fn squared_error_curve() {
    let rows = curve(&[
        "curve",
        "--score",
        "se",
        "--dist",
        "normal(0,1)",
        "--bracket",
        "-2,2",
        "--points",
        "41",
        "--seed",
        "1",
    ]);
    assert_eq!(rows.len(), 41);
    assert!(argmin(&rows).abs() <= 0.1);
    for w in rows.windows(3) {
        assert!(w[0][1] - 2.0 * w[1][1] + w[2][1] >= -3.0 * w[1][2]);
    }
}

#[test]
fn pinball_curve_on_uniform() {
    let rows = curve(&[
        "curve",
        "--score",
        "apl:tau=0.9",
        "--dist",
        "uniform(0,1)",
        "--bracket",
        "0,1",
        "--points",
        "101",
    ]);
    assert!((argmin(&rows) - 0.9).abs() <= 0.02);
}

#[test]
fn curve_csv_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("c.csv");
    let args = [
        "curve",
        "--score",
        "se@both:log",
        "--dist",
        "lognormal(0,1)",
        "--bracket",
        "0.5,2",
        "--points",
        "17",
        "--seed",
        "9",
    ];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", s(&path)]);
    assert!(elicit(&with_out).status.success());
    let from_file = fs::read(&path).unwrap();
    assert_eq!(from_file, elicit(&args).stdout);

    let lib = elicit::verify::score_curve(
        &"se@both:log".parse().unwrap(),
        &"lognormal(0,1)".parse().unwrap(),
        elicit::numerics::Bracket::new(0.5, 2.0).unwrap(),
        17,
        100_000,
        elicit::Seed(9),
    )
    .unwrap();
    let rows = curve(&args);
    for (r, p) in rows.iter().zip(&lib) {
        assert_eq!((r[0], r[1], r[2]), (p.z, p.escore, p.stderr));
    }

    // the z column feeds back into `score` unchanged
    let mut text = String::from("y,z\n");
    for r in &rows {
        text.push_str(&format!("{},{}\n", r[0], r[0]));
    }
    let data = dir.path().join("zz.csv");
    fs::write(&data, text).unwrap();
    let r = json(&elicit(&["score", "--score", "se", "--data", s(&data)]));
    assert_eq!(r["average"], 0.0);
}

#[test]
fn curve_domain_error() {
    let out = elicit(&[
        "curve",
        "--score",
        "se@both:log",
        "--dist",
        "normal(0,1)",
        "--bracket",
        "0.5,2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = elicit(&[
        "curve",
        "--score",
        "se",
        "--dist",
        "normal(0,1)",
        "--bracket",
        "2,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
