use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use elicit::estimation::{fit, ModelSpec};
use elicit::numerics::{minimize1d, Bracket};
use elicit::verify::builtin_suite;
use elicit::{run_check, ScoreSpec};
use elicit_bench::positive_sample;

fn score_eval(c: &mut Criterion) {
    let ys = positive_sample(10_000);
    let mut group = c.benchmark_group("score_eval");
    for spec in [
        "se",
        "apl:tau=0.9",
        "se@both:log",
        "gpl:tau=0.5:g=box-cox(0.25)",
        "bregman:phi=xlogx",
    ] {
        let score: ScoreSpec = spec.parse().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(spec), &score, |b, s| {
            b.iter(|| ys.iter().map(|&y| s.score(1.3, y).unwrap()).sum::<f64>())
        });
    }
    group.finish();
}

fn minimize(c: &mut Criterion) {
    let bracket = Bracket::new(-10.0, 10.0).unwrap();
    c.bench_function("minimize1d/quartic", |b| {
        b.iter(|| minimize1d(|z| (z - 1.7).powi(4) + 0.1 * z, black_box(bracket), 1e-10).unwrap())
    });
}

fn constant_fit(c: &mut Criterion) {
    let ys = positive_sample(2_000);
    let mut group = c.benchmark_group("constant_fit");
    for spec in ["se", "apl:tau=0.5", "se@both:log"] {
        let score: ScoreSpec = spec.parse().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(spec), &score, |b, s| {
            b.iter(|| fit(ModelSpec::Constant, s, None, &ys, None, 1e-10).unwrap())
        });
    }
    group.finish();
}

fn suite_check(c: &mut Criterion) {
    let checks = builtin_suite("smoke", None).unwrap();
    let mut group = c.benchmark_group("smoke_check");
    group.sample_size(10);
    for cfg in checks.iter().take(3) {
        group.bench_with_input(BenchmarkId::from_parameter(&cfg.name), cfg, |b, cfg| {
            b.iter(|| run_check(cfg))
        });
    }
    group.finish();
}

criterion_group!(benches, score_eval, minimize, constant_fit, suite_check);
criterion_main!(benches);
