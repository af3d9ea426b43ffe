//! M-estimators built from consistent scores recover their functionals.

use elicit::distributions::sample_iid;
use elicit::functionals::functional_value;
use elicit::{fit, DistributionSpec, FunctionalSpec, ModelSpec, ScoreSpec, Seed};
use proptest::prelude::*;

fn constant(score: &str, y: &[f64]) -> f64 {
    let s: ScoreSpec = score.parse().unwrap();
    fit(ModelSpec::Constant, &s, None, y, None, 1e-10)
        .unwrap()
        .theta[0]
}

#[test]
fn constant_fits_recover_functionals_at_scale() {
    let pairings = [
        ("se", "mean", "normal(1,2)"),
        ("apl:tau=0.9", "quantile:tau=0.9", "exponential(1)"),
        ("apl:tau=0.25", "quantile:tau=0.25", "lognormal(0,1)"),
        (
            "expectile:tau=0.8:phi=square",
            "expectile:tau=0.8",
            "exponential(1)",
        ),
        ("se@both:log", "gmean:g=log", "lognormal(0.2,0.5)"),
        ("se@both:power(0.5)", "gmean:g=power(0.5)", "exponential(2)"),
        (
            "expectile:tau=0.7:phi=square@both:log",
            "gexpectile:tau=0.7:g=log",
            "lognormal(0,1)",
        ),
    ];
    for (i, (score, functional, dist)) in pairings.into_iter().enumerate() {
        let dist: DistributionSpec = dist.parse().unwrap();
        let f: FunctionalSpec = functional.parse().unwrap();
        let y = sample_iid(&dist, 100_000, Seed(i as u64)).unwrap();
        let theta = constant(score, &y);
        let truth = functional_value(&f, &dist, 100_000, Seed(1_000 + i as u64)).unwrap();
        let t = truth.value.point().unwrap();
        // stderr of the sample functional itself, from an independent sample
        let se = elicit::functionals::functional_from_sample(&f, &y)
            .unwrap()
            .stderr
            .hypot(truth.stderr);
        assert!(
            (theta - t).abs() <= (0.02 * t.abs()).max(5.0 * se),
            "{score}: {theta} vs {t} (se {se})"
        );
    }
}

#[test]
fn linear_model_on_exact_data() {
    let x: Vec<f64> = (0..25).map(|i| i as f64 * 0.4).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let se: ScoreSpec = "se".parse().unwrap();
    let r = fit(ModelSpec::Linear, &se, Some(&x), &y, None, 1e-12).unwrap();
    assert!(
        r.theta[0].abs() < 1e-8 && (r.theta[1] - 2.0).abs() < 1e-8,
        "{r:?}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Fitting `S(g^{-1}(z), y)` returns `g` of the plain fit.
    #[test]
    fn prediction_transform_reveals_g_of_the_fit(seed in 0u64..10_000, n in 5usize..80) {
        let y = sample_iid(&DistributionSpec::lognormal(0.0, 0.7).unwrap(), n, Seed(seed)).unwrap();
        for (plain, g, apply) in [
            ("se", "log", (|t: f64| t.ln()) as fn(f64) -> f64),
            ("se", "exp", |t: f64| t.exp()),
            ("expectile:tau=0.7:phi=square", "power(2)", |t: f64| t * t),
        ] {
            let base = constant(plain, &y);
            let revealed = constant(&format!("{plain}@prediction:{g}"), &y);
            let expect = apply(base);
            prop_assert!((revealed - expect).abs() <= 1e-7 * expect.abs().max(1.0), "{plain}/{g}: {revealed} vs {expect}");
        }
    }

    #[test]
    fn squared_error_fit_is_the_sample_mean(values in prop::collection::vec(-1e3f64..1e3, 1..60)) {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let theta = constant("se", &values);
        prop_assert!((theta - mean).abs() <= 1e-10 * mean.abs().max(1.0));
    }

    #[test]
    fn pinball_fit_lies_in_the_quantile_interval(values in prop::collection::vec(-50.0f64..50.0, 1..40), tau in 0.05f64..0.95) {
        let (lo, hi) = elicit::distributions::empirical_quantile_interval(&values, tau);
        let q = constant(&format!("apl:tau={tau}"), &values);
        prop_assert!(lo <= q && q <= hi, "{} not in [{}, {}]", q, lo, hi);
    }
}
