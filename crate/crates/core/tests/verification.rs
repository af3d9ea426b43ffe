//! Suite-level verification: builtin suites, determinism and independent
//! oracles for the transformed-expectation catalog.

use elicit::numerics::{mc_expectation, Bracket};
use elicit::verify::{builtin_suite, run_check, CheckConfig, ReportValue};
use elicit::{run_suite, Bijection, CheckKind, DistributionSpec, FunctionalSpec, Seed};

fn scalar(v: Option<ReportValue>) -> f64 {
    match v {
        Some(ReportValue::Scalar(x)) => x,
        other => panic!("expected a scalar, got {other:?}"),
    }
}

#[test]
fn smoke_suite_behaves_as_expected() {
    let reports = run_suite(&builtin_suite("smoke", None).unwrap(), 2).unwrap();
    assert_eq!(reports.len(), 8);
    for r in &reports {
        assert!(r.as_expected(), "{}: {:?}", r.check, r.notes);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let suite = builtin_suite("smoke", Some(Seed(99))).unwrap();
    let strip = |mut v: Vec<elicit::VerificationReport>| {
        v.iter_mut().for_each(|r| r.ms = None);
        v
    };
    let one = strip(run_suite(&suite, 1).unwrap());
    let four = strip(run_suite(&suite, 4).unwrap());
    assert_eq!(one, four);
}

#[test]
fn wrong_target_fails() {
    let mut cfg = CheckConfig::new(
        "wrong",
        CheckKind::Consistency,
        DistributionSpec::normal(0.0, 1.0).unwrap(),
    );
    cfg.score = Some("se".parse().unwrap());
    cfg.target = Some(0.5);
    cfg.grid = Some(Bracket::new(-2.0, 2.0).unwrap());
    cfg.n = 100_000;
    let r = run_check(&cfg);
    assert!(!r.pass, "{r:?}");
}

/// Every bijection row: the checked minimizer matches `g^{-1}(E[g(Y)])`
/// computed here by plain Monte Carlo and inversion.
#[test]
fn catalog_rows_match_independent_transformed_means() {
    let suite = builtin_suite("catalog-rows", Some(Seed(5))).unwrap();
    let reports = run_suite(&suite, 4).unwrap();
    assert_eq!(reports.len(), 15);
    for (cfg, r) in suite.iter().zip(&reports) {
        assert!(r.pass, "{}: {:?}", r.check, r.notes);
        let Some(FunctionalSpec::GMean { g }) = cfg.functional else {
            panic!("{}: unexpected functional", cfg.name)
        };
        let m = mc_expectation(|y| g.apply(y).unwrap(), &cfg.dist, 1_000_000, Seed(77)).unwrap();
        let oracle = g.invert(m.value).unwrap();
        // delta method: se of g^{-1}(m) is se(m) / |g'(oracle)|
        let oracle_se = m.stderr / g.deriv(oracle).unwrap().abs();
        let est = scalar(r.estimate);
        let se = scalar(r.stderr).hypot(oracle_se);
        assert!(
            (est - oracle).abs() <= (0.02 * oracle.abs()).max(3.0 * se),
            "{}: {est} vs {oracle} (se {se})",
            r.check
        );
    }
}

#[test]
fn realization_examples() {
    let cases = [
        // median of log Y for Y ~ LN(0,1) is 0
        (
            "ae",
            "log",
            "lognormal(0,1)",
            "quantile:tau=0.5",
            0.0,
            [-1.0, 1.0],
        ),
        // E[Y^2] = 1 for Y ~ N(0,1): a non-injective map
        ("se", "square", "normal(0,1)", "mean", 1.0, [0.2, 2.5]),
        ("se", "log", "lognormal(0,1)", "mean", 0.0, [-1.0, 1.0]),
    ];
    for (score, map, dist, functional, truth, [lo, hi]) in cases {
        let mut cfg = CheckConfig::new(score, CheckKind::Realization, dist.parse().unwrap());
        cfg.score = Some(score.parse().unwrap());
        cfg.map = Some(map.parse().unwrap());
        cfg.functional = Some(functional.parse().unwrap());
        cfg.grid = Some(Bracket::new(lo, hi).unwrap());
        cfg.n = 400_000;
        cfg.seed = Seed(8);
        let r = run_check(&cfg);
        assert!(r.pass, "{score}/{map}: {r:?}");
        let est = scalar(r.estimate);
        assert!(
            (est - truth).abs() <= 0.02f64.max(3.0 * scalar(r.stderr)),
            "{score}/{map}: {est}"
        );
    }
}

#[test]
fn mean_variance_pairs() {
    let cases = [
        ("normal(2,3)", None, [2.0, 9.0], [1.0, 3.0], [6.0, 12.0]),
        (
            "uniform(0,1)",
            None,
            [0.5, 1.0 / 12.0],
            [0.3, 0.7],
            [0.05, 0.12],
        ),
        (
            "lognormal(0.5,2)",
            Some(Bijection::Log),
            [0.5, 4.0],
            [0.2, 0.8],
            [3.0, 5.2],
        ),
    ];
    for (dist, g, truth, g1, g2) in cases {
        let mut cfg = CheckConfig::new(dist, CheckKind::Pair, dist.parse().unwrap());
        cfg.score = Some("mv".parse().unwrap());
        cfg.g = g;
        cfg.grid = Some(Bracket::new(g1[0], g1[1]).unwrap());
        cfg.grid2 = Some(Bracket::new(g2[0], g2[1]).unwrap());
        cfg.points = 31;
        cfg.n = 200_000;
        cfg.tol_rel = 0.03;
        cfg.seed = Seed(12);
        let r = run_check(&cfg);
        assert!(r.pass, "{dist}: {r:?}");
        let Some(ReportValue::Pair(est)) = r.estimate else {
            panic!()
        };
        for i in 0..2 {
            assert!(
                (est[i] - truth[i]).abs() <= 0.05 * truth[i].abs().max(0.1),
                "{dist}: {est:?}"
            );
        }
    }
}

#[test]
fn set_valued_median_is_not_strict() {
    let suite = builtin_suite("paper-core", None).unwrap();
    let cfg = suite
        .iter()
        .find(|c| c.name == "strictness/set-valued-median")
        .unwrap();
    let r = run_check(cfg);
    assert!(!r.pass && r.as_expected(), "{r:?}");
    assert!(r.notes.iter().any(|n| n.contains("flat")), "{:?}", r.notes);
}

#[test]
fn bracket_edge_is_reported() {
    let mut cfg = CheckConfig::new(
        "edge",
        CheckKind::Consistency,
        DistributionSpec::normal(5.0, 1.0).unwrap(),
    );
    cfg.score = Some("se".parse().unwrap());
    cfg.functional = Some(FunctionalSpec::Mean);
    cfg.grid = Some(Bracket::new(-2.0, 2.0).unwrap());
    cfg.n = 20_000;
    let r = run_check(&cfg);
    assert!(!r.pass);
    assert!(r.notes.iter().any(|n| n.contains("edge")), "{:?}", r.notes);
}

#[test]
fn unsupported_law_is_a_domain_error() {
    let mut cfg = CheckConfig::new(
        "dom",
        CheckKind::Consistency,
        DistributionSpec::normal(0.0, 1.0).unwrap(),
    );
    cfg.score = Some("se@both:log".parse().unwrap());
    cfg.functional = Some("gmean:g=log".parse().unwrap());
    cfg.grid = Some(Bracket::new(0.5, 2.0).unwrap());
    cfg.n = 20_000;
    let r = run_check(&cfg);
    assert!(!r.pass);
    assert!(
        r.notes.iter().any(|n| n.contains("domain")),
        "{:?}",
        r.notes
    );
}
