//! Verification suites end to end on the default grid and a few custom ones.

use qkgamma::suites::SUITE_NAMES;
use qkgamma::{run_all, run_suite, GridSpec, QKContext, Status, SuiteConfig, Truncation};

fn failures(rep: &qkgamma::IdentityReport) -> String {
    rep.failures()
        .take(5)
        .map(|r| {
            format!(
                "{} {:?} rel={:?} {:?}",
                r.check, r.point, r.rel_residual, r.note
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn every_suite_passes_on_the_default_grid() {
    let grid = GridSpec::default_grid();
    let cfg = SuiteConfig::default();
    for name in SUITE_NAMES {
        let rep = run_suite(name, &grid, &cfg).unwrap();
        assert!(rep.passed(), "{name}:\n{}", failures(&rep));
        assert!(rep.summary.passed > 0, "{name} checked nothing");
        assert!(rep.records.iter().all(|r| r.suite == name));
    }
}

#[test]
fn aggregate_matches_the_individual_suites() {
    let grid = GridSpec::parse(
        "q = list(0.5)\nk = list(1, 2)\nt = list(1, 2.3)\ns = list(2.3)\na = list(1)",
    )
    .unwrap();
    let cfg = SuiteConfig::default();
    let agg = run_all(&grid, &cfg);
    assert_eq!(agg.suite, "all");
    assert_eq!(agg.suites.len(), SUITE_NAMES.len());
    let total: usize = SUITE_NAMES
        .iter()
        .map(|n| run_suite(n, &grid, &cfg).unwrap().summary.total)
        .sum();
    assert_eq!(agg.summary.total, total);
    assert!(agg.passed());
    let flat = run_suite("all", &grid, &cfg).unwrap();
    assert_eq!(flat.summary.total, total);
}

#[test]
fn near_one_tildes_cells_meet_the_relaxed_tolerance() {
    let grid = GridSpec::parse("q = list(0.999)\nk = list(1, 2)\nt = list(2.3, 5)\ns = list(2.3)")
        .unwrap();
    let cfg = SuiteConfig {
        trunc: Truncation::default().with_max_terms(1_000_000).unwrap(),
        tol: Some(1e-6),
        ..SuiteConfig::default()
    };
    let rep = run_suite("tildes-equivalence", &grid, &cfg).unwrap();
    assert!(rep.passed(), "{}", failures(&rep));
    assert_eq!(rep.count(Status::Skipped), 0);
}

#[test]
fn impossible_tolerance_fails_without_panicking() {
    let grid = GridSpec::parse("q = list(0.7)\nk = list(1.5)\nt = list(2.3)").unwrap();
    let cfg = SuiteConfig {
        tol: Some(1e-30),
        ..SuiteConfig::default()
    };
    let rep = run_suite("gamma-ladder", &grid, &cfg).unwrap();
    assert!(!rep.passed());
    assert!(rep.records.iter().all(|r| r.tolerance == 1e-30));
}

#[test]
fn tiny_term_cap_is_a_recorded_failure() {
    let grid = GridSpec::parse("q = list(0.9)\nk = list(1)\nt = list(2.3)\ns = list(2.3)").unwrap();
    let cfg = SuiteConfig {
        trunc: Truncation::default().with_max_terms(8).unwrap(),
        ..SuiteConfig::default()
    };
    let rep = run_suite("beta-ladder", &grid, &cfg).unwrap();
    assert!(!rep.passed());
    assert!(rep.failures().any(|r| r
        .note
        .as_deref()
        .is_some_and(|n| n.contains("no convergence"))));
}

#[test]
fn jacobi_zero_point_is_skipped_and_suite_passes() {
    let grid = GridSpec::parse("q = list(0.5)\nk = list(1)\nx = list(0, 0.3, -1.7, 4.2)").unwrap();
    let rep = run_suite("jacobi", &grid, &SuiteConfig::default()).unwrap();
    assert!(rep.passed(), "{}", failures(&rep));
    let skipped: Vec<_> = rep
        .records
        .iter()
        .filter(|r| r.status == Status::Skipped)
        .collect();
    assert_eq!(skipped.len(), 1);
    assert_eq!(skipped[0].point["x"], 0.0);
}

#[test]
fn ramanujan_has_enough_admissible_points() {
    let rep = run_suite(
        "ramanujan",
        &GridSpec::default_grid(),
        &SuiteConfig::default(),
    )
    .unwrap();
    let checked = rep
        .records
        .iter()
        .filter(|r| r.check == "bilateral sum = product" && r.status == Status::Pass)
        .inspect(|r| assert!(r.rel_residual.unwrap() < 1e-8))
        .count();
    assert!(checked >= 10, "{checked}");
}

#[test]
fn reports_are_deterministic_and_carry_the_schema() {
    let grid = GridSpec::default_grid();
    let cfg = SuiteConfig::default();
    let a = serde_json::to_string(&run_all(&grid, &cfg)).unwrap();
    let b = serde_json::to_string(&run_all(&grid, &cfg)).unwrap();
    assert!(a == b, "two runs differ");

    let rep = run_suite("c-properties", &grid, &cfg).unwrap();
    let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
    for r in v["records"].as_array().unwrap() {
        for field in [
            "suite",
            "point",
            "lhs",
            "rhs",
            "abs_residual",
            "rel_residual",
            "status",
        ] {
            assert!(r.get(field).is_some(), "missing {field}");
        }
    }
}

#[test]
fn different_seeds_draw_different_bracket_triples() {
    let grid = GridSpec::default_grid();
    let run = |seed| {
        let cfg = SuiteConfig {
            seed,
            ..SuiteConfig::default()
        };
        run_suite("bracket-identities", &grid, &cfg).unwrap()
    };
    let (a, b) = (run(7), run(8));
    assert!(a.passed() && b.passed());
    assert_ne!(a.records[0].point, b.records[0].point);
}

#[test]
fn out_of_band_grid_values_are_skipped() {
    let grid = GridSpec::parse("q = list(0.5, 1.2)\nk = list(1)\nt = list(2.3)").unwrap();
    let rep = run_suite("gamma-ladder", &grid, &SuiteConfig::default()).unwrap();
    assert!(rep.passed());
    assert!(rep
        .records
        .iter()
        .any(|r| r.status == Status::Skipped && r.point["q"] == 1.2));
    assert!(QKContext::new(1.2, 1.0).is_err());
}
