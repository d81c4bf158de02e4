//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Built with `harness = false` so the lines print under plain
//! `cargo test`; the process fails if any criterion fails.

use std::process::{Command, ExitCode};

use qkgamma::gammabeta::{limit_q_to_1, LimitFamily};
use qkgamma::qexp::{big_e, small_e, small_e_radius, ExpMethod};
use qkgamma::suites::Q_TO_ONE;
use qkgamma::{run_suite, GridSpec, IdentityReport, QKContext, Status, SuiteConfig, Truncation};

type Verdict = Result<String, String>;

fn suite(name: &str) -> IdentityReport {
    run_suite(name, &GridSpec::default_grid(), &SuiteConfig::default()).expect("registered suite")
}

/// Every record of `rep` whose check starts with one of `prefixes` passed at
/// a tolerance no looser than `tol`, and each prefix matched `min` passes.
fn require(rep: &IdentityReport, prefixes: &[&str], tol: f64, min: usize) -> Verdict {
    if let Some(r) = rep.failures().next() {
        return Err(format!(
            "{} failures, first {} at {:?}: rel {:?} {:?}",
            rep.summary.failed, r.check, r.point, r.rel_residual, r.note
        ));
    }
    for p in prefixes {
        let recs: Vec<_> = rep
            .records
            .iter()
            .filter(|r| r.check.starts_with(p))
            .collect();
        let passed = recs.iter().filter(|r| r.status == Status::Pass).count();
        if passed < min {
            return Err(format!("'{p}': {passed} passing checks, need {min}"));
        }
        if let Some(r) = recs
            .iter()
            .find(|r| r.status == Status::Pass && r.tolerance > tol)
        {
            return Err(format!(
                "'{}' checked at {:e}, looser than {tol:e}",
                r.check, r.tolerance
            ));
        }
    }
    Ok(format!(
        "{} pass, {} skipped, max rel {:.1e}",
        rep.summary.passed, rep.summary.skipped, rep.summary.max_rel_residual
    ))
}

fn no_skips(rep: &IdentityReport, v: Verdict) -> Verdict {
    match rep.count(Status::Skipped) {
        0 => v,
        n => Err(format!("{n} points skipped on the default grid")),
    }
}

fn c1_brackets() -> Verdict {
    let rep = suite("bracket-identities");
    let triples = rep
        .records
        .iter()
        .filter(|r| r.check.starts_with("[s+t]"))
        .count();
    if triples != 1000 {
        return Err(format!("{triples} random triples, expected 1000"));
    }
    require(&rep, &["[s+t]", "[st]"], 1e-13, 1000)
}

fn c2_derivatives() -> Verdict {
    let rep = suite("q-derivative-rules");
    require(&rep, &["leibniz", "quotient", "power chain"], 1e-12, 100)
}

fn c3_gamma_ladder() -> Verdict {
    let rep = suite("gamma-ladder");
    let mut checks = vec!["gamma(t+k) = [t] gamma(t)".to_string()];
    checks.extend((1..=6).map(|n| format!("gamma(t+{n}k)/gamma(t)")));
    let refs: Vec<&str> = checks.iter().map(String::as_str).collect();
    no_skips(&rep, require(&rep, &refs, 1e-10, 64))
}

fn c4_beta_ladder() -> Verdict {
    let rep = suite("beta-ladder");
    let props = [
        "B(t,inf) = (1-q)^{t/k} gamma(t)",
        "B(t,s+k) = B(t,s) - q^s B(t+k,s)",
        "B(t,s+k) = [s]/[s+t] B(t,s)",
        "B(t+k,s) = [t]/[s] B(t,s+k)",
        "B(t,k) = 1/[t]",
        "B(t,5k) finite form",
    ];
    no_skips(&rep, require(&rep, &props, 1e-10, 64))
}

fn c5_tildes() -> Verdict {
    let rep = suite("tildes-equivalence");
    let base = no_skips(
        &rep,
        require(
            &rep,
            &["integral gamma = gamma", "integral B = B"],
            1e-8,
            64,
        ),
    )?;
    let near_one =
        GridSpec::parse("q = list(0.999)\nk = list(1, 2)\nt = list(2.3, 5)\ns = list(2.3)")
            .unwrap();
    let cfg = SuiteConfig {
        trunc: Truncation::default().with_max_terms(1_000_000).unwrap(),
        tol: Some(1e-6),
        ..SuiteConfig::default()
    };
    let rep = run_suite("tildes-equivalence", &near_one, &cfg).unwrap();
    let far = no_skips(
        &rep,
        require(&rep, &["integral gamma = gamma", "integral B = B"], 1e-6, 4),
    )?;
    Ok(format!("default grid {base}; q = 0.999 cells {far}"))
}

fn c6_teor() -> Verdict {
    let rep = suite("teor-equivalence");
    let checks = [
        "c(a,t) gamma_a(t) = gamma(t)",
        "c(a,t) beta_a(t,s) = B(t,s)",
        "c gamma_a independent of a",
        "c beta_a independent of a",
    ];
    no_skips(&rep, require(&rep, &checks, 1e-7, 64))
}

fn c7_c_properties() -> Verdict {
    let rep = suite("c-properties");
    require(&rep, &["c(qa,t) = c(a,t)"], 1e-12, 64)?;
    require(
        &rep,
        &[
            "c(a,t+k) = q^t c(a,t)",
            "c(a,k) = 1",
            "c(a,2k)",
            "c(a,3k)",
            "c(a,4k)",
        ],
        1e-11,
        16,
    )?;
    require(&rep, &["q -> 1 limit monotone"], 1e-11, 16)?;
    no_skips(&rep, require(&rep, &["q -> 0 limit monotone"], 1e-11, 1))
}

fn c8_bilateral() -> Verdict {
    let ram = suite("ramanujan");
    let ram_v = require(&ram, &["bilateral sum = product"], 1e-8, 10)?;
    let jac = suite("jacobi");
    let jac_v = require(&jac, &["sum = product"], 1e-8, 10)?;
    require(&jac, &["truncation doubling"], 1e-13, 10)?;
    Ok(format!("ramanujan {ram_v}; jacobi {jac_v}"))
}

fn c9_limits() -> Verdict {
    let rep = suite("limits");
    let v = no_skips(
        &rep,
        require(
            &rep,
            &["q -> 1 errors shrink", "q -> 1 final error"],
            1e-2,
            6,
        ),
    )?;
    let tr = Truncation::default();
    for (family, target) in [
        (LimitFamily::Gamma { t: 2.0 }, 1.0),
        (LimitFamily::Beta { t: 2.0, s: 3.0 }, 1.0 / 12.0),
    ] {
        let table = limit_q_to_1(family, 1.0, &Q_TO_ONE, &tr).map_err(|e| e.to_string())?;
        if table.target != target || table.final_error() >= 1e-2 {
            return Err(format!(
                "{}: final error {:e}",
                table.label,
                table.final_error()
            ));
        }
    }
    Ok(format!(
        "{v}; anchors gamma(2) = 1 and B(2,3) = 1/12 reached"
    ))
}

/// Series vs product at `x`, or `None` when the alternating series cancels
/// too deeply for double precision to reach `tol`.
fn exp_residual(
    f: impl Fn(f64, ExpMethod) -> qkgamma::Result<qkgamma::Approx>,
    x: f64,
    tol: f64,
) -> Result<Option<f64>, String> {
    let at = |x, m| f(x, m).map(|a| a.value).map_err(|e| e.to_string());
    let product = at(x, ExpMethod::Product)?;
    // with x replaced by |x| every series term is positive
    let mass = at(x.abs(), ExpMethod::Series)?;
    if 64.0 * f64::EPSILON * mass >= tol * product.abs() {
        return Ok(None);
    }
    let series = at(x, ExpMethod::Series)?;
    Ok(Some(
        (series - product).abs() / series.abs().max(product.abs()),
    ))
}

fn c10_exponentials() -> Verdict {
    let tr = Truncation::default();
    let (mut worst_big, mut worst_small) = (0.0f64, 0.0f64);
    let (mut checked, mut skipped) = (0, 0);
    let grid = GridSpec::default_grid();
    for &q in grid.get("q").unwrap() {
        for &k in grid.get("k").unwrap() {
            let ctx = QKContext::new(q, k).unwrap();
            let r = small_e_radius(&ctx);
            let cases = [-3.0, -1.2, -0.4, 0.0, 0.5, 1.0, 2.5, 4.0]
                .map(|x| (true, x))
                .into_iter()
                .chain([-0.9, -0.5, -0.1, 0.0, 0.3, 0.6, 0.9].map(|f| (false, f * r)));
            for (big, x) in cases {
                let res = if big {
                    exp_residual(|x, m| big_e(&ctx, x, m, &tr), x, 1e-11)?
                } else {
                    exp_residual(|x, m| small_e(&ctx, x, m, &tr), x, 1e-10)?
                };
                match (res, big) {
                    (None, _) => skipped += 1,
                    (Some(v), true) => worst_big = worst_big.max(v),
                    (Some(v), false) => worst_small = worst_small.max(v),
                }
                checked += res.is_some() as usize;
            }
        }
    }
    if worst_big >= 1e-11 || worst_small >= 1e-10 {
        return Err(format!("E {worst_big:.1e}, e {worst_small:.1e}"));
    }
    Ok(format!(
        "{checked} points, {skipped} ill-conditioned skipped, max rel E {worst_big:.1e}, e {worst_small:.1e}"
    ))
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qkgamma"))
        .args(args)
        .env_remove("QK_MAX_TERMS")
        .output()
        .expect("binary runs")
}

fn c11_cli() -> Verdict {
    let args = ["verify", "all", "--format", "json", "--seed", "7"];
    let (a, b) = (run_cli(&args), run_cli(&args));
    if a.stdout.is_empty() || a.stdout != b.stdout {
        return Err("repeated verify all runs differ".into());
    }
    let grid = std::env::temp_dir().join(format!("qkgamma-acceptance-{}.grid", std::process::id()));
    std::fs::write(&grid, "q = list(0.5\n").unwrap();
    let goldens: [(&[&str], i32); 5] = [
        (&args, 0),
        (&["eval", "gamma", "--q", "1.5", "--k", "1", "--t", "2"], 2),
        (
            &[
                "eval",
                "gamma",
                "--q",
                "0.9",
                "--k",
                "1",
                "--t",
                "2.5",
                "--max-terms",
                "8",
            ],
            3,
        ),
        (&["verify", "gamma-ladder", "--tol", "1e-30"], 1),
        (&["verify", "jacobi", "--grid", grid.to_str().unwrap()], 2),
    ];
    let mut result = Ok(format!("{} byte-identical JSON bytes; ", a.stdout.len()));
    for (argv, want) in goldens {
        let got = if argv == args {
            a.status.code()
        } else {
            run_cli(argv).status.code()
        };
        if got != Some(want) {
            result = Err(format!(
                "'{}' exited {got:?}, expected {want}",
                argv.join(" ")
            ));
            break;
        }
    }
    let _ = std::fs::remove_file(&grid);
    result.map(|s| s + "exit codes 0, 2, 3, 1, 2 as contracted")
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        (
            "bracket identities on 1000 random triples, 1e-13",
            c1_brackets,
        ),
        (
            "q-derivative rules on monomials at 100 points, 1e-12",
            c2_derivatives,
        ),
        (
            "gamma recurrence and Pochhammer ladder n <= 6, 1e-10",
            c3_gamma_ladder,
        ),
        ("beta properties, 1e-10", c4_beta_ladder),
        (
            "integral gamma and beta vs closed forms, 1e-8 (q = 0.999 at 1e-6)",
            c5_tildes,
        ),
        (
            "c(a,t) times small-a integrals, a-independent, 1e-7",
            c6_teor,
        ),
        ("c(a,t) properties and limit tables", c7_c_properties),
        (
            "Ramanujan and Jacobi identities, truncation doubling",
            c8_bilateral,
        ),
        ("q -> 1 limits shrink to classical targets", c9_limits),
        ("E and e series vs product", c10_exponentials),
        ("CLI determinism and exit codes", c11_cli),
    ];
    let mut failed = 0;
    for (i, (what, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {:>2}: {what} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {what} ({why})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
