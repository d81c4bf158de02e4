//! `qkgamma`: evaluate q,k-gamma and beta functions, run verification
//! suites over parameter grids and tabulate limits.
//!
//! Exit codes: 0 success, 1 verification failure, 2 violated precondition
//! or malformed input, 3 numerical failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qkgamma::gammabeta::{
    beta_qk, gamma_qk, limit_classical_k_to_1, limit_k_to_1, limit_q_to_1, LimitFamily, LimitTable,
};
use qkgamma::integral_reps::{
    beta_integral_e, beta_small_a, c_constant, gamma_integral_e, gamma_small_a,
};
use qkgamma::qexp::{big_e, small_e, ExpMethod};
use qkgamma::qproducts::pochhammer_qk;
use qkgamma::suites::SUITE_NAMES;
use qkgamma::{
    run_all, run_suite, Approx, CheckRecord, GridSpec, QKContext, QkError, SuiteConfig, Truncation,
};

const EXIT_FAIL: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qkgamma",
    version,
    about = "q,k-deformed gamma and beta functions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one function at one point.
    Eval {
        function: Function,
        #[command(flatten)]
        point: PointArgs,
        /// Exponential evaluation route.
        #[arg(long, default_value = "auto")]
        method: String,
        /// Pochhammer length.
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a verification suite, or `all`.
    Verify {
        suite: String,
        /// Grid file, or `default`.
        #[arg(long, default_value = "default")]
        grid: String,
        /// Pins a grid parameter to one value.
        #[command(flatten)]
        point: PointArgs,
        /// Replaces every per-check tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = qkgamma::suites::DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tabulate errors against a limiting value.
    Limits {
        target: Target,
        #[command(flatten)]
        point: PointArgs,
        /// Comma-separated q values approaching 1.
        #[arg(long, value_delimiter = ',')]
        q_seq: Option<Vec<f64>>,
        /// Comma-separated k values approaching 1; with --q the deformed
        /// limit at that q, otherwise the classical one.
        #[arg(long, value_delimiter = ',', conflicts_with = "q_seq")]
        k_seq: Option<Vec<f64>>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Default)]
struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    v: Option<f64>,
}

impl PointArgs {
    fn pairs(&self) -> Vec<(&'static str, f64)> {
        [
            ("q", self.q),
            ("k", self.k),
            ("t", self.t),
            ("s", self.s),
            ("a", self.a),
            ("x", self.x),
            ("u", self.u),
            ("v", self.v),
        ]
        .into_iter()
        .filter_map(|(n, v)| v.map(|v| (n, v)))
        .collect()
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Relative stopping tolerance of truncated sums and products.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Term cap per expansion; QK_MAX_TERMS sets the default.
    #[arg(long)]
    max_terms: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Function {
    #[value(name = "gamma")]
    Gamma,
    #[value(name = "beta")]
    Beta,
    #[value(name = "gamma_integral_E")]
    GammaIntegralE,
    #[value(name = "beta_integral_E")]
    BetaIntegralE,
    #[value(name = "gamma_small_a")]
    GammaSmallA,
    #[value(name = "beta_small_a")]
    BetaSmallA,
    #[value(name = "c")]
    C,
    #[value(name = "big_E")]
    BigE,
    #[value(name = "small_e")]
    SmallE,
    #[value(name = "pochhammer_qk")]
    PochhammerQk,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Gamma,
    Beta,
}

/// Why a command stopped early.
enum Failure {
    Precondition(String),
    Numerical(String),
}

impl From<QkError> for Failure {
    fn from(e: QkError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Precondition(e.to_string())
        }
    }
}

type Outcome = std::result::Result<u8, Failure>;

fn truncation(run: &RunArgs) -> Result<Truncation, Failure> {
    let mut tr = Truncation::default();
    let env_cap = match std::env::var("QK_MAX_TERMS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            Failure::Precondition(format!("QK_MAX_TERMS must be an integer, got '{v}'"))
        })?),
        Err(_) => None,
    };
    if let Some(cap) = run.max_terms.or(env_cap) {
        tr = tr.with_max_terms(cap)?;
    }
    if let Some(tol) = run.rel_tol {
        tr = tr.with_rel_tol(tol)?;
    }
    Ok(tr)
}

fn need(v: Option<f64>, name: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Precondition(format!("missing --{name}")))
}

#[derive(Serialize)]
struct EvalOutput {
    function: String,
    point: BTreeMap<String, f64>,
    value: f64,
    err_estimate: f64,
    terms_used: usize,
}

fn cmd_eval(
    function: Function,
    p: &PointArgs,
    method: &str,
    n: Option<u32>,
    run: &RunArgs,
) -> Outcome {
    let tr = truncation(run)?;
    let ctx = QKContext::new(need(p.q, "q")?, need(p.k, "k")?)?;
    let method: ExpMethod = method.parse()?;
    let mut point: BTreeMap<String, f64> =
        [("q".to_string(), ctx.q()), ("k".to_string(), ctx.k())].into();
    let mut get = |name: &str, v: Option<f64>| -> Result<f64, Failure> {
        let v = need(v, name)?;
        point.insert(name.to_string(), v);
        Ok(v)
    };
    let approx: Approx = match function {
        Function::Gamma => gamma_qk(&ctx, get("t", p.t)?, &tr)?,
        Function::Beta => beta_qk(&ctx, get("t", p.t)?, get("s", p.s)?, &tr)?,
        Function::GammaIntegralE => gamma_integral_e(&ctx, get("t", p.t)?, &tr)?,
        Function::BetaIntegralE => beta_integral_e(&ctx, get("t", p.t)?, get("s", p.s)?, &tr)?,
        Function::GammaSmallA => gamma_small_a(&ctx, get("t", p.t)?, get("a", p.a)?, &tr)?,
        Function::BetaSmallA => {
            beta_small_a(&ctx, get("t", p.t)?, get("s", p.s)?, get("a", p.a)?, &tr)?
        }
        Function::C => c_constant(&ctx, get("a", p.a)?, get("t", p.t)?, &tr)?,
        Function::BigE => big_e(&ctx, get("x", p.x)?, method, &tr)?,
        Function::SmallE => small_e(&ctx, get("x", p.x)?, method, &tr)?,
        Function::PochhammerQk => {
            let t = get("t", p.t)?;
            let n = n.ok_or_else(|| Failure::Precondition("missing --n".into()))?;
            point.insert("n".into(), n as f64);
            let v = pochhammer_qk(&ctx, t, n);
            if !v.is_finite() {
                return Err(Failure::Numerical(format!(
                    "[t]_{{n,k}} is not finite: {v}"
                )));
            }
            Approx::exact(v)
        }
    };
    let name = function
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let out = EvalOutput {
        function: name,
        point,
        value: approx.value,
        err_estimate: approx.err_estimate,
        terms_used: approx.terms_used,
    };
    let text = match run.format {
        Format::Json => json(&out),
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["function", "point", "value", "err_estimate", "terms_used"])
                .ok();
            w.write_record([
                out.function.clone(),
                point_text(&out.point),
                num(out.value),
                num(out.err_estimate),
                out.terms_used.to_string(),
            ])
            .ok();
            csv_text(w)
        }
        Format::Table => format!(
            "{} at {}\n  value        {}\n  err_estimate {:e}\n  terms_used   {}\n",
            out.function,
            point_text(&out.point),
            out.value,
            out.err_estimate,
            out.terms_used
        ),
    };
    emit(&text);
    Ok(0)
}

fn load_grid(spec: &str, p: &PointArgs) -> Result<GridSpec, Failure> {
    let mut grid = if spec == "default" {
        GridSpec::default_grid()
    } else {
        GridSpec::from_file(std::path::Path::new(spec))?
    };
    for (name, v) in p.pairs() {
        grid.set(name, vec![v]);
    }
    Ok(grid)
}

fn cmd_verify(
    suite: &str,
    grid: &str,
    p: &PointArgs,
    tol: Option<f64>,
    seed: u64,
    run: &RunArgs,
) -> Outcome {
    if !(suite == "all" || SUITE_NAMES.contains(&suite)) {
        return Err(Failure::Precondition(format!(
            "unknown suite '{suite}' (expected all or one of {})",
            SUITE_NAMES.join(", ")
        )));
    }
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::Precondition(format!(
                "--tol must be positive, got {t}"
            )));
        }
    }
    let grid = load_grid(grid, p)?;
    let cfg = SuiteConfig {
        trunc: truncation(run)?,
        tol,
        seed,
    };
    let (text, ok) = if suite == "all" {
        let rep = run_all(&grid, &cfg);
        let ok = rep.passed();
        let text = match run.format {
            Format::Json => json(&rep),
            Format::Csv => records_csv(rep.records()),
            Format::Table => {
                let mut s = String::new();
                for r in &rep.suites {
                    s += &summary_line(&r.suite, &r.summary);
                }
                s += &summary_line("all", &rep.summary);
                s += &failure_lines(rep.records());
                s
            }
        };
        (text, ok)
    } else {
        let rep = run_suite(suite, &grid, &cfg)?;
        let ok = rep.passed();
        let text = match run.format {
            Format::Json => json(&rep),
            Format::Csv => records_csv(rep.records.iter()),
            Format::Table => {
                summary_line(&rep.suite, &rep.summary) + &failure_lines(rep.records.iter())
            }
        };
        (text, ok)
    };
    emit(&text);
    Ok(if ok { 0 } else { EXIT_FAIL })
}

fn summary_line(name: &str, s: &qkgamma::report::Summary) -> String {
    format!(
        "{name:<20} {:>6} checks  {:>6} pass  {:>4} fail  {:>4} skipped  max rel {:.2e}\n",
        s.total, s.passed, s.failed, s.skipped, s.max_rel_residual
    )
}

fn failure_lines<'a>(records: impl Iterator<Item = &'a CheckRecord>) -> String {
    let mut s = String::new();
    for r in records.filter(|r| r.status == qkgamma::Status::Fail) {
        let _ = write!(
            s,
            "FAIL {} / {} at {}",
            r.suite,
            r.check,
            point_text(&r.point)
        );
        if let Some(rel) = r.rel_residual {
            let _ = write!(s, ": rel {rel:.3e} (tol {:.0e})", r.tolerance);
        }
        if let Some(n) = &r.note {
            let _ = write!(s, ": {n}");
        }
        s.push('\n');
    }
    s
}

fn records_csv<'a>(records: impl Iterator<Item = &'a CheckRecord>) -> String {
    let mut w = csv_writer();
    w.write_record([
        "suite",
        "check",
        "point",
        "lhs",
        "rhs",
        "abs_residual",
        "rel_residual",
        "scale",
        "tolerance",
        "status",
        "note",
    ])
    .ok();
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for r in records {
        w.write_record([
            r.suite.clone(),
            r.check.clone(),
            point_text(&r.point),
            opt(r.lhs),
            opt(r.rhs),
            opt(r.abs_residual),
            opt(r.rel_residual),
            num(r.scale),
            num(r.tolerance),
            r.status.to_string(),
            r.note.clone().unwrap_or_default(),
        ])
        .ok();
    }
    csv_text(w)
}

fn cmd_limits(
    target: Target,
    p: &PointArgs,
    q_seq: Option<Vec<f64>>,
    k_seq: Option<Vec<f64>>,
    run: &RunArgs,
) -> Outcome {
    let tr = truncation(run)?;
    let t = need(p.t, "t")?;
    let family = match target {
        Target::Gamma => LimitFamily::Gamma { t },
        Target::Beta => LimitFamily::Beta {
            t,
            s: need(p.s, "s")?,
        },
    };
    let table = match k_seq {
        Some(ks) => match p.q {
            Some(q) => limit_k_to_1(family, q, &ks, &tr)?,
            None => limit_classical_k_to_1(family, &ks)?,
        },
        None => {
            let qs = q_seq.unwrap_or_else(|| qkgamma::suites::Q_TO_ONE.to_vec());
            limit_q_to_1(family, need(p.k, "k")?, &qs, &tr)?
        }
    };
    emit(&limits_text(&table, run.format));
    Ok(0)
}

fn limits_text(table: &LimitTable, format: Format) -> String {
    match format {
        Format::Json => json(table),
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["param", "value", "error", "target"]).ok();
            for r in &table.rows {
                w.write_record([num(r.param), num(r.value), num(r.error), num(table.target)])
                    .ok();
            }
            csv_text(w)
        }
        Format::Table => {
            let mut s = format!(
                "{}\ntarget {}\n{:>12}  {:>24}  {:>12}\n",
                table.label, table.target, "param", "value", "error"
            );
            for r in &table.rows {
                let _ = writeln!(s, "{:>12}  {:>24}  {:>12.3e}", r.param, r.value, r.error);
            }
            let _ = writeln!(
                s,
                "monotone over last three rows: {}",
                table.monotone || table.exact
            );
            s
        }
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn json<T: Serialize>(v: &T) -> String {
    // serde_json maps non-finite floats to null
    let mut s = serde_json::to_string(v).expect("report serializes");
    s.push('\n');
    s
}

/// 17 significant digits round-trip every double.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn point_text(p: &BTreeMap<String, f64>) -> String {
    p.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Command::Eval {
            function,
            point,
            method,
            n,
            run,
        } => cmd_eval(*function, point, method, *n, run),
        Command::Verify {
            suite,
            grid,
            point,
            tol,
            seed,
            run,
        } => cmd_verify(suite, grid, point, *tol, *seed, run),
        Command::Limits {
            target,
            point,
            q_seq,
            k_seq,
            run,
        } => cmd_limits(*target, point, q_seq.clone(), k_seq.clone(), run),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Precondition(msg)) => {
            eprintln!("qkgamma: {msg}");
            ExitCode::from(EXIT_PRECONDITION)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("qkgamma: numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
