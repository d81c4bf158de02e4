//! Named verification suites.
//!
//! Every suite sweeps a [`GridSpec`] (missing parameters fall back to
//! [`GridSpec::default_grid`]) and emits one [`CheckRecord`] per comparison.
//! Points that violate a precondition are recorded as skipped; numerical
//! failures at admissible points are recorded as failures. Points are
//! evaluated in parallel, records come out in grid order.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{QkError, Result};
use crate::gammabeta::{
    beta_qk, beta_qk_gamma_ratio, beta_qk_nk_finite, beta_qk_nk_real, beta_qk_product,
    beta_qk_t_infinity, gamma_qk, gamma_qk_product, limit_classical_k_to_1, limit_k_to_1,
    limit_q_to_1, LimitFamily, LimitTable,
};
use crate::grid::GridSpec;
use crate::identities::{
    jacobi_abs_sum, jacobi_lhs, jacobi_lhs_symmetric, jacobi_rhs, lattice_pole,
    pochhammer_negative_finite, pochhammer_real, ramanujan_abs_sum, ramanujan_lhs, ramanujan_rhs,
    sides_lhs, sides_rhs, RamanujanPoint,
};
use crate::integral_reps::{
    beta_integral_e, beta_integral_e_s_infinity, beta_integral_e_series, beta_small_a,
    beta_small_a_s_infinity, c_constant, gamma_integral_e, gamma_small_a,
};
use crate::qcore::{
    bracket_in_base, q_derivative, q_derivative_in_base, try_jackson_definite, QKContext,
    Truncation,
};
use crate::qproducts::pochhammer_qk;
use crate::report::{point, AggregateReport, CheckRecord, IdentityReport, Point, Status};

pub const SUITE_NAMES: [&str; 12] = [
    "bracket-identities",
    "q-derivative-rules",
    "gamma-ladder",
    "beta-ladder",
    "tildes-equivalence",
    "small-a-ladder",
    "teor-equivalence",
    "c-properties",
    "ramanujan",
    "jacobi",
    "sides",
    "limits",
];

pub const DEFAULT_SEED: u64 = 7;

/// Random draws for the two randomized suites.
pub const BRACKET_TRIPLES: usize = 1_000;
pub const DERIVATIVE_POINTS: usize = 100;

/// Products this many ulps above the rounding floor still count as
/// resolvable when judging whether a cancelling sum can meet a tolerance.
const CANCELLATION_ULPS: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub trunc: Truncation,
    /// Replaces every per-check tolerance when set.
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            trunc: Truncation::default(),
            tol: None,
            seed: DEFAULT_SEED,
        }
    }
}

/// Runs one suite; `"all"` runs every suite and flattens the records.
pub fn run_suite(name: &str, grid: &GridSpec, cfg: &SuiteConfig) -> Result<IdentityReport> {
    if name == "all" {
        let agg = run_all(grid, cfg);
        return Ok(IdentityReport::new("all", agg.records().cloned().collect()));
    }
    let suite = SUITE_NAMES
        .iter()
        .find(|&&s| s == name)
        .copied()
        .ok_or_else(|| QkError::UnknownIdentity(name.to_string()))?;
    let g = grid.clone().over(&GridSpec::default_grid());
    let ck = Checker { suite, cfg };
    let records = match suite {
        "bracket-identities" => bracket_identities(&ck),
        "q-derivative-rules" => q_derivative_rules(&ck),
        "gamma-ladder" => gamma_ladder(&ck, &g),
        "beta-ladder" => beta_ladder(&ck, &g),
        "tildes-equivalence" => tildes_equivalence(&ck, &g),
        "small-a-ladder" => small_a_ladder(&ck, &g),
        "teor-equivalence" => teor_equivalence(&ck, &g),
        "c-properties" => c_properties(&ck, &g),
        "ramanujan" => ramanujan(&ck, &g),
        "jacobi" => jacobi(&ck, &g),
        "sides" => sides(&ck, &g),
        "limits" => limits(&ck),
        _ => unreachable!(),
    };
    Ok(IdentityReport::new(suite, records))
}

pub fn run_all(grid: &GridSpec, cfg: &SuiteConfig) -> AggregateReport {
    let reports = SUITE_NAMES
        .iter()
        .map(|name| run_suite(name, grid, cfg).expect("registered suite"))
        .collect();
    AggregateReport::new(reports)
}

struct Checker<'a> {
    suite: &'static str,
    cfg: &'a SuiteConfig,
}

impl Checker<'_> {
    fn tol(&self, default: f64) -> f64 {
        self.cfg.tol.unwrap_or(default)
    }

    fn trunc(&self) -> &Truncation {
        &self.cfg.trunc
    }

    fn error(&self, check: &str, pt: &Point, tol: f64, e: QkError) -> CheckRecord {
        if e.is_numerical() {
            CheckRecord::failed(self.suite, check, pt.clone(), tol, e.to_string())
        } else {
            CheckRecord::skipped(self.suite, check, pt.clone(), tol, e.to_string())
        }
    }

    fn check(
        &self,
        check: &str,
        pt: &Point,
        tol: f64,
        f: impl FnOnce() -> Result<(f64, f64)>,
    ) -> CheckRecord {
        self.check_scaled(check, pt, tol, || f().map(|(l, r)| (l, r, 0.0)))
    }

    /// As [`Self::check`], with the closure also supplying the residual floor.
    fn check_scaled(
        &self,
        check: &str,
        pt: &Point,
        tol: f64,
        f: impl FnOnce() -> Result<(f64, f64, f64)>,
    ) -> CheckRecord {
        match f() {
            Ok((l, r, scale)) => {
                CheckRecord::compare(self.suite, check, pt.clone(), l, r, scale, tol)
            }
            Err(e) => self.error(check, pt, tol, e),
        }
    }

    fn flag(&self, check: &str, pt: &Point, tol: f64, holds: bool, note: String) -> CheckRecord {
        CheckRecord::flag(self.suite, check, pt.clone(), holds, tol, Some(note))
    }
}

/// Cartesian product of the listed grid parameters, first name slowest.
fn cells(g: &GridSpec, names: &[&'static str]) -> Vec<(Vec<f64>, Point)> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for name in names {
        let vals = g.get(name).unwrap_or(&[]);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                vals.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|vals| {
            let pairs: Vec<(&str, f64)> = names.iter().copied().zip(vals.iter().copied()).collect();
            (vals, point(&pairs))
        })
        .collect()
}

/// Evaluates `f` on every cell in parallel and concatenates in cell order.
fn sweep<F>(g: &GridSpec, names: &[&'static str], f: F) -> Vec<CheckRecord>
where
    F: Fn(&[f64], &Point) -> Vec<CheckRecord> + Sync,
{
    cells(g, names)
        .par_iter()
        .map(|(vals, pt)| f(vals, pt))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Builds the context of a cell, or a single skipped record when `(q, k)`
/// is inadmissible.
fn context(
    ck: &Checker,
    pt: &Point,
    q: f64,
    k: f64,
) -> std::result::Result<QKContext, Vec<CheckRecord>> {
    QKContext::new(q, k).map_err(|e| vec![ck.error("context", pt, 0.0, e)])
}

macro_rules! ctx_or_skip {
    ($ck:expr, $pt:expr, $q:expr, $k:expr) => {
        match context($ck, $pt, $q, $k) {
            Ok(c) => c,
            Err(rec) => return rec,
        }
    };
}

fn bracket_identities(ck: &Checker) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-13);
    let mut rng = ChaCha8Rng::seed_from_u64(ck.cfg.seed);
    let triples: Vec<(f64, f64, f64)> = (0..BRACKET_TRIPLES)
        .map(|_| {
            (
                rng.random_range(0.05..0.95),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            )
        })
        .collect();
    triples
        .par_iter()
        .map(|&(q, s, t)| {
            let pt = point(&[("q", q), ("s", s), ("t", t)]);
            let ctx = ctx_or_skip!(ck, &pt, q, 1.0);
            vec![
                // cancellation between the two summands is rounding, not error
                ck.check_scaled("[s+t] = [s] + q^s [t]", &pt, tol, || {
                    let (a, b) = (ctx.bracket(s), ctx.pow(s) * ctx.bracket(t));
                    Ok((ctx.bracket(s + t), a + b, a.abs().max(b.abs())))
                }),
                ck.check("[st] = [s]_{q^t} [t]", &pt, tol, || {
                    Ok((
                        ctx.bracket(s * t),
                        bracket_in_base(ctx.pow(t), s) * ctx.bracket(t),
                    ))
                }),
                ck.check("[1] = 1", &pt, tol, || Ok((ctx.bracket(1.0), 1.0))),
                ck.check_scaled("[0] = 0", &pt, tol, || Ok((ctx.bracket(0.0), 0.0, 1.0))),
            ]
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn q_derivative_rules(ck: &Checker) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(ck.cfg.seed.wrapping_add(1));
    let draws: Vec<[f64; 9]> = (0..DERIVATIVE_POINTS)
        .map(|_| {
            [
                rng.random_range(0.05..0.95),
                rng.random_range(0.1..3.0),
                f64::from(rng.random_range(1..=5u32)),
                f64::from(rng.random_range(1..=5u32)),
                rng.random_range(0.2..2.0),
                rng.random_range(0.5..3.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.5..2.0),
            ]
        })
        .collect();
    draws
        .par_iter()
        .map(|&[q, x, m, n, a, b, c, d, upper]| {
            let pt = point(&[
                ("q", q),
                ("x", x),
                ("m", m),
                ("n", n),
                ("a", a),
                ("b", b),
                ("c", c),
                ("d", d),
                ("upper", upper),
            ]);
            let ctx = ctx_or_skip!(ck, &pt, q, 1.0);
            let f = |y: f64| y.powf(m);
            let g = |y: f64| y.powf(n);
            let df = |y: f64| q_derivative(&ctx, f, y);
            let dg = |y: f64| q_derivative(&ctx, g, y);
            // polynomials with constant terms, so the boundary term at 0 is live
            let fp = |y: f64| f(y) + c;
            let gp = |y: f64| g(y) + d;
            vec![
                ck.check_scaled("linearity", &pt, tol, || {
                    let (u, v) = (df(x)?, dg(x)?);
                    Ok((
                        q_derivative(&ctx, |y| f(y) + g(y), x)?,
                        u + v,
                        u.abs().max(v.abs()),
                    ))
                }),
                ck.check_scaled("leibniz", &pt, tol, || {
                    let (u, v) = (f(x) * dg(x)?, g(q * x) * df(x)?);
                    Ok((
                        q_derivative(&ctx, |y| f(y) * g(y), x)?,
                        u + v,
                        u.abs().max(v.abs()),
                    ))
                }),
                ck.check_scaled("quotient", &pt, tol, || {
                    let den = g(q * x) * g(x);
                    let (u, v) = (df(x)? * g(x) / den, f(x) * dg(x)? / den);
                    Ok((
                        q_derivative(&ctx, |y| f(y) / g(y), x)?,
                        u - v,
                        u.abs().max(v.abs()),
                    ))
                }),
                ck.check("power chain", &pt, tol, || {
                    let lhs = q_derivative(&ctx, |y| f(a * y.powf(b)), x)?;
                    let inner = q_derivative_in_base(ctx.pow(b), f, a * x.powf(b))?;
                    Ok((lhs, a * ctx.bracket(b) * inner * x.powf(b - 1.0)))
                }),
                ck.check_scaled("integration by parts", &pt, tol, || {
                    let trunc = ck.trunc();
                    let dgp = |y: f64| q_derivative(&ctx, gp, y);
                    let dfp = |y: f64| q_derivative(&ctx, fp, y);
                    let i1 = try_jackson_definite(&ctx, |y| Ok(fp(y) * dgp(y)?), upper, trunc)?;
                    let i2 = try_jackson_definite(&ctx, |y| Ok(gp(q * y) * dfp(y)?), upper, trunc)?;
                    let (top, bottom) = (fp(upper) * gp(upper), fp(0.0) * gp(0.0));
                    Ok((
                        top - bottom,
                        i1.value + i2.value,
                        top.abs().max(bottom.abs()),
                    ))
                }),
                ck.check("fundamental theorem", &pt, tol, || {
                    let int = try_jackson_definite(&ctx, df, upper, ck.trunc())?;
                    Ok((int.value, f(upper) - f(0.0)))
                }),
            ]
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn gamma_ladder(ck: &Checker, g: &GridSpec) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-10);
    let tr = ck.trunc();
    let gam = |c: &QKContext, t: f64| gamma_qk(c, t, tr).map(|a| a.value);
    let mut out = sweep(g, &["q", "k"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        vec![ck.check("gamma(k) = 1", pt, tol, || Ok((gam(&ctx, ctx.k())?, 1.0)))]
    });
    out.extend(sweep(g, &["q", "k", "t"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (k, t) = (v[1], v[2]);
        let mut recs = vec![
            ck.check("gamma(t+k) = [t] gamma(t)", pt, tol, || {
                Ok((gam(&ctx, t + k)?, ctx.bracket(t) * gam(&ctx, t)?))
            }),
            ck.check("closed form = product form", pt, tol, || {
                Ok((gam(&ctx, t)?, gamma_qk_product(&ctx, t, tr)?.value))
            }),
        ];
        for n in 1..=6u32 {
            recs.push(ck.check(
                &format!("gamma(t+{n}k)/gamma(t) = [t]_{{{n},k}}"),
                pt,
                tol,
                || {
                    Ok((
                        gam(&ctx, t + f64::from(n) * k)? / gam(&ctx, t)?,
                        pochhammer_qk(&ctx, t, n),
                    ))
                },
            ));
        }
        recs
    }));
    out
}

fn beta_ladder(ck: &Checker, g: &GridSpec) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-10);
    let tr = ck.trunc();
    let b = |c: &QKContext, t: f64, s: f64| beta_qk(c, t, s, tr).map(|a| a.value);
    let mut out = sweep(g, &["q", "k", "t"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (q, k, t) = (v[0], v[1], v[2]);
        let mut recs = vec![
            ck.check("B(t,inf) = (1-q)^{t/k} gamma(t)", pt, tol, || {
                let g = gamma_qk(&ctx, t, tr)?.value;
                Ok((
                    beta_qk_t_infinity(&ctx, t, tr)?.value,
                    (1.0 - q).powf(t / k) * g,
                ))
            }),
            ck.check("B(t,k) = 1/[t]", pt, tol, || {
                Ok((b(&ctx, t, k)?, 1.0 / ctx.bracket(t)))
            }),
        ];
        for n in 1..=5u32 {
            let nk = f64::from(n) * k;
            recs.push(ck.check(&format!("B(t,{n}k) finite form"), pt, tol, || {
                Ok((b(&ctx, t, nk)?, beta_qk_nk_finite(&ctx, t, n)?))
            }));
            recs.push(ck.check(
                &format!("B(t,{n}k) finite = real-product form"),
                pt,
                tol,
                || {
                    Ok((
                        beta_qk_nk_real(&ctx, t, n, tr)?.value,
                        beta_qk_nk_finite(&ctx, t, n)?,
                    ))
                },
            ));
        }
        recs
    });
    out.extend(sweep(g, &["q", "k", "t", "s"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (k, t, s) = (v[1], v[2], v[3]);
        vec![
            ck.check("B(t+k,s) = [t]/[s] B(t,s+k)", pt, tol, || {
                Ok((
                    b(&ctx, t + k, s)?,
                    ctx.bracket(t) / ctx.bracket(s) * b(&ctx, t, s + k)?,
                ))
            }),
            ck.check_scaled("B(t,s+k) = B(t,s) - q^s B(t+k,s)", pt, tol, || {
                let base = b(&ctx, t, s)?;
                Ok((
                    b(&ctx, t, s + k)?,
                    base - ctx.pow(s) * b(&ctx, t + k, s)?,
                    base.abs(),
                ))
            }),
            ck.check("B(t,s+k) = [s]/[s+t] B(t,s)", pt, tol, || {
                Ok((
                    b(&ctx, t, s + k)?,
                    ctx.bracket(s) / ctx.bracket(s + t) * b(&ctx, t, s)?,
                ))
            }),
            ck.check("B = gamma(t) gamma(s) / gamma(t+s)", pt, tol, || {
                Ok((b(&ctx, t, s)?, beta_qk_gamma_ratio(&ctx, t, s, tr)?.value))
            }),
            ck.check("B(t,s) = B(s,t)", pt, tol, || {
                Ok((b(&ctx, t, s)?, b(&ctx, s, t)?))
            }),
            ck.check("closed form = product form", pt, tol, || {
                Ok((b(&ctx, t, s)?, beta_qk_product(&ctx, t, s, tr)?.value))
            }),
        ]
    }));
    out
}

fn tildes_equivalence(ck: &Checker, g: &GridSpec) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-8);
    let tr = ck.trunc();
    let gi = |c: &QKContext, t: f64| gamma_integral_e(c, t, tr).map(|a| a.value);
    let bi = |c: &QKContext, t: f64, s: f64| beta_integral_e(c, t, s, tr).map(|a| a.value);
    let mut out = sweep(g, &["q", "k"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        vec![ck.check("integral gamma(k) = 1", pt, tol, || {
            Ok((gi(&ctx, ctx.k())?, 1.0))
        })]
    });
    out.extend(sweep(g, &["q", "k", "t"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (q, k, t) = (v[0], v[1], v[2]);
        let mut recs = vec![
            ck.check("integral gamma = gamma", pt, tol, || {
                Ok((gi(&ctx, t)?, gamma_qk(&ctx, t, tr)?.value))
            }),
            ck.check(
                "integral gamma(t+k) = [t] integral gamma(t)",
                pt,
                tol,
                || Ok((gi(&ctx, t + k)?, ctx.bracket(t) * gi(&ctx, t)?)),
            ),
            ck.check(
                "integral B(t,inf) = (1-q)^{t/k} integral gamma(t)",
                pt,
                tol,
                || {
                    let lhs = beta_integral_e_s_infinity(&ctx, t, tr)?.value;
                    Ok((lhs, (1.0 - q).powf(t / k) * gi(&ctx, t)?))
                },
            ),
            ck.check("integral B(t,k) = 1/[t]", pt, tol, || {
                Ok((bi(&ctx, t, k)?, 1.0 / ctx.bracket(t)))
            }),
        ];
        for n in 1..=5u32 {
            recs.push(
                ck.check(&format!("integral B(t,{n}k) finite form"), pt, tol, || {
                    Ok((
                        bi(&ctx, t, f64::from(n) * k)?,
                        beta_qk_nk_finite(&ctx, t, n)?,
                    ))
                }),
            );
        }
        recs
    }));
    out.extend(sweep(g, &["q", "k", "t", "s"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (k, t, s) = (v[1], v[2], v[3]);
        vec![
            ck.check("integral B = B", pt, tol, || {
                Ok((bi(&ctx, t, s)?, beta_qk(&ctx, t, s, tr)?.value))
            }),
            ck.check("lattice series B = B", pt, tol, || {
                Ok((
                    beta_integral_e_series(&ctx, t, s, tr)?.value,
                    beta_qk(&ctx, t, s, tr)?.value,
                ))
            }),
            ck.check(
                "integral B(t+k,s) = [t]/[s] integral B(t,s+k)",
                pt,
                tol,
                || {
                    Ok((
                        bi(&ctx, t + k, s)?,
                        ctx.bracket(t) / ctx.bracket(s) * bi(&ctx, t, s + k)?,
                    ))
                },
            ),
            ck.check_scaled("integral B(t,s+k) = B(t,s) - q^s B(t+k,s)", pt, tol, || {
                let base = bi(&ctx, t, s)?;
                Ok((
                    bi(&ctx, t, s + k)?,
                    base - ctx.pow(s) * bi(&ctx, t + k, s)?,
                    base.abs(),
                ))
            }),
            ck.check(
                "integral B(t,s+k) = [s]/[s+t] integral B(t,s)",
                pt,
                tol,
                || {
                    Ok((
                        bi(&ctx, t, s + k)?,
                        ctx.bracket(s) / ctx.bracket(s + t) * bi(&ctx, t, s)?,
                    ))
                },
            ),
        ]
    }));
    out
}

/// `q^{-k n(n-1)/2}`.
fn lattice_shift(ctx: &QKContext, n: u32) -> f64 {
    let n = f64::from(n);
    ctx.pow(-ctx.k() * n * (n - 1.0) / 2.0)
}

fn small_a_ladder(ck: &Checker, g: &GridSpec) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-7);
    let tr = ck.trunc();
    let ga = |c: &QKContext, t: f64, a: f64| gamma_small_a(c, t, a, tr).map(|r| r.value);
    let ba = |c: &QKContext, t: f64, s: f64, a: f64| beta_small_a(c, t, s, a, tr).map(|r| r.value);
    let mut out = sweep(g, &["q", "k", "a"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (k, a) = (v[1], v[2]);
        let mut recs = vec![ck.check("gamma_a(k) = 1", pt, tol, || Ok((ga(&ctx, k, a)?, 1.0)))];
        for n in 2..=4u32 {
            let nk = f64::from(n) * k;
            recs.push(ck.check(
                &format!("gamma_a({n}k) = q^(-kn(n-1)/2) gamma({n}k)"),
                pt,
                tol,
                || {
                    Ok((
                        ga(&ctx, nk, a)?,
                        lattice_shift(&ctx, n) * gamma_qk(&ctx, nk, tr)?.value,
                    ))
                },
            ));
        }
        recs
    });
    out.extend(sweep(g, &["q", "k", "t", "a"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (q, k, t, a) = (v[0], v[1], v[2], v[3]);
        vec![
            ck.check("gamma_a(t+k) = q^-t [t] gamma_a(t)", pt, tol, || {
                Ok((
                    ga(&ctx, t + k, a)?,
                    ctx.pow(-t) * ctx.bracket(t) * ga(&ctx, t, a)?,
                ))
            }),
            ck.check("beta_a(t,inf) = (1-q)^{t/k} gamma_a(t)", pt, tol, || {
                let lhs = beta_small_a_s_infinity(&ctx, t, a, tr)?.value;
                Ok((lhs, (1.0 - q).powf(t / k) * ga(&ctx, t, a)?))
            }),
        ]
    }));
    out.extend(sweep(g, &["q", "k", "s", "a"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (k, s, a) = (v[1], v[2], v[3]);
        let mut recs = vec![ck.check("beta_a(k,s) = 1/[s]", pt, tol, || {
            Ok((ba(&ctx, k, s, a)?, 1.0 / ctx.bracket(s)))
        })];
        for n in 2..=4u32 {
            let nk = f64::from(n) * k;
            recs.push(ck.check(
                &format!("beta_a({n}k,s) = q^(-kn(n-1)/2) B({n}k,s)"),
                pt,
                tol,
                || {
                    Ok((
                        ba(&ctx, nk, s, a)?,
                        lattice_shift(&ctx, n) * beta_qk(&ctx, nk, s, tr)?.value,
                    ))
                },
            ));
        }
        recs
    }));
    out.extend(sweep(g, &["q", "k", "t", "s", "a"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (k, t, s, a) = (v[1], v[2], v[3], v[4]);
        vec![
            ck.check(
                "beta_a(t+k,s) = q^-t [t]/[t+s] beta_a(t,s)",
                pt,
                tol,
                || {
                    let f = ctx.pow(-t) * ctx.bracket(t) / ctx.bracket(t + s);
                    Ok((ba(&ctx, t + k, s, a)?, f * ba(&ctx, t, s, a)?))
                },
            ),
            ck.check("beta_a(t,s+k) = [s]/[t+s] beta_a(t,s)", pt, tol, || {
                Ok((
                    ba(&ctx, t, s + k, a)?,
                    ctx.bracket(s) / ctx.bracket(t + s) * ba(&ctx, t, s, a)?,
                ))
            }),
        ]
    }));
    out
}

fn teor_equivalence(ck: &Checker, g: &GridSpec) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-7);
    let tr = ck.trunc();
    let a_vals = g.get("a").unwrap_or(&[]).to_vec();
    let s_vals = g.get("s").unwrap_or(&[]).to_vec();
    sweep(g, &["q", "k", "t"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let t = v[2];
        let mut recs = Vec::new();
        let at = |extra: &[(&str, f64)]| {
            let mut p = pt.clone();
            p.extend(extra.iter().map(|&(n, x)| (n.to_string(), x)));
            p
        };
        let cs: Vec<Result<f64>> = a_vals
            .iter()
            .map(|&a| c_constant(&ctx, a, t, tr).map(|c| c.value))
            .collect();

        let gamma = gamma_qk(&ctx, t, tr).map(|r| r.value);
        let prods: Vec<Result<f64>> = a_vals
            .iter()
            .zip(&cs)
            .map(|(&a, c)| Ok(c.clone()? * gamma_small_a(&ctx, t, a, tr)?.value))
            .collect();
        for (i, &a) in a_vals.iter().enumerate() {
            let p = at(&[("a", a)]);
            recs.push(ck.check("c(a,t) gamma_a(t) = gamma(t)", &p, tol, || {
                Ok((prods[i].clone()?, gamma.clone()?))
            }));
            if i > 0 {
                let p = at(&[("a", a), ("a0", a_vals[0])]);
                recs.push(ck.check("c gamma_a independent of a", &p, tol, || {
                    Ok((prods[i].clone()?, prods[0].clone()?))
                }));
            }
        }

        for &s in &s_vals {
            let beta = beta_qk(&ctx, t, s, tr).map(|r| r.value);
            let prods: Vec<Result<f64>> = a_vals
                .iter()
                .zip(&cs)
                .map(|(&a, c)| Ok(c.clone()? * beta_small_a(&ctx, t, s, a, tr)?.value))
                .collect();
            for (i, &a) in a_vals.iter().enumerate() {
                let p = at(&[("s", s), ("a", a)]);
                recs.push(ck.check("c(a,t) beta_a(t,s) = B(t,s)", &p, tol, || {
                    Ok((prods[i].clone()?, beta.clone()?))
                }));
                if i > 0 {
                    let p = at(&[("s", s), ("a", a), ("a0", a_vals[0])]);
                    recs.push(ck.check("c beta_a independent of a", &p, tol, || {
                        Ok((prods[i].clone()?, prods[0].clone()?))
                    }));
                }
            }
        }
        recs
    })
}

/// `q → 1` sequence shared by the limit checks.
pub const Q_TO_ONE: [f64; 3] = [0.9, 0.99, 0.999];
/// `q → 0` sequence for the small-`q` limit of `c(a,t)`.
pub const Q_TO_ZERO: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn table_note(t: &LimitTable) -> String {
    let errs: Vec<String> = t.rows.iter().map(|r| format!("{:.3e}", r.error)).collect();
    format!(
        "{}: target {}, errors [{}]{}",
        t.label,
        t.target,
        errs.join(", "),
        if t.exact { ", exact" } else { "" }
    )
}

fn c_properties(ck: &Checker, g: &GridSpec) -> Vec<CheckRecord> {
    let tr = ck.trunc();
    let c = |ctx: &QKContext, a: f64, t: f64| c_constant(ctx, a, t, tr).map(|r| r.value);
    let mut out = sweep(g, &["q", "k", "a"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (k, a) = (v[1], v[2]);
        let tol = ck.tol(1e-11);
        let mut recs = vec![
            ck.check("c(a,0) = 1", pt, tol, || Ok((c(&ctx, a, 0.0)?, 1.0))),
            ck.check("c(a,k) = 1", pt, tol, || Ok((c(&ctx, a, k)?, 1.0))),
        ];
        for n in 2..=4u32 {
            recs.push(
                ck.check(&format!("c(a,{n}k) = q^(kn(n-1)/2)"), pt, tol, || {
                    Ok((c(&ctx, a, f64::from(n) * k)?, 1.0 / lattice_shift(&ctx, n)))
                }),
            );
        }
        recs
    });
    out.extend(sweep(g, &["q", "k", "t", "a"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (q, k, t, a) = (v[0], v[1], v[2], v[3]);
        vec![
            ck.check("c(qa,t) = c(a,t)", pt, ck.tol(1e-12), || {
                Ok((c(&ctx, q * a, t)?, c(&ctx, a, t)?))
            }),
            ck.check("c(a,t+k) = q^t c(a,t)", pt, ck.tol(1e-11), || {
                Ok((c(&ctx, a, t + k)?, ctx.pow(t) * c(&ctx, a, t)?))
            }),
        ]
    }));
    let tol = ck.tol(1e-11);
    out.extend(sweep(g, &["k", "t", "a"], |v, pt| {
        let (k, t, a) = (v[0], v[1], v[2]);
        let table = Q_TO_ONE
            .iter()
            .map(|&q| Ok((q, c(&QKContext::new(q, k)?, a, t)?)))
            .collect::<Result<Vec<_>>>()
            .map(|vals| LimitTable::from_values("c(a,t) as q -> 1", 1.0, vals));
        vec![match table {
            Ok(tb) => ck.flag(
                "q -> 1 limit monotone",
                pt,
                tol,
                tb.monotone || tb.exact,
                table_note(&tb),
            ),
            Err(e) => ck.error("q -> 1 limit monotone", pt, tol, e),
        }]
    }));
    // the small-q limit a^t + a^{t-k} needs 0 < t < k
    let mut small = GridSpec::empty();
    small.set("k", vec![1.0]);
    small.set("t", vec![0.5]);
    small.set("a", g.get("a").unwrap_or(&[]).to_vec());
    out.extend(sweep(&small, &["k", "t", "a"], |v, pt| {
        let (k, t, a) = (v[0], v[1], v[2]);
        let table = Q_TO_ZERO
            .iter()
            .map(|&q| Ok((q, c(&QKContext::new(q, k)?, a, t)?)))
            .collect::<Result<Vec<_>>>()
            .map(|vals| {
                LimitTable::from_values("c(a,t) as q -> 0", a.powf(t) + a.powf(t - k), vals)
            });
        vec![match table {
            Ok(tb) => ck.flag(
                "q -> 0 limit monotone",
                pt,
                tol,
                tb.monotone || tb.exact,
                table_note(&tb),
            ),
            Err(e) => ck.error("q -> 0 limit monotone", pt, tol, e),
        }]
    }));
    out
}

/// Default bilateral-sum arguments when the grid names none.
pub const RAMANUJAN_U: [f64; 3] = [-0.3, 0.4, 0.9];
pub const RAMANUJAN_V: [f64; 3] = [-0.15, 0.1, 0.4];
pub const RAMANUJAN_X: [f64; 3] = [-0.6, 0.7, 0.8];
pub const JACOBI_X: [f64; 5] = [-1.7, -0.05, 0.3, 2.0, 4.2];

fn with_defaults(g: &GridSpec, defaults: &[(&str, &[f64])]) -> GridSpec {
    let mut d = GridSpec::empty();
    for &(n, v) in defaults {
        d.set(n, v.to_vec());
    }
    g.clone().over(&d)
}

/// Compares a cancelling sum against its closed form, or skips the point
/// when the sum's own rounding (`mass` is the sum of the term magnitudes)
/// cannot resolve the identity at `tol`.
fn conditioned(
    ck: &Checker,
    check: &str,
    pt: &Point,
    tol: f64,
    lhs: f64,
    rhs: f64,
    mass: f64,
) -> CheckRecord {
    let attainable = CANCELLATION_ULPS * f64::EPSILON * mass / rhs.abs();
    if attainable < tol {
        CheckRecord::compare(ck.suite, check, pt.clone(), lhs, rhs, 0.0, tol)
    } else {
        let why = format!(
            "ill-conditioned: sum of |terms| {mass:.3e} against value {rhs:.3e} limits relative accuracy to {attainable:.1e}"
        );
        CheckRecord::skipped(ck.suite, check, pt.clone(), tol, why)
    }
}

fn ramanujan(ck: &Checker, g: &GridSpec) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-8);
    let tr = ck.trunc();
    let g = with_defaults(
        g,
        &[
            ("u", &RAMANUJAN_U),
            ("v", &RAMANUJAN_V),
            ("x", &RAMANUJAN_X),
        ],
    );
    let mut out = sweep(&g, &["q", "k", "u"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let u = v[2];
        let pole = lattice_pole(&ctx, u);
        (1..=6u32)
            .map(|m| {
                let check = format!("(u;p)_-{m} real product = finite reflection");
                if let Some(j) = pole.filter(|&j| j <= m) {
                    let why = format!("u = p^{j}: (u;p)_-{m} has a pole");
                    return CheckRecord::skipped(ck.suite, &check, pt.clone(), tol, why);
                }
                ck.check(&check, pt, tol, || {
                    Ok((
                        pochhammer_real(&ctx, u, -i64::from(m), tr)?.value,
                        pochhammer_negative_finite(&ctx, u, m),
                    ))
                })
            })
            .collect()
    });
    out.extend(sweep(&g, &["q", "k", "u", "v", "x"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let check = "bilateral sum = product";
        let evaluated = RamanujanPoint::new(ctx, v[2], v[3], v[4]).and_then(|rp| {
            Ok((
                ramanujan_lhs(&rp, tr)?.value,
                ramanujan_rhs(&rp, tr)?.value,
                ramanujan_abs_sum(&rp, tr)?,
            ))
        });
        match evaluated {
            Ok((lhs, rhs, mass)) => vec![conditioned(ck, check, pt, tol, lhs, rhs, mass)],
            Err(e) => vec![ck.error(check, pt, tol, e)],
        }
    }));
    out
}

fn jacobi(ck: &Checker, g: &GridSpec) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-8);
    let zero_tol = ck.tol(1e-9);
    let doubling_tol = ck.tol(1e-13);
    let tr = ck.trunc();
    let g = with_defaults(g, &[("x", &JACOBI_X)]);

    // x = [k] is a zero of the product; compared absolutely
    let mut out = sweep(&g, &["q", "k"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let x = ctx.bracket_k();
        let mut p = pt.clone();
        p.insert("x".into(), x);
        vec![
            ck.check_scaled("sum = product at the zero x = [k]", &p, zero_tol, || {
                Ok((
                    jacobi_lhs(&ctx, x, tr)?.value,
                    jacobi_rhs(&ctx, x, tr)?.value,
                    1.0,
                ))
            }),
        ]
    });
    out.extend(sweep(&g, &["q", "k", "x"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let x = v[2];
        let check = "sum = product";
        let (lhs, rhs) = match (jacobi_lhs(&ctx, x, tr), jacobi_rhs(&ctx, x, tr)) {
            (Ok(l), Ok(r)) => (l, r.value),
            (Err(e), _) | (_, Err(e)) => return vec![ck.error(check, pt, tol, e)],
        };
        let n = (lhs.terms_used - 1) / 2;
        let mass = jacobi_abs_sum(&ctx, x, n);
        let rec = if rhs == 0.0 {
            // x = [k] p^m is a zero of the product
            CheckRecord::compare(ck.suite, check, pt.clone(), lhs.value, rhs, 1.0, zero_tol)
                .with_note("zero of the product; absolute comparison")
        } else {
            conditioned(ck, check, pt, tol, lhs.value, rhs, mass)
        };
        if rec.status == Status::Skipped {
            return vec![rec];
        }
        let floor = if rhs == 0.0 { 1.0 } else { 0.0 };
        vec![
            rec,
            ck.check_scaled("truncation doubling", pt, doubling_tol, || {
                Ok((
                    jacobi_lhs_symmetric(&ctx, x, 2 * n),
                    jacobi_lhs_symmetric(&ctx, x, n),
                    floor,
                ))
            }),
        ]
    }));
    out
}

fn sides(ck: &Checker, g: &GridSpec) -> Vec<CheckRecord> {
    let tol = ck.tol(1e-8);
    let tr = ck.trunc();
    sweep(g, &["q", "k", "t", "s"], |v, pt| {
        let ctx = ctx_or_skip!(ck, pt, v[0], v[1]);
        let (t, s) = (v[2], v[3]);
        vec![ck.check("product side = series side", pt, tol, || {
            Ok((
                sides_lhs(&ctx, t, s, tr)?.value,
                sides_rhs(&ctx, t, s, tr)?.value,
            ))
        })]
    })
}

/// Cells of the `q → 1` tables: the two exact classical anchors plus
/// non-degenerate points.
pub const LIMIT_CELLS: [(LimitFamily, f64); 6] = [
    (LimitFamily::Gamma { t: 2.0 }, 1.0),
    (LimitFamily::Gamma { t: 2.5 }, 1.0),
    (LimitFamily::Gamma { t: 3.0 }, 2.0),
    (LimitFamily::Beta { t: 2.0, s: 3.0 }, 1.0),
    (LimitFamily::Beta { t: 1.4, s: 2.2 }, 2.0),
    (LimitFamily::Gamma { t: 2.3 }, 0.5),
];
/// `k → 1` sequence for the `k`-arrows.
pub const K_TO_ONE: [f64; 3] = [1.1, 1.01, 1.001];
pub const LIMIT_FINAL_TOL: f64 = 1e-2;

fn family_point(f: &LimitFamily, k: f64) -> Point {
    match *f {
        LimitFamily::Gamma { t } => point(&[("k", k), ("t", t)]),
        LimitFamily::Beta { t, s } => point(&[("k", k), ("t", t), ("s", s)]),
    }
}

/// Limit tables recorded as two checks: the last error against
/// [`LIMIT_FINAL_TOL`] (absolute below 1, relative above) and strict
/// shrinkage over the last three rows. Tables that already sit on the target
/// to rounding count as shrinking.
fn limits(ck: &Checker) -> Vec<CheckRecord> {
    let tr = *ck.trunc();
    let final_tol = ck.tol(LIMIT_FINAL_TOL);
    type Job = (String, Point, Result<LimitTable>);
    let jobs: Vec<Job> = LIMIT_CELLS
        .par_iter()
        .flat_map_iter(|(f, k)| {
            let pt = family_point(f, *k);
            let mut v: Vec<Job> = vec![(
                "q -> 1".into(),
                pt.clone(),
                limit_q_to_1(*f, *k, &Q_TO_ONE, &tr),
            )];
            if *k == 1.0 {
                v.push((
                    "k -> 1 at q = 0.5".into(),
                    pt.clone(),
                    limit_k_to_1(*f, 0.5, &K_TO_ONE, &tr),
                ));
                v.push((
                    "classical k -> 1".into(),
                    pt,
                    limit_classical_k_to_1(*f, &K_TO_ONE),
                ));
            }
            v
        })
        .collect();
    let mut out = Vec::new();
    for (arrow, pt, table) in jobs {
        match table {
            Ok(tb) => {
                let last = tb.rows.last().map_or(f64::NAN, |r| r.value);
                out.push(
                    CheckRecord::compare(
                        ck.suite,
                        &format!("{arrow} final error"),
                        pt.clone(),
                        last,
                        tb.target,
                        1.0,
                        final_tol,
                    )
                    .with_note(table_note(&tb)),
                );
                out.push(ck.flag(
                    &format!("{arrow} errors shrink"),
                    &pt,
                    final_tol,
                    tb.monotone || tb.exact,
                    table_note(&tb),
                ));
            }
            Err(e) => out.push(ck.error(&format!("{arrow} table"), &pt, final_tol, e)),
        }
    }
    out
}
