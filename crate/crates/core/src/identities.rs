//! The bilateral identities behind the improper-integral representations:
//! Ramanujan's `1ψ1` summation and the Jacobi triple product, both in base
//! `p = q^k`, plus the two sides of the series identity that proves the
//! finite-limit beta representation.

use serde::Serialize;

use crate::error::{invalid, QkError, Result};
use crate::grid::GridSpec;
use crate::qcore::{run_tail, Approx, CompensatedSum, QKContext, Truncation};
use crate::qproducts::{log_infinite, log_real, LatticeLog, LogValue};
use crate::report::IdentityReport;
use crate::suites::{run_suite, SuiteConfig};

/// Per-tail term cap of the Ramanujan bilateral sum.
pub const RAMANUJAN_TAIL_CAP: usize = 5_000;

/// A point `(u, v, x)` inside the convergence region of the bilateral sum
/// `Σ_n x^n (u;p)_n / (v;p)_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamanujanPoint {
    pub ctx: QKContext,
    pub u: f64,
    pub v: f64,
    pub x: f64,
}

impl RamanujanPoint {
    /// Requires `u, v ∈ (-1, 1)`, `u ≠ 0`, `u ≠ v` and `|v/u| < |x| < 1`;
    /// the last condition makes both tails geometric.
    pub fn new(ctx: QKContext, u: f64, v: f64, x: f64) -> Result<Self> {
        for (name, val) in [("u", u), ("v", v), ("x", x)] {
            if !val.is_finite() || val.abs() >= 1.0 {
                return Err(invalid(format!("{name} must lie in (-1, 1), got {val}")));
            }
        }
        if u == 0.0 || x == 0.0 {
            return Err(invalid("u and x must be nonzero"));
        }
        if u == v {
            return Err(invalid(
                "u = v puts a zero factor (1 - v/u) in the product side",
            ));
        }
        if let Some(j) = lattice_pole(&ctx, u) {
            return Err(invalid(format!(
                "u = p^{j} makes (u;p)_n infinite for n <= -{j}"
            )));
        }
        if (v / (u * x)).abs() >= 1.0 {
            return Err(invalid(format!(
                "negative tail diverges: |v/(u x)| = {} >= 1",
                (v / (u * x)).abs()
            )));
        }
        Ok(Self { ctx, u, v, x })
    }
}

/// The `j >= 1` with `a = p^j`, where `(a;p)_{-m}` has a pole for `m >= j`.
pub fn lattice_pole(ctx: &QKContext, a: f64) -> Option<u32> {
    if !(a > 0.0) {
        return None;
    }
    let ln_p = ctx.k() * ctx.ln_q();
    let j = (a.ln() / ln_p).round();
    if j < 1.0 || j > f64::from(u32::MAX) {
        return None;
    }
    let gap = (a.ln() - j * ln_p).exp_m1().abs();
    (gap < 1e-12).then_some(j as u32)
}

/// `(a;p)_m = (1 - a)^m_{q,k}` for any integer `m`, through the real-exponent
/// product.
pub fn pochhammer_real(ctx: &QKContext, a: f64, m: i64, trunc: &Truncation) -> Result<Approx> {
    Ok(log_real(ctx, -a, m as f64, trunc)?.to_approx())
}

/// `(a;p)_{-m} = 1 / ∏_{j=1}^{m} (1 - a p^{-j})`, the finite reflection.
pub fn pochhammer_negative_finite(ctx: &QKContext, a: f64, m: u32) -> f64 {
    let p = ctx.qk();
    let den: f64 = (1..=m).map(|j| 1.0 - a * p.powi(-(j as i32))).product();
    1.0 / den
}

/// The negative tail grows until `|u| p^{-m}` passes 1, which takes
/// `O(1/|ln p|)` steps, so the growth window scales with that length.
fn tail_trunc(ctx: &QKContext, trunc: &Truncation) -> Truncation {
    let steps = (24.0 / (ctx.k() * ctx.ln_q()).abs()).ceil() as usize;
    Truncation {
        max_terms: trunc.max_terms.min(RAMANUJAN_TAIL_CAP),
        divergence_window: trunc.divergence_window.max(steps),
        ..*trunc
    }
}

/// `Σ_{n∈ℤ} x^n (u;p)_n / (v;p)_n`.
pub fn ramanujan_lhs(pt: &RamanujanPoint, trunc: &Truncation) -> Result<Approx> {
    ramanujan_sum(pt, trunc, false)
}

/// `Σ_{n∈ℤ} |x^n (u;p)_n / (v;p)_n|`, the scale the bilateral sum cancels
/// from.
pub fn ramanujan_abs_sum(pt: &RamanujanPoint, trunc: &Truncation) -> Result<f64> {
    ramanujan_sum(pt, trunc, true).map(|a| a.value)
}

fn ramanujan_sum(pt: &RamanujanPoint, trunc: &Truncation, magnitudes: bool) -> Result<Approx> {
    let (ctx, u, v, x) = (&pt.ctx, pt.u, pt.v, pt.x);
    let p = ctx.qk();
    let tt = tail_trunc(ctx, trunc);
    let mut acc = CompensatedSum::new();

    let mut term = 1.0;
    let mut pj = 1.0;
    let pos = run_tail(
        &mut acc,
        |n| {
            if n > 0 {
                term *= x * (1.0 - pj * u) / (1.0 - pj * v);
                pj *= p;
            }
            Ok(if magnitudes { term.abs() } else { term })
        },
        &tt,
        tt.max_terms,
        false,
    )?;

    // (a;p)_{-m} = (1 - a)^∞ / (1 - a p^{-m})^∞, stepped down the lattice
    let ln_x = x.abs().ln();
    let base = log_infinite(ctx, -u, trunc)?.div(log_infinite(ctx, -v, trunc)?);
    let mut lu = LatticeLog::new(ctx, -u, trunc);
    let mut lv = LatticeLog::new(ctx, -v, trunc);
    let neg = run_tail(
        &mut acc,
        |i| {
            let m = i as i64 + 1;
            let ratio = base.div(lu.at(-m)?.div(lv.at(-m)?));
            let mag = (ratio.ln_abs - m as f64 * ln_x).exp();
            let negative = !magnitudes && ratio.negative != (x < 0.0 && m % 2 == 1);
            Ok(if negative { -mag } else { mag })
        },
        &tt,
        tt.max_terms,
        true,
    )?;

    Ok(Approx {
        value: acc.value(),
        err_estimate: pos.next_abs / (1.0 - x.abs()) + neg.next_abs / (1.0 - (v / (u * x)).abs()),
        terms_used: pos.used.max(neg.used),
    })
}

/// `(p;p)(v/u;p)(ux;p)(p/(ux);p) / ((v;p)(p/u;p)(x;p)(v/(ux);p))`.
pub fn ramanujan_rhs(pt: &RamanujanPoint, trunc: &Truncation) -> Result<Approx> {
    let (ctx, u, v, x) = (&pt.ctx, pt.u, pt.v, pt.x);
    let p = ctx.qk();
    let f = |a: f64| log_infinite(ctx, -a, trunc);
    let num = f(p)?.mul(f(v / u)?).mul(f(u * x)?).mul(f(p / (u * x))?);
    let den = f(v)?.mul(f(p / u)?).mul(f(x)?).mul(f(v / (u * x))?);
    Ok(num.div(den).to_approx())
}

/// Symmetric partial sum `Σ_{|n|≤N} (-1)^n p^{n(n-1)/2} (x/[k])^n`.
pub fn jacobi_lhs_symmetric(ctx: &QKContext, x: f64, n_max: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for m in 1..=n_max {
        acc.add(jacobi_term(ctx, x, m as i64));
        acc.add(jacobi_term(ctx, x, -(m as i64)));
    }
    acc.value()
}

/// `Σ_{|n|≤N} |term_n|`, the scale the symmetric sum cancels from.
pub fn jacobi_abs_sum(ctx: &QKContext, x: f64, n_max: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for m in 1..=n_max as i64 {
        acc.add(jacobi_term(ctx, x, m).abs());
        acc.add(jacobi_term(ctx, x, -m).abs());
    }
    acc.value()
}

fn jacobi_term(ctx: &QKContext, x: f64, n: i64) -> f64 {
    let z = x / ctx.bracket_k();
    let nf = n as f64;
    let ln_p = ctx.k() * ctx.ln_q();
    let mag = (nf * (nf - 1.0) / 2.0 * ln_p + nf * z.abs().ln()).exp();
    let odd = n.rem_euclid(2) == 1;
    let negative = odd != (z < 0.0 && odd);
    if negative {
        -mag
    } else {
        mag
    }
}

/// The theta-type sum, with `N` grown until two consecutive symmetric pairs
/// fall below `rel_tol` times the running sum of magnitudes.
pub fn jacobi_lhs(ctx: &QKContext, x: f64, trunc: &Truncation) -> Result<Approx> {
    if x == 0.0 || !x.is_finite() {
        return Err(invalid(format!("x must be finite and nonzero, got {x}")));
    }
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    let mut mass = 1.0;
    let mut small = 0;
    for m in 1..trunc.max_terms {
        let a = jacobi_term(ctx, x, m as i64);
        let b = jacobi_term(ctx, x, -(m as i64));
        if !(a.is_finite() && b.is_finite()) {
            return Err(QkError::NonFinite { index: m as i64 });
        }
        acc.add(a);
        acc.add(b);
        let pair = a.abs() + b.abs();
        mass += pair;
        if pair < trunc.rel_tol * mass {
            small += 1;
            if small >= 2 {
                let next = jacobi_term(ctx, x, m as i64 + 1).abs()
                    + jacobi_term(ctx, x, -(m as i64) - 1).abs();
                return Ok(Approx {
                    value: acc.value(),
                    err_estimate: next,
                    terms_used: 2 * m + 1,
                });
            }
        } else {
            small = 0;
        }
    }
    Err(QkError::NonConvergent {
        terms: trunc.max_terms,
    })
}

/// `(p;p)(x/[k];p)([k]p/x;p)`; a vanishing factor is a zero of the product,
/// reported as exact 0.
pub fn jacobi_rhs(ctx: &QKContext, x: f64, trunc: &Truncation) -> Result<Approx> {
    if x == 0.0 || !x.is_finite() {
        return Err(invalid(format!("x must be finite and nonzero, got {x}")));
    }
    let bk = ctx.bracket_k();
    let p = ctx.qk();
    let parts = [
        log_infinite(ctx, -p, trunc),
        log_infinite(ctx, -x / bk, trunc),
        log_infinite(ctx, -bk * p / x, trunc),
    ];
    let mut out = LogValue::one();
    for part in parts {
        match part {
            Ok(v) => out = out.mul(v),
            Err(QkError::ZeroFactor { .. }) => return Ok(Approx::exact(0.0)),
            Err(e) => return Err(e),
        }
    }
    Ok(out.to_approx())
}

/// `(1 - q)(p;p)(uv;p) / ((u;p)(v;p))` at `u = q^t`, `v = q^s`.
pub fn sides_lhs(ctx: &QKContext, t: f64, s: f64, trunc: &Truncation) -> Result<Approx> {
    crate::gammabeta::check_arg("t", t)?;
    crate::gammabeta::check_arg("s", s)?;
    let (u, v) = (ctx.pow(t), ctx.pow(s));
    let f = |a: f64| log_infinite(ctx, -a, trunc);
    let num = f(ctx.qk())?.mul(f(u * v)?);
    let den = f(u)?.mul(f(v)?);
    Ok(LogValue::from_f64(1.0 - ctx.q())
        .mul(num)
        .div(den)
        .to_approx())
}

/// `(1 - q) Σ_{n≥0} u^n (p^{n+1};p) / (v p^n;p)` at `u = q^t`, `v = q^s`.
pub fn sides_rhs(ctx: &QKContext, t: f64, s: f64, trunc: &Truncation) -> Result<Approx> {
    crate::gammabeta::check_arg("t", t)?;
    crate::gammabeta::check_arg("s", s)?;
    let q = ctx.q();
    let v = ctx.pow(s);
    let mut num = LatticeLog::new(ctx, -ctx.qk(), trunc);
    let mut den = LatticeLog::new(ctx, -v, trunc);
    let mut acc = CompensatedSum::new();
    let run = run_tail(
        &mut acc,
        |n| {
            let ratio = num.at(n as i64)?.div(den.at(n as i64)?);
            Ok((1.0 - q) * ctx.pow(n as f64 * t) * ratio.value())
        },
        trunc,
        trunc.max_terms,
        false,
    )?;
    Ok(Approx {
        value: acc.value(),
        err_estimate: run.next_abs / (1.0 - q),
        terms_used: run.used,
    })
}

/// Runs a registered identity or suite over `grid`; `tolerance` overrides
/// the per-check tolerances when given.
pub fn verify_identity(
    name: &str,
    grid: &GridSpec,
    tolerance: Option<f64>,
) -> Result<IdentityReport> {
    let cfg = SuiteConfig {
        tol: tolerance,
        ..SuiteConfig::default()
    };
    run_suite(name, grid, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: f64, k: f64) -> QKContext {
        QKContext::new(q, k).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-30)
    }

    fn tr() -> Truncation {
        Truncation::default()
    }

    #[test]
    fn ramanujan_point_domain() {
        let c = ctx(0.5, 1.0);
        assert!(RamanujanPoint::new(c, -0.3, -0.3, 0.7).is_err());
        // |v/(ux)| = 1.25
        assert!(RamanujanPoint::new(c, -0.3, -0.15, 0.4).is_err());
        assert!(RamanujanPoint::new(c, -0.3, -0.15, 1e-8).is_err());
        assert!(RamanujanPoint::new(c, 0.0, -0.15, 0.7).is_err());
        assert!(RamanujanPoint::new(c, -0.3, -0.15, 1.0).is_err());
        assert!(RamanujanPoint::new(c, -0.3, -0.15, 0.7).is_ok());
    }

    #[test]
    fn ramanujan_example() {
        let pt = RamanujanPoint::new(ctx(0.5, 1.0), -0.3, -0.15, 0.7).unwrap();
        let l = ramanujan_lhs(&pt, &tr()).unwrap();
        let r = ramanujan_rhs(&pt, &tr()).unwrap();
        assert!(rel(l.value, r.value) < 1e-8, "{} vs {}", l.value, r.value);
        for &(q, k, u, v, x) in &[
            (0.7, 2.0, 0.4, 0.1, 0.5),
            (0.3, 0.5, -0.6, 0.2, -0.6),
            (0.8, 1.5, 0.9, -0.5, 0.8),
        ] {
            let pt = RamanujanPoint::new(ctx(q, k), u, v, x).unwrap();
            let l = ramanujan_lhs(&pt, &tr()).unwrap().value;
            let r = ramanujan_rhs(&pt, &tr()).unwrap().value;
            assert!(rel(l, r) < 1e-8, "{q} {k} {u} {v} {x}: {l} vs {r}");
        }
    }

    #[test]
    fn negative_pochhammer_routes_agree() {
        let c = ctx(0.6, 1.3);
        for m in 1..=6u32 {
            for &a in &[-0.7, 0.2, 0.55] {
                let real = pochhammer_real(&c, a, -(m as i64), &tr()).unwrap().value;
                let finite = pochhammer_negative_finite(&c, a, m);
                assert!(rel(real, finite) < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_examples() {
        let c = ctx(0.5, 1.0);
        let l = jacobi_lhs(&c, 1.0, &tr()).unwrap().value;
        let r = jacobi_rhs(&c, 1.0, &tr()).unwrap().value;
        assert_eq!(r, 0.0);
        assert!(l.abs() < 1e-9);

        let l = jacobi_lhs(&c, 0.3, &tr()).unwrap().value;
        let r = jacobi_rhs(&c, 0.3, &tr()).unwrap().value;
        assert!(rel(l, r) < 1e-10);

        let c = ctx(0.8, 2.0);
        let l = jacobi_lhs(&c, 2.0, &tr()).unwrap().value;
        let r = jacobi_rhs(&c, 2.0, &tr()).unwrap().value;
        assert!(rel(l, r) < 1e-9, "{l} vs {r}");
    }

    #[test]
    fn jacobi_negative_and_irregular_points() {
        for &(q, k, x) in &[(0.3, 0.5, -1.7), (0.5, 2.0, 4.2), (0.7, 1.0, -0.05)] {
            let c = ctx(q, k);
            let l = jacobi_lhs(&c, x, &tr()).unwrap();
            let r = jacobi_rhs(&c, x, &tr()).unwrap().value;
            assert!(rel(l.value, r) < 1e-8, "{q} {k} {x}");
            let n = (l.terms_used - 1) / 2;
            let doubled = jacobi_lhs_symmetric(&c, x, 2 * n);
            assert!(rel(doubled, jacobi_lhs_symmetric(&c, x, n)) < 1e-13);
        }
        assert!(jacobi_lhs(&ctx(0.5, 1.0), 0.0, &tr()).is_err());
    }

    #[test]
    fn sides_agree() {
        for &(q, k, t, s) in &[
            (0.5, 1.0, 1.3, 2.2),
            (0.7, 2.0, 0.4, 5.0),
            (0.3, 0.5, 2.3, 1.0),
        ] {
            let c = ctx(q, k);
            let l = sides_lhs(&c, t, s, &tr()).unwrap().value;
            let r = sides_rhs(&c, t, s, &tr()).unwrap().value;
            assert!(rel(l, r) < 1e-8);
        }
    }

    #[test]
    fn verify_jacobi_ten_points() {
        let g = GridSpec::parse(
            "q = list(0.5)\nk = list(1)\nx = list(-2.5, -1.7, -0.9, -0.4, -0.05, 0.05, 0.3, 0.6, 1.3, 3.0)",
        )
        .unwrap();
        let rep = verify_identity("jacobi", &g, Some(1e-8)).unwrap();
        let main: Vec<_> = rep
            .records
            .iter()
            .filter(|r| r.check == "sum = product")
            .collect();
        assert_eq!(main.len(), 10);
        assert!(main.iter().all(|r| r.status == crate::report::Status::Pass));
        assert!(rep.passed());
    }

    #[test]
    fn verify_skips_excluded_points() {
        let g = GridSpec::parse(
            "q = list(0.5)\nk = list(1)\nu = list(-0.3)\nv = list(-0.3, -0.15)\nx = list(0.7)",
        )
        .unwrap();
        let rep = verify_identity("ramanujan", &g, Some(1e-8)).unwrap();
        let sums: Vec<_> = rep
            .records
            .iter()
            .filter(|r| r.check == "bilateral sum = product")
            .collect();
        assert_eq!(sums[0].status, crate::report::Status::Skipped);
        assert_eq!(sums[1].status, crate::report::Status::Pass);
        assert!(rep.passed());

        let g = GridSpec::parse("q = list(0.5)\nk = list(1)\nx = list(0, 0.3)").unwrap();
        let rep = verify_identity("jacobi", &g, None).unwrap();
        assert_eq!(rep.records[1].status, crate::report::Status::Skipped);
        assert!(rep.passed());
    }

    #[test]
    fn verify_unknown_name() {
        assert_eq!(
            verify_identity("nonsense", &GridSpec::default_grid(), None).unwrap_err(),
            QkError::UnknownIdentity("nonsense".into())
        );
    }
}
