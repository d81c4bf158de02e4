//! Jackson-integral representations of `Γ_{q,k}` and `B_{q,k}`.
//!
//! Two families:
//!
//! * finite upper limit with the entire exponential `E` (written
//!   `Γ̄`, `B̄` below), equal to `Γ_{q,k}` and `B_{q,k}` outright;
//! * improper integrals `γ^{(a)}`, `β^{(a)}` with the exponential `e`, equal
//!   to `Γ_{q,k}` and `B_{q,k}` only after multiplication by [`c_constant`].

use crate::error::{invalid, Result};
use crate::gammabeta::check_arg;
use crate::qcore::{
    jackson_definite_indexed, jackson_improper_indexed, run_tail, Approx, CompensatedSum,
    QKContext, Truncation,
};
use crate::qproducts::{log_real, LatticeLog, LogValue};

fn check_scale(a: f64) -> Result<()> {
    if !a.is_finite() || a <= 0.0 {
        return Err(invalid(format!("a must satisfy a > 0, got {a}")));
    }
    Ok(())
}

/// Improper integrands grow along the negative tail for `O(1/|ln q|)` lattice
/// steps before they decay, so the growth window scales with that length.
fn improper_trunc(ctx: &QKContext, trunc: &Truncation) -> Truncation {
    let steps = (24.0 / ctx.ln_q().abs()).ceil() as usize;
    Truncation {
        divergence_window: trunc.divergence_window.max(steps),
        ..*trunc
    }
}

fn combine(integral: Approx, factor: f64, inner: &Truncation) -> Approx {
    let mut out = integral.scaled(factor);
    out.terms_used = out.terms_used.min(inner.max_terms);
    out
}

/// `x^{t-1} · (±exp(l))` without forming either factor separately.
fn weighted(x: f64, t: f64, l: LogValue) -> f64 {
    LogValue::powf(x, t - 1.0).mul(l).value()
}

/// `Γ̄(t) = ∫_0^b x^{t-1} E^{-p x^k/[k]} d_q x` with `b = ([k]/(1-p))^{1/k}`.
///
/// On the lattice `x = q^n b` the exponential's product form has argument
/// `(1 - p) · (-p x^k/[k]) = p^n y_0`, so it is stepped factor by factor.
pub fn gamma_integral_e(ctx: &QKContext, t: f64, trunc: &Truncation) -> Result<Approx> {
    check_arg("t", t)?;
    let (k, p, bk) = (ctx.k(), ctx.qk(), ctx.bracket_k());
    let b = (bk / (1.0 - p)).powf(1.0 / k);
    let mut e = LatticeLog::new(ctx, -(1.0 - p) * p * b.powf(k) / bk, trunc);
    let f = |n: i64, x: f64| -> Result<f64> { Ok(weighted(x, t, e.at(n)?)) };
    jackson_definite_indexed(ctx, f, b, trunc)
}

/// `B̄(t, s) = [k]^{-t/k} ∫_0^{[k]^{1/k}} x^{t-1} (1 - p x^k/[k])^{s/k-1} d_q x`.
pub fn beta_integral_e(ctx: &QKContext, t: f64, s: f64, trunc: &Truncation) -> Result<Approx> {
    check_arg("t", t)?;
    check_arg("s", s)?;
    let (k, p, bk) = (ctx.k(), ctx.qk(), ctx.bracket_k());
    let b = bk.powf(1.0 / k);
    let y0 = -p * b.powf(k) / bk;
    let mut num = LatticeLog::new(ctx, y0, trunc);
    let mut den = LatticeLog::new(ctx, ctx.pow(s - k) * y0, trunc);
    let f = |n: i64, x: f64| -> Result<f64> {
        let prod = num.at(n)?.div(den.at(n)?);
        Ok(weighted(x, t, prod))
    };
    let integral = jackson_definite_indexed(ctx, f, b, trunc)?;
    Ok(combine(integral, bk.powf(-t / k), trunc))
}

/// `B̄(t, s)` summed directly over the lattice:
/// `(1 - q) Σ_{n≥0} q^{nt} (1 - p^{n+1})^{s/k-1}`.
pub fn beta_integral_e_series(
    ctx: &QKContext,
    t: f64,
    s: f64,
    trunc: &Truncation,
) -> Result<Approx> {
    check_arg("t", t)?;
    check_arg("s", s)?;
    let (q, k, p) = (ctx.q(), ctx.k(), ctx.qk());
    let mut num = LatticeLog::new(ctx, -p, trunc);
    let mut den = LatticeLog::new(ctx, -ctx.pow(s - k) * p, trunc);
    let mut acc = CompensatedSum::new();
    let run = run_tail(
        &mut acc,
        |n| {
            let prod = num.at(n as i64)?.div(den.at(n as i64)?);
            Ok((1.0 - q) * ctx.pow(n as f64 * t) * prod.value())
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

/// `B̄(t, ∞) = [k]^{-t/k} ∫_0^{[k]^{1/k}} x^{t-1} E^{-p x^k/((1-p)[k])} d_q x`.
pub fn beta_integral_e_s_infinity(ctx: &QKContext, t: f64, trunc: &Truncation) -> Result<Approx> {
    check_arg("t", t)?;
    let (k, p, bk) = (ctx.k(), ctx.qk(), ctx.bracket_k());
    let b = bk.powf(1.0 / k);
    let mut e = LatticeLog::new(ctx, -p * b.powf(k) / bk, trunc);
    let f = |n: i64, x: f64| -> Result<f64> { Ok(weighted(x, t, e.at(n)?)) };
    let integral = jackson_definite_indexed(ctx, f, b, trunc)?;
    Ok(combine(integral, bk.powf(-t / k), trunc))
}

/// `γ^{(a)}(t) = ∫_0^{∞/(a(1-p)^{1/k})} x^{t-1} e^{-x^k/[k]} d_q x`.
///
/// `e^{-x^k/[k]} = 1 / (1 + (1-p) x^k/[k])^∞`, whose argument again moves
/// along the lattice `p^n y_0`.
pub fn gamma_small_a(ctx: &QKContext, t: f64, a: f64, trunc: &Truncation) -> Result<Approx> {
    check_arg("t", t)?;
    check_scale(a)?;
    let (k, p, bk) = (ctx.k(), ctx.qk(), ctx.bracket_k());
    let scale = a * (1.0 - p).powf(1.0 / k);
    let mut e = LatticeLog::new(ctx, (1.0 - p) * scale.powf(-k) / bk, trunc);
    let f = |n: i64, x: f64| -> Result<f64> { Ok(weighted(x, t, LogValue::one().div(e.at(n)?))) };
    jackson_improper_indexed(ctx, f, scale, &improper_trunc(ctx, trunc))
}

/// `β^{(a)}(t, s) = [k]^{-t/k} ∫_0^{∞/a} x^{t-1} / (1 + x^k/[k])^{(t+s)/k} d_q x`.
pub fn beta_small_a(ctx: &QKContext, t: f64, s: f64, a: f64, trunc: &Truncation) -> Result<Approx> {
    check_arg("t", t)?;
    check_arg("s", s)?;
    check_scale(a)?;
    let (k, bk) = (ctx.k(), ctx.bracket_k());
    let y0 = a.powf(-k) / bk;
    let mut num = LatticeLog::new(ctx, y0, trunc);
    let mut den = LatticeLog::new(ctx, ctx.pow(t + s) * y0, trunc);
    let f = |n: i64, x: f64| -> Result<f64> {
        // 1 / (1 + y)^e = (1 + p^e y)^∞ / (1 + y)^∞
        let inv = den.at(n)?.div(num.at(n)?);
        Ok(weighted(x, t, inv))
    };
    let integral = jackson_improper_indexed(ctx, f, a, &improper_trunc(ctx, trunc))?;
    Ok(combine(integral, bk.powf(-t / k), trunc))
}

/// `β^{(a)}(t, ∞) = [k]^{-t/k} ∫_0^{∞/a} x^{t-1} / (1 + x^k/[k])^∞ d_q x`.
pub fn beta_small_a_s_infinity(
    ctx: &QKContext,
    t: f64,
    a: f64,
    trunc: &Truncation,
) -> Result<Approx> {
    check_arg("t", t)?;
    check_scale(a)?;
    let (k, bk) = (ctx.k(), ctx.bracket_k());
    let mut e = LatticeLog::new(ctx, a.powf(-k) / bk, trunc);
    let f = |n: i64, x: f64| -> Result<f64> { Ok(weighted(x, t, LogValue::one().div(e.at(n)?))) };
    let integral = jackson_improper_indexed(ctx, f, a, &improper_trunc(ctx, trunc))?;
    Ok(combine(integral, bk.powf(-t / k), trunc))
}

/// The constant with `Γ_{q,k}(t) = c(a,t) γ^{(a)}(t)` and
/// `B_{q,k}(t,s) = c(a,t) β^{(a)}(t,s)`:
///
/// `c(a,t) = a^t [k]^{t/k} / (1 + [k]a^k) · (1 + 1/([k]a^k))^{t/k} · (1 + [k]a^k)^{1-t/k}`.
pub fn c_constant(ctx: &QKContext, a: f64, t: f64, trunc: &Truncation) -> Result<Approx> {
    check_scale(a)?;
    if !t.is_finite() {
        return Err(invalid(format!("t must be finite, got {t}")));
    }
    let k = ctx.k();
    let bk = ctx.bracket_k();
    let z = bk * a.powf(k);
    let scalar = LogValue {
        ln_abs: t * a.ln() + (t / k) * bk.ln() - z.ln_1p(),
        ..LogValue::one()
    };
    let first = log_real(ctx, 1.0 / z, t / k, trunc)?;
    let second = log_real(ctx, z, 1.0 - t / k, trunc)?;
    Ok(scalar.mul(first).mul(second).to_approx())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gammabeta::{beta_qk, gamma_qk};

    fn ctx(q: f64, k: f64) -> QKContext {
        QKContext::new(q, k).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    fn tr() -> Truncation {
        Truncation::default()
    }

    fn c(cx: &QKContext, a: f64, t: f64) -> f64 {
        c_constant(cx, a, t, &tr()).unwrap().value
    }

    #[test]
    fn gamma_integral_examples() {
        for &(q, k) in &[(0.5, 1.0), (0.7, 2.0), (0.3, 0.5)] {
            let cx = ctx(q, k);
            assert!(rel(gamma_integral_e(&cx, k, &tr()).unwrap().value, 1.0) < 1e-12);
        }
        let cx = ctx(0.5, 1.0);
        assert!(rel(gamma_integral_e(&cx, 3.0, &tr()).unwrap().value, 1.5) < 1e-12);
        let cx = ctx(0.7, 2.0);
        let closed = gamma_qk(&cx, 2.6, &tr()).unwrap().value;
        assert!(rel(gamma_integral_e(&cx, 2.6, &tr()).unwrap().value, closed) < 1e-8);
    }

    #[test]
    fn beta_integral_examples() {
        let cx = ctx(0.6, 1.5);
        for &t in &[0.4, 2.3] {
            let got = beta_integral_e(&cx, t, 1.5, &tr()).unwrap().value;
            assert!(rel(got, 1.0 / cx.bracket(t)) < 1e-12);
        }
        let cx = ctx(0.5, 1.0);
        assert!(
            rel(
                beta_integral_e(&cx, 2.0, 1.0, &tr()).unwrap().value,
                2.0 / 3.0
            ) < 1e-12
        );
        let cx = ctx(0.6, 2.0);
        let closed = beta_qk(&cx, 1.7, 2.9, &tr()).unwrap().value;
        let by_integral = beta_integral_e(&cx, 1.7, 2.9, &tr()).unwrap().value;
        let by_series = beta_integral_e_series(&cx, 1.7, 2.9, &tr()).unwrap().value;
        assert!(rel(by_integral, closed) < 1e-8);
        assert!(rel(by_series, closed) < 1e-8);
        // B̄(t, ∞) = (1 - q)^{t/k} Γ̄(t)
        let inf = beta_integral_e_s_infinity(&cx, 1.7, &tr()).unwrap().value;
        let g = gamma_integral_e(&cx, 1.7, &tr()).unwrap().value;
        assert!(rel(inf, 0.4f64.powf(0.85) * g) < 1e-8);
    }

    #[test]
    fn small_a_examples() {
        for &(q, k, a) in &[(0.5, 1.0, 1.0), (0.7, 2.0, 0.5), (0.3, 0.5, 2.0)] {
            let cx = ctx(q, k);
            let got = gamma_small_a(&cx, k, a, &tr()).unwrap().value;
            assert!(rel(got, 1.0) < 1e-10, "{q} {k} {a}: {got}");
            for n in 2..=4u32 {
                let nf = f64::from(n);
                let t = nf * k;
                let got = gamma_small_a(&cx, t, a, &tr()).unwrap().value;
                let expected =
                    cx.pow(-k * nf * (nf - 1.0) / 2.0) * gamma_qk(&cx, t, &tr()).unwrap().value;
                assert!(rel(got, expected) < 1e-8, "n={n}");
            }
        }
        let cx = ctx(0.5, 1.0);
        let g1 = c(&cx, 1.0, 2.5) * gamma_small_a(&cx, 2.5, 1.0, &tr()).unwrap().value;
        let g2 = c(&cx, 2.0, 2.5) * gamma_small_a(&cx, 2.5, 2.0, &tr()).unwrap().value;
        assert!(rel(g1, g2) < 1e-8);
        assert!(rel(g1, gamma_qk(&cx, 2.5, &tr()).unwrap().value) < 1e-8);
    }

    #[test]
    fn beta_small_a_examples() {
        let cx = ctx(0.6, 1.5);
        for &s in &[0.4, 2.3] {
            let got = beta_small_a(&cx, 1.5, s, 1.0, &tr()).unwrap().value;
            assert!(rel(got, 1.0 / cx.bracket(s)) < 1e-10);
        }
        for n in 2..=3u32 {
            let nf = f64::from(n);
            let got = beta_small_a(&cx, nf * 1.5, 2.2, 0.5, &tr()).unwrap().value;
            let expected = cx.pow(-1.5 * nf * (nf - 1.0) / 2.0)
                * beta_qk(&cx, nf * 1.5, 2.2, &tr()).unwrap().value;
            assert!(rel(got, expected) < 1e-8);
        }
        let cx = ctx(0.5, 1.0);
        let got = beta_small_a(&cx, 1.4, 2.2, 1.0, &tr()).unwrap().value;
        let expected = beta_qk(&cx, 1.4, 2.2, &tr()).unwrap().value / c(&cx, 1.0, 1.4);
        assert!(rel(got, expected) < 1e-7);
        // β^{(a)}(t, ∞) = (1 - q)^{t/k} γ^{(a)}(t)
        let inf = beta_small_a_s_infinity(&cx, 1.4, 1.0, &tr()).unwrap().value;
        let g = gamma_small_a(&cx, 1.4, 1.0, &tr()).unwrap().value;
        assert!(rel(inf, 0.5f64.powf(1.4) * g) < 1e-8);
    }

    #[test]
    fn c_examples() {
        for &(q, k) in &[(0.5, 1.0), (0.7, 2.0), (0.3, 0.5)] {
            let cx = ctx(q, k);
            for &a in &[0.5, 1.0, 2.0] {
                assert!((c(&cx, a, 0.0) - 1.0).abs() < 1e-13);
                assert!((c(&cx, a, k) - 1.0).abs() < 1e-13);
                for n in 1..=4u32 {
                    let nf = f64::from(n);
                    let expected = cx.pow(k * nf * (nf - 1.0) / 2.0);
                    assert!(rel(c(&cx, a, nf * k), expected) < 1e-11);
                }
            }
        }
        // direct evaluation of the three factors as plain running products
        let cx = ctx(0.5, 1.0);
        let direct = |x: f64, e: f64| -> f64 {
            let mut v = 1.0;
            for j in 0..200 {
                let pj = 0.5f64.powi(j);
                v *= (1.0 + pj * x) / (1.0 + pj * 0.5f64.powf(e) * x);
            }
            v
        };
        let t = 1.7;
        let oracle = 1.0 / 2.0 * direct(1.0, t) * direct(1.0, 1.0 - t);
        assert!(rel(c(&cx, 1.0, t), oracle) < 1e-13);
        assert!(rel(c(&cx, 0.5, t), c(&cx, 1.0, t)) < 1e-12);
    }

    #[test]
    fn constant_ties_both_families() {
        let cx = ctx(0.5, 2.0);
        let (t, s) = (1.3, 2.2);
        let g = gamma_qk(&cx, t, &tr()).unwrap().value;
        let b = beta_qk(&cx, t, s, &tr()).unwrap().value;
        for &a in &[0.5, 1.0, 2.0] {
            let ca = c(&cx, a, t);
            assert!(rel(ca * gamma_small_a(&cx, t, a, &tr()).unwrap().value, g) < 1e-7);
            assert!(rel(ca * beta_small_a(&cx, t, s, a, &tr()).unwrap().value, b) < 1e-7);
        }
    }

    #[test]
    fn lattice_integrands_match_pointwise_exponentials() {
        use crate::qcore::{try_jackson_definite, try_jackson_improper};
        use crate::qexp::{big_e, small_e, ExpMethod};

        let cx = ctx(0.6, 1.7);
        let (k, p, bk) = (cx.k(), cx.qk(), cx.bracket_k());
        let t = 2.1;
        let b = (bk / (1.0 - p)).powf(1.0 / k);
        let plain = try_jackson_definite(
            &cx,
            |x| {
                let e = big_e(&cx, -p * x.powf(k) / bk, ExpMethod::Auto, &tr())?;
                Ok(x.powf(t - 1.0) * e.value)
            },
            b,
            &tr(),
        )
        .unwrap();
        assert!(rel(plain.value, gamma_integral_e(&cx, t, &tr()).unwrap().value) < 1e-12);

        let a = 0.8;
        let scale = a * (1.0 - p).powf(1.0 / k);
        let plain = try_jackson_improper(
            &cx,
            |x| {
                let e = small_e(&cx, -x.powf(k) / bk, ExpMethod::Product, &tr())?;
                Ok(x.powf(t - 1.0) * e.value)
            },
            scale,
            &improper_trunc(&cx, &tr()),
        )
        .unwrap();
        assert!(rel(plain.value, gamma_small_a(&cx, t, a, &tr()).unwrap().value) < 1e-11);

        let s = 1.4;
        let plain = try_jackson_improper(
            &cx,
            |x| {
                let den = log_real(&cx, x.powf(k) / bk, (t + s) / k, &tr())?;
                Ok(x.powf(t - 1.0) / den.value())
            },
            a,
            &improper_trunc(&cx, &tr()),
        )
        .unwrap();
        let lattice = beta_small_a(&cx, t, s, a, &tr()).unwrap().value;
        assert!(rel(plain.value * bk.powf(-t / k), lattice) < 1e-11);
    }

    #[test]
    fn rejects_bad_scale() {
        let cx = ctx(0.5, 1.0);
        assert!(gamma_small_a(&cx, 1.0, 0.0, &tr()).is_err());
        assert!(c_constant(&cx, -1.0, 1.0, &tr()).is_err());
    }
}
