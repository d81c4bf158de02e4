//! `Γ_{q,k}` and `B_{q,k}` in closed and infinite-product form, the
//! classical `Γ`, `Γ_k`, `B`, `B_k` they deform, and convergence tables for
//! the `q → 1` and `k → 1` limits.
//!
//! With `p = q^k`, the closed form is
//! `Γ_{q,k}(t) = (1 - p)^{t/k - 1}_{q,k} / (1 - q)^{t/k - 1}`, which
//! satisfies `Γ(k) = 1` and `Γ(t + k) = [t]_q Γ(t)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::qcore::{Approx, QKContext, Truncation};
use crate::qproducts::{log_infinite, log_real, shifted_product_finite, LogValue};

/// Upper bound on `t` and `s`; beyond it `q^t` underflows for small `q`.
pub const ARG_MAX: f64 = 200.0;

pub(crate) fn check_arg(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 || v > ARG_MAX {
        return Err(invalid(format!(
            "{name} must satisfy 0 < {name} <= {ARG_MAX}, got {v}"
        )));
    }
    Ok(())
}

/// `(1 - a)^∞_{q,k}` in log form.
fn log_minus(ctx: &QKContext, a: f64, trunc: &Truncation) -> Result<LogValue> {
    log_infinite(ctx, -a, trunc)
}

pub(crate) fn gamma_log(ctx: &QKContext, t: f64, trunc: &Truncation) -> Result<LogValue> {
    check_arg("t", t)?;
    let e = t / ctx.k() - 1.0;
    let prod = log_real(ctx, -ctx.qk(), e, trunc)?;
    Ok(prod.div(LogValue::powf(1.0 - ctx.q(), e)))
}

/// `Γ_{q,k}(t)` from its closed form.
pub fn gamma_qk(ctx: &QKContext, t: f64, trunc: &Truncation) -> Result<Approx> {
    Ok(gamma_log(ctx, t, trunc)?.to_approx())
}

/// `Γ_{q,k}(t) = (p;p)_∞ / ((q^t;p)_∞ (1 - q)^{t/k - 1})`.
pub fn gamma_qk_product(ctx: &QKContext, t: f64, trunc: &Truncation) -> Result<Approx> {
    check_arg("t", t)?;
    let num = log_minus(ctx, ctx.qk(), trunc)?;
    let den = log_minus(ctx, ctx.pow(t), trunc)?;
    Ok(num
        .div(den)
        .div(LogValue::powf(1.0 - ctx.q(), t / ctx.k() - 1.0))
        .to_approx())
}

pub(crate) fn beta_log(ctx: &QKContext, t: f64, s: f64, trunc: &Truncation) -> Result<LogValue> {
    check_arg("t", t)?;
    check_arg("s", s)?;
    let k = ctx.k();
    let num = log_real(ctx, -ctx.qk(), s / k - 1.0, trunc)?;
    let den = log_real(ctx, -ctx.pow(t), s / k, trunc)?;
    Ok(LogValue::from_f64(1.0 - ctx.q()).mul(num).div(den))
}

/// `B_{q,k}(t, s) = (1 - q) (1 - p)^{s/k - 1} / (1 - q^t)^{s/k}`.
pub fn beta_qk(ctx: &QKContext, t: f64, s: f64, trunc: &Truncation) -> Result<Approx> {
    Ok(beta_log(ctx, t, s, trunc)?.to_approx())
}

/// `B_{q,k}(t, s)` as `(1 - q) (p;p)(q^{s+t};p) / ((q^s;p)(q^t;p))`.
pub fn beta_qk_product(ctx: &QKContext, t: f64, s: f64, trunc: &Truncation) -> Result<Approx> {
    check_arg("t", t)?;
    check_arg("s", s)?;
    let num = log_minus(ctx, ctx.qk(), trunc)?.mul(log_minus(ctx, ctx.pow(s + t), trunc)?);
    let den = log_minus(ctx, ctx.pow(s), trunc)?.mul(log_minus(ctx, ctx.pow(t), trunc)?);
    Ok(LogValue::from_f64(1.0 - ctx.q())
        .mul(num)
        .div(den)
        .to_approx())
}

/// `Γ_{q,k}(t) Γ_{q,k}(s) / Γ_{q,k}(t + s)`.
pub fn beta_qk_gamma_ratio(ctx: &QKContext, t: f64, s: f64, trunc: &Truncation) -> Result<Approx> {
    check_arg("s", s)?;
    let gt = gamma_log(ctx, t, trunc)?;
    let gs = gamma_log(ctx, s, trunc)?;
    let gts = gamma_log(ctx, t + s, trunc)?;
    Ok(gt.mul(gs).div(gts).to_approx())
}

/// `B_{q,k}(t, ∞) = (1 - q)(1 - p)^{t/k - 1}`.
pub fn beta_qk_t_infinity(ctx: &QKContext, t: f64, trunc: &Truncation) -> Result<Approx> {
    check_arg("t", t)?;
    let prod = log_real(ctx, -ctx.qk(), t / ctx.k() - 1.0, trunc)?;
    Ok(LogValue::from_f64(1.0 - ctx.q()).mul(prod).to_approx())
}

/// `B_{q,k}(t, nk) = (1 - q)(1 - p)^{n-1} / (1 - q^t)^n` with finite products.
pub fn beta_qk_nk_finite(ctx: &QKContext, t: f64, n: u32) -> Result<f64> {
    check_arg("t", t)?;
    if n == 0 {
        return Err(invalid("n must be a positive integer"));
    }
    let num = shifted_product_finite(ctx, 1.0, -ctx.qk(), n - 1);
    let den = shifted_product_finite(ctx, 1.0, -ctx.pow(t), n);
    Ok((1.0 - ctx.q()) * num / den)
}

/// `B_{q,k}(t, nk) = (1 - q)(1 - p)^{n-1}(1 - p)^{t/k-1} / (1 - p)^{t/k+n-1}`
/// with real-exponent products.
pub fn beta_qk_nk_real(ctx: &QKContext, t: f64, n: u32, trunc: &Truncation) -> Result<Approx> {
    check_arg("t", t)?;
    if n == 0 {
        return Err(invalid("n must be a positive integer"));
    }
    let x = -ctx.qk();
    let e = t / ctx.k();
    let nm1 = f64::from(n) - 1.0;
    let a = log_real(ctx, x, nm1, trunc)?;
    let b = log_real(ctx, x, e - 1.0, trunc)?;
    let c = log_real(ctx, x, e + nm1, trunc)?;
    Ok(LogValue::from_f64(1.0 - ctx.q())
        .mul(a)
        .mul(b)
        .div(c)
        .to_approx())
}

/// Classical `Γ(t)`.
pub fn gamma_classical(t: f64) -> f64 {
    libm::tgamma(t)
}

fn ln_gamma(t: f64) -> f64 {
    libm::lgamma(t)
}

/// `Γ_k(t) = k^{t/k - 1} Γ(t/k)`.
pub fn gamma_k_classical(k: f64, t: f64) -> f64 {
    let u = t / k;
    if u < 170.0 {
        k.powf(u - 1.0) * gamma_classical(u)
    } else {
        ((u - 1.0) * k.ln() + ln_gamma(u)).exp()
    }
}

/// Classical `B(t, s)`.
pub fn beta_classical(t: f64, s: f64) -> f64 {
    if t + s < 170.0 {
        gamma_classical(t) * gamma_classical(s) / gamma_classical(t + s)
    } else {
        (ln_gamma(t) + ln_gamma(s) - ln_gamma(t + s)).exp()
    }
}

/// `B_k(t, s) = Γ_k(t) Γ_k(s) / Γ_k(t + s) = B(t/k, s/k) / k`.
pub fn beta_k_classical(k: f64, t: f64, s: f64) -> f64 {
    beta_classical(t / k, s / k) / k
}

/// Rounding allowance, in units of machine epsilon, for [`LimitTable::exact`].
const EXACT_ULPS: f64 = 4096.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    /// The varying parameter (`q` or `k`).
    pub param: f64,
    pub value: f64,
    pub error: f64,
}

/// Errors of a family of evaluations against a limiting value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitTable {
    pub label: String,
    pub target: f64,
    pub rows: Vec<LimitRow>,
    /// Errors strictly decrease over the last three rows.
    pub monotone: bool,
    /// Every row already equals the target to rounding, so there is no
    /// error left to shrink.
    pub exact: bool,
}

impl LimitTable {
    pub fn from_values(label: impl Into<String>, target: f64, values: Vec<(f64, f64)>) -> Self {
        let rows: Vec<LimitRow> = values
            .into_iter()
            .map(|(param, value)| LimitRow {
                param,
                value,
                error: (value - target).abs(),
            })
            .collect();
        let tail = &rows[rows.len().saturating_sub(3)..];
        let monotone = tail.len() >= 2 && tail.windows(2).all(|w| w[1].error < w[0].error);
        let exact = rows
            .iter()
            .all(|r| r.error <= EXACT_ULPS * f64::EPSILON * target.abs().max(1.0));
        Self {
            label: label.into(),
            target,
            rows,
            monotone,
            exact,
        }
    }

    pub fn final_error(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.error)
    }
}

/// Which deformed function a limit table follows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitFamily {
    Gamma { t: f64 },
    Beta { t: f64, s: f64 },
}

impl LimitFamily {
    fn eval(&self, ctx: &QKContext, trunc: &Truncation) -> Result<f64> {
        Ok(match *self {
            LimitFamily::Gamma { t } => gamma_qk(ctx, t, trunc)?.value,
            LimitFamily::Beta { t, s } => beta_qk(ctx, t, s, trunc)?.value,
        })
    }

    fn classical(&self, k: f64) -> f64 {
        match *self {
            LimitFamily::Gamma { t } => gamma_k_classical(k, t),
            LimitFamily::Beta { t, s } => beta_k_classical(k, t, s),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            LimitFamily::Gamma { .. } => "gamma",
            LimitFamily::Beta { .. } => "beta",
        }
    }
}

fn check_sequence(seq: &[f64], limit: f64) -> Result<()> {
    if seq.is_empty() {
        return Err(invalid("limit sequence is empty"));
    }
    let dist: Vec<f64> = seq.iter().map(|v| (v - limit).abs()).collect();
    if dist.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid(format!(
            "sequence must approach {limit} monotonically"
        )));
    }
    Ok(())
}

/// `q → 1` at fixed `k`: `Γ_{q,k} → Γ_k`, `B_{q,k} → B_k`.
pub fn limit_q_to_1(
    family: LimitFamily,
    k: f64,
    q_seq: &[f64],
    trunc: &Truncation,
) -> Result<LimitTable> {
    check_sequence(q_seq, 1.0)?;
    if q_seq.iter().any(|&q| q >= 1.0) {
        return Err(invalid("q-sequence must stay below 1 (0 < q < 1)"));
    }
    let values = q_seq
        .par_iter()
        .map(|&q| Ok((q, family.eval(&QKContext::new(q, k)?, trunc)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitTable::from_values(
        format!("{}_q,k -> {}_k (k = {k})", family.name(), family.name()),
        family.classical(k),
        values,
    ))
}

/// `k → 1` at fixed `q`: `Γ_{q,k} → Γ_{q,1}`, `B_{q,k} → B_{q,1}`.
pub fn limit_k_to_1(
    family: LimitFamily,
    q: f64,
    k_seq: &[f64],
    trunc: &Truncation,
) -> Result<LimitTable> {
    check_sequence(k_seq, 1.0)?;
    let target = family.eval(&QKContext::new(q, 1.0)?, trunc)?;
    let values = k_seq
        .par_iter()
        .map(|&k| Ok((k, family.eval(&QKContext::new(q, k)?, trunc)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitTable::from_values(
        format!("{}_q,k -> {}_q (q = {q})", family.name(), family.name()),
        target,
        values,
    ))
}

/// `k → 1` without deformation in `q`: `Γ_k → Γ`, `B_k → B`.
pub fn limit_classical_k_to_1(family: LimitFamily, k_seq: &[f64]) -> Result<LimitTable> {
    check_sequence(k_seq, 1.0)?;
    if k_seq.iter().any(|&k| !(k > 0.0)) {
        return Err(invalid("k must satisfy k > 0"));
    }
    let values = k_seq.iter().map(|&k| (k, family.classical(k))).collect();
    Ok(LimitTable::from_values(
        format!("{}_k -> {}", family.name(), family.name()),
        family.classical(1.0),
        values,
    ))
}
