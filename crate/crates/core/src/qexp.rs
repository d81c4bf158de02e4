//! The two q,k-exponentials.
//!
//! With `p = q^k`:
//!
//! * `E^x = Σ p^{n(n-1)/2} x^n / [n]_p! = (1 + (1-p) x)^∞`, entire, with
//!   zeros at `x = -p^{-j} / (1-p)`;
//! * `e^x = Σ x^n / [n]_p! = 1 / (1 - (1-p) x)^∞`, a series with radius
//!   `1 / (1-p)` and a meromorphic product continuation.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{QkError, Result};
use crate::qcore::{bracket_in_base, Approx, CompensatedSum, QKContext, Truncation};
use crate::qproducts::{log_infinite, ZERO_FACTOR_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpMethod {
    Series,
    Product,
    /// Product where every factor is positive, series elsewhere.
    #[default]
    Auto,
}

impl FromStr for ExpMethod {
    type Err = QkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(Self::Series),
            "product" => Ok(Self::Product),
            "auto" => Ok(Self::Auto),
            other => Err(QkError::InvalidParameter(format!(
                "unknown method '{other}' (expected series, product or auto)"
            ))),
        }
    }
}

impl fmt::Display for ExpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Series => "series",
            Self::Product => "product",
            Self::Auto => "auto",
        })
    }
}

/// Sums `Σ_n sign^n exp(l_n)` where `l_0 = 0` and `l_n - l_{n-1} = step(n)`.
fn log_series(x: f64, mut step: impl FnMut(usize) -> f64, trunc: &Truncation) -> Result<Approx> {
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    let mut l = 0.0f64;
    let mut small = 0usize;
    for n in 1..trunc.max_terms {
        l += step(n);
        let mag = l.exp();
        let term = if x < 0.0 && n % 2 == 1 { -mag } else { mag };
        acc.add(term);
        if mag < trunc.rel_tol * acc.value().abs() {
            small += 1;
            if small >= 2 {
                let next = (l + step(n + 1)).exp();
                return Ok(Approx {
                    value: acc.value(),
                    err_estimate: if next.is_finite() { next } else { mag },
                    terms_used: n + 1,
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

fn big_e_series(ctx: &QKContext, x: f64, trunc: &Truncation) -> Result<Approx> {
    if x == 0.0 {
        return Ok(Approx::exact(1.0));
    }
    let p = ctx.qk();
    let ln_p = ctx.k() * ctx.ln_q();
    let ln_x = x.abs().ln();
    log_series(
        x,
        |n| (n as f64 - 1.0) * ln_p + ln_x - bracket_in_base(p, n as f64).ln(),
        trunc,
    )
}

fn big_e_product(ctx: &QKContext, x: f64, trunc: &Truncation) -> Result<Approx> {
    let y = (1.0 - ctx.qk()) * x;
    if (1.0 + y).abs() < ZERO_FACTOR_TOL * (1.0 + y.abs()) {
        // the leading factor is a genuine zero of E
        return Ok(Approx::exact(0.0));
    }
    Ok(log_infinite(ctx, y, trunc)?.to_approx())
}

/// `E_{q,k}^x`.
pub fn big_e(ctx: &QKContext, x: f64, method: ExpMethod, trunc: &Truncation) -> Result<Approx> {
    if !x.is_finite() {
        return Err(QkError::InvalidParameter(format!(
            "x must be finite, got {x}"
        )));
    }
    match method {
        ExpMethod::Series => big_e_series(ctx, x, trunc),
        ExpMethod::Product => big_e_product(ctx, x, trunc),
        ExpMethod::Auto => {
            if x >= -1.0 / (1.0 - ctx.qk()) {
                big_e_product(ctx, x, trunc)
            } else {
                big_e_series(ctx, x, trunc)
            }
        }
    }
}

/// Radius of convergence `1 / (1 - q^k)` of the `e_{q,k}` series.
pub fn small_e_radius(ctx: &QKContext) -> f64 {
    1.0 / (1.0 - ctx.qk())
}

fn small_e_series(ctx: &QKContext, x: f64, trunc: &Truncation) -> Result<Approx> {
    let radius = small_e_radius(ctx);
    if x.abs() >= radius {
        return Err(QkError::OutOfDomain(format!(
            "e-series needs |x| < 1/(1-q^k) = {radius}, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(Approx::exact(1.0));
    }
    let p = ctx.qk();
    let ln_x = x.abs().ln();
    log_series(x, |n| ln_x - bracket_in_base(p, n as f64).ln(), trunc)
}

fn small_e_product(ctx: &QKContext, x: f64, trunc: &Truncation) -> Result<Approx> {
    let y = -(1.0 - ctx.qk()) * x;
    match log_infinite(ctx, y, trunc) {
        Ok(d) => {
            let inv = crate::qproducts::LogValue::one().div(d);
            Ok(inv.to_approx())
        }
        Err(QkError::ZeroFactor { index, .. }) => Err(QkError::Pole { index }),
        Err(e) => Err(e),
    }
}

/// `e_{q,k}^x`.
pub fn small_e(ctx: &QKContext, x: f64, method: ExpMethod, trunc: &Truncation) -> Result<Approx> {
    if !x.is_finite() {
        return Err(QkError::InvalidParameter(format!(
            "x must be finite, got {x}"
        )));
    }
    match method {
        ExpMethod::Series => small_e_series(ctx, x, trunc),
        ExpMethod::Product => small_e_product(ctx, x, trunc),
        ExpMethod::Auto => {
            if x > 0.0 && x < small_e_radius(ctx) {
                small_e_series(ctx, x, trunc)
            } else {
                small_e_product(ctx, x, trunc)
            }
        }
    }
}
