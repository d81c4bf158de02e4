//! Finite, infinite and real-exponent q,k-shifted products.
//!
//! With `p = q^k`:
//!
//! * `(x + y)^n = ∏_{j<n} (x + p^j y)`
//! * `(1 + x)^∞ = ∏_{j≥0} (1 + p^j x)`
//! * `(1 + x)^t = (1 + x)^∞ / (1 + p^t x)^∞`
//!
//! Infinite products are accumulated as a compensated sum of `ln|1 + p^j x|`
//! plus a sign, because at `q` close to 1 they over- or underflow doubles long
//! before the ratios the rest of the crate needs do.

use crate::error::{ProductSide, QkError, Result};
use crate::qcore::{pow_base, Approx, CompensatedSum, QKContext, Truncation};

/// Factors `1 + y` with `|1 + y| < ZERO_FACTOR_TOL (1 + |y|)` count as zero.
pub const ZERO_FACTOR_TOL: f64 = 1e-14;

/// A signed value held as `(-1)^negative · exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    pub negative: bool,
    /// Factors consumed by the largest infinite product involved.
    pub terms: usize,
    /// Heuristic relative truncation error.
    pub rel_err: f64,
}

impl LogValue {
    pub fn one() -> Self {
        Self {
            ln_abs: 0.0,
            negative: false,
            terms: 0,
            rel_err: 0.0,
        }
    }

    /// Wraps a nonzero finite scalar.
    pub fn from_f64(v: f64) -> Self {
        Self {
            ln_abs: v.abs().ln(),
            negative: v < 0.0,
            terms: 0,
            rel_err: 0.0,
        }
    }

    /// `|base|^e` kept in log form, for `base > 0`.
    pub fn powf(base: f64, e: f64) -> Self {
        Self {
            ln_abs: e * base.ln(),
            ..Self::one()
        }
    }

    pub fn value(&self) -> f64 {
        let m = self.ln_abs.exp();
        if self.negative {
            -m
        } else {
            m
        }
    }

    pub fn mul(self, o: Self) -> Self {
        Self {
            ln_abs: self.ln_abs + o.ln_abs,
            negative: self.negative != o.negative,
            terms: self.terms.max(o.terms),
            rel_err: self.rel_err + o.rel_err,
        }
    }

    pub fn div(self, o: Self) -> Self {
        Self {
            ln_abs: self.ln_abs - o.ln_abs,
            negative: self.negative != o.negative,
            terms: self.terms.max(o.terms),
            rel_err: self.rel_err + o.rel_err,
        }
    }

    pub fn to_approx(self) -> Approx {
        let value = self.value();
        Approx {
            value,
            err_estimate: value.abs() * self.rel_err,
            terms_used: self.terms,
        }
    }
}

/// `ln (1 + x)^∞` in base `p = exp(ln_p)`.
pub fn log_infinite_in_base(ln_p: f64, x: f64, trunc: &Truncation) -> Result<LogValue> {
    if !x.is_finite() {
        return Err(QkError::InvalidParameter(format!(
            "product argument must be finite, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(LogValue::one());
    }
    let p = ln_p.exp();
    let mut acc = CompensatedSum::new();
    let mut negative = false;
    let mut small = 0usize;
    for j in 0..trunc.max_terms {
        let y = x * (j as f64 * ln_p).exp();
        let f = 1.0 + y;
        // scaled by the factor's own term: 1 + p^j x is only known to ~eps |p^j x|
        if f.abs() < ZERO_FACTOR_TOL * (1.0 + y.abs()) {
            return Err(QkError::ZeroFactor {
                index: j,
                side: None,
            });
        }
        if y < -1.0 {
            acc.add((-1.0 - y).ln());
            negative = !negative;
        } else {
            acc.add(y.ln_1p());
        }
        if y.abs() < trunc.rel_tol {
            small += 1;
            if small >= 2 {
                // first-order remainder Σ_{i>j} p^i x
                let tail = y * p / (1.0 - p);
                acc.add(tail);
                return Ok(LogValue {
                    ln_abs: acc.value(),
                    negative,
                    terms: j + 1,
                    rel_err: tail.abs(),
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

/// `ln (1 + x)^∞` for the context's `p = q^k`.
pub fn log_infinite(ctx: &QKContext, x: f64, trunc: &Truncation) -> Result<LogValue> {
    log_infinite_in_base(ctx.k() * ctx.ln_q(), x, trunc)
}

/// `ln (1 + x)^t`; a zero factor is tagged with the product it came from.
pub fn log_real(ctx: &QKContext, x: f64, t: f64, trunc: &Truncation) -> Result<LogValue> {
    if !t.is_finite() {
        return Err(QkError::InvalidParameter(format!(
            "exponent must be finite, got {t}"
        )));
    }
    let num = log_infinite(ctx, x, trunc).map_err(|e| e.with_side(ProductSide::Numerator))?;
    let den = log_infinite(ctx, ctx.pow(ctx.k() * t) * x, trunc)
        .map_err(|e| e.with_side(ProductSide::Denominator))?;
    Ok(num.div(den))
}

/// `ln (1 + p^n y)^∞` along the integer lattice `n`, updated by one factor
/// per unit step instead of being recomputed.
///
/// Moving from `n` to `n + 1` drops the factor `1 + p^n y`; moving to `n - 1`
/// adds `1 + p^{n-1} y`. Any other jump evaluates the product afresh.
#[derive(Debug, Clone)]
pub struct LatticeLog {
    ln_p: f64,
    y: f64,
    trunc: Truncation,
    cur: Option<(i64, LogValue)>,
}

impl LatticeLog {
    pub fn new(ctx: &QKContext, y: f64, trunc: &Truncation) -> Self {
        Self {
            ln_p: ctx.k() * ctx.ln_q(),
            y,
            trunc: *trunc,
            cur: None,
        }
    }

    fn term(&self, n: i64) -> f64 {
        self.y * (n as f64 * self.ln_p).exp()
    }

    /// `ln |1 + p^n y|` and whether the factor is negative. Far down the
    /// negative lattice `p^n y` overflows, so large terms stay in logs.
    fn ln_factor(&self, n: i64) -> Result<(f64, bool)> {
        let ln_z = self.y.abs().ln() + n as f64 * self.ln_p;
        if ln_z > 36.0 {
            let inv = (-ln_z).exp();
            return Ok(if self.y < 0.0 {
                (ln_z + (-inv).ln_1p(), true)
            } else {
                (ln_z + inv.ln_1p(), false)
            });
        }
        let y = self.term(n);
        if (1.0 + y).abs() < ZERO_FACTOR_TOL * (1.0 + y.abs()) {
            return Err(QkError::ZeroFactor {
                index: 0,
                side: None,
            });
        }
        Ok(if y < -1.0 {
            ((-1.0 - y).ln(), true)
        } else {
            (y.ln_1p(), false)
        })
    }

    pub fn at(&mut self, n: i64) -> Result<LogValue> {
        let next = match self.cur {
            Some((m, v)) if n == m + 1 => {
                let (l, neg) = self.ln_factor(m)?;
                LogValue {
                    ln_abs: v.ln_abs - l,
                    negative: v.negative != neg,
                    ..v
                }
            }
            Some((m, v)) if n == m - 1 => {
                let (l, neg) = self.ln_factor(n)?;
                LogValue {
                    ln_abs: v.ln_abs + l,
                    negative: v.negative != neg,
                    ..v
                }
            }
            Some((m, v)) if n == m => v,
            _ => log_infinite_in_base(self.ln_p, self.term(n), &self.trunc)?,
        };
        self.cur = Some((n, next));
        Ok(next)
    }
}

/// `(t)_{n,k} = ∏_{j<n} (t + jk)`.
pub fn pochhammer_k(t: f64, n: u32, k: f64) -> f64 {
    (0..n).map(|j| t + f64::from(j) * k).product()
}

/// `[t]_{n,k} = ∏_{j<n} [t + jk]_q`.
pub fn pochhammer_qk(ctx: &QKContext, t: f64, n: u32) -> f64 {
    (0..n)
        .map(|j| ctx.bracket(t + f64::from(j) * ctx.k()))
        .product()
}

/// `(x + y)^n_{q,k}`.
pub fn shifted_product_finite(ctx: &QKContext, x: f64, y: f64, n: u32) -> f64 {
    let p = ctx.qk();
    (0..n).map(|j| x + pow_base(p, f64::from(j)) * y).product()
}

/// `(1 + x)^∞_{q,k}`.
pub fn shifted_product_infinite(ctx: &QKContext, x: f64, trunc: &Truncation) -> Result<Approx> {
    Ok(log_infinite(ctx, x, trunc)?.to_approx())
}

/// `(1 + x)^t_{q,k}` as a ratio of two infinite products.
pub fn shifted_product_real(ctx: &QKContext, x: f64, t: f64, trunc: &Truncation) -> Result<Approx> {
    Ok(log_real(ctx, x, t, trunc)?.to_approx())
}
