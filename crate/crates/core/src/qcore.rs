//! q-number arithmetic, the q-derivative and Jackson integration.
//!
//! Everything here is parameterised by a [`QKContext`] holding the two
//! deformation parameters `q ∈ (0, 1)` and `k > 0`. Truncated infinite sums
//! follow a [`Truncation`] policy and report an [`Approx`].

use serde::Serialize;

use crate::error::{invalid, QkError, Result};

/// Smallest distance from 0 and from 1 that a context's `q` may have.
pub const Q_GUARD: f64 = 1e-12;

/// Deformation parameters `q` and `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QKContext {
    q: f64,
    k: f64,
}

impl QKContext {
    /// Rejects `q` outside `[1e-12, 1 - 1e-12]` and non-positive `k`.
    pub fn new(q: f64, k: f64) -> Result<Self> {
        if !q.is_finite() || !(Q_GUARD..=1.0 - Q_GUARD).contains(&q) {
            return Err(invalid(format!(
                "q must satisfy 0 < q < 1 (guard band [{Q_GUARD:e}, 1 - {Q_GUARD:e}]), got {q}"
            )));
        }
        if !k.is_finite() || k <= 0.0 {
            return Err(invalid(format!("k must satisfy k > 0, got {k}")));
        }
        Ok(Self { q, k })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn ln_q(&self) -> f64 {
        self.q.ln()
    }

    /// `q^t`.
    pub fn pow(&self, t: f64) -> f64 {
        pow_base(self.q, t)
    }

    /// `q^k`, the ratio between consecutive factors of every q,k-product.
    pub fn qk(&self) -> f64 {
        self.pow(self.k)
    }

    /// `[t]_q = (1 - q^t) / (1 - q)`.
    pub fn bracket(&self, t: f64) -> f64 {
        bracket_in_base(self.q, t)
    }

    /// `[k]_q`.
    pub fn bracket_k(&self) -> f64 {
        self.bracket(self.k)
    }

    /// The same context with `q` replaced.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(q, self.k)
    }

    /// The same context with `k` replaced.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(self.q, k)
    }
}

/// Numerical policy for truncated infinite sums and products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub rel_tol: f64,
    pub max_terms: usize,
    /// Number of consecutive growing terms on an unbounded tail that is
    /// reported as divergence.
    pub divergence_window: usize,
}

impl Truncation {
    pub fn new(rel_tol: f64, max_terms: usize, divergence_window: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(invalid(format!(
                "rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        if max_terms < 8 {
            return Err(invalid(format!(
                "max_terms must be at least 8, got {max_terms}"
            )));
        }
        if divergence_window < 2 {
            return Err(invalid(format!(
                "divergence_window must be at least 2, got {divergence_window}"
            )));
        }
        Ok(Self {
            rel_tol,
            max_terms,
            divergence_window,
        })
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self> {
        Self::new(rel_tol, self.max_terms, self.divergence_window)
    }

    pub fn with_max_terms(self, max_terms: usize) -> Result<Self> {
        Self::new(self.rel_tol, max_terms, self.divergence_window)
    }

    pub fn with_divergence_window(self, window: usize) -> Result<Self> {
        Self::new(self.rel_tol, self.max_terms, window)
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_terms: 100_000,
            divergence_window: 50,
        }
    }
}

/// A computed value with a heuristic truncation-error bound.
///
/// `terms_used` counts terms of the outermost truncated expansion. For a
/// ratio of two infinite products it is the larger of the two factor counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Approx {
    pub value: f64,
    pub err_estimate: f64,
    pub terms_used: usize,
}

impl Approx {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            err_estimate: 0.0,
            terms_used: 0,
        }
    }

    pub(crate) fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            err_estimate: self.err_estimate * factor.abs(),
            terms_used: self.terms_used,
        }
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `base^t`; integer exponents up to 64 use repeated multiplication.
pub fn pow_base(base: f64, t: f64) -> f64 {
    if t.fract() == 0.0 && t.abs() <= 64.0 {
        base.powi(t as i32)
    } else {
        base.powf(t)
    }
}

/// `[t]_base = (1 - base^t) / (1 - base)` for any `base > 0`, with the
/// limit `t` at `base = 1`.
///
/// Non-integer exponents go through `expm1` so the bracket keeps full
/// relative accuracy near `t = 0` and near `base = 1`.
pub fn bracket_in_base(base: f64, t: f64) -> f64 {
    if base == 1.0 {
        return t;
    }
    if t.fract() == 0.0 && t.abs() <= 64.0 {
        return (1.0 - base.powi(t as i32)) / (1.0 - base);
    }
    let l = base.ln();
    (t * l).exp_m1() / l.exp_m1()
}

/// `[t]_q`.
pub fn q_bracket(ctx: &QKContext, t: f64) -> f64 {
    ctx.bracket(t)
}

/// `[n]_{q^b}! = ∏_{j=1}^{n} [j]_{q^b}`.
pub fn q_factorial(ctx: &QKContext, n: u32, base_exponent: f64) -> f64 {
    let base = ctx.pow(base_exponent);
    (1..=n)
        .map(|j| bracket_in_base(base, f64::from(j)))
        .product()
}

/// `∂_q f(x) = (f(qx) - f(x)) / ((q - 1) x)`.
pub fn q_derivative(ctx: &QKContext, f: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    q_derivative_in_base(ctx.q(), f, x)
}

/// The q-derivative for an arbitrary positive base, as needed by the power
/// chain rule where the inner derivative is taken in base `q^b`.
pub fn q_derivative_in_base(base: f64, f: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(QkError::SingularPoint);
    }
    if !(base > 0.0) || base == 1.0 || !base.is_finite() {
        return Err(invalid(format!(
            "q-derivative base must be positive and != 1, got {base}"
        )));
    }
    Ok((f(base * x) - f(x)) / ((base - 1.0) * x))
}

pub(crate) struct TailRun {
    pub used: usize,
    /// Magnitude of the first term that was not added.
    pub next_abs: f64,
}

/// Sums `term(0), term(1), ...` into `acc` until two consecutive terms fall
/// below `rel_tol * |acc|`.
///
/// With `watch_growth`, `divergence_window` consecutive growing terms (or a
/// non-finite one) abort with [`QkError::Divergent`].
pub(crate) fn run_tail<F>(
    acc: &mut CompensatedSum,
    mut term: F,
    trunc: &Truncation,
    cap: usize,
    watch_growth: bool,
) -> Result<TailRun>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut small = 0usize;
    let mut grow = 0usize;
    let mut prev = 0.0f64;
    let mut all_zero = true;
    for n in 0..cap {
        let v = term(n)?;
        if !v.is_finite() {
            return Err(if watch_growth {
                QkError::Divergent {
                    terms: n,
                    window: grow,
                }
            } else {
                QkError::NonFinite { index: n as i64 }
            });
        }
        acc.add(v);
        all_zero &= v == 0.0;
        let a = v.abs();
        if watch_growth {
            if n > 0 && a > prev {
                grow += 1;
                if grow >= trunc.divergence_window {
                    return Err(QkError::Divergent {
                        terms: n + 1,
                        window: grow,
                    });
                }
            } else {
                grow = 0;
            }
        }
        prev = a;
        if a < trunc.rel_tol * acc.value().abs() {
            small += 1;
            if small >= 2 {
                let next_abs = match term(n + 1) {
                    Ok(v) if v.is_finite() => v.abs(),
                    _ => a,
                };
                return Ok(TailRun {
                    used: n + 1,
                    next_abs,
                });
            }
        } else {
            small = 0;
        }
    }
    if all_zero {
        return Ok(TailRun {
            used: cap,
            next_abs: 0.0,
        });
    }
    Err(QkError::NonConvergent { terms: cap })
}

/// `∫_0^b f(x) d_q x = (1 - q) b Σ_{n≥0} q^n f(q^n b)`.
pub fn jackson_definite(
    ctx: &QKContext,
    f: impl Fn(f64) -> f64,
    b: f64,
    trunc: &Truncation,
) -> Result<Approx> {
    try_jackson_definite(ctx, |x| Ok(f(x)), b, trunc)
}

/// [`jackson_definite`] for integrands that can fail.
pub fn try_jackson_definite(
    ctx: &QKContext,
    f: impl Fn(f64) -> Result<f64>,
    b: f64,
    trunc: &Truncation,
) -> Result<Approx> {
    jackson_definite_indexed(ctx, |_, x| f(x), b, trunc)
}

/// [`try_jackson_definite`] with the lattice index `n` of `x = q^n b` passed
/// to the integrand. Indices arrive in increasing order, so integrands may
/// carry state from one point to the next.
pub fn jackson_definite_indexed(
    ctx: &QKContext,
    mut f: impl FnMut(i64, f64) -> Result<f64>,
    b: f64,
    trunc: &Truncation,
) -> Result<Approx> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(invalid(format!(
            "upper limit b must be positive and finite, got {b}"
        )));
    }
    let q = ctx.q();
    let weight = (1.0 - q) * b;
    let mut acc = CompensatedSum::new();
    let run = run_tail(
        &mut acc,
        |n| {
            let qn = pow_base(q, n as f64);
            Ok(weight * qn * f(n as i64, b * qn)?)
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

/// `∫_0^{∞/a} f(x) d_q x = (1 - q) Σ_{n∈ℤ} (q^n/a) f(q^n/a)`.
///
/// The bilateral sum is split at `n = 0`. The `n < 0` tail (arguments going
/// to infinity) is watched for growth. Both tails share the term cap.
pub fn jackson_improper(
    ctx: &QKContext,
    f: impl Fn(f64) -> f64,
    a: f64,
    trunc: &Truncation,
) -> Result<Approx> {
    try_jackson_improper(ctx, |x| Ok(f(x)), a, trunc)
}

/// [`jackson_improper`] for integrands that can fail.
pub fn try_jackson_improper(
    ctx: &QKContext,
    f: impl Fn(f64) -> Result<f64>,
    a: f64,
    trunc: &Truncation,
) -> Result<Approx> {
    jackson_improper_indexed(ctx, |_, x| f(x), a, trunc)
}

/// [`try_jackson_improper`] with the lattice index of `x = q^n / a`. The
/// integrand sees `n = 0, 1, 2, ...` and then `n = -1, -2, ...`.
pub fn jackson_improper_indexed(
    ctx: &QKContext,
    mut f: impl FnMut(i64, f64) -> Result<f64>,
    a: f64,
    trunc: &Truncation,
) -> Result<Approx> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(invalid(format!(
            "scale a must be positive and finite, got {a}"
        )));
    }
    let q = ctx.q();
    let ln_q = ctx.ln_q();
    let ln_a = a.ln();
    let point = |n: i64| -> f64 {
        if n.unsigned_abs() <= 64 {
            q.powi(n as i32) / a
        } else {
            (n as f64 * ln_q - ln_a).exp()
        }
    };
    let mut acc = CompensatedSum::new();
    let pos = run_tail(
        &mut acc,
        |n| {
            let x = point(n as i64);
            Ok((1.0 - q) * x * f(n as i64, x)?)
        },
        trunc,
        trunc.max_terms,
        false,
    )?;
    let remaining = trunc.max_terms.saturating_sub(pos.used);
    if remaining == 0 {
        return Err(QkError::NonConvergent {
            terms: trunc.max_terms,
        });
    }
    let neg = run_tail(
        &mut acc,
        |m| {
            let n = -(m as i64) - 1;
            let x = point(n);
            Ok((1.0 - q) * x * f(n, x)?)
        },
        trunc,
        remaining,
        true,
    )?;
    Ok(Approx {
        value: acc.value(),
        err_estimate: (pos.next_abs + neg.next_abs) / (1.0 - q),
        terms_used: pos.used + neg.used,
    })
}
