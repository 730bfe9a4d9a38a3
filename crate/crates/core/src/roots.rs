//! Safeguarded Newton iteration on a sign-changing bracket.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Stop once `|f(x)|` falls to this value.
    pub f_abs: f64,
    /// Stop once the bracket is narrower than `x_rel · max(1, |x|)`.
    pub x_rel: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            f_abs: 1e-12,
            x_rel: 4.0 * f64::EPSILON,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds a root of `f` inside `[lo, hi]`, where `f` returns `(value, derivative)`.
///
/// Newton steps are taken while they stay inside the current bracket and shrink it
/// quickly enough; otherwise the step falls back to bisection. The bracket must change
/// sign. `guess`, when given and inside the bracket, seeds the first Newton step.
pub fn newton_bisect<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    guess: Option<f64>,
    tol: Tolerance,
) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain(format!("bracket [{lo}, {hi}] is not finite")));
    }
    let (flo, _) = f(lo);
    if flo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    let (fhi, _) = f(hi);
    if fhi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::domain(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})"
        )));
    }
    // Orient so that f(neg) < 0 < f(pos).
    let (mut neg, mut pos) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };

    let mut x = match guess {
        Some(g) if g > lo.min(hi) && g < lo.max(hi) => g,
        _ => 0.5 * (lo + hi),
    };
    let mut last_width = (hi - lo).abs();
    let mut slow = 0;
    for iter in 1..=tol.max_iter {
        let (fx, dfx) = f(x);
        if fx.is_nan() {
            return Err(Error::numerical(format!(
                "function returned NaN at x = {x}"
            )));
        }
        if fx.abs() <= tol.f_abs {
            return Ok(Root {
                x,
                residual: fx,
                iterations: iter,
            });
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let width = (pos - neg).abs();
        if width <= tol.x_rel * x.abs().max(1.0) {
            return Ok(Root {
                x,
                residual: fx,
                iterations: iter,
            });
        }

        let (a, b) = (neg.min(pos), neg.max(pos));
        let newton = x - fx / dfx;
        let inside = newton.is_finite() && newton > a && newton < b;
        // Two consecutive steps that fail to halve the bracket force a bisection.
        slow = if width > 0.5 * last_width {
            slow + 1
        } else {
            0
        };
        last_width = width;
        x = if inside && slow < 2 {
            newton
        } else {
            slow = 0;
            0.5 * (a + b)
        };
    }
    Err(Error::numerical(format!(
        "root not found within {} iterations (bracket [{neg}, {pos}])",
        tol.max_iter
    )))
}

/// Widens `[lo, hi]` upward by doubling its width until `f(hi) ≥ 0`.
/// `f` must be non-decreasing and `f(lo) < 0`.
pub fn bracket_upward<F>(mut f: F, lo: f64, mut hi: f64, max_doublings: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut lo = lo;
    for _ in 0..max_doublings {
        if f(hi) >= 0.0 {
            return Ok((lo, hi));
        }
        let width = hi - lo;
        lo = hi;
        hi += 2.0 * width;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::numerical("failed to bracket root"))
}
