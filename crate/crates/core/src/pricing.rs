//! European-call kernel under the standard model with Student's t returns.
//!
//! The kernel `exp(σξ)·(1 + ξ²/ν)^{−(ν+1)/2}` grows without bound for `σ > 0`, so its
//! integral to infinity diverges. Integrals are therefore always truncated, either at an
//! explicit bound or at the one-tail critical value of a chosen confidence level.

use crate::distributions::{t_pdf, t_quantile};
use crate::quadrature::{integrate, QuadConfig};
use crate::{Error, Result};

/// Unnormalized call kernel `exp(σξ) / (1 + ξ²/ν)^{(ν+1)/2}`.
pub fn call_integrand(xi: f64, sigma: f64, nu: f64) -> f64 {
    (sigma * xi - 0.5 * (nu + 1.0) * (xi * xi / nu).ln_1p()).exp()
}

/// Numerator of the kernel, `exp(σξ)`.
pub fn call_numerator(xi: f64, sigma: f64) -> f64 {
    (sigma * xi).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperBound {
    Finite(f64),
    /// Truncate at the critical value `x_c` with `P(ξ ≤ x_c) = p`.
    Confidence(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub lower: f64,
    pub upper: UpperBound,
    pub sigma: f64,
    pub nu: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Multiply the kernel by the t(ν) density constant.
    pub normalized: bool,
}

impl QuadratureSpec {
    pub fn new(sigma: f64, nu: f64, lower: f64, upper: UpperBound) -> Self {
        Self {
            lower,
            upper,
            sigma,
            nu,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            normalized: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::domain(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain(format!(
                "sigma must be non-negative, got {}",
                self.sigma
            )));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if !self.lower.is_finite() {
            return Err(Error::domain(format!(
                "lower bound must be finite, got {}",
                self.lower
            )));
        }
        Ok(())
    }

    /// The truncation point actually used.
    pub fn resolve_upper(&self) -> Result<f64> {
        match self.upper {
            UpperBound::Confidence(p) => t_quantile(p, self.nu),
            UpperBound::Finite(u) if u.is_finite() => Ok(u),
            UpperBound::Finite(u) => Err(Error::domain(if self.sigma > 0.0 {
                format!(
                    "upper bound {u} is not finite: the call integral diverges for sigma > 0; \
                     truncate at a confidence level (e.g. 0.999999) instead"
                )
            } else {
                format!("upper bound {u} is not finite; truncate at a confidence level instead")
            })),
        }
    }

    fn quad_config(&self) -> QuadConfig {
        QuadConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            ..QuadConfig::default()
        }
    }

    fn prefactor(&self) -> Result<f64> {
        if self.normalized {
            t_pdf(0.0, self.nu)
        } else {
            Ok(1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedIntegral {
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
    pub error_estimate: f64,
}

/// Adaptive quadrature of the call kernel over `[lower, upper]`.
pub fn truncated_call_integral(spec: &QuadratureSpec) -> Result<TruncatedIntegral> {
    spec.validate()?;
    let upper = spec.resolve_upper()?;
    if upper < spec.lower {
        return Err(Error::domain(format!(
            "upper bound {upper} lies below lower bound {}",
            spec.lower
        )));
    }
    let (sigma, nu) = (spec.sigma, spec.nu);
    let r = integrate(
        |xi| call_integrand(xi, sigma, nu),
        spec.lower,
        upper,
        spec.quad_config(),
    )?;
    let c = spec.prefactor()?;
    Ok(TruncatedIntegral {
        lower: spec.lower,
        upper,
        value: c * r.value,
        error_estimate: c * r.error_estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub upper: f64,
    pub integral: f64,
}

/// Truncated integrals from `lower` to each point of an increasing grid.
///
/// The grid pieces are integrated separately and accumulated, so each entry costs only
/// its own segment.
pub fn divergence_scan(
    sigma: f64,
    nu: f64,
    lower: f64,
    grid: &[f64],
    cfg: QuadConfig,
) -> Result<Vec<ScanPoint>> {
    if grid.is_empty() {
        return Err(Error::domain("scan grid is empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < lower {
        return Err(Error::domain(
            "scan grid must be strictly increasing and start at or above the lower bound",
        ));
    }
    let mut total = 0.0;
    let mut from = lower;
    let mut out = Vec::with_capacity(grid.len());
    for &upper in grid {
        total += integrate(|xi| call_integrand(xi, sigma, nu), from, upper, cfg)?.value;
        out.push(ScanPoint {
            upper,
            integral: total,
        });
        from = upper;
    }
    Ok(out)
}

/// Differences between consecutive scan values; the first entry is the integral from
/// the lower bound to the first grid point.
pub fn scan_increments(scan: &[ScanPoint]) -> Vec<f64> {
    let mut prev = 0.0;
    scan.iter()
        .map(|p| {
            let d = p.integral - prev;
            prev = p.integral;
            d
        })
        .collect()
}

/// One-tail critical values `t_quantile(p, ν)` for each probability.
pub fn critical_value_tics(nu: f64, probs: &[f64]) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::domain("probability list is empty"));
    }
    probs.iter().map(|&p| t_quantile(p, nu)).collect()
}
