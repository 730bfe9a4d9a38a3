//! Price maps for the standard, logistic and homogeneously saturated models.
//!
//! Every map takes the accumulated drift plus noise `x = α·t + W(t)` and returns a
//! [`PriceSample`]. Time is measured in days.

use crate::roots::{newton_bisect, Tolerance};
use crate::{Error, Result};

/// Scalar parameters of one model instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Initial price `S₀`.
    pub s0: f64,
    /// Drift rate per day.
    pub alpha: f64,
    /// Noise scale per sqrt(day).
    pub sigma: f64,
    /// Saturation parameter, in inverse price units.
    pub beta: f64,
    /// Reservoir relaxation time in days.
    pub tau: f64,
    /// Rate at which money is pumped into the reservoir.
    pub pump: f64,
    /// Reservoir baseline.
    pub m0: f64,
}

impl ModelParams {
    pub fn new(s0: f64, alpha: f64, sigma: f64, beta: f64) -> Result<Self> {
        let p = Self {
            s0,
            alpha,
            sigma,
            beta,
            tau: 1.0,
            pump: 0.0,
            m0: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_reservoir(mut self, tau: f64, pump: f64, m0: f64) -> Result<Self> {
        self.tau = tau;
        self.pump = pump;
        self.m0 = m0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.s0, self.alpha, self.sigma, self.beta, self.tau, self.pump, self.m0,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("model parameters must be finite"));
        }
        if self.s0 <= 0.0 {
            return Err(Error::domain(format!(
                "s0 must be positive, got {}",
                self.s0
            )));
        }
        if self.sigma < 0.0 {
            return Err(Error::domain(format!(
                "sigma must be non-negative, got {}",
                self.sigma
            )));
        }
        if self.beta < 0.0 {
            return Err(Error::domain(format!(
                "beta must be non-negative, got {}",
                self.beta
            )));
        }
        if self.tau <= 0.0 {
            return Err(Error::domain(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

/// Drift plus noise accumulated over a horizon: `x = α·t + w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccumulatedNoise {
    pub x: f64,
    pub t: f64,
    pub w: f64,
}

impl AccumulatedNoise {
    pub fn new(alpha: f64, t: f64, w: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("horizon must be positive, got {t}")));
        }
        Ok(Self {
            x: alpha * t + w,
            t,
            w,
        })
    }

    /// Builds the noise record from a total `x`, attributing `x − α·t` to noise.
    pub fn from_total(alpha: f64, x: f64, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("horizon must be positive, got {t}")));
        }
        Ok(Self {
            x,
            t,
            w: x - alpha * t,
        })
    }
}

/// One simulated outcome: accumulated drift+noise, price, and log return `ln(S/S₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceSample {
    pub x: f64,
    pub s: f64,
    pub r: f64,
}

impl PriceSample {
    fn from_return(x: f64, s0: f64, r: f64) -> Self {
        Self {
            x,
            s: s0 * r.exp(),
            r,
        }
    }
}

/// `expm1(z)/z`, continuous through `z = 0`.
fn phi(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z * (0.5 + z / 6.0)
    } else {
        z.exp_m1() / z
    }
}

/// `ln[e^z / (1 + c·φ(z))]`. For `z > 0` it is evaluated as `−ln(e^{−z} + c·φ(−z))`,
/// which stays finite for any finite `z` and `c ≥ 0`.
fn log_saturating_ratio(z: f64, c: f64) -> f64 {
    if z > 0.0 {
        -((-z).exp() + c * phi(-z)).ln()
    } else {
        z - (c * phi(z)).ln_1p()
    }
}

// ---------------------------------------------------------------------------
// Standard model
// ---------------------------------------------------------------------------

/// `S = S₀·eˣ`.
pub fn standard_price(p: &ModelParams, noise: &AccumulatedNoise) -> PriceSample {
    PriceSample::from_return(noise.x, p.s0, noise.x)
}

/// Mean price `S₀·e^{(α + σ²/2)t}`.
pub fn standard_mean(p: &ModelParams, t: f64) -> f64 {
    p.s0 * ((p.alpha + 0.5 * p.sigma * p.sigma) * t).exp()
}

/// Log-normal variance `S₀²·e^{(2α + σ²)t}·(e^{σ²t} − 1)`.
pub fn standard_variance(p: &ModelParams, t: f64) -> f64 {
    let s2 = p.sigma * p.sigma;
    p.s0 * p.s0 * ((2.0 * p.alpha + s2) * t).exp() * (s2 * t).exp_m1()
}

// ---------------------------------------------------------------------------
// Logistic model
// ---------------------------------------------------------------------------

/// Evaluates the exact logistic solution on a sampled noise path.
///
/// `increments[i]` is the noise accumulated over step `i`; both integrals are taken as
/// left-endpoint sums with the given step. The evaluation is done in log space so that
/// large excursions do not overflow.
pub fn logistic_price_path(p: &ModelParams, increments: &[f64], step: f64) -> Result<PriceSample> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::domain(format!(
            "path step must be positive, got {step}"
        )));
    }
    if increments.is_empty() {
        return Err(Error::domain("noise path is empty"));
    }
    let drift = p.alpha * step;
    // Running exponent at each left endpoint, starting from 0.
    let mut y = 0.0;
    let mut exponents = Vec::with_capacity(increments.len());
    for dw in increments {
        exponents.push(y);
        y += drift + dw;
    }
    let x = y;
    if p.beta == 0.0 {
        return Ok(PriceSample::from_return(x, p.s0, x));
    }
    let shift = exponents.iter().copied().fold(0.0, f64::max);
    let sum: f64 = exponents.iter().map(|e| (e - shift).exp()).sum();
    let log_denominator = shift + ((-shift).exp() + p.beta * p.s0 * step * sum).ln();
    Ok(PriceSample::from_return(x, p.s0, x - log_denominator))
}

/// Result of the small-step logistic approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticApprox {
    pub sample: PriceSample,
    /// Set when `|x| < 1e-5`, where `α + W/t` vanishes and the series limit is used.
    pub at_singularity: bool,
}

/// Small-step approximation of the logistic solution,
/// `S ≈ S₀(α + W/t)eˣ / (α + W/t + βS₀(eˣ − 1))`.
///
/// Rewritten as `S₀eˣ / (1 + βS₀t·φ(x))` with `φ(x) = (eˣ − 1)/x`, which removes the
/// singularity at `α + W/t = 0`.
pub fn logistic_price_approx(p: &ModelParams, noise: &AccumulatedNoise) -> LogisticApprox {
    let x = noise.x;
    let r = log_saturating_ratio(x, p.beta * p.s0 * noise.t);
    LogisticApprox {
        sample: PriceSample::from_return(x, p.s0, r),
        at_singularity: x.abs() < 1e-5,
    }
}

/// Logistic mean `S₀g·e^{gt} / (βS₀(e^{gt} − 1) + g)` with `g = α + σ²/2`.
/// At `g = 0` this is the limit `S₀ / (1 + βS₀t)`.
pub fn logistic_mean(p: &ModelParams, t: f64) -> f64 {
    let g = p.alpha + 0.5 * p.sigma * p.sigma;
    p.s0 * log_saturating_ratio(g * t, p.beta * p.s0 * t).exp()
}

/// Logistic second moment `S₀²k² / (e^{−kt}(βS₀ − k) − βS₀)²` with `k = α + σ²`.
///
/// The denominator equals `(k·e^{−kt} + βS₀(1 − e^{−kt}))²`, so this is the square of the
/// logistic mean with rate `k`; `k = 0` gives `(S₀ / (1 + βS₀t))²`.
pub fn logistic_second_moment(p: &ModelParams, t: f64) -> f64 {
    let k = p.alpha + p.sigma * p.sigma;
    (p.s0 * log_saturating_ratio(k * t, p.beta * p.s0 * t).exp()).powi(2)
}

/// Variance from the second moment minus the squared mean.
pub fn logistic_variance(p: &ModelParams, t: f64) -> f64 {
    logistic_second_moment(p, t) - logistic_mean(p, t).powi(2)
}

/// Long-time variance limit in the printed form `(α + σ² + 3(σ²/2)²) / β²`.
///
/// This does not agree with the `t → ∞` limit of [`logistic_variance`],
/// `((α + σ²)² − (α + σ²/2)²) / β²`; both are kept so they can be compared.
pub fn logistic_variance_limit_as_printed(p: &ModelParams) -> Result<f64> {
    if p.beta <= 0.0 {
        return Err(Error::domain("variance limit requires beta > 0"));
    }
    let s2 = p.sigma * p.sigma;
    Ok((p.alpha + s2 + 3.0 * (0.5 * s2).powi(2)) / (p.beta * p.beta))
}

/// `t → ∞` limit of [`logistic_variance`].
pub fn logistic_variance_limit(p: &ModelParams) -> Result<f64> {
    if p.beta <= 0.0 {
        return Err(Error::domain("variance limit requires beta > 0"));
    }
    let k = p.alpha + p.sigma * p.sigma;
    let g = p.alpha + 0.5 * p.sigma * p.sigma;
    Ok((k * k - g * g) / (p.beta * p.beta))
}

/// Both sides of `(t/N) Σ_{i<N} e^{y·i/N} = (t/N)(1 − eʸ)/(1 − e^{y/N})`:
/// returns `(direct sum, closed form)`.
pub fn geometric_series_identity(y: f64, t: f64, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::domain("term count must be at least 1"));
    }
    let nf = n as f64;
    // Neumaier-compensated summation.
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for i in 0..n {
        let term = (y * i as f64 / nf).exp();
        let next = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - next) + term
        } else {
            (term - next) + sum
        };
        sum = next;
    }
    let direct = t / nf * (sum + comp);
    let closed = if y == 0.0 {
        t
    } else {
        t / nf * (y.exp_m1() / (y / nf).exp_m1())
    };
    Ok((direct, closed))
}

// ---------------------------------------------------------------------------
// Homogeneously saturated model
// ---------------------------------------------------------------------------

/// Solves `S·e^{β(S − S₀)} = S₀·eˣ` for `S > 0`.
///
/// In terms of the return `r = ln(S/S₀)` the equation is
/// `h(r) = r + βS₀(eʳ − 1) − x = 0`, with `h` increasing and convex. The root lies
/// between `0` and `x`, and more tightly in `[0, ln(1 + x/βS₀)]` for `x > 0` and in
/// `[x, x + βS₀]` for `x < 0`, so the solver starts from a finite bracket for any finite
/// `x`.
pub fn saturated_price(p: &ModelParams, noise: &AccumulatedNoise) -> Result<PriceSample> {
    let x = noise.x;
    let c = p.beta * p.s0;
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "accumulated noise must be finite, got {x}"
        )));
    }
    if c == 0.0 || x == 0.0 {
        return Ok(PriceSample::from_return(x, p.s0, x));
    }
    let (lo, hi) = if x > 0.0 {
        (0.0, x.min((x / c).ln_1p()))
    } else {
        (x, (x + c).min(0.0))
    };
    let h = |r: f64| {
        let e = r.exp();
        (r + c * (e - 1.0) - x, 1.0 + c * e)
    };
    let tol = Tolerance {
        f_abs: 1e-13 * x.abs().max(1.0),
        ..Tolerance::default()
    };
    let root = newton_bisect(h, lo, hi, None, tol)?;
    Ok(PriceSample::from_return(x, p.s0, root.x))
}

/// Residual of the defining relation in log form,
/// `ln S + βS − ln S₀ − βS₀ − x`.
pub fn saturated_residual(p: &ModelParams, x: f64, s: f64) -> f64 {
    (s.ln() - p.s0.ln()) + p.beta * (s - p.s0) - x
}

/// First-order approximation `S₀eˣ / (1 + βS₀eˣ − βS₀)`. Requires `0 ≤ βS₀ < 1`;
/// beyond that the formula produces non-positive prices.
pub fn saturated_price_approx(p: &ModelParams, noise: &AccumulatedNoise) -> Result<PriceSample> {
    let c = p.beta * p.s0;
    if !(0.0..1.0).contains(&c) {
        return Err(Error::domain(format!(
            "saturated approximation requires 0 <= beta*s0 < 1, got {c}"
        )));
    }
    let x = noise.x;
    let r = if x > 0.0 {
        -((-x).exp() - c * (-x).exp_m1()).ln()
    } else {
        x - (c * x.exp_m1()).ln_1p()
    };
    Ok(PriceSample::from_return(x, p.s0, r))
}

// ---------------------------------------------------------------------------
// Money supply
// ---------------------------------------------------------------------------

/// Steady-state money supply with noise in the reservoir, `(α + noise) / (1 + βS)`.
pub fn money_supply_steady_state(p: &ModelParams, s: f64, noise_term: f64) -> f64 {
    (p.alpha + noise_term) / (1.0 + p.beta * s)
}

/// Steady state in its recast form `α / (1 + (β/α)S)`, whose product with `S` expands
/// as `αS − βS² + (β²/α)S³ − …`.
pub fn money_supply_recast(p: &ModelParams, s: f64) -> Result<f64> {
    if p.alpha == 0.0 {
        return Err(Error::domain("recast money supply requires alpha != 0"));
    }
    Ok(p.alpha / (1.0 + p.beta / p.alpha * s))
}

/// Steady state of the reservoir rate equation, `(N + M₀/τ) / (1/τ + βS)`.
pub fn money_supply_rate_form(p: &ModelParams, s: f64) -> f64 {
    (p.pump + p.m0 / p.tau) / (1.0 / p.tau + p.beta * s)
}

#[derive(Debug, Clone, Copy)]
pub struct RateIntegration {
    pub horizon: f64,
    pub step: f64,
    /// Initial money supply; defaults to the rate-form steady state at `S₀`.
    pub m_init: Option<f64>,
    /// Freeze the price at `S₀` and integrate the reservoir alone.
    pub hold_price: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub t: f64,
    pub m: f64,
    pub s: f64,
}

/// Explicit Euler integration of the coupled reservoir and price equations
///
/// ```text
/// dM/dt = N − βSM − (M − M₀)/τ
/// dS/dt = MS + σSf
/// ```
///
/// `noise`, when given, holds the per-step increments of `∫σf dt` and must have one
/// entry per step. Returns the state at every step including `t = 0`.
pub fn coupled_rate_integration(
    p: &ModelParams,
    noise: Option<&[f64]>,
    cfg: RateIntegration,
) -> Result<Vec<RatePoint>> {
    let RateIntegration {
        horizon,
        step,
        m_init,
        hold_price,
    } = cfg;
    if !(step > 0.0 && step.is_finite() && horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!(
            "step ({step}) and horizon ({horizon}) must be positive"
        )));
    }
    let steps = (horizon / step).round() as usize;
    if steps == 0 {
        return Err(Error::domain("horizon is shorter than one step"));
    }
    if let Some(path) = noise {
        if path.len() != steps {
            return Err(Error::domain(format!(
                "noise path has {} increments, expected {steps}",
                path.len()
            )));
        }
    }

    let mut m = m_init.unwrap_or_else(|| money_supply_rate_form(p, p.s0));
    let mut s = p.s0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(RatePoint { t: 0.0, m, s });
    for k in 0..steps {
        let dm = p.pump - p.beta * s * m - (m - p.m0) / p.tau;
        let dw = noise.map_or(0.0, |path| path[k]);
        if !hold_price {
            s += m * s * step + s * dw;
        }
        m += dm * step;
        if s.is_nan() || s <= 0.0 || !m.is_finite() {
            return Err(Error::numerical(format!(
                "explicit integration became unstable at t = {} (S = {s}); reduce the step",
                (k + 1) as f64 * step
            )));
        }
        out.push(RatePoint {
            t: (k + 1) as f64 * step,
            m,
            s,
        });
    }
    Ok(out)
}
