//! Student's t density, distribution function, quantiles and seeded sampling.
//!
//! Sampling uses counter-based ChaCha20 substreams: a [`NoiseStream`] names a
//! `(seed, stream_index)` pair and always regenerates the same sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::roots::{bracket_upward, newton_bisect, Tolerance};
use crate::{Error, Result};

/// Student's t noise: `scale · T` with `T ~ t(nu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TDistSpec {
    nu: f64,
    scale: f64,
}

impl TDistSpec {
    pub fn new(nu: f64, scale: f64) -> Result<Self> {
        check_nu(nu)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!(
                "scale must be positive, got {scale}"
            )));
        }
        Ok(Self { nu, scale })
    }

    /// Daily noise scaled as `10 · σ_annual / sqrt(365)`, the convention of the
    /// one-day table experiments.
    pub fn daily(nu: f64, sigma_annual: f64) -> Result<Self> {
        Self::new(nu, daily_scale(sigma_annual))
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// `10 · σ_annual / sqrt(365)`.
pub fn daily_scale(sigma_annual: f64) -> f64 {
    10.0 * sigma_annual / 365f64.sqrt()
}

/// Identifies one independent, reproducible random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "degrees of freedom must be positive, got {nu}"
        )))
    }
}

fn ln_norm(nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * std::f64::consts::PI).ln()
}

/// Normalized Student's t density.
pub fn t_pdf(x: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    Ok((ln_norm(nu) - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp())
}

/// `P(T > |x|)`, evaluated directly so that far tails keep full relative precision.
fn upper_tail(x: f64, nu: f64) -> f64 {
    let x2 = x * x;
    if x2.is_infinite() {
        0.0
    } else if x2 < nu {
        0.5 - 0.5 * beta_reg(0.5, 0.5 * nu, x2 / (nu + x2))
    } else {
        0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x2))
    }
}

/// Student's t cumulative distribution function.
pub fn t_cdf(x: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    if x.is_nan() {
        return Err(Error::domain("t_cdf of NaN"));
    }
    if x == 0.0 {
        return Ok(0.5);
    }
    let tail = upper_tail(x, nu);
    Ok(if x > 0.0 { 1.0 - tail } else { tail })
}

/// Survival function `P(T > x)`.
pub fn t_sf(x: f64, nu: f64) -> Result<f64> {
    t_cdf(-x, nu)
}

/// Inverse of [`t_cdf`].
///
/// Solves in the tail form `P(T > y) = q` for `y ≥ 0`, with `q = min(p, 1 − p)`, by
/// Newton iteration safeguarded with bisection.
pub fn t_quantile(p: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let q = if p > 0.5 { 1.0 - p } else { p };
    let (lo, hi) = bracket_upward(|y| q - upper_tail(y, nu), 0.0, 1.0, 2048)?;
    let tol = Tolerance {
        f_abs: 1e-10 * q,
        ..Tolerance::default()
    };
    let ln_c = ln_norm(nu);
    let root = newton_bisect(
        |y| {
            let density = (ln_c - 0.5 * (nu + 1.0) * (y * y / nu).ln_1p()).exp();
            (q - upper_tail(y, nu), density)
        },
        lo,
        hi,
        None,
        tol,
    )?;
    Ok(if p > 0.5 { root.x } else { -root.x })
}

/// `n` independent draws of `spec.scale · T`, `T ~ t(ν)`, generated as
/// `Z / sqrt(χ²_ν / ν)`.
pub fn sample_t(spec: TDistSpec, stream: NoiseStream, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let chi2 = ChiSquared::new(spec.nu).map_err(|e| Error::domain(e.to_string()))?;
    let mut rng = stream.rng();
    Ok((0..n)
        .map(|_| spec.scale * draw_t(&mut rng, &chi2, spec.nu))
        .collect())
}

fn draw_t<R: Rng>(rng: &mut R, chi2: &ChiSquared<f64>, nu: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let c = chi2.sample(rng);
    z / (c / nu).sqrt()
}

/// `n` independent draws of `scale · Z`, `Z` standard normal.
pub fn sample_normal(scale: f64, stream: NoiseStream, n: usize) -> Result<Vec<f64>> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!(
            "normal scale must be non-negative, got {scale}"
        )));
    }
    let mut rng = stream.rng();
    Ok((0..n)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadConfig};
    use proptest::prelude::*;

    #[test]
    fn cauchy_density_at_origin() {
        assert!((t_pdf(0.0, 1.0).unwrap() - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
    }

    #[test]
    fn density_integrates_to_one() {
        let r = integrate(
            |x| t_pdf(x, 3.0).unwrap(),
            -50.0,
            50.0,
            QuadConfig::default(),
        )
        .unwrap();
        // Mass beyond ±50 for ν = 3 is about 2.7e-5.
        let outside = 2.0 * t_sf(50.0, 3.0).unwrap();
        assert!((r.value + outside - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cdf_anchors() {
        assert_eq!(t_cdf(0.0, 3.0).unwrap(), 0.5);
        assert!((t_cdf(1e6, 3.0).unwrap() - 1.0).abs() < 1e-9);
        // Cauchy closed form.
        let x: f64 = 2.5;
        let cauchy = 0.5 + x.atan() / std::f64::consts::PI;
        assert!((t_cdf(x, 1.0).unwrap() - cauchy).abs() < 1e-14);
    }

    #[test]
    fn cdf_matches_integrated_density() {
        // Oracle: 1/2 + ∫₀ˣ pdf, independent of the incomplete beta route.
        let x = 4.541;
        let mass = integrate(|u| t_pdf(u, 3.0).unwrap(), 0.0, x, QuadConfig::default()).unwrap();
        let oracle = 0.5 + mass.value;
        assert!((t_cdf(x, 3.0).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.99).abs() < 1e-4);
    }

    #[test]
    fn quantile_anchors() {
        assert_eq!(t_quantile(0.5, 3.0).unwrap(), 0.0);
        // ν = 2 has the closed form x = (2p − 1)·sqrt(2 / (1 − (2p − 1)²)).
        let p: f64 = 0.975;
        let a = 2.0 * p - 1.0;
        let exact = a * (2.0 / (1.0 - a * a)).sqrt();
        assert!((t_quantile(p, 2.0).unwrap() - exact).abs() < 1e-10);
        let q6 = t_quantile(0.999_999, 3.0).unwrap();
        assert!((q6 - 103.3).abs() < 0.05, "{q6}");
    }

    #[test]
    fn quantile_matches_bisection_oracle() {
        // Plain bisection on the cdf.
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if t_cdf(mid, 3.0).unwrap() < 0.99 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = t_quantile(0.99, 3.0).unwrap();
        assert!((q - lo).abs() < 1e-9);
        assert!((q - 4.541).abs() < 1e-3);
    }

    #[test]
    fn round_trip_on_grid() {
        for &nu in &[1.0, 2.0, 3.0, 7.5, 30.0] {
            for &p in &[0.01, 0.1, 0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999] {
                let x = t_quantile(p, nu).unwrap();
                let back = t_cdf(x, nu).unwrap();
                assert!((back - p).abs() < 1e-9, "nu={nu} p={p} back={back}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(t_pdf(0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(t_cdf(1.0, -2.0), Err(Error::Domain(_))));
        assert!(matches!(t_quantile(1.0, 3.0), Err(Error::Domain(_))));
        assert!(matches!(t_quantile(0.0, 3.0), Err(Error::Domain(_))));
        assert!(TDistSpec::new(2.0, 0.0).is_err());
        assert!(sample_t(TDistSpec::new(2.0, 1.0).unwrap(), NoiseStream::new(1, 0), 0).is_err());
    }

    #[test]
    fn daily_scale_convention() {
        // 3 / sqrt(365) = 0.1570272…, printed as σ = 0.157 in the table headers.
        assert!((daily_scale(0.3) - 0.157_027_2).abs() < 1e-7);
        assert!((daily_scale(0.3) - 0.157).abs() < 5e-5);
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let spec = TDistSpec::new(2.0, 0.157).unwrap();
        let a = sample_t(spec, NoiseStream::new(42, 3), 1000).unwrap();
        let b = sample_t(spec, NoiseStream::new(42, 3), 1000).unwrap();
        let c = sample_t(spec, NoiseStream::new(42, 4), 1000).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_mean_near_zero() {
        let n = 100_000;
        let xs = sample_t(
            TDistSpec::new(3.0, 1.0).unwrap(),
            NoiseStream::new(11, 0),
            n,
        )
        .unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // Var t(3) = 3.
        let se = (3.0 / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn sample_quantile_fraction() {
        let n = 100_000;
        let scale = 0.4;
        let xs = sample_t(
            TDistSpec::new(3.0, scale).unwrap(),
            NoiseStream::new(5, 9),
            n,
        )
        .unwrap();
        let cut = t_quantile(0.99, 3.0).unwrap() * scale;
        let frac = xs.iter().filter(|&&x| x <= cut).count() as f64 / n as f64;
        assert!(
            (frac - 0.99).abs() < 3.0 * (0.99f64 * 0.01 / n as f64).sqrt(),
            "{frac}"
        );
    }

    #[test]
    fn kolmogorov_smirnov_against_cdf() {
        let n = 10_000;
        let scale = 0.157;
        let mut xs = sample_t(
            TDistSpec::new(2.0, scale).unwrap(),
            NoiseStream::new(2024, 0),
            n,
        )
        .unwrap();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = t_cdf(x / scale, 2.0).unwrap();
                (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
            })
            .fold(0.0, f64::max);
        // Asymptotic critical value at the 0.001 level.
        let crit = 1.949 / (n as f64).sqrt();
        assert!(d < crit, "D = {d}, critical {crit}");
    }

    #[test]
    fn normal_sampler_scale() {
        let xs = sample_normal(2.0, NoiseStream::new(1, 1), 200_000).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 4.0).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn symmetry(x in -1e3f64..1e3, nu in 0.2f64..50.0) {
            prop_assert_eq!(t_pdf(x, nu).unwrap(), t_pdf(-x, nu).unwrap());
            let sum = t_cdf(x, nu).unwrap() + t_cdf(-x, nu).unwrap();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        #[test]
        fn cdf_monotone(x in -100f64..100.0, dx in 0f64..10.0, nu in 0.5f64..20.0) {
            prop_assert!(t_cdf(x + dx, nu).unwrap() >= t_cdf(x, nu).unwrap());
        }

        #[test]
        fn quantile_odd(p in 0.001f64..0.999, nu in 0.5f64..20.0) {
            let a = t_quantile(p, nu).unwrap();
            let b = t_quantile(1.0 - p, nu).unwrap();
            prop_assert!((a + b).abs() < 1e-8 * a.abs().max(1.0));
        }
    }
}
