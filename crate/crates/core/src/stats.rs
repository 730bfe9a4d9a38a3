//! Descriptive statistics over simulated prices and returns.
//!
//! Conventions: standard deviation uses the `n − 1` divisor; kurtosis is the sample
//! excess kurtosis `g₂ = m₄/m₂² − 3` built from population central moments.

use crate::models::PriceSample;
use crate::{Error, Result};

pub const STD_CONVENTION: &str = "sample_n_minus_1";
pub const KURTOSIS_CONVENTION: &str = "excess_g2_population_moments";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// `None` when fewer than two values are available.
    pub std: Option<f64>,
    /// `None` when fewer than two values are available or the values are constant.
    pub kurtosis: Option<f64>,
}

pub fn describe(values: &[f64]) -> Result<Moments> {
    if values.is_empty() {
        return Err(Error::domain("cannot summarise an empty sample"));
    }
    let n = values.len();
    let nf = n as f64;
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if n < 2 {
        return Ok(Moments {
            n,
            max,
            min,
            mean: values[0],
            std: None,
            kurtosis: None,
        });
    }
    if min == max {
        return Ok(Moments {
            n,
            max,
            min,
            mean: min,
            std: Some(0.0),
            kurtosis: None,
        });
    }
    let mean = values.iter().sum::<f64>() / nf;
    let (m2, m4) = values.iter().fold((0.0, 0.0), |(m2, m4), &v| {
        let d2 = (v - mean) * (v - mean);
        (m2 + d2, m4 + d2 * d2)
    });
    let std = (m2 / (nf - 1.0)).sqrt();
    let (m2, m4) = (m2 / nf, m4 / nf);
    let kurtosis = (m2 > 0.0).then(|| m4 / (m2 * m2) - 3.0);
    Ok(Moments {
        n,
        max,
        min,
        mean,
        std: Some(std),
        kurtosis,
    })
}

/// Paired statistics of prices `S` and returns `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsSummary {
    pub price: Moments,
    pub ret: Moments,
}

pub fn descriptive_stats(samples: &[PriceSample]) -> Result<StatsSummary> {
    let prices: Vec<f64> = samples.iter().map(|s| s.s).collect();
    let returns: Vec<f64> = samples.iter().map(|s| s.r).collect();
    Ok(StatsSummary {
        price: describe(&prices)?,
        ret: describe(&returns)?,
    })
}
