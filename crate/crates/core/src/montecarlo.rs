//! Seeded one-horizon Monte Carlo experiments.
//!
//! Noise is drawn in partitions of [`PARTITION`] values; partition `k` uses substream
//! `k` of the seed, so results do not depend on how many workers evaluate them.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::distributions::{sample_normal, sample_t, NoiseStream, TDistSpec};
use crate::models::{
    logistic_price_approx, saturated_price, saturated_price_approx, standard_price,
    AccumulatedNoise, ModelParams, PriceSample,
};
use crate::stats::{descriptive_stats, StatsSummary};
use crate::{Error, Result};

pub const PARTITION: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Standard,
    LogisticApprox,
    SaturatedExact,
    SaturatedApprox,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Standard => "standard",
            Model::LogisticApprox => "logistic",
            Model::SaturatedExact => "saturated",
            Model::SaturatedApprox => "saturated-approx",
        }
    }

    pub fn price(self, p: &ModelParams, noise: &AccumulatedNoise) -> Result<PriceSample> {
        match self {
            Model::Standard => Ok(standard_price(p, noise)),
            Model::LogisticApprox => Ok(logistic_price_approx(p, noise).sample),
            Model::SaturatedExact => saturated_price(p, noise),
            Model::SaturatedApprox => saturated_price_approx(p, noise),
        }
    }

    fn check(self, p: &ModelParams) -> Result<()> {
        if self == Model::SaturatedApprox && p.beta * p.s0 >= 1.0 {
            return Err(Error::domain(format!(
                "saturated-approx requires beta*s0 < 1, got {}",
                p.beta * p.s0
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Model::Standard),
            "logistic" | "logistic-approx" => Ok(Model::LogisticApprox),
            "saturated" | "saturated-exact" => Ok(Model::SaturatedExact),
            "saturated-approx" => Ok(Model::SaturatedApprox),
            other => Err(Error::domain(format!("unknown model '{other}'"))),
        }
    }
}

/// Law of the accumulated noise over one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLaw {
    StudentT(TDistSpec),
    Normal {
        scale: f64,
    },
    /// No noise: `W = 0`.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub params: ModelParams,
    pub noise: NoiseLaw,
    pub n_samples: usize,
    pub horizon_days: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::domain("n_samples must be at least 1"));
        }
        if !(self.horizon_days > 0.0 && self.horizon_days.is_finite()) {
            return Err(Error::domain(format!(
                "horizon must be positive, got {}",
                self.horizon_days
            )));
        }
        self.params.validate()?;
        self.model.check(&self.params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// Accumulated noise `W` per sample.
    pub noise: Vec<f64>,
    pub samples: Vec<PriceSample>,
    pub summary: StatsSummary,
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(job))
            .map_err(|e| Error::numerical(format!("thread pool: {e}"))),
    }
}

/// Draws `n` values of `W` over `horizon` days, scaled by `sqrt(horizon)`.
pub fn draw_noise(
    law: NoiseLaw,
    n: usize,
    horizon: f64,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<f64>> {
    let root_t = horizon.sqrt();
    let partitions = n.div_ceil(PARTITION);
    let chunks: Result<Vec<Vec<f64>>> = with_workers(workers, || {
        (0..partitions)
            .into_par_iter()
            .map(|k| {
                let len = PARTITION.min(n - k * PARTITION);
                let stream = NoiseStream::new(seed, k as u64);
                match law {
                    NoiseLaw::StudentT(spec) => sample_t(spec, stream, len),
                    NoiseLaw::Normal { scale } => sample_normal(scale, stream, len),
                    NoiseLaw::Zero => Ok(vec![0.0; len]),
                }
            })
            .collect()
    })?;
    Ok(chunks?.into_iter().flatten().map(|w| w * root_t).collect())
}

fn map_noise(
    model: Model,
    params: &ModelParams,
    noise: &[f64],
    horizon: f64,
    workers: Option<usize>,
) -> Result<Vec<PriceSample>> {
    with_workers(workers, || {
        noise
            .par_iter()
            .map(|&w| model.price(params, &AccumulatedNoise::new(params.alpha, horizon, w)?))
            .collect()
    })?
}

/// Draws `n_samples` values of `W`, forms `x = α·t + W` and maps each through the model.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let noise = draw_noise(
        cfg.noise,
        cfg.n_samples,
        cfg.horizon_days,
        cfg.seed,
        workers,
    )?;
    let samples = map_noise(cfg.model, &cfg.params, &noise, cfg.horizon_days, workers)?;
    let summary = descriptive_stats(&samples)?;
    Ok(ExperimentOutput {
        noise,
        samples,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub beta: f64,
    pub samples: Vec<PriceSample>,
    pub summary: StatsSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparativeTable {
    pub model: Model,
    /// Shared noise; sample `i` of every column was produced from `noise[i]`.
    pub noise: Vec<f64>,
    pub columns: Vec<Column>,
}

/// One column per β, all columns driven by the same noise draws.
pub fn comparative_table(
    base: &ExperimentConfig,
    betas: &[f64],
    workers: Option<usize>,
) -> Result<ComparativeTable> {
    if betas.is_empty() {
        return Err(Error::domain("at least one beta is required"));
    }
    let configs: Vec<ExperimentConfig> = betas
        .iter()
        .map(|&b| {
            let cfg = ExperimentConfig {
                params: base.params.with_beta(b)?,
                ..*base
            };
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<_>>()?;
    let noise = draw_noise(
        base.noise,
        base.n_samples,
        base.horizon_days,
        base.seed,
        workers,
    )?;
    let columns = configs
        .iter()
        .map(|cfg| {
            let samples = map_noise(cfg.model, &cfg.params, &noise, cfg.horizon_days, workers)?;
            let summary = descriptive_stats(&samples)?;
            Ok(Column {
                beta: cfg.params.beta,
                samples,
                summary,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ComparativeTable {
        model: base.model,
        noise,
        columns,
    })
}

/// The three published table layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Logistic approximation, `βS₀ ∈ {0, 0.05, 0.1, 0.2}`.
    Table1,
    /// Exact saturated model, `β ∈ {0, 0.25, 0.5, 1.0}`.
    Table2,
    /// Saturated approximation, `βS₀ ∈ {0, 0.4, 0.8, 0.9}`.
    Table3,
}

impl Preset {
    pub fn model(self) -> Model {
        match self {
            Preset::Table1 => Model::LogisticApprox,
            Preset::Table2 => Model::SaturatedExact,
            Preset::Table3 => Model::SaturatedApprox,
        }
    }

    pub fn betas(self, s0: f64) -> Vec<f64> {
        match self {
            Preset::Table1 => [0.0, 0.05, 0.1, 0.2].iter().map(|c| c / s0).collect(),
            Preset::Table2 => vec![0.0, 0.25, 0.5, 1.0],
            Preset::Table3 => [0.0, 0.4, 0.8, 0.9].iter().map(|c| c / s0).collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Preset::Table1),
            "table2" => Ok(Preset::Table2),
            "table3" => Ok(Preset::Table3),
            other => Err(Error::domain(format!("unknown preset '{other}'"))),
        }
    }
}

/// Defaults of the published tables: `S₀ = 50`, `α = 0.0041`, `t(2)` noise scaled to
/// `10·0.3/sqrt(365)`, 4096 samples over one day.
pub fn table_defaults(model: Model, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        model,
        params: ModelParams::new(50.0, 0.0041, 0.157, 0.0).expect("valid defaults"),
        noise: NoiseLaw::StudentT(TDistSpec::daily(2.0, 0.3).expect("valid defaults")),
        n_samples: 4096,
        horizon_days: 1.0,
        seed,
    }
}
