//! Command-line front end for `satdyn-core`: Monte Carlo runs, comparison tables,
//! figure data and truncated pricing integrals, each with a replayable manifest.

pub mod commands;
pub mod error;
pub mod output;
pub mod settings;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use satdyn_core::montecarlo::PARTITION;
use satdyn_core::stats::{KURTOSIS_CONVENTION, STD_CONVENTION};

pub use commands::Report;
pub use error::CliError;
use output::CSV_SCHEMA_VERSION;
pub use settings::Settings;

pub const MANIFEST_NAME: &str = "manifest.txt";
const MANIFEST_HEADER: &str = "# satdyn run manifest";

/// Keys written to the manifest for provenance only; replay ignores them.
const METADATA_KEYS: [&str; 7] = [
    "satdyn_version",
    "csv_schema_version",
    "std_convention",
    "kurtosis_convention",
    "noise_partition",
    "outputs",
    "timestamp_unix",
];

#[derive(Debug, Parser)]
#[command(
    name = "satdyn",
    version,
    about = "Saturation dynamics of asset prices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// key=value configuration file; command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV files and the manifest
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ModelFlags {
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Daily noise scale; 0 disables noise
    #[arg(long)]
    pub sigma_scale: Option<f64>,
    /// Degrees of freedom of the t noise
    #[arg(long)]
    pub nu: Option<f64>,
    /// Noise law: t | normal
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Horizon in days
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw noise and map it through one price model
    Simulate {
        /// standard | logistic | saturated | saturated-approx
        #[arg(long)]
        model: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[command(flatten)]
        flags: ModelFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Descriptive statistics for several saturation levels on shared noise
    Table {
        /// table1 | table2 | table3
        #[arg(long)]
        preset: Option<String>,
        /// Comma-separated saturation coefficients
        #[arg(long)]
        betas: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        flags: ModelFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Curve data for figures 1 to 6
    Figure {
        #[arg(long)]
        figure: Option<u32>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        x_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x_max: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        betas: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        s0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Truncated call-pricing integral under t-distributed returns
    Price {
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lower: Option<f64>,
        /// Finite truncation point (`inf` is refused)
        #[arg(long)]
        upper: Option<String>,
        /// Truncate at the t quantile of this probability
        #[arg(long)]
        confidence: Option<f64>,
        /// Comma-separated upper limits for a divergence scan
        #[arg(long)]
        scan: Option<String>,
        /// Divide by the t normalising constant
        #[arg(long)]
        normalized: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run a previous invocation from its manifest
    Replay {
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn put<T: ToString>(s: &mut Settings, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        s.set(key, v.to_string());
    }
}

fn put_float(s: &mut Settings, key: &str, v: Option<f64>) {
    if let Some(v) = v {
        s.set(key, format!("{v:?}"));
    }
}

fn apply_model_flags(s: &mut Settings, f: &ModelFlags) {
    put_float(s, "s0", f.s0);
    put_float(s, "alpha", f.alpha);
    put_float(s, "sigma_scale", f.sigma_scale);
    put_float(s, "nu", f.nu);
    put(s, "noise", &f.noise);
    put(s, "n", &f.n);
    put(s, "seed", &f.seed);
    put_float(s, "horizon", f.horizon);
}

fn base_settings(common: &Common) -> Result<Settings, CliError> {
    match &common.config {
        Some(path) => Settings::from_file(path),
        None => Ok(Settings::default()),
    }
}

/// Resolves the invocation into a command name, its settings and the common flags.
fn resolve(cmd: &Command) -> Result<(String, Settings, &Common), CliError> {
    let (name, mut s, common) = match cmd {
        Command::Simulate {
            model,
            beta,
            flags,
            common,
        } => {
            let mut s = base_settings(common)?;
            put(&mut s, "model", model);
            put_float(&mut s, "beta", *beta);
            apply_model_flags(&mut s, flags);
            ("simulate", s, common)
        }
        Command::Table {
            preset,
            betas,
            model,
            flags,
            common,
        } => {
            let mut s = base_settings(common)?;
            put(&mut s, "preset", preset);
            put(&mut s, "betas", betas);
            put(&mut s, "model", model);
            apply_model_flags(&mut s, flags);
            ("table", s, common)
        }
        Command::Figure {
            figure,
            points,
            x_min,
            x_max,
            t_max,
            betas,
            s0,
            alpha,
            sigma,
            nu,
            common,
        } => {
            let mut s = base_settings(common)?;
            put(&mut s, "figure", figure);
            put(&mut s, "points", points);
            put_float(&mut s, "x_min", *x_min);
            put_float(&mut s, "x_max", *x_max);
            put_float(&mut s, "t_max", *t_max);
            put(&mut s, "betas", betas);
            put_float(&mut s, "s0", *s0);
            put_float(&mut s, "alpha", *alpha);
            put_float(&mut s, "sigma", *sigma);
            put_float(&mut s, "nu", *nu);
            ("figure", s, common)
        }
        Command::Price {
            sigma,
            nu,
            lower,
            upper,
            confidence,
            scan,
            normalized,
            common,
        } => {
            let mut s = base_settings(common)?;
            put_float(&mut s, "sigma", *sigma);
            put_float(&mut s, "nu", *nu);
            put_float(&mut s, "lower", *lower);
            put(&mut s, "upper", upper);
            put_float(&mut s, "confidence", *confidence);
            put(&mut s, "scan", scan);
            if *normalized {
                s.set("normalized", "true");
            }
            ("price", s, common)
        }
        Command::Replay { manifest, common } => {
            let mut s = Settings::from_file(manifest)?;
            let name = s.remove("command").ok_or_else(|| {
                CliError::usage(format!("{} has no command entry", manifest.display()))
            })?;
            for key in METADATA_KEYS {
                s.remove(key);
            }
            if !commands::COMMANDS.contains(&name.as_str()) {
                return Err(CliError::usage(format!(
                    "manifest names unknown command '{name}'"
                )));
            }
            return Ok((name, s, common));
        }
    };
    if s.contains("command") {
        s.remove("command");
    }
    Ok((name.to_string(), s, common))
}

/// Renders the manifest for a finished run.
pub fn manifest_text(command: &str, settings: &Settings, outputs: &[String]) -> String {
    let mut text = format!("{MANIFEST_HEADER}\ncommand={command}\n");
    for (k, v) in settings.used() {
        text.push_str(&format!("{k}={v}\n"));
    }
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = [
        ("satdyn_version", env!("CARGO_PKG_VERSION").to_string()),
        ("csv_schema_version", CSV_SCHEMA_VERSION.to_string()),
        ("std_convention", STD_CONVENTION.to_string()),
        ("kurtosis_convention", KURTOSIS_CONVENTION.to_string()),
        ("noise_partition", PARTITION.to_string()),
        ("outputs", outputs.join(",")),
        ("timestamp_unix", timestamp.to_string()),
    ];
    for (k, v) in meta {
        text.push_str(&format!("{k}={v}\n"));
    }
    text
}

fn write_outputs(
    dir: &Path,
    command: &str,
    settings: &Settings,
    report: &Report,
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(report.files.len());
    for (name, bytes) in &report.files {
        fs::write(dir.join(name), bytes)?;
        names.push(name.clone());
    }
    fs::write(
        dir.join(MANIFEST_NAME),
        manifest_text(command, settings, &names),
    )?;
    Ok(())
}

/// Runs a parsed invocation, writing files and printing the report to `stdout`.
pub fn run(cli: &Cli, stdout: &mut impl std::io::Write) -> Result<(), CliError> {
    let (name, settings, common) = resolve(&cli.command)?;
    let report = commands::execute(&name, &settings, common.workers)?;

    // Pricing only writes files when asked to; every other command defaults to the
    // current directory.
    let dir = match (&common.out, name.as_str()) {
        (Some(d), _) => Some(d.clone()),
        (None, "price") => None,
        (None, _) => Some(PathBuf::from(".")),
    };
    if let Some(dir) = dir {
        write_outputs(&dir, &name, &settings, &report)?;
    }
    stdout.write_all(report.stdout.as_bytes())?;
    Ok(())
}
