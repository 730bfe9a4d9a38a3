//! Command bodies. Each command reads its configuration from [`Settings`] and returns
//! the files it produced plus a human-readable report; nothing here touches the disk.

use std::fmt::Write as _;
use std::str::FromStr;

use satdyn_core::distributions::{daily_scale, TDistSpec};
use satdyn_core::models::{
    logistic_mean, logistic_price_approx, saturated_price, AccumulatedNoise, ModelParams,
};
use satdyn_core::montecarlo::{
    comparative_table, run_experiment, ExperimentConfig, Model, NoiseLaw, Preset,
};
use satdyn_core::pricing::{
    call_integrand, call_numerator, critical_value_tics, divergence_scan, scan_increments,
    truncated_call_integral, QuadratureSpec, UpperBound,
};
use satdyn_core::quadrature::QuadConfig;

use crate::error::CliError;
use crate::output::{beta_header, csv_bytes, format_summary, num, summary_csv, table_csv};
use crate::settings::Settings;

pub const COMMANDS: [&str; 4] = ["simulate", "table", "figure", "price"];

/// Confidence levels annotated on the pricing figure.
pub const TIC_PROBABILITIES: [f64; 5] = [0.99, 0.999, 0.9999, 0.99999, 0.999999];

#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<(String, Vec<u8>)>,
    pub stdout: String,
}

pub fn execute(command: &str, s: &Settings, workers: Option<usize>) -> Result<Report, CliError> {
    match command {
        "simulate" => simulate(s, workers),
        "table" => table(s, workers),
        "figure" => figure(s),
        "price" => price(s),
        other => Err(CliError::usage(format!("unknown command '{other}'"))),
    }
}

fn parse_word<T: FromStr>(key: &str, word: &str) -> Result<T, CliError> {
    word.parse()
        .map_err(|_| CliError::usage(format!("unknown {key} '{word}'")))
}

fn experiment(s: &Settings, model: Model) -> Result<ExperimentConfig, CliError> {
    let s0 = s.get("s0", 50.0)?;
    let alpha = s.get("alpha", 0.0041)?;
    let beta = s.get("beta", 0.0)?;
    let scale = s.get("sigma_scale", daily_scale(0.3))?;
    let nu = s.get("nu", 2.0)?;
    let n_samples = s.get("n", 4096usize)?;
    let horizon_days = s.get("horizon", 1.0)?;
    let seed = s.seed()?;
    let noise = match s.get_word("noise", "t").as_str() {
        _ if scale == 0.0 => NoiseLaw::Zero,
        "t" => NoiseLaw::StudentT(TDistSpec::new(nu, scale)?),
        "normal" => NoiseLaw::Normal { scale },
        other => {
            return Err(CliError::usage(format!(
                "unknown noise law '{other}' (t | normal)"
            )))
        }
    };
    Ok(ExperimentConfig {
        model,
        params: ModelParams::new(s0, alpha, scale, beta)?,
        noise,
        n_samples,
        horizon_days,
        seed,
    })
}

fn simulate(s: &Settings, workers: Option<usize>) -> Result<Report, CliError> {
    let model: Model = parse_word("model", &s.get_word("model", "standard"))?;
    let cfg = experiment(s, model)?;
    let out = run_experiment(&cfg, workers)?;

    let header: Vec<String> = ["index", "w", "x", "s", "r"]
        .iter()
        .map(|h| h.to_string())
        .collect();
    let rows = out
        .samples
        .iter()
        .zip(&out.noise)
        .enumerate()
        .map(|(i, (p, w))| vec![i.to_string(), num(*w), num(p.x), num(p.s), num(p.r)]);
    let samples = csv_bytes(&header, rows)?;

    let stdout = format!(
        "model {model}, beta {:?}, {} samples, seed {}\n{}",
        cfg.params.beta,
        cfg.n_samples,
        cfg.seed,
        format_summary(&out.summary)
    );
    Ok(Report {
        files: vec![
            ("samples.csv".into(), samples),
            ("summary.csv".into(), summary_csv(&out.summary)?),
        ],
        stdout,
    })
}

fn table(s: &Settings, workers: Option<usize>) -> Result<Report, CliError> {
    let preset: Option<Preset> = s
        .get_word_opt("preset")
        .map(|w| parse_word("preset", &w))
        .transpose()?;
    let explicit = s.get_list_opt("betas")?;
    let model = match preset {
        Some(p) => p.model(),
        None if explicit.is_some() => parse_word("model", &s.get_word("model", "saturated"))?,
        None => {
            return Err(CliError::usage(
                "table needs --preset <table1|table2|table3> or --betas <list>",
            ))
        }
    };
    let base = experiment(s, model)?;
    let betas = match (explicit, preset) {
        (Some(b), _) => b,
        (None, Some(p)) => p.betas(base.params.s0),
        (None, None) => unreachable!(),
    };
    let table = comparative_table(&base, &betas, workers)?;
    let summaries: Vec<_> = table.columns.iter().map(|c| c.summary).collect();

    let mut stdout = format!(
        "{} model, {} samples per column, seed {}\n",
        model, base.n_samples, base.seed
    );
    for col in &table.columns {
        let _ = write!(
            stdout,
            "\nbeta = {:?}\n{}",
            col.beta,
            format_summary(&col.summary)
        );
    }
    Ok(Report {
        files: vec![("table.csv".into(), table_csv(&betas, &summaries)?)],
        stdout,
    })
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points < 2 || lo.is_nan() || hi.is_nan() || hi <= lo {
        return Err(CliError::usage(
            "grid needs at least 2 points and x_max > x_min",
        ));
    }
    let span = hi - lo;
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| lo + span * i as f64 / last).collect())
}

fn series_csv(
    axis: &str,
    xs: &[f64],
    betas: &[f64],
    mut value: impl FnMut(f64, f64) -> Result<f64, CliError>,
) -> Result<Vec<u8>, CliError> {
    let mut header = vec![axis.to_string()];
    header.extend(betas.iter().map(|&b| beta_header(b)));
    let rows = xs
        .iter()
        .map(|&x| {
            let mut row = vec![num(x)];
            for &b in betas {
                row.push(num(value(x, b)?));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    csv_bytes(&header, rows)
}

fn figure(s: &Settings) -> Result<Report, CliError> {
    let id: u32 = s
        .get_opt("figure")?
        .ok_or_else(|| CliError::usage("figure needs --figure <1..6>"))?;
    let name = format!("fig{id}.csv");
    let mut files = Vec::new();
    match id {
        1 => {
            let s0 = s.get("s0", 50.0)?;
            let alpha = s.get("alpha", 0.1)?;
            let sigma = s.get("sigma", 0.2)?;
            let betas = s.get_list("betas", &[0.001, 0.002, 0.004, 0.008])?;
            let ts = grid(0.0, s.get("t_max", 100.0)?, s.get("points", 201usize)?)?;
            let base = ModelParams::new(s0, alpha, sigma, 0.0)?;
            files.push((
                name,
                series_csv("x", &ts, &betas, |t, b| {
                    Ok(logistic_mean(&base.with_beta(b)?, t))
                })?,
            ));
        }
        2..=5 => {
            let s0 = s.get("s0", 50.0)?;
            let alpha = s.get("alpha", 0.0041)?;
            let default_betas = if id <= 3 {
                Preset::Table1.betas(s0)
            } else {
                Preset::Table2.betas(s0)
            };
            let betas = s.get_list("betas", &default_betas)?;
            let xs = grid(
                s.get("x_min", -20.0)?,
                s.get("x_max", 20.0)?,
                s.get("points", 401usize)?,
            )?;
            let base = ModelParams::new(s0, alpha, 0.0, 0.0)?;
            let want_return = id == 3 || id == 5;
            files.push((
                name,
                series_csv("x", &xs, &betas, |x, b| {
                    let p = base.with_beta(b)?;
                    let noise = AccumulatedNoise::from_total(alpha, x, 1.0)?;
                    let sample = if id <= 3 {
                        logistic_price_approx(&p, &noise).sample
                    } else {
                        saturated_price(&p, &noise)?
                    };
                    Ok(if want_return { sample.r } else { sample.s })
                })?,
            ));
        }
        6 => {
            let sigma = s.get("sigma", 0.157)?;
            let nu = s.get("nu", 3.0)?;
            let xis = grid(
                s.get("x_min", 0.0)?,
                s.get("x_max", 100.0)?,
                s.get("points", 1001usize)?,
            )?;
            let header: Vec<String> = ["xi", "numerator", "integrand"]
                .iter()
                .map(|h| h.to_string())
                .collect();
            let rows = xis.iter().map(|&xi| {
                vec![
                    num(xi),
                    num(call_numerator(xi, sigma)),
                    num(call_integrand(xi, sigma, nu)),
                ]
            });
            files.push((name, csv_bytes(&header, rows)?));
            let tics = critical_value_tics(nu, &TIC_PROBABILITIES)?;
            let header: Vec<String> = ["probability", "critical_value"]
                .iter()
                .map(|h| h.to_string())
                .collect();
            let rows = TIC_PROBABILITIES
                .iter()
                .zip(&tics)
                .map(|(p, x)| vec![num(*p), num(*x)]);
            files.push(("fig6_tics.csv".into(), csv_bytes(&header, rows)?));
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown figure id {other} (expected 1..6)"
            )))
        }
    }
    let stdout = files.iter().map(|(f, _)| format!("wrote {f}\n")).collect();
    Ok(Report { files, stdout })
}

fn price(s: &Settings) -> Result<Report, CliError> {
    let sigma = s.get("sigma", 0.157)?;
    let nu = s.get("nu", 3.0)?;
    let lower = s.get("lower", 0.0)?;
    let upper: Option<f64> = s.get_opt("upper")?;
    let confidence: Option<f64> = s.get_opt("confidence")?;
    let normalized = s.get_bool("normalized")?;
    let scan = s.get_list_opt("scan")?;

    let bound = match (upper, confidence) {
        (Some(u), None) => UpperBound::Finite(u),
        (None, Some(p)) => UpperBound::Confidence(p),
        (Some(_), Some(_)) => return Err(CliError::usage("give either --upper or --confidence, not both")),
        (None, None) => {
            return Err(CliError::usage(
                "price needs a truncation: --upper <xi> or --confidence <p>; the untruncated integral diverges for sigma > 0",
            ))
        }
    };
    let spec = QuadratureSpec {
        normalized,
        ..QuadratureSpec::new(sigma, nu, lower, bound)
    };
    let result = truncated_call_integral(&spec)?;

    let mut stdout = String::new();
    let _ = writeln!(stdout, "sigma {sigma}, nu {nu}, lower {lower}");
    if let Some(p) = confidence {
        let _ = writeln!(
            stdout,
            "confidence {p} -> truncation point {:.6}",
            result.upper
        );
    }
    let _ = writeln!(stdout, "truncation point: {}", result.upper);
    let _ = writeln!(
        stdout,
        "integral: {} (error estimate {:.3e})",
        result.value, result.error_estimate
    );

    let header: Vec<String> = [
        "sigma",
        "nu",
        "lower",
        "upper",
        "confidence",
        "integral",
        "error_estimate",
    ]
    .iter()
    .map(|h| h.to_string())
    .collect();
    let row = vec![
        num(sigma),
        num(nu),
        num(lower),
        num(result.upper),
        confidence.map_or_else(String::new, num),
        num(result.value),
        num(result.error_estimate),
    ];
    let mut files = vec![("price.csv".to_string(), csv_bytes(&header, [row])?)];

    if let Some(grid) = scan {
        let cfg = QuadConfig {
            abs_tol: spec.abs_tol,
            rel_tol: spec.rel_tol,
            ..QuadConfig::default()
        };
        let points = divergence_scan(sigma, nu, lower, &grid, cfg)?;
        let increments = scan_increments(&points);
        let _ = writeln!(
            stdout,
            "\n{:>14} {:>24} {:>24}",
            "upper", "integral", "increment"
        );
        for (p, d) in points.iter().zip(&increments) {
            let _ = writeln!(
                stdout,
                "{:>14} {:>24.10e} {:>24.10e}",
                p.upper, p.integral, d
            );
        }
        let header: Vec<String> = ["upper", "integral", "increment"]
            .iter()
            .map(|h| h.to_string())
            .collect();
        let rows = points
            .iter()
            .zip(&increments)
            .map(|(p, d)| vec![num(p.upper), num(p.integral), num(*d)]);
        files.push(("scan.csv".into(), csv_bytes(&header, rows)?));
    }
    Ok(Report { files, stdout })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(text: &str) -> Settings {
        Settings::parse(text).unwrap()
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = grid(-20.0, 20.0, 401).unwrap();
        assert_eq!((g[0], g[200], g[400]), (-20.0, 0.0, 20.0));
        assert!(grid(1.0, 1.0, 5).is_err());
        assert!(grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn zero_scale_means_no_noise() {
        let cfg = experiment(&settings("sigma_scale = 0"), Model::Standard).unwrap();
        assert_eq!(cfg.noise, NoiseLaw::Zero);
        assert!(experiment(&settings("noise = cauchy"), Model::Standard).is_err());
    }

    #[test]
    fn table_needs_preset_or_betas() {
        let err = execute("table", &settings(""), None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let report = execute("table", &settings("betas = 0, 1\nn = 300"), None).unwrap();
        let csv = String::from_utf8(report.files[0].1.clone()).unwrap();
        assert!(csv.starts_with("statistic,beta_0.0,beta_1.0\n"));
        assert_eq!(csv.lines().count(), 11);
    }

    #[test]
    fn price_scan_writes_increments() {
        let report = execute("price", &settings("upper = 50\nscan = 10, 100"), None).unwrap();
        let names: Vec<&str> = report.files.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["price.csv", "scan.csv"]);
    }

    #[test]
    fn logistic_mean_figure_starts_at_s0() {
        let report = execute("figure", &settings("figure = 1\npoints = 11"), None).unwrap();
        let csv = String::from_utf8(report.files[0].1.clone()).unwrap();
        let first: Vec<f64> = csv
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(first, [0.0, 50.0, 50.0, 50.0, 50.0]);
    }
}
