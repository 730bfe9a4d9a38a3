//! CSV encoding. Numbers carry 17 significant digits so files are reproducible
//! bit-for-bit and parse back to the same doubles.

use satdyn_core::stats::{Moments, StatsSummary};

use crate::error::CliError;

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), num)
}

pub fn beta_header(beta: f64) -> String {
    format!("beta_{beta:?}")
}

pub fn csv_bytes<I, R>(header: &[String], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn stat_rows(m: &Moments) -> [(&'static str, String); 5] {
    [
        ("max", num(m.max)),
        ("min", num(m.min)),
        ("mean", num(m.mean)),
        ("std", opt_num(m.std)),
        ("kurtosis", opt_num(m.kurtosis)),
    ]
}

/// `statistic,s,r` with rows max, min, mean, std, kurtosis.
pub fn summary_csv(summary: &StatsSummary) -> Result<Vec<u8>, CliError> {
    let s = stat_rows(&summary.price);
    let r = stat_rows(&summary.ret);
    let rows = s
        .into_iter()
        .zip(r)
        .map(|((name, sv), (_, rv))| vec![name.to_string(), sv, rv]);
    csv_bytes(&["statistic".into(), "s".into(), "r".into()], rows)
}

/// `statistic,beta_<v1>,…` with one row per statistic and quantity, in the order
/// `max_s, max_r, min_s, min_r, …`.
pub fn table_csv(betas: &[f64], summaries: &[StatsSummary]) -> Result<Vec<u8>, CliError> {
    let mut header = vec!["statistic".to_string()];
    header.extend(betas.iter().map(|&b| beta_header(b)));
    type Rows = [(&'static str, String); 5];
    let per_column: Vec<(Rows, Rows)> = summaries
        .iter()
        .map(|s| (stat_rows(&s.price), stat_rows(&s.ret)))
        .collect();
    let mut rows = Vec::with_capacity(10);
    for i in 0..5 {
        let name = per_column.first().map_or("", |c| c.0[i].0);
        rows.push(
            std::iter::once(format!("{name}_s"))
                .chain(per_column.iter().map(|c| c.0[i].1.clone()))
                .collect::<Vec<_>>(),
        );
        rows.push(
            std::iter::once(format!("{name}_r"))
                .chain(per_column.iter().map(|c| c.1[i].1.clone()))
                .collect::<Vec<_>>(),
        );
    }
    csv_bytes(&header, rows)
}

pub fn format_summary(summary: &StatsSummary) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"));
    let mut out = format!("{:<10} {:>18} {:>18}\n", "statistic", "S", "R");
    for (name, s, r) in [
        ("max", Some(summary.price.max), Some(summary.ret.max)),
        ("min", Some(summary.price.min), Some(summary.ret.min)),
        ("mean", Some(summary.price.mean), Some(summary.ret.mean)),
        ("std dev", summary.price.std, summary.ret.std),
        ("kurtosis", summary.price.kurtosis, summary.ret.kurtosis),
    ] {
        out.push_str(&format!("{name:<10} {:>18} {:>18}\n", fmt(s), fmt(r)));
    }
    out
}
