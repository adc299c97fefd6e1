//! CSV records. The header is fixed; every row carries one metric.

use std::io::Write;

use serde::Serialize;

use crate::error::CliError;

pub const HEADER: [&str; 8] = [
    "n",
    "mean_power_mw",
    "snr_db",
    "distribution",
    "metric",
    "value",
    "std_error",
    "method",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    /// Channel uses per block; `None` where the metric has no block structure.
    pub n: Option<usize>,
    pub mean_power_mw: f64,
    /// `10 log10(E / sigma^2)`.
    pub snr_db: f64,
    pub distribution: String,
    pub metric: &'static str,
    pub value: f64,
    pub std_error: f64,
    pub method: String,
}

/// 17 significant digits, always in scientific form so every value
/// round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn snr_db(mean_power: f64, sigma2: f64) -> f64 {
    10.0 * (mean_power / sigma2).log10()
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.n.map(|n| n.to_string()).unwrap_or_default(),
            fmt_f64(r.mean_power_mw),
            fmt_f64(r.snr_db),
            r.distribution.clone(),
            r.metric.to_string(),
            fmt_f64(r.value),
            fmt_f64(r.std_error),
            r.method.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
