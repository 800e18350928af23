//! File formats: the returns file, block-structured plot data, and the flat
//! key/value report.
//!
//! - Returns file: `# key: value` header comments, then one return per line.
//! - Plot data: blocks of two numeric columns, each introduced by a
//!   `# block: <name>` comment and separated by blank lines; gnuplot and
//!   friends consume this directly.
//! - Report: a flat JSON object, one key per line, fixed key order, so
//!   scripts can parse it with any JSON reader or plain grep.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use heavytail::timeseries::{Normalization, ReturnSeries};

/// Where command output goes: a file or stdout.
pub enum Output {
    Stdout,
    File(PathBuf),
}

impl Output {
    pub fn from_option(path: Option<PathBuf>) -> Self {
        match path {
            Some(p) => Output::File(p),
            None => Output::Stdout,
        }
    }

    pub fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match self {
            Output::Stdout => Box::new(BufWriter::new(io::stdout())),
            Output::File(p) => Box::new(BufWriter::new(File::create(p)?)),
        })
    }

    pub fn describe(&self) -> String {
        match self {
            Output::Stdout => "<stdout>".into(),
            Output::File(p) => p.display().to_string(),
        }
    }
}

/// One value in the flat report.
pub enum ReportValue {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for ReportValue {
    fn from(v: f64) -> Self {
        ReportValue::Float(v)
    }
}

impl From<u64> for ReportValue {
    fn from(v: u64) -> Self {
        ReportValue::Int(v)
    }
}

impl From<bool> for ReportValue {
    fn from(v: bool) -> Self {
        ReportValue::Bool(v)
    }
}

impl From<&str> for ReportValue {
    fn from(v: &str) -> Self {
        ReportValue::Text(v.to_string())
    }
}

/// Writes the pairs as a flat JSON object, keys in the given order.
pub fn write_report(out: &mut dyn Write, pairs: &[(&str, ReportValue)]) -> io::Result<()> {
    writeln!(out, "{{")?;
    for (i, (key, value)) in pairs.iter().enumerate() {
        let comma = if i + 1 == pairs.len() { "" } else { "," };
        match value {
            ReportValue::Float(v) if v.is_finite() => {
                writeln!(out, "  \"{key}\": {v}{comma}")?
            }
            ReportValue::Float(_) => writeln!(out, "  \"{key}\": null{comma}")?,
            ReportValue::Int(v) => writeln!(out, "  \"{key}\": {v}{comma}")?,
            ReportValue::Bool(v) => writeln!(out, "  \"{key}\": {v}{comma}")?,
            ReportValue::Text(v) => writeln!(out, "  \"{key}\": \"{v}\"{comma}")?,
        }
    }
    writeln!(out, "}}")
}

/// Starts a plot block: `# block: <name>`.
pub fn write_block_header(out: &mut dyn Write, name: &str) -> io::Result<()> {
    writeln!(out, "# block: {name}")
}

pub fn write_xy(out: &mut dyn Write, points: &[(f64, f64)]) -> io::Result<()> {
    for (x, y) in points {
        writeln!(out, "{x} {y}")?;
    }
    Ok(())
}

/// Writes a returns file with its header comments.
pub fn write_returns(
    out: &mut dyn Write,
    returns: &ReturnSeries,
    raw_volatility: f64,
) -> io::Result<()> {
    writeln!(out, "# instrument: {}", returns.instrument)?;
    writeln!(out, "# interval_seconds: {}", returns.interval_seconds)?;
    writeln!(out, "# count: {}", returns.values.len())?;
    writeln!(out, "# raw_volatility: {raw_volatility}")?;
    let norm = match returns.normalization {
        Normalization::Raw => "raw".to_string(),
        Normalization::UnitVariance => "unit_variance".to_string(),
        Normalization::ReferenceScaled(v) => format!("reference_scaled({v})"),
    };
    writeln!(out, "# normalization: {norm}")?;
    for v in &returns.values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

/// Reads a returns file. Header comments supply the instrument and interval
/// when present; values are loaded as raw (the fits do not depend on the
/// normalization tag).
pub fn read_returns(path: &Path) -> Result<ReturnSeries, String> {
    let file = File::open(path)
        .map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    let mut instrument = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "returns".into());
    let mut interval: u64 = 300;
    let mut values = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| format!("read error in {}: {e}", path.display()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                match key.trim() {
                    "instrument" => instrument = value.trim().to_string(),
                    "interval_seconds" => {
                        interval = value.trim().parse().map_err(|_| {
                            format!("bad interval_seconds header in {}", path.display())
                        })?
                    }
                    _ => {}
                }
            }
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| {
            format!("{}:{}: cannot parse return '{trimmed}'", path.display(), idx + 1)
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(format!("{} contains no return values", path.display()));
    }
    ReturnSeries::new(instrument, interval, values, Normalization::Raw)
        .map_err(|e| e.to_string())
}

/// Writes path values as a synthetic price CSV: each value is treated as a
/// log-return, so `S_k = S_0 exp(sum of the first k values)` at timestamps
/// `k * interval`.
pub fn write_prices_from_returns(
    out: &mut dyn Write,
    values: &[f64],
    interval: u64,
    start_price: f64,
) -> io::Result<()> {
    writeln!(out, "# synthetic prices from simulated returns")?;
    writeln!(out, "timestamp,price")?;
    let mut log_price = start_price.ln();
    writeln!(out, "0,{start_price}")?;
    for (k, v) in values.iter().enumerate() {
        log_price += v;
        writeln!(out, "{},{}", (k as u64 + 1) * interval, log_price.exp())?;
    }
    Ok(())
}
