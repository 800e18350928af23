//! Price series ingestion and log-return extraction.
//!
//! The pipeline is: load a `(timestamp, price)` CSV into a [`PriceSeries`],
//! resample to a fixed bar interval, take log-returns, and normalize the
//! volatility so series from different instruments are comparable.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TimeseriesError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },
    #[error("read error: {0}")]
    Read(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    MalformedRow { line: usize, msg: String },
    #[error("line {line}: non-positive price {value}")]
    NonPositivePrice { line: usize, value: f64 },
    #[error("line {line}: timestamp not strictly increasing")]
    NonMonotoneTimestamp { line: usize },
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("price series must be non-empty")]
    EmptySeries,
    #[error("series too short: need at least {needed} samples, have {found}")]
    SeriesTooShort { needed: usize, found: usize },
    #[error("zero variance: returns are constant, cannot normalize")]
    ZeroVariance,
    #[error("interval must be at least 1 second")]
    InvalidInterval,
    #[error("reference volatility must be positive, got {0}")]
    InvalidReferenceVol(f64),
}

pub type Result<T> = std::result::Result<T, TimeseriesError>;

/// Timestamp column encoding of the input CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeFormat {
    /// Integer seconds since the Unix epoch.
    #[default]
    EpochSeconds,
    /// ISO-8601 date-time, e.g. `2024-01-02T09:30:00Z` or with a `+HH:MM`
    /// offset. Converted to epoch seconds on load.
    Iso8601,
}

/// Ordered `(timestamp, price)` samples for one instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub instrument: String,
    samples: Vec<(i64, f64)>,
}

impl PriceSeries {
    /// Builds a series, enforcing strictly increasing timestamps and strictly
    /// positive prices.
    pub fn new(instrument: impl Into<String>, samples: Vec<(i64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(TimeseriesError::EmptySeries);
        }
        for (i, &(t, p)) in samples.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(TimeseriesError::NonPositivePrice { line: i + 1, value: p });
            }
            if i > 0 && t <= samples[i - 1].0 {
                return Err(TimeseriesError::NonMonotoneTimestamp { line: i + 1 });
            }
        }
        Ok(Self {
            instrument: instrument.into(),
            samples,
        })
    }

    pub fn samples(&self) -> &[(i64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// How the values of a [`ReturnSeries`] are scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Plain log-returns as computed from prices.
    Raw,
    /// Scaled so the sample standard deviation is 1.
    UnitVariance,
    /// Scaled so the sample standard deviation equals the given reference
    /// volatility (how "scale everything to one instrument's volatility" is
    /// expressed; the reference value is supplied by the caller).
    ReferenceScaled(f64),
}

/// Ordered log-returns with sampling-interval and normalization metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub instrument: String,
    pub interval_seconds: u64,
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

impl ReturnSeries {
    pub fn new(
        instrument: impl Into<String>,
        interval_seconds: u64,
        values: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if interval_seconds == 0 {
            return Err(TimeseriesError::InvalidInterval);
        }
        if values.is_empty() {
            return Err(TimeseriesError::SeriesTooShort { needed: 1, found: 0 });
        }
        let s = Self {
            instrument: instrument.into(),
            interval_seconds,
            values,
            normalization,
        };
        // Normalization metadata must be consistent with the data it labels.
        match s.normalization {
            Normalization::Raw => {}
            Normalization::UnitVariance => {
                let sd = sample_std_dev(&s.values).unwrap_or(0.0);
                if (sd - 1.0).abs() > 1e-9 {
                    return Err(TimeseriesError::MalformedRow {
                        line: 0,
                        msg: format!("unit-variance series has sd {sd}"),
                    });
                }
            }
            Normalization::ReferenceScaled(v) => {
                if v.is_nan() || v <= 0.0 {
                    return Err(TimeseriesError::InvalidReferenceVol(v));
                }
                let sd = sample_std_dev(&s.values).unwrap_or(0.0);
                if ((sd - v) / v).abs() > 1e-9 {
                    return Err(TimeseriesError::MalformedRow {
                        line: 0,
                        msg: format!("reference-scaled series has sd {sd}, expected {v}"),
                    });
                }
            }
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Target scaling for [`normalize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizeMode {
    UnitVariance,
    ReferenceScaled(f64),
}

/// Loads a two-column `timestamp,price` CSV file. Lines starting with `#` are
/// comments; one leading header row is tolerated. The instrument name is
/// taken from the file stem.
pub fn load_prices(path: impl AsRef<Path>, format: TimeFormat) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| TimeseriesError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let instrument = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    load_prices_reader(BufReader::new(file), format, &instrument)
}

/// Same as [`load_prices`], from any buffered reader.
pub fn load_prices_reader(
    reader: impl BufRead,
    format: TimeFormat,
    instrument: &str,
) -> Result<PriceSeries> {
    let mut samples: Vec<(i64, f64)> = Vec::new();
    let mut saw_data = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split(',');
        let ts_field = fields.next().unwrap_or("").trim();
        let price_field = fields.next().map(str::trim);
        if fields.next().is_some() {
            return Err(TimeseriesError::MalformedRow {
                line: line_no,
                msg: "expected exactly two columns (timestamp,price)".into(),
            });
        }
        let ts = match parse_timestamp(ts_field, format) {
            Ok(t) => t,
            Err(msg) => {
                if !saw_data {
                    // One header row is allowed before the first data row.
                    saw_data = true;
                    continue;
                }
                return Err(TimeseriesError::MalformedRow { line: line_no, msg });
            }
        };
        saw_data = true;
        let price_field = price_field.ok_or_else(|| TimeseriesError::MalformedRow {
            line: line_no,
            msg: "missing price column".into(),
        })?;
        let price: f64 = price_field
            .parse()
            .map_err(|_| TimeseriesError::MalformedRow {
                line: line_no,
                msg: format!("cannot parse price '{price_field}'"),
            })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(TimeseriesError::NonPositivePrice {
                line: line_no,
                value: price,
            });
        }
        if let Some(&(prev, _)) = samples.last() {
            if ts <= prev {
                return Err(TimeseriesError::NonMonotoneTimestamp { line: line_no });
            }
        }
        samples.push((ts, price));
    }
    if samples.len() < 2 {
        return Err(TimeseriesError::TooFewRows {
            needed: 2,
            found: samples.len(),
        });
    }
    PriceSeries::new(instrument, samples)
}

fn parse_timestamp(field: &str, format: TimeFormat) -> std::result::Result<i64, String> {
    match format {
        TimeFormat::EpochSeconds => field
            .parse::<i64>()
            .map_err(|_| format!("cannot parse epoch timestamp '{field}'")),
        TimeFormat::Iso8601 => parse_iso8601(field),
    }
}

/// Parses `YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+HH:MM|-HH:MM]` to epoch seconds.
/// Zone-less inputs are taken as UTC; fractional seconds are floored.
fn parse_iso8601(s: &str) -> std::result::Result<i64, String> {
    let err = || format!("cannot parse ISO-8601 timestamp '{s}'");
    let bytes = s.as_bytes();
    if bytes.len() < 19 || bytes[4] != b'-' || bytes[7] != b'-' {
        return Err(err());
    }
    if bytes[10] != b'T' && bytes[10] != b' ' {
        return Err(err());
    }
    if bytes[13] != b':' || bytes[16] != b':' {
        return Err(err());
    }
    let num = |range: std::ops::Range<usize>| -> std::result::Result<i64, String> {
        s.get(range).ok_or_else(err)?.parse().map_err(|_| err())
    };
    let year = num(0..4)?;
    let month = num(5..7)?;
    let day = num(8..10)?;
    let hour = num(11..13)?;
    let minute = num(14..16)?;
    let second = num(17..19)?;
    if !(1..=12).contains(&month) || !(1..=days_in_month(year, month as u32)).contains(&day) {
        return Err(err());
    }
    if !(0..24).contains(&hour) || !(0..60).contains(&minute) || !(0..60).contains(&second) {
        return Err(err());
    }

    let mut rest = &s[19..];
    if rest.starts_with('.') {
        let end = rest[1..]
            .find(|c: char| !c.is_ascii_digit())
            .map(|i| i + 1)
            .unwrap_or(rest.len());
        if end == 1 {
            return Err(err());
        }
        rest = &rest[end..];
    }
    let offset_seconds = match rest {
        "" | "Z" | "z" => 0,
        _ => {
            let sign = match rest.as_bytes()[0] {
                b'+' => 1,
                b'-' => -1,
                _ => return Err(err()),
            };
            let digits: String = rest[1..].chars().filter(|c| *c != ':').collect();
            if digits.len() != 4 || digits.chars().any(|c| !c.is_ascii_digit()) {
                return Err(err());
            }
            let oh: i64 = digits[0..2].parse().map_err(|_| err())?;
            let om: i64 = digits[2..4].parse().map_err(|_| err())?;
            if oh > 23 || om > 59 {
                return Err(err());
            }
            sign * (oh * 3600 + om * 60)
        }
    };

    let days = days_from_civil(year, month as u32, day as u32);
    Ok(days * 86_400 + hour * 3600 + minute * 60 + second - offset_seconds)
}

fn is_leap_year(y: i64) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

fn days_in_month(y: i64, m: u32) -> i64 {
    match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 => {
            if is_leap_year(y) {
                29
            } else {
                28
            }
        }
        _ => 0,
    }
}

/// Days since 1970-01-01 for a civil date (proleptic Gregorian).
fn days_from_civil(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = ((m + 9) % 12) as i64;
    let doy = (153 * mp + 2) / 5 + d as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Resamples to fixed bars of `interval_seconds`. Each output bar carries the
/// last observed price in its bucket; buckets with no samples are skipped
/// rather than filled. Output timestamps are the bucket starts, i.e.
/// multiples of the interval.
pub fn resample(series: &PriceSeries, interval_seconds: u64) -> Result<PriceSeries> {
    if interval_seconds == 0 {
        return Err(TimeseriesError::InvalidInterval);
    }
    let dt = interval_seconds as i64;
    let mut out: Vec<(i64, f64)> = Vec::new();
    let mut current: Option<(i64, f64)> = None;
    for &(t, p) in series.samples() {
        let bucket_start = t.div_euclid(dt) * dt;
        match current {
            Some((b, _)) if b == bucket_start => current = Some((b, p)),
            Some(done) => {
                out.push(done);
                current = Some((bucket_start, p));
            }
            None => current = Some((bucket_start, p)),
        }
    }
    if let Some(done) = current {
        out.push(done);
    }
    PriceSeries::new(series.instrument.clone(), out)
}

/// Log-returns `ln(p[i+1] / p[i])`. The recorded interval is the median
/// timestamp gap (lower median for an even number of gaps).
pub fn log_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    let samples = series.samples();
    if samples.len() < 2 {
        return Err(TimeseriesError::SeriesTooShort {
            needed: 2,
            found: samples.len(),
        });
    }
    let values: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).ln())
        .collect();
    let mut gaps: Vec<i64> = samples.windows(2).map(|w| w[1].0 - w[0].0).collect();
    gaps.sort_unstable();
    let median_gap = gaps[(gaps.len() - 1) / 2];
    ReturnSeries::new(
        series.instrument.clone(),
        median_gap as u64,
        values,
        Normalization::Raw,
    )
}

fn sample_std_dev(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    Some((ss / (n - 1.0)).sqrt())
}

/// Sample standard deviation (denominator n-1) of the return values.
pub fn volatility(returns: &ReturnSeries) -> Result<f64> {
    if returns.len() < 2 {
        return Err(TimeseriesError::SeriesTooShort {
            needed: 2,
            found: returns.len(),
        });
    }
    let (min, max) = returns
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if min == max {
        return Err(TimeseriesError::ZeroVariance);
    }
    Ok(sample_std_dev(&returns.values).expect("length checked"))
}

/// Rescales the values so the sample standard deviation hits the target
/// (1 for unit variance, the supplied reference volatility otherwise).
/// Returns are deliberately not demeaned: the densities fitted downstream
/// are centered at zero and the drift at intraday intervals is negligible.
pub fn normalize(returns: &ReturnSeries, mode: NormalizeMode) -> Result<ReturnSeries> {
    let current = volatility(returns)?;
    let (target, normalization) = match mode {
        NormalizeMode::UnitVariance => (1.0, Normalization::UnitVariance),
        NormalizeMode::ReferenceScaled(v) => {
            if !(v.is_finite() && v > 0.0) {
                return Err(TimeseriesError::InvalidReferenceVol(v));
            }
            (v, Normalization::ReferenceScaled(v))
        }
    };
    let scale = target / current;
    let values = returns.values.iter().map(|v| v * scale).collect();
    ReturnSeries::new(
        returns.instrument.clone(),
        returns.interval_seconds,
        values,
        normalization,
    )
}
