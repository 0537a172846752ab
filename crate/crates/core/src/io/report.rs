//! CSV and JSON report emission.
//!
//! CSV follows RFC 4180 (CRLF records, quotes only where needed) and renders
//! reals with 17 significant digits so every value parses back to the same
//! `f64`. JSON is a pretty-printed array of objects with the same field names.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chronology::ContextId;
use crate::error::{Error, Result};
use crate::simulation::CoverageCell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown output format `{other}` (expected csv or json)")),
        }
    }
}

/// One normalized (context, interval) estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub context_id: ContextId,
    pub interval_index: usize,
    pub interval_label: String,
    pub evidence_rate: f64,
    pub exposure: f64,
    pub deficit: f64,
    pub prior: f64,
    pub posterior_shape: f64,
    pub posterior_rate: f64,
    pub posterior_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub degenerate_flag: bool,
}

/// Aoristic expected value for one (context, interval).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoristicRow {
    pub context_id: ContextId,
    pub interval_index: usize,
    pub interval_label: String,
    pub evidence_rate: f64,
    /// Count mass of this context's finds falling outside the grid.
    pub clipped_mass: f64,
}

/// Position of one context within an interval, highest posterior mean first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub interval_index: usize,
    pub interval_label: String,
    pub rank: usize,
    pub context_id: ContextId,
    pub posterior_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// A simulated result row with its replicate number and the true rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedRow {
    pub replicate: usize,
    #[serde(flatten)]
    pub row: ResultRow,
    pub true_rate: f64,
}

/// Rows that know how to lay themselves out as CSV.
pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvRow for ResultRow {
    const HEADER: &'static [&'static str] = &[
        "context_id",
        "interval_index",
        "interval_label",
        "evidence_rate",
        "exposure",
        "deficit",
        "prior",
        "posterior_shape",
        "posterior_rate",
        "posterior_mean",
        "ci_low",
        "ci_high",
        "degenerate_flag",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.context_id.0.clone(),
            self.interval_index.to_string(),
            self.interval_label.clone(),
            format_real(self.evidence_rate),
            format_real(self.exposure),
            format_real(self.deficit),
            format_real(self.prior),
            format_real(self.posterior_shape),
            format_real(self.posterior_rate),
            format_real(self.posterior_mean),
            format_real(self.ci_low),
            format_real(self.ci_high),
            self.degenerate_flag.to_string(),
        ]
    }
}

impl CsvRow for AoristicRow {
    const HEADER: &'static [&'static str] =
        &["context_id", "interval_index", "interval_label", "evidence_rate", "clipped_mass"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.context_id.0.clone(),
            self.interval_index.to_string(),
            self.interval_label.clone(),
            format_real(self.evidence_rate),
            format_real(self.clipped_mass),
        ]
    }
}

impl CsvRow for RankingRow {
    const HEADER: &'static [&'static str] = &[
        "interval_index",
        "interval_label",
        "rank",
        "context_id",
        "posterior_mean",
        "ci_low",
        "ci_high",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.interval_index.to_string(),
            self.interval_label.clone(),
            self.rank.to_string(),
            self.context_id.0.clone(),
            format_real(self.posterior_mean),
            format_real(self.ci_low),
            format_real(self.ci_high),
        ]
    }
}

impl CsvRow for SimulatedRow {
    const HEADER: &'static [&'static str] = &[
        "replicate",
        "context_id",
        "interval_index",
        "interval_label",
        "evidence_rate",
        "exposure",
        "deficit",
        "prior",
        "posterior_shape",
        "posterior_rate",
        "posterior_mean",
        "ci_low",
        "ci_high",
        "degenerate_flag",
        "true_rate",
    ];

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.replicate.to_string()];
        f.extend(self.row.fields());
        f.push(format_real(self.true_rate));
        f
    }
}

impl CsvRow for CoverageCell {
    const HEADER: &'static [&'static str] = &[
        "context_id",
        "interval_index",
        "true_rate",
        "exposure",
        "deficit",
        "replicates",
        "coverage",
        "mean_posterior_mean",
        "posterior_deviation_from_prior",
        "raw_deviation_from_prior",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.context_id.0.clone(),
            self.interval_index.to_string(),
            format_real(self.true_rate),
            format_real(self.exposure),
            format_real(self.deficit),
            self.replicates.to_string(),
            format_real(self.coverage),
            format_real(self.mean_posterior_mean),
            format_real(self.posterior_deviation_from_prior),
            format_real(self.raw_deviation_from_prior),
        ]
    }
}

/// Shortest `%.17g`-style rendering: 17 significant digits, trailing zeros
/// dropped, exponent form outside `1e-4 ..= 1e17`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".to_owned()
        } else if x > 0.0 {
            "inf".to_owned()
        } else {
            "-inf".to_owned()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };

    if !(-4..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        let exp_sign = if exp < 0 { '-' } else { '+' };
        let dot = if tail.is_empty() { "" } else { "." };
        return format!("{sign}{head}{dot}{tail}e{exp_sign}{:02}", exp.abs());
    }

    let (int_part, frac_part) = if exp >= 0 {
        let split = exp as usize + 1;
        (digits[..split].to_owned(), digits[split..].to_owned())
    } else {
        ("0".to_owned(), format!("{}{}", "0".repeat((-exp - 1) as usize), digits))
    };
    let frac = frac_part.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

pub fn write_csv<T: CsvRow, W: Write>(rows: &[T], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(out);
    w.write_record(T::HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize, W: Write>(rows: &[T], mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    out.flush()
}

/// Renders rows in memory; the bytes are identical on every call.
pub fn render<T: CsvRow + Serialize>(rows: &[T], format: OutputFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => write_csv(rows, &mut buf).expect("writing to memory"),
        OutputFormat::Json => write_json(rows, &mut buf).expect("writing to memory"),
    }
    buf
}

/// Writes rows to `destination`, or to stdout when it is `None`.
pub fn emit_report<T: CsvRow + Serialize>(rows: &[T], format: OutputFormat, destination: Option<&Path>) -> Result<()> {
    let bytes = render(rows, format);
    match destination {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            w.write_all(&bytes).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(&bytes).and_then(|_| lock.flush()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}
