//! Deterministic CSV output.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Significant digits of every number written.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` with [`SIG_DIGITS`] significant digits, `%g` style: fixed
/// notation for exponents in `[-4, 12)`, scientific otherwise, trailing zeros
/// trimmed, negative zero written as `0`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        let s = trim_zeros(format!("{:.*}", decimals, x));
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A named table of numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// Comment line, header row, then one line per row.
    pub fn render(&self, config_hash: &str) -> String {
        let comment = format!("# nmlab {} config={}\n", env!("CARGO_PKG_VERSION"), config_hash);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(comment.into_bytes());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_number(x))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn write(&self, dir: &Path, config_hash: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&path, self.render(config_hash)).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Parses a file written by [`Table::render`]; `#` lines are skipped.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let columns: Vec<String> = r.headers().context("reading header row")?.iter().map(str::to_string).collect();
        if columns.iter().all(|c| c.is_empty()) {
            bail!("missing header row");
        }
        let mut rows = Vec::new();
        for (k, record) in r.records().enumerate() {
            let record = record.with_context(|| format!("row {}", k + 1))?;
            let row = record
                .iter()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .with_context(|| format!("row {} is not numeric", k + 1))?;
            rows.push(row);
        }
        Ok(Self { name: name.to_string(), columns, rows })
    }
}
