//! File formats: table and scan CSV, JSON documents, database ingestion and
//! atomic output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{GridScan, SCAN_COLUMNS};
use crate::error::{Error, Result};
use crate::protocol::SiftRun;
use crate::sift::ProbabilityTable;

const SIGNIFICANT_DIGITS: i32 = 12;

/// Decimal notation with 12 significant digits, e.g. `0.500000000000`.
pub fn format_significant(x: f64) -> String {
    if x.abs() < 1e-15 {
        return format!("{:.*}", SIGNIFICANT_DIGITS as usize, 0.0);
    }
    let decimals = |v: f64| (SIGNIFICANT_DIGITS - 1 - v.abs().log10().floor() as i32).max(0);
    let first = format!("{:.*}", decimals(x) as usize, x);
    // rounding may carry into a new leading digit
    let rounded: f64 = first.parse().unwrap_or(x);
    if decimals(rounded) != decimals(x) {
        format!("{:.*}", decimals(rounded) as usize, x)
    } else {
        first
    }
}

/// Header `alice\bob,<bob labels>`, then one row per Alice state.
pub fn table_csv(table: &ProbabilityTable) -> String {
    let mut out = String::from("alice\\bob");
    for c in &table.col_labels {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (label, row) in table.row_labels.iter().zip(&table.entries) {
        out.push_str(label);
        for &v in row {
            out.push(',');
            out.push_str(&format_significant(v));
        }
        out.push('\n');
    }
    out
}

pub fn scan_csv(scan: &GridScan) -> String {
    let mut out = String::from(SCAN_COLUMNS);
    out.push('\n');
    for c in &scan.cells {
        let nums = [c.gamma1, c.gamma2, c.p, c.p_prime_g1, c.p_prime_g2];
        let tail = [c.p_c_mid, c.p0, c.p1, c.qber_expected];
        let fmt = |vs: &[f64]| {
            vs.iter()
                .map(|&v| format_significant(v))
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = writeln!(out, "{},{},{},{}", fmt(&nums), c.in_r1, c.in_r2, fmt(&tail));
    }
    out
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// ASCII `0`/`1` characters; whitespace is ignored.
pub fn parse_database_ascii(text: &str) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(text.len());
    for (i, ch) in text.chars().enumerate() {
        match ch {
            '0' => bits.push(0),
            '1' => bits.push(1),
            c if c.is_whitespace() => {}
            c => {
                return Err(Error::Database(format!(
                    "unexpected character {c:?} at offset {i}"
                )))
            }
        }
    }
    if bits.is_empty() {
        return Err(Error::Database("database is empty".into()));
    }
    Ok(bits)
}

/// Raw bytes, eight bits each, most significant bit first.
pub fn parse_database_bytes(bytes: &[u8]) -> Result<Vec<u8>> {
    if bytes.is_empty() {
        return Err(Error::Database("database is empty".into()));
    }
    Ok(bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |k| (b >> k) & 1))
        .collect())
}

pub fn read_database(path: &Path, raw_bytes: bool) -> Result<Vec<u8>> {
    let bytes = std::fs::read(path)?;
    if raw_bytes {
        parse_database_bytes(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Database("database file is not ASCII text".into()))?;
        parse_database_ascii(&text)
    }
}

/// Rounds listed in a transcript before the list is elided.
pub const TRANSCRIPT_ROUND_CAP: usize = 10_000;

#[derive(Serialize)]
pub struct Transcript<'a, S: Serialize> {
    pub summary: &'a S,
    pub rounds_retained: usize,
    pub rounds_elided: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<&'a [crate::protocol::SiftRound]>,
}

impl<'a, S: Serialize> Transcript<'a, S> {
    pub fn new(summary: &'a S, run: &'a SiftRun) -> Self {
        let elided = run.rounds.len() > TRANSCRIPT_ROUND_CAP;
        Self {
            summary,
            rounds_retained: run.rounds.len(),
            rounds_elided: elided,
            rounds: (!elided).then_some(run.rounds.as_slice()),
        }
    }
}
