//! Result rows and their versioned CSV encoding.
//!
//! A file starts with one comment line carrying the schema tag, followed by a
//! header and the rows. Optional fields are written as empty cells. Floats use
//! shortest round-trip formatting, so reading a file back is lossless.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
const SCHEMA_PREFIX: &str = "# srs-results schema=";

pub const COLUMNS: [&str; 12] = [
    "scheme",
    "M",
    "N",
    "J",
    "K",
    "alpha",
    "formula",
    "slope",
    "leak_slope",
    "stderr",
    "trials",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResultRow {
    pub scheme: String,
    #[serde(rename = "M")]
    pub tx_antennas: usize,
    #[serde(rename = "N")]
    pub rx_antennas: usize,
    #[serde(rename = "J")]
    pub jammer_antennas: usize,
    /// Number of receivers; set only for K-user rows.
    #[serde(rename = "K")]
    pub users: Option<usize>,
    pub alpha: f64,
    pub formula: f64,
    pub slope: Option<f64>,
    pub leak_slope: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

pub fn schema_line() -> String {
    format!("{SCHEMA_PREFIX}{SCHEMA_VERSION}")
}

pub fn write_rows<W: Write>(mut out: W, rows: &[ExperimentResultRow]) -> Result<()> {
    writeln!(out, "{}", schema_line())?;
    // header written by hand so an empty table still carries it
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ExperimentResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    Ok(String::from_utf8(buf)?)
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ExperimentResultRow>> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    if reader.read_line(&mut first)? == 0 {
        bail!("results file is empty");
    }
    let version = first
        .trim_end()
        .strip_prefix(SCHEMA_PREFIX)
        .context("results file lacks the schema header line")?;
    if version != SCHEMA_VERSION.to_string() {
        bail!("unsupported results schema {version} (expected {SCHEMA_VERSION})");
    }
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers()?.clone();
    let missing: Vec<&str> = COLUMNS
        .iter()
        .copied()
        .filter(|c| !headers.iter().any(|h| h == *c))
        .collect();
    if !missing.is_empty() {
        bail!("results file is missing columns: {}", missing.join(", "));
    }
    let rows = csv
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("row {}", i + 1)))
        .collect::<Result<Vec<ExperimentResultRow>>>()?;
    if rows.is_empty() {
        bail!("results file has no rows");
    }
    Ok(rows)
}

pub fn read_file(path: &Path) -> Result<Vec<ExperimentResultRow>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_rows(file).with_context(|| format!("reading {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ExperimentResultRow> {
        vec![
            ExperimentResultRow {
                scheme: "SRS".into(),
                tx_antennas: 3,
                rx_antennas: 2,
                jammer_antennas: 4,
                users: None,
                alpha: 0.1 + 0.2,
                formula: 2.5,
                slope: Some(2.497_123_456_789_012),
                leak_slope: Some(-1.3e-5),
                stderr: Some(0.0123),
                trials: 200,
                seed: u64::MAX,
            },
            ExperimentResultRow {
                scheme: "SRS".into(),
                tx_antennas: 6,
                rx_antennas: 2,
                jammer_antennas: 4,
                users: Some(3),
                alpha: 0.25,
                formula: 4.0,
                slope: None,
                leak_slope: None,
                stderr: None,
                trials: 0,
                seed: 1,
            },
        ]
    }

    #[test]
    fn round_trip_is_lossless() {
        let rows = sample();
        let text = to_csv_string(&rows).unwrap();
        let back = read_rows(text.as_bytes()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[0].alpha.to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn layout() {
        let text = to_csv_string(&sample()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# srs-results schema=1");
        assert_eq!(lines[1], COLUMNS.join(","));
        assert!(
            lines[3].starts_with("SRS,6,2,4,3,0.25,4.0,,,,0,1"),
            "{}",
            lines[3]
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_rows("".as_bytes()).is_err());
        assert!(read_rows("scheme,M\n".as_bytes()).is_err());
        let no_rows = format!("{}\n{}\n", schema_line(), COLUMNS.join(","));
        assert!(read_rows(no_rows.as_bytes())
            .unwrap_err()
            .to_string()
            .contains("no rows"));
        let missing = format!("{}\nscheme,M,N\nSRS,1,2\n", schema_line());
        let err = read_rows(missing.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("J") && err.contains("formula"), "{err}");
        let future = "# srs-results schema=2\n";
        assert!(read_rows(future.as_bytes()).is_err());
    }
}
