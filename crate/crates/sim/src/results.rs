//! BER result files.
//!
//! CSV columns: `system, snr_db, trials, bit_errors, ber, ci_low, ci_high,
//! seed`. `ber` and the Wilson 95% bounds are empty when a point ran no
//! trials. Floats are written in shortest round-trip form, so reading a file
//! back gives the same values bit for bit. The JSON form is an array of the
//! same records.

use std::io::{Read, Write};
use std::path::Path;

use rgsm_scma_core::sim::BerPoint;
use serde::{Deserialize, Serialize};

use crate::config::System;
use crate::sweep::Curve;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub system: System,
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub ber: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub seed: u64,
}

impl ResultRow {
    pub fn new(system: System, point: &BerPoint, seed: u64) -> Self {
        let ci = point.wilson_ci95();
        Self {
            system,
            snr_db: point.snr_db,
            trials: point.trials,
            bit_errors: point.bit_errors,
            ber: point.ber(),
            ci_low: ci.map(|c| c.0),
            ci_high: ci.map(|c| c.1),
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown output format {s:?}"))),
        }
    }
}

pub fn rows_from_curves(curves: &[Curve], seed: u64) -> Vec<ResultRow> {
    curves
        .iter()
        .flat_map(|c| c.points.iter().map(move |p| ResultRow::new(c.system, p, seed)))
        .collect()
}

/// Row-at-a-time CSV output that flushes after every row.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Self {
        Self {
            writer: csv::Writer::from_writer(out),
        }
    }

    pub fn push(&mut self, row: &ResultRow) -> Result<()> {
        self.writer.serialize(row)?;
        self.writer.flush().map_err(|e| Error::io("<results>", e))
    }
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut sink = CsvSink::new(out);
            rows.iter().try_for_each(|r| sink.push(r))
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Parse(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| Error::io("<results>", e))
        }
    }
}

pub fn emit_results(rows: &[ResultRow], path: &Path, format: Format) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(rows, std::io::BufWriter::new(file), format)
}

pub fn read_rows<R: Read>(input: R, format: Format) -> Result<Vec<ResultRow>> {
    match format {
        Format::Csv => csv::Reader::from_reader(input)
            .deserialize()
            .map(|r| r.map_err(Error::from))
            .collect(),
        Format::Json => serde_json::from_reader(input).map_err(|e| Error::Parse(e.to_string())),
    }
}

pub fn load_results(path: &Path, format: Format) -> Result<Vec<ResultRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_rows(std::io::BufReader::new(file), format)
}
