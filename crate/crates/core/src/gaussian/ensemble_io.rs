//! Ensemble and trajectory-checkpoint files.
//!
//! Format `bolab-ensemble/1`: a single metadata line
//!
//! ```text
//! # bolab-ensemble/1 k=2 n_grid=64 base_seed=7 count=10
//! ```
//!
//! followed by a CSV table with header `sample,seed,time,mode,re,im`, one row per
//! positive mode of each stored field. Initial samples have `time = 0`;
//! checkpoints store later times of the same samples.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

pub const ENSEMBLE_FORMAT: &str = "bolab-ensemble/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnsembleHeader {
    pub k: u32,
    pub n_grid: usize,
    pub base_seed: u64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleRecord {
    pub sample: usize,
    pub seed: u64,
    pub time: f64,
    pub field: SpectralField,
}

#[derive(Serialize, Deserialize)]
struct Row {
    sample: usize,
    seed: u64,
    time: f64,
    mode: usize,
    re: f64,
    im: f64,
}

pub fn write_ensemble(path: &Path, header: &EnsembleHeader, records: &[EnsembleRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "# {ENSEMBLE_FORMAT} k={} n_grid={} base_seed={} count={}",
        header.k, header.n_grid, header.base_seed, header.count
    )?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        for (j, c) in r.field.coeffs().iter().enumerate().skip(1) {
            w.serialize(Row { sample: r.sample, seed: r.seed, time: r.time, mode: j, re: c.re, im: c.im })?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_header(line: &str) -> Result<EnsembleHeader> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("#") || parts.next() != Some(ENSEMBLE_FORMAT) {
        return Err(Error::Parse(format!("not a {ENSEMBLE_FORMAT} file: {line:?}")));
    }
    let kv: BTreeMap<&str, &str> = parts.filter_map(|p| p.split_once('=')).collect();
    let get = |key: &str| -> Result<u64> {
        kv.get(key)
            .ok_or_else(|| Error::Parse(format!("ensemble header missing `{key}`")))?
            .parse()
            .map_err(|_| Error::Parse(format!("ensemble header `{key}` is not an integer")))
    };
    Ok(EnsembleHeader {
        k: get("k")? as u32,
        n_grid: get("n_grid")? as usize,
        base_seed: get("base_seed")?,
        count: get("count")? as usize,
    })
}

/// Records come back in file order, one per (sample, time) block.
pub fn read_ensemble(path: &Path) -> Result<(EnsembleHeader, Vec<EnsembleRecord>)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let header = parse_header(&first)?;
    let mut rest = String::new();
    reader.read_to_string(&mut rest)?;
    let mut records: Vec<EnsembleRecord> = Vec::new();
    for row in csv::Reader::from_reader(rest.as_bytes()).deserialize::<Row>() {
        let row = row?;
        if row.mode == 0 {
            return Err(Error::Parse("mode 0 is not stored".into()));
        }
        let same = records
            .last()
            .is_some_and(|r| r.sample == row.sample && r.time.to_bits() == row.time.to_bits());
        if !same {
            records.push(EnsembleRecord {
                sample: row.sample,
                seed: row.seed,
                time: row.time,
                field: SpectralField::zeros(0),
            });
        }
        let rec = records.last_mut().expect("pushed above");
        rec.field.set(row.mode, Complex64::new(row.re, row.im));
    }
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{EnsembleSpec, GaussianMeasure};

    #[test]
    fn round_trip_is_bit_exact() {
        let m = GaussianMeasure::mu_one(12);
        let spec = EnsembleSpec::new(4, 99);
        let records: Vec<_> = m
            .ensemble(&spec)
            .into_iter()
            .enumerate()
            .map(|(i, s)| EnsembleRecord { sample: i, seed: s.seed, time: 0.0, field: s.field })
            .collect();
        let header = EnsembleHeader { k: 2, n_grid: 12, base_seed: 99, count: 4 };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        write_ensemble(&path, &header, &records).unwrap();
        let (h, back) = read_ensemble(&path).unwrap();
        assert_eq!(h, header);
        assert_eq!(back, records);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_ensemble(&path).is_err());
    }
}
