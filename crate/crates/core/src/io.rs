//! Column-oriented CSV helpers shared by signals, weight fields and the
//! experiment harness. Reals are written with 17 significant digits so a
//! write/read cycle reproduces every `f64` bit for bit.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats a real with 17 significant digits. Infinities become `inf` / `-inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_real(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

/// Writes equally long numeric columns under `header`.
pub fn write_columns<W: Write>(out: W, header: &[&str], columns: &[&[f64]]) -> csv::Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(header)?;
    for r in 0..rows {
        wtr.write_record(columns.iter().map(|c| fmt_real(c[r])))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_columns_file(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_columns(file, header, columns).map_err(|e| csv_error(path, e))
}

/// Reads a numeric CSV file, returning its header and its columns.
pub fn read_columns_file(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let x = parse_real(field).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: format!("row {}: `{field}` is not a number", line + 2),
            })?;
            col.push(x);
        }
    }
    Ok((header, columns))
}

pub(crate) fn column<'a>(
    path: &Path,
    header: &[String],
    columns: &'a [Vec<f64>],
    name: &str,
) -> Result<&'a [f64]> {
    header
        .iter()
        .position(|h| h == name)
        .map(|i| columns[i].as_slice())
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            message: format!("missing column `{name}`"),
        })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}
