//! Numeric CSV with a header row; the target column is picked by name.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dataset, Matrix, Task};

pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<Dataset> {
    load_csv_as(path, target_column, Task::Regression)
}

pub fn load_csv_as(path: impl AsRef<Path>, target_column: &str, task: Task) -> Result<Dataset> {
    read_csv(File::open(path)?, target_column, task)
}

pub fn read_csv<R: Read>(source: R, target_column: &str, task: Task) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let t = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::Config(format!("target column `{target_column}` not found")))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != t)
        .map(|(_, h)| h.clone())
        .collect();
    let d = names.len();
    let mut values = Vec::new();
    let mut target = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = r + 2;
        for (c, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            let err = |message: &str| Error::Parse {
                row,
                column: headers[c].clone(),
                message: message.to_string(),
            };
            if cell.is_empty() {
                return Err(err("missing value"));
            }
            let v: f64 = cell.parse().map_err(|_| err(&format!("`{cell}` is not a number")))?;
            if c == t {
                target.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let features = Matrix::from_row_slice(target.len(), d, &values);
    Dataset::new(features, target, task, names, target_column)
}

/// Writes features then the target as the last column. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_table(
        File::create(path)?,
        ds.column_names(),
        ds.features(),
        Some((ds.target_name(), ds.target())),
    )
}

pub fn write_table<W: Write>(
    sink: W,
    names: &[String],
    data: &Matrix,
    target: Option<(&str, &[f64])>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    if let Some((name, _)) = target {
        header.push(name);
    }
    w.write_record(&header)?;
    let mut rec = Vec::with_capacity(header.len());
    for r in 0..data.nrows() {
        rec.clear();
        rec.extend((0..data.ncols()).map(|c| data[(r, c)].to_string()));
        if let Some((_, y)) = target {
            rec.push(y[r].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
