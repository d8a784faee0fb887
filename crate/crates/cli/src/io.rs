//! File reading and writing.

use std::fs;
use std::path::Path;

use eqvar::learning::Dataset;
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::document::{name_index, GraphDocument, ParsedGraph};
use crate::error::{CliError, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::parse(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_graph(path: &Path) -> Result<ParsedGraph> {
    let doc: GraphDocument = read_json(path)?;
    doc.parse().map_err(|e| match e {
        CliError::Invalid(m) => CliError::parse(path, m),
        other => other,
    })
}

/// A data table: column names from the header row and one row per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

impl Table {
    /// Columns reordered to `names`; every name must be a column and no
    /// selected column may be constant.
    pub fn select(&self, names: &[String]) -> Result<Dataset> {
        let index = name_index(&self.names)?;
        let cols = names
            .iter()
            .map(|n| {
                index
                    .get(n.as_str())
                    .copied()
                    .ok_or_else(|| CliError::Invalid(format!("data has no column named {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = self.values.select_columns(&cols);
        for (c, name) in names.iter().enumerate() {
            let col = values.column(c);
            if col.len() >= 2 && col.iter().all(|&v| v == col[0]) {
                return Err(eqvar::Error::DegenerateData(format!("column {name} is constant")).into());
            }
        }
        Ok(Dataset::new(values)?)
    }
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::parse(path, e))?;
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::parse(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    name_index(&names).map_err(|e| CliError::parse(path, e))?;
    let mut flat = Vec::new();
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::parse(path, e))?;
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::parse(
                    path,
                    format!("row {}, column {}: not a number: {field:?}", r + 1, names[c]),
                )
            })?;
            flat.push(v);
        }
        rows += 1;
    }
    Ok(Table {
        values: DMatrix::from_row_slice(rows, names.len(), &flat),
        names,
    })
}

pub fn write_csv(path: &Path, names: &[String], data: &Dataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::parse(path, e))?;
    let m = data.matrix();
    let fail = |e: csv::Error| CliError::parse(path, e);
    writer.write_record(names).map_err(fail)?;
    for r in 0..m.nrows() {
        writer
            .write_record((0..m.ncols()).map(|c| m[(r, c)].to_string()))
            .map_err(fail)?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}
