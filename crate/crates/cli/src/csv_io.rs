use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rankgm::EdgeMatrix;

use crate::error::{CliError, CliResult};

/// A numeric table with optional column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub data: DMatrix<f64>,
}

/// Reads a comma-separated numeric matrix. The first line is a header iff one
/// of its fields does not parse as a number.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_error = |line: u64, reason: String| CliError::Csv {
        path: path.to_owned(),
        line,
        reason,
    };

    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(index as u64 + 1, |p| p.line());
            csv_error(line, e.to_string())
        })?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if let Some(w) = width {
            if record.len() != w {
                return Err(csv_error(
                    line,
                    format!("expected {w} fields, found {}", record.len()),
                ));
            }
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        if index == 0 && parsed.iter().any(Option::is_none) {
            header = Some(record.iter().map(str::to_owned).collect());
            width = Some(record.len());
            continue;
        }
        width = Some(record.len());
        let mut row = Vec::with_capacity(record.len());
        for (col, (field, value)) in record.iter().zip(parsed).enumerate() {
            match value {
                Some(v) if v.is_finite() => row.push(v),
                Some(_) => {
                    return Err(csv_error(
                        line,
                        format!("column {}: non-finite value {field:?}", col + 1),
                    ))
                }
                None => {
                    return Err(csv_error(
                        line,
                        format!("column {}: not a number: {field:?}", col + 1),
                    ))
                }
            }
        }
        rows.push(row);
    }
    let p = width.unwrap_or(0);
    let data = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    Ok(Table { header, data })
}

pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    Ok(read_table(path)?.data)
}

pub fn read_edges(path: &Path) -> CliResult<EdgeMatrix> {
    let m = read_matrix(path)?;
    EdgeMatrix::from_matrix(&m).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Formats with 17 significant digits so that parsing returns the same bits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for line in lines {
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>, header: Option<&[String]>) -> CliResult<()> {
    let head = header.map(|h| h.join(","));
    let rows = (0..m.nrows()).map(|i| {
        m.row(i)
            .iter()
            .map(|&v| format_real(v))
            .collect::<Vec<_>>()
            .join(",")
    });
    write_lines(path, head.into_iter().chain(rows))
}

pub fn write_edges(path: &Path, edges: &EdgeMatrix, header: Option<&[String]>) -> CliResult<()> {
    let p = edges.p();
    let head = header.map(|h| h.join(","));
    let rows = (0..p).map(|i| {
        (0..p)
            .map(|j| if edges.has_edge(i, j) { "1" } else { "0" })
            .collect::<Vec<_>>()
            .join(",")
    });
    write_lines(path, head.into_iter().chain(rows))
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("manifest serializes");
    write_lines(path, [text])
}
