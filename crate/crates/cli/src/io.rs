//! File formats: one token per line, and CSV with verbatim cell text.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use partex_core::{Sample, Token};

use crate::CliError;

/// Reads one token per line. Line endings (`\n` or `\r\n`) are stripped and
/// empty lines are skipped; everything else is kept verbatim.
pub fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text
        .lines()
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

pub fn read_sample(path: &Path) -> Result<Sample, CliError> {
    let sample = Sample::from_text(read_lines(path)?);
    if sample.is_empty() {
        return Err(CliError::Runtime(format!("{}: no data", path.display())));
    }
    Ok(sample)
}

fn csv_records(path: &Path, header: bool) -> Result<Vec<csv::StringRecord>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    reader
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Rows of a CSV as token vectors; every row must have the same width.
pub fn read_matrix(path: &Path, header: bool) -> Result<Vec<Vec<Token>>, CliError> {
    let records = csv_records(path, header)?;
    let width = records.first().map_or(0, csv::StringRecord::len);
    let mut rows = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(CliError::Runtime(format!(
                "{}: row {} has {} fields, expected {width}",
                path.display(),
                i + 1,
                rec.len()
            )));
        }
        rows.push(rec.iter().map(Token::from).collect());
    }
    if rows.is_empty() {
        return Err(CliError::Runtime(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

/// One sample per CSV column. Rows may be ragged and blank cells are skipped.
pub fn read_columns(path: &Path, header: bool) -> Result<Vec<Sample>, CliError> {
    let records = csv_records(path, header)?;
    let width = records.iter().map(csv::StringRecord::len).max().unwrap_or(0);
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); width];
    for rec in &records {
        for (j, cell) in rec.iter().enumerate() {
            if !cell.trim().is_empty() {
                columns[j].push(cell.to_owned());
            }
        }
    }
    Ok(columns.into_iter().map(Sample::from_text).collect())
}

pub fn write_lines<I, D>(path: &Path, items: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = D>,
    D: std::fmt::Display,
{
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        writeln!(out, "{item}").map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
