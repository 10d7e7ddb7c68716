//! CSV dialects: observation files (`x,y`) and marginal CDF tables (`value,cdf`).
//!
//! Missing cells are the empty string or the literal `NA`. Only `.` is
//! accepted as the decimal separator; non-finite values are rejected.

use std::io::{Read, Write};

use taubounds::{ObservationRecord, PiecewiseLinearCdf};

use crate::CliError;

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(input)
}

fn csv_error(e: csv::Error) -> CliError {
    match e.kind() {
        csv::ErrorKind::Io(_) => CliError::Io(e.to_string()),
        csv::ErrorKind::UnequalLengths {
            pos: Some(pos), len, ..
        } => CliError::Validation(format!("line {}: expected 2 fields, found {len}", pos.line())),
        csv::ErrorKind::Utf8 { pos: Some(pos), .. } => {
            CliError::Validation(format!("line {}: invalid UTF-8", pos.line()))
        }
        _ => CliError::Validation(e.to_string()),
    }
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: [&str; 2]) -> Result<bool, CliError> {
    let header = rdr.headers().map_err(csv_error)?;
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Ok(false);
    }
    if header.len() != 2 || header[0] != *expected[0] || header[1] != *expected[1] {
        let got: Vec<&str> = header.iter().collect();
        return Err(CliError::Validation(format!(
            "line 1: expected header `{}`, found `{}`",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(true)
}

fn parse_cell(cell: &str, line: u64, column: &str) -> Result<Option<f64>, CliError> {
    if cell.is_empty() || cell == "NA" {
        return Ok(None);
    }
    parse_number(cell, line, column).map(Some)
}

fn parse_number(cell: &str, line: u64, column: &str) -> Result<f64, CliError> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(CliError::Validation(format!(
            "line {line}: non-finite value `{cell}` in column {column}"
        ))),
        Err(_) => Err(CliError::Validation(format!(
            "line {line}: cannot parse `{cell}` in column {column} as a number"
        ))),
    }
}

/// Read observation records from an `x,y` CSV.
pub fn read_records<R: Read>(input: R) -> Result<Vec<ObservationRecord>, CliError> {
    let mut rdr = reader(input);
    if !check_header(&mut rdr, ["x", "y"])? {
        return Err(CliError::Validation("empty input".into()));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let x = parse_cell(&row[0], line, "x")?;
        let y = parse_cell(&row[1], line, "y")?;
        out.push(ObservationRecord::new(x, y));
    }
    if out.is_empty() {
        return Err(CliError::Validation("empty input".into()));
    }
    Ok(out)
}

/// Read a piecewise-linear CDF from a `value,cdf` CSV.
pub fn read_cdf_table<R: Read>(input: R) -> Result<PiecewiseLinearCdf, CliError> {
    let mut rdr = reader(input);
    if !check_header(&mut rdr, ["value", "cdf"])? {
        return Err(CliError::Validation("empty CDF table".into()));
    }
    let mut knots = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        knots.push((
            parse_number(&row[0], line, "value")?,
            parse_number(&row[1], line, "cdf")?,
        ));
    }
    PiecewiseLinearCdf::new(knots).map_err(CliError::from)
}

fn cell(v: Option<f64>) -> String {
    // `Display` for f64 is the shortest string that parses back exactly.
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Write records as an `x,y` CSV with masked cells left empty.
pub fn write_records<W: Write>(records: &[ObservationRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["x", "y"]).map_err(csv_error)?;
    for r in records {
        w.write_record([cell(r.x), cell(r.y)]).map_err(csv_error)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
