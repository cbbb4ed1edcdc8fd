//! Trace persistence with a frozen CSV schema.
//!
//! Every experiment kind writes the same seven columns; metrics that do
//! not apply stay empty, never dropped. Floats are printed with 17
//! significant digits so parsing the file back reproduces the exact bits.

use std::path::Path;

use kpg_core::trace::{ConvergenceTrace, TraceRow};

use crate::error::LabError;

/// Column order and names, frozen across all experiment kinds.
pub const HEADER: [&str; 7] =
    ["update", "k", "agent", "step_dist", "dist_star", "bound_t1", "return"];

/// 17-significant-digit scientific notation: round-trips f64 exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_optional_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Write a trace to `path` under the frozen schema.
pub fn write_trace(path: &Path, trace: &ConvergenceTrace) -> Result<(), LabError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer.write_record(HEADER).map_err(|e| csv_error(path, e))?;
    for row in &trace.rows {
        writer
            .write_record([
                row.update.to_string(),
                row.k.to_string(),
                row.agent.map(|a| a.to_string()).unwrap_or_default(),
                format_optional_float(row.step_dist),
                format_optional_float(row.dist_star),
                format_optional_float(row.bound_t1),
                format_optional_float(row.ret),
            ])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| LabError::io(path, e))?;
    Ok(())
}

/// Read a trace back, enforcing the schema. The first column whose name
/// deviates is reported; field parse failures name the line and column.
pub fn read_trace(path: &Path) -> Result<ConvergenceTrace, LabError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    for (i, expected) in HEADER.iter().enumerate() {
        match headers.get(i) {
            Some(got) if got == *expected => {}
            Some(got) => {
                return Err(LabError::Config(format!(
                    "{}: column {} is `{got}`, expected `{expected}`",
                    path.display(),
                    i + 1
                )))
            }
            None => {
                return Err(LabError::Config(format!(
                    "{}: column {} (`{expected}`) is missing",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if headers.len() > HEADER.len() {
        return Err(LabError::Config(format!(
            "{}: unexpected extra column `{}`",
            path.display(),
            headers.get(HEADER.len()).unwrap_or("")
        )));
    }

    let mut trace = ConvergenceTrace::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| "?".into());
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse_usize = |i: usize| -> Result<usize, LabError> {
            field(i).parse().map_err(|_| {
                LabError::Config(format!(
                    "{}:{line}: column `{}` has non-integer value `{}`",
                    path.display(),
                    HEADER[i],
                    field(i)
                ))
            })
        };
        let parse_opt_usize = |i: usize| -> Result<Option<usize>, LabError> {
            if field(i).is_empty() { Ok(None) } else { parse_usize(i).map(Some) }
        };
        let parse_opt_float = |i: usize| -> Result<Option<f64>, LabError> {
            if field(i).is_empty() {
                return Ok(None);
            }
            field(i).parse::<f64>().map(Some).map_err(|_| {
                LabError::Config(format!(
                    "{}:{line}: column `{}` has non-numeric value `{}`",
                    path.display(),
                    HEADER[i],
                    field(i)
                ))
            })
        };

        let mut row = TraceRow::new(parse_usize(0)?, parse_usize(1)?);
        row.agent = parse_opt_usize(2)?;
        row.step_dist = parse_opt_float(3)?;
        row.dist_star = parse_opt_float(4)?;
        row.bound_t1 = parse_opt_float(5)?;
        row.ret = parse_opt_float(6)?;
        trace.push(row);
    }
    Ok(trace)
}

fn csv_error(path: &Path, err: csv::Error) -> LabError {
    LabError::Config(format!("{}: {err}", path.display()))
}
