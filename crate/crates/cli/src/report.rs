//! Report emission.
//!
//! CSV columns, in order: `experiment, metric, params, successes, trials,
//! frequency, stderr, value, reference, check, seed, version, wall_time_s`.
//! Empty cells mean "not applicable". JSON is an array of the same row
//! objects. Every float is rounded to 6 significant digits first.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;

use crate::{CliError, ResultRow};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Rounds to `digits` significant digits; non-finite values and zero pass through.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn rounded(row: &ResultRow) -> ResultRow {
    let r = |x: f64| round_sig(x, 6);
    ResultRow {
        frequency: r(row.frequency),
        stderr: r(row.stderr),
        value: row.value.map(r),
        reference: row.reference.map(r),
        wall_time_s: row.wall_time_s.map(r),
        ..row.clone()
    }
}

/// Serializes rows to any writer.
pub fn write_report<W: Write>(rows: &[ResultRow], format: Format, out: W) -> Result<(), String> {
    let rows: Vec<ResultRow> = rows.iter().map(rounded).collect();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in &rows {
                w.serialize(row).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &rows).map_err(|e| e.to_string())?;
            writeln!(out).map_err(|e| e.to_string())
        }
    }
}

/// Writes the report to `path`; `-` means stdout.
pub fn emit_report(rows: &[ResultRow], format: Format, path: &Path) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::config("report", "no rows to emit"));
    }
    let io_err = |reason: String| CliError::Io { path: path.display().to_string(), source: std::io::Error::other(reason) };
    if path == Path::new("-") {
        return write_report(rows, format, std::io::stdout().lock()).map_err(io_err);
    }
    let file = std::fs::File::create(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    let mut buf = std::io::BufWriter::new(file);
    write_report(rows, format, &mut buf).map_err(io_err)?;
    buf.flush().map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            experiment: "pv-attack".into(),
            metric: "accept".into(),
            params: r#"{"attack":"breidbart"}"#.into(),
            successes: 85355,
            trials: 100000,
            frequency: 0.85355,
            stderr: 0.0011172345,
            value: None,
            reference: Some(0.853_553_390_593_273_7),
            check: Some(true),
            seed: 42,
            version: "0.1.0".into(),
            wall_time_s: None,
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(round_sig(0.853_553_390_593_273_7, 6), 0.853553);
        assert_eq!(round_sig(1234567.0, 6), 1234570.0);
        assert_eq!(round_sig(-0.000_012_345_67, 6), -0.0000123457);
        assert_eq!(round_sig(0.0, 6), 0.0);
    }

    #[test]
    fn csv_has_header_and_row() {
        let mut out = Vec::new();
        write_report(&[row()], Format::Csv, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "experiment,metric,params,successes,trials,frequency,stderr,value,reference,check,seed,version,wall_time_s"
        );
        assert!(lines[1].contains("0.853553"));
    }

    #[test]
    fn json_round_trips_at_six_digits() {
        let mut out = Vec::new();
        write_report(&[row()], Format::Json, &mut out).unwrap();
        let back: Vec<ResultRow> = serde_json::from_slice(&out).unwrap();
        assert_eq!(back, vec![rounded(&row())]);
        let mut again = Vec::new();
        write_report(&back, Format::Json, &mut again).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn unwritable_path_is_named() {
        let p = Path::new("/nonexistent-dir/report.csv");
        let err = emit_report(&[row()], Format::Csv, p).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/report.csv"));
        assert_eq!(err.exit_code(), 2);
    }
}
