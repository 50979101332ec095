//! Trace files: UTF-8 CSV with header `t_ms,key,force_n`, one sample per
//! row, rows sorted by `(key, t_ms)`.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ForceSample, Key};
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "t_ms,key,force_n";

#[derive(Serialize, Deserialize)]
struct Row {
    t_ms: u64,
    key: String,
    force_n: f64,
}

/// Writes samples sorted by `(key, t_ms)`. Forces use the shortest decimal
/// representation that round-trips exactly.
pub fn write_trace<W: Write>(samples: &[ForceSample], out: W) -> Result<()> {
    let mut sorted: Vec<&ForceSample> = samples.iter().collect();
    sorted.sort_by(|a, b| (&a.key, a.t_ms).cmp(&(&b.key, b.t_ms)));

    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer
        .write_record(TRACE_HEADER.split(','))
        .map_err(csv_io)?;
    for s in sorted {
        s.validate()?;
        writer
            .write_record([s.t_ms.to_string(), s.key.to_string(), s.force_n.to_string()])
            .map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a trace, rejecting malformed rows and per-key timestamps that do
/// not strictly increase. Line numbers in errors are 1-based and count the
/// header as line 1.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<ForceSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let headers = reader.headers().map_err(|e| csv_parse(1, e))?.clone();
    let header_line = headers.iter().collect::<Vec<_>>().join(",");
    if header_line != TRACE_HEADER {
        // An empty input has no header row at all.
        if header_line.is_empty() {
            return Ok(Vec::new());
        }
        return Err(Error::parse(
            1,
            format!("expected header `{TRACE_HEADER}`, found `{header_line}`"),
        ));
    }

    let mut last: HashMap<Key, (u64, u64)> = HashMap::new();
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_parse(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record
            .deserialize(Some(&headers))
            .map_err(|e| csv_parse(line, e))?;
        let key = Key::new(row.key).map_err(|e| Error::parse(line, e.to_string()))?;
        let sample = ForceSample {
            t_ms: row.t_ms,
            key,
            force_n: row.force_n,
        };
        sample
            .validate()
            .map_err(|e| Error::parse(line, e.to_string()))?;
        if let Some(&(prev_t, prev_line)) = last.get(&sample.key) {
            if sample.t_ms <= prev_t {
                return Err(Error::parse(
                    line,
                    format!(
                        "non-monotonic t_ms for key {}: line {prev_line} has {prev_t}, line {line} has {}",
                        sample.key, sample.t_ms
                    ),
                ));
            }
        }
        last.insert(sample.key.clone(), (sample.t_ms, line));
        samples.push(sample);
    }
    Ok(samples)
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::parse(0, format!("{other:?}")),
    }
}

fn csv_parse(line: u64, e: csv::Error) -> Error {
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    Error::parse(line, message)
}
