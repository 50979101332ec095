//! Event streams as JSON lines: `{"t_ms":..,"key":"..","kind":"..","apex_n":..}`
//! with `apex_n` present only for peak events.

use std::io::{BufRead, Write};

use super::KeyEventRecord;
use crate::error::{Error, Result};

pub fn write_events<W: Write>(events: &[KeyEventRecord], mut out: W) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Blank lines are skipped.
pub fn read_events<R: BufRead>(input: R) -> Result<Vec<KeyEventRecord>> {
    let mut events = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: KeyEventRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(idx as u64 + 1, e.to_string()))?;
        events.push(event);
    }
    Ok(events)
}
