//! Trial log files (JSON lines, one attempt per line) and summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{AttemptRecord, FailureCategory, TaskSpec, TrialLog};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct LogLine {
    subject: String,
    task: String,
    #[serde(flatten)]
    record: AttemptRecord,
}

pub fn write_trial_log<W: Write>(logs: &[TrialLog], mut out: W) -> Result<()> {
    for log in logs {
        for record in &log.attempts {
            let line = LogLine {
                subject: log.subject.clone(),
                task: log.task.id.clone(),
                record: record.clone(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a log written by [`write_trial_log`]. Tasks are resolved through
/// [`TaskSpec::preset`]; the attempt count is taken from the file.
pub fn read_trial_log<R: BufRead>(input: R) -> Result<Vec<TrialLog>> {
    let mut logs: Vec<TrialLog> = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LogLine =
            serde_json::from_str(&line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let same = logs
            .last()
            .is_some_and(|l| l.subject == parsed.subject && l.task.id == parsed.task);
        if !same {
            let task = TaskSpec::preset(&parsed.task)
                .ok_or_else(|| Error::parse(line_no, format!("unknown task {:?}", parsed.task)))?;
            logs.push(TrialLog {
                subject: parsed.subject,
                task,
                attempts: Vec::new(),
            });
        }
        let log = logs.last_mut().expect("pushed above");
        log.attempts.push(parsed.record);
        log.task.attempts = log.attempts.len();
    }
    Ok(logs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSummary {
    pub subject: String,
    pub attempts: usize,
    pub score: usize,
    pub failures: usize,
    pub histogram: BTreeMap<FailureCategory, usize>,
    pub mean_duration_ms: f64,
    pub min_duration_ms: u64,
    pub max_duration_ms: u64,
}

impl SubjectSummary {
    fn from_log(log: &TrialLog) -> Self {
        let durations: Vec<u64> = log.attempts.iter().map(|a| a.duration_ms).collect();
        SubjectSummary {
            subject: log.subject.clone(),
            attempts: log.attempts.len(),
            score: log.score(),
            failures: log.failures(),
            histogram: log.category_counts(),
            mean_duration_ms: mean(&durations),
            min_duration_ms: durations.iter().copied().min().unwrap_or(0),
            max_duration_ms: durations.iter().copied().max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub subjects: Vec<SubjectSummary>,
    pub attempts: usize,
    pub score: usize,
    pub failures: usize,
    pub histogram: BTreeMap<FailureCategory, usize>,
    /// Mean per-subject score.
    pub mean_score: f64,
    pub mean_duration_ms: f64,
}

impl Summary {
    pub fn from_logs(logs: &[TrialLog]) -> Self {
        let subjects: Vec<SubjectSummary> = logs.iter().map(SubjectSummary::from_log).collect();
        let mut histogram: BTreeMap<_, _> = FailureCategory::ALL.iter().map(|c| (*c, 0)).collect();
        for s in &subjects {
            for (c, n) in &s.histogram {
                *histogram.get_mut(c).expect("all categories present") += n;
            }
        }
        let durations: Vec<u64> = logs
            .iter()
            .flat_map(|l| l.attempts.iter().map(|a| a.duration_ms))
            .collect();
        let scores: Vec<u64> = subjects.iter().map(|s| s.score as u64).collect();
        Summary {
            attempts: subjects.iter().map(|s| s.attempts).sum(),
            score: subjects.iter().map(|s| s.score).sum(),
            failures: subjects.iter().map(|s| s.failures).sum(),
            histogram,
            mean_score: mean(&scores),
            mean_duration_ms: mean(&durations),
            subjects,
        }
    }

    /// Fixed-column text table, one row per subject plus a total row.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<16}{:>9}{:>7}", "subject", "attempts", "score");
        for c in FailureCategory::ALL {
            let _ = write!(s, "{:>19}", c.to_string());
        }
        let _ = writeln!(s, "{:>12}", "mean_ms");
        let mut row = |name: &str, attempts, score, hist: &BTreeMap<FailureCategory, usize>, ms: f64| {
            let _ = write!(s, "{name:<16}{attempts:>9}{score:>7}");
            for c in FailureCategory::ALL {
                let _ = write!(s, "{:>19}", hist[&c]);
            }
            let _ = writeln!(s, "{ms:>12.0}");
        };
        for sub in &self.subjects {
            row(&sub.subject, sub.attempts, sub.score, &sub.histogram, sub.mean_duration_ms);
        }
        row("total", self.attempts, self.score, &self.histogram, self.mean_duration_ms);
        let _ = writeln!(s, "failures: {} of {}", self.failures, self.attempts);
        let _ = writeln!(s, "mean score: {:.2}", self.mean_score);
        s
    }
}

fn mean(values: &[u64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<u64>() as f64 / values.len() as f64
    }
}
