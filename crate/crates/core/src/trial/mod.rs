//! Automatic attempt classification for the menu target task.
//!
//! A session is the detector event stream of one subject. It is split into
//! attempts, one per depress/release cycle of the task key; a cycle that
//! never entered one-press mode becomes an empty transcript. Each attempt is
//! replayed through a fresh [`EngineDriver`] and the resulting transcript is
//! classified.
//!
//! Success means navigating to the target, activating its preview and
//! committing it with a hard press. Failures fall into exactly one category,
//! checked in this order:
//!
//! 1. `HardAsMediumMixup`: an `InvalidCommit` occurred (a hard press fired
//!    while navigating, before any preview).
//! 2. `MediumAsHardMixup`: the target preview was reached and then dismissed
//!    by a medium press (the intended commit registered as medium).
//! 3. `UnintendedRelease`: the cycle ended aborted, including empty
//!    transcripts from quick aborted keypresses.
//! 4. `Other`: anything else, e.g. committing the wrong option.

pub mod cohort;
mod log;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::detector::{EventKind, KeyEventRecord};
use crate::error::{Error, Result};
use crate::signal::Key;
use crate::wytiwyg::{Directive, DriverOutput, EngineDriver, EngineInput, MenuModel, WytiwygConfig};

pub use log::{read_trial_log, write_trial_log, Summary};

/// What a task counts as a success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    Navigate,
    Preview,
    Commit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub menu_size: usize,
    /// 1-based target option; `None` accepts any option.
    pub target: Option<usize>,
    pub goal: Goal,
    pub attempts: usize,
}

impl TaskSpec {
    pub fn new(
        id: impl Into<String>,
        menu_size: usize,
        target: Option<usize>,
        goal: Goal,
        attempts: usize,
    ) -> Result<Self> {
        let task = TaskSpec {
            id: id.into(),
            menu_size,
            target,
            goal,
            attempts,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<()> {
        if self.menu_size == 0 {
            return Err(Error::InvalidConfig("menu_size must be >= 1".into()));
        }
        if let Some(t) = self.target {
            if !(1..=self.menu_size).contains(&t) {
                return Err(Error::InvalidConfig(format!(
                    "target {t} outside 1..={}",
                    self.menu_size
                )));
            }
        }
        if self.attempts == 0 {
            return Err(Error::InvalidConfig("attempts must be >= 1".into()));
        }
        Ok(())
    }

    /// The measured task: commit menu item 8 of 10, ten attempts.
    pub fn target8() -> Self {
        TaskSpec {
            id: "target8".into(),
            menu_size: 10,
            target: Some(8),
            goal: Goal::Commit,
            attempts: 10,
        }
    }

    /// Practice stages 1 to 4; stage 4 is [`TaskSpec::target8`].
    pub fn practice_stage(stage: u8) -> Option<Self> {
        let (id, goal) = match stage {
            1 => ("navigate", Goal::Navigate),
            2 => ("preview", Goal::Preview),
            3 => ("commit-any", Goal::Commit),
            4 => return Some(Self::target8()),
            _ => return None,
        };
        Some(TaskSpec {
            id: id.into(),
            menu_size: 10,
            target: None,
            goal,
            attempts: 10,
        })
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "target8" | "stage4" => Some(Self::target8()),
            "navigate" | "stage1" => Self::practice_stage(1),
            "preview" | "stage2" => Self::practice_stage(2),
            "commit-any" | "stage3" => Self::practice_stage(3),
            _ => None,
        }
    }

    fn is_target(&self, cursor: usize) -> bool {
        self.target.is_none_or(|t| t == cursor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureCategory {
    UnintendedRelease,
    HardAsMediumMixup,
    MediumAsHardMixup,
    Other,
}

impl FailureCategory {
    pub const ALL: [FailureCategory; 4] = [
        FailureCategory::UnintendedRelease,
        FailureCategory::HardAsMediumMixup,
        FailureCategory::MediumAsHardMixup,
        FailureCategory::Other,
    ];
}

impl fmt::Display for FailureCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "category")]
pub enum AttemptOutcome {
    Success,
    Failure(FailureCategory),
}

impl AttemptOutcome {
    pub fn category(self) -> Option<FailureCategory> {
        match self {
            AttemptOutcome::Success => None,
            AttemptOutcome::Failure(c) => Some(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry")]
pub enum TranscriptEntry {
    Input(EngineInput),
    Directive { t_ms: u64, directive: Directive },
}

impl TranscriptEntry {
    pub fn t_ms(&self) -> u64 {
        match self {
            TranscriptEntry::Input(i) => i.t_ms,
            TranscriptEntry::Directive { t_ms, .. } => *t_ms,
        }
    }
}

pub type Transcript = Vec<TranscriptEntry>;

pub fn classify_attempt(transcript: &[TranscriptEntry], task: &TaskSpec) -> Result<AttemptOutcome> {
    if transcript.is_empty() {
        return Ok(AttemptOutcome::Failure(FailureCategory::UnintendedRelease));
    }

    let mut highlighted_target = false;
    let mut previewed_target = false;
    let mut committed_target = false;
    let mut invalid_commit = false;
    let mut target_preview_lost = false;
    let mut aborted = false;
    let mut previewing_target = false;

    for entry in transcript {
        let TranscriptEntry::Directive { directive, .. } = entry else {
            continue;
        };
        match directive {
            Directive::Highlight { cursor, .. } => highlighted_target |= task.is_target(*cursor),
            Directive::ShowPreview { cursor, .. } => {
                previewing_target = task.is_target(*cursor);
                previewed_target |= previewing_target;
            }
            Directive::HidePreview => {
                target_preview_lost |= previewing_target;
                previewing_target = false;
            }
            Directive::CommitOutput { cursor, .. } => {
                committed_target |= previewed_target && task.is_target(*cursor)
            }
            Directive::InvalidCommit { .. } => invalid_commit = true,
            Directive::DismissAll => aborted = true,
            Directive::ShowMenu { .. } | Directive::Warning { .. } => {}
        }
    }

    let finished = aborted
        || transcript
            .iter()
            .any(|e| matches!(e, TranscriptEntry::Directive { directive: Directive::CommitOutput { .. }, .. }));
    if !finished {
        return Err(Error::IncompleteTranscript(
            "cycle has neither a CommitOutput nor a DismissAll terminal".into(),
        ));
    }

    let success = match task.goal {
        Goal::Navigate => highlighted_target,
        Goal::Preview => previewed_target,
        Goal::Commit => committed_target,
    };
    let outcome = if success {
        AttemptOutcome::Success
    } else if invalid_commit {
        AttemptOutcome::Failure(FailureCategory::HardAsMediumMixup)
    } else if target_preview_lost {
        AttemptOutcome::Failure(FailureCategory::MediumAsHardMixup)
    } else if aborted {
        AttemptOutcome::Failure(FailureCategory::UnintendedRelease)
    } else {
        AttemptOutcome::Failure(FailureCategory::Other)
    };
    Ok(outcome)
}

/// Splits a session's events into per-cycle attempts for `key`.
///
/// A one-press cycle runs from `OnePressEnter` to `OnePressRelease`. A
/// classical press of the task key yields an empty attempt. Events of other
/// keys are dropped. An unterminated trailing cycle is kept as is.
pub fn split_attempts(events: &[KeyEventRecord], key: &Key) -> Vec<Vec<KeyEventRecord>> {
    let mut attempts = Vec::new();
    let mut current: Option<Vec<KeyEventRecord>> = None;
    for e in events.iter().filter(|e| &e.key == key) {
        match e.kind {
            EventKind::OnePressEnter => {
                if let Some(open) = current.take() {
                    attempts.push(open);
                }
                current = Some(vec![e.clone()]);
            }
            EventKind::OnePressRelease => {
                let mut cycle = current.take().unwrap_or_default();
                cycle.push(e.clone());
                attempts.push(cycle);
            }
            EventKind::MediumRepeat | EventKind::HardRepeat => {
                current.get_or_insert_with(Vec::new).push(e.clone());
            }
            EventKind::ClassicalDepress => attempts.push(Vec::new()),
            EventKind::ClassicalRelease => {}
        }
    }
    if let Some(open) = current {
        attempts.push(open);
    }
    attempts
}

/// Replays one attempt through a fresh engine.
pub fn transcribe(
    attempt: &[KeyEventRecord],
    menu: &Arc<MenuModel>,
    config: &WytiwygConfig,
) -> Result<Transcript> {
    let Some(first) = attempt.first() else {
        return Ok(Vec::new());
    };
    let mut driver = EngineDriver::new(menu.clone(), *config, first.key.clone())?;
    let mut transcript = Vec::new();
    for e in attempt {
        for out in driver.on_event(e) {
            match out {
                DriverOutput::Event(_) => {}
                DriverOutput::Input(i) => transcript.push(TranscriptEntry::Input(i)),
                DriverOutput::Directive { t_ms, directive } => {
                    transcript.push(TranscriptEntry::Directive { t_ms, directive })
                }
            }
        }
    }
    Ok(transcript)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    #[serde(flatten)]
    pub outcome: AttemptOutcome,
    pub duration_ms: u64,
    pub transcript: Transcript,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub subject: String,
    pub task: TaskSpec,
    pub attempts: Vec<AttemptRecord>,
}

impl TrialLog {
    pub fn score(&self) -> usize {
        self.attempts
            .iter()
            .filter(|a| a.outcome == AttemptOutcome::Success)
            .count()
    }

    pub fn failures(&self) -> usize {
        self.attempts.len() - self.score()
    }

    /// Failure counts for all four categories, zeros included.
    pub fn category_counts(&self) -> BTreeMap<FailureCategory, usize> {
        let mut counts: BTreeMap<_, _> = FailureCategory::ALL.iter().map(|c| (*c, 0)).collect();
        for a in &self.attempts {
            if let Some(c) = a.outcome.category() {
                *counts.get_mut(&c).expect("all categories present") += 1;
            }
        }
        counts
    }
}

/// Classifies the first `task.attempts` attempts; later ones are ignored.
pub fn run_trial(
    subject: impl Into<String>,
    task: &TaskSpec,
    attempts: &[Vec<KeyEventRecord>],
    config: &WytiwygConfig,
) -> Result<TrialLog> {
    task.validate()?;
    if attempts.len() < task.attempts {
        return Err(Error::NotEnoughAttempts {
            needed: task.attempts,
            got: attempts.len(),
        });
    }
    let menu = Arc::new(MenuModel::numbered(task.menu_size)?);
    let mut records = Vec::with_capacity(task.attempts);
    for (i, attempt) in attempts.iter().take(task.attempts).enumerate() {
        let transcript = transcribe(attempt, &menu, config)?;
        let outcome = classify_attempt(&transcript, task)?;
        let duration_ms = match (transcript.first(), transcript.last()) {
            (Some(a), Some(b)) => b.t_ms() - a.t_ms(),
            _ => 0,
        };
        records.push(AttemptRecord {
            attempt: i + 1,
            outcome,
            duration_ms,
            transcript,
        });
    }
    Ok(TrialLog {
        subject: subject.into(),
        task: task.clone(),
        attempts: records,
    })
}

/// Summary over one or more logs.
pub fn summarize(logs: &[TrialLog]) -> Summary {
    Summary::from_logs(logs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wytiwyg::{EngineInput as In, Phase};

    fn key() -> Key {
        Key::new("space").unwrap()
    }

    fn ev(t: u64, kind: EventKind) -> KeyEventRecord {
        match kind {
            EventKind::MediumRepeat => KeyEventRecord::peak(t, key(), kind, 1.6),
            EventKind::HardRepeat => KeyEventRecord::peak(t, key(), kind, 2.4),
            _ => KeyEventRecord::new(t, key(), kind),
        }
    }

    /// Enter, `mediums` presses 300 ms apart, then the given tail.
    fn attempt(mediums: u64, tail: &[(u64, EventKind)]) -> Vec<KeyEventRecord> {
        let mut v = vec![ev(0, EventKind::OnePressEnter)];
        for i in 1..=mediums {
            v.push(ev(i * 300, EventKind::MediumRepeat));
        }
        let end = mediums * 300;
        v.extend(tail.iter().map(|&(dt, k)| ev(end + dt, k)));
        v
    }

    fn classify(events: &[KeyEventRecord]) -> AttemptOutcome {
        let menu = Arc::new(MenuModel::numbered(10).unwrap());
        let t = transcribe(events, &menu, &WytiwygConfig::default()).unwrap();
        classify_attempt(&t, &TaskSpec::target8()).unwrap()
    }

    #[test]
    fn perfect_attempt() {
        let a = attempt(8, &[(900, EventKind::HardRepeat), (1200, EventKind::OnePressRelease)]);
        assert_eq!(classify(&a), AttemptOutcome::Success);
    }

    #[test]
    fn early_release() {
        let a = attempt(3, &[(100, EventKind::OnePressRelease)]);
        assert_eq!(classify(&a), AttemptOutcome::Failure(FailureCategory::UnintendedRelease));
        let t: Transcript = Vec::new();
        assert_eq!(
            classify_attempt(&t, &TaskSpec::target8()).unwrap(),
            AttemptOutcome::Failure(FailureCategory::UnintendedRelease)
        );
    }

    #[test]
    fn intended_hard_registers_medium() {
        let a = attempt(
            8,
            &[(900, EventKind::MediumRepeat), (1300, EventKind::OnePressRelease)],
        );
        assert_eq!(classify(&a), AttemptOutcome::Failure(FailureCategory::MediumAsHardMixup));
    }

    #[test]
    fn hard_while_navigating() {
        let a = attempt(
            6,
            &[
                (300, EventKind::HardRepeat),
                (600, EventKind::OnePressRelease),
            ],
        );
        assert_eq!(classify(&a), AttemptOutcome::Failure(FailureCategory::HardAsMediumMixup));
    }

    #[test]
    fn wrong_commit_is_other() {
        let a = attempt(9, &[(900, EventKind::HardRepeat), (1200, EventKind::OnePressRelease)]);
        assert_eq!(classify(&a), AttemptOutcome::Failure(FailureCategory::Other));
    }

    #[test]
    fn recovering_from_invalid_commit_still_succeeds() {
        let mut a = attempt(7, &[(100, EventKind::HardRepeat), (300, EventKind::MediumRepeat)]);
        a.push(ev(3500, EventKind::HardRepeat));
        a.push(ev(3700, EventKind::OnePressRelease));
        assert_eq!(classify(&a), AttemptOutcome::Success);
    }

    #[test]
    fn incomplete_transcript_is_an_error() {
        let t = vec![
            TranscriptEntry::Input(In::enter(0)),
            TranscriptEntry::Directive {
                t_ms: 0,
                directive: Directive::ShowMenu { items: vec![] },
            },
        ];
        assert!(matches!(
            classify_attempt(&t, &TaskSpec::target8()),
            Err(Error::IncompleteTranscript(_))
        ));
    }

    #[test]
    fn practice_stage_goals() {
        let nav = TaskSpec::practice_stage(1).unwrap();
        let prev = TaskSpec::practice_stage(2).unwrap();
        let menu = Arc::new(MenuModel::numbered(10).unwrap());
        let cfg = WytiwygConfig::default();
        let a = attempt(3, &[(100, EventKind::OnePressRelease)]);
        let t = transcribe(&a, &menu, &cfg).unwrap();
        assert_eq!(classify_attempt(&t, &nav).unwrap(), AttemptOutcome::Success);
        assert_eq!(
            classify_attempt(&t, &prev).unwrap(),
            AttemptOutcome::Failure(FailureCategory::UnintendedRelease)
        );
        let a = attempt(3, &[(900, EventKind::OnePressRelease)]);
        let t = transcribe(&a, &menu, &cfg).unwrap();
        assert_eq!(classify_attempt(&t, &prev).unwrap(), AttemptOutcome::Success);
        assert!(TaskSpec::practice_stage(5).is_none());
        assert_eq!(TaskSpec::preset("stage4"), Some(TaskSpec::target8()));
    }

    #[test]
    fn split_by_cycles() {
        let mut events = attempt(2, &[(100, EventKind::OnePressRelease)]);
        let other = Key::new("a").unwrap();
        events.push(KeyEventRecord::new(2000, other.clone(), EventKind::ClassicalDepress));
        events.push(ev(2100, EventKind::ClassicalDepress));
        events.push(ev(2100, EventKind::ClassicalRelease));
        events.push(KeyEventRecord::new(2200, other, EventKind::ClassicalRelease));
        events.push(ev(3000, EventKind::OnePressEnter));
        let split = split_attempts(&events, &key());
        assert_eq!(split.len(), 3);
        assert_eq!(split[0].len(), 4);
        assert!(split[1].is_empty());
        assert_eq!(split[2].len(), 1);
    }

    #[test]
    fn run_trial_counts_only_requested_attempts() {
        let good = attempt(8, &[(900, EventKind::HardRepeat), (1200, EventKind::OnePressRelease)]);
        let bad = attempt(1, &[(50, EventKind::OnePressRelease)]);
        let mut attempts = vec![good.clone(); 10];
        attempts.push(bad);
        let log = run_trial("s", &TaskSpec::target8(), &attempts, &WytiwygConfig::default()).unwrap();
        assert_eq!(log.attempts.len(), 10);
        assert_eq!(log.score(), 10);
        assert_eq!(log.failures(), 0);
        assert!(log.category_counts().values().all(|&c| c == 0));
        assert!(log.attempts[0].duration_ms > 0);

        let err = run_trial("s", &TaskSpec::target8(), &attempts[..4], &WytiwygConfig::default());
        assert!(matches!(err, Err(Error::NotEnoughAttempts { needed: 10, got: 4 })));
    }

    #[test]
    fn transcripts_end_in_engine_terminal() {
        let menu = Arc::new(MenuModel::numbered(10).unwrap());
        let a = attempt(8, &[(900, EventKind::HardRepeat)]);
        let mut driver = EngineDriver::new(menu, WytiwygConfig::default(), key()).unwrap();
        for e in &a {
            driver.on_event(e);
        }
        assert_eq!(driver.state().phase, Phase::Committed { cursor: 8 });
    }
}
