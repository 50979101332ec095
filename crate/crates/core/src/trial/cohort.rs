//! Seeded 70-attempt cohort fixture for the target-8 task.
//!
//! Seven simulated subjects with ten counted attempts each. Per-subject
//! scores are [`SCORES`] (52 successes, mean 7.43), and the 18 failures are
//! split across categories as [`FAILURE_SPLIT`]. Which attempt fails in
//! which way, and all event timing, is drawn from [`COHORT_SEED`]. The
//! first subject gets five extra perfect attempts after the ten counted
//! ones, which a trial must ignore.
//!
//! This is synthetic data shaped to those totals, not recorded behavior.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FailureCategory;
use crate::detector::{EventKind, KeyEventRecord};
use crate::signal::Key;

pub const COHORT_SEED: u64 = 2010;
pub const SCORES: [usize; 7] = [5, 9, 8, 7, 8, 7, 8];
pub const FAILURE_SPLIT: [(FailureCategory, usize); 4] = [
    (FailureCategory::UnintendedRelease, 8),
    (FailureCategory::MediumAsHardMixup, 5),
    (FailureCategory::HardAsMediumMixup, 3),
    (FailureCategory::Other, 2),
];
const EXTRA_ATTEMPTS_FIRST_SUBJECT: usize = 5;

/// Planned outcome of every counted attempt, per subject.
pub fn plan() -> Vec<Vec<Option<FailureCategory>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(COHORT_SEED);
    let mut failures: Vec<FailureCategory> = FAILURE_SPLIT
        .iter()
        .flat_map(|&(c, n)| std::iter::repeat_n(c, n))
        .collect();
    failures.shuffle(&mut rng);
    let mut failures = failures.into_iter();
    SCORES
        .iter()
        .map(|&score| {
            let mut attempts: Vec<Option<FailureCategory>> = vec![None; score];
            attempts.extend(failures.by_ref().take(10 - score).map(Some));
            attempts.shuffle(&mut rng);
            attempts
        })
        .collect()
}

/// Event streams for the seven subjects, named `subject-01` and so on.
pub fn reference_cohort() -> Vec<(String, Vec<KeyEventRecord>)> {
    let key = Key::new("space").expect("valid key");
    let mut rng = ChaCha8Rng::seed_from_u64(COHORT_SEED.wrapping_add(1));
    plan()
        .into_iter()
        .enumerate()
        .map(|(i, mut attempts)| {
            if i == 0 {
                attempts.extend(std::iter::repeat_n(None, EXTRA_ATTEMPTS_FIRST_SUBJECT));
            }
            let mut session = Session {
                key: key.clone(),
                t: 1000,
                events: Vec::new(),
            };
            for planned in attempts {
                session.attempt(planned, &mut rng);
                session.t += rng.random_range(2000..3000);
            }
            (format!("subject-{:02}", i + 1), session.events)
        })
        .collect()
}

struct Session {
    key: Key,
    t: u64,
    events: Vec<KeyEventRecord>,
}

impl Session {
    fn emit(&mut self, kind: EventKind) {
        self.events.push(KeyEventRecord::new(self.t, self.key.clone(), kind));
    }

    fn peak(&mut self, kind: EventKind, apex_n: f64) {
        let apex = (apex_n * 100.0).round() / 100.0;
        self.events
            .push(KeyEventRecord::peak(self.t, self.key.clone(), kind, apex));
    }

    fn mediums(&mut self, n: usize, rng: &mut ChaCha8Rng) {
        for _ in 0..n {
            self.t += rng.random_range(280..420);
            self.peak(EventKind::MediumRepeat, rng.random_range(1.4..1.8));
        }
    }

    fn dwell(&mut self, rng: &mut ChaCha8Rng) {
        self.t += rng.random_range(950..1300);
    }

    fn hard(&mut self, rng: &mut ChaCha8Rng) {
        self.peak(EventKind::HardRepeat, rng.random_range(2.2..2.8));
    }

    fn release_after(&mut self, lo: u64, hi: u64, rng: &mut ChaCha8Rng) {
        self.t += rng.random_range(lo..hi);
        self.emit(EventKind::OnePressRelease);
    }

    fn attempt(&mut self, planned: Option<FailureCategory>, rng: &mut ChaCha8Rng) {
        // Quick aborted keypress: never reaches one-press mode.
        if planned == Some(FailureCategory::UnintendedRelease) && rng.random_bool(0.25) {
            self.t += rng.random_range(150..400);
            self.emit(EventKind::ClassicalDepress);
            self.emit(EventKind::ClassicalRelease);
            return;
        }
        self.emit(EventKind::OnePressEnter);
        match planned {
            None => {
                self.mediums(8, rng);
                self.dwell(rng);
                self.hard(rng);
                self.release_after(200, 400, rng);
            }
            Some(FailureCategory::UnintendedRelease) => {
                if rng.random_bool(0.5) {
                    let k = rng.random_range(2..=7);
                    self.mediums(k, rng);
                    self.release_after(100, 300, rng);
                } else {
                    // Released while the target preview was up.
                    self.mediums(8, rng);
                    self.dwell(rng);
                    self.release_after(100, 500, rng);
                }
            }
            Some(FailureCategory::MediumAsHardMixup) => {
                self.mediums(8, rng);
                self.dwell(rng);
                self.t += rng.random_range(0..150);
                self.peak(EventKind::MediumRepeat, rng.random_range(1.7..1.95));
                self.release_after(300, 600, rng);
            }
            Some(FailureCategory::HardAsMediumMixup) => {
                let k = rng.random_range(3..=7);
                self.mediums(k, rng);
                self.t += rng.random_range(280..420);
                self.peak(EventKind::HardRepeat, rng.random_range(2.05..2.3));
                if rng.random_bool(0.5) {
                    self.release_after(300, 600, rng);
                } else {
                    // Gives up and commits the option it stopped on.
                    self.dwell(rng);
                    self.hard(rng);
                    self.release_after(200, 400, rng);
                }
            }
            Some(FailureCategory::Other) => {
                self.mediums(9, rng);
                self.dwell(rng);
                self.hard(rng);
                self.release_after(200, 400, rng);
            }
        }
    }
}
