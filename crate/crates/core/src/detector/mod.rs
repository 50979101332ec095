//! Per-key one-press detector.
//!
//! Every key runs an independent state machine over its trailing-average
//! smoothed force `f`:
//!
//! ```text
//!            f > release              f > soft_band_max
//!   Idle ─────────────────▶ Contact ─────────────────────▶ ClassicalDown
//!    ▲                        │  │    (ClassicalDepress)        │
//!    │  f < release           │  │ held in soft band            │ f < release
//!    │  (Depress + Release)   │  │ for hold_timeout             │ (ClassicalRelease)
//!    ├────────────────────────┘  ▼ (OnePressEnter)              │
//!    │                        OnePress ◀────────────────────────┘
//!    │  f < release (OnePressRelease)   Baseline ─▶ PeakCandidate ─▶ Refractory ─▶ Baseline
//!    └──────────────────────────────
//! ```
//!
//! Inside one-press mode a peak candidate opens when the derivative of `f`
//! exceeds `onset_slope_n_per_s` and commits at the first sample whose
//! derivative is `<= 0`. The committed apex is labeled by amplitude alone.
//! Peak events carry the apex timestamp. A candidate whose apex stays below
//! `medium_min_apex_n` is dropped and does not start a refractory period.
//!
//! Time comes only from sample timestamps.

mod events;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ForceSample, Key};

pub use events::{read_events, write_events};

/// Assumed sample spacing when a key has produced only one sample.
const FALLBACK_INTERVAL_MS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub usable_floor_n: f64,
    pub usable_ceiling_n: f64,
    /// Upper bound of a "soft" hold.
    pub soft_band_max_n: f64,
    pub hold_timeout_ms: u64,
    pub smooth_window_samples: usize,
    pub onset_slope_n_per_s: f64,
    pub medium_min_apex_n: f64,
    pub hard_min_apex_n: f64,
    pub refractory_ms: u64,
    /// Below this the key counts as released.
    pub release_floor_n: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            usable_floor_n: 0.6,
            usable_ceiling_n: 3.0,
            soft_band_max_n: 1.2,
            hold_timeout_ms: 500,
            smooth_window_samples: 3,
            onset_slope_n_per_s: 4.0,
            medium_min_apex_n: 1.2,
            hard_min_apex_n: 2.0,
            refractory_ms: 120,
            release_floor_n: 0.1,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let forces = [
            self.usable_floor_n,
            self.usable_ceiling_n,
            self.soft_band_max_n,
            self.onset_slope_n_per_s,
            self.medium_min_apex_n,
            self.hard_min_apex_n,
            self.release_floor_n,
        ];
        if forces.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidConfig("detector thresholds must be finite".into()));
        }
        let ordered = self.usable_floor_n < self.soft_band_max_n
            && self.soft_band_max_n <= self.medium_min_apex_n
            && self.medium_min_apex_n < self.hard_min_apex_n
            && self.hard_min_apex_n <= self.usable_ceiling_n;
        if !ordered {
            return Err(Error::InvalidConfig(format!(
                "thresholds must satisfy usable_floor ({}) < soft_band_max ({}) <= medium_min_apex ({}) \
                 < hard_min_apex ({}) <= usable_ceiling ({})",
                self.usable_floor_n,
                self.soft_band_max_n,
                self.medium_min_apex_n,
                self.hard_min_apex_n,
                self.usable_ceiling_n
            )));
        }
        if self.hold_timeout_ms == 0 {
            return Err(Error::InvalidConfig("hold_timeout_ms must be > 0".into()));
        }
        if self.smooth_window_samples == 0 {
            return Err(Error::InvalidConfig("smooth_window_samples must be >= 1".into()));
        }
        if !(self.release_floor_n < self.usable_floor_n) {
            return Err(Error::InvalidConfig(format!(
                "release_floor_n ({}) must be below usable_floor_n ({})",
                self.release_floor_n, self.usable_floor_n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    ClassicalDepress,
    ClassicalRelease,
    OnePressEnter,
    MediumRepeat,
    HardRepeat,
    OnePressRelease,
}

impl EventKind {
    pub fn is_peak(self) -> bool {
        matches!(self, EventKind::MediumRepeat | EventKind::HardRepeat)
    }

    pub fn is_classical(self) -> bool {
        matches!(self, EventKind::ClassicalDepress | EventKind::ClassicalRelease)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyEventRecord {
    pub t_ms: u64,
    pub key: Key,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apex_n: Option<f64>,
}

impl KeyEventRecord {
    pub fn new(t_ms: u64, key: Key, kind: EventKind) -> Self {
        KeyEventRecord {
            t_ms,
            key,
            kind,
            apex_n: None,
        }
    }

    pub fn peak(t_ms: u64, key: Key, kind: EventKind, apex_n: f64) -> Self {
        KeyEventRecord {
            t_ms,
            key,
            kind,
            apex_n: Some(apex_n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApexClass {
    None,
    Medium,
    Hard,
}

/// Amplitude-only labeling of a committed apex.
pub fn classify_apex(apex_n: f64, config: &DetectorConfig) -> ApexClass {
    if apex_n >= config.hard_min_apex_n {
        ApexClass::Hard
    } else if apex_n >= config.medium_min_apex_n {
        ApexClass::Medium
    } else {
        ApexClass::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OnePressPhase {
    Baseline,
    PeakCandidate {
        onset_t: u64,
        apex_t: u64,
        apex_n: f64,
    },
    Refractory {
        until_t: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KeyPhase {
    Idle,
    Contact { t_start: u64 },
    ClassicalDown,
    OnePress(OnePressPhase),
}

#[derive(Debug, Clone)]
struct KeyTrack {
    phase: KeyPhase,
    window: VecDeque<f64>,
    last_t: Option<u64>,
    last_smoothed: f64,
    last_gap: Option<u64>,
}

impl KeyTrack {
    fn new(width: usize) -> Self {
        KeyTrack {
            phase: KeyPhase::Idle,
            window: VecDeque::with_capacity(width),
            last_t: None,
            last_smoothed: 0.0,
            last_gap: None,
        }
    }
}

/// Streaming detector holding one state machine per key.
///
/// Not shareable between threads while feeding; callers serialize access.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectorConfig,
    keys: BTreeMap<Key, KeyTrack>,
}

impl Detector {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Detector {
            config,
            keys: BTreeMap::new(),
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn phase(&self, key: &Key) -> KeyPhase {
        self.keys.get(key).map_or(KeyPhase::Idle, |k| k.phase)
    }

    /// Feeds one sample. A rejected sample leaves the state untouched.
    pub fn feed(&mut self, sample: &ForceSample) -> Result<Vec<KeyEventRecord>> {
        sample.validate()?;
        let cfg = self.config;
        let track = self
            .keys
            .entry(sample.key.clone())
            .or_insert_with(|| KeyTrack::new(cfg.smooth_window_samples));
        if let Some(prev) = track.last_t {
            if sample.t_ms <= prev {
                return Err(Error::NonMonotonic {
                    key: sample.key.to_string(),
                    previous: prev,
                    current: sample.t_ms,
                });
            }
        }

        track.window.push_back(sample.force_n);
        if track.window.len() > cfg.smooth_window_samples {
            track.window.pop_front();
        }
        let smoothed = track.window.iter().sum::<f64>() / track.window.len() as f64;
        let slope = match track.last_t {
            Some(prev) => (smoothed - track.last_smoothed) * 1000.0 / (sample.t_ms - prev) as f64,
            None => 0.0,
        };
        if let Some(prev) = track.last_t {
            track.last_gap = Some(sample.t_ms - prev);
        }
        track.last_t = Some(sample.t_ms);
        track.last_smoothed = smoothed;

        let mut out = Vec::new();
        track.phase = step(
            &cfg,
            track.phase,
            &sample.key,
            sample.t_ms,
            smoothed,
            slope,
            &mut out,
        );
        Ok(out)
    }

    /// Earliest timestamp a not yet emitted peak event could carry: the
    /// current apex of the earliest open peak candidate on any key.
    pub fn pending_stamp(&self) -> Option<u64> {
        self.keys
            .values()
            .filter_map(|k| match k.phase {
                KeyPhase::OnePress(OnePressPhase::PeakCandidate { apex_t, .. }) => Some(apex_t),
                _ => None,
            })
            .min()
    }

    /// Closes every open cycle as if force dropped to zero one sample
    /// interval after the last sample of that key, then forgets all keys.
    pub fn end_of_stream(&mut self) -> Vec<KeyEventRecord> {
        let mut out = Vec::new();
        for (key, track) in std::mem::take(&mut self.keys) {
            let Some(last_t) = track.last_t else { continue };
            let t = last_t + track.last_gap.unwrap_or(FALLBACK_INTERVAL_MS);
            close_cycle(track.phase, &key, t, &mut out);
        }
        out
    }
}

fn close_cycle(phase: KeyPhase, key: &Key, t: u64, out: &mut Vec<KeyEventRecord>) {
    match phase {
        KeyPhase::Idle => {}
        KeyPhase::Contact { .. } => {
            out.push(KeyEventRecord::new(t, key.clone(), EventKind::ClassicalDepress));
            out.push(KeyEventRecord::new(t, key.clone(), EventKind::ClassicalRelease));
        }
        KeyPhase::ClassicalDown => {
            out.push(KeyEventRecord::new(t, key.clone(), EventKind::ClassicalRelease));
        }
        KeyPhase::OnePress(_) => {
            out.push(KeyEventRecord::new(t, key.clone(), EventKind::OnePressRelease));
        }
    }
}

fn step(
    cfg: &DetectorConfig,
    phase: KeyPhase,
    key: &Key,
    t: u64,
    f: f64,
    slope: f64,
    out: &mut Vec<KeyEventRecord>,
) -> KeyPhase {
    let released = f < cfg.release_floor_n;
    match phase {
        KeyPhase::Idle => {
            if f > cfg.release_floor_n {
                step(cfg, KeyPhase::Contact { t_start: t }, key, t, f, slope, out)
            } else {
                KeyPhase::Idle
            }
        }
        KeyPhase::Contact { t_start } => {
            if released {
                close_cycle(phase, key, t, out);
                KeyPhase::Idle
            } else if f > cfg.soft_band_max_n {
                out.push(KeyEventRecord::new(t, key.clone(), EventKind::ClassicalDepress));
                KeyPhase::ClassicalDown
            } else if t - t_start >= cfg.hold_timeout_ms {
                out.push(KeyEventRecord::new(t, key.clone(), EventKind::OnePressEnter));
                KeyPhase::OnePress(OnePressPhase::Baseline)
            } else {
                phase
            }
        }
        KeyPhase::ClassicalDown => {
            if released {
                close_cycle(phase, key, t, out);
                KeyPhase::Idle
            } else {
                phase
            }
        }
        KeyPhase::OnePress(_) if released => {
            close_cycle(phase, key, t, out);
            KeyPhase::Idle
        }
        KeyPhase::OnePress(sub) => KeyPhase::OnePress(one_press_step(cfg, sub, key, t, f, slope, out)),
    }
}

fn one_press_step(
    cfg: &DetectorConfig,
    sub: OnePressPhase,
    key: &Key,
    t: u64,
    f: f64,
    slope: f64,
    out: &mut Vec<KeyEventRecord>,
) -> OnePressPhase {
    match sub {
        OnePressPhase::Baseline => {
            if slope > cfg.onset_slope_n_per_s {
                OnePressPhase::PeakCandidate {
                    onset_t: t,
                    apex_t: t,
                    apex_n: f,
                }
            } else {
                sub
            }
        }
        OnePressPhase::PeakCandidate {
            onset_t,
            apex_t,
            apex_n,
        } => {
            if slope <= 0.0 {
                let apex = apex_n.min(cfg.usable_ceiling_n);
                let kind = match classify_apex(apex, cfg) {
                    ApexClass::None => return OnePressPhase::Baseline,
                    ApexClass::Medium => EventKind::MediumRepeat,
                    ApexClass::Hard => EventKind::HardRepeat,
                };
                out.push(KeyEventRecord::peak(apex_t, key.clone(), kind, apex));
                OnePressPhase::Refractory {
                    until_t: apex_t + cfg.refractory_ms,
                }
            } else if f > apex_n {
                OnePressPhase::PeakCandidate {
                    onset_t,
                    apex_t: t,
                    apex_n: f,
                }
            } else {
                sub
            }
        }
        OnePressPhase::Refractory { until_t } => {
            if t >= until_t {
                one_press_step(cfg, OnePressPhase::Baseline, key, t, f, slope, out)
            } else {
                sub
            }
        }
    }
}

/// Runs a whole trace through a fresh detector, samples ordered by
/// `(t_ms, key)`, and closes the stream at the end.
pub fn detect_trace(samples: &[ForceSample], config: &DetectorConfig) -> Result<Vec<KeyEventRecord>> {
    let mut ordered: Vec<&ForceSample> = samples.iter().collect();
    ordered.sort_by(|a, b| (a.t_ms, &a.key).cmp(&(b.t_ms, &b.key)));
    let mut detector = Detector::new(*config)?;
    let mut events = Vec::new();
    for s in ordered {
        events.extend(detector.feed(s)?);
    }
    events.extend(detector.end_of_stream());
    Ok(events)
}
