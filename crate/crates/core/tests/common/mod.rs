//! Test oracles and corpora shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use onepress::detector::{DetectorConfig, EventKind, KeyEventRecord};
use onepress::signal::{synthesize_trace, ForceSample, Key, PressScript, Segment, SensorModel};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn regen() -> bool {
    std::env::var_os("ONEPRESS_REGEN_FIXTURES").is_some_and(|v| v == "1")
}

pub fn key(name: &str) -> Key {
    Key::new(name).unwrap()
}

/// Whole-trace reference detector.
///
/// Works on complete per-key arrays of smoothed force and slope and scans
/// forward with index searches instead of a per-sample state machine.
/// Events are ordered by the sample that resolves them, keys breaking
/// ties, with stream-end closures last in key order.
pub fn reference_detect(samples: &[ForceSample], cfg: &DetectorConfig) -> Vec<KeyEventRecord> {
    let mut per_key: BTreeMap<Key, Vec<(u64, f64)>> = BTreeMap::new();
    let mut ordered: Vec<&ForceSample> = samples.iter().collect();
    ordered.sort_by(|a, b| (a.t_ms, &a.key).cmp(&(b.t_ms, &b.key)));
    for s in ordered {
        per_key.entry(s.key.clone()).or_default().push((s.t_ms, s.force_n));
    }

    // (resolving time, key, sequence, event)
    let mut timed: Vec<(u64, Key, usize, KeyEventRecord)> = Vec::new();
    let mut closing = Vec::new();
    for (key, raw) in &per_key {
        let (timed_key, close) = reference_key(key, raw, cfg);
        timed.extend(
            timed_key
                .into_iter()
                .enumerate()
                .map(|(i, (at, e))| (at, key.clone(), i, e)),
        );
        closing.extend(close);
    }
    timed.sort_by(|a, b| (a.0, &a.1, a.2).cmp(&(b.0, &b.1, b.2)));
    timed
        .into_iter()
        .map(|(.., e)| e)
        .chain(closing)
        .collect()
}

fn reference_key(
    key: &Key,
    raw: &[(u64, f64)],
    cfg: &DetectorConfig,
) -> (Vec<(u64, KeyEventRecord)>, Vec<KeyEventRecord>) {
    let n = raw.len();
    let t: Vec<u64> = raw.iter().map(|s| s.0).collect();
    let w = cfg.smooth_window_samples;
    let f: Vec<f64> = (0..n)
        .map(|k| {
            let lo = (k + 1).saturating_sub(w);
            let window = &raw[lo..=k];
            window.iter().map(|s| s.1).sum::<f64>() / window.len() as f64
        })
        .collect();
    let slope: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                (f[k] - f[k - 1]) * 1000.0 / (t[k] - t[k - 1]) as f64
            }
        })
        .collect();

    let ev = |k: usize, kind| (t[k], KeyEventRecord::new(t[k], key.clone(), kind));
    let rf = cfg.release_floor_n;
    let released = |k: usize| f[k] < rf;
    let find = |from: usize, pred: &dyn Fn(usize) -> bool| (from..n).find(|&k| pred(k));

    let mut out = Vec::new();
    let end_t = match n {
        0 => return (out, Vec::new()),
        1 => t[0] + 10,
        _ => t[n - 1] + (t[n - 1] - t[n - 2]),
    };
    let closing = |kinds: &[EventKind]| {
        kinds
            .iter()
            .map(|&kind| KeyEventRecord::new(end_t, key.clone(), kind))
            .collect::<Vec<_>>()
    };

    let mut i = 0;
    loop {
        let Some(start) = find(i, &|k| f[k] > rf) else {
            return (out, Vec::new());
        };
        // Contact: first sample deciding release, firm strike or timeout.
        let decided = find(start, &|k| {
            released(k) || f[k] > cfg.soft_band_max_n || t[k] - t[start] >= cfg.hold_timeout_ms
        });
        let Some(d) = decided else {
            return (
                out,
                closing(&[EventKind::ClassicalDepress, EventKind::ClassicalRelease]),
            );
        };
        if released(d) {
            out.push(ev(d, EventKind::ClassicalDepress));
            out.push(ev(d, EventKind::ClassicalRelease));
            i = d + 1;
            continue;
        }
        if f[d] > cfg.soft_band_max_n {
            out.push(ev(d, EventKind::ClassicalDepress));
            match find(d + 1, &|k| released(k)) {
                Some(r) => {
                    out.push(ev(r, EventKind::ClassicalRelease));
                    i = r + 1;
                    continue;
                }
                None => return (out, closing(&[EventKind::ClassicalRelease])),
            }
        }
        out.push(ev(d, EventKind::OnePressEnter));

        // One-press mode: q is the next sample evaluated as baseline.
        let mut q = d + 1;
        let release_at = loop {
            let Some(onset) = find(q, &|k| released(k) || slope[k] > cfg.onset_slope_n_per_s) else {
                break None;
            };
            if released(onset) {
                break Some(onset);
            }
            let mut apex = (onset, f[onset]);
            let mut commit = None;
            for r in onset + 1..n {
                if released(r) || slope[r] <= 0.0 {
                    commit = Some(r);
                    break;
                }
                if f[r] > apex.1 {
                    apex = (r, f[r]);
                }
            }
            let Some(c) = commit else { break None };
            if released(c) {
                break Some(c);
            }
            let value = if apex.1 > cfg.usable_ceiling_n {
                cfg.usable_ceiling_n
            } else {
                apex.1
            };
            let kind = if value >= cfg.hard_min_apex_n {
                Some(EventKind::HardRepeat)
            } else if value >= cfg.medium_min_apex_n {
                Some(EventKind::MediumRepeat)
            } else {
                None
            };
            match kind {
                None => q = c + 1,
                Some(kind) => {
                    out.push((t[c], KeyEventRecord::peak(t[apex.0], key.clone(), kind, value)));
                    let until = t[apex.0] + cfg.refractory_ms;
                    match find(c + 1, &|k| released(k) || t[k] >= until) {
                        None => break None,
                        Some(k) if released(k) => break Some(k),
                        Some(k) => q = k,
                    }
                }
            }
        };
        match release_at {
            Some(r) => {
                out.push(ev(r, EventKind::OnePressRelease));
                i = r + 1;
            }
            None => return (out, closing(&[EventKind::OnePressRelease])),
        }
    }
}

/// Checks exclusivity, lifecycle pairing, ordering, apex range and
/// refractory spacing per key. Returns one message per violation.
pub fn lifecycle_violations(events: &[KeyEventRecord], cfg: &DetectorConfig) -> Vec<String> {
    #[derive(PartialEq)]
    enum Open {
        None,
        Classical,
        OnePress,
    }
    struct Track {
        open: Open,
        last_t: u64,
        last_peak: Option<u64>,
    }
    let mut tracks: BTreeMap<&Key, Track> = BTreeMap::new();
    let mut bad = Vec::new();
    for e in events {
        let tr = tracks.entry(&e.key).or_insert(Track {
            open: Open::None,
            last_t: 0,
            last_peak: None,
        });
        if e.t_ms < tr.last_t {
            bad.push(format!("time goes backwards at {e:?}"));
        }
        tr.last_t = e.t_ms;
        let expected = match e.kind {
            EventKind::ClassicalDepress | EventKind::OnePressEnter => Open::None,
            EventKind::ClassicalRelease => Open::Classical,
            EventKind::MediumRepeat | EventKind::HardRepeat | EventKind::OnePressRelease => Open::OnePress,
        };
        if tr.open != expected {
            bad.push(format!("{:?} out of place at t={}", e.kind, e.t_ms));
        }
        tr.open = match e.kind {
            EventKind::ClassicalDepress => Open::Classical,
            EventKind::OnePressEnter => Open::OnePress,
            EventKind::ClassicalRelease | EventKind::OnePressRelease => Open::None,
            _ => Open::OnePress,
        };
        if e.kind.is_peak() {
            match e.apex_n {
                Some(a) if a >= cfg.medium_min_apex_n && a <= cfg.usable_ceiling_n => {}
                other => bad.push(format!("apex {other:?} out of range at t={}", e.t_ms)),
            }
            if let Some(prev) = tr.last_peak {
                if e.t_ms - prev < cfg.refractory_ms {
                    bad.push(format!("peaks at {prev} and {} violate refractory", e.t_ms));
                }
            }
            tr.last_peak = Some(e.t_ms);
        } else if e.apex_n.is_some() {
            bad.push(format!("apex on {:?}", e.kind));
        }
    }
    for (key, tr) in tracks {
        if tr.open != Open::None {
            bad.push(format!("cycle left open on {key}"));
        }
    }
    bad
}

/// A generated script plus the sensor it is synthesized with.
pub struct CorpusTrace {
    pub scripts: Vec<PressScript>,
    pub sensor: SensorModel,
    pub seed: u64,
}

impl CorpusTrace {
    pub fn samples(&self) -> Vec<ForceSample> {
        let mut all = Vec::new();
        for (i, s) in self.scripts.iter().enumerate() {
            all.extend(synthesize_trace(s, &self.sensor, self.seed.wrapping_add(i as u64)).unwrap());
        }
        all
    }
}

fn ramps(rng: &mut ChaCha8Rng, seg: Segment, duration: u64) -> Segment {
    let rise = rng.random_range(0..=duration / 2);
    let fall = rng.random_range(0..=duration - rise);
    seg.with_ramps(rise, fall)
}

/// Random press script mixing every segment kind.
pub fn random_script(rng: &mut ChaCha8Rng, key: Key) -> PressScript {
    let mut script = PressScript::new(key);
    let segments = rng.random_range(3..14);
    let mut holding = false;
    for _ in 0..segments {
        let roll = rng.random_range(0..10);
        let seg = match roll {
            0..=1 => {
                holding = false;
                let d = rng.random_range(20..400);
                Segment::idle(d).with_ramps(0, rng.random_range(0..=d.min(60)))
            }
            2..=3 => {
                holding = false;
                let d = rng.random_range(40..400);
                let f = rng.random_range(0.2..3.6);
                ramps(rng, Segment::quick_strike(d, f), d)
            }
            4..=5 => {
                holding = true;
                let d = rng.random_range(50..1500);
                let rise = rng.random_range(0..=d.min(120));
                Segment::soft_hold(d, rng.random_range(0.05..1.5)).with_ramps(rise, 0)
            }
            _ if holding => {
                let d = rng.random_range(60..700);
                let apex = rng.random_range(0.5..3.8);
                ramps(rng, Segment::peak(d, apex), d)
            }
            _ => {
                holding = true;
                Segment::soft_hold(rng.random_range(400..900), rng.random_range(0.3..1.1))
            }
        };
        script.push(seg);
    }
    script
}

/// Seeded random corpus: one or two keys per trace, varied noise and rate.
pub fn random_corpus(count: usize, seed: u64) -> Vec<CorpusTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rates = [50.0, 100.0, 125.0, 200.0, 250.0, 500.0, 1000.0];
    (0..count)
        .map(|i| {
            let keys = if rng.random_bool(0.25) { 2 } else { 1 };
            let scripts = (0..keys)
                .map(|k| random_script(&mut rng, key(["space", "f4"][k])))
                .collect();
            let noise = if rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(0.0..0.1)
            };
            CorpusTrace {
                scripts,
                sensor: SensorModel {
                    sample_rate_hz: rates[rng.random_range(0..rates.len())],
                    ..SensorModel::default()
                }
                .with_noise(noise),
                seed: seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            }
        })
        .collect()
}

/// Intended label and time window of one scripted peak.
#[derive(Debug, Clone, Copy)]
pub struct PlannedPeak {
    pub kind: EventKind,
    pub apex_n: f64,
    pub start_ms: u64,
    pub end_ms: u64,
}

pub const PLATEAU_N: f64 = 0.8;
pub const HOLD_MS: u64 = 1200;
pub const PEAK_MS: u64 = 500;
pub const PEAK_RAMP_MS: u64 = 100;
pub const PEAKS_PER_SCRIPT: usize = 5;

/// Soft hold followed by peaks with apices at least 0.15 N inside the
/// medium band [1.2, 2.0) or the hard band [2.0, 3.0].
pub fn accuracy_script(rng: &mut ChaCha8Rng) -> (PressScript, Vec<PlannedPeak>) {
    let mut script = PressScript::new(key("space")).then(Segment::soft_hold(HOLD_MS, PLATEAU_N));
    let mut planned = Vec::new();
    let mut t = HOLD_MS;
    for _ in 0..PEAKS_PER_SCRIPT {
        let (kind, apex) = if rng.random_bool(0.5) {
            (EventKind::MediumRepeat, rng.random_range(1.35..=1.85))
        } else {
            (EventKind::HardRepeat, rng.random_range(2.15..=2.85))
        };
        script.push(Segment::peak(PEAK_MS, apex).with_ramps(PEAK_RAMP_MS, PEAK_RAMP_MS));
        planned.push(PlannedPeak {
            kind,
            apex_n: apex,
            start_ms: t,
            end_ms: t + PEAK_MS,
        });
        t += PEAK_MS;
    }
    script.push(Segment::idle(300));
    (script, planned)
}

/// The canonical scripts exercised by golden files.
pub fn canonical_scripts() -> Vec<(&'static str, PressScript)> {
    let k = key("space");
    vec![
        (
            "firm_strike",
            PressScript::new(k.clone())
                .then(Segment::quick_strike(150, 2.0))
                .then(Segment::idle(100)),
        ),
        (
            "soft_tap",
            PressScript::new(k.clone())
                .then(Segment::soft_hold(200, 0.8))
                .then(Segment::idle(100)),
        ),
        (
            "soft_hold",
            PressScript::new(k.clone())
                .then(Segment::soft_hold(2000, 0.8))
                .then(Segment::idle(200)),
        ),
        (
            "medium_hard",
            PressScript::new(k)
                .then(Segment::soft_hold(700, 0.8))
                .then(Segment::peak(400, 1.6))
                .then(Segment::peak(400, 2.4))
                .then(Segment::idle(200)),
        ),
    ]
}

/// A subject executing the target-8 task perfectly, `attempts` times.
pub fn perfect_subject_script(attempts: usize) -> PressScript {
    let mut script = PressScript::new(key("space"));
    for _ in 0..attempts {
        script.push(Segment::soft_hold(700, 0.8));
        for i in 0..8 {
            // The last medium press is held long enough to dwell.
            let d = if i == 7 { 1400 } else { 350 };
            script.push(Segment::peak(d, 1.6));
        }
        script.push(Segment::peak(400, 2.5));
        script.push(Segment::idle(600));
    }
    script
}

pub fn kinds(events: &[KeyEventRecord]) -> Vec<EventKind> {
    events.iter().map(|e| e.kind).collect()
}

pub fn events_jsonl(events: &[KeyEventRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    onepress::detector::write_events(events, &mut buf).unwrap();
    buf
}

/// Samples as inbound `sample` lines, in feed order.
pub fn sample_lines(samples: &[ForceSample]) -> Vec<String> {
    let mut ordered: Vec<&ForceSample> = samples.iter().collect();
    ordered.sort_by(|a, b| (a.t_ms, &a.key).cmp(&(b.t_ms, &b.key)));
    ordered
        .into_iter()
        .map(|s| {
            serde_json::json!({"type": "sample", "key": s.key.as_str(), "t_ms": s.t_ms, "force_n": s.force_n})
                .to_string()
        })
        .collect()
}

/// Outbound lines of an in-process gateway session fed `samples`.
pub fn online_wire(samples: &[ForceSample]) -> Vec<String> {
    use onepress::gateway::{MenuLibrary, Session};
    let mut session = Session::new(
        std::sync::Arc::new(MenuLibrary::builtin()),
        onepress::config::Config::default(),
    );
    let mut out: Vec<String> = session
        .handle_line(r#"{"type":"config"}"#)
        .iter()
        .map(|m| m.to_line())
        .collect();
    for line in sample_lines(samples) {
        out.extend(session.handle_line(&line).iter().map(|m| m.to_line()));
    }
    out.extend(session.handle_line(r#"{"type":"end"}"#).iter().map(|m| m.to_line()));
    out
}

/// Offline `detect` followed by `replay`, as wire lines.
pub fn offline_wire(samples: &[ForceSample]) -> Vec<String> {
    use onepress::gateway::{replay_events, DEFAULT_ENGINE_KEY, DEFAULT_MENU};
    use onepress::wytiwyg::{EngineDriver, MenuModel, WytiwygConfig};
    let events = onepress::detector::detect_trace(samples, &DetectorConfig::default()).unwrap();
    let mut driver = EngineDriver::new(
        std::sync::Arc::new(MenuModel::builtin(DEFAULT_MENU).unwrap()),
        WytiwygConfig::default(),
        key(DEFAULT_ENGINE_KEY),
    )
    .unwrap();
    replay_events(&events, &mut driver)
        .iter()
        .map(|m| m.to_line())
        .collect()
}
