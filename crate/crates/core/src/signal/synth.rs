//! Press scripts and the simulated force sensor.
//!
//! A script is a list of segments for one key. Each segment ramps the force
//! envelope with a raised-cosine profile, `a + (b - a) * (1 - cos(pi * u)) / 2`
//! for `u` in `[0, 1]`, which is monotone over every ramp. Segment shapes:
//!
//! - `idle`: ramp the current level down to 0 over `fall_ms`, then stay at 0.
//! - `quick_strike`: ramp up to the target over `rise_ms`, hold, and ramp back
//!   to 0 over `fall_ms` so the segment ends released.
//! - `soft_hold`: ramp from the current level to the target over `rise_ms`
//!   and hold it. The held level becomes the baseline for later peaks.
//! - `peak`: ramp from the baseline to the apex over `rise_ms`, back to the
//!   baseline over `fall_ms`, then hold the baseline for the rest of the
//!   segment.
//!
//! The sensor reads the envelope at `sample_rate_hz`, adds seeded Gaussian
//! noise, reads 0 below `floor_n` and clamps at `saturation_n`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ForceSample, Key};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorModel {
    pub floor_n: f64,
    pub saturation_n: f64,
    pub noise_sigma_n: f64,
    pub sample_rate_hz: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel {
            floor_n: 0.6,
            saturation_n: 3.0,
            noise_sigma_n: 0.0,
            sample_rate_hz: 100.0,
        }
    }
}

impl SensorModel {
    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma_n = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.floor_n.is_finite() && self.saturation_n.is_finite()) {
            return bad("sensor floor and saturation must be finite".into());
        }
        if !(0.0 < self.floor_n && self.floor_n < self.saturation_n) {
            return bad(format!(
                "sensor needs 0 < floor_n < saturation_n, got {} and {}",
                self.floor_n, self.saturation_n
            ));
        }
        if !(self.noise_sigma_n.is_finite() && self.noise_sigma_n >= 0.0) {
            return bad(format!("noise_sigma_n must be >= 0, got {}", self.noise_sigma_n));
        }
        // Integer millisecond timestamps stay strictly increasing up to 1 kHz.
        if !(self.sample_rate_hz.is_finite()
            && self.sample_rate_hz > 0.0
            && self.sample_rate_hz <= 1000.0)
        {
            return bad(format!(
                "sample_rate_hz must be in (0, 1000], got {}",
                self.sample_rate_hz
            ));
        }
        Ok(())
    }

    /// Sensor transfer applied to one noisy envelope reading.
    pub fn condition(&self, force_n: f64) -> f64 {
        if force_n < self.floor_n {
            0.0
        } else {
            force_n.min(self.saturation_n)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Idle,
    QuickStrike,
    SoftHold,
    Peak,
}

impl SegmentKind {
    pub fn name(self) -> &'static str {
        match self {
            SegmentKind::Idle => "idle",
            SegmentKind::QuickStrike => "quick_strike",
            SegmentKind::SoftHold => "soft_hold",
            SegmentKind::Peak => "peak",
        }
    }

    fn default_rise_ms(self) -> u64 {
        match self {
            SegmentKind::Idle => 0,
            SegmentKind::QuickStrike => 20,
            SegmentKind::SoftHold => 40,
            SegmentKind::Peak => 60,
        }
    }

    fn default_fall_ms(self) -> u64 {
        match self {
            SegmentKind::Idle => 30,
            SegmentKind::QuickStrike => 20,
            SegmentKind::SoftHold => 0,
            SegmentKind::Peak => 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub duration_ms: u64,
    /// Hold level for `soft_hold` and `quick_strike`, apex for `peak`.
    #[serde(default)]
    pub target_force_n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rise_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fall_ms: Option<u64>,
}

impl Segment {
    pub fn new(kind: SegmentKind, duration_ms: u64, target_force_n: f64) -> Self {
        Segment {
            kind,
            duration_ms,
            target_force_n,
            rise_ms: None,
            fall_ms: None,
        }
    }

    pub fn idle(duration_ms: u64) -> Self {
        Segment::new(SegmentKind::Idle, duration_ms, 0.0)
    }

    pub fn quick_strike(duration_ms: u64, force_n: f64) -> Self {
        Segment::new(SegmentKind::QuickStrike, duration_ms, force_n)
    }

    pub fn soft_hold(duration_ms: u64, force_n: f64) -> Self {
        Segment::new(SegmentKind::SoftHold, duration_ms, force_n)
    }

    pub fn peak(duration_ms: u64, apex_n: f64) -> Self {
        Segment::new(SegmentKind::Peak, duration_ms, apex_n)
    }

    pub fn with_ramps(mut self, rise_ms: u64, fall_ms: u64) -> Self {
        self.rise_ms = Some(rise_ms);
        self.fall_ms = Some(fall_ms);
        self
    }

    pub fn rise(&self) -> u64 {
        self.rise_ms.unwrap_or_else(|| self.kind.default_rise_ms())
    }

    pub fn fall(&self) -> u64 {
        self.fall_ms.unwrap_or_else(|| self.kind.default_fall_ms())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressScript {
    pub key: Key,
    #[serde(default, rename = "segment")]
    pub segments: Vec<Segment>,
}

impl PressScript {
    pub fn new(key: Key) -> Self {
        PressScript {
            key,
            segments: Vec::new(),
        }
    }

    pub fn push(&mut self, segment: Segment) -> &mut Self {
        self.segments.push(segment);
        self
    }

    pub fn then(mut self, segment: Segment) -> Self {
        self.segments.push(segment);
        self
    }

    pub fn duration_ms(&self) -> u64 {
        self.segments.iter().map(|s| s.duration_ms).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let mut holding = false;
        for (index, seg) in self.segments.iter().enumerate() {
            let fail = |reason: String| Error::InvalidScript {
                index,
                kind: seg.kind.name(),
                reason,
            };
            if seg.duration_ms == 0 {
                return Err(fail("duration_ms must be > 0".into()));
            }
            if !seg.target_force_n.is_finite() || seg.target_force_n < 0.0 {
                return Err(fail(format!(
                    "target_force_n must be finite and >= 0, got {}",
                    seg.target_force_n
                )));
            }
            let (rise, fall) = (seg.rise(), seg.fall());
            let ramps = match seg.kind {
                SegmentKind::Idle => fall,
                SegmentKind::SoftHold => rise,
                SegmentKind::QuickStrike | SegmentKind::Peak => rise + fall,
            };
            if ramps > seg.duration_ms {
                return Err(fail(format!(
                    "ramps take {ramps} ms but the segment lasts {} ms",
                    seg.duration_ms
                )));
            }
            match seg.kind {
                SegmentKind::SoftHold => holding = true,
                SegmentKind::Idle | SegmentKind::QuickStrike => holding = false,
                SegmentKind::Peak if !holding => {
                    return Err(fail(
                        "a peak must follow a soft_hold within the same depress cycle".into(),
                    ))
                }
                SegmentKind::Peak => {}
            }
        }
        Ok(())
    }

    /// Piecewise envelope of the script; see the module docs for shapes.
    pub fn envelope(&self) -> Result<Envelope> {
        self.validate()?;
        let mut ramps = Vec::new();
        let mut start = 0.0_f64;
        let mut level = 0.0_f64;
        // Zero-length ramps are steps.
        let push = |ramps: &mut Vec<Ramp>, t0: f64, len: u64, from: f64, to: f64| {
            ramps.push(Ramp {
                start: t0,
                end: t0 + len as f64,
                from,
                to,
            });
        };
        for seg in &self.segments {
            let dur = seg.duration_ms as f64;
            match seg.kind {
                SegmentKind::Idle => {
                    push(&mut ramps, start, seg.fall(), level, 0.0);
                    level = 0.0;
                }
                SegmentKind::SoftHold => {
                    push(&mut ramps, start, seg.rise(), level, seg.target_force_n);
                    level = seg.target_force_n;
                }
                SegmentKind::QuickStrike => {
                    push(&mut ramps, start, seg.rise(), level, seg.target_force_n);
                    let fall = seg.fall();
                    push(
                        &mut ramps,
                        start + dur - fall as f64,
                        fall,
                        seg.target_force_n,
                        0.0,
                    );
                    level = 0.0;
                }
                SegmentKind::Peak => {
                    let rise = seg.rise();
                    push(&mut ramps, start, rise, level, seg.target_force_n);
                    push(
                        &mut ramps,
                        start + rise as f64,
                        seg.fall(),
                        seg.target_force_n,
                        level,
                    );
                }
            }
            // Hold the level reached by this segment until the next ramp.
            ramps.push(Ramp {
                start: start + dur,
                end: start + dur,
                from: level,
                to: level,
            });
            start += dur;
        }
        Ok(Envelope { ramps })
    }
}

#[derive(Debug, Clone, Copy)]
struct Ramp {
    start: f64,
    end: f64,
    from: f64,
    to: f64,
}

impl Ramp {
    fn at(&self, t: f64) -> f64 {
        if t >= self.end {
            return self.to;
        }
        let u = ((t - self.start) / (self.end - self.start)).clamp(0.0, 1.0);
        self.from + (self.to - self.from) * (1.0 - (PI * u).cos()) / 2.0
    }
}

/// Noise-free force envelope of a script, evaluated at any time in ms.
#[derive(Debug, Clone)]
pub struct Envelope {
    ramps: Vec<Ramp>,
}

impl Envelope {
    pub fn at(&self, t_ms: f64) -> f64 {
        // The last ramp starting at or before `t` defines the level.
        let idx = self.ramps.partition_point(|r| r.start <= t_ms);
        match idx {
            0 => 0.0,
            i => self.ramps[i - 1].at(t_ms),
        }
    }
}

/// Samples the script through the sensor model.
///
/// Sample `i` is taken at `i * 1000 / sample_rate_hz` ms (timestamps are
/// rounded to whole milliseconds) for every instant before the end of the
/// script. Identical `(script, sensor, seed)` give identical output.
pub fn synthesize_trace(
    script: &PressScript,
    sensor: &SensorModel,
    seed: u64,
) -> Result<Vec<ForceSample>> {
    sensor.validate()?;
    let envelope = script.envelope()?;
    let total_ms = script.duration_ms();
    let count = (total_ms as f64 * sensor.sample_rate_hz / 1000.0).floor() as u64;
    let period = 1000.0 / sensor.sample_rate_hz;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if sensor.noise_sigma_n > 0.0 {
        Some(
            Normal::new(0.0, sensor.noise_sigma_n)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?,
        )
    } else {
        None
    };

    let mut out = Vec::with_capacity(count as usize);
    for i in 0..count {
        let t = i as f64 * period;
        let mut force = envelope.at(t);
        if let Some(noise) = &noise {
            force += noise.sample(&mut rng);
        }
        out.push(ForceSample {
            t_ms: t.round() as u64,
            key: script.key.clone(),
            force_n: sensor.condition(force),
        });
    }
    Ok(out)
}
