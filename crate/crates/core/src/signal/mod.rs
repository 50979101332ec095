//! Force samples and the simulated sensor that produces them.

mod script;
mod synth;
mod trace;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use script::{parse_script, script_to_toml};
pub use synth::{synthesize_trace, PressScript, Segment, SegmentKind, SensorModel};
pub use trace::{read_trace, write_trace, TRACE_HEADER};

/// Symbolic key name, e.g. `space` or `f4`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Key(String);

impl Key {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let ok = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
        if ok {
            Ok(Key(name))
        } else {
            Err(Error::InvalidKey(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Key {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Key::new(value)
    }
}

impl From<Key> for String {
    fn from(key: Key) -> String {
        key.0
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One conditioned force reading for one key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub t_ms: u64,
    pub key: Key,
    pub force_n: f64,
}

impl ForceSample {
    pub fn new(t_ms: u64, key: Key, force_n: f64) -> Result<Self> {
        let sample = ForceSample { t_ms, key, force_n };
        sample.validate()?;
        Ok(sample)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.force_n.is_finite() || self.force_n < 0.0 {
            return Err(Error::InvalidSample(format!(
                "force_n must be finite and >= 0, got {}",
                self.force_n
            )));
        }
        Ok(())
    }
}
