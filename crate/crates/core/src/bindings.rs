//! Virtual modifier keys.
//!
//! A detected peak is attached to its own source key as a modifier, so an
//! application sees `hardRepeat+f4` the same way it would see `alt+f4`.
//! Classical depresses pass through unchanged.
//!
//! Binding files hold one rule per line, `<modifier> <key> <action>`, with
//! `#` comments and blank lines ignored:
//!
//! ```text
//! hardRepeat    f4    close-window
//! mediumRepeat  tab   next-window
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detector::{EventKind, KeyEventRecord};
use crate::error::{Error, Result};
use crate::signal::Key;

const SAMPLE_BINDINGS: &str = include_str!("../fixtures/bindings/sample.bindings");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Modifier {
    None,
    MediumRepeat,
    HardRepeat,
}

impl fmt::Display for Modifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modifier::None => "none",
            Modifier::MediumRepeat => "mediumRepeat",
            Modifier::HardRepeat => "hardRepeat",
        })
    }
}

impl FromStr for Modifier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Modifier::None),
            "mediumrepeat" => Ok(Modifier::MediumRepeat),
            "hardrepeat" => Ok(Modifier::HardRepeat),
            _ => Err(format!("unknown modifier {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifiedKeyEvent {
    pub key: Key,
    pub modifier: Modifier,
    pub t_ms: u64,
}

/// Maps a detector event to a chord. Lifecycle events (releases and
/// one-press entry) are not chords.
pub fn to_modified(event: &KeyEventRecord) -> Option<ModifiedKeyEvent> {
    let modifier = match event.kind {
        EventKind::ClassicalDepress => Modifier::None,
        EventKind::MediumRepeat => Modifier::MediumRepeat,
        EventKind::HardRepeat => Modifier::HardRepeat,
        EventKind::ClassicalRelease | EventKind::OnePressEnter | EventKind::OnePressRelease => {
            return None
        }
    };
    Some(ModifiedKeyEvent {
        key: event.key.clone(),
        modifier,
        t_ms: event.t_ms,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Bound(String),
    /// The unmodified key, delivered as ordinary input.
    PassThrough(Key),
    NoAction,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Bound(id) => f.write_str(id),
            Action::PassThrough(key) => write!(f, "pass-through:{key}"),
            Action::NoAction => f.write_str("no-action"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingRule {
    pub modifier: Modifier,
    pub key: Key,
    pub action: String,
}

#[derive(Debug, Clone, Default)]
pub struct BindingTable {
    rules: Vec<BindingRule>,
    index: HashMap<(Modifier, Key), usize>,
}

impl BindingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds hardRepeat+del, hardRepeat+a, hardRepeat+f4 and
    /// mediumRepeat+tab.
    pub fn sample() -> Self {
        Self::parse(SAMPLE_BINDINGS).expect("bundled sample bindings are valid")
    }

    pub fn rules(&self) -> &[BindingRule] {
        &self.rules
    }

    pub fn insert(&mut self, rule: BindingRule) -> Result<()> {
        let slot = (rule.modifier, rule.key.clone());
        if self.index.contains_key(&slot) {
            return Err(Error::InvalidConfig(format!(
                "duplicate binding for {}+{}",
                rule.modifier, rule.key
            )));
        }
        self.index.insert(slot, self.rules.len());
        self.rules.push(rule);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table = BindingTable::new();
        let mut seen: HashMap<(Modifier, Key), usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [modifier, key, action] = fields[..] else {
                return Err(Error::parse(
                    line_no as u64,
                    format!("expected `<modifier> <key> <action>`, got {line:?}"),
                ));
            };
            let modifier: Modifier = modifier
                .parse()
                .map_err(|e: String| Error::parse(line_no as u64, e))?;
            let key = Key::new(key.to_ascii_lowercase())
                .map_err(|e| Error::parse(line_no as u64, e.to_string()))?;
            if let Some(first) = seen.insert((modifier, key.clone()), line_no) {
                return Err(Error::parse(
                    line_no as u64,
                    format!("duplicate binding for {modifier}+{key}, first bound on line {first}"),
                ));
            }
            table.insert(BindingRule {
                modifier,
                key,
                action: action.to_string(),
            })?;
        }
        Ok(table)
    }

    /// Exact `(modifier, key)` match first, then pass-through for unmodified
    /// keys, otherwise no action.
    pub fn resolve(&self, event: &ModifiedKeyEvent) -> Action {
        if let Some(&i) = self.index.get(&(event.modifier, event.key.clone())) {
            return Action::Bound(self.rules[i].action.clone());
        }
        match event.modifier {
            Modifier::None => Action::PassThrough(event.key.clone()),
            _ => Action::NoAction,
        }
    }
}
