//! Line-delimited JSON gateway.
//!
//! Inbound messages, one JSON object per line:
//!
//! ```text
//! {"type":"config","detector":{..overrides..},"wytiwyg":{..},"menu":"suggest10","engine_key":"space"}
//! {"type":"sample","key":"space","t_ms":120,"force_n":0.8}
//! {"type":"end"}
//! ```
//!
//! Outbound messages:
//!
//! ```text
//! {"type":"event","t_ms":..,"key":"..","kind":"..","apex_n":..}
//! {"type":"directive","t_ms":..,"directive":"Highlight",..}
//! {"type":"error","code":"..","message":".."}
//! ```
//!
//! `config` (re)starts the session with one detector and one menu engine.
//! `end` closes open key cycles as if the stream stopped. Time is taken from
//! sample timestamps only, so a recorded session replays identically.

mod server;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::detector::{Detector, DetectorConfig, KeyEventRecord};
use crate::error::{Error, Result};
use crate::signal::{ForceSample, Key};
use crate::wytiwyg::{Directive, DriverOutput, EngineDriver, MenuModel, WytiwygConfig};

pub use server::{serve, spawn_server, ServerHandle};

pub const DEFAULT_MENU: &str = "suggest10";
pub const DEFAULT_ENGINE_KEY: &str = "space";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Inbound {
    Sample {
        key: String,
        t_ms: u64,
        force_n: f64,
    },
    Config {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        detector: Option<DetectorConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        wytiwyg: Option<WytiwygConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        menu: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        engine_key: Option<String>,
    },
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    Event(KeyEventRecord),
    Directive {
        t_ms: u64,
        #[serde(flatten)]
        directive: Directive,
    },
    Error {
        code: &'static str,
        message: String,
    },
}

impl Outbound {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("outbound messages always serialize")
    }

    fn error(code: &'static str, message: impl Into<String>) -> Self {
        Outbound::Error {
            code,
            message: message.into(),
        }
    }

    fn from_driver(out: DriverOutput) -> Option<Self> {
        match out {
            DriverOutput::Event(e) => Some(Outbound::Event(e)),
            DriverOutput::Directive { t_ms, directive } => Some(Outbound::Directive { t_ms, directive }),
            DriverOutput::Input(_) => None,
        }
    }
}

/// Menu fixtures available to sessions, by id.
#[derive(Debug, Clone)]
pub struct MenuLibrary {
    menus: BTreeMap<String, Arc<MenuModel>>,
}

impl MenuLibrary {
    pub fn builtin() -> Self {
        let mut menus = BTreeMap::new();
        let suggest = MenuModel::builtin(DEFAULT_MENU).expect("bundled menu is valid");
        menus.insert(DEFAULT_MENU.to_string(), Arc::new(suggest));
        MenuLibrary { menus }
    }

    pub fn insert(&mut self, menu: MenuModel) {
        self.menus.insert(menu.id.clone(), Arc::new(menu));
    }

    pub fn get(&self, id: &str) -> Option<Arc<MenuModel>> {
        self.menus.get(id).cloned()
    }
}

impl Default for MenuLibrary {
    fn default() -> Self {
        Self::builtin()
    }
}

struct Configured {
    detector: Detector,
    driver: EngineDriver,
}

/// One client connection: strictly serial, independent of every other.
pub struct Session {
    menus: Arc<MenuLibrary>,
    defaults: Config,
    active: Option<Configured>,
}

impl Session {
    pub fn new(menus: Arc<MenuLibrary>, defaults: Config) -> Self {
        Session {
            menus,
            defaults,
            active: None,
        }
    }

    pub fn is_configured(&self) -> bool {
        self.active.is_some()
    }

    pub fn handle_line(&mut self, line: &str) -> Vec<Outbound> {
        if line.trim().is_empty() {
            return Vec::new();
        }
        match serde_json::from_str::<Inbound>(line) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![Outbound::error("malformed", e.to_string())],
        }
    }

    pub fn handle(&mut self, msg: Inbound) -> Vec<Outbound> {
        match msg {
            Inbound::Config {
                detector,
                wytiwyg,
                menu,
                engine_key,
            } => match self.configure(detector, wytiwyg, menu, engine_key) {
                Ok(()) => Vec::new(),
                Err(e) => vec![Outbound::error("invalid-config", e.to_string())],
            },
            Inbound::Sample { key, t_ms, force_n } => self.sample(key, t_ms, force_n),
            Inbound::End => self.finish(),
        }
    }

    fn configure(
        &mut self,
        detector: Option<DetectorConfig>,
        wytiwyg: Option<WytiwygConfig>,
        menu: Option<String>,
        engine_key: Option<String>,
    ) -> Result<()> {
        let menu_id = menu.as_deref().unwrap_or(DEFAULT_MENU);
        let menu = self
            .menus
            .get(menu_id)
            .ok_or_else(|| Error::InvalidMenu(format!("unknown menu fixture {menu_id:?}")))?;
        let key = Key::new(engine_key.as_deref().unwrap_or(DEFAULT_ENGINE_KEY))?;
        let detector = Detector::new(detector.unwrap_or(self.defaults.detector))?;
        let driver = EngineDriver::new(menu, wytiwyg.unwrap_or(self.defaults.wytiwyg), key)?;
        self.active = Some(Configured { detector, driver });
        Ok(())
    }

    fn sample(&mut self, key: String, t_ms: u64, force_n: f64) -> Vec<Outbound> {
        let Some(active) = self.active.as_mut() else {
            return vec![Outbound::error("unconfigured", "send a config message first")];
        };
        let sample = match Key::new(key).and_then(|k| ForceSample::new(t_ms, k, force_n)) {
            Ok(s) => s,
            Err(e) => return vec![Outbound::error("invalid-sample", e.to_string())],
        };
        let events = match active.detector.feed(&sample) {
            Ok(events) => events,
            Err(e @ Error::NonMonotonic { .. }) => {
                return vec![Outbound::error("non-monotonic", e.to_string())]
            }
            Err(e) => return vec![Outbound::error("invalid-sample", e.to_string())],
        };
        let mut out = Vec::new();
        for e in &events {
            out.extend(active.driver.on_event(e).into_iter().filter_map(Outbound::from_driver));
        }
        // A peak still being tracked may later be stamped before t_ms, so
        // dwell ticks only fire up to its apex.
        let horizon = active.detector.pending_stamp().map_or(t_ms, |a| a.min(t_ms));
        out.extend(
            active
                .driver
                .advance_to(horizon)
                .into_iter()
                .filter_map(Outbound::from_driver),
        );
        out
    }

    /// Closes all open key cycles.
    pub fn finish(&mut self) -> Vec<Outbound> {
        let Some(active) = self.active.as_mut() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for e in active.detector.end_of_stream() {
            out.extend(active.driver.on_event(&e).into_iter().filter_map(Outbound::from_driver));
        }
        out
    }
}

/// Offline counterpart of a session: drives the menu engine from an event
/// stream, producing the same outbound messages a live session would.
pub fn replay_events(events: &[KeyEventRecord], driver: &mut EngineDriver) -> Vec<Outbound> {
    events
        .iter()
        .flat_map(|e| driver.on_event(e))
        .filter_map(Outbound::from_driver)
        .collect()
}
