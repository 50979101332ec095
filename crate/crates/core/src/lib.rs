//! One-press control for pressure-sensitive keyboards.
//!
//! Per-key force streams go in; classical key events plus `MediumRepeat` /
//! `HardRepeat` virtual modifier events come out. On top of the event layer
//! sits a navigate / preview / commit menu engine ("what you touch is what
//! you get"), a trial classifier for the fixed target task, and a
//! line-delimited JSON gateway that drives both from a live sample stream.
//!
//! The crate is organized bottom-up:
//!
//! - [`signal`]: force samples, the simulated sensor and the trace file format.
//! - [`detector`]: the per-key state machine that extracts pressing movements.
//! - [`bindings`]: virtual modifier chords and the binding table.
//! - [`wytiwyg`]: the menu interaction engine.
//! - [`trial`]: attempt classification and trial summaries.
//! - [`gateway`]: wire protocol, sessions and the TCP service.

pub mod bindings;
pub mod config;
pub mod detector;
pub mod error;
pub mod gateway;
pub mod signal;
pub mod trial;
pub mod wytiwyg;

pub use bindings::{Action, BindingTable, Modifier, ModifiedKeyEvent};
pub use detector::{ApexClass, Detector, DetectorConfig, EventKind, KeyEventRecord};
pub use error::{Error, Result};
pub use signal::{ForceSample, Key, PressScript, SensorModel};
pub use wytiwyg::{Directive, EngineInput, MenuModel, Phase, WytiwygConfig, WytiwygState};
