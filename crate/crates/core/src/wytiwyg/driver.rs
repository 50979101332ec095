use std::sync::Arc;

use serde::Serialize;

use super::{Directive, EngineInput, InputKind, MenuModel, WytiwygConfig, WytiwygState};
use crate::detector::{EventKind, KeyEventRecord};
use crate::error::Result;
use crate::signal::Key;

/// Everything a driver produces, in causal order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DriverOutput {
    Event(KeyEventRecord),
    Input(EngineInput),
    Directive { t_ms: u64, directive: Directive },
}

/// Feeds detector events for one key into the menu engine.
///
/// Dwell timing is resolved through the engine's deadline: before any input
/// at time `t`, a `Tick` stamped with the pending deadline fires if the
/// deadline is `<= t`. Drivers fed with the same events therefore produce
/// the same output whether or not they also see the samples in between.
#[derive(Debug, Clone)]
pub struct EngineDriver {
    state: WytiwygState,
    menu: Arc<MenuModel>,
    config: WytiwygConfig,
    key: Key,
}

impl EngineDriver {
    pub fn new(menu: Arc<MenuModel>, config: WytiwygConfig, key: Key) -> Result<Self> {
        config.validate()?;
        Ok(EngineDriver {
            state: WytiwygState::new(),
            menu,
            config,
            key,
        })
    }

    pub fn state(&self) -> &WytiwygState {
        &self.state
    }

    pub fn menu(&self) -> &MenuModel {
        &self.menu
    }

    pub fn key(&self) -> &Key {
        &self.key
    }

    pub fn reset(&mut self) {
        self.state = WytiwygState::new();
    }

    /// Fires every deadline tick due at or before `t_ms`.
    pub fn advance_to(&mut self, t_ms: u64) -> Vec<DriverOutput> {
        let mut out = Vec::new();
        while let Some(deadline) = self.state.next_deadline(&self.config) {
            if deadline > t_ms {
                break;
            }
            let before = self.state.clone();
            self.apply(EngineInput::tick(deadline), &mut out);
            if self.state == before {
                break;
            }
        }
        out
    }

    pub fn on_event(&mut self, event: &KeyEventRecord) -> Vec<DriverOutput> {
        let mut out = self.advance_to(event.t_ms);
        out.push(DriverOutput::Event(event.clone()));
        if event.key == self.key {
            if let Some(kind) = engine_input_kind(event.kind) {
                self.apply(EngineInput::new(kind, event.t_ms), &mut out);
            }
        }
        out
    }

    fn apply(&mut self, input: EngineInput, out: &mut Vec<DriverOutput>) {
        out.push(DriverOutput::Input(input));
        for directive in self.state.step(input, &self.menu, &self.config) {
            out.push(DriverOutput::Directive {
                t_ms: input.t_ms,
                directive,
            });
        }
    }
}

/// One-press lifecycle and peak events drive the menu; classical events do not.
pub fn engine_input_kind(kind: EventKind) -> Option<InputKind> {
    match kind {
        EventKind::OnePressEnter => Some(InputKind::OnePressEnter),
        EventKind::MediumRepeat => Some(InputKind::MediumRepeat),
        EventKind::HardRepeat => Some(InputKind::HardRepeat),
        EventKind::OnePressRelease => Some(InputKind::OnePressRelease),
        EventKind::ClassicalDepress | EventKind::ClassicalRelease => None,
    }
}
