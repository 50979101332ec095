//! "What you touch is what you get" menu engine.
//!
//! One cycle of the key drives one menu interaction: one-press entry opens
//! the menu, every `MediumRepeat` moves the cursor (wrapping after the last
//! option), dwelling on an option for `dwell_ms` shows its preview, a
//! `HardRepeat` while the preview is up commits the option, and releasing
//! the key at any point aborts.
//!
//! ```text
//!  Inactive ──Enter──▶ MenuOpen ──dwell──▶ PreviewActive ──Hard──▶ Committed
//!                       ▲   │ Medium         │ Medium
//!                       │   ▼                │
//!                       └───┴────────────────┘
//!  MenuOpen / PreviewActive ──Release──▶ Aborted
//! ```
//!
//! The engine owns no clock; time arrives through `Tick` inputs. `Enter` in
//! a finished cycle starts a new one.

mod driver;
mod menu;
pub mod reference;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use driver::{engine_input_kind, DriverOutput, EngineDriver};
pub use menu::{MenuModel, MenuOption};
pub use reference::reference_interpret;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WytiwygConfig {
    pub dwell_ms: u64,
    /// Contrast of the preview relative to committed output, in (0, 1].
    pub preview_contrast: f64,
}

impl Default for WytiwygConfig {
    fn default() -> Self {
        WytiwygConfig {
            dwell_ms: 800,
            preview_contrast: 0.6,
        }
    }
}

impl WytiwygConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dwell_ms == 0 {
            return Err(Error::InvalidConfig("dwell_ms must be > 0".into()));
        }
        if !(self.preview_contrast > 0.0 && self.preview_contrast <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "preview_contrast must be in (0, 1], got {}",
                self.preview_contrast
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputKind {
    OnePressEnter,
    MediumRepeat,
    HardRepeat,
    OnePressRelease,
    Tick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EngineInput {
    pub kind: InputKind,
    pub t_ms: u64,
}

impl EngineInput {
    pub fn new(kind: InputKind, t_ms: u64) -> Self {
        EngineInput { kind, t_ms }
    }

    pub fn enter(t_ms: u64) -> Self {
        Self::new(InputKind::OnePressEnter, t_ms)
    }

    pub fn medium(t_ms: u64) -> Self {
        Self::new(InputKind::MediumRepeat, t_ms)
    }

    pub fn hard(t_ms: u64) -> Self {
        Self::new(InputKind::HardRepeat, t_ms)
    }

    pub fn release(t_ms: u64) -> Self {
        Self::new(InputKind::OnePressRelease, t_ms)
    }

    pub fn tick(t_ms: u64) -> Self {
        Self::new(InputKind::Tick, t_ms)
    }
}

/// Cursor values are 1-based; 0 means nothing is selected yet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "phase")]
pub enum Phase {
    Inactive,
    MenuOpen { cursor: usize, dwell_started_t: u64 },
    PreviewActive { cursor: usize },
    Committed { cursor: usize },
    Aborted,
}

impl Phase {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Phase::Committed { .. } | Phase::Aborted)
    }

    pub fn cursor(&self) -> usize {
        match *self {
            Phase::MenuOpen { cursor, .. }
            | Phase::PreviewActive { cursor }
            | Phase::Committed { cursor } => cursor,
            Phase::Inactive | Phase::Aborted => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MenuItem {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "directive")]
pub enum Directive {
    ShowMenu {
        items: Vec<MenuItem>,
    },
    Highlight {
        cursor: usize,
        option_id: String,
    },
    /// Full-detail preview of the selected option, drawn at `contrast` with
    /// the selected item (`overlay`) still visible inside it.
    ShowPreview {
        cursor: usize,
        option_id: String,
        contrast: f64,
        overlay: String,
        document: String,
    },
    HidePreview,
    CommitOutput {
        cursor: usize,
        option_id: String,
        document: String,
    },
    /// A hard press arrived before any preview was active.
    InvalidCommit {
        cursor: usize,
    },
    DismissAll,
    Warning {
        message: String,
    },
}

impl Directive {
    pub fn name(&self) -> &'static str {
        match self {
            Directive::ShowMenu { .. } => "ShowMenu",
            Directive::Highlight { .. } => "Highlight",
            Directive::ShowPreview { .. } => "ShowPreview",
            Directive::HidePreview => "HidePreview",
            Directive::CommitOutput { .. } => "CommitOutput",
            Directive::InvalidCommit { .. } => "InvalidCommit",
            Directive::DismissAll => "DismissAll",
            Directive::Warning { .. } => "Warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WytiwygState {
    #[serde(flatten)]
    pub phase: Phase,
    /// Medium presses in the current cycle.
    pub press_count: u32,
}

impl Default for WytiwygState {
    fn default() -> Self {
        WytiwygState {
            phase: Phase::Inactive,
            press_count: 0,
        }
    }
}

/// Cursor after one medium press on an `n`-item menu.
pub fn advance_cursor(cursor: usize, n: usize) -> usize {
    if cursor == 0 {
        1
    } else {
        cursor % n + 1
    }
}

impl WytiwygState {
    pub fn new() -> Self {
        Self::default()
    }

    /// When a `Tick` would next change the state, if ever.
    pub fn next_deadline(&self, config: &WytiwygConfig) -> Option<u64> {
        match self.phase {
            Phase::MenuOpen {
                cursor,
                dwell_started_t,
            } if cursor >= 1 => Some(dwell_started_t + config.dwell_ms),
            _ => None,
        }
    }

    pub fn step(
        &mut self,
        input: EngineInput,
        menu: &MenuModel,
        config: &WytiwygConfig,
    ) -> Vec<Directive> {
        let t = input.t_ms;
        let n = menu.len();
        let option_id = |cursor: usize| menu.at(cursor).map(|o| o.id.clone()).unwrap_or_default();
        let ignored = |phase: &Phase| {
            vec![Directive::Warning {
                message: format!("{:?} ignored in {}", input.kind, phase_name(phase)),
            }]
        };

        match (input.kind, &self.phase) {
            (InputKind::Tick, &Phase::MenuOpen { cursor, dwell_started_t })
                if cursor >= 1 && t.saturating_sub(dwell_started_t) >= config.dwell_ms =>
            {
                self.phase = Phase::PreviewActive { cursor };
                let option = menu.at(cursor).expect("cursor within menu");
                vec![Directive::ShowPreview {
                    cursor,
                    option_id: option.id.clone(),
                    contrast: config.preview_contrast,
                    overlay: option.label.clone(),
                    document: option.document.clone(),
                }]
            }
            (InputKind::Tick, _) => Vec::new(),

            (InputKind::OnePressEnter, Phase::Inactive | Phase::Committed { .. } | Phase::Aborted) => {
                self.phase = Phase::MenuOpen {
                    cursor: 0,
                    dwell_started_t: t,
                };
                self.press_count = 0;
                vec![Directive::ShowMenu {
                    items: menu
                        .options()
                        .iter()
                        .map(|o| MenuItem {
                            id: o.id.clone(),
                            label: o.label.clone(),
                        })
                        .collect(),
                }]
            }

            (InputKind::MediumRepeat, &Phase::MenuOpen { cursor, .. }) => {
                let cursor = advance_cursor(cursor, n);
                self.phase = Phase::MenuOpen {
                    cursor,
                    dwell_started_t: t,
                };
                self.press_count += 1;
                vec![Directive::Highlight {
                    cursor,
                    option_id: option_id(cursor),
                }]
            }
            (InputKind::MediumRepeat, &Phase::PreviewActive { cursor }) => {
                let cursor = advance_cursor(cursor, n);
                self.phase = Phase::MenuOpen {
                    cursor,
                    dwell_started_t: t,
                };
                self.press_count += 1;
                vec![
                    Directive::HidePreview,
                    Directive::Highlight {
                        cursor,
                        option_id: option_id(cursor),
                    },
                ]
            }

            (InputKind::HardRepeat, &Phase::PreviewActive { cursor }) => {
                self.phase = Phase::Committed { cursor };
                let option = menu.at(cursor).expect("cursor within menu");
                vec![Directive::CommitOutput {
                    cursor,
                    option_id: option.id.clone(),
                    document: option.document.clone(),
                }]
            }
            (InputKind::HardRepeat, &Phase::MenuOpen { cursor, .. }) => {
                vec![Directive::InvalidCommit { cursor }]
            }

            (InputKind::OnePressRelease, Phase::MenuOpen { .. } | Phase::PreviewActive { .. }) => {
                self.phase = Phase::Aborted;
                vec![Directive::DismissAll]
            }

            (_, phase) => ignored(phase),
        }
    }
}

fn phase_name(phase: &Phase) -> &'static str {
    match phase {
        Phase::Inactive => "Inactive",
        Phase::MenuOpen { .. } => "MenuOpen",
        Phase::PreviewActive { .. } => "PreviewActive",
        Phase::Committed { .. } => "Committed",
        Phase::Aborted => "Aborted",
    }
}

/// Folds `step` over a sequence from the inactive state.
pub fn run_inputs(
    inputs: &[EngineInput],
    menu: &MenuModel,
    config: &WytiwygConfig,
) -> (WytiwygState, Vec<Directive>) {
    let mut state = WytiwygState::new();
    let mut directives = Vec::new();
    for &input in inputs {
        directives.extend(state.step(input, menu, config));
    }
    (state, directives)
}
