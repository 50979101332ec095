//! Test oracle for the menu engine: a flat, whole-sequence interpreter that
//! shares no code with [`WytiwygState::step`].

use super::{EngineInput, InputKind, MenuModel, Phase, WytiwygConfig, WytiwygState};

enum Finish {
    Commit(usize),
    Abort,
}

pub fn reference_interpret(
    inputs: &[EngineInput],
    menu: &MenuModel,
    config: &WytiwygConfig,
) -> WytiwygState {
    let n = menu.len();
    let mut started = false;
    let mut finish: Option<Finish> = None;
    let mut previewing = false;
    let mut cursor = 0usize;
    let mut since = 0u64;
    let mut presses = 0u32;

    for input in inputs {
        let active = started && finish.is_none();
        let t = input.t_ms;
        match input.kind {
            InputKind::OnePressEnter if !active => {
                started = true;
                finish = None;
                previewing = false;
                cursor = 0;
                since = t;
                presses = 0;
            }
            InputKind::MediumRepeat if active => {
                cursor = if cursor == 0 || cursor == n { 1 } else { cursor + 1 };
                previewing = false;
                since = t;
                presses += 1;
            }
            InputKind::HardRepeat if active && previewing => finish = Some(Finish::Commit(cursor)),
            InputKind::OnePressRelease if active => finish = Some(Finish::Abort),
            InputKind::Tick if active && !previewing && cursor > 0 && t >= since + config.dwell_ms => {
                previewing = true
            }
            _ => {}
        }
    }

    let phase = match (started, finish) {
        (false, _) => Phase::Inactive,
        (true, Some(Finish::Commit(cursor))) => Phase::Committed { cursor },
        (true, Some(Finish::Abort)) => Phase::Aborted,
        (true, None) if previewing => Phase::PreviewActive { cursor },
        (true, None) => Phase::MenuOpen {
            cursor,
            dwell_started_t: since,
        },
    };
    WytiwygState {
        phase,
        press_count: presses,
    }
}
