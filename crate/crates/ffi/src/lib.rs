//! C ABI over the detector and the menu engine.
//!
//! Handles are opaque and owned by the caller, who frees them with the
//! matching `*_free` function. Every fallible call returns an [`OpStatus`];
//! on failure [`op_last_error_message`] describes the error for the calling
//! thread. Output (events, directives) is queued inside the handle and
//! drained one item at a time with the `*_next_*` functions, which return
//! `OP_STATUS_EMPTY` once the queue is exhausted.

use std::cell::RefCell;
use std::collections::VecDeque;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use onepress::detector::{classify_apex, ApexClass, Detector, DetectorConfig, EventKind, KeyEventRecord};
use onepress::wytiwyg::{Directive, EngineInput, InputKind, MenuModel, Phase, WytiwygConfig, WytiwygState};
use onepress::{Error, ForceSample, Key};

/// Size of the key buffer in [`OpEvent`], terminating NUL included.
pub const OP_KEY_CAPACITY: usize = 32;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpStatus {
    Ok = 0,
    /// A queue had nothing left; not an error.
    Empty = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    InvalidConfig = 4,
    NonMonotonic = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpEventKind {
    ClassicalDepress = 0,
    ClassicalRelease = 1,
    OnePressEnter = 2,
    MediumRepeat = 3,
    HardRepeat = 4,
    OnePressRelease = 5,
}

impl From<EventKind> for OpEventKind {
    fn from(k: EventKind) -> Self {
        match k {
            EventKind::ClassicalDepress => OpEventKind::ClassicalDepress,
            EventKind::ClassicalRelease => OpEventKind::ClassicalRelease,
            EventKind::OnePressEnter => OpEventKind::OnePressEnter,
            EventKind::MediumRepeat => OpEventKind::MediumRepeat,
            EventKind::HardRepeat => OpEventKind::HardRepeat,
            EventKind::OnePressRelease => OpEventKind::OnePressRelease,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpApexClass {
    None = 0,
    Medium = 1,
    Hard = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpInputKind {
    OnePressEnter = 0,
    MediumRepeat = 1,
    HardRepeat = 2,
    OnePressRelease = 3,
    Tick = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpPhase {
    Inactive = 0,
    MenuOpen = 1,
    PreviewActive = 2,
    Committed = 3,
    Aborted = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpDirectiveKind {
    ShowMenu = 0,
    Highlight = 1,
    ShowPreview = 2,
    HidePreview = 3,
    CommitOutput = 4,
    InvalidCommit = 5,
    DismissAll = 6,
    Warning = 7,
}

/// Mirrors the detector configuration; see the Rust crate for field meaning.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OpDetectorConfig {
    pub usable_floor_n: f64,
    pub usable_ceiling_n: f64,
    pub soft_band_max_n: f64,
    pub hold_timeout_ms: u64,
    pub smooth_window_samples: usize,
    pub onset_slope_n_per_s: f64,
    pub medium_min_apex_n: f64,
    pub hard_min_apex_n: f64,
    pub refractory_ms: u64,
    pub release_floor_n: f64,
}

impl From<DetectorConfig> for OpDetectorConfig {
    fn from(c: DetectorConfig) -> Self {
        OpDetectorConfig {
            usable_floor_n: c.usable_floor_n,
            usable_ceiling_n: c.usable_ceiling_n,
            soft_band_max_n: c.soft_band_max_n,
            hold_timeout_ms: c.hold_timeout_ms,
            smooth_window_samples: c.smooth_window_samples,
            onset_slope_n_per_s: c.onset_slope_n_per_s,
            medium_min_apex_n: c.medium_min_apex_n,
            hard_min_apex_n: c.hard_min_apex_n,
            refractory_ms: c.refractory_ms,
            release_floor_n: c.release_floor_n,
        }
    }
}

impl From<OpDetectorConfig> for DetectorConfig {
    fn from(c: OpDetectorConfig) -> Self {
        DetectorConfig {
            usable_floor_n: c.usable_floor_n,
            usable_ceiling_n: c.usable_ceiling_n,
            soft_band_max_n: c.soft_band_max_n,
            hold_timeout_ms: c.hold_timeout_ms,
            smooth_window_samples: c.smooth_window_samples,
            onset_slope_n_per_s: c.onset_slope_n_per_s,
            medium_min_apex_n: c.medium_min_apex_n,
            hard_min_apex_n: c.hard_min_apex_n,
            refractory_ms: c.refractory_ms,
            release_floor_n: c.release_floor_n,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OpEvent {
    pub t_ms: u64,
    pub kind: OpEventKind,
    /// Apex force for peak events, 0 otherwise.
    pub apex_n: f64,
    pub has_apex: bool,
    /// NUL-terminated key name.
    pub key: [c_char; OP_KEY_CAPACITY],
}

impl OpEvent {
    fn from_record(e: &KeyEventRecord) -> Self {
        let mut key = [0 as c_char; OP_KEY_CAPACITY];
        for (dst, src) in key.iter_mut().zip(e.key.as_str().bytes()) {
            *dst = src as c_char;
        }
        OpEvent {
            t_ms: e.t_ms,
            kind: e.kind.into(),
            apex_n: e.apex_n.unwrap_or(0.0),
            has_apex: e.apex_n.is_some(),
            key,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OpDirective {
    pub t_ms: u64,
    pub kind: OpDirectiveKind,
    /// 1-based menu position the directive refers to, 0 if none.
    pub cursor: usize,
}

pub struct OpDetector {
    inner: Detector,
    pending: VecDeque<KeyEventRecord>,
}

pub struct OpEngine {
    state: WytiwygState,
    menu: Arc<MenuModel>,
    config: WytiwygConfig,
    pending: VecDeque<OpDirective>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn fail(status: OpStatus, message: impl Into<String>) -> OpStatus {
    set_error(message);
    status
}

fn status_of(err: &Error) -> OpStatus {
    match err {
        Error::NonMonotonic { .. } => OpStatus::NonMonotonic,
        Error::InvalidConfig(_) => OpStatus::InvalidConfig,
        _ => OpStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> OpStatus) -> OpStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(OpStatus::Panic, "internal panic"))
}

/// Message for the most recent failure on this thread, or "". The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn op_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn op_detector_config_default() -> OpDetectorConfig {
    DetectorConfig::default().into()
}

/// Creates a detector. `config` may be NULL for defaults.
///
/// # Safety
/// `config` must be NULL or point to a valid config; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn op_detector_new(
    config: *const OpDetectorConfig,
    out: *mut *mut OpDetector,
) -> OpStatus {
    guard(|| {
        if out.is_null() {
            return fail(OpStatus::NullPointer, "out is NULL");
        }
        let cfg = if config.is_null() {
            DetectorConfig::default()
        } else {
            DetectorConfig::from(*config)
        };
        match Detector::new(cfg) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(OpDetector {
                    inner,
                    pending: VecDeque::new(),
                }));
                OpStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Feeds one sample. Resulting events are queued on the handle.
///
/// # Safety
/// `detector` must come from [`op_detector_new`]; `key` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn op_detector_feed(
    detector: *mut OpDetector,
    t_ms: u64,
    key: *const c_char,
    force_n: f64,
) -> OpStatus {
    guard(|| {
        let (Some(det), false) = (detector.as_mut(), key.is_null()) else {
            return fail(OpStatus::NullPointer, "detector or key is NULL");
        };
        let Ok(name) = CStr::from_ptr(key).to_str() else {
            return fail(OpStatus::InvalidArgument, "key is not UTF-8");
        };
        if name.len() >= OP_KEY_CAPACITY {
            return fail(
                OpStatus::InvalidArgument,
                format!("key name longer than {} bytes", OP_KEY_CAPACITY - 1),
            );
        }
        let sample = match Key::new(name).and_then(|k| ForceSample::new(t_ms, k, force_n)) {
            Ok(s) => s,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        match det.inner.feed(&sample) {
            Ok(events) => {
                det.pending.extend(events);
                OpStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Closes every open cycle; the closing events are queued.
///
/// # Safety
/// `detector` must come from [`op_detector_new`].
#[no_mangle]
pub unsafe extern "C" fn op_detector_finish(detector: *mut OpDetector) -> OpStatus {
    guard(|| {
        let Some(det) = detector.as_mut() else {
            return fail(OpStatus::NullPointer, "detector is NULL");
        };
        let events = det.inner.end_of_stream();
        det.pending.extend(events);
        OpStatus::Ok
    })
}

/// Pops the oldest queued event into `out`.
///
/// # Safety
/// `detector` must come from [`op_detector_new`]; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn op_detector_next_event(detector: *mut OpDetector, out: *mut OpEvent) -> OpStatus {
    guard(|| {
        let (Some(det), false) = (detector.as_mut(), out.is_null()) else {
            return fail(OpStatus::NullPointer, "detector or out is NULL");
        };
        match det.pending.pop_front() {
            Some(e) => {
                *out = OpEvent::from_record(&e);
                OpStatus::Ok
            }
            None => OpStatus::Empty,
        }
    })
}

/// # Safety
/// `detector` must be NULL or come from [`op_detector_new`], and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn op_detector_free(detector: *mut OpDetector) {
    if !detector.is_null() {
        drop(Box::from_raw(detector));
    }
}

/// Labels an apex force. `config` may be NULL for defaults.
///
/// # Safety
/// `config` must be NULL or point to a valid config.
#[no_mangle]
pub unsafe extern "C" fn op_classify_apex(apex_n: f64, config: *const OpDetectorConfig) -> OpApexClass {
    let cfg = if config.is_null() {
        DetectorConfig::default()
    } else {
        DetectorConfig::from(*config)
    };
    match classify_apex(apex_n, &cfg) {
        ApexClass::None => OpApexClass::None,
        ApexClass::Medium => OpApexClass::Medium,
        ApexClass::Hard => OpApexClass::Hard,
    }
}

/// Creates a menu engine over `menu_size` numbered options.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn op_engine_new(
    menu_size: usize,
    dwell_ms: u64,
    preview_contrast: f64,
    out: *mut *mut OpEngine,
) -> OpStatus {
    guard(|| {
        if out.is_null() {
            return fail(OpStatus::NullPointer, "out is NULL");
        }
        let config = WytiwygConfig {
            dwell_ms,
            preview_contrast,
        };
        if let Err(e) = config.validate() {
            return fail(OpStatus::InvalidConfig, e.to_string());
        }
        let menu = match MenuModel::numbered(menu_size) {
            Ok(m) => m,
            Err(e) => return fail(OpStatus::InvalidConfig, e.to_string()),
        };
        *out = Box::into_raw(Box::new(OpEngine {
            state: WytiwygState::new(),
            menu: Arc::new(menu),
            config,
            pending: VecDeque::new(),
        }));
        OpStatus::Ok
    })
}

/// Applies one input; resulting directives are queued.
///
/// # Safety
/// `engine` must come from [`op_engine_new`].
#[no_mangle]
pub unsafe extern "C" fn op_engine_step(engine: *mut OpEngine, kind: OpInputKind, t_ms: u64) -> OpStatus {
    guard(|| {
        let Some(eng) = engine.as_mut() else {
            return fail(OpStatus::NullPointer, "engine is NULL");
        };
        let kind = match kind {
            OpInputKind::OnePressEnter => InputKind::OnePressEnter,
            OpInputKind::MediumRepeat => InputKind::MediumRepeat,
            OpInputKind::HardRepeat => InputKind::HardRepeat,
            OpInputKind::OnePressRelease => InputKind::OnePressRelease,
            OpInputKind::Tick => InputKind::Tick,
        };
        let directives = eng.state.step(EngineInput::new(kind, t_ms), &eng.menu, &eng.config);
        eng.pending
            .extend(directives.iter().map(|d| flatten_directive(d, t_ms)));
        OpStatus::Ok
    })
}

fn flatten_directive(d: &Directive, t_ms: u64) -> OpDirective {
    let (kind, cursor) = match *d {
        Directive::ShowMenu { .. } => (OpDirectiveKind::ShowMenu, 0),
        Directive::Highlight { cursor, .. } => (OpDirectiveKind::Highlight, cursor),
        Directive::ShowPreview { cursor, .. } => (OpDirectiveKind::ShowPreview, cursor),
        Directive::HidePreview => (OpDirectiveKind::HidePreview, 0),
        Directive::CommitOutput { cursor, .. } => (OpDirectiveKind::CommitOutput, cursor),
        Directive::InvalidCommit { cursor } => (OpDirectiveKind::InvalidCommit, cursor),
        Directive::DismissAll => (OpDirectiveKind::DismissAll, 0),
        Directive::Warning { .. } => (OpDirectiveKind::Warning, 0),
    };
    OpDirective { t_ms, kind, cursor }
}

/// Time at which a `Tick` would next change the engine state.
/// Returns `OP_STATUS_EMPTY` if no dwell is pending.
///
/// # Safety
/// `engine` must come from [`op_engine_new`]; `out_t_ms` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn op_engine_next_deadline(engine: *const OpEngine, out_t_ms: *mut u64) -> OpStatus {
    guard(|| {
        let (Some(eng), false) = (engine.as_ref(), out_t_ms.is_null()) else {
            return fail(OpStatus::NullPointer, "engine or out_t_ms is NULL");
        };
        match eng.state.next_deadline(&eng.config) {
            Some(t) => {
                *out_t_ms = t;
                OpStatus::Ok
            }
            None => OpStatus::Empty,
        }
    })
}

/// Pops the oldest queued directive into `out`.
///
/// # Safety
/// `engine` must come from [`op_engine_new`]; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn op_engine_next_directive(engine: *mut OpEngine, out: *mut OpDirective) -> OpStatus {
    guard(|| {
        let (Some(eng), false) = (engine.as_mut(), out.is_null()) else {
            return fail(OpStatus::NullPointer, "engine or out is NULL");
        };
        match eng.pending.pop_front() {
            Some(d) => {
                *out = d;
                OpStatus::Ok
            }
            None => OpStatus::Empty,
        }
    })
}

/// Current phase and cursor (0 when nothing is selected).
///
/// # Safety
/// `engine` must come from [`op_engine_new`]; the out pointers must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn op_engine_phase(
    engine: *const OpEngine,
    out_phase: *mut OpPhase,
    out_cursor: *mut usize,
) -> OpStatus {
    guard(|| {
        let (Some(eng), false, false) = (engine.as_ref(), out_phase.is_null(), out_cursor.is_null()) else {
            return fail(OpStatus::NullPointer, "engine or an out pointer is NULL");
        };
        *out_phase = match eng.state.phase {
            Phase::Inactive => OpPhase::Inactive,
            Phase::MenuOpen { .. } => OpPhase::MenuOpen,
            Phase::PreviewActive { .. } => OpPhase::PreviewActive,
            Phase::Committed { .. } => OpPhase::Committed,
            Phase::Aborted => OpPhase::Aborted,
        };
        *out_cursor = eng.state.phase.cursor();
        OpStatus::Ok
    })
}

/// # Safety
/// `engine` must be NULL or come from [`op_engine_new`], and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn op_engine_free(engine: *mut OpEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(op_last_error_message()) }
            .to_string_lossy()
            .into_owned()
    }

    fn drain(det: *mut OpDetector) -> Vec<OpEvent> {
        let mut out = Vec::new();
        let mut ev = OpEvent::from_record(&KeyEventRecord::new(0, Key::new("x").unwrap(), EventKind::ClassicalDepress));
        while unsafe { op_detector_next_event(det, &mut ev) } == OpStatus::Ok {
            out.push(ev);
        }
        out
    }

    #[test]
    fn soft_hold_through_the_c_api() {
        let mut det = ptr::null_mut();
        assert_eq!(unsafe { op_detector_new(ptr::null(), &mut det) }, OpStatus::Ok);
        let key = c"space";
        for i in 0..203u64 {
            let f = if i < 200 { 0.8 } else { 0.0 };
            assert_eq!(unsafe { op_detector_feed(det, i * 10, key.as_ptr(), f) }, OpStatus::Ok);
        }
        let events = drain(det);
        let kinds: Vec<_> = events.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, [OpEventKind::OnePressEnter, OpEventKind::OnePressRelease]);
        assert_eq!(events[0].t_ms, 500);
        assert!(!events[0].has_apex);
        let name = unsafe { CStr::from_ptr(events[0].key.as_ptr()) };
        assert_eq!(name.to_str().unwrap(), "space");
        unsafe { op_detector_free(det) };
    }

    #[test]
    fn finish_closes_open_cycles() {
        let mut det = ptr::null_mut();
        unsafe { op_detector_new(ptr::null(), &mut det) };
        unsafe { op_detector_feed(det, 0, c"f4".as_ptr(), 2.5) };
        unsafe { op_detector_feed(det, 10, c"f4".as_ptr(), 2.5) };
        assert_eq!(unsafe { op_detector_finish(det) }, OpStatus::Ok);
        let kinds: Vec<_> = drain(det).iter().map(|e| e.kind).collect();
        assert_eq!(kinds, [OpEventKind::ClassicalDepress, OpEventKind::ClassicalRelease]);
        unsafe { op_detector_free(det) };
    }

    #[test]
    fn errors_set_status_and_message() {
        let mut det = ptr::null_mut();
        let mut cfg = op_detector_config_default();
        cfg.hard_min_apex_n = 0.5;
        assert_eq!(unsafe { op_detector_new(&cfg, &mut det) }, OpStatus::InvalidConfig);
        assert!(last_error().contains("hard_min_apex_n") || !last_error().is_empty());
        assert!(det.is_null());

        unsafe { op_detector_new(ptr::null(), &mut det) };
        assert_eq!(unsafe { op_detector_feed(det, 10, c"a".as_ptr(), 1.0) }, OpStatus::Ok);
        assert_eq!(unsafe { op_detector_feed(det, 10, c"a".as_ptr(), 1.0) }, OpStatus::NonMonotonic);
        assert!(last_error().contains("a"));
        assert_eq!(
            unsafe { op_detector_feed(det, 20, c"a".as_ptr(), f64::NAN) },
            OpStatus::InvalidArgument
        );
        let long = CString::new("k".repeat(OP_KEY_CAPACITY)).unwrap();
        assert_eq!(
            unsafe { op_detector_feed(det, 30, long.as_ptr(), 1.0) },
            OpStatus::InvalidArgument
        );
        assert_eq!(
            unsafe { op_detector_feed(det, 30, ptr::null(), 1.0) },
            OpStatus::NullPointer
        );
        assert_eq!(
            unsafe { op_detector_feed(ptr::null_mut(), 30, c"a".as_ptr(), 1.0) },
            OpStatus::NullPointer
        );
        unsafe { op_detector_free(det) };
        unsafe { op_detector_free(ptr::null_mut()) };
    }

    #[test]
    fn classify_apex_bands() {
        unsafe {
            assert_eq!(op_classify_apex(1.6, ptr::null()), OpApexClass::Medium);
            assert_eq!(op_classify_apex(2.5, ptr::null()), OpApexClass::Hard);
            assert_eq!(op_classify_apex(0.5, ptr::null()), OpApexClass::None);
        }
    }

    #[test]
    fn engine_commits_item_8() {
        let mut eng = ptr::null_mut();
        assert_eq!(unsafe { op_engine_new(10, 800, 0.6, &mut eng) }, OpStatus::Ok);
        unsafe {
            op_engine_step(eng, OpInputKind::OnePressEnter, 0);
            for i in 1..=8 {
                op_engine_step(eng, OpInputKind::MediumRepeat, i * 300);
            }
            let mut deadline = 0;
            assert_eq!(op_engine_next_deadline(eng, &mut deadline), OpStatus::Ok);
            assert_eq!(deadline, 2400 + 800);
            op_engine_step(eng, OpInputKind::Tick, deadline);
            op_engine_step(eng, OpInputKind::HardRepeat, 3500);
        }
        let mut kinds = Vec::new();
        let mut d = OpDirective {
            t_ms: 0,
            kind: OpDirectiveKind::Warning,
            cursor: 0,
        };
        while unsafe { op_engine_next_directive(eng, &mut d) } == OpStatus::Ok {
            kinds.push((d.kind, d.cursor));
        }
        assert_eq!(kinds.len(), 11);
        assert_eq!(kinds[9], (OpDirectiveKind::ShowPreview, 8));
        assert_eq!(kinds[10], (OpDirectiveKind::CommitOutput, 8));
        let (mut phase, mut cursor) = (OpPhase::Inactive, 0);
        assert_eq!(unsafe { op_engine_phase(eng, &mut phase, &mut cursor) }, OpStatus::Ok);
        assert_eq!((phase, cursor), (OpPhase::Committed, 8));
        let mut t = 0;
        assert_eq!(unsafe { op_engine_next_deadline(eng, &mut t) }, OpStatus::Empty);
        unsafe { op_engine_free(eng) };
    }

    #[test]
    fn engine_rejects_bad_config() {
        let mut eng = ptr::null_mut();
        assert_eq!(unsafe { op_engine_new(0, 800, 0.6, &mut eng) }, OpStatus::InvalidConfig);
        assert_eq!(unsafe { op_engine_new(10, 0, 0.6, &mut eng) }, OpStatus::InvalidConfig);
        assert_eq!(unsafe { op_engine_new(10, 800, 1.5, &mut eng) }, OpStatus::InvalidConfig);
        assert!(eng.is_null());
    }
}
