//! C ABI over the planner.
//!
//! Every fallible function returns a [`PfcStatus`]; on failure the message is
//! kept per thread and read with [`pfc_last_error_message`]. Handles are
//! opaque and owned by the caller once returned; free them with the matching
//! `*_free` function. Strings returned through `char **` must be released
//! with [`pfc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pfc_core::harness::{run_experiment, ExperimentConfig};
use pfc_core::{
    generate_plan, parse_action, parse_configuration, render_configuration, toh, Configuration, Error, Goal,
    OracleBackend, SearchConfig, TaskEnv, TohState,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    IllegalMove = 5,
    Config = 6,
    Backend = 7,
    Io = 8,
    Panic = 9,
}

/// A task configuration (three lists or a room).
pub struct PfcConfiguration {
    inner: Configuration,
}

/// An emitted plan with its run diagnostics.
pub struct PfcPlan {
    actions: Vec<CString>,
    goal_confirmed: bool,
    error: Option<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> PfcStatus {
    match e {
        Error::Parse(_) | Error::UnparseableValue(_) | Error::UnparseableVerdict(_) | Error::TraceFormat { .. } => {
            PfcStatus::Parse
        }
        Error::IllegalMove(_) => PfcStatus::IllegalMove,
        Error::Config(_) => PfcStatus::Config,
        Error::Io(_) => PfcStatus::Io,
        Error::Json(_) => PfcStatus::Parse,
        Error::Backend(_) | Error::Transport(_) | Error::Auth(_) | Error::RateLimited { .. } | Error::EmptyProposal => {
            PfcStatus::Backend
        }
        _ => PfcStatus::InvalidArgument,
    }
}

struct Failure(PfcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PfcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PfcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PfcStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PfcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(PfcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> CString {
    CString::new(s.replace('\0', " ")).unwrap_or_default()
}

fn toh_pair<'a>(a: &'a Configuration, b: &'a Configuration) -> Result<(&'a TohState, &'a TohState), Failure> {
    match (a.as_toh(), b.as_toh()) {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => Err(Failure(PfcStatus::InvalidArgument, "expected list configurations".into())),
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pfc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pfc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pfc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `A = [..]`, `B = [..]`, `C = [..]` lines or a `room N` phrase.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfc_configuration_parse(text: *const c_char, out: *mut *mut PfcConfiguration) -> PfcStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let inner = parse_configuration(text)?;
        write_out(out, Box::into_raw(Box::new(PfcConfiguration { inner })), "out")
    })
}

/// Canonical text form of a configuration.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfc_configuration_render(config: *const PfcConfiguration, out: *mut *mut c_char) -> PfcStatus {
    guard(|| {
        let c = ref_arg(config, "config")?;
        write_out(out, c_string(render_configuration(&c.inner)).into_raw(), "out")
    })
}

/// # Safety
/// `config` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pfc_configuration_free(config: *mut PfcConfiguration) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Whether `move_text` (e.g. `Move 2 from A to C.`) obeys the rules in `config`.
///
/// # Safety
/// Pointers must be valid; `move_text` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pfc_is_legal_move(
    config: *const PfcConfiguration,
    move_text: *const c_char,
    out_legal: *mut bool,
) -> PfcStatus {
    guard(|| {
        let c = ref_arg(config, "config")?;
        let action = parse_action(str_arg(move_text, "move_text")?)?;
        write_out(out_legal, toh::is_legal_move(&c.inner, &action).is_valid(), "out_legal")
    })
}

/// Minimum number of moves between two list configurations.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pfc_bfs_optimal(
    from: *const PfcConfiguration,
    goal: *const PfcConfiguration,
    out_steps: *mut u32,
) -> PfcStatus {
    guard(|| {
        let (a, b) = toh_pair(&ref_arg(from, "from")?.inner, &ref_arg(goal, "goal")?.inner)?;
        write_out(out_steps, toh::bfs_optimal(a, b)?, "out_steps")
    })
}

/// Plans from `initial` to `goal` with the rule-exact backend, branching
/// `branches`, depth `depth` and at most `budget` actions.
///
/// # Safety
/// Pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfc_plan_oracle(
    initial: *const PfcConfiguration,
    goal: *const PfcConfiguration,
    branches: u32,
    depth: u32,
    budget: u32,
    out: *mut *mut PfcPlan,
) -> PfcStatus {
    guard(|| {
        let (initial, goal) = (&ref_arg(initial, "initial")?.inner, &ref_arg(goal, "goal")?.inner);
        toh_pair(initial, goal)?;
        let cfg = SearchConfig {
            branches: branches as usize,
            depth: depth as usize,
            budget: budget as usize,
            ..SearchConfig::default()
        };
        cfg.validate()?;
        let mut backend = OracleBackend::exact(TaskEnv::Toh);
        let (plan, record) = generate_plan("ffi", initial, &Goal::configuration(goal.clone()), &cfg, &mut backend)?;
        let handle = PfcPlan {
            actions: plan.actions().iter().map(|a| c_string(a.render())).collect(),
            goal_confirmed: record.goal_confirmed,
            error: record.error.map(c_string),
        };
        write_out(out, Box::into_raw(Box::new(handle)), "out")
    })
}

/// Number of actions in `plan`; 0 for null.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pfc_plan_len(plan: *const PfcPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.actions.len())
}

/// Action `index` as text, borrowed from the plan; null when out of range.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pfc_plan_action(plan: *const PfcPlan, index: usize) -> *const c_char {
    plan.as_ref().and_then(|p| p.actions.get(index)).map_or(ptr::null(), |s| s.as_ptr())
}

/// Whether the coordinator confirmed the goal.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pfc_plan_goal_confirmed(plan: *const PfcPlan) -> bool {
    plan.as_ref().is_some_and(|p| p.goal_confirmed)
}

/// Error that ended plan generation early, or null.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pfc_plan_error(plan: *const PfcPlan) -> *const c_char {
    plan.as_ref().and_then(|p| p.error.as_ref()).map_or(ptr::null(), |s| s.as_ptr())
}

/// # Safety
/// `plan` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pfc_plan_free(plan: *mut PfcPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Runs an experiment described by a JSON config and returns the summary JSON.
///
/// # Safety
/// `config_json` must be NUL-terminated; `out_summary` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfc_run_experiment_json(
    config_json: *const c_char,
    out_summary: *mut *mut c_char,
) -> PfcStatus {
    guard(|| {
        let cfg: ExperimentConfig = serde_json::from_str(str_arg(config_json, "config_json")?)
            .map_err(|e| Failure(PfcStatus::Config, format!("bad experiment config: {e}")))?;
        let summary = run_experiment(&cfg)?;
        let text = serde_json::to_string(&summary).map_err(Error::from)?;
        write_out(out_summary, c_string(text).into_raw(), "out_summary")
    })
}
