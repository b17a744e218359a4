//! C ABI over the softstep engine.
//!
//! Handles are opaque and owned by the caller, who must release them with
//! the matching `_free` function. Every fallible call returns a
//! [`SoftstepStatus`]; the message of the last failure on the calling thread
//! is available from [`softstep_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use softstep::gait::SupportKind;
use softstep::math::Vec3;
use softstep::scenario::Scenario;
use softstep::sim::{run, StepError, StepOutcome, TraceOptions, World};
use softstep::vegetation::{beta_for_vegetation, displacement, DeformParams, PlatformState};
use softstep::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoftstepStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Scenario = 3,
    Io = 4,
    InvalidParameter = 5,
    OutOfTerrain = 6,
    FellOver = 7,
    /// The walk reached the far edge of the terrain; the world did not move.
    EdgeReached = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoftstepContact {
    None = 0,
    Ground = 1,
    Platform = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoftstepPlatformState {
    Inactive = 0,
    Rising = 1,
    Hold = 2,
    Collapsing = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SoftstepVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<Vec3> for SoftstepVec3 {
    fn from(v: Vec3) -> Self {
        Self { x: v.x, y: v.y, z: v.z }
    }
}

impl From<SoftstepVec3> for Vec3 {
    fn from(v: SoftstepVec3) -> Self {
        Vec3::new(v.x, v.y, v.z)
    }
}

/// One simulated frame. Index 0 of the per-foot arrays is the left foot.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SoftstepFrame {
    pub frame: u64,
    pub time: f64,
    pub com: SoftstepVec3,
    pub tilt: f64,
    pub tilt_rate: f64,
    pub torque: f64,
    pub beta: f64,
    pub foot_position: [SoftstepVec3; 2],
    pub foot_target: [SoftstepVec3; 2],
    pub foot_contact: [SoftstepContact; 2],
    pub platform_state: [SoftstepPlatformState; 2],
    pub platform_height: [f64; 2],
    pub carved: f64,
    pub deposited: f64,
}

/// Parsed scenario.
pub struct SoftstepScenario {
    inner: Scenario,
}

/// Simulation world built from a scenario.
pub struct SoftstepWorld {
    inner: World,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: SoftstepStatus, msg: impl Into<String>) -> SoftstepStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> SoftstepStatus {
    match e {
        Error::OutOfTerrain { .. } | Error::RayBelowSurface { .. } => SoftstepStatus::OutOfTerrain,
        Error::FallOver { .. } => SoftstepStatus::FellOver,
        Error::InvalidParameter(_) => SoftstepStatus::InvalidParameter,
        Error::Scenario { .. } => SoftstepStatus::Scenario,
        Error::Io { .. } => SoftstepStatus::Io,
    }
}

fn from_error(e: Error) -> SoftstepStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, turning a panic into [`SoftstepStatus::Panic`].
fn guard(f: impl FnOnce() -> SoftstepStatus) -> SoftstepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SoftstepStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SoftstepStatus> {
    if p.is_null() {
        return Err(fail(SoftstepStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(SoftstepStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or
/// 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn softstep_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses scenario text. On success `*out` receives a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn softstep_scenario_parse(
    text: *const c_char,
    out: *mut *mut SoftstepScenario,
) -> SoftstepStatus {
    guard(|| {
        if out.is_null() {
            return fail(SoftstepStatus::NullArgument, "out is null");
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::parse(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SoftstepScenario { inner }));
                SoftstepStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Loads a scenario file. On success `*out` receives a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn softstep_scenario_load(
    path: *const c_char,
    out: *mut *mut SoftstepScenario,
) -> SoftstepStatus {
    guard(|| {
        if out.is_null() {
            return fail(SoftstepStatus::NullArgument, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Scenario::load(Path::new(path), &[]) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SoftstepScenario { inner }));
                SoftstepStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Replaces one value, given as `section.key=value`. The scenario is left
/// unchanged on failure.
///
/// # Safety
/// `scenario` must be a live handle and `assignment` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn softstep_scenario_set(
    scenario: *mut SoftstepScenario,
    assignment: *const c_char,
) -> SoftstepStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(SoftstepStatus::NullArgument, "scenario is null");
        };
        let assignment = match str_arg(assignment, "assignment") {
            Ok(a) => a,
            Err(st) => return st,
        };
        match Scenario::parse_with_overrides(&s.inner.to_text(), &[assignment.to_string()]) {
            Ok(next) => {
                s.inner = next;
                SoftstepStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn softstep_scenario_free(scenario: *mut SoftstepScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Builds a world at the start of the scenario's walk.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn softstep_world_new(
    scenario: *const SoftstepScenario,
    out: *mut *mut SoftstepWorld,
) -> SoftstepStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(SoftstepStatus::NullArgument, "scenario is null");
        };
        if out.is_null() {
            return fail(SoftstepStatus::NullArgument, "out is null");
        }
        match World::new(&s.inner) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SoftstepWorld { inner }));
                SoftstepStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Advances one frame and fills `*frame`. Returns
/// [`SoftstepStatus::EdgeReached`] without touching `*frame` when the walk
/// is over; any error status leaves the world unusable.
///
/// # Safety
/// `world` must be a live handle and `frame` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn softstep_world_step(world: *mut SoftstepWorld, frame: *mut SoftstepFrame) -> SoftstepStatus {
    guard(|| {
        let Some(w) = world.as_mut() else {
            return fail(SoftstepStatus::NullArgument, "world is null");
        };
        if frame.is_null() {
            return fail(SoftstepStatus::NullArgument, "frame is null");
        }
        match w.inner.step() {
            Ok(StepOutcome::Advanced(t)) => {
                let contact = |c: Option<SupportKind>| match c {
                    None => SoftstepContact::None,
                    Some(SupportKind::Ground) => SoftstepContact::Ground,
                    Some(SupportKind::Platform) => SoftstepContact::Platform,
                };
                let platform = |p: PlatformState| match p {
                    PlatformState::Inactive => SoftstepPlatformState::Inactive,
                    PlatformState::Rising => SoftstepPlatformState::Rising,
                    PlatformState::Hold => SoftstepPlatformState::Hold,
                    PlatformState::Collapsing => SoftstepPlatformState::Collapsing,
                };
                *frame = SoftstepFrame {
                    frame: t.frame,
                    time: t.time,
                    com: t.com.into(),
                    tilt: t.tilt,
                    tilt_rate: t.tilt_rate,
                    torque: t.torque,
                    beta: t.beta,
                    foot_position: t.feet.map(|f| f.position.into()),
                    foot_target: t.feet.map(|f| f.target.into()),
                    foot_contact: t.feet.map(|f| contact(f.contact)),
                    platform_state: t.feet.map(|f| platform(f.platform)),
                    platform_height: t.feet.map(|f| f.platform_height),
                    carved: t.carved,
                    deposited: t.deposited,
                };
                SoftstepStatus::Ok
            }
            Ok(StepOutcome::EdgeReached) => SoftstepStatus::EdgeReached,
            Err(StepError { frame, error }) => fail(status_of(&error), format!("frame {frame}: {error}")),
        }
    })
}

/// Ground height under `(x, z)`.
///
/// # Safety
/// `world` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn softstep_world_sample_height(
    world: *const SoftstepWorld,
    x: f64,
    z: f64,
    out: *mut f64,
) -> SoftstepStatus {
    guard(|| {
        let Some(w) = world.as_ref() else {
            return fail(SoftstepStatus::NullArgument, "world is null");
        };
        if out.is_null() {
            return fail(SoftstepStatus::NullArgument, "out is null");
        }
        match w.inner.field().sample_height(x, z) {
            Ok(h) => {
                *out = h;
                SoftstepStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Sum of cell heights times cell area (m³).
///
/// # Safety
/// `world` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn softstep_world_total_volume(world: *const SoftstepWorld, out: *mut f64) -> SoftstepStatus {
    guard(|| {
        let Some(w) = world.as_ref() else {
            return fail(SoftstepStatus::NullArgument, "world is null");
        };
        if out.is_null() {
            return fail(SoftstepStatus::NullArgument, "out is null");
        }
        *out = w.inner.field().total_volume();
        SoftstepStatus::Ok
    })
}

/// # Safety
/// `world` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn softstep_world_free(world: *mut SoftstepWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Runs the whole scenario and writes its artifacts into `out_dir`.
/// `*exit_code` receives 0 for a completed walk, 2 for a fall and 1 for a
/// failed frame.
///
/// # Safety
/// `scenario` must be a live handle, `out_dir` a NUL-terminated string and
/// `exit_code` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn softstep_run(
    scenario: *const SoftstepScenario,
    out_dir: *const c_char,
    deterministic: bool,
    exit_code: *mut i32,
) -> SoftstepStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(SoftstepStatus::NullArgument, "scenario is null");
        };
        if exit_code.is_null() {
            return fail(SoftstepStatus::NullArgument, "exit_code is null");
        }
        let dir = match str_arg(out_dir, "out_dir") {
            Ok(d) => d,
            Err(st) => return st,
        };
        let artifacts = match run(&s.inner) {
            Ok(a) => a,
            Err(e) => return from_error(e),
        };
        if let Err(e) = artifacts.write_to(Path::new(dir), TraceOptions { deterministic }) {
            return from_error(e);
        }
        *exit_code = artifacts.metrics.end_reason.exit_code();
        SoftstepStatus::Ok
    })
}

/// Push of a foot at `foot` on a grass point `p`.
#[no_mangle]
pub extern "C" fn softstep_displacement(p: SoftstepVec3, foot: SoftstepVec3, t_max: f64, gamma: f64) -> SoftstepVec3 {
    displacement(p.into(), foot.into(), &DeformParams { t_max, gamma }).into()
}

/// Swing gain for grass of `class_height`.
#[no_mangle]
pub extern "C" fn softstep_beta_for_vegetation(class_height: f64, base_beta: f64, min_beta: f64) -> f64 {
    beta_for_vegetation(class_height, base_beta, min_beta)
}
