// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! C bindings for `qnetsim`.
//!
//! Every fallible call returns a [`QnsStatus`]. On failure the message is
//! kept per thread and read back with [`qns_last_error_message`]. Strings
//! handed out by the library are freed with [`qns_string_free`]; reports
//! with [`qns_report_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use qnetsim::cli::{cmd_run, cmd_validate, RunOptions, RunReport};
use qnetsim::{Error, ErrorClass};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    /// The scenario is well formed but not runnable.
    Semantic = 5,
    Engine = 6,
    Panic = 7,
}

/// Result of running a scenario. Opaque to C.
pub struct QnsReport {
    report: RunReport,
    out_dir: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> QnsStatus {
    match err.class() {
        ErrorClass::Parse => QnsStatus::Parse,
        ErrorClass::Io => QnsStatus::Io,
        ErrorClass::Semantic => QnsStatus::Semantic,
        ErrorClass::Engine => QnsStatus::Engine,
    }
}

fn fail(status: QnsStatus, msg: impl Into<String>) -> QnsStatus {
    set_error(msg);
    status
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<Option<&'a str>, QnsStatus> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s)
        .to_str()
        .map(Some)
        .map_err(|_| fail(QnsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn guarded(f: impl FnOnce() -> QnsStatus) -> QnsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(QnsStatus::Panic, msg)
        }
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn qns_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Free a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or came from this library and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// ‖ρ_E − I/d_E‖₁ upper bound for `n_e` observed and `n_b` hidden qubits.
#[no_mangle]
pub extern "C" fn qns_decoupling_bound(n_e: usize, n_b: usize) -> f64 {
    qnetsim::scrambling::decoupling_bound(n_e, n_b)
}

/// Check a scenario file without running it. On success `*diagnostics`
/// (if not null) receives a JSON object to free with [`qns_string_free`].
///
/// # Safety
/// `path` is a valid NUL-terminated string; `diagnostics` is null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qns_validate(
    path: *const c_char,
    diagnostics: *mut *mut c_char,
) -> QnsStatus {
    guarded(|| {
        let path = match read_str(path, "path") {
            Ok(Some(p)) => p,
            Ok(None) => return fail(QnsStatus::NullArgument, "path is null"),
            Err(s) => return s,
        };
        match cmd_validate(PathBuf::from(path).as_path()) {
            Ok(d) => {
                if !diagnostics.is_null() {
                    let json = serde_json::to_string(&d).unwrap_or_default();
                    *diagnostics = into_c_string(json);
                }
                QnsStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Run a scenario file and write its artifacts. `out_dir` may be null to
/// use the scenario's own choice; `seed` overrides the scenario seed when
/// `override_seed` is true. A run whose checks fail still returns
/// `QNS_STATUS_OK`; see [`qns_report_passed`].
///
/// # Safety
/// `path` is a valid NUL-terminated string, `out_dir` is null or one, and
/// `report` is writable.
#[no_mangle]
pub unsafe extern "C" fn qns_run_scenario(
    path: *const c_char,
    out_dir: *const c_char,
    override_seed: bool,
    seed: u64,
    report: *mut *mut QnsReport,
) -> QnsStatus {
    guarded(|| {
        if report.is_null() {
            return fail(QnsStatus::NullArgument, "report is null");
        }
        *report = ptr::null_mut();
        let path = match read_str(path, "path") {
            Ok(Some(p)) => p,
            Ok(None) => return fail(QnsStatus::NullArgument, "path is null"),
            Err(s) => return s,
        };
        let out = match read_str(out_dir, "out_dir") {
            Ok(o) => o.map(PathBuf::from),
            Err(s) => return s,
        };
        let opts = RunOptions {
            seed: override_seed.then_some(seed),
            out,
            ..RunOptions::default()
        };
        match cmd_run(PathBuf::from(path).as_path(), &opts) {
            Ok(outcome) => {
                let out_dir = CString::new(outcome.out_dir.to_string_lossy().replace('\0', " "))
                    .unwrap_or_default();
                *report = Box::into_raw(Box::new(QnsReport {
                    report: outcome.report,
                    out_dir,
                }));
                QnsStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Whether every check of the run passed. False for null.
///
/// # Safety
/// `report` is null or a live report.
#[no_mangle]
pub unsafe extern "C" fn qns_report_passed(report: *const QnsReport) -> bool {
    report.as_ref().is_some_and(|r| r.report.passed)
}

/// Process exit code the command-line tool would use for this run.
///
/// # Safety
/// `report` is null or a live report.
#[no_mangle]
pub unsafe extern "C" fn qns_report_exit_code(report: *const QnsReport) -> i32 {
    report.as_ref().map_or(-1, |r| r.report.exit_code())
}

/// The report as pretty JSON; free with [`qns_string_free`]. Null for a
/// null report.
///
/// # Safety
/// `report` is null or a live report.
#[no_mangle]
pub unsafe extern "C" fn qns_report_json(report: *const QnsReport) -> *mut c_char {
    report
        .as_ref()
        .map_or(ptr::null_mut(), |r| into_c_string(r.report.to_json()))
}

/// Directory the artifacts were written to, owned by the report.
///
/// # Safety
/// `report` is null or a live report.
#[no_mangle]
pub unsafe extern "C" fn qns_report_out_dir(report: *const QnsReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.out_dir.as_ptr())
}

/// # Safety
/// `report` is null or a live report that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qns_report_free(report: *mut QnsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
