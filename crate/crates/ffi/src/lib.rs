//! C ABI over `qsched-core`.
//!
//! Every fallible call returns a [`QschedStatus`]; on failure the message is
//! available from [`qsched_last_error`] on the same thread. Weights cross the
//! boundary as exact decimal or `n/d` strings. Strings returned through
//! `char **` out-parameters are owned by the caller and must be released
//! with [`qsched_string_free`]; handles with their matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qsched_core::harness::{parse_params, run_solver, GenFlags, HarnessError, Solver};
use qsched_core::io::{instance_to_json, log_to_csv, parse_instance, parse_schedule};
use qsched_core::model::{Instance, TransmissionLog};
use qsched_core::offline::{greedy_opt, oracle_opt};
use qsched_core::schedulers::Checks;
use qsched_core::verify::verify_schedule;
use qsched_core::weight::Weight;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QschedStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, unknown name or out-of-range parameter.
    InvalidArgument = 1,
    /// Malformed instance, schedule or flag document.
    ParseError = 2,
    /// The invariant suite flagged the run.
    InvariantViolation = 3,
    /// The exhaustive oracle was asked for more packets than it enumerates.
    BudgetExceeded = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// An instance: capacity, packets, and any reference optimum.
pub struct QschedInstance {
    inner: Instance,
}

/// The result of one simulation.
pub struct QschedRun {
    log: TransmissionLog,
    total: Weight,
    violations: Vec<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

struct Failure(QschedStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(QschedStatus::InvalidArgument, msg.into())
    }

    fn parse(msg: impl ToString) -> Self {
        Failure(QschedStatus::ParseError, msg.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let status = match &e {
            HarnessError::Invariant(_) => QschedStatus::InvariantViolation,
            HarnessError::Budget(_) => QschedStatus::BudgetExceeded,
            HarnessError::Instance(_) => QschedStatus::ParseError,
            _ => QschedStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `body`, converting errors and panics into a status plus last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QschedStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            QschedStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            QschedStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::invalid(format!("{what} is not UTF-8")))
}

/// # Safety
/// As [`text`], but null maps to `None`.
unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

/// # Safety
/// `p` is null or points to a live handle created by this library.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::invalid(format!("{what} is null")))
}

/// # Safety
/// `out` is null or valid for one pointer write.
unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::invalid("output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// # Safety
/// `out` is null or valid for one pointer write.
unsafe fn put_string(out: *mut *mut c_char, value: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::invalid("output pointer is null"));
    }
    *out = CString::new(value.replace('\0', " ")).expect("nul bytes removed").into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or "" after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn qsched_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qsched_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qsched_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance document (JSON with `capacity` and `packets`).
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qsched_instance_parse(json: *const c_char, out: *mut *mut QschedInstance) -> QschedStatus {
    guard(|| {
        let json = text(json, "json")?;
        let inner = parse_instance(json).map_err(Failure::parse)?;
        put(out, QschedInstance { inner })
    })
}

/// Builds an instance from a JSON object of generator flags, for example
/// `{"family": "best-effort-lb", "b": 4, "eps": "1/4"}`. Families:
/// `edf-nemesis`, `best-effort-lb`, `greedy-lb`, `random`. `seed` is used
/// by `random` when the flags carry none.
///
/// # Safety
/// `flags_json` is a NUL-terminated string; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qsched_instance_generate(
    flags_json: *const c_char,
    seed: u64,
    out: *mut *mut QschedInstance,
) -> QschedStatus {
    guard(|| {
        let flags: GenFlags = serde_json::from_str(text(flags_json, "flags_json")?).map_err(Failure::parse)?;
        let spec = flags.to_spec(seed)?;
        let inner = spec.generate().map_err(|e| Failure::invalid(e.to_string()))?;
        put(out, QschedInstance { inner })
    })
}

/// # Safety
/// `instance` is null or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qsched_instance_free(instance: *mut QschedInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of packets, or 0 for a null handle.
///
/// # Safety
/// `instance` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsched_instance_len(instance: *const QschedInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.len())
}

/// Buffer capacity, or 0 for a null handle.
///
/// # Safety
/// `instance` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsched_instance_capacity(instance: *const QschedInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.capacity())
}

/// Serializes the instance in the same JSON format `qsched_instance_parse`
/// reads.
///
/// # Safety
/// `instance` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qsched_instance_to_json(instance: *const QschedInstance, out: *mut *mut c_char) -> QschedStatus {
    guard(|| {
        let i = handle(instance, "instance")?;
        put_string(out, instance_to_json(&i.inner))
    })
}

/// The certified reference optimum carried by generated instances.
/// `InvalidArgument` when the instance has none.
///
/// # Safety
/// `instance` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qsched_instance_reference_weight(
    instance: *const QschedInstance,
    out: *mut *mut c_char,
) -> QschedStatus {
    guard(|| {
        let i = handle(instance, "instance")?;
        let w = i.inner.reference_opt_weight.ok_or_else(|| Failure::invalid("instance carries no reference weight"))?;
        put_string(out, w.to_string())
    })
}

/// Runs `algorithm` (`me`, `rme`, `edf`, `greedy`, `offline-greedy`,
/// `oracle`). `alpha` and `gamma` may be null for the defaults; they accept
/// decimals, `n/d`, `phi`, `1/phi` and `1/phi^2`. With `check` non-zero the
/// invariant suite runs; violations are kept on the run and also reported
/// as `InvariantViolation`, in which case `*out` is still written.
///
/// # Safety
/// String arguments are null (where allowed) or NUL-terminated; `instance`
/// is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qsched_simulate(
    instance: *const QschedInstance,
    algorithm: *const c_char,
    alpha: *const c_char,
    gamma: *const c_char,
    seed: u64,
    check: i32,
    out: *mut *mut QschedRun,
) -> QschedStatus {
    guard(|| {
        let i = handle(instance, "instance")?;
        let solver: Solver = text(algorithm, "algorithm")?.parse().map_err(Failure::invalid)?;
        let params = parse_params(solver, optional_text(alpha, "alpha")?, optional_text(gamma, "gamma")?)?;
        let checks = if check != 0 { Checks::Collect } else { Checks::Off };
        let run = run_solver(&i.inner, solver, &params, seed, checks)?;
        let violations: Vec<String> = run.report.violations.iter().map(|v| v.to_string()).collect();
        let first = violations.first().cloned();
        put(out, QschedRun { total: run.total_weight(), log: run.log, violations })?;
        match first {
            None => Ok(()),
            Some(v) => Err(Failure(QschedStatus::InvariantViolation, v)),
        }
    })
}

/// # Safety
/// `run` is null or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qsched_run_free(run: *mut QschedRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Total delivered weight as an exact string.
///
/// # Safety
/// `run` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qsched_run_total_weight(run: *const QschedRun, out: *mut *mut c_char) -> QschedStatus {
    guard(|| put_string(out, handle(run, "run")?.total.to_string()))
}

/// Total delivered weight rounded to the nearest double, or NaN for null.
///
/// # Safety
/// `run` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsched_run_total_weight_f64(run: *const QschedRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.total.to_f64())
}

/// Number of packets sent, or 0 for null.
///
/// # Safety
/// `run` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsched_run_sent(run: *const QschedRun) -> usize {
    run.as_ref().map_or(0, |r| r.log.len())
}

/// Number of invariant violations recorded, or 0 for null.
///
/// # Safety
/// `run` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsched_run_violations(run: *const QschedRun) -> usize {
    run.as_ref().map_or(0, |r| r.violations.len())
}

/// The transmission log as CSV with header `step,packet_id,weight`.
///
/// # Safety
/// `run` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qsched_run_log_csv(run: *const QschedRun, out: *mut *mut c_char) -> QschedStatus {
    guard(|| put_string(out, log_to_csv(&handle(run, "run")?.log)))
}

/// Offline optimum by `method`: `oracle` (exhaustive, at most 18 packets)
/// or `offline-greedy` (polynomial, a lower bound in general).
///
/// # Safety
/// `instance` is a live handle; `method` is NUL-terminated; `out` is valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn qsched_offline_opt(
    instance: *const QschedInstance,
    method: *const c_char,
    out: *mut *mut c_char,
) -> QschedStatus {
    guard(|| {
        let i = handle(instance, "instance")?;
        let weight = match text(method, "method")? {
            "oracle" => oracle_opt(&i.inner).map_err(|e| Failure(QschedStatus::BudgetExceeded, e.to_string()))?.weight,
            "offline-greedy" => greedy_opt(&i.inner).weight,
            other => return Err(Failure::invalid(format!("unknown method {other:?} (oracle|offline-greedy)"))),
        };
        put_string(out, weight.to_string())
    })
}

/// Checks a schedule (CSV `step,packet_id[,weight]` or a JSON list of
/// `{step, packet}`) against the instance. `*ok` becomes 1 when it
/// verifies and 0 otherwise; `listing`, when not null, receives "ok" or the
/// violations joined by "; ".
///
/// # Safety
/// `instance` is a live handle; `schedule` is NUL-terminated; `ok` is valid
/// for one write; `listing` is null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qsched_verify(
    instance: *const QschedInstance,
    schedule: *const c_char,
    ok: *mut i32,
    listing: *mut *mut c_char,
) -> QschedStatus {
    guard(|| {
        let i = handle(instance, "instance")?;
        let schedule = parse_schedule(text(schedule, "schedule")?).map_err(Failure::parse)?;
        let verdict = verify_schedule(&i.inner, &schedule).map_err(|e| Failure::invalid(e.to_string()))?;
        if ok.is_null() {
            return Err(Failure::invalid("ok pointer is null"));
        }
        *ok = i32::from(verdict.is_ok());
        if !listing.is_null() {
            put_string(listing, verdict.to_string())?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn guard_catches_panics() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, QschedStatus::Panic);
        let msg = unsafe { CStr::from_ptr(qsched_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
    }

    #[test]
    fn success_clears_last_error() {
        set_error("stale");
        assert_eq!(guard(|| Ok(())), QschedStatus::Ok);
        assert!(unsafe { CStr::from_ptr(qsched_last_error()) }.to_bytes().is_empty());
    }

    #[test]
    fn null_outputs_are_rejected() {
        let json = CString::new(r#"{"capacity":1,"packets":[]}"#).unwrap();
        let status = unsafe { qsched_instance_parse(json.as_ptr(), ptr::null_mut()) };
        assert_eq!(status, QschedStatus::InvalidArgument);
    }
}
