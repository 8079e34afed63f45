//! C interface to the heavytail library.
//!
//! The surface mirrors the Rust API at arm's length: policies live behind
//! an opaque handle, every call returns a status code, and the message for
//! the most recent failure on the calling thread is available through
//! [`ht_last_error_message`]. Strings handed out by this library are
//! allocated here and must come back through [`ht_string_free`].
//!
//! The generated header lands in `include/heavytail.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use heavytail::bounds::evaluate_named;
use heavytail::estimators::{
    confidence_radius, EstimatorKind, EstimatorSpec, MomentParams, Sample,
};
use heavytail::harness::{run_experiment, run_experiment_with_workers, ExperimentConfig};
use heavytail::policies::{PolicyState, PolicyVariant};
use heavytail::Error;

/// Outcome of a call. Anything but `Ok` leaves a message for
/// [`ht_last_error_message`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    PreconditionViolated = 4,
    ValidationFailed = 5,
    IoFailed = 6,
    JsonFailed = 7,
    Panicked = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HtPolicyVariant {
    RobustUcb = 0,
    ModifiedRobustUcb = 1,
    BaselineUcb = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HtEstimatorKind {
    Empirical = 0,
    Truncated = 1,
    MedianOfMeans = 2,
    Catoni = 3,
}

/// A bandit policy with its per-arm observation state. Create with
/// [`ht_policy_new`], destroy with [`ht_policy_free`].
pub struct HtPolicy {
    inner: PolicyState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> HtStatus {
    match err {
        Error::InvalidInput(_) => HtStatus::InvalidInput,
        Error::Precondition(_) => HtStatus::PreconditionViolated,
        Error::Validation(_) => HtStatus::ValidationFailed,
        Error::Io(_) => HtStatus::IoFailed,
        Error::Json(_) => HtStatus::JsonFailed,
    }
}

fn fail(err: &Error) -> HtStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Run a fallible body, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), HtStatus>) -> HtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HtStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in heavytail".to_string());
            set_error(&text);
            HtStatus::Panicked
        }
    }
}

fn null_pointer(name: &str) -> HtStatus {
    set_error(&format!("{name} must not be null"));
    HtStatus::NullPointer
}

/// Read an optional double parameter; null means absent.
unsafe fn opt_f64(ptr: *const f64) -> Option<f64> {
    if ptr.is_null() {
        None
    } else {
        Some(*ptr)
    }
}

fn build_spec(
    kind: HtEstimatorKind,
    epsilon: f64,
    raw_bound_u: Option<f64>,
    central_bound_v: Option<f64>,
) -> Result<EstimatorSpec, Error> {
    let mut params = MomentParams::new(epsilon)?;
    if let Some(u) = raw_bound_u {
        params = params.with_raw_bound(u)?;
    }
    if let Some(v) = central_bound_v {
        params = params.with_central_bound(v)?;
    }
    let kind = match kind {
        HtEstimatorKind::Empirical => EstimatorKind::Empirical,
        HtEstimatorKind::Truncated => EstimatorKind::Truncated,
        HtEstimatorKind::MedianOfMeans => EstimatorKind::MedianOfMeans,
        HtEstimatorKind::Catoni => EstimatorKind::Catoni,
    };
    EstimatorSpec::new(kind, params)
}

unsafe fn parse_utf8<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, HtStatus> {
    if ptr.is_null() {
        return Err(null_pointer(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_error(&format!("{name} is not valid UTF-8: {e}"));
        HtStatus::InvalidUtf8
    })
}

/// Message for the most recent failing call on this thread; empty string if
/// nothing failed yet. The pointer stays valid until the next failing call
/// on the same thread.
#[no_mangle]
pub extern "C" fn ht_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ht_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Create a policy.
///
/// `raw_bound_u` and `central_bound_v` are optional moment bounds; pass
/// null to leave one undeclared. Which bounds are required depends on the
/// estimator, and variant/estimator pairings are checked here.
///
/// # Safety
/// `out` must point to writable storage for one pointer; the optional
/// bound pointers must be null or point to readable doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_policy_new(
    variant: HtPolicyVariant,
    kind: HtEstimatorKind,
    epsilon: f64,
    raw_bound_u: *const f64,
    central_bound_v: *const f64,
    num_arms: usize,
    out: *mut *mut HtPolicy,
) -> HtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let spec =
            build_spec(kind, epsilon, opt_f64(raw_bound_u), opt_f64(central_bound_v))
                .map_err(|e| fail(&e))?;
        let variant = match variant {
            HtPolicyVariant::RobustUcb => PolicyVariant::RobustUcb,
            HtPolicyVariant::ModifiedRobustUcb => PolicyVariant::ModifiedRobustUcb,
            HtPolicyVariant::BaselineUcb => PolicyVariant::BaselineUcb,
        };
        let inner = PolicyState::new(variant, spec, num_arms).map_err(|e| fail(&e))?;
        *out = Box::into_raw(Box::new(HtPolicy { inner }));
        Ok(())
    })
}

/// Destroy a policy created by [`ht_policy_new`]. Null is a no-op.
///
/// # Safety
/// `policy` must be a pointer from [`ht_policy_new`] that has not been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn ht_policy_free(policy: *mut HtPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Choose the arm to play in round `t` (1-based).
///
/// # Safety
/// `policy` must be a live handle; `out_arm` must point to writable
/// storage.
#[no_mangle]
pub unsafe extern "C" fn ht_policy_select_arm(
    policy: *mut HtPolicy,
    t: u64,
    out_arm: *mut usize,
) -> HtStatus {
    guard(|| {
        if policy.is_null() {
            return Err(null_pointer("policy"));
        }
        if out_arm.is_null() {
            return Err(null_pointer("out_arm"));
        }
        let arm = (*policy).inner.select_arm(t).map_err(|e| fail(&e))?;
        *out_arm = arm;
        Ok(())
    })
}

/// Record the reward observed for one pull of `arm`.
///
/// # Safety
/// `policy` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ht_policy_update(
    policy: *mut HtPolicy,
    arm: usize,
    reward: f64,
) -> HtStatus {
    guard(|| {
        if policy.is_null() {
            return Err(null_pointer("policy"));
        }
        (*policy).inner.update(arm, reward).map_err(|e| fail(&e))
    })
}

/// Evaluate one arm's index at round `t`. An arm that must be played
/// (never pulled, or held by the Catoni gate) reports
/// `*out_finite = false` and an unspecified value.
///
/// # Safety
/// `policy` must be a live handle; `out_finite` and `out_value` must point
/// to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ht_policy_index(
    policy: *mut HtPolicy,
    arm: usize,
    t: u64,
    out_finite: *mut bool,
    out_value: *mut f64,
) -> HtStatus {
    guard(|| {
        if policy.is_null() {
            return Err(null_pointer("policy"));
        }
        if out_finite.is_null() || out_value.is_null() {
            return Err(null_pointer("out_finite/out_value"));
        }
        let index = (*policy).inner.index(arm, t).map_err(|e| fail(&e))?;
        *out_finite = !index.is_infinite();
        *out_value = index.value();
        Ok(())
    })
}

/// Number of recorded pulls of `arm`.
///
/// # Safety
/// `policy` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ht_policy_pull_count(
    policy: *const HtPolicy,
    arm: usize,
    out: *mut u64,
) -> HtStatus {
    guard(|| {
        if policy.is_null() {
            return Err(null_pointer("policy"));
        }
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let state = &(*policy).inner;
        if arm >= state.num_arms() {
            let err = Error::invalid_input(format!(
                "arm {arm} out of range for {} arms",
                state.num_arms()
            ));
            return Err(fail(&err));
        }
        *out = state.pull_count(arm);
        Ok(())
    })
}

/// Number of update calls so far.
///
/// # Safety
/// `policy` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ht_policy_rounds(policy: *const HtPolicy, out: *mut u64) -> HtStatus {
    guard(|| {
        if policy.is_null() {
            return Err(null_pointer("policy"));
        }
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        *out = (*policy).inner.rounds_completed();
        Ok(())
    })
}

/// One-shot robust mean estimate of `values[0..len]` at confidence `delta`.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must point to
/// writable storage; the optional bound pointers must be null or point to
/// readable doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_estimate(
    kind: HtEstimatorKind,
    epsilon: f64,
    raw_bound_u: *const f64,
    central_bound_v: *const f64,
    values: *const f64,
    len: usize,
    delta: f64,
    out: *mut f64,
) -> HtStatus {
    guard(|| {
        if values.is_null() && len > 0 {
            return Err(null_pointer("values"));
        }
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let spec =
            build_spec(kind, epsilon, opt_f64(raw_bound_u), opt_f64(central_bound_v))
                .map_err(|e| fail(&e))?;
        let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(values, len) };
        let sample = Sample::from_values(slice.to_vec()).map_err(|e| fail(&e))?;
        *out = spec.estimate(&sample, delta).map_err(|e| fail(&e))?;
        Ok(())
    })
}

/// Deviation radius of the estimator after `n` observations at confidence
/// `delta`.
///
/// # Safety
/// `out` must point to writable storage; the optional bound pointers must
/// be null or point to readable doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_confidence_radius(
    kind: HtEstimatorKind,
    epsilon: f64,
    raw_bound_u: *const f64,
    central_bound_v: *const f64,
    n: u64,
    delta: f64,
    out: *mut f64,
) -> HtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let spec =
            build_spec(kind, epsilon, opt_f64(raw_bound_u), opt_f64(central_bound_v))
                .map_err(|e| fail(&e))?;
        *out = confidence_radius(&spec, n, delta).map_err(|e| fail(&e))?;
        Ok(())
    })
}

/// Evaluate a closed-form bound by name on JSON parameters; the names and
/// parameter shapes match the CLI's `bounds` subcommand.
///
/// # Safety
/// `which` and `params_json` must be NUL-terminated strings; `out` must
/// point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ht_bound_eval(
    which: *const c_char,
    params_json: *const c_char,
    out: *mut f64,
) -> HtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let which = parse_utf8(which, "which")?;
        let params = parse_utf8(params_json, "params_json")?;
        *out = evaluate_named(which, params).map_err(|e| fail(&e))?;
        Ok(())
    })
}

/// Run a full experiment from a JSON config (the same schema the CLI
/// loads) and hand back the trace as a JSON string. `workers` = 0 uses the
/// environment default. The string must be released with
/// [`ht_string_free`]. No files are written.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_trace_json` must
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_run_experiment_json(
    config_json: *const c_char,
    workers: usize,
    out_trace_json: *mut *mut c_char,
) -> HtStatus {
    guard(|| {
        if out_trace_json.is_null() {
            return Err(null_pointer("out_trace_json"));
        }
        let text = parse_utf8(config_json, "config_json")?;
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| fail(&Error::Json(e)))?;
        let trace = if workers == 0 {
            run_experiment(&config)
        } else {
            run_experiment_with_workers(&config, workers)
        }
        .map_err(|e| fail(&e))?;
        let body = serde_json::to_string(&trace).map_err(|e| fail(&Error::Json(e)))?;
        let cstring = CString::new(body).map_err(|_| {
            set_error("trace JSON contained an interior NUL");
            HtStatus::JsonFailed
        })?;
        *out_trace_json = cstring.into_raw();
        Ok(())
    })
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be a pointer previously returned by a heavytail function that
/// allocates, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ht_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
