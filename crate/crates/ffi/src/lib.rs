//! C ABI over the `orderdual` engine.
//!
//! Models are opaque `OdModel` handles. Every call returns an `OdStatus`;
//! on failure `od_last_error_message` describes the error raised on the
//! calling thread. Reports come back as JSON strings owned by the caller
//! and released with `od_string_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use orderdual::engine::{self, LoadedModel, SimulateConfig, VerifyConfig};
use orderdual::models::{DualVariant, ModelSpec};
use orderdual::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdStatus {
    Ok = 0,
    /// The call completed and at least one duality check failed.
    CheckFailed = 1,
    NullPointer = 2,
    InvalidUtf8 = 3,
    Parse = 4,
    InvalidModel = 5,
    /// A map or model lacks the structure the operation needs.
    Unsupported = 6,
    /// A numeric or enumeration limit was reached.
    Limit = 7,
    Io = 8,
    Panic = 9,
}

/// A built model. Created by `od_model_builtin` or `od_model_from_json`.
pub struct OdModel {
    inner: LoadedModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OdStatus {
    match e {
        Error::Parse(_) => OdStatus::Parse,
        Error::Io(_) => OdStatus::Io,
        Error::InvalidModel(_)
        | Error::InvalidPoset(_)
        | Error::Dimension(_)
        | Error::NotBijective { .. }
        | Error::NegativeRate { .. }
        | Error::InvalidGenerator(_)
        | Error::NotStochastic(_)
        | Error::Horizon { .. }
        | Error::MSetProperty { .. } => OdStatus::InvalidModel,
        Error::NotALattice(_)
        | Error::NotMonotone { .. }
        | Error::NotAdditive { .. }
        | Error::FunctionNotMonotone { .. }
        | Error::NotAttractive(_) => OdStatus::Unsupported,
        Error::TooLarge { .. }
        | Error::ToleranceUnreachable { .. }
        | Error::ClosureTooLarge { .. }
        | Error::BudgetExceeded { .. } => OdStatus::Limit,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<OdStatus, (OdStatus, String)>) -> OdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            OdStatus::Panic
        }
    }
}

fn lib<T>(r: orderdual::Result<T>) -> Result<T, (OdStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (OdStatus, String) {
    (OdStatus::NullPointer, format!("`{what}` is null"))
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, (OdStatus, String)> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| (OdStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

/// # Safety
/// `p` is a NUL-terminated string.
unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (OdStatus, String)> {
    opt_str(p, what)?.ok_or_else(|| null(what))
}

/// # Safety
/// `m` is null or a live handle.
unsafe fn model_ref<'a>(m: *const OdModel) -> Result<&'a LoadedModel, (OdStatus, String)> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

/// # Safety
/// `p` is null or a NUL-terminated variant name.
unsafe fn variant(p: *const c_char) -> Result<Option<DualVariant>, (OdStatus, String)> {
    opt_str(p, "variant")?.map(|s| lib(DualVariant::parse(s))).transpose()
}

/// # Safety
/// `out` is writable.
unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (OdStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| (OdStatus::Panic, "interior NUL in output".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, (OdStatus, String)> {
    lib(serde_json::to_string(v).map_err(Error::from))
}

/// # Safety
/// `out` is writable.
unsafe fn put_model(out: *mut *mut OdModel, lm: LoadedModel) -> Result<OdStatus, (OdStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(OdModel { inner: lm }));
    Ok(OdStatus::Ok)
}

/// Builds a builtin model from `name[:N]`, e.g. `"voter:3"`.
///
/// # Safety
/// `name` is a NUL-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn od_model_builtin(name: *const c_char, out: *mut *mut OdModel) -> OdStatus {
    guard(|| {
        let name = req_str(name, "name")?;
        let lm = lib(ModelSpec::builtin(name).and_then(LoadedModel::from_spec))?;
        put_model(out, lm)
    })
}

/// Builds a model from its JSON description.
///
/// # Safety
/// `json` is a NUL-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn od_model_from_json(json: *const c_char, out: *mut *mut OdModel) -> OdStatus {
    guard(|| {
        let text = req_str(json, "json")?;
        put_model(out, lib(LoadedModel::from_json(text))?)
    })
}

/// Releases a model. Null is a no-op.
///
/// # Safety
/// `model` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn od_model_free(model: *mut OdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of states; 0 for a null handle.
///
/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn od_model_state_count(model: *const OdModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.model.state_count())
}

/// Number of maps in the random-mapping representation; 0 for a null handle.
///
/// # Safety
/// `model` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn od_model_map_count(model: *const OdModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.model.map_count())
}

/// Per-map classification as JSON.
///
/// # Safety
/// `model` is a live handle and `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn od_model_classify(model: *const OdModel, out_json: *mut *mut c_char) -> OdStatus {
    guard(|| {
        let r = lib(engine::classify(model_ref(model)?))?;
        put_string(out_json, json(&r)?)?;
        Ok(OdStatus::Ok)
    })
}

/// Runs every duality check. Returns `CheckFailed` with the report filled in
/// when a check fails. `variant` may be null for the model's default.
///
/// # Safety
/// `model` is a live handle, `variant` is null or NUL-terminated and
/// `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn od_verify(
    model: *const OdModel,
    variant_name: *const c_char,
    t: f64,
    tol: f64,
    exact: bool,
    seed: u64,
    logs: usize,
    out_json: *mut *mut c_char,
) -> OdStatus {
    guard(|| {
        let cfg = VerifyConfig { t, tol, exact, variant: variant(variant_name)?, seed, logs };
        let r = lib(engine::verify(model_ref(model)?, &cfg))?;
        put_string(out_json, json(&r)?)?;
        Ok(if r.ok { OdStatus::Ok } else { OdStatus::CheckFailed })
    })
}

/// Monte Carlo estimate of both sides of the duality as JSON. Null `x0`, `y0`
/// or `variant` select the defaults; states are given by label or index.
///
/// # Safety
/// `model` is a live handle, the string arguments are null or
/// NUL-terminated and `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn od_simulate_duality(
    model: *const OdModel,
    variant_name: *const c_char,
    x0: *const c_char,
    y0: *const c_char,
    t: f64,
    n: u64,
    seed: u64,
    jobs: usize,
    out_json: *mut *mut c_char,
) -> OdStatus {
    guard(|| {
        let cfg = SimulateConfig {
            t,
            n,
            seed,
            jobs: jobs.max(1),
            variant: variant(variant_name)?,
            x0: opt_str(x0, "x0")?.map(str::to_string),
            y0: opt_str(y0, "y0")?.map(str::to_string),
            trace_replicas: 0,
        };
        let (r, _) = lib(engine::simulate(model_ref(model)?, &cfg))?;
        put_string(out_json, json(&r)?)?;
        Ok(OdStatus::Ok)
    })
}

/// SVG of a diagram sampled on `[0, t]`.
///
/// # Safety
/// `model` is a live handle and `out_svg` is writable.
#[no_mangle]
pub unsafe extern "C" fn od_render_svg(model: *const OdModel, t: f64, seed: u64, out_svg: *mut *mut c_char) -> OdStatus {
    guard(|| {
        let svg = lib(engine::render_model(model_ref(model)?, t, seed))?;
        put_string(out_svg, svg)?;
        Ok(OdStatus::Ok)
    })
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn od_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread, or null after a success.
/// Valid until the next call on the same thread; not to be freed.
#[no_mangle]
pub extern "C" fn od_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
