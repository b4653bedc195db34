//! C ABI for `watt-core`.
//!
//! Every function returns a [`WattStatus`] and writes its result through an
//! out-pointer. On failure a message is available from
//! [`watt_last_error_message`] on the same thread. Models are opaque
//! [`WattModel`] handles released with [`watt_model_free`]; strings returned
//! by the library are released with [`watt_string_free`].
//!
//! CSV arguments are the file *contents*, not paths.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use watt_core::powermodel::{self, PowerModel};
use watt_core::regression::student_t_sf;
use watt_core::tariff::{project_cost, Tariff};
use watt_core::trace::{self, AlignedTrace};
use watt_core::{energy, Error, ErrorKind};

/// Result codes. The first four match the `watt` CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WattStatus {
    Ok = 0,
    /// Invalid argument value.
    Usage = 1,
    /// Malformed input data or model file.
    Data = 2,
    /// The regression could not be solved (rank-deficient design).
    Numerical = 3,
    NullPointer = 4,
    /// A string argument was not valid UTF-8.
    Utf8 = 5,
    /// A panic was caught at the boundary. This is a bug.
    Panic = 6,
}

/// Opaque trained power model.
pub struct WattModel {
    inner: PowerModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WattCoefficients {
    pub alpha: f64,
    pub beta_cpu: f64,
    pub beta_mem: f64,
    pub beta_disk: f64,
    pub beta_net: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WattEvaluation {
    pub mape: f64,
    pub accuracy: f64,
    pub max_abs_error_w: f64,
    pub n: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WattEnergyReport {
    pub kwh: f64,
    pub duration_s: f64,
    pub mean_power_w: f64,
    pub kwh_per_day: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Message describing the last failure on this thread, or NULL if the last
/// call succeeded. The pointer stays valid until the next library call on the
/// same thread; do not free it.
#[no_mangle]
pub extern "C" fn watt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

struct Failure(WattStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Usage => WattStatus::Usage,
            ErrorKind::Data => WattStatus::Data,
            ErrorKind::Numerical => WattStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure(WattStatus::Usage, message.into())
}

/// Runs `body`, records any error for [`watt_last_error_message`] and turns
/// panics into [`WattStatus::Panic`].
fn guard(body: impl FnOnce() -> FfiResult<()>) -> WattStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => WattStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            WattStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(WattStatus::NullPointer, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(WattStatus::Utf8, format!("{name}: {e}")))
}

unsafe fn model_arg<'a>(p: *const WattModel) -> FfiResult<&'a PowerModel> {
    p.as_ref()
        .map(|m| &m.inner)
        .ok_or_else(|| Failure(WattStatus::NullPointer, "model is NULL".into()))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure(WattStatus::NullPointer, format!("{name} is NULL")));
    }
    out.write(value);
    Ok(())
}

fn check_out<T>(out: *mut T, name: &str) -> FfiResult<()> {
    if out.is_null() {
        Err(Failure(WattStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

fn aligned(metrics_csv: &str, power_csv: &str, tolerance_s: f64) -> FfiResult<AlignedTrace> {
    let metrics = trace::parse_metrics(metrics_csv)?;
    let power = trace::parse_power(power_csv)?;
    // Non-positive or NaN selects the default tolerance.
    let tolerance = if tolerance_s > 0.0 {
        tolerance_s
    } else {
        trace::default_tolerance(&metrics).ok_or_else(|| {
            Failure(
                WattStatus::Data,
                "need at least two distinct metric timestamps to derive a tolerance".into(),
            )
        })?
    };
    Ok(trace::align(&metrics, &power, tolerance)?)
}

fn into_handle(model: PowerModel) -> *mut WattModel {
    Box::into_raw(Box::new(WattModel { inner: model }))
}

/// Parses a model JSON document into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn watt_model_load_json(
    json: *const c_char,
    out_model: *mut *mut WattModel,
) -> WattStatus {
    guard(|| {
        check_out(out_model, "out_model")?;
        let text = str_arg(json, "json")?;
        let model = powermodel::load_model(text)?;
        write_out(out_model, into_handle(model), "out_model")
    })
}

/// Serializes a model to JSON. Release the string with [`watt_string_free`].
///
/// # Safety
/// `model` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn watt_model_save_json(
    model: *const WattModel,
    out_json: *mut *mut c_char,
) -> WattStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let model = model_arg(model)?;
        let json = CString::new(powermodel::save_model(model))
            .map_err(|e| Failure(WattStatus::Data, e.to_string()))?;
        write_out(out_json, json.into_raw(), "out_json")
    })
}

/// Frees a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn watt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Frees a model handle. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn watt_model_free(model: *mut WattModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Predicted power in watts for one sample. Not clamped.
///
/// # Safety
/// `model` must be a live handle; `out_watts` must be writable.
#[no_mangle]
pub unsafe extern "C" fn watt_model_predict(
    model: *const WattModel,
    cpu: f64,
    mem: f64,
    disk: f64,
    net: f64,
    out_watts: *mut f64,
) -> WattStatus {
    guard(|| {
        let model = model_arg(model)?;
        let watts = model.coefficients().predict_regressors([cpu, mem, disk, net]);
        write_out(out_watts, watts, "out_watts")
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn watt_model_coefficients(
    model: *const WattModel,
    out: *mut WattCoefficients,
) -> WattStatus {
    guard(|| {
        let c = model_arg(model)?.coefficients();
        let value = WattCoefficients {
            alpha: c.alpha,
            beta_cpu: c.beta_cpu,
            beta_mem: c.beta_mem,
            beta_disk: c.beta_disk,
            beta_net: c.beta_net,
        };
        write_out(out, value, "out")
    })
}

/// Aligns the two CSV traces and fits a model. A `tolerance_s` of zero or
/// less uses half the median metric interval. `hardware_id` may be NULL.
///
/// # Safety
/// String arguments must be NUL-terminated; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn watt_train_csv(
    metrics_csv: *const c_char,
    power_csv: *const c_char,
    tolerance_s: f64,
    hardware_id: *const c_char,
    out_model: *mut *mut WattModel,
) -> WattStatus {
    guard(|| {
        check_out(out_model, "out_model")?;
        let metrics = str_arg(metrics_csv, "metrics_csv")?;
        let power = str_arg(power_csv, "power_csv")?;
        let hw = if hardware_id.is_null() {
            "unnamed"
        } else {
            str_arg(hardware_id, "hardware_id")?
        };
        let trace = aligned(metrics, power, tolerance_s)?;
        let model = powermodel::train(&trace, hw)?;
        write_out(out_model, into_handle(model), "out_model")
    })
}

/// Scores a model against measured power. Tolerance as in [`watt_train_csv`].
///
/// # Safety
/// `model` must be a live handle, strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn watt_evaluate_csv(
    model: *const WattModel,
    metrics_csv: *const c_char,
    power_csv: *const c_char,
    tolerance_s: f64,
    out: *mut WattEvaluation,
) -> WattStatus {
    guard(|| {
        check_out(out, "out")?;
        let model = model_arg(model)?;
        let trace = aligned(
            str_arg(metrics_csv, "metrics_csv")?,
            str_arg(power_csv, "power_csv")?,
            tolerance_s,
        )?;
        let r = powermodel::evaluate(model, &trace)?;
        let value = WattEvaluation {
            mape: r.mape,
            accuracy: r.accuracy,
            max_abs_error_w: r.max_abs_error_w,
            n: r.n,
        };
        write_out(out, value, "out")
    })
}

/// Trapezoidal energy of a power series. Timestamps must strictly increase.
///
/// # Safety
/// Both arrays must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn watt_energy_integrate(
    timestamps: *const f64,
    power_w: *const f64,
    len: usize,
    out: *mut WattEnergyReport,
) -> WattStatus {
    guard(|| {
        check_out(out, "out")?;
        if len > 0 && (timestamps.is_null() || power_w.is_null()) {
            return Err(Failure(WattStatus::NullPointer, "input array is NULL".into()));
        }
        let points: Vec<(f64, f64)> = if len == 0 {
            Vec::new()
        } else {
            let ts = std::slice::from_raw_parts(timestamps, len);
            let pw = std::slice::from_raw_parts(power_w, len);
            ts.iter().copied().zip(pw.iter().copied()).collect()
        };
        let r = energy::integrate_series(&points)?;
        let value = WattEnergyReport {
            kwh: r.kwh,
            duration_s: r.duration_s,
            mean_power_w: r.mean_power_w,
            kwh_per_day: r.kwh_per_day,
        };
        write_out(out, value, "out")
    })
}

/// Total electricity cost over `months` for constant daily consumption, with
/// the rate growing by `escalation_per_year` each full year.
///
/// # Safety
/// `out_total` must be writable.
#[no_mangle]
pub unsafe extern "C" fn watt_project_cost(
    kwh_per_day: f64,
    rate_per_kwh: f64,
    escalation_per_year: f64,
    months: u32,
    out_total: *mut f64,
) -> WattStatus {
    guard(|| {
        check_out(out_total, "out_total")?;
        let tariff = Tariff::new(rate_per_kwh, escalation_per_year, "")?;
        let p = project_cost(kwh_per_day, &tariff, months)?;
        write_out(out_total, p.total_cost, "out_total")
    })
}

/// Two-sided Student-t tail probability `P(|T| >= |t|)`. `df` must be >= 1.
///
/// # Safety
/// `out_p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn watt_student_t_sf(t: f64, df: f64, out_p: *mut f64) -> WattStatus {
    guard(|| {
        check_out(out_p, "out_p")?;
        if !(df >= 1.0 && df.is_finite()) {
            return Err(usage(format!("degrees of freedom must be a finite value >= 1, got {df}")));
        }
        if t.is_nan() {
            return Err(usage("t is NaN"));
        }
        write_out(out_p, student_t_sf(t, df), "out_p")
    })
}
