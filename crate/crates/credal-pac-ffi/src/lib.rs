//! C ABI over the `credal-pac` library.
//!
//! The surface follows the usual opaque-handle pattern: configs and
//! reports are heap-allocated Rust values behind `cpac_config` /
//! `cpac_report` pointers, every fallible call returns a
//! [`CpacStatus`], and the most recent error message is retrievable per
//! thread via [`cpac_last_error_message`]. Strings returned through
//! `char**` out-parameters are NUL-terminated, owned by the caller, and
//! must be released with [`cpac_string_free`].
//!
//! The matching declarations live in `include/credal_pac.h`, which is
//! maintained by hand and kept in sync by a test that compares the
//! exported symbol list against the header.
//!
//! All entry points catch panics and convert them into
//! `CPAC_INTERNAL_ERROR`, so no unwinding crosses the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use credal_pac::bounds;
use credal_pac::harness::{
    emit_report, estimate_violation_probability, parse_config, ExperimentConfig, ReportFormat,
    ViolationReport,
};
use credal_pac::{CredalSet, RealisabilityReport};

/// Status codes returned by every fallible `cpac_*` function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    RunError = 5,
    InternalError = 6,
}

/// Opaque experiment configuration handle.
pub struct CpacConfig {
    inner: ExperimentConfig,
}

/// Opaque campaign report handle.
pub struct CpacReport {
    inner: ViolationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).unwrap_or_default();
    });
}

fn fail(status: CpacStatus, message: impl Into<String>) -> CpacStatus {
    set_last_error(message);
    status
}

fn guarded(body: impl FnOnce() -> CpacStatus) -> CpacStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(CpacStatus::InternalError, "internal panic"),
    }
}

/// Writes `text` to `out` as a caller-owned C string.
unsafe fn return_string(text: String, out: *mut *mut c_char) -> CpacStatus {
    match CString::new(text) {
        Ok(cstring) => {
            *out = cstring.into_raw();
            CpacStatus::Ok
        }
        Err(_) => fail(CpacStatus::InternalError, "output contained a NUL byte"),
    }
}

unsafe fn write_value<T>(out: *mut T, value: T) -> CpacStatus {
    if out.is_null() {
        return fail(CpacStatus::NullPointer, "null output pointer");
    }
    *out = value;
    CpacStatus::Ok
}

/// Message of the most recent error on this thread. The pointer stays
/// valid until the next failing `cpac_*` call on the same thread; do
/// not free it.
#[no_mangle]
pub extern "C" fn cpac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Frees a string returned through a `char**` out-parameter. A null
/// pointer is a no-op.
///
/// # Safety
/// `text` must be a pointer previously returned by this library and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cpac_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Parses a TOML config document into a new handle.
///
/// # Safety
/// `text` must point to a NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn cpac_config_parse(
    text: *const c_char,
    out: *mut *mut CpacConfig,
) -> CpacStatus {
    guarded(|| {
        if text.is_null() || out.is_null() {
            return fail(CpacStatus::NullPointer, "null argument");
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(CpacStatus::InvalidUtf8, "config text is not valid UTF-8");
        };
        match parse_config(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CpacConfig { inner }));
                CpacStatus::Ok
            }
            Err(err) => fail(CpacStatus::ParseError, err.to_string()),
        }
    })
}

/// Frees a config handle. A null pointer is a no-op.
///
/// # Safety
/// `config` must come from [`cpac_config_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cpac_config_free(config: *mut CpacConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Overrides the config's master seed.
///
/// # Safety
/// `config` must be a live handle from [`cpac_config_parse`].
#[no_mangle]
pub unsafe extern "C" fn cpac_config_set_seed(config: *mut CpacConfig, seed: u64) -> CpacStatus {
    guarded(|| {
        let Some(config) = config.as_mut() else {
            return fail(CpacStatus::NullPointer, "null config");
        };
        config.inner.seed = seed;
        CpacStatus::Ok
    })
}

/// The config's canonical SHA-256 digest as lowercase hex.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid. Free the result
/// with [`cpac_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cpac_config_digest(
    config: *const CpacConfig,
    out: *mut *mut c_char,
) -> CpacStatus {
    guarded(|| {
        let Some(config) = config.as_ref() else {
            return fail(CpacStatus::NullPointer, "null config");
        };
        if out.is_null() {
            return fail(CpacStatus::NullPointer, "null output pointer");
        }
        return_string(config.inner.digest(), out)
    })
}

/// Runs the configured campaign into a new report handle. Trials run on
/// the process-wide thread pool; results are independent of its size.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cpac_run(
    config: *const CpacConfig,
    out: *mut *mut CpacReport,
) -> CpacStatus {
    guarded(|| {
        let Some(config) = config.as_ref() else {
            return fail(CpacStatus::NullPointer, "null config");
        };
        if out.is_null() {
            return fail(CpacStatus::NullPointer, "null output pointer");
        }
        match estimate_violation_probability(&config.inner) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CpacReport { inner }));
                CpacStatus::Ok
            }
            Err(err) => fail(CpacStatus::RunError, err.to_string()),
        }
    })
}

/// Frees a report handle. A null pointer is a no-op.
///
/// # Safety
/// `report` must come from [`cpac_run`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cpac_report_free(report: *mut CpacReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn report_text(
    report: *const CpacReport,
    format: ReportFormat,
    out: *mut *mut c_char,
) -> CpacStatus {
    let Some(report) = report.as_ref() else {
        return fail(CpacStatus::NullPointer, "null report");
    };
    if out.is_null() {
        return fail(CpacStatus::NullPointer, "null output pointer");
    }
    return_string(emit_report(&report.inner, format), out)
}

/// Serializes a report as JSON.
///
/// # Safety
/// `report` must be a live handle; `out` must be valid. Free the result
/// with [`cpac_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cpac_report_to_json(
    report: *const CpacReport,
    out: *mut *mut c_char,
) -> CpacStatus {
    guarded(|| report_text(report, ReportFormat::Json, out))
}

/// Serializes a report as the flat CSV table.
///
/// # Safety
/// As for [`cpac_report_to_json`].
#[no_mangle]
pub unsafe extern "C" fn cpac_report_to_csv(
    report: *const CpacReport,
    out: *mut *mut c_char,
) -> CpacStatus {
    guarded(|| report_text(report, ReportFormat::Csv, out))
}

/// Sets `*out` to 1 if any grid point is violated beyond slack, else 0.
///
/// # Safety
/// `report` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cpac_report_has_violation(
    report: *const CpacReport,
    out: *mut c_int,
) -> CpacStatus {
    guarded(|| {
        let Some(report) = report.as_ref() else {
            return fail(CpacStatus::NullPointer, "null report");
        };
        write_value(out, c_int::from(report.inner.has_violation()))
    })
}

/// Realisability diagnostics for the config's class and credal set (a
/// classical config is treated as a singleton credal set), as JSON.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid. Free the result
/// with [`cpac_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cpac_check_realisability_json(
    config: *const CpacConfig,
    tolerance: f64,
    out: *mut *mut c_char,
) -> CpacStatus {
    guarded(|| {
        let Some(config) = config.as_ref() else {
            return fail(CpacStatus::NullPointer, "null config");
        };
        if out.is_null() {
            return fail(CpacStatus::NullPointer, "null output pointer");
        }
        let result = (|| -> Result<String, String> {
            let class = config.inner.build_class().map_err(|e| e.to_string())?;
            let set = match config.inner.build_credal_set().map_err(|e| e.to_string())? {
                Some(set) => set,
                None => CredalSet::singleton(
                    config
                        .inner
                        .build_classical_distribution()
                        .map_err(|e| e.to_string())?
                        .expect("config is classical or credal"),
                ),
            };
            let report =
                RealisabilityReport::evaluate(&class, &set, tolerance).map_err(|e| e.to_string())?;
            let mut text =
                serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            text.push('\n');
            Ok(text)
        })();
        match result {
            Ok(text) => return_string(text, out),
            Err(message) => fail(CpacStatus::RunError, message),
        }
    })
}

fn bound_result(out: *mut f64, value: Result<f64, bounds::BoundsError>) -> CpacStatus {
    match value {
        Ok(value) => unsafe { write_value(out, value) },
        Err(err) => fail(CpacStatus::InvalidArgument, err.to_string()),
    }
}

/// PAC epsilon for a finite realisable class.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cpac_eps_finite_realisable(
    class_size: usize,
    delta: f64,
    n: usize,
    out: *mut f64,
) -> CpacStatus {
    guarded(|| bound_result(out, bounds::eps_finite_realisable(class_size, delta, n)))
}

/// PAC epsilon for a finite class without realisability.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cpac_eps_finite_agnostic(
    class_size: usize,
    delta: f64,
    n: usize,
    out: *mut f64,
) -> CpacStatus {
    guarded(|| bound_result(out, bounds::eps_finite_agnostic(class_size, delta, n)))
}

/// PAC epsilon from a Rademacher complexity value.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cpac_eps_rademacher(
    rademacher: f64,
    delta: f64,
    n: usize,
    out: *mut f64,
) -> CpacStatus {
    guarded(|| bound_result(out, bounds::eps_rademacher(rademacher, delta, n)))
}

/// Uniform-deviation tail `exp(-2 n eps^2)`, clipped to [0, 1].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cpac_gn_tail(n: usize, eps: f64, out: *mut f64) -> CpacStatus {
    guarded(|| bound_result(out, bounds::gn_tail(n, eps).map(|b| b.as_probability())))
}

/// Hoeffding tail for `n` variables sharing one range width, clipped to
/// [0, 1].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cpac_hoeffding_tail_uniform(
    n: usize,
    eps: f64,
    width: f64,
    out: *mut f64,
) -> CpacStatus {
    guarded(|| {
        bound_result(
            out,
            bounds::hoeffding_tail_uniform(n, eps, width).map(|b| b.as_probability()),
        )
    })
}
