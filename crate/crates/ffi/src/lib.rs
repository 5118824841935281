//! C interface to the `glancing` library.
//!
//! Objects are exposed as opaque handles created by `glc_*_parse`/`glc_*_run`
//! functions and released by the matching `glc_*_free`. Every fallible call
//! returns a [`GlcStatus`]; on failure a message is kept per thread and can be
//! read with [`glc_last_error`]. Strings returned by the library are owned by
//! the caller and must be released with [`glc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use glancing::eikonal::{solve_eikonal, ModelSpec, PhaseJet};
use glancing::oracle::{airy_dn, bound_value};
use glancing::sweep::{
    fit_scaling, run_sweep, verify_model, write_csv, ExperimentConfig, ModelSource, SweepRow,
    MU_DENOMINATOR,
};
use glancing::symring::{Rat, C64};
use glancing::transport::{solve_transport, AmplitudeJet};
use glancing::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Solver = 4,
    Io = 5,
    CheckFailed = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> GlcStatus {
    match e {
        Error::Config(_) | Error::InvalidModel(_) => GlcStatus::Config,
        Error::Io(_) => GlcStatus::Io,
        Error::InsufficientData(_) => GlcStatus::CheckFailed,
        _ => GlcStatus::Solver,
    }
}

struct Fail(GlcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Any failure while reading caller-supplied input is a configuration error.
fn input(e: Error) -> Fail {
    Fail(GlcStatus::Config, e.to_string())
}

fn null(what: &str) -> Fail {
    Fail(GlcStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GlcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GlcStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            GlcStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Fail(
            GlcStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(GlcStatus::Solver, "string contains NUL".into()))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn glc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn glc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn glc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// A model with its solved phase and amplitude jets.
pub struct GlcModel {
    model: ModelSpec,
    phase: PhaseJet,
    amps: AmplitudeJet,
}

/// Parses a model table (`d`, `order`, `m = { "k,j" = "expr" }` or a
/// `[boundary]` table), instantiates it at `mu` and solves the jets.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glc_model_parse(
    toml: *const c_char,
    mu: f64,
    out: *mut *mut GlcModel,
) -> GlcStatus {
    guard(|| {
        let src = read_str(toml, "toml")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(mu.is_finite() && mu != 0.0 && mu.abs() <= 1.0) {
            return Err(Fail(
                GlcStatus::InvalidArgument,
                format!("mu = {mu} must satisfy 0 < |mu| <= 1"),
            ));
        }
        let source = ModelSource::from_toml_str(src).map_err(input)?;
        let model = source
            .instantiate(&Rat::approximate(mu, MU_DENOMINATOR))
            .map_err(input)?;
        let phase = solve_eikonal(&model)?;
        let amps = solve_transport(&phase)?;
        write_out(
            out,
            Box::into_raw(Box::new(GlcModel { model, phase, amps })),
            "out",
        )
    })
}

/// # Safety
/// `model` must come from [`glc_model_parse`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn glc_model_free(model: *mut GlcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn model_ref<'a>(model: *const GlcModel) -> Result<&'a GlcModel, Fail> {
    model.as_ref().ok_or_else(|| null("model"))
}

/// Truncation order M.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glc_model_order(model: *const GlcModel, out: *mut usize) -> GlcStatus {
    guard(|| write_out(out, model_ref(model)?.model.order(), "out"))
}

/// Phase coefficient φ_k (1 ≤ k ≤ M) as text. Free with [`glc_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glc_model_phase(
    model: *const GlcModel,
    k: usize,
    out: *mut *mut c_char,
) -> GlcStatus {
    guard(|| {
        let m = model_ref(model)?;
        if k == 0 || k > m.phase.phis().len() {
            return Err(Fail(
                GlcStatus::InvalidArgument,
                format!("phase index {k} outside 1..={}", m.phase.phis().len()),
            ));
        }
        write_out(out, to_c_string(m.phase.phi(k).to_string())?, "out")
    })
}

/// Amplitude coefficient a_{k,j} as text. Free with [`glc_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glc_model_amplitude(
    model: *const GlcModel,
    k: usize,
    j: usize,
    out: *mut *mut c_char,
) -> GlcStatus {
    guard(|| {
        let m = model_ref(model)?;
        let a = m.amps.get(k, j)?;
        write_out(out, to_c_string(a.to_string())?, "out")
    })
}

/// Runs the exact residual, membership and grading checks. Sets `passed` to 1
/// when all hold and 0 otherwise. A failed check is not an error status, but
/// its location is reported through [`glc_last_error`].
/// With `corrupt` nonzero one amplitude is overwritten first.
///
/// # Safety
/// `model` must be a live handle and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glc_model_verify(
    model: *const GlcModel,
    corrupt: c_int,
    passed: *mut c_int,
) -> GlcStatus {
    guard(|| {
        let m = model_ref(model)?;
        let checks = verify_model("model", &m.model, corrupt != 0)?;
        if let Some(c) = checks.iter().find(|c| !c.passed) {
            set_error(format!("{} failed: {}", c.check, c.detail));
        }
        write_out(
            passed,
            c_int::from(checks.iter().all(|c| c.passed)),
            "passed",
        )
    })
}

/// Exact model DN value at one frequency for m = c t (Airy functions).
///
/// # Safety
/// `out_re` and `out_im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn glc_airy_dn(
    eta1: f64,
    mu: f64,
    c_re: f64,
    c_im: f64,
    h: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> GlcStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output"));
        }
        if !(h > 0.0 && h.is_finite() && eta1.is_finite() && mu.is_finite()) {
            return Err(Fail(
                GlcStatus::InvalidArgument,
                "h must be positive and inputs finite".into(),
            ));
        }
        let v = airy_dn(eta1, mu, C64::new(c_re, c_im), h)?;
        out_re.write(v.re);
        out_im.write(v.im);
        Ok(())
    })
}

/// The bound h^{s+1} |μ|^{−(3s+2−k)/2}.
#[no_mangle]
pub extern "C" fn glc_bound_value(h: f64, mu: f64, s: usize, k: usize) -> f64 {
    bound_value(h, mu, s, k)
}

/// A validated experiment configuration.
pub struct GlcConfig(ExperimentConfig);

/// Parses and validates an experiment file body.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glc_config_parse(
    toml: *const c_char,
    out: *mut *mut GlcConfig,
) -> GlcStatus {
    guard(|| {
        let src = read_str(toml, "toml")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ExperimentConfig::from_toml_str(src).map_err(input)?;
        write_out(out, Box::into_raw(Box::new(GlcConfig(cfg))), "out")
    })
}

/// # Safety
/// `cfg` must come from [`glc_config_parse`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn glc_config_free(cfg: *mut GlcConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// One measured (h, μ, s, k) point. `ok` is 0 for rows whose solve failed;
/// their error fields are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct GlcSweepRow {
    pub h: f64,
    pub mu: f64,
    pub s: usize,
    pub k: usize,
    pub error_norm: f64,
    pub bound_value: f64,
    pub ratio: f64,
    pub grid: usize,
    pub ok: c_int,
}

/// Result rows of a sweep.
pub struct GlcSweep(Vec<SweepRow>);

/// Runs the sweep described by `cfg`.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glc_sweep_run(
    cfg: *const GlcConfig,
    out: *mut *mut GlcSweep,
) -> GlcStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rows = run_sweep(&cfg.0)?;
        write_out(out, Box::into_raw(Box::new(GlcSweep(rows))), "out")
    })
}

/// # Safety
/// `sweep` must come from [`glc_sweep_run`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn glc_sweep_free(sweep: *mut GlcSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn glc_sweep_len(sweep: *const GlcSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.0.len())
}

/// Copies row `i` into `out`.
///
/// # Safety
/// `sweep` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glc_sweep_row(
    sweep: *const GlcSweep,
    i: usize,
    out: *mut GlcSweepRow,
) -> GlcStatus {
    guard(|| {
        let rows = &sweep.as_ref().ok_or_else(|| null("sweep"))?.0;
        let r = rows.get(i).ok_or_else(|| {
            Fail(
                GlcStatus::InvalidArgument,
                format!("row {i} out of range (len {})", rows.len()),
            )
        })?;
        let row = GlcSweepRow {
            h: r.h,
            mu: r.mu,
            s: r.s,
            k: r.k,
            error_norm: r.error_norm,
            bound_value: r.bound_value,
            ratio: r.ratio,
            grid: r.grid,
            ok: c_int::from(r.is_ok()),
        };
        write_out(out, row, "out")
    })
}

/// Writes the rows as CSV to `path`.
///
/// # Safety
/// `sweep` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn glc_sweep_write_csv(
    sweep: *const GlcSweep,
    path: *const c_char,
) -> GlcStatus {
    guard(|| {
        let rows = &sweep.as_ref().ok_or_else(|| null("sweep"))?.0;
        let path = read_str(path, "path")?;
        let mut f = std::fs::File::create(path).map_err(Error::from)?;
        write_csv(rows, &mut f)?;
        Ok(())
    })
}

/// Fits the scaling exponents and sets `passed` to 1 when every (s, k) group
/// is within tolerance. The summary text goes to `summary` when it is non-null
/// (free with [`glc_string_free`]).
///
/// # Safety
/// `sweep` must be a live handle, `passed` valid, `summary` null or valid.
#[no_mangle]
pub unsafe extern "C" fn glc_sweep_fit(
    sweep: *const GlcSweep,
    passed: *mut c_int,
    summary: *mut *mut c_char,
) -> GlcStatus {
    guard(|| {
        let rows = &sweep.as_ref().ok_or_else(|| null("sweep"))?.0;
        let fit = fit_scaling(rows)?;
        if !summary.is_null() {
            summary.write(to_c_string(glancing::sweep::summary_text(&fit))?);
        }
        write_out(passed, c_int::from(fit.pass()), "passed")
    })
}
