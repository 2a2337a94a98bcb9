//! C ABI for spinphase.
//!
//! Every fallible call returns an `SpStatus`; on anything but `SP_STATUS_OK`
//! the message is available from `sp_last_error` on the same thread. Objects
//! are opaque handles created by `*_new`/`*_load`/`*_parse` and released with
//! the matching `*_free`. Vectors are `double[3]` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use spinphase::analytic::HomogeneousFieldSolution;
use spinphase::harness::{self, ExperimentConfig, HarnessError, SuiteOptions, SuiteReport};
use spinphase::{FieldConfig, FieldKind, Vec3};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    /// A solver left its validity window or a check failed.
    Physics = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpFieldKind {
    Free = 0,
    HomogeneousB = 1,
    HarmonicPlusB = 2,
    QuadrupoleB = 3,
}

impl From<SpFieldKind> for FieldKind {
    fn from(k: SpFieldKind) -> Self {
        match k {
            SpFieldKind::Free => FieldKind::Free,
            SpFieldKind::HomogeneousB => FieldKind::HomogeneousB,
            SpFieldKind::HarmonicPlusB => FieldKind::HarmonicPlusB,
            SpFieldKind::QuadrupoleB => FieldKind::QuadrupoleB,
        }
    }
}

/// Field configuration handle.
pub struct SpField(FieldConfig);

/// Experiment configuration handle.
pub struct SpConfig(ExperimentConfig);

/// Property-suite result handle.
pub struct SpSuiteReport {
    report: SuiteReport,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(SpStatus, String);

impl From<spinphase::Error> for Failure {
    fn from(e: spinphase::Error) -> Self {
        Failure(SpStatus::InvalidArgument, e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let status = match e {
            HarnessError::Config(_) => SpStatus::Config,
            HarnessError::Io(_) => SpStatus::Io,
            HarnessError::Input(_) => SpStatus::InvalidArgument,
            HarnessError::Physics(_) => SpStatus::Physics,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SpStatus::NullPointer, format!("`{what}` is null"))
}

/// Run `f`, record its error and turn panics into `SP_STATUS_PANIC`.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SpStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SpStatus::Panic
        }
    }
}

unsafe fn read_vec3(p: *const f64, what: &str) -> Result<Vec3, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok(Vec3::new(s[0], s[1], s[2]))
}

unsafe fn write_vec3(p: *mut f64, v: &Vec3, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    std::slice::from_raw_parts_mut(p, 3).copy_from_slice(v.as_slice());
    Ok(())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SpStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sp_field_new(
    kind: SpFieldKind,
    h0: f64,
    epsilon: f64,
    omega0: f64,
    charge_sign: f64,
    out: *mut *mut SpField,
) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = FieldConfig::new(kind.into(), h0, epsilon, omega0, charge_sign)?;
        put(out, SpField(f));
        Ok(())
    })
}

/// # Safety
/// `field` must come from `sp_field_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sp_field_free(field: *mut SpField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Magnetic field at `r`.
///
/// # Safety
/// `field` must be a live handle; `r` and `out` point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_field_magnetic(field: *const SpField, r: *const f64, out: *mut f64) -> SpStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let h = f.0.magnetic_field(&read_vec3(r, "r")?);
        write_vec3(out, &h, "out")
    })
}

/// Vector potential (including gauge terms) at `r`.
///
/// # Safety
/// As for `sp_field_magnetic`.
#[no_mangle]
pub unsafe extern "C" fn sp_field_vector_potential(field: *const SpField, r: *const f64, out: *mut f64) -> SpStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let a = f.0.vector_potential(&read_vec3(r, "r")?);
        write_vec3(out, &a, "out")
    })
}

/// Mean angular momentum of the Gaussian packet in a uniform field after
/// turn-on, by the classical and by the quantum closed form.
///
/// # Safety
/// `classical` and `quantum` point to three writable doubles each.
#[no_mangle]
pub unsafe extern "C" fn sp_homogeneous_l(
    e: f64,
    m: f64,
    c: f64,
    hbar: f64,
    h0: f64,
    d: f64,
    t: f64,
    classical: *mut f64,
    quantum: *mut f64,
) -> SpStatus {
    guard(|| {
        let sol = HomogeneousFieldSolution::new(e, m, c, hbar, h0, d)?;
        write_vec3(classical, &sol.classical_l(t), "classical")?;
        write_vec3(quantum, &sol.quantum_l(t)?, "quantum")
    })
}

/// Parse a TOML experiment config.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sp_config_parse(text: *const c_char, out: *mut *mut SpConfig) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ExperimentConfig::from_toml(read_str(text, "text")?)?;
        put(out, SpConfig(cfg));
        Ok(())
    })
}

/// Read a config file (a run manifest is also accepted). Honours the
/// output-directory environment override.
///
/// # Safety
/// As for `sp_config_parse`.
#[no_mangle]
pub unsafe extern "C" fn sp_config_load(path: *const c_char, out: *mut *mut SpConfig) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ExperimentConfig::load(&PathBuf::from(read_str(path, "path")?))?;
        put(out, SpConfig(cfg));
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sp_config_set_output_dir(config: *mut SpConfig, dir: *const c_char) -> SpStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        cfg.0.output.dir = PathBuf::from(read_str(dir, "dir")?);
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sp_config_free(config: *mut SpConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run the experiment and write its CSVs and manifest into the output
/// directory. `SP_STATUS_PHYSICS` keeps the files written before the halt.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_run(config: *const SpConfig) -> SpStatus {
    guard(|| {
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        Ok(harness::run_config(&cfg.0).result?)
    })
}

/// Run the property suite. `dt_scale` multiplies the classical time steps.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sp_property_suite(seed: u64, dt_scale: f64, out: *mut *mut SpSuiteReport) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(dt_scale.is_finite() && dt_scale > 0.0) {
            return Err(Failure(
                SpStatus::InvalidArgument,
                format!("`dt_scale`: must be positive (got {dt_scale})"),
            ));
        }
        let report = harness::property_suite(&SuiteOptions { seed, dt_scale });
        let names = report
            .results
            .iter()
            .map(|r| CString::new(format!("{}/{}", r.module, r.invariant)).unwrap_or_default())
            .collect();
        put(out, SpSuiteReport { report, names });
        Ok(())
    })
}

/// Number of checks in the report (0 for a null handle).
///
/// # Safety
/// `report` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_suite_len(report: *const SpSuiteReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.results.len())
}

/// Number of failing gating checks (0 for a null handle).
///
/// # Safety
/// `report` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_suite_failures(report: *const SpSuiteReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.failures().len())
}

/// Check `index`: `module/invariant` name (owned by the report), measured
/// value, bound and pass flag. `gating` is false for informational checks.
///
/// # Safety
/// `report` is a live handle; every out pointer is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sp_suite_result(
    report: *const SpSuiteReport,
    index: usize,
    name: *mut *const c_char,
    measured: *mut f64,
    bound: *mut f64,
    pass: *mut bool,
    gating: *mut bool,
) -> SpStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let Some(res) = r.report.results.get(index) else {
            return Err(Failure(
                SpStatus::InvalidArgument,
                format!("`index`: {index} out of range ({} checks)", r.report.results.len()),
            ));
        };
        if name.is_null() || measured.is_null() || bound.is_null() || pass.is_null() || gating.is_null() {
            return Err(null("output argument"));
        }
        *name = r.names[index].as_ptr();
        *measured = res.measured;
        *bound = res.bound;
        *pass = res.pass;
        *gating = res.gating;
        Ok(())
    })
}

/// # Safety
/// `report` must come from `sp_property_suite` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sp_suite_free(report: *mut SpSuiteReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
