//! C interface to the simulator.
//!
//! Every entry point returns a [`TbStatus`]. On failure the message is kept
//! per thread and can be read with [`tb_last_error_message`]. Handles are
//! opaque, owned by the caller, and released with the matching `_free`
//! function. Panics never cross the boundary; they surface as
//! `TB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tendon_biped::analysis::{
    analyze, cost_of_transport, froude_speeds, AnalysisOptions, GaitReport,
};
use tendon_biped::config::parse_config;
use tendon_biped::dynamics::{run_trial, TrialOutcome};
use tendon_biped::{ConfigBundle, ConfigName, Error};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Io = 5,
    SimulationFault = 6,
    Analysis = 7,
    Panic = 8,
}

/// Validated robot, tendon, controller and simulation settings.
pub struct TbConfig {
    bundle: ConfigBundle,
}

/// A finished (or fallen) trial with its log.
pub struct TbTrial {
    bundle: ConfigBundle,
    outcome: TrialOutcome,
}

/// Analysis of a trial.
pub struct TbReport {
    report: GaitReport,
}

/// Scalar gait metrics. Peaks in W, timings in % of the gait cycle, angles in
/// degrees. `amplification` is NaN when `has_amplification` is 0.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct TbMetrics {
    pub cycles: usize,
    pub cycle_duration: f64,
    pub speed: f64,
    pub stride_length: f64,
    pub has_amplification: c_int,
    pub amplification: f64,
    pub positive_peak_power: f64,
    pub negative_peak_power: f64,
    pub positive_peak_timing: f64,
    pub negative_peak_timing: f64,
    pub mean_positive_power: f64,
    pub total_cot: f64,
    pub net_cot: f64,
    pub toe_off_timing: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(error: &Error) -> TbStatus {
    match error {
        Error::Parse { .. } | Error::SchemaMismatch { .. } | Error::MalformedLog { .. } => {
            TbStatus::Parse
        }
        Error::Validation(_) => TbStatus::Validation,
        Error::UnknownPreset(_) | Error::InvalidArgument(_) => TbStatus::InvalidArgument,
        Error::SimulationFault { .. } => TbStatus::SimulationFault,
        Error::Analysis(_) | Error::InsufficientCycles { .. } => TbStatus::Analysis,
        Error::Io { .. } => TbStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Run `body`, translating errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> TbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TbStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed as {what}"));
            TbStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {message}"));
            TbStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Core(Error::invalid(format!("{what} is not valid UTF-8"))))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Configuration for a named preset: "GAS+SOL", "SOL" or "GAS".
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_config_from_preset(
    name: *const c_char,
    out: *mut *mut TbConfig,
) -> TbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let name = ConfigName::parse_preset(text(name, "name")?)?;
        store(
            out,
            TbConfig {
                bundle: ConfigBundle::preset(name),
            },
        );
        Ok(())
    })
}

/// Configuration parsed from the text of a TOML configuration file.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_config_from_toml(
    toml: *const c_char,
    out: *mut *mut TbConfig,
) -> TbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let bundle = parse_config(text(toml, "toml")?, "<ffi>")?;
        store(out, TbConfig { bundle });
        Ok(())
    })
}

/// Override the trial length and the settling time excluded from analysis, s.
///
/// # Safety
/// `config` must come from a `tb_config_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn tb_config_set_duration(
    config: *mut TbConfig,
    duration: f64,
    settle_time: f64,
) -> TbStatus {
    guard(|| {
        let config = config.as_mut().ok_or(Failure::Null("config"))?;
        if !(duration.is_finite()
            && duration > 0.0
            && settle_time.is_finite()
            && settle_time >= 0.0)
        {
            return Err(Error::invalid(format!(
                "duration {duration} s and settle time {settle_time} s must be finite, positive and non-negative"
            ))
            .into());
        }
        config.bundle.settings.duration = duration;
        config.bundle.settings.settle_time = settle_time;
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or come from a `tb_config_*` constructor, and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_config_free(config: *mut TbConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Simulate a trial. A fall still yields a trial handle so its partial log
/// can be saved; check it with `tb_trial_fallen`.
///
/// # Safety
/// `config` must be a live configuration handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_trial_run(config: *const TbConfig, out: *mut *mut TbTrial) -> TbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let bundle = borrow(config, "config")?.bundle.clone();
        let outcome = run_trial(&bundle)?;
        store(out, TbTrial { bundle, outcome });
        Ok(())
    })
}

/// 1 when the robot fell or the integration faulted, 0 otherwise, -1 for NULL.
///
/// # Safety
/// `trial` must be NULL or a live trial handle.
#[no_mangle]
pub unsafe extern "C" fn tb_trial_fallen(trial: *const TbTrial) -> c_int {
    match trial.as_ref() {
        Some(t) => c_int::from(t.outcome.fallen || t.outcome.fault.is_some()),
        None => -1,
    }
}

/// Number of logged control steps, 0 for NULL.
///
/// # Safety
/// `trial` must be NULL or a live trial handle.
#[no_mangle]
pub unsafe extern "C" fn tb_trial_rows(trial: *const TbTrial) -> usize {
    trial.as_ref().map_or(0, |t| t.outcome.log.rows())
}

/// Write `<dir>/<stem>.csv` and its metadata sidecar.
///
/// # Safety
/// `trial` must be a live trial handle; `dir` and `stem` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn tb_trial_save(
    trial: *const TbTrial,
    dir: *const c_char,
    stem: *const c_char,
) -> TbStatus {
    guard(|| {
        let trial = borrow(trial, "trial")?;
        let dir = Path::new(text(dir, "dir")?);
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        trial.outcome.log.save(dir, text(stem, "stem")?)?;
        Ok(())
    })
}

/// Analyze the left leg of a completed trial with default options.
///
/// # Safety
/// `trial` must be a live trial handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_trial_analyze(
    trial: *const TbTrial,
    out: *mut *mut TbReport,
) -> TbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let trial = borrow(trial, "trial")?;
        let log = trial.outcome.clone().into_result()?;
        let report = analyze(&log, &trial.bundle, &AnalysisOptions::default())?;
        store(out, TbReport { report });
        Ok(())
    })
}

/// # Safety
/// `trial` must be NULL or a live trial handle, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_trial_free(trial: *mut TbTrial) {
    if !trial.is_null() {
        drop(Box::from_raw(trial));
    }
}

/// Copy the scalar metrics of a report.
///
/// # Safety
/// `report` must be a live report handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_report_metrics(
    report: *const TbReport,
    out: *mut TbMetrics,
) -> TbStatus {
    guard(|| {
        let m = &borrow(report, "report")?.report.metrics;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = TbMetrics {
            cycles: m.cycles,
            cycle_duration: m.cycle_duration,
            speed: m.speed,
            stride_length: m.stride_length,
            has_amplification: c_int::from(m.amplification.is_some()),
            amplification: m.amplification.unwrap_or(f64::NAN),
            positive_peak_power: m.positive_peak_power,
            negative_peak_power: m.negative_peak_power,
            positive_peak_timing: m.positive_peak_timing,
            negative_peak_timing: m.negative_peak_timing,
            mean_positive_power: m.mean_positive_power,
            total_cot: m.total_cot,
            net_cot: m.net_cot,
            toe_off_timing: m.toe_off_timing,
        };
        Ok(())
    })
}

/// Write curves.csv, coordination.csv and metrics.json into `dir`.
///
/// # Safety
/// `report` must be a live report handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tb_report_save(report: *const TbReport, dir: *const c_char) -> TbStatus {
    guard(|| {
        let report = borrow(report, "report")?;
        report.report.save(Path::new(text(dir, "dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a live report handle, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_report_free(report: *mut TbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Total and net cost of transport from mean positive power (W), mass (kg),
/// speed (m/s) and standby power (W).
///
/// # Safety
/// `total` and `net` must be writable pointers.
#[no_mangle]
pub unsafe extern "C" fn tb_cost_of_transport(
    power: f64,
    mass: f64,
    speed: f64,
    standby: f64,
    total: *mut f64,
    net: *mut f64,
) -> TbStatus {
    guard(|| {
        if total.is_null() || net.is_null() {
            return Err(Failure::Null("total/net"));
        }
        let (t, n) = cost_of_transport(power, mass, speed, standby)?;
        *total = t;
        *net = n;
        Ok(())
    })
}

/// Froude-scaled test speed for a leg length in m.
///
/// # Safety
/// `speed` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_froude_test_speed(leg_length: f64, speed: *mut f64) -> TbStatus {
    guard(|| {
        let speed = speed.as_mut().ok_or(Failure::Null("speed"))?;
        *speed = froude_speeds(leg_length)?.test_speed;
        Ok(())
    })
}
