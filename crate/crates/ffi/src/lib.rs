//! C ABI over the `optosync` core.
//!
//! Every fallible call returns an [`OptosyncStatus`]; on failure a message
//! for the calling thread is available from [`optosync_last_error`].
//! Matrices cross the boundary as 64 doubles in row-major order, with basis
//! (q1, p1, x1, y1, q2, p2, x2, y2). Trajectories are opaque handles owned
//! by the caller and released with [`optosync_trajectory_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use optosync::dynamics::{simulate, Integration, Trajectory};
use optosync::measures::{self, AnalysisOptions, DEFAULT_STEADY_TOL};
use optosync::model::{self, CovMatrix, Matrix8, MeanState, SystemParams, DIM};
use optosync::sweep::summarize;
use optosync::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptosyncStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParam = 2,
    NonFinite = 3,
    DegeneratePhase = 4,
    NonPositiveDenominator = 5,
    EmptyWindow = 6,
    TooShort = 7,
    OutOfRange = 8,
    Internal = 99,
}

impl From<&Error> for OptosyncStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParam { .. } | Error::ConfigParse { .. } | Error::UnknownRecipe(_) => {
                OptosyncStatus::InvalidParam
            }
            Error::NonFinite { .. } => OptosyncStatus::NonFinite,
            Error::DegeneratePhase { .. } => OptosyncStatus::DegeneratePhase,
            Error::NonPositiveDenominator { .. } => OptosyncStatus::NonPositiveDenominator,
            Error::EmptyWindow => OptosyncStatus::EmptyWindow,
            Error::TooShort { .. } => OptosyncStatus::TooShort,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => OptosyncStatus::Internal,
        }
    }
}

/// Model parameters; field meanings follow the config keys of the CLI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptosyncParams {
    pub delta1: f64,
    pub delta2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub g: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub drive: f64,
    pub lambda: f64,
    pub mod_amp: f64,
    pub mod_freq: f64,
    pub n_bath: f64,
}

impl From<OptosyncParams> for SystemParams {
    fn from(p: OptosyncParams) -> Self {
        SystemParams {
            delta1: p.delta1,
            delta2: p.delta2,
            omega1: p.omega1,
            omega2: p.omega2,
            g: p.g,
            gamma: p.gamma,
            kappa: p.kappa,
            drive: p.drive,
            lambda: p.lambda,
            mod_amp: p.mod_amp,
            mod_freq: p.mod_freq,
            n_bath: p.n_bath,
        }
    }
}

impl From<SystemParams> for OptosyncParams {
    fn from(p: SystemParams) -> Self {
        OptosyncParams {
            delta1: p.delta1,
            delta2: p.delta2,
            omega1: p.omega1,
            omega2: p.omega2,
            g: p.g,
            gamma: p.gamma,
            kappa: p.kappa,
            drive: p.drive,
            lambda: p.lambda,
            mod_amp: p.mod_amp,
            mod_freq: p.mod_freq,
            n_bath: p.n_bath,
        }
    }
}

/// Steady-window summary of a trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OptosyncSummary {
    pub steady_reached: bool,
    pub onset_time: f64,
    pub period_used: f64,
    pub window_start: f64,
    pub window_end: f64,
    /// Phase difference φ₂ − φ₁ in [0, 2π).
    pub phi: f64,
    pub s_q: f64,
    pub s_phi: f64,
    pub s_p: f64,
    pub s_anti: f64,
    pub s_c: f64,
    pub max_real_eig: f64,
    pub all_negative: bool,
}

/// Opaque trajectory handle.
pub struct OptosyncTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Run `f`, translating errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), OptosyncStatus>) -> OptosyncStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OptosyncStatus::Ok,
        Ok(Err(s)) => s,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            OptosyncStatus::Internal
        }
    }
}

fn fail(e: Error) -> OptosyncStatus {
    set_error(e.to_string());
    OptosyncStatus::from(&e)
}

fn null(what: &str) -> OptosyncStatus {
    set_error(format!("`{what}` is null"));
    OptosyncStatus::NullPointer
}

unsafe fn read_matrix(p: *const f64) -> Matrix8 {
    let s = std::slice::from_raw_parts(p, DIM * DIM);
    Matrix8::from_row_slice(s)
}

unsafe fn write_matrix(m: &Matrix8, out: *mut f64) {
    let s = std::slice::from_raw_parts_mut(out, DIM * DIM);
    for i in 0..DIM {
        for j in 0..DIM {
            s[i * DIM + j] = m[(i, j)];
        }
    }
}

/// Message for the last failed call on this thread, or NULL after a
/// successful one. Valid until the next call into this library.
#[no_mangle]
pub extern "C" fn optosync_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn optosync_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Baseline parameters (λ=0.03, A_c=2, ω_c=3).
#[no_mangle]
pub extern "C" fn optosync_default_params() -> OptosyncParams {
    model::default_params().into()
}

/// # Safety
/// `params` must point to a valid `OptosyncParams`.
#[no_mangle]
pub unsafe extern "C" fn optosync_params_validate(params: *const OptosyncParams) -> OptosyncStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        SystemParams::from(*p).validate().map_err(fail)
    })
}

/// Integrate from the zero mean and vacuum covariance to `t_end`, recording
/// every `record_stride` steps. `dt <= 0` selects the default step.
///
/// # Safety
/// `params` must be valid; `out` must be writable. On success `*out` owns a
/// handle to free with [`optosync_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn optosync_simulate(
    params: *const OptosyncParams,
    t_end: f64,
    dt: f64,
    record_stride: usize,
    out: *mut *mut OptosyncTrajectory,
) -> OptosyncStatus {
    guard(|| {
        let p: SystemParams = (*params.as_ref().ok_or_else(|| null("params"))?).into();
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        p.validate().map_err(fail)?;
        let dt = if dt > 0.0 { dt } else { p.default_dt() };
        let ctl = Integration {
            t_end,
            dt,
            record_stride,
        };
        let traj = simulate(&p, &CovMatrix::vacuum(), ctl).map_err(fail)?;
        *out = Box::into_raw(Box::new(OptosyncTrajectory(traj)));
        Ok(())
    })
}

/// # Safety
/// `traj` must be NULL or a handle from [`optosync_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn optosync_trajectory_free(traj: *mut OptosyncTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of recorded samples; 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn optosync_trajectory_len(traj: *const OptosyncTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Copy sample `index`: its time, the 8 mean components and the 64
/// covariance entries. Any of `t`, `mean`, `cov` may be NULL to skip it.
///
/// # Safety
/// `traj` must be a live handle; non-NULL outputs must hold 1, 8 and 64
/// doubles respectively.
#[no_mangle]
pub unsafe extern "C" fn optosync_trajectory_sample(
    traj: *const OptosyncTrajectory,
    index: usize,
    t: *mut f64,
    mean: *mut f64,
    cov: *mut f64,
) -> OptosyncStatus {
    guard(|| {
        let tr = &traj.as_ref().ok_or_else(|| null("traj"))?.0;
        if index >= tr.len() {
            set_error(format!("sample {index} out of range (len {})", tr.len()));
            return Err(OptosyncStatus::OutOfRange);
        }
        if let Some(t) = t.as_mut() {
            *t = tr.times[index];
        }
        if !mean.is_null() {
            std::slice::from_raw_parts_mut(mean, DIM).copy_from_slice(&tr.means[index].to_array());
        }
        if !cov.is_null() {
            write_matrix(&tr.covs[index].0, cov);
        }
        Ok(())
    })
}

/// Steady-state detection, window averages and stability of a trajectory.
/// `transient_fraction` outside [0, 1) selects the default (0.6).
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn optosync_trajectory_analyze(
    traj: *const OptosyncTrajectory,
    transient_fraction: f64,
    out: *mut OptosyncSummary,
) -> OptosyncStatus {
    guard(|| {
        let tr = &traj.as_ref().ok_or_else(|| null("traj"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let mut opts = AnalysisOptions {
            steady_tol: DEFAULT_STEADY_TOL,
            ..AnalysisOptions::default()
        };
        if (0.0..1.0).contains(&transient_fraction) {
            opts.transient_fraction = transient_fraction;
        }
        let r = summarize(tr, &opts).map_err(fail)?;
        let a = &r.analysis;
        *out = OptosyncSummary {
            steady_reached: a.steady.reached,
            onset_time: a.steady.onset_time,
            period_used: a.steady.period_used,
            window_start: a.window.0,
            window_end: a.window.1,
            phi: a.phi,
            s_q: a.averages.s_q,
            s_phi: a.averages.s_phi,
            s_p: a.averages.s_p,
            s_anti: a.averages.s_anti,
            s_c: a.averages.s_c,
            max_real_eig: r.max_real_eig,
            all_negative: r.all_negative,
        };
        Ok(())
    })
}

unsafe fn measure(
    cov: *const f64,
    out: *mut f64,
    f: impl FnOnce(&CovMatrix) -> optosync::Result<f64>,
) -> OptosyncStatus {
    guard(|| {
        if cov.is_null() {
            return Err(null("cov"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = f(&CovMatrix(read_matrix(cov))).map_err(fail)?;
        Ok(())
    })
}

/// Complete synchronization of a covariance matrix.
///
/// # Safety
/// `cov` must hold 64 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn optosync_s_q(cov: *const f64, out: *mut f64) -> OptosyncStatus {
    measure(cov, out, measures::s_q)
}

/// φ-synchronization at phase difference `phi`.
///
/// # Safety
/// As [`optosync_s_q`].
#[no_mangle]
pub unsafe extern "C" fn optosync_s_phi(cov: *const f64, phi: f64, out: *mut f64) -> OptosyncStatus {
    measure(cov, out, |v| measures::s_phi(v, phi))
}

/// Phase synchronization with per-oscillator phases `phi1`, `phi2`.
///
/// # Safety
/// As [`optosync_s_q`].
#[no_mangle]
pub unsafe extern "C" fn optosync_s_p(cov: *const f64, phi1: f64, phi2: f64, out: *mut f64) -> OptosyncStatus {
    measure(cov, out, |v| measures::s_p(v, phi1, phi2))
}

/// Anti-synchronization.
///
/// # Safety
/// As [`optosync_s_q`].
#[no_mangle]
pub unsafe extern "C" fn optosync_s_anti(cov: *const f64, out: *mut f64) -> OptosyncStatus {
    measure(cov, out, measures::s_anti)
}

/// Drift matrix at mean state `mean` (8 doubles) and time `t`.
///
/// # Safety
/// `params` valid, `mean` holds 8 doubles, `out` holds 64.
#[no_mangle]
pub unsafe extern "C" fn optosync_drift_matrix(
    params: *const OptosyncParams,
    mean: *const f64,
    t: f64,
    out: *mut f64,
) -> OptosyncStatus {
    guard(|| {
        let p: SystemParams = (*params.as_ref().ok_or_else(|| null("params"))?).into();
        if mean.is_null() {
            return Err(null("mean"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let m = std::slice::from_raw_parts(mean, DIM);
        let s = MeanState::from_array(std::array::from_fn(|i| m[i]));
        write_matrix(&model::drift_matrix(&p, &s, t), out);
        Ok(())
    })
}

/// Diffusion matrix of the fluctuation dynamics.
///
/// # Safety
/// `params` valid, `out` holds 64 doubles.
#[no_mangle]
pub unsafe extern "C" fn optosync_noise_matrix(params: *const OptosyncParams, out: *mut f64) -> OptosyncStatus {
    guard(|| {
        let p: SystemParams = (*params.as_ref().ok_or_else(|| null("params"))?).into();
        if out.is_null() {
            return Err(null("out"));
        }
        write_matrix(&model::noise_matrix(&p), out);
        Ok(())
    })
}
