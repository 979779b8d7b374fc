//! C interface to `linbandit`.
//!
//! Every function returns an [`LbStatus`]; on failure the message is kept in a
//! thread-local slot readable through [`lb_last_error`]. Handles are opaque and
//! must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linbandit::harness::{run_experiment, BoundConstants, SimulationConfig, TrajectorySummary};
use linbandit::{Error, PolicyKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    Hypothesis = 4,
    Incompatible = 5,
    InputData = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Per-step series exposed by [`lb_summary_copy`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbSeries {
    MeanReward = 0,
    SeReward = 1,
    MeanRisk = 2,
    SeRisk = 3,
    MeanTrace = 4,
    MeanThetahatNorm = 5,
    MeanThetahatNormSq = 6,
}

/// Constants of the reward and risk bounds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LbBoundConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub alpha: f64,
    pub c_gamma_delta: f64,
    pub omega: f64,
}

/// Opaque experiment configuration.
pub struct LbConfig(SimulationConfig);

/// Opaque averaged trajectories.
pub struct LbSummary(TrajectorySummary);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn status_of(e: &Error) -> LbStatus {
    match e {
        Error::Hypothesis(_) => LbStatus::Hypothesis,
        Error::Incompatible { .. } | Error::EmptyInnerSet | Error::KernelInfeasible(_) => LbStatus::Incompatible,
        Error::CatalogRow { .. } | Error::Catalog(_) | Error::ArmOutsideBall { .. } => LbStatus::InputData,
        Error::Numerical(_) | Error::NonFinite(_) | Error::DegenerateFit(_) => LbStatus::Numerical,
        Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } => LbStatus::InvalidParameter,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (LbStatus, String)>) -> LbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LbStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside linbandit");
            LbStatus::Panic
        }
    }
}

fn lib(e: Error) -> (LbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (LbStatus, String) {
    (LbStatus::NullArgument, format!("`{name}` is null"))
}

unsafe fn read_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, (LbStatus, String)> {
    if s.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (LbStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            ptr::copy_nonoverlapping(e.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a unit-ball configuration. `policy` is one of `ball-explore`,
/// `smooth-explore`, `neighborhood`, `phased`, `greedy`, `oracle`.
///
/// # Safety
/// `policy` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_config_new(
    p: usize,
    delta: f64,
    horizon: usize,
    reps: usize,
    policy: *const c_char,
    seed: u64,
    out: *mut *mut LbConfig,
) -> LbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let policy: PolicyKind = read_str(policy, "policy")?.parse().map_err(lib)?;
        let config = SimulationConfig::new(p, delta, horizon, policy, seed).with_reps(reps);
        config.validate().map_err(lib)?;
        *out = Box::into_raw(Box::new(LbConfig(config)));
        Ok(())
    })
}

/// # Safety
/// `config` must come from [`lb_config_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lb_config_free(config: *mut LbConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn with_config(
    config: *mut LbConfig,
    f: impl FnOnce(&mut SimulationConfig) -> Result<(), (LbStatus, String)>,
) -> LbStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        let mut next = cfg.0.clone();
        f(&mut next)?;
        next.validate().map_err(lib)?;
        cfg.0 = next;
        Ok(())
    })
}

/// Sets the arm set from `ball`, `cloud:M` or `catalog:PATH`.
///
/// # Safety
/// `config` must be a live handle and `spec` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lb_config_set_arm_set(config: *mut LbConfig, spec: *const c_char) -> LbStatus {
    with_config(config, |c| {
        c.arm_set = read_str(spec, "spec")?.parse().map_err(lib)?;
        Ok(())
    })
}

/// Sets the feedback model from `gaussian` or `quant:A`.
///
/// # Safety
/// `config` must be a live handle and `spec` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lb_config_set_feedback(config: *mut LbConfig, spec: *const c_char) -> LbStatus {
    with_config(config, |c| {
        c.feedback = read_str(spec, "spec")?.parse().map_err(lib)?;
        Ok(())
    })
}

/// Enables or disables the theorem hypothesis checks.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lb_config_set_check_bounds(config: *mut LbConfig, enabled: bool) -> LbStatus {
    with_config(config, |c| {
        c.check_bounds = enabled;
        Ok(())
    })
}

/// Worker threads; 0 uses all cores. Results do not depend on it.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lb_config_set_workers(config: *mut LbConfig, workers: usize) -> LbStatus {
    with_config(config, |c| {
        c.workers = workers;
        Ok(())
    })
}

/// Runs the experiment described by `config`.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_run(config: *const LbConfig, out: *mut *mut LbSummary) -> LbStatus {
    guard(|| {
        let cfg = &config.as_ref().ok_or_else(|| null("config"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let set = cfg.build_arm_set().map_err(lib)?;
        let summary = run_experiment(cfg, &set).map_err(lib)?;
        *out = Box::into_raw(Box::new(LbSummary(summary)));
        Ok(())
    })
}

/// # Safety
/// `summary` must come from [`lb_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lb_summary_free(summary: *mut LbSummary) {
    if !summary.is_null() {
        drop(Box::from_raw(summary));
    }
}

/// Number of steps in each series, or 0 for a null handle.
///
/// # Safety
/// `summary` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lb_summary_horizon(summary: *const LbSummary) -> usize {
    summary.as_ref().map_or(0, |s| s.0.horizon)
}

/// Mean over realizations of the best achievable per-step reward.
///
/// # Safety
/// `summary` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_summary_r_opt(summary: *const LbSummary, out: *mut f64) -> LbStatus {
    guard(|| {
        let s = &summary.as_ref().ok_or_else(|| null("summary"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.r_opt.mean;
        Ok(())
    })
}

/// Copies one series (entry `t - 1` holds step `t`) into `buf`, which must
/// hold at least [`lb_summary_horizon`] values.
///
/// # Safety
/// `summary` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lb_summary_copy(
    summary: *const LbSummary,
    series: LbSeries,
    buf: *mut f64,
    len: usize,
) -> LbStatus {
    guard(|| {
        let s = &summary.as_ref().ok_or_else(|| null("summary"))?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < s.horizon {
            return Err((
                LbStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", s.horizon),
            ));
        }
        let src = match series {
            LbSeries::MeanReward | LbSeries::SeReward => &s.reward,
            LbSeries::MeanRisk | LbSeries::SeRisk => &s.risk,
            LbSeries::MeanTrace => &s.trace,
            LbSeries::MeanThetahatNorm => &s.thetahat_norm,
            LbSeries::MeanThetahatNormSq => &s.thetahat_norm_sq,
        };
        let se = matches!(series, LbSeries::SeReward | LbSeries::SeRisk);
        let dst = std::slice::from_raw_parts_mut(buf, s.horizon);
        for (d, stat) in dst.iter_mut().zip(src) {
            *d = if se { stat.se } else { stat.mean };
        }
        Ok(())
    })
}

/// Evaluates the bound constants for `(p, Δ, κ, γ)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_bound_constants(
    p: usize,
    delta: f64,
    kappa: f64,
    gamma: f64,
    out: *mut LbBoundConstants,
) -> LbStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = BoundConstants::new(p, delta, kappa, gamma).map_err(lib)?;
        *out = LbBoundConstants {
            c1: c.c1,
            c2: c.c2,
            c3: c.c3,
            c4: c.c4,
            alpha: c.alpha,
            c_gamma_delta: c.c_gamma_delta,
            omega: c.omega,
        };
        Ok(())
    })
}
