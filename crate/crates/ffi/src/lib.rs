//! C ABI over the `swmimo` simulator.
//!
//! Every entry point returns a [`SwmStatus`]. On failure a message for the
//! calling thread is available from [`swm_last_error_message`]. Objects are
//! handed out as opaque pointers and must be released with the matching
//! `*_free` function. Complex matrices are copied out column-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use swmimo::analysis::{eigen_snrs, PowerNormalization, PowerPolicy};
use swmimo::channel::ChannelRealization;
use swmimo::circuit::CouplingRegime;
use swmimo::config::ScenarioConfig;
use swmimo::sim::Simulator;
use swmimo::{CMatrix, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericalError = 4,
    IoError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwmRegime {
    Tight = 0,
    Weak = 1,
    Decoupled = 2,
}

fn regime_of(code: u32) -> Result<CouplingRegime, Fail> {
    match code {
        c if c == SwmRegime::Tight as u32 => Ok(CouplingRegime::Tight),
        c if c == SwmRegime::Weak as u32 => Ok(CouplingRegime::Weak),
        c if c == SwmRegime::Decoupled as u32 => Ok(CouplingRegime::Decoupled),
        other => Err(Fail(SwmStatus::InvalidArgument, format!("unknown regime code {other}"))),
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SwmComplex {
    pub re: f64,
    pub im: f64,
}

/// Which matrix of a snapshot to copy out.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwmMatrix {
    /// Whitened equivalent channel `H̃`.
    Channel = 0,
    /// Equivalent LoS part.
    Los = 1,
    /// Equivalent scattered part.
    Scattered = 2,
    /// Physical channel `H_MIMO`.
    Physical = 3,
    /// Equivalent receive correlation `C_R`.
    RxCorrelation = 4,
    /// Equivalent transmit correlation `C_T`.
    TxCorrelation = 5,
}

/// Configured simulator for one coupling regime.
pub struct SwmSimulator {
    inner: Simulator,
}

/// One trial evaluated at a set of grid sub-channels.
pub struct SwmRealization {
    inner: ChannelRealization,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> SwmStatus {
    match e {
        Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } => SwmStatus::InvalidArgument,
        Error::Config(_) => SwmStatus::ConfigError,
        Error::Io(_) | Error::Csv(_) => SwmStatus::IoError,
        _ => SwmStatus::NumericalError,
    }
}

struct Fail(SwmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SwmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SwmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SwmStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SwmStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn copy_matrix(m: &CMatrix, buf: *mut SwmComplex, len: usize) -> Result<(), Fail> {
    let need = m.len();
    if len < need {
        return Err(Fail(
            SwmStatus::BufferTooSmall,
            format!("buffer holds {len} entries, {need} required"),
        ));
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    let out = unsafe { std::slice::from_raw_parts_mut(buf, need) };
    for (o, z) in out.iter_mut().zip(m.iter()) {
        *o = SwmComplex { re: z.re, im: z.im };
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn swm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn swm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn new_simulator(cfg: &ScenarioConfig, regime: u32, out: &mut *mut SwmSimulator) -> Result<(), Fail> {
    let inner = Simulator::new(cfg, regime_of(regime)?)?;
    *out = Box::into_raw(Box::new(SwmSimulator { inner }));
    Ok(())
}

/// Simulator with the built-in default scenario. `regime` is a
/// [`SwmRegime`] value.
///
/// # Safety
/// `out` must be null or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn swm_simulator_new_default(regime: u32, out: *mut *mut SwmSimulator) -> SwmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        new_simulator(&ScenarioConfig::default(), regime, out)
    })
}

/// Simulator from a TOML scenario held in a NUL-terminated UTF-8 string.
///
/// # Safety
/// `toml` must be null or a valid C string; `out` as in
/// [`swm_simulator_new_default`].
#[no_mangle]
pub unsafe extern "C" fn swm_simulator_from_toml(
    toml: *const c_char,
    regime: u32,
    out: *mut *mut SwmSimulator,
) -> SwmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if toml.is_null() {
            return Err(null("toml"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| Fail(SwmStatus::InvalidArgument, format!("configuration is not UTF-8: {e}")))?;
        let cfg = ScenarioConfig::from_toml_str(text).map_err(|e| Fail(SwmStatus::ConfigError, e.to_string()))?;
        new_simulator(&cfg, regime, out)
    })
}

/// Releases a simulator. Null is ignored.
///
/// # Safety
/// `sim` must be null or a pointer obtained from this library that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn swm_simulator_free(sim: *mut SwmSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of grid sub-channels.
///
/// # Safety
/// `sim` must be a live simulator; `out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn swm_simulator_grid_len(sim: *const SwmSimulator, out: *mut usize) -> SwmStatus {
    guard(|| {
        *out_ref(out, "out")? = deref(sim, "sim")?.inner.grid().len();
        Ok(())
    })
}

/// Center frequency of grid sub-channel `index` in Hz.
///
/// # Safety
/// As [`swm_simulator_grid_len`].
#[no_mangle]
pub unsafe extern "C" fn swm_simulator_frequency(sim: *const SwmSimulator, index: usize, out: *mut f64) -> SwmStatus {
    guard(|| {
        let grid = deref(sim, "sim")?.inner.grid();
        if index >= grid.len() {
            return Err(Fail(
                SwmStatus::InvalidArgument,
                format!("index {index} is outside a grid of {}", grid.len()),
            ));
        }
        *out_ref(out, "out")? = grid.center(index);
        Ok(())
    })
}

/// Receive and transmit element counts.
///
/// # Safety
/// `sim` must be a live simulator; `n_r` and `n_t` writable or null.
#[no_mangle]
pub unsafe extern "C" fn swm_simulator_dims(sim: *const SwmSimulator, n_r: *mut usize, n_t: *mut usize) -> SwmStatus {
    guard(|| {
        let s = &deref(sim, "sim")?.inner;
        *out_ref(n_r, "n_r")? = s.rx_array().n_elements();
        *out_ref(n_t, "n_t")? = s.tx_array().n_elements();
        Ok(())
    })
}

/// Channel of trial `trial` at the strictly increasing grid indices
/// `indices[0..count]`.
///
/// # Safety
/// `sim` must be a live simulator, `indices` must point to `count` values
/// (or be null when `count` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swm_simulator_realize(
    sim: *const SwmSimulator,
    trial: u64,
    indices: *const usize,
    count: usize,
    out: *mut *mut SwmRealization,
) -> SwmStatus {
    guard(|| {
        let s = &deref(sim, "sim")?.inner;
        let out = out_ref(out, "out")?;
        let idx: &[usize] = if count == 0 {
            &[]
        } else if indices.is_null() {
            return Err(null("indices"));
        } else {
            std::slice::from_raw_parts(indices, count)
        };
        let inner = s.realize(trial, idx)?;
        *out = Box::into_raw(Box::new(SwmRealization { inner }));
        Ok(())
    })
}

/// Releases a realization. Null is ignored.
///
/// # Safety
/// `r` must be null or a pointer obtained from this library that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn swm_realization_free(r: *mut SwmRealization) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of snapshots in a realization.
///
/// # Safety
/// `r` must be a live realization; `out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn swm_realization_len(r: *const SwmRealization, out: *mut usize) -> SwmStatus {
    guard(|| {
        *out_ref(out, "out")? = deref(r, "realization")?.inner.len();
        Ok(())
    })
}

unsafe fn snapshot<'a>(r: *const SwmRealization, k: usize) -> Result<&'a swmimo::channel::ChannelSnapshot, Fail> {
    let r = deref(r, "realization")?;
    r.inner.get(k).ok_or_else(|| {
        Fail(
            SwmStatus::InvalidArgument,
            format!("snapshot {k} is outside a realization of {}", r.inner.len()),
        )
    })
}

/// Frequency, K-factor and path gain of snapshot `k`. Any output pointer
/// may be null.
///
/// # Safety
/// `r` must be a live realization; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn swm_realization_info(
    r: *const SwmRealization,
    k: usize,
    freq_hz: *mut f64,
    k_linear: *mut f64,
    path_gain: *mut f64,
) -> SwmStatus {
    guard(|| {
        let s = snapshot(r, k)?;
        if let Some(p) = freq_hz.as_mut() {
            *p = s.freq_hz;
        }
        if let Some(p) = k_linear.as_mut() {
            *p = s.k_linear;
        }
        if let Some(p) = path_gain.as_mut() {
            *p = s.path_gain;
        }
        Ok(())
    })
}

/// Copies the [`SwmMatrix`] selected by `which` from snapshot `k`
/// column-major into `buf`, which must hold at least `rows·cols` entries.
///
/// # Safety
/// `r` must be a live realization and `buf` must point to `len` writable
/// entries.
#[no_mangle]
pub unsafe extern "C" fn swm_realization_matrix(
    r: *const SwmRealization,
    k: usize,
    which: u32,
    buf: *mut SwmComplex,
    len: usize,
) -> SwmStatus {
    guard(|| {
        let s = snapshot(r, k)?;
        let m = match which {
            w if w == SwmMatrix::Channel as u32 => &s.h_tilde,
            w if w == SwmMatrix::Los as u32 => &s.h_eq_los,
            w if w == SwmMatrix::Scattered as u32 => &s.h_eq_sc,
            w if w == SwmMatrix::Physical as u32 => &s.h_mimo,
            w if w == SwmMatrix::RxCorrelation as u32 => &s.c_r,
            w if w == SwmMatrix::TxCorrelation as u32 => &s.c_t,
            other => return Err(Fail(SwmStatus::InvalidArgument, format!("unknown matrix code {other}"))),
        };
        copy_matrix(m, buf, len)
    })
}

/// Eigen-SNRs (linear, descending) of snapshot `k` with `power` watts on
/// the sub-channel, split equally over the active modes. Writes
/// `min(n_r, n_t)` values.
///
/// # Safety
/// `r` must be a live realization and `buf` must point to `len` writable
/// values.
#[no_mangle]
pub unsafe extern "C" fn swm_realization_eigen_snrs(
    r: *const SwmRealization,
    k: usize,
    power: f64,
    buf: *mut f64,
    len: usize,
) -> SwmStatus {
    guard(|| {
        let s = snapshot(r, k)?;
        let policy = PowerPolicy::new(power, PowerNormalization::PerSubchannel, 1)?;
        let profile = eigen_snrs(&s.h_tilde, &policy)?;
        let need = profile.modes.len();
        if len < need {
            return Err(Fail(
                SwmStatus::BufferTooSmall,
                format!("buffer holds {len} values, {need} required"),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (o, m) in out.iter_mut().zip(&profile.modes) {
            *o = m.snr;
        }
        Ok(())
    })
}

/// Frequency correlation at integer lag.
///
/// # Safety
/// `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn swm_jakes_entry(lag: usize, delta_f_hz: f64, tau_rms_s: f64, out: *mut f64) -> SwmStatus {
    guard(|| {
        *out_ref(out, "out")? = swmimo::fading::jakes_entry(lag, delta_f_hz, tau_rms_s);
        Ok(())
    })
}

/// Mean and variance of the K-factor in dB at `f_ghz`. Either output may be
/// null.
///
/// # Safety
/// Non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn swm_k_factor_moments(f_ghz: f64, mean_db: *mut f64, var_db: *mut f64) -> SwmStatus {
    guard(|| {
        let m = swmimo::fading::k_mean_db(f_ghz)?;
        let v = swmimo::fading::k_var_db(f_ghz)?;
        if let Some(p) = mean_db.as_mut() {
            *p = m;
        }
        if let Some(p) = var_db.as_mut() {
            *p = v;
        }
        Ok(())
    })
}

/// Chu lowest-mode self impedance of an element of radius `radius_m`.
///
/// # Safety
/// `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn swm_chu_self_impedance(f_hz: f64, radius_m: f64, r_rad_ohm: f64, out: *mut SwmComplex) -> SwmStatus {
    guard(|| {
        let z = swmimo::circuit::chu_self_impedance(f_hz, radius_m, r_rad_ohm)?;
        *out_ref(out, "out")? = SwmComplex { re: z.re, im: z.im };
        Ok(())
    })
}
