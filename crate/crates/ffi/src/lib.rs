//! C ABI over `densecap`.
//!
//! Every fallible call returns a [`DcStatus`] and writes its result through an
//! out-pointer. On failure the message is kept per thread and can be read
//! with [`dc_last_error`]. Objects come back as opaque handles that must be
//! released with the matching `*_free` function. Strings returned by the
//! library are owned by the caller and released with [`dc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use densecap::capacity::{self, CapacityResult, SharedState};
use densecap::channels::{read_channel, ChannelFile, QuantumChannel};
use densecap::optimize::OptConfig;
use densecap::qmath::io::{read_state, StateFile};
use densecap::qmath::von_neumann_entropy;
use densecap::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    InvalidArgument = 5,
    DimensionMismatch = 6,
    Invariant = 7,
    Numerical = 8,
    Guard = 9,
    NotConverged = 10,
    NotAProgram = 11,
    Panic = 12,
}

impl From<&Error> for DcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse(_) | Error::Json(_) => DcStatus::Parse,
            Error::Io(_) => DcStatus::Io,
            Error::InvalidArgument(_) => DcStatus::InvalidArgument,
            Error::DimensionMismatch(_) | Error::FactorOutOfRange { .. } => DcStatus::DimensionMismatch,
            Error::Invariant(_) => DcStatus::Invariant,
            Error::Numerical(_) => DcStatus::Numerical,
            Error::Guard(_) => DcStatus::Guard,
            Error::NotConverged(_) => DcStatus::NotConverged,
            Error::NotAProgram { .. } => DcStatus::NotAProgram,
        }
    }
}

/// Shared bipartite state with a designated sender side.
pub struct DcState(SharedState);

/// Quantum channel in Kraus form.
pub struct DcChannel(QuantumChannel);

/// Outcome of a capacity computation.
pub struct DcCapacity(CapacityResult);

/// Optimizer settings; obtain defaults from [`dc_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DcOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl From<DcOptions> for OptConfig {
    fn from(o: DcOptions) -> Self {
        OptConfig { restarts: o.restarts, max_iters: o.max_iters, seed: o.seed, ..OptConfig::default() }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(DcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(DcStatus::from(&e), e.to_string())
    }
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            DcStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(DcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(DcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn json_fail(e: serde_json::Error) -> Fail {
    Fail(DcStatus::Parse, e.to_string())
}

fn shared(file: StateFile) -> Result<SharedState, Fail> {
    let rho = file.to_state()?;
    Ok(SharedState::new(rho, file.sender_factors.unwrap_or_else(|| vec![0]))?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn dc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn dc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn dc_options_default() -> DcOptions {
    let c = OptConfig::default();
    DcOptions { restarts: c.restarts, max_iters: c.max_iters, seed: c.seed }
}

/// Parses a state document (`dims`, `matrix`, optional `sender_factors`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_state_from_json(json: *const c_char, out: *mut *mut DcState) -> DcStatus {
    guard(|| {
        let file: StateFile = serde_json::from_str(str_arg(json, "json")?).map_err(json_fail)?;
        put(out, boxed(DcState(shared(file)?)), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_state_from_file(path: *const c_char, out: *mut *mut DcState) -> DcStatus {
    guard(|| {
        let (rho, sender) = read_state(Path::new(str_arg(path, "path")?))?;
        let s = SharedState::new(rho, sender.unwrap_or_else(|| vec![0]))?;
        put(out, boxed(DcState(s)), "out")
    })
}

/// # Safety
/// `state` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dc_state_free(state: *mut DcState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Writes the sender and receiver dimensions.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_state_dims(state: *const DcState, sender: *mut usize, receiver: *mut usize) -> DcStatus {
    guard(|| {
        let s = &handle(state, "state")?.0;
        put(sender, s.sender_dim(), "sender")?;
        put(receiver, s.receiver_dim(), "receiver")
    })
}

/// Von Neumann entropy of the whole state, in bits.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_state_entropy(state: *const DcState, out: *mut f64) -> DcStatus {
    guard(|| {
        let h = von_neumann_entropy(handle(state, "state")?.0.state())?;
        put(out, h, "out")
    })
}

/// `H(B) - H(AB)` with A the sender side.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_state_coherent_information(state: *const DcState, out: *mut f64) -> DcStatus {
    guard(|| {
        let v = capacity::coherent_information(&handle(state, "state")?.0)?;
        put(out, v, "out")
    })
}

/// Parses a channel document (`d_in`, `d_out`, `kraus`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_channel_from_json(json: *const c_char, out: *mut *mut DcChannel) -> DcStatus {
    guard(|| {
        let file: ChannelFile = serde_json::from_str(str_arg(json, "json")?).map_err(json_fail)?;
        put(out, boxed(DcChannel(file.to_channel()?)), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_channel_from_file(path: *const c_char, out: *mut *mut DcChannel) -> DcStatus {
    guard(|| {
        let t = read_channel(Path::new(str_arg(path, "path")?))?;
        put(out, boxed(DcChannel(t)), "out")
    })
}

/// `rho -> (1 - p) rho + p I / d`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_channel_depolarizing(d: usize, p: f64, out: *mut *mut DcChannel) -> DcStatus {
    guard(|| put(out, boxed(DcChannel(QuantumChannel::depolarizing(d, p)?)), "out"))
}

/// # Safety
/// `channel` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dc_channel_free(channel: *mut DcChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Noiseless dense-coding capacity with a sender alphabet of size `d`.
///
/// # Safety
/// Pointers must be valid; `opts` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn dc_capacity(
    state: *const DcState,
    d: usize,
    opts: *const DcOptions,
    out: *mut *mut DcCapacity,
) -> DcStatus {
    guard(|| {
        let cfg = opts.as_ref().map_or_else(OptConfig::default, |o| (*o).into());
        let r = capacity::dc_capacity(d, &handle(state, "state")?.0, &cfg)?;
        put(out, boxed(DcCapacity(r)), "out")
    })
}

/// Capacity when the encoded system crosses `channel`; `m` is the
/// ensemble size searched.
///
/// # Safety
/// Pointers must be valid; `opts` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn dc_noisy_capacity(
    channel: *const DcChannel,
    state: *const DcState,
    m: usize,
    opts: *const DcOptions,
    out: *mut *mut DcCapacity,
) -> DcStatus {
    guard(|| {
        let cfg = opts.as_ref().map_or_else(OptConfig::default, |o| (*o).into());
        let r = capacity::noisy_dc_capacity(&handle(channel, "channel")?.0, &handle(state, "state")?.0, m, &cfg)?;
        put(out, boxed(DcCapacity(r)), "out")
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_capacity_value(result: *const DcCapacity, out: *mut f64) -> DcStatus {
    guard(|| put(out, handle(result, "result")?.0.value, "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_capacity_converged(result: *const DcCapacity, out: *mut bool) -> DcStatus {
    guard(|| put(out, handle(result, "result")?.0.converged, "out"))
}

/// Full result as JSON; release with [`dc_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_capacity_to_json(result: *const DcCapacity, out: *mut *mut c_char) -> DcStatus {
    guard(|| {
        let text = serde_json::to_string(&handle(result, "result")?.0).map_err(json_fail)?;
        let c = CString::new(text).map_err(|e| Fail(DcStatus::Invariant, e.to_string()))?;
        put(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `result` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dc_capacity_free(result: *mut DcCapacity) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Upper bound `log2 d + D(rho || sigma)`. `certified` reports whether
/// `sigma` is PPT across the sender/receiver cut.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_ree_bound(
    state: *const DcState,
    d: usize,
    sigma: *const DcState,
    bound: *mut f64,
    certified: *mut bool,
) -> DcStatus {
    guard(|| {
        let r = capacity::ree_bound(&handle(state, "state")?.0, d, handle(sigma, "sigma")?.0.state())?;
        put(bound, r.bound, "bound")?;
        put(certified, r.certified, "certified")
    })
}

/// `C(rho (x) sigma) - C(rho) - C(sigma)`.
///
/// # Safety
/// Pointers must be valid; `opts` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn dc_additivity_gap(
    rho: *const DcState,
    d1: usize,
    sigma: *const DcState,
    d2: usize,
    opts: *const DcOptions,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let cfg = opts.as_ref().map_or_else(OptConfig::default, |o| (*o).into());
        let r = capacity::additivity_gap(&handle(rho, "rho")?.0, d1, &handle(sigma, "sigma")?.0, d2, &cfg)?;
        put(out, r.gap, "out")
    })
}
