//! C ABI over the evokan library.
//!
//! Objects cross the boundary as opaque handles created by `*_load` / `*_new`
//! and released with the matching `*_free`. Every fallible function returns an
//! [`EvkStatus`]; the message of the most recent failure on the calling thread
//! is available from [`evk_last_error_message`]. Output buffers are supplied by
//! the caller together with their length.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use evokan::kan::{load_network, Network, ParamVector};
use evokan::metrics::l2_snapshot_error;
use evokan::problems::FieldSnapshot;
use evokan::Error;

/// Result codes. The nonzero values 2, 3 and 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvkStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Invalid input: bad sizes, mismatched grids, unsupported configuration.
    Invalid = 2,
    /// Singular system or non-finite values.
    Numerical = 3,
    /// File missing, unreadable, or malformed.
    Io = 4,
    /// A caller-supplied buffer is too small; the needed length was written.
    BufferTooSmall = 5,
    /// Internal failure; the library state is unchanged.
    Panic = 6,
}

/// A network together with its parameters.
pub struct EvkNetwork {
    net: Network,
    params: ParamVector,
}

/// A sampled field on a periodic grid.
pub struct EvkSnapshot {
    snap: FieldSnapshot,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(err: Error) -> EvkStatus {
    let status = match err.exit_code() {
        3 => EvkStatus::Numerical,
        4 => EvkStatus::Io,
        _ => EvkStatus::Invalid,
    };
    set_error(err.to_string());
    status
}

fn guard(f: impl FnOnce() -> EvkStatus) -> EvkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            EvkStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, EvkStatus> {
    if path.is_null() {
        set_error("path is null");
        return Err(EvkStatus::NullArgument);
    }
    match CStr::from_ptr(path).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(EvkStatus::Invalid)
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!(stringify!($p), " is null"));
            return EvkStatus::NullArgument;
        })+
    };
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn evk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn evk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Load an EVKN file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evk_network_load(path: *const c_char, out: *mut *mut EvkNetwork) -> EvkStatus {
    guard(|| {
        non_null!(out);
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_network(path) {
            Ok((net, params)) => {
                *out = Box::into_raw(Box::new(EvkNetwork { net, params }));
                EvkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `net` must be null or a handle from [`evk_network_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evk_network_free(net: *mut EvkNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Input dimension, output count and parameter count.
///
/// # Safety
/// `net` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn evk_network_dims(
    net: *const EvkNetwork,
    input_dim: *mut usize,
    output_dim: *mut usize,
    n_params: *mut usize,
) -> EvkStatus {
    guard(|| {
        non_null!(net, input_dim, output_dim, n_params);
        let n = &*net;
        *input_dim = n.net.input_dim();
        *output_dim = n.net.output_dim();
        *n_params = n.net.n_params();
        EvkStatus::Ok
    })
}

/// Evaluate the network at `n_points` points stored row by row in `points`
/// (`n_points × input_dim` values). Writes `n_points × output_dim` values.
///
/// # Safety
/// `points` must hold `points_len` doubles and `out` must hold `out_len`.
#[no_mangle]
pub unsafe extern "C" fn evk_network_forward(
    net: *const EvkNetwork,
    points: *const f64,
    points_len: usize,
    n_points: usize,
    out: *mut f64,
    out_len: usize,
) -> EvkStatus {
    guard(|| {
        non_null!(net, points, out);
        let n = &*net;
        let d = n.net.input_dim();
        let m = n.net.output_dim();
        if points_len != n_points * d {
            set_error(format!("expected {} coordinates, got {points_len}", n_points * d));
            return EvkStatus::Invalid;
        }
        if out_len < n_points * m {
            set_error(format!("output buffer needs {} values", n_points * m));
            return EvkStatus::BufferTooSmall;
        }
        let flat = std::slice::from_raw_parts(points, points_len);
        let pts: Vec<Vec<f64>> = flat.chunks(d.max(1)).map(<[f64]>::to_vec).collect();
        match n.net.forward_batch(&n.params, &pts) {
            Ok(vals) => {
                let dst = std::slice::from_raw_parts_mut(out, n_points * m);
                for (chunk, v) in dst.chunks_mut(m).zip(vals) {
                    chunk.copy_from_slice(&v);
                }
                EvkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Copy the parameter vector into `out`.
///
/// # Safety
/// `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn evk_network_params(net: *const EvkNetwork, out: *mut f64, out_len: usize) -> EvkStatus {
    guard(|| {
        non_null!(net, out);
        let p = (*net).params.as_slice();
        if out_len < p.len() {
            set_error(format!("output buffer needs {} values", p.len()));
            return EvkStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(p.as_ptr(), out, p.len());
        EvkStatus::Ok
    })
}

/// Load an EVKS file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evk_snapshot_load(path: *const c_char, out: *mut *mut EvkSnapshot) -> EvkStatus {
    guard(|| {
        non_null!(out);
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match FieldSnapshot::load(path) {
            Ok(snap) => {
                *out = Box::into_raw(Box::new(EvkSnapshot { snap }));
                EvkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Build a snapshot from component-major values. `ny = 0` means 1D.
///
/// # Safety
/// `values` must hold `values_len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evk_snapshot_new(
    nx: usize,
    ny: usize,
    components: usize,
    t: f64,
    values: *const f64,
    values_len: usize,
    out: *mut *mut EvkSnapshot,
) -> EvkStatus {
    guard(|| {
        non_null!(values, out);
        let shape = if ny == 0 { vec![nx] } else { vec![nx, ny] };
        let vals = std::slice::from_raw_parts(values, values_len).to_vec();
        match FieldSnapshot::new(shape, components, t, vals) {
            Ok(snap) => {
                *out = Box::into_raw(Box::new(EvkSnapshot { snap }));
                EvkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `snap` a live handle.
#[no_mangle]
pub unsafe extern "C" fn evk_snapshot_save(snap: *const EvkSnapshot, path: *const c_char) -> EvkStatus {
    guard(|| {
        non_null!(snap);
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match (*snap).snap.save(path) {
            Ok(()) => EvkStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `snap` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evk_snapshot_free(snap: *mut EvkSnapshot) {
    if !snap.is_null() {
        drop(Box::from_raw(snap));
    }
}

/// Grid size (`ny = 0` for 1D), component count and time.
///
/// # Safety
/// `snap` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn evk_snapshot_dims(
    snap: *const EvkSnapshot,
    nx: *mut usize,
    ny: *mut usize,
    components: *mut usize,
    t: *mut f64,
) -> EvkStatus {
    guard(|| {
        non_null!(snap, nx, ny, components, t);
        let s = &(*snap).snap;
        *nx = s.shape[0];
        *ny = s.shape.get(1).copied().unwrap_or(0);
        *components = s.components;
        *t = s.t;
        EvkStatus::Ok
    })
}

/// Copy all values (component-major, `x` fastest) into `out`.
///
/// # Safety
/// `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn evk_snapshot_values(snap: *const EvkSnapshot, out: *mut f64, out_len: usize) -> EvkStatus {
    guard(|| {
        non_null!(snap, out);
        let v = &(*snap).snap.values;
        if out_len < v.len() {
            set_error(format!("output buffer needs {} values", v.len()));
            return EvkStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        EvkStatus::Ok
    })
}

/// Root-mean-square difference of two snapshots on the same grid and time.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evk_l2_error(a: *const EvkSnapshot, b: *const EvkSnapshot, out: *mut f64) -> EvkStatus {
    guard(|| {
        non_null!(a, b, out);
        match l2_snapshot_error(&(*a).snap, &(*b).snap) {
            Ok(e) => {
                *out = e;
                EvkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
