//! C ABI for the offload interface. A context replaces the implicit global
//! crossbar of the plain two-function API.

use std::ffi::{c_char, c_int, CStr};
use std::ptr;

use super::FunctionalInterface;
use crate::mapping::MappingScheme;
use crate::xbar::CrossbarConfig;

/// Creates a context with an ideal ADC and noise-free cells. Returns null on
/// an unknown mapping name or invalid parameters.
///
/// # Safety
/// `mapping` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cimsim_context_new(
    mapping: *const c_char,
    rows: c_int,
    cols: c_int,
    i_hrs: f64,
    i_lrs: f64,
    seed: u64,
) -> *mut FunctionalInterface {
    if mapping.is_null() || rows <= 0 || cols <= 0 {
        return ptr::null_mut();
    }
    let Ok(name) = CStr::from_ptr(mapping).to_str() else {
        return ptr::null_mut();
    };
    let Ok(scheme) = name.parse::<MappingScheme>() else {
        return ptr::null_mut();
    };
    let cfg = CrossbarConfig {
        seed,
        ..CrossbarConfig::ideal(rows as usize, cols as usize, i_hrs, i_lrs)
    };
    match FunctionalInterface::new(scheme, cfg) {
        Ok(ctx) => Box::into_raw(Box::new(ctx)),
        Err(_) => ptr::null_mut(),
    }
}

/// # Safety
/// `ctx` must come from [`cimsim_context_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cimsim_context_free(ctx: *mut FunctionalInterface) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// # Safety
/// `ctx` must be a live context and `m` must hold `m_int * n_int` ints.
#[no_mangle]
pub unsafe extern "C" fn cimsim_write_matrix(
    ctx: *mut FunctionalInterface,
    m: *const c_int,
    m_int: c_int,
    n_int: c_int,
) -> c_int {
    if ctx.is_null() || m.is_null() || m_int <= 0 || n_int <= 0 {
        return super::StatusCode::Other as c_int;
    }
    let m = std::slice::from_raw_parts(m, (m_int as usize) * (n_int as usize));
    (*ctx).write_matrix(m, m_int, n_int)
}

/// # Safety
/// `ctx` must be a live context, `r` must hold `m_int` ints and `v` `n_int` ints.
#[no_mangle]
pub unsafe extern "C" fn cimsim_mvm(
    ctx: *mut FunctionalInterface,
    r: *mut c_int,
    v: *const c_int,
    m_int: c_int,
    n_int: c_int,
) -> c_int {
    if ctx.is_null() || r.is_null() || v.is_null() || m_int <= 0 || n_int <= 0 {
        return super::StatusCode::Other as c_int;
    }
    let r = std::slice::from_raw_parts_mut(r, m_int as usize);
    let v = std::slice::from_raw_parts(v, n_int as usize);
    (*ctx).mvm(r, v, m_int, n_int)
}
