//! C ABI for the gk-lab library.
//!
//! Conventions: handles are opaque pointers created and destroyed by this
//! library; every fallible function returns a [`GkStatus`] code and writes
//! results through out-pointers; strings returned through out-pointers are
//! NUL-terminated, owned by the caller, and must be released with
//! [`gklab_string_free`]. A failing call stores a message retrievable with
//! [`gklab_last_error`] (thread-local, valid until the next failing call on
//! the same thread).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use gklab_core::circuit::{parse_circuit, serialize_circuit, Circuit};
use gklab_core::error::{Caps, Error};
use gklab_core::problems::{solve_2dhlf_bruteforce, verify_2dhlf, HlfInstance};
use gklab_core::symsat::{brute_force_sat, gc_sat, SatOptions};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkStatus {
    Ok = 0,
    InputError = 1,
    ResourceError = 2,
    InternalError = 3,
    ParseError = 4,
    NullPointer = 5,
    Utf8Error = 6,
    BufferTooSmall = 7,
}

/// Opaque circuit handle.
pub struct GkCircuit {
    inner: Circuit,
    caps: Caps,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> GkStatus {
    match err {
        Error::Input(_) | Error::Unsupported(_) => GkStatus::InputError,
        Error::Resource(_) => GkStatus::ResourceError,
        Error::Parse { .. } => GkStatus::ParseError,
        Error::Internal(_) => GkStatus::InternalError,
    }
}

fn fail(err: &Error) -> GkStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Message from the most recent failing call on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gklab_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gklab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned through one of this library's
/// string out-parameters, not yet freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn gklab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, GkStatus> {
    if ptr.is_null() {
        set_error("null string pointer");
        return Err(GkStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        GkStatus::Utf8Error
    })
}

fn give_string(out: *mut *mut c_char, s: String) -> GkStatus {
    let sanitized: String = s.chars().filter(|&c| c != '\0').collect();
    let cstring = CString::new(sanitized).unwrap_or_default();
    unsafe { *out = cstring.into_raw() };
    GkStatus::Ok
}

/// Parse a circuit from its text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer; on
/// `Ok` the handle written to `out` must be released with
/// [`gklab_circuit_free`].
#[no_mangle]
pub unsafe extern "C" fn gklab_circuit_parse(
    text: *const c_char,
    out: *mut *mut GkCircuit,
) -> GkStatus {
    if out.is_null() {
        set_error("null out pointer");
        return GkStatus::NullPointer;
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(code) => return code,
    };
    match parse_circuit(text) {
        Ok((circuit, _name)) => {
            let diags = circuit.validate();
            if !diags.is_empty() {
                let msgs: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
                set_error(&format!("invalid circuit: {}", msgs.join("; ")));
                return GkStatus::InputError;
            }
            let handle = Box::new(GkCircuit {
                inner: circuit,
                caps: Caps::from_env(),
            });
            *out = Box::into_raw(handle);
            GkStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Release a circuit handle. NULL is ignored.
///
/// # Safety
/// `c` must come from [`gklab_circuit_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gklab_circuit_free(c: *mut GkCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of inputs; -1 on a null handle.
///
/// # Safety
/// `c` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gklab_circuit_ninputs(c: *const GkCircuit) -> i32 {
    match c.as_ref() {
        Some(c) => c.inner.ninputs() as i32,
        None => -1,
    }
}

/// Number of outputs; -1 on a null handle.
///
/// # Safety
/// `c` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gklab_circuit_noutputs(c: *const GkCircuit) -> i32 {
    match c.as_ref() {
        Some(c) => c.inner.noutputs() as i32,
        None => -1,
    }
}

/// Gate count (negations excluded); -1 on a null handle.
///
/// # Safety
/// `c` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gklab_circuit_size(c: *const GkCircuit) -> i64 {
    match c.as_ref() {
        Some(c) => c.inner.size() as i64,
        None => -1,
    }
}

/// Depth (negations excluded); -1 on a null handle.
///
/// # Safety
/// `c` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gklab_circuit_depth(c: *const GkCircuit) -> i32 {
    match c.as_ref() {
        Some(c) => c.inner.depth() as i32,
        None => -1,
    }
}

/// Serialize a circuit back to its text format.
///
/// # Safety
/// `c` must be a live handle, `name` NUL-terminated, `out` valid; the
/// returned string is released with [`gklab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gklab_circuit_serialize(
    c: *const GkCircuit,
    name: *const c_char,
    out: *mut *mut c_char,
) -> GkStatus {
    let Some(c) = c.as_ref() else {
        set_error("null circuit handle");
        return GkStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null out pointer");
        return GkStatus::NullPointer;
    }
    let name = match read_str(name) {
        Ok(n) => n,
        Err(code) => return code,
    };
    give_string(out, serialize_circuit(&c.inner, name))
}

/// Evaluate at one input point. `bits[i]` holds `x_{i+1}` as 0/1; one byte
/// per output is written to `out`.
///
/// # Safety
/// `bits` must hold `nbits` readable bytes and `out` `nout` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gklab_circuit_eval(
    c: *const GkCircuit,
    bits: *const u8,
    nbits: usize,
    out: *mut u8,
    nout: usize,
) -> GkStatus {
    let Some(c) = c.as_ref() else {
        set_error("null circuit handle");
        return GkStatus::NullPointer;
    };
    if bits.is_null() || out.is_null() {
        set_error("null buffer");
        return GkStatus::NullPointer;
    }
    if nout < c.inner.noutputs() {
        set_error("output buffer too small");
        return GkStatus::BufferTooSmall;
    }
    let input: Vec<bool> = std::slice::from_raw_parts(bits, nbits)
        .iter()
        .map(|&b| b != 0)
        .collect();
    match c.inner.evaluate(&input) {
        Ok(vals) => {
            let out = std::slice::from_raw_parts_mut(out, c.inner.noutputs());
            for (slot, v) in out.iter_mut().zip(&vals) {
                *slot = *v as u8;
            }
            GkStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Exhaustive truth table of one output, packed 8 points per byte: point
/// `x` lands in bit `x & 7` of byte `x >> 3`. The buffer needs
/// `ceil(2^n / 8)` bytes.
///
/// # Safety
/// `buf` must hold `buf_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gklab_circuit_truth_table(
    c: *const GkCircuit,
    output: usize,
    buf: *mut u8,
    buf_len: usize,
) -> GkStatus {
    let Some(c) = c.as_ref() else {
        set_error("null circuit handle");
        return GkStatus::NullPointer;
    };
    if buf.is_null() {
        set_error("null buffer");
        return GkStatus::NullPointer;
    }
    let need = (1usize << c.inner.ninputs()).div_ceil(8);
    if buf_len < need {
        set_error("truth-table buffer too small");
        return GkStatus::BufferTooSmall;
    }
    match c.inner.truth_table(output, &c.caps) {
        Ok(table) => {
            let out = std::slice::from_raw_parts_mut(buf, need);
            out.fill(0);
            for x in 0..(1u64 << c.inner.ninputs()) {
                if table.get(x) {
                    out[(x >> 3) as usize] |= 1 << (x & 7);
                }
            }
            GkStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Run the satisfiability pipeline; the report is returned as one JSON
/// line (the same schema as the command-line tool).
///
/// # Safety
/// `c` must be a live handle and `out_json` a valid pointer; the returned
/// string is released with [`gklab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gklab_sat(
    c: *const GkCircuit,
    ell: u32,
    repeats: u32,
    seed: u64,
    out_json: *mut *mut c_char,
) -> GkStatus {
    let Some(c) = c.as_ref() else {
        set_error("null circuit handle");
        return GkStatus::NullPointer;
    };
    if out_json.is_null() {
        set_error("null out pointer");
        return GkStatus::NullPointer;
    }
    match gc_sat(
        &c.inner,
        ell,
        repeats,
        seed,
        &SatOptions::default(),
        &c.caps,
    ) {
        Ok(report) => give_string(out_json, gklab_core::report::to_json(&report)),
        Err(e) => fail(&e),
    }
}

/// Exhaustive satisfiability scan; the report is returned as JSON.
///
/// # Safety
/// `c` must be a live handle and `out_json` a valid pointer; the returned
/// string is released with [`gklab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gklab_brute_force_sat(
    c: *const GkCircuit,
    out_json: *mut *mut c_char,
) -> GkStatus {
    let Some(c) = c.as_ref() else {
        set_error("null circuit handle");
        return GkStatus::NullPointer;
    };
    if out_json.is_null() {
        set_error("null out pointer");
        return GkStatus::NullPointer;
    }
    match brute_force_sat(&c.inner, &c.caps) {
        Ok(report) => give_string(out_json, gklab_core::report::to_json(&report)),
        Err(e) => fail(&e),
    }
}

/// Generate a random grid instance of the hidden-linear-function problem,
/// solve it, verify the solution, and return everything as JSON.
///
/// # Safety
/// `out_json` must be a valid pointer; the returned string is released
/// with [`gklab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gklab_hlf_solve(
    grid: u32,
    seed: u64,
    out_json: *mut *mut c_char,
) -> GkStatus {
    if out_json.is_null() {
        set_error("null out pointer");
        return GkStatus::NullPointer;
    }
    let run = || -> Result<String, Error> {
        let inst = HlfInstance::random(grid, seed)?;
        let z = solve_2dhlf_bruteforce(&inst)?;
        let accepted = verify_2dhlf(&inst, z)?;
        let zs: String = (0..inst.n())
            .map(|i| if z >> i & 1 == 1 { '1' } else { '0' })
            .collect();
        Ok(format!(
            "{{\"instance\":{},\"z\":\"{}\",\"accepted\":{}}}",
            gklab_core::report::to_json(&inst),
            zs,
            accepted
        ))
    };
    match run() {
        Ok(json) => give_string(out_json, json),
        Err(e) => fail(&e),
    }
}
