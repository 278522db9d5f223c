//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use gklab_ffi::*;

const TOY: &str = "circuit toy n=3\n\
                   gate g0 = GK[k=1 default=1 table=hex:00] x1 x2 x3\n\
                   outputs g0\n";

fn parse(text: &str) -> *mut GkCircuit {
    let ctext = CString::new(text).unwrap();
    let mut handle: *mut GkCircuit = ptr::null_mut();
    let status = unsafe { gklab_circuit_parse(ctext.as_ptr(), &mut handle) };
    assert_eq!(status, GkStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { gklab_string_free(ptr) };
    s
}

#[test]
fn version_is_present() {
    let v = unsafe { CStr::from_ptr(gklab_version()) }.to_str().unwrap();
    assert!(!v.is_empty());
}

#[test]
fn parse_inspect_serialize_roundtrip() {
    let c = parse(TOY);
    unsafe {
        assert_eq!(gklab_circuit_ninputs(c), 3);
        assert_eq!(gklab_circuit_noutputs(c), 1);
        assert_eq!(gklab_circuit_size(c), 1);
        assert_eq!(gklab_circuit_depth(c), 1);
        let name = CString::new("toy").unwrap();
        let mut text: *mut c_char = ptr::null_mut();
        assert_eq!(
            gklab_circuit_serialize(c, name.as_ptr(), &mut text),
            GkStatus::Ok
        );
        let round = take_string(text);
        // Parse the serialized form again and compare the serializations.
        let c2 = parse(&round);
        let mut text2: *mut c_char = ptr::null_mut();
        assert_eq!(
            gklab_circuit_serialize(c2, name.as_ptr(), &mut text2),
            GkStatus::Ok
        );
        assert_eq!(round, take_string(text2));
        gklab_circuit_free(c2);
        gklab_circuit_free(c);
    }
}

#[test]
fn eval_and_truth_table() {
    let c = parse(TOY);
    unsafe {
        // Weight-2 input hits the default 1; weight-1 reads the zero table.
        let mut out = [9u8];
        let bits = [1u8, 1, 0];
        assert_eq!(
            gklab_circuit_eval(c, bits.as_ptr(), 3, out.as_mut_ptr(), 1),
            GkStatus::Ok
        );
        assert_eq!(out[0], 1);
        let bits = [1u8, 0, 0];
        assert_eq!(
            gklab_circuit_eval(c, bits.as_ptr(), 3, out.as_mut_ptr(), 1),
            GkStatus::Ok
        );
        assert_eq!(out[0], 0);

        let mut packed = [0u8; 1];
        assert_eq!(
            gklab_circuit_truth_table(c, 0, packed.as_mut_ptr(), 1),
            GkStatus::Ok
        );
        // Points of weight >= 2 are 1: indices 3, 5, 6, 7.
        assert_eq!(packed[0], 0b1110_1000);

        // Undersized buffer is reported, not written.
        assert_eq!(
            gklab_circuit_truth_table(c, 0, packed.as_mut_ptr(), 0),
            GkStatus::BufferTooSmall
        );
        gklab_circuit_free(c);
    }
}

#[test]
fn sat_reports_come_back_as_json() {
    let c = parse(TOY);
    unsafe {
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(gklab_sat(c, 1, 9, 7, &mut json), GkStatus::Ok);
        let report = take_string(json);
        assert!(report.contains("\"verdict\":\"Sat\""), "{report}");
        assert!(report.contains("\"witness\""));

        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(gklab_brute_force_sat(c, &mut json), GkStatus::Ok);
        let brute = take_string(json);
        assert!(brute.contains("\"verdict\":\"Sat\""), "{brute}");
        gklab_circuit_free(c);
    }
}

#[test]
fn hlf_solver_over_ffi() {
    unsafe {
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(gklab_hlf_solve(3, 11, &mut json), GkStatus::Ok);
        let report = take_string(json);
        assert!(report.contains("\"accepted\":true"), "{report}");
    }
}

#[test]
fn error_paths_set_codes_and_messages() {
    unsafe {
        // Parse error with a message.
        let bad = CString::new("circuit x n=2\ngate g = FROB x1\noutputs g\n").unwrap();
        let mut handle: *mut GkCircuit = ptr::null_mut();
        assert_eq!(
            gklab_circuit_parse(bad.as_ptr(), &mut handle),
            GkStatus::ParseError
        );
        let msg = CStr::from_ptr(gklab_last_error()).to_str().unwrap();
        assert!(msg.contains("FROB"), "{msg}");

        // Null pointers are refused, not dereferenced.
        assert_eq!(
            gklab_circuit_parse(ptr::null(), &mut handle),
            GkStatus::NullPointer
        );
        assert_eq!(gklab_circuit_ninputs(ptr::null()), -1);
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            gklab_sat(ptr::null(), 1, 1, 0, &mut json),
            GkStatus::NullPointer
        );
        gklab_string_free(ptr::null_mut()); // harmless
        gklab_circuit_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/gklab.h");
    let text = std::fs::read_to_string(header).expect("header generated at build time");
    for symbol in [
        "gklab_circuit_parse",
        "gklab_circuit_free",
        "gklab_sat",
        "gklab_last_error",
        "GkStatus",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}
