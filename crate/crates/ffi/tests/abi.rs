use std::ffi::{CStr, CString};
use std::ptr;

use densecap_ffi::*;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures");

fn fixture(name: &str) -> CString {
    CString::new(format!("{FIXTURES}/{name}")).unwrap()
}

fn last_error() -> String {
    let p = dc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn state(name: &str) -> *mut DcState {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { dc_state_from_file(fixture(name).as_ptr(), &mut s) }, DcStatus::Ok);
    s
}

fn fast() -> DcOptions {
    DcOptions { restarts: 3, ..dc_options_default() }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(dc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn bell_state_capacity_through_handles() {
    let s = state("bell.json");
    let (mut da, mut db) = (0usize, 0usize);
    assert_eq!(unsafe { dc_state_dims(s, &mut da, &mut db) }, DcStatus::Ok);
    assert_eq!((da, db), (2, 2));

    let mut h = f64::NAN;
    assert_eq!(unsafe { dc_state_entropy(s, &mut h) }, DcStatus::Ok);
    assert!(h.abs() < 1e-9);
    let mut ic = f64::NAN;
    assert_eq!(unsafe { dc_state_coherent_information(s, &mut ic) }, DcStatus::Ok);
    assert!((ic - 1.0).abs() < 1e-9);

    let opts = fast();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { dc_capacity(s, 2, &opts, &mut r) }, DcStatus::Ok);
    let mut v = 0.0;
    let mut conv = false;
    unsafe {
        assert_eq!(dc_capacity_value(r, &mut v), DcStatus::Ok);
        assert_eq!(dc_capacity_converged(r, &mut conv), DcStatus::Ok);
    }
    assert!((v - 2.0).abs() < 1e-6, "{v}");
    assert!(conv);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { dc_capacity_to_json(r, &mut json) }, DcStatus::Ok);
    let parsed: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert!((parsed["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    unsafe {
        dc_string_free(json);
        dc_capacity_free(r);
        dc_state_free(s);
    }
}

#[test]
fn state_from_json_text() {
    let text = CString::new(r#"{"dims":[2,2],"matrix":[[[1,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { dc_state_from_json(text.as_ptr(), &mut s) }, DcStatus::Ok);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { dc_capacity(s, 2, ptr::null(), &mut r) }, DcStatus::Ok);
    let mut v = 0.0;
    unsafe { dc_capacity_value(r, &mut v) };
    assert!((v - 1.0).abs() < 1e-6);
    unsafe {
        dc_capacity_free(r);
        dc_state_free(s);
    }
}

#[test]
fn errors_map_to_codes_with_messages() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { dc_state_from_file(fixture("non-psd.json").as_ptr(), &mut s) }, DcStatus::Invariant);
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { dc_state_from_file(fixture("truncated.json").as_ptr(), &mut s) }, DcStatus::Parse);
    assert_eq!(unsafe { dc_state_from_file(fixture("no-such-file.json").as_ptr(), &mut s) }, DcStatus::Io);
    assert_eq!(unsafe { dc_state_from_file(ptr::null(), &mut s) }, DcStatus::NullPointer);
    assert!(last_error().contains("path"));

    let bad = [0xffu8, 0];
    assert_eq!(unsafe { dc_state_from_json(bad.as_ptr().cast(), &mut s) }, DcStatus::InvalidUtf8);

    let mut v = 0.0;
    assert_eq!(unsafe { dc_capacity_value(ptr::null(), &mut v) }, DcStatus::NullPointer);

    let mut t = ptr::null_mut();
    assert_eq!(unsafe { dc_channel_depolarizing(2, 1.5, &mut t) }, DcStatus::InvalidArgument);

    // Success clears the stored message.
    let b = state("bell.json");
    assert!(dc_last_error().is_null());
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { dc_capacity(b, 0, ptr::null(), &mut r) }, DcStatus::InvalidArgument);
    unsafe { dc_state_free(b) };
}

#[test]
fn noisy_capacity_and_bounds() {
    let s = state("bell.json");
    let mut id = ptr::null_mut();
    assert_eq!(unsafe { dc_channel_depolarizing(2, 0.0, &mut id) }, DcStatus::Ok);
    let mut full = ptr::null_mut();
    assert_eq!(unsafe { dc_channel_depolarizing(2, 1.0, &mut full) }, DcStatus::Ok);
    let opts = fast();
    let mut v = 0.0;
    for (t, want) in [(id, 2.0), (full, 0.0)] {
        let mut r = ptr::null_mut();
        assert_eq!(unsafe { dc_noisy_capacity(t, s, 4, &opts, &mut r) }, DcStatus::Ok, "{}", last_error());
        unsafe { dc_capacity_value(r, &mut v) };
        assert!((v - want).abs() < 1e-4, "{v} vs {want}");
        unsafe { dc_capacity_free(r) };
    }

    let w = state("werner-p.json");
    let (mut bound, mut cert) = (0.0, false);
    assert_eq!(unsafe { dc_ree_bound(s, 2, w, &mut bound, &mut cert) }, DcStatus::Ok);
    assert!(cert);
    assert!((bound - 2.0).abs() < 1e-6);

    let p = state("zero-zero.json");
    let mut gap = f64::NAN;
    assert_eq!(unsafe { dc_additivity_gap(p, 2, s, 2, &opts, &mut gap) }, DcStatus::Ok);
    assert!(gap.abs() < 1e-3, "{gap}");

    unsafe {
        dc_channel_free(id);
        dc_channel_free(full);
        dc_state_free(s);
        dc_state_free(w);
        dc_state_free(p);
    }
}

#[test]
fn channel_files_load() {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { dc_channel_from_file(fixture("constant.json").as_ptr(), &mut t) }, DcStatus::Ok);
    let s = state("bell.json");
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { dc_noisy_capacity(t, s, 2, &fast(), &mut r) }, DcStatus::Ok);
    let mut v = 1.0;
    unsafe { dc_capacity_value(r, &mut v) };
    assert!(v.abs() < 1e-6);
    unsafe {
        dc_capacity_free(r);
        dc_state_free(s);
        dc_channel_free(t);
    }
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        dc_state_free(ptr::null_mut());
        dc_channel_free(ptr::null_mut());
        dc_capacity_free(ptr::null_mut());
        dc_string_free(ptr::null_mut());
    }
}
