use std::ffi::{CStr, CString};
use std::ptr;

use neurotts_ffi::*;

fn last_error() -> String {
    let p = ntts_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(ntts_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn flat_polynomial_gives_uniform_lsfs() {
    let a = [0.0f64; 10];
    let mut lsf = [0.0f64; 10];
    assert_eq!(unsafe { ntts_lpc_to_lsf(a.as_ptr(), lsf.as_mut_ptr()) }, NttsStatus::Ok);
    for (k, w) in lsf.iter().enumerate() {
        assert!((w - (k + 1) as f64 * std::f64::consts::PI / 11.0).abs() < 1e-9);
    }
    let mut back = [1.0f64; 10];
    assert_eq!(unsafe { ntts_lsf_to_lpc(lsf.as_ptr(), back.as_mut_ptr()) }, NttsStatus::Ok);
    assert!(back.iter().all(|c| c.abs() < 1e-9));
    assert!(ntts_last_error().is_null());
}

#[test]
fn null_and_invalid_arguments_report_errors() {
    let mut lsf = [0.0f64; 10];
    assert_eq!(unsafe { ntts_lpc_to_lsf(ptr::null(), lsf.as_mut_ptr()) }, NttsStatus::NullArgument);
    assert!(last_error().contains("a is null"));
    let unordered = [0.5, 0.4, 0.9, 1.0, 1.2, 1.5, 2.0, 2.2, 2.5, 3.0];
    let mut a = [0.0f64; 10];
    assert_eq!(unsafe { ntts_lsf_to_lpc(unordered.as_ptr(), a.as_mut_ptr()) }, NttsStatus::InvalidInput);
    assert!(!last_error().is_empty());
}

#[test]
fn missing_config_is_an_io_error() {
    let path = CString::new("/nonexistent/neurotts.conf").unwrap();
    let mut p: *mut NttsPipeline = ptr::null_mut();
    assert_eq!(unsafe { ntts_pipeline_load(path.as_ptr(), &mut p) }, NttsStatus::Io);
    assert!(p.is_null());
    assert!(last_error().contains("nonexistent"));
    let mut audio: *mut NttsAudio = ptr::null_mut();
    let text = CString::new("hello").unwrap();
    assert_eq!(unsafe { ntts_say(ptr::null(), text.as_ptr(), &mut audio) }, NttsStatus::NullArgument);
    unsafe {
        ntts_pipeline_free(ptr::null_mut());
        ntts_audio_free(ptr::null_mut());
    }
    assert_eq!(unsafe { ntts_audio_sample_rate(ptr::null()) }, 0);
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/neurotts.h");
    for f in [
        "ntts_version",
        "ntts_last_error",
        "ntts_lpc_to_lsf",
        "ntts_lsf_to_lpc",
        "ntts_pipeline_load",
        "ntts_pipeline_free",
        "ntts_say",
        "ntts_audio_samples",
        "ntts_audio_sample_rate",
        "ntts_audio_write_wav",
        "ntts_audio_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct NttsPipeline NttsPipeline;"));
}
