//! C interface. Every function returns an [`NttsStatus`]; on failure the
//! message is available from [`ntts_last_error`] on the same thread until
//! the next call. Handles are opaque and must be released with their
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use neurotts::pipeline::Pipeline;
use neurotts::vocoder::{self, AudioBuffer};
use neurotts::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NttsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Bad argument or input data (including non-UTF-8 strings).
    InvalidInput = 2,
    /// Model files missing, mismatched or corrupt.
    Model = 3,
    /// File could not be read or written.
    Io = 4,
    /// Internal panic caught at the boundary.
    Panic = 5,
}

/// Opaque loaded pipeline.
pub struct NttsPipeline {
    inner: Pipeline,
}

/// Opaque synthesized audio.
pub struct NttsAudio {
    inner: AudioBuffer,
}

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

fn status_of(e: &Error) -> NttsStatus {
    if e.is_model_error() {
        return NttsStatus::Model;
    }
    let mut cur = e;
    while let Error::Stage { source, .. } = cur {
        cur = source;
    }
    match cur {
        Error::Io { .. } => NttsStatus::Io,
        _ => NttsStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (NttsStatus, String)>) -> NttsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NttsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal error: {msg}"));
            NttsStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (NttsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (NttsStatus, String) {
    (NttsStatus::NullArgument, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (NttsStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NttsStatus::InvalidInput, format!("{name} is not UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ntts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call on this thread.
#[no_mangle]
pub extern "C" fn ntts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Converts 10 LPC coefficients `a[0..10]` (A(z) = 1 + Σ a_k z^-k) to 10
/// line spectral frequencies in radians, written to `lsf_out[0..10]`.
///
/// # Safety
/// `a` and `lsf_out` must point to 10 readable/writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ntts_lpc_to_lsf(a: *const f64, lsf_out: *mut f64) -> NttsStatus {
    guard(|| {
        if a.is_null() {
            return Err(null("a"));
        }
        if lsf_out.is_null() {
            return Err(null("lsf_out"));
        }
        let mut coeffs = [0.0; vocoder::ORDER];
        coeffs.copy_from_slice(std::slice::from_raw_parts(a, vocoder::ORDER));
        let lsf = vocoder::lpc_to_lsf(&coeffs).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(lsf_out, vocoder::ORDER).copy_from_slice(&lsf);
        Ok(())
    })
}

/// Inverse of [`ntts_lpc_to_lsf`].
///
/// # Safety
/// `lsf` and `a_out` must point to 10 readable/writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ntts_lsf_to_lpc(lsf: *const f64, a_out: *mut f64) -> NttsStatus {
    guard(|| {
        if lsf.is_null() {
            return Err(null("lsf"));
        }
        if a_out.is_null() {
            return Err(null("a_out"));
        }
        let a = vocoder::lsf_to_lpc(std::slice::from_raw_parts(lsf, vocoder::ORDER)).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(a_out, vocoder::ORDER).copy_from_slice(&a);
        Ok(())
    })
}

/// Loads a pipeline from a config file.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ntts_pipeline_load(config_path: *const c_char, out: *mut *mut NttsPipeline) -> NttsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = str_arg(config_path, "config_path")?;
        let p = Pipeline::load_file(Path::new(path)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NttsPipeline { inner: p }));
        Ok(())
    })
}

/// Releases a pipeline. Null is ignored.
///
/// # Safety
/// `p` must come from [`ntts_pipeline_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ntts_pipeline_free(p: *mut NttsPipeline) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Synthesizes UTF-8 text.
///
/// # Safety
/// `p` must be a live pipeline, `text` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ntts_say(p: *const NttsPipeline, text: *const c_char, out: *mut *mut NttsAudio) -> NttsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = p.as_ref().ok_or_else(|| null("pipeline"))?;
        let text = str_arg(text, "text")?;
        let (audio, _) = p.inner.say(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NttsAudio { inner: audio }));
        Ok(())
    })
}

/// Borrows the samples (range −1..1) of an audio handle. The pointer is
/// valid while the handle lives.
///
/// # Safety
/// `audio` must be live; `samples` and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn ntts_audio_samples(
    audio: *const NttsAudio,
    samples: *mut *const f64,
    len: *mut usize,
) -> NttsStatus {
    guard(|| {
        let a = audio.as_ref().ok_or_else(|| null("audio"))?;
        if samples.is_null() {
            return Err(null("samples"));
        }
        if len.is_null() {
            return Err(null("len"));
        }
        *samples = a.inner.samples.as_ptr();
        *len = a.inner.samples.len();
        Ok(())
    })
}

/// Sample rate in Hz, or 0 for a null handle.
///
/// # Safety
/// `audio` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn ntts_audio_sample_rate(audio: *const NttsAudio) -> u32 {
    audio.as_ref().map_or(0, |a| a.inner.sample_rate)
}

/// Writes 16-bit PCM mono WAV.
///
/// # Safety
/// `audio` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ntts_audio_write_wav(audio: *const NttsAudio, path: *const c_char) -> NttsStatus {
    guard(|| {
        let a = audio.as_ref().ok_or_else(|| null("audio"))?;
        let path = str_arg(path, "path")?;
        vocoder::write_wav(&a.inner, Path::new(path)).map_err(lib_err)
    })
}

/// Releases audio. Null is ignored.
///
/// # Safety
/// `audio` must come from [`ntts_say`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ntts_audio_free(audio: *mut NttsAudio) {
    if !audio.is_null() {
        drop(Box::from_raw(audio));
    }
}
