//! C interface to the Kannada OCR engine.
//!
//! Every function returns a [`KocrStatus`]. On failure a description is
//! available from [`kocr_last_error`] on the same thread. Strings handed
//! out by the library are released with [`kocr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use kannada_ocr::eval::{accuracy, eval_page};
use kannada_ocr::pipeline::{Engine, PipelineConfig, PipelineError};
use kannada_ocr::preprocess::GrayImage;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KocrStatus {
    Ok = 0,
    NullArgument = 1,
    /// Bad configuration or missing/corrupt model files.
    Config = 2,
    /// Unreadable image, zone file or text.
    Input = 3,
    /// Recognition failed part-way.
    Processing = 4,
    InvalidUtf8 = 5,
    /// Evaluation against an empty ground truth.
    ZeroGroundTruth = 6,
    Panic = 7,
}

/// A loaded recognition engine. Safe to share between threads for
/// concurrent recognition calls.
pub struct KocrEngine {
    inner: Engine,
}

/// Unicode-level and word-level edit counts for one page.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KocrEvalCounts {
    pub n: u64,
    pub m: u64,
    pub s: u64,
    pub i: u64,
    pub d: u64,
    pub n_w: u64,
    pub m_w: u64,
    pub s_w: u64,
    pub i_w: u64,
    pub d_w: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl ToString) {
    let c = CString::new(msg.to_string().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: KocrStatus, msg: impl ToString) -> KocrStatus {
    set_error(msg);
    status
}

fn pipeline_status(e: &PipelineError) -> KocrStatus {
    match e.exit_code() {
        2 => KocrStatus::Config,
        3 => KocrStatus::Input,
        _ => KocrStatus::Processing,
    }
}

fn guard(f: impl FnOnce() -> KocrStatus) -> KocrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(KocrStatus::Panic, "internal panic"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, KocrStatus> {
    if p.is_null() {
        return Err(fail(KocrStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(KocrStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn hand_out(text: String, out: *mut *mut c_char) -> KocrStatus {
    match CString::new(text) {
        Ok(c) => {
            *out = c.into_raw();
            KocrStatus::Ok
        }
        Err(_) => fail(KocrStatus::Processing, "output contains a nul byte"),
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next library call on this thread.
#[no_mangle]
pub extern "C" fn kocr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kocr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load an engine from a TOML configuration file.
///
/// # Safety
/// `config_path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kocr_engine_new(config_path: *const c_char, out: *mut *mut KocrEngine) -> KocrStatus {
    guard(|| {
        if out.is_null() {
            return fail(KocrStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let path = match str_arg(config_path, "config_path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match PipelineConfig::load(Path::new(path)).and_then(Engine::from_config) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(KocrEngine { inner }));
                KocrStatus::Ok
            }
            Err(e) => fail(pipeline_status(&e), e),
        }
    })
}

/// Destroy an engine. Null is ignored.
///
/// # Safety
/// `engine` must come from [`kocr_engine_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kocr_engine_free(engine: *mut KocrEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Recognise a binary PGM file. `zones_path` may be null for the whole
/// page. On success `*out_text` receives UTF-8 text to be released with
/// [`kocr_string_free`].
///
/// # Safety
/// Pointers must be valid; strings nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn kocr_recognize_pgm(
    engine: *const KocrEngine,
    image_path: *const c_char,
    zones_path: *const c_char,
    out_text: *mut *mut c_char,
) -> KocrStatus {
    guard(|| {
        if engine.is_null() || out_text.is_null() {
            return fail(KocrStatus::NullArgument, "engine or out_text is null");
        }
        *out_text = ptr::null_mut();
        let image = match str_arg(image_path, "image_path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let zones = if zones_path.is_null() {
            None
        } else {
            match str_arg(zones_path, "zones_path") {
                Ok(p) => Some(Path::new(p)),
                Err(s) => return s,
            }
        };
        match (*engine).inner.recognize_file(Path::new(image), zones) {
            Ok(page) => hand_out(page.text, out_text),
            Err(e) => fail(pipeline_status(&e), e),
        }
    })
}

/// Recognise an 8-bit grayscale image, row-major, `width * height` bytes,
/// 0 black.
///
/// # Safety
/// `pixels` must point to `width * height` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn kocr_recognize_gray(
    engine: *const KocrEngine,
    pixels: *const u8,
    width: usize,
    height: usize,
    out_text: *mut *mut c_char,
) -> KocrStatus {
    guard(|| {
        if engine.is_null() || pixels.is_null() || out_text.is_null() {
            return fail(KocrStatus::NullArgument, "engine, pixels or out_text is null");
        }
        *out_text = ptr::null_mut();
        let Some(len) = width.checked_mul(height) else {
            return fail(KocrStatus::Input, "image size overflows");
        };
        let data = std::slice::from_raw_parts(pixels, len).to_vec();
        let gray = match GrayImage::new(width, height, data) {
            Ok(g) => g,
            Err(e) => return fail(KocrStatus::Input, e),
        };
        match (*engine).inner.recognize(&gray, None) {
            Ok(page) => hand_out(page.text, out_text),
            Err(e) => fail(pipeline_status(&e), e),
        }
    })
}

/// `(n - s - i - d) / n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kocr_accuracy(n: u64, s: u64, i: u64, d: u64, out: *mut f64) -> KocrStatus {
    guard(|| {
        if out.is_null() {
            return fail(KocrStatus::NullArgument, "out is null");
        }
        match accuracy(n as usize, s as usize, i as usize, d as usize) {
            Ok(a) => {
                *out = a;
                KocrStatus::Ok
            }
            Err(e) => fail(KocrStatus::ZeroGroundTruth, e),
        }
    })
}

/// Align recognised text with ground truth at Unicode and word level.
///
/// # Safety
/// Strings must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kocr_eval_page(ocr_text: *const c_char, truth_text: *const c_char, out: *mut KocrEvalCounts) -> KocrStatus {
    guard(|| {
        if out.is_null() {
            return fail(KocrStatus::NullArgument, "out is null");
        }
        let (ocr, truth) = match (str_arg(ocr_text, "ocr_text"), str_arg(truth_text, "truth_text")) {
            (Ok(o), Ok(t)) => (o, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match eval_page(ocr, truth) {
            Ok(c) => {
                *out = KocrEvalCounts {
                    n: c.n as u64,
                    m: c.m as u64,
                    s: c.s as u64,
                    i: c.i as u64,
                    d: c.d as u64,
                    n_w: c.n_w as u64,
                    m_w: c.m_w as u64,
                    s_w: c.s_w as u64,
                    i_w: c.i_w as u64,
                    d_w: c.d_w as u64,
                };
                KocrStatus::Ok
            }
            Err(e) => fail(KocrStatus::ZeroGroundTruth, e),
        }
    })
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn kocr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
