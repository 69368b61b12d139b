//! C ABI for `pwfiber`.
//!
//! Every fallible call returns a [`PwfStatus`]; on failure the message is
//! kept per thread and can be copied out with [`pwf_last_error`]. Objects
//! cross the boundary as opaque handles that the caller releases with the
//! matching `*_free` function. Panics never unwind into C: they are caught
//! and reported as [`PwfStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pwfiber::constellation::Alphabet;
use pwfiber::detectors::{self, PwDetector};
use pwfiber::harness::{self, DetectorKind, RunConfig};
use pwfiber::{metrics, Complex64, Error};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Input = 4,
    Estimation = 5,
    Numerical = 6,
    Io = 7,
    Internal = 8,
    Panic = 9,
    BufferTooSmall = 10,
}

/// Detector family of a [`PwfOutcome`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwfDetectorKind {
    Pw = 0,
    Med = 1,
}

/// Error counts and Q-factor of one detector at one simulation point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwfOutcome {
    pub detector: PwfDetectorKind,
    pub n_symbols: u64,
    pub n_symbol_errors: u64,
    pub n_bits: u64,
    pub n_bit_errors: u64,
    pub ser: f64,
    pub ber: f64,
    pub q_db: f64,
    /// Window radius relative to the rms radius of the received cloud;
    /// NaN for minimum-distance detection.
    pub relative_radius: f64,
}

/// Trained Parzen-window detector.
pub struct PwfDetector {
    inner: PwDetector,
}

/// Run configuration.
pub struct PwfConfig {
    inner: RunConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PwfStatus, msg: impl AsRef<str>) -> PwfStatus {
    set_last_error(msg.as_ref());
    status
}

fn status_of(err: &Error) -> PwfStatus {
    match err {
        Error::Config(_) | Error::Parse(_) => PwfStatus::Config,
        Error::Input(_) => PwfStatus::Input,
        Error::Estimation(_) => PwfStatus::Estimation,
        Error::NumericalBlowup { .. } => PwfStatus::Numerical,
        Error::Io(_) | Error::Json(_) => PwfStatus::Io,
        Error::Internal(_) => PwfStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), PwfStatus>) -> PwfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PwfStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(PwfStatus::Panic, "panic inside pwfiber"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, PwfStatus>;
}

impl<T> OrStatus<T> for pwfiber::Result<T> {
    fn or_status(self) -> Result<T, PwfStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), PwfStatus> {
    if p.is_null() {
        Err(fail(PwfStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `re` and `im` must each point to `n` readable values, or be null when `n == 0`.
unsafe fn read_points(re: *const f64, im: *const f64, n: usize) -> Result<Vec<Complex64>, PwfStatus> {
    if n == 0 {
        return Ok(Vec::new());
    }
    non_null(re, "re")?;
    non_null(im, "im")?;
    let re = std::slice::from_raw_parts(re, n);
    let im = std::slice::from_raw_parts(im, n);
    Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
}

/// # Safety
/// `labels` must point to `n` readable values, or be null when `n == 0`.
unsafe fn read_labels(labels: *const u32, n: usize) -> Result<Vec<usize>, PwfStatus> {
    if n == 0 {
        return Ok(Vec::new());
    }
    non_null(labels, "labels")?;
    Ok(std::slice::from_raw_parts(labels, n).iter().map(|&l| l as usize).collect())
}

fn alphabet(qam_order: u32) -> Result<Alphabet, PwfStatus> {
    Alphabet::qam(qam_order as usize).or_status()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length
/// including the terminator, or 0 if there is no message.
///
/// # Safety
/// `buf` must be writable for `len` bytes, or null when `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn pwf_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pwf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Q-factor in dB from a bit error rate in `[0, 0.5]`.
///
/// # Safety
/// `out` must be a valid pointer to one `double`.
#[no_mangle]
pub unsafe extern "C" fn pwf_q_from_ber(ber: f64, out: *mut f64) -> PwfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = metrics::q_from_ber(ber).or_status()?;
        Ok(())
    })
}

/// Trains a Parzen-window detector on `n` labeled received samples of a
/// square QAM alphabet, choosing the window radius on a held-out split.
///
/// # Safety
/// `re`, `im` and `labels` must each point to `n` readable values; `out`
/// must be a valid pointer to one handle slot.
#[no_mangle]
pub unsafe extern "C" fn pwf_detector_train(
    qam_order: u32,
    re: *const f64,
    im: *const f64,
    labels: *const u32,
    n: usize,
    out: *mut *mut PwfDetector,
) -> PwfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let a = alphabet(qam_order)?;
        let points = read_points(re, im, n)?;
        let labels = read_labels(labels, n)?;
        let (inner, _) = detectors::train(&points, &labels, &a).or_status()?;
        *out = Box::into_raw(Box::new(PwfDetector { inner }));
        Ok(())
    })
}

/// Builds a Parzen-window detector with a caller-chosen window radius.
///
/// # Safety
/// Same as [`pwf_detector_train`].
#[no_mangle]
pub unsafe extern "C" fn pwf_detector_new(
    n_classes: u32,
    re: *const f64,
    im: *const f64,
    labels: *const u32,
    n: usize,
    radius: f64,
    out: *mut *mut PwfDetector,
) -> PwfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let points = read_points(re, im, n)?;
        let labels = read_labels(labels, n)?;
        let inner = PwDetector::new(points, labels, n_classes as usize, radius).or_status()?;
        *out = Box::into_raw(Box::new(PwfDetector { inner }));
        Ok(())
    })
}

/// Window radius of a detector.
///
/// # Safety
/// `det` must be a live handle and `out` a valid pointer to one `double`.
#[no_mangle]
pub unsafe extern "C" fn pwf_detector_radius(det: *const PwfDetector, out: *mut f64) -> PwfStatus {
    guard(|| {
        non_null(det, "detector")?;
        non_null(out, "out")?;
        *out = (*det).inner.radius();
        Ok(())
    })
}

/// Classifies `n` samples, writing one label per sample into `out_labels`.
///
/// # Safety
/// `det` must be a live handle; `re` and `im` must each point to `n`
/// readable values and `out_labels` to `n` writable ones.
#[no_mangle]
pub unsafe extern "C" fn pwf_detector_classify(
    det: *const PwfDetector,
    re: *const f64,
    im: *const f64,
    n: usize,
    out_labels: *mut u32,
) -> PwfStatus {
    guard(|| {
        non_null(det, "detector")?;
        if n == 0 {
            return Ok(());
        }
        non_null(out_labels, "out_labels")?;
        let points = read_points(re, im, n)?;
        let labels = (*det).inner.classify_all(&points);
        let out = std::slice::from_raw_parts_mut(out_labels, n);
        for (o, l) in out.iter_mut().zip(labels) {
            *o = l as u32;
        }
        Ok(())
    })
}

/// Releases a detector. Null is ignored.
///
/// # Safety
/// `det` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pwf_detector_free(det: *mut PwfDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

/// Default run configuration.
///
/// # Safety
/// `out` must be a valid pointer to one handle slot.
#[no_mangle]
pub unsafe extern "C" fn pwf_config_default(out: *mut *mut PwfConfig) -> PwfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(PwfConfig { inner: RunConfig::default() }));
        Ok(())
    })
}

/// Parses a flat TOML run configuration; missing keys take defaults.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer to one
/// handle slot.
#[no_mangle]
pub unsafe extern "C" fn pwf_config_from_toml(text: *const c_char, out: *mut *mut PwfConfig) -> PwfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        non_null(text, "text")?;
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(PwfStatus::InvalidArgument, "config text is not UTF-8"))?;
        let inner = RunConfig::from_toml_str(text).or_status()?;
        *out = Box::into_raw(Box::new(PwfConfig { inner }));
        Ok(())
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pwf_config_free(cfg: *mut PwfConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Simulates one point (launch power, span count) end to end and writes
/// one outcome per configured detector, in configuration order.
/// `n_written` receives the number of outcomes; if it exceeds `capacity`
/// nothing is written to `out` and `BufferTooSmall` is returned.
///
/// # Safety
/// `cfg` must be a live handle, `out` writable for `capacity` outcomes and
/// `n_written` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pwf_run_point(
    cfg: *const PwfConfig,
    power_dbm: f64,
    n_spans: u32,
    seed: u64,
    out: *mut PwfOutcome,
    capacity: usize,
    n_written: *mut usize,
) -> PwfStatus {
    guard(|| {
        non_null(cfg, "config")?;
        non_null(n_written, "n_written")?;
        *n_written = 0;
        let cfg = &(*cfg).inner;
        if capacity < cfg.detectors.len() {
            *n_written = cfg.detectors.len();
            return Err(fail(PwfStatus::BufferTooSmall, "outcome buffer too small"));
        }
        if !cfg.detectors.is_empty() {
            non_null(out, "out")?;
        }
        let outcomes = harness::run_point(cfg, power_dbm, n_spans as usize, seed).or_status()?;
        let out = std::slice::from_raw_parts_mut(out, outcomes.len());
        for (slot, o) in out.iter_mut().zip(&outcomes) {
            *slot = PwfOutcome {
                detector: match o.detector {
                    DetectorKind::Pw => PwfDetectorKind::Pw,
                    DetectorKind::Med => PwfDetectorKind::Med,
                },
                n_symbols: o.report.n_symbols,
                n_symbol_errors: o.report.n_symbol_errors,
                n_bits: o.report.n_bits,
                n_bit_errors: o.report.n_bit_errors,
                ser: o.report.ser,
                ber: o.report.ber,
                q_db: o.report.q_factor_db,
                relative_radius: o.relative_radius.unwrap_or(f64::NAN),
            };
        }
        *n_written = outcomes.len();
        Ok(())
    })
}
