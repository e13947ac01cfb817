//! C ABI for grnn-sdr.
//!
//! Datasets and fit results cross the boundary as opaque handles that the
//! caller frees with the matching `*_free` function. Every fallible function
//! returns a [`GrnnStatus`]; on failure, [`grnn_last_error_message`] describes
//! the most recent error on the calling thread. Matrices are passed as
//! row-major `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use grnn_sdr::dimsearch::run_sdr;
use grnn_sdr::metrics::vector_correlation;
use grnn_sdr::simgen::{generate, ModelSpec};
use grnn_sdr::{Activation, DataSplit, Error, Matrix, PenaltyConfig, SdrOutcome, TrainConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrnnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    NumericalError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrnnActivation {
    Tanh = 0,
    Logistic = 1,
}

/// Training options; obtain defaults from [`grnn_train_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GrnnTrainConfig {
    pub m: usize,
    pub restarts: usize,
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub activation: GrnnActivation,
    pub standardize: bool,
    pub seed: u64,
}

/// Penalty options; when `use_override` is set, `override_value` replaces
/// the formula.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GrnnPenaltyConfig {
    pub scale: f64,
    pub use_override: bool,
    pub override_value: f64,
}

/// Predictors, responses and, for simulated data, the true basis.
pub struct GrnnDataset {
    x: Matrix,
    y: Vec<f64>,
    beta_true: Option<Matrix>,
}

/// Result of [`grnn_fit`].
pub struct GrnnOutcome {
    inner: SdrOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GrnnStatus {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch(_) => GrnnStatus::InvalidArgument,
        e if e.is_numerical() => GrnnStatus::NumericalError,
        _ => GrnnStatus::DataError,
    }
}

/// Runs `f`, recording errors and turning panics into [`GrnnStatus::Panic`].
fn guard<F>(f: F) -> GrnnStatus
where
    F: FnOnce() -> Result<(), (GrnnStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GrnnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside grnn-sdr".into());
            GrnnStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (GrnnStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (GrnnStatus, String) {
    (GrnnStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must be null or valid for reads of `len` doubles.
unsafe fn read_slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], (GrnnStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn checked_len(a: usize, b: usize) -> Result<usize, (GrnnStatus, String)> {
    a.checked_mul(b)
        .ok_or((GrnnStatus::InvalidArgument, "size overflow".into()))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn grnn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn grnn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn grnn_train_config_default() -> GrnnTrainConfig {
    let d = TrainConfig::default();
    GrnnTrainConfig {
        m: d.m,
        restarts: d.restarts,
        lambda: d.lambda,
        learning_rate: d.learning_rate,
        epochs: d.epochs,
        activation: GrnnActivation::Tanh,
        standardize: d.standardize,
        seed: d.seed,
    }
}

#[no_mangle]
pub extern "C" fn grnn_penalty_config_default() -> GrnnPenaltyConfig {
    GrnnPenaltyConfig {
        scale: PenaltyConfig::default().scale,
        use_override: false,
        override_value: 0.0,
    }
}

impl From<&GrnnTrainConfig> for TrainConfig {
    fn from(c: &GrnnTrainConfig) -> Self {
        TrainConfig {
            m: c.m,
            restarts: c.restarts,
            lambda: c.lambda,
            learning_rate: c.learning_rate,
            epochs: c.epochs,
            activation: match c.activation {
                GrnnActivation::Tanh => Activation::Tanh,
                GrnnActivation::Logistic => Activation::Logistic,
            },
            standardize: c.standardize,
            seed: c.seed,
        }
    }
}

impl From<&GrnnPenaltyConfig> for PenaltyConfig {
    fn from(c: &GrnnPenaltyConfig) -> Self {
        PenaltyConfig {
            scale: c.scale,
            override_value: c.use_override.then_some(c.override_value),
        }
    }
}

/// Copies `n×p` predictors (row-major) and `n` responses into a new dataset.
///
/// # Safety
/// `x` must be valid for `n*p` reads, `y` for `n` reads, and `out` for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn grnn_dataset_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    p: usize,
    out: *mut *mut GrnnDataset,
) -> GrnnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let xs = read_slice(x, checked_len(n, p)?, "x")?;
        let ys = read_slice(y, n, "y")?;
        let x = Matrix::new(n, p, xs.to_vec()).map_err(lib_err)?;
        if ys.iter().any(|v| !v.is_finite()) {
            return Err((GrnnStatus::DataError, "responses must be finite".into()));
        }
        *out = Box::into_raw(Box::new(GrnnDataset {
            x,
            y: ys.to_vec(),
            beta_true: None,
        }));
        Ok(())
    })
}

/// Generates data from synthetic model `model_id` (1..=7). A negative
/// `noise` selects the model's default noise level.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn grnn_dataset_simulate(
    model_id: u8,
    n: usize,
    p: usize,
    noise: f64,
    seed: u64,
    out: *mut *mut GrnnDataset,
) -> GrnnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut spec = ModelSpec::new(model_id, n, p, seed);
        if noise >= 0.0 {
            spec.noise = Some(noise);
        }
        let data = generate(&spec).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(GrnnDataset {
            x: data.x,
            y: data.y,
            beta_true: Some(data.beta_true),
        }));
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn grnn_dataset_free(ds: *mut GrnnDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn grnn_dataset_n(ds: *const GrnnDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.y.len())
}

/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn grnn_dataset_p(ds: *const GrnnDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.x.cols())
}

/// Columns of the true basis; 0 when the dataset has none.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn grnn_dataset_d_true(ds: *const GrnnDataset) -> usize {
    ds.as_ref()
        .and_then(|d| d.beta_true.as_ref())
        .map_or(0, |b| b.cols())
}

/// Copies the `p×d_true` true basis (row-major) into `buf`.
///
/// # Safety
/// `ds` must be a live dataset handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn grnn_dataset_beta_true(ds: *const GrnnDataset, buf: *mut f64, len: usize) -> GrnnStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let beta = ds
            .beta_true
            .as_ref()
            .ok_or((GrnnStatus::InvalidArgument, "dataset has no true basis".into()))?;
        copy_out(beta.as_slice(), buf, len)
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (GrnnStatus, String)> {
    if len < src.len() {
        return Err((
            GrnnStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Splits the dataset by a seeded shuffle (`train_cfg.seed`) with validation
/// fraction `val_frac`, then runs the dimension search. Null config pointers
/// select the defaults.
///
/// # Safety
/// `ds` must be a live dataset handle, the config pointers null or valid, and
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn grnn_fit(
    ds: *const GrnnDataset,
    val_frac: f64,
    train_cfg: *const GrnnTrainConfig,
    pen_cfg: *const GrnnPenaltyConfig,
    out: *mut *mut GrnnOutcome,
) -> GrnnStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let train = train_cfg.as_ref().map_or_else(TrainConfig::default, TrainConfig::from);
        let pen = pen_cfg.as_ref().map_or_else(PenaltyConfig::default, PenaltyConfig::from);
        let split = DataSplit::shuffled(&ds.x, &ds.y, val_frac, train.seed).map_err(lib_err)?;
        let inner = run_sdr(&split, &train, &pen).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(GrnnOutcome { inner }));
        Ok(())
    })
}

/// # Safety
/// `o` must be null or a handle from [`grnn_fit`] that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn grnn_outcome_free(o: *mut GrnnOutcome) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Estimated structural dimension, or 0 for a null handle.
///
/// # Safety
/// `o` must be null or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn grnn_outcome_d_hat(o: *const GrnnOutcome) -> usize {
    o.as_ref().map_or(0, |o| o.inner.d_hat)
}

/// # Safety
/// `o` must be null or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn grnn_outcome_p(o: *const GrnnOutcome) -> usize {
    o.as_ref().map_or(0, |o| o.inner.beta_hat.rows())
}

/// Penalty used by the search, or NaN for a null handle.
///
/// # Safety
/// `o` must be null or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn grnn_outcome_pen(o: *const GrnnOutcome) -> f64 {
    o.as_ref().map_or(f64::NAN, |o| o.inner.pen)
}

/// Number of distinct widths trained.
///
/// # Safety
/// `o` must be null or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn grnn_outcome_nnl_calls(o: *const GrnnOutcome) -> usize {
    o.as_ref().map_or(0, |o| o.inner.trace.nnl_invocations)
}

/// Copies the `p×d_hat` estimated basis (row-major) into `buf`.
///
/// # Safety
/// `o` must be a live outcome handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn grnn_outcome_beta_hat(o: *const GrnnOutcome, buf: *mut f64, len: usize) -> GrnnStatus {
    guard(|| {
        let o = o.as_ref().ok_or_else(|| null("outcome"))?;
        copy_out(o.inner.beta_hat.as_slice(), buf, len)
    })
}

/// Predicts `n` responses for the row-major `n×p` inputs `x`.
///
/// # Safety
/// `o` must be a live outcome handle, `x` valid for `n*p` reads and `y_out`
/// for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn grnn_outcome_predict(
    o: *const GrnnOutcome,
    x: *const f64,
    n: usize,
    y_out: *mut f64,
) -> GrnnStatus {
    guard(|| {
        let o = o.as_ref().ok_or_else(|| null("outcome"))?;
        let p = o.inner.beta_hat.rows();
        let xs = read_slice(x, checked_len(n, p)?, "x")?;
        let x = Matrix::new(n, p, xs.to_vec()).map_err(lib_err)?;
        let pred = o.inner.model.predict(&x).map_err(lib_err)?;
        copy_out(&pred, y_out, n)
    })
}

/// Result as JSON; free the string with [`grnn_string_free`]. Null on error.
///
/// # Safety
/// `o` must be null or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn grnn_outcome_to_json(o: *const GrnnOutcome) -> *mut c_char {
    let mut result = ptr::null_mut();
    guard(|| {
        let o = o.as_ref().ok_or_else(|| null("outcome"))?;
        let json = o.inner.to_json().map_err(lib_err)?;
        result = CString::new(json)
            .map_err(|e| (GrnnStatus::DataError, e.to_string()))?
            .into_raw();
        Ok(())
    });
    result
}

/// # Safety
/// `s` must be null or a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn grnn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Vector correlation between the spans of `beta_true` (`p×d`) and
/// `beta_hat` (`p×d_hat`), both row-major.
///
/// # Safety
/// Matrix pointers must be valid for the given sizes and `r_out` for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn grnn_vector_correlation(
    beta_true: *const f64,
    p: usize,
    d: usize,
    beta_hat: *const f64,
    d_hat: usize,
    r_out: *mut f64,
) -> GrnnStatus {
    guard(|| {
        if r_out.is_null() {
            return Err(null("r_out"));
        }
        let t = read_slice(beta_true, checked_len(p, d)?, "beta_true")?;
        let h = read_slice(beta_hat, checked_len(p, d_hat)?, "beta_hat")?;
        let t = Matrix::new(p, d, t.to_vec()).map_err(lib_err)?;
        let h = Matrix::new(p, d_hat, h.to_vec()).map_err(lib_err)?;
        *r_out = vector_correlation(&t, &h).map_err(lib_err)?;
        Ok(())
    })
}

/// Convenience for callers: the last error as an owned Rust string.
pub fn last_error() -> Option<String> {
    let p = grnn_last_error_message();
    if p.is_null() {
        None
    } else {
        // SAFETY: the pointer comes from the thread-local CString above.
        Some(unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
    }
}
