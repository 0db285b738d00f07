//! C interface to `texnoise`.
//!
//! Images cross the boundary as opaque [`TnRaster`] handles that the caller
//! releases with [`tn_raster_free`]. Every fallible call returns a
//! [`TnStatus`]; on failure a human-readable message is kept per thread and
//! can be fetched with [`tn_last_error_message`]. Panics never unwind into
//! C: they are caught and reported as [`TnStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use texnoise::filter::{adaptive_filter, distort, residual, FilterConfig};
use texnoise::io::{read_raster, write_raster};
use texnoise::noise::{identify_samples, NoiseFamily};
use texnoise::raster::{extract_roi, Raster, RoiSpec};
use texnoise::recon::{roundtrip, ReconFilter, ScanGeometry};
use texnoise::separability::{fisher_j, scatter};
use texnoise::texture::{extract, Method, TextureConfig};
use texnoise::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RoiOutOfBounds = 3,
    DimensionMismatch = 4,
    DegenerateNoise = 5,
    Io = 6,
    Format = 7,
    IncompleteInput = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Opaque image handle.
pub struct TnRaster {
    inner: Raster,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnNoiseFamily {
    Gaussian = 0,
    Rayleigh = 1,
    Erlang = 2,
}

/// Outcome of noise identification.
///
/// `param_a`/`param_b` are the fitted parameters of the winning family:
/// (mean, variance) for Gaussian, (offset, scale) for Rayleigh and
/// (rate, shape) for Erlang. `distances` holds the Matusita distance of each
/// family in Gaussian, Rayleigh, Erlang order.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TnNoiseEstimate {
    /// One of the `TnNoiseFamily` values.
    pub family: i32,
    pub mu: f64,
    pub sigma2: f64,
    pub param_a: f64,
    pub param_b: f64,
    pub distances: [f64; 3],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnReconFilter {
    Ramp = 0,
    SheppLogan = 1,
    Hamming = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnMethod {
    Gmrf = 0,
    Fd = 1,
    Cm = 2,
    Rlm = 3,
    Acf = 4,
    Gf = 5,
    Wp = 6,
}

impl From<TnMethod> for Method {
    fn from(m: TnMethod) -> Self {
        Method::ALL[m as usize]
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> TnStatus {
    match err {
        Error::RoiOutOfBounds { .. } => TnStatus::RoiOutOfBounds,
        Error::DimensionMismatch { .. } | Error::GridMismatch => TnStatus::DimensionMismatch,
        Error::InvalidParameter(_) => TnStatus::InvalidArgument,
        Error::DegenerateNoise => TnStatus::DegenerateNoise,
        Error::IncompleteInput(_) => TnStatus::IncompleteInput,
        Error::Format { .. } | Error::Parse(_) => TnStatus::Format,
        Error::Io { .. } => TnStatus::Io,
    }
}

/// Runs `f`, recording the error message and mapping it to a status.
fn guard(f: impl FnOnce() -> Result<(), (TnStatus, String)>) -> TnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            TnStatus::Panic
        }
    }
}

fn lib(err: Error) -> (TnStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (TnStatus, String) {
    (TnStatus::NullPointer, format!("{name} is NULL"))
}

unsafe fn raster_ref<'a>(p: *const TnRaster, name: &str) -> Result<&'a Raster, (TnStatus, String)> {
    p.as_ref().map(|r| &r.inner).ok_or_else(|| null(name))
}

unsafe fn path_arg(p: *const c_char) -> Result<String, (TnStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| (TnStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn emit(out: *mut *mut TnRaster, img: Raster) -> Result<(), (TnStatus, String)> {
    *out = Box::into_raw(Box::new(TnRaster { inner: img }));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on the calling thread, or NULL if no
/// call has failed yet. The pointer stays valid until the next failing call
/// on the same thread.
#[no_mangle]
pub extern "C" fn tn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a raster by copying `width * height` row-major samples.
///
/// # Safety
/// `data` must point to `width * height` readable doubles and `out` must be
/// a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn tn_raster_new(
    width: usize,
    height: usize,
    bit_depth: u8,
    data: *const f64,
    out: *mut *mut TnRaster,
) -> TnStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = width
            .checked_mul(height)
            .ok_or_else(|| (TnStatus::InvalidArgument, "raster size overflows".to_string()))?;
        let values = slice::from_raw_parts(data, len).to_vec();
        emit(out, Raster::new(width, height, bit_depth, values).map_err(lib)?)
    })
}

/// Reads a PGM (P2/P5) or float-grid file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn tn_raster_read(path: *const c_char, out: *mut *mut TnRaster) -> TnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = path_arg(path)?;
        emit(out, read_raster(p).map_err(lib)?)
    })
}

/// Writes a float grid for `.p2f`/`.txt` paths, binary PGM otherwise.
///
/// # Safety
/// `raster` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tn_raster_write(raster: *const TnRaster, path: *const c_char) -> TnStatus {
    guard(|| {
        let img = raster_ref(raster, "raster")?;
        write_raster(path_arg(path)?, img).map_err(lib)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `raster` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tn_raster_free(raster: *mut TnRaster) {
    if !raster.is_null() {
        drop(Box::from_raw(raster));
    }
}

/// Width in pixels; 0 for NULL.
///
/// # Safety
/// `raster` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tn_raster_width(raster: *const TnRaster) -> usize {
    raster.as_ref().map_or(0, |r| r.inner.width())
}

/// Height in pixels; 0 for NULL.
///
/// # Safety
/// `raster` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tn_raster_height(raster: *const TnRaster) -> usize {
    raster.as_ref().map_or(0, |r| r.inner.height())
}

/// Row-major samples, borrowed for the lifetime of the handle; NULL for NULL.
///
/// # Safety
/// `raster` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tn_raster_data(raster: *const TnRaster) -> *const f64 {
    raster.as_ref().map_or(ptr::null(), |r| r.inner.data().as_ptr())
}

/// Identifies the noise family inside the square background ROI at
/// `(x, y)` with side `side`, using a histogram of `bins` bins.
///
/// # Safety
/// `raster` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tn_noise_identify(
    raster: *const TnRaster,
    x: usize,
    y: usize,
    side: usize,
    bins: usize,
    out: *mut TnNoiseEstimate,
) -> TnStatus {
    guard(|| {
        let img = raster_ref(raster, "raster")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let roi = RoiSpec::background(x, y, side).map_err(lib)?;
        let patch = extract_roi(img, &roi).map_err(lib)?;
        let est = identify_samples(patch.data(), bins).map_err(lib)?;
        let (a, b) = est.best.params();
        *out = TnNoiseEstimate {
            family: match est.best.family() {
                NoiseFamily::Gaussian => TnNoiseFamily::Gaussian,
                NoiseFamily::Rayleigh => TnNoiseFamily::Rayleigh,
                NoiseFamily::Erlang => TnNoiseFamily::Erlang,
            } as i32,
            mu: est.mu,
            sigma2: est.sigma2,
            param_a: a,
            param_b: b,
            distances: est.distances,
        };
        Ok(())
    })
}

/// Adaptive local noise reduction with a `window x window` neighbourhood.
/// When `clamp_ratio` is nonzero the variance ratio is capped at 1.
///
/// # Safety
/// `raster` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn tn_filter(
    raster: *const TnRaster,
    noise_variance: f64,
    window: usize,
    clamp_ratio: i32,
    out: *mut *mut TnRaster,
) -> TnStatus {
    guard(|| {
        let img = raster_ref(raster, "raster")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = FilterConfig {
            window,
            noise_variance,
            clamp_ratio: clamp_ratio != 0,
        };
        emit(out, adaptive_filter(img, &cfg).map_err(lib)?)
    })
}

/// `original - clean`.
///
/// # Safety
/// Both inputs must be live handles and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn tn_residual(
    original: *const TnRaster,
    clean: *const TnRaster,
    out: *mut *mut TnRaster,
) -> TnStatus {
    guard(|| {
        let a = raster_ref(original, "original")?;
        let b = raster_ref(clean, "clean")?;
        if out.is_null() {
            return Err(null("out"));
        }
        emit(out, residual(a, b).map_err(lib)?)
    })
}

/// `original + residual`.
///
/// # Safety
/// Both inputs must be live handles and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn tn_distort(
    original: *const TnRaster,
    residual: *const TnRaster,
    out: *mut *mut TnRaster,
) -> TnStatus {
    guard(|| {
        let a = raster_ref(original, "original")?;
        let b = raster_ref(residual, "residual")?;
        if out.is_null() {
            return Err(null("out"));
        }
        emit(out, distort(a, b).map_err(lib)?)
    })
}

/// Parallel-beam projection over `n_angles` angles in [0, 180) followed by
/// filtered backprojection onto the input grid. The image must be square.
///
/// # Safety
/// `raster` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn tn_recon_roundtrip(
    raster: *const TnRaster,
    n_angles: usize,
    filter: TnReconFilter,
    out: *mut *mut TnRaster,
) -> TnStatus {
    guard(|| {
        let img = raster_ref(raster, "raster")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let geom = ScanGeometry::covering(img.width().max(img.height()), n_angles, 1.0);
        let filter = match filter {
            TnReconFilter::Ramp => ReconFilter::Ramp,
            TnReconFilter::SheppLogan => ReconFilter::SheppLogan,
            TnReconFilter::Hamming => ReconFilter::Hamming,
        };
        emit(out, roundtrip(img, &geom, filter).map_err(lib)?)
    })
}

/// Number of values produced by `method`.
#[no_mangle]
pub extern "C" fn tn_feature_count(method: TnMethod) -> usize {
    Method::from(method).feature_count()
}

/// Extracts the features of `method` from the square tumour ROI at
/// `(x, y)` with side `side`, using default texture settings.
///
/// `*out_len` always receives the feature count. If `capacity` is smaller,
/// nothing is written to `values` and `BufferTooSmall` is returned.
///
/// # Safety
/// `values` must hold `capacity` writable doubles; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_features(
    raster: *const TnRaster,
    x: usize,
    y: usize,
    side: usize,
    method: TnMethod,
    values: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> TnStatus {
    guard(|| {
        let img = raster_ref(raster, "raster")?;
        let out_len = out_len.as_mut().ok_or_else(|| null("out_len"))?;
        let method = Method::from(method);
        *out_len = method.feature_count();
        if capacity < *out_len {
            return Err((
                TnStatus::BufferTooSmall,
                format!("{method} needs {} values, buffer holds {capacity}", *out_len),
            ));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        let roi = RoiSpec::tumour(x, y, side).map_err(lib)?;
        let patch = extract_roi(img, &roi).map_err(lib)?;
        let fv = extract(method, &patch, &TextureConfig::default()).map_err(lib)?;
        slice::from_raw_parts_mut(values, fv.len()).copy_from_slice(&fv.values);
        Ok(())
    })
}

/// Copies the name of feature `index` of `method` into `buf` (NUL
/// terminated, truncated to `len - 1` bytes). Returns the full name length
/// excluding the terminator, or 0 for an out-of-range index.
///
/// # Safety
/// `buf` must be NULL or hold `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tn_feature_name(method: TnMethod, index: usize, buf: *mut c_char, len: usize) -> usize {
    let names = Method::from(method).feature_names();
    let Some(name) = names.get(index) else {
        return 0;
    };
    if !buf.is_null() && len > 0 {
        let n = name.len().min(len - 1);
        let dst = slice::from_raw_parts_mut(buf.cast::<u8>(), len);
        dst[..n].copy_from_slice(&name.as_bytes()[..n]);
        dst[n] = 0;
    }
    name.len()
}

/// Fisher separability of two classes of `dim`-dimensional row-major
/// samples, with `ridge` added to the within-class scatter diagonal.
/// `*capped` is set to 1 when the value hit the numerical cap.
///
/// # Safety
/// `class_a` must hold `n_a * dim` doubles, `class_b` `n_b * dim`; `j` and
/// `capped` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_fisher_j(
    class_a: *const f64,
    n_a: usize,
    class_b: *const f64,
    n_b: usize,
    dim: usize,
    ridge: f64,
    j: *mut f64,
    capped: *mut i32,
) -> TnStatus {
    guard(|| {
        if class_a.is_null() || class_b.is_null() {
            return Err(null("class data"));
        }
        let j = j.as_mut().ok_or_else(|| null("j"))?;
        let capped = capped.as_mut().ok_or_else(|| null("capped"))?;
        if dim == 0 {
            return Err((TnStatus::InvalidArgument, "dim must be positive".into()));
        }
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err((TnStatus::InvalidArgument, format!("ridge must be finite and >= 0, got {ridge}")));
        }
        let rows = |p: *const f64, n: usize| -> Vec<Vec<f64>> {
            slice::from_raw_parts(p, n * dim).chunks(dim).map(<[f64]>::to_vec).collect()
        };
        let pair = scatter(&rows(class_a, n_a), &rows(class_b, n_b)).map_err(lib)?;
        let f = fisher_j(&pair, ridge);
        *j = f.j;
        *capped = i32::from(f.capped);
        Ok(())
    })
}
