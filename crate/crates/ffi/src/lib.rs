//! C ABI over the `ips_bench` library.
//!
//! Conventions: every fallible function returns an [`IpsStatus`] and writes
//! results through out-pointers. On failure, [`ips_last_error`] returns a
//! description that stays valid until the next failing call on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function; strings returned by the library are released with
//! [`ips_string_free`]. Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use ips_bench::aggregate::{aggregate_scenarios, aggregate_trials, normalize_to_baseline, Transform, WeightedScore};
use ips_bench::akm::{akm_stage1, compression_ratio};
use ips_bench::dataset::{generate_synthetic, load_dataset, Dataset, Fingerprint, SyntheticConfig};
use ips_bench::distance::{DistanceKind, DistanceSpec};
use ips_bench::gmms::{color_score, render_gmms, shape_aspect, GmmsGrid};
use ips_bench::positioning::{evaluate, knn_estimate, KnnConfig, MethodConfig};
use ips_bench::representation::{RepresentationKind, RepresentationParams};
use ips_bench::Error;

/// Result codes. `IPS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpsStatus {
    IpsOk = 0,
    IpsErrNullPointer = 1,
    IpsErrInvalidArgument = 2,
    IpsErrIo = 3,
    IpsErrParse = 4,
    IpsErrDimension = 5,
    IpsErrRange = 6,
    IpsErrUnsupported = 7,
    IpsErrNormalization = 8,
    IpsErrBufferTooSmall = 9,
    IpsErrPanic = 10,
}

/// Opaque dataset handle.
pub struct IpsDataset {
    inner: Dataset,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IpsPosition {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub floor: i32,
    /// Non-zero when `floor` is meaningful.
    pub has_floor: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IpsTrialSummary {
    pub mean_error: f64,
    pub median_error: f64,
    pub p75_error: f64,
    pub elapsed_seconds: f64,
    /// Negative when the dataset has no floor labels.
    pub floor_hit_rate: f64,
    /// 1.0 for uncompressed methods.
    pub cr: f64,
}

/// Transform codes for [`ips_weighted_combine`].
pub const IPS_TRANSFORM_IDENTITY: i32 = 0;
pub const IPS_TRANSFORM_SQUARE: i32 = 1;
pub const IPS_TRANSFORM_ONE_MINUS: i32 = 2;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IpsStatus {
    match e {
        Error::Io { .. } => IpsStatus::IpsErrIo,
        Error::Parse { .. } => IpsStatus::IpsErrParse,
        Error::DimensionMismatch { .. } => IpsStatus::IpsErrDimension,
        Error::RssOutOfRange { .. } => IpsStatus::IpsErrRange,
        Error::Unsupported(_) => IpsStatus::IpsErrUnsupported,
        Error::Normalization { .. } | Error::NonPositive(_) => IpsStatus::IpsErrNormalization,
        Error::Evaluation { source, .. } => status_of(source),
        _ => IpsStatus::IpsErrInvalidArgument,
    }
}

struct Fail(IpsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(IpsStatus::IpsErrNullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(IpsStatus::IpsErrInvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IpsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IpsStatus::IpsOk,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            IpsStatus::IpsErrPanic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{what}` is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn dataset_ref<'a>(ds: *const IpsDataset) -> Result<&'a Dataset, Fail> {
    ds.as_ref().map(|d| &d.inner).ok_or_else(|| null("dataset"))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("output contains a nul byte"))
}

/// Message of the last failure on this thread, or null. Owned by the
/// library.
#[no_mangle]
pub extern "C" fn ips_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ips_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ips_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a train/test CSV pair.
#[no_mangle]
pub unsafe extern "C" fn ips_dataset_load(
    train_path: *const c_char,
    test_path: *const c_char,
    out: *mut *mut IpsDataset,
) -> IpsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let train = str_arg(train_path, "train_path")?;
        let test = str_arg(test_path, "test_path")?;
        let ds = load_dataset(Path::new(train), Path::new(test))?;
        *out = Box::into_raw(Box::new(IpsDataset { inner: ds }));
        Ok(())
    })
}

/// Generates a synthetic dataset. `config_json` may be null for defaults;
/// otherwise it is a JSON object with any synthetic config fields.
#[no_mangle]
pub unsafe extern "C" fn ips_dataset_generate(config_json: *const c_char, out: *mut *mut IpsDataset) -> IpsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg: SyntheticConfig = if config_json.is_null() {
            SyntheticConfig::default()
        } else {
            let text = str_arg(config_json, "config_json")?;
            serde_json::from_str(text).map_err(|e| Fail(IpsStatus::IpsErrParse, e.to_string()))?
        };
        let ds = generate_synthetic(&cfg)?;
        *out = Box::into_raw(Box::new(IpsDataset { inner: ds }));
        Ok(())
    })
}

/// Releases a dataset handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ips_dataset_free(ds: *mut IpsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Number of APs, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ips_dataset_ap_count(ds: *const IpsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.ap_count)
}

#[no_mangle]
pub unsafe extern "C" fn ips_dataset_train_len(ds: *const IpsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.train.len())
}

#[no_mangle]
pub unsafe extern "C" fn ips_dataset_test_len(ds: *const IpsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.test.len())
}

/// Copies test sample `index`'s RSS vector into `rss_out` (capacity `cap`)
/// and its true position into `pos_out` (either may be null).
#[no_mangle]
pub unsafe extern "C" fn ips_dataset_test_sample(
    ds: *const IpsDataset,
    index: usize,
    rss_out: *mut f64,
    cap: usize,
    pos_out: *mut IpsPosition,
) -> IpsStatus {
    guard(|| {
        let ds = dataset_ref(ds)?;
        let s = ds
            .test
            .get(index)
            .ok_or_else(|| invalid(format!("test index {index} out of range ({})", ds.test.len())))?;
        if !rss_out.is_null() {
            let v = s.fingerprint.values();
            if cap < v.len() {
                return Err(Fail(
                    IpsStatus::IpsErrBufferTooSmall,
                    format!("need {} slots, got {cap}", v.len()),
                ));
            }
            slice::from_raw_parts_mut(rss_out, v.len()).copy_from_slice(v);
        }
        if let Some(p) = pos_out.as_mut() {
            *p = position_to_c(&s.position);
        }
        Ok(())
    })
}

fn position_to_c(p: &ips_bench::Position) -> IpsPosition {
    IpsPosition {
        x: p.x,
        y: p.y,
        z: p.z,
        floor: p.floor.unwrap_or(0),
        has_floor: i32::from(p.floor.is_some()),
    }
}

/// k-NN estimate of one fingerprint against the dataset's radio map.
/// `distance` and `representation` are names such as `"sorensen"` and
/// `"positive"`; null selects `cityblock` / `positive`.
#[no_mangle]
pub unsafe extern "C" fn ips_knn_estimate(
    ds: *const IpsDataset,
    rss: *const f64,
    len: usize,
    k: usize,
    distance: *const c_char,
    representation: *const c_char,
    out: *mut IpsPosition,
) -> IpsStatus {
    guard(|| {
        let ds = dataset_ref(ds)?;
        let out = out_ref(out, "out")?;
        let rss = slice_arg(rss, len, "rss")?;
        let mut cfg = KnnConfig {
            k,
            ..KnnConfig::default()
        };
        if !distance.is_null() {
            cfg.distance = DistanceSpec::new(str_arg(distance, "distance")?.parse::<DistanceKind>()?);
        }
        if !representation.is_null() {
            cfg.representation =
                RepresentationParams::new(str_arg(representation, "representation")?.parse::<RepresentationKind>()?);
        }
        let q = Fingerprint::new(rss.to_vec())?;
        *out = position_to_c(&knn_estimate(&q, ds, &cfg)?);
        Ok(())
    })
}

/// Evaluates a method given as JSON (same schema as an experiment config
/// entry) over the dataset's test set.
#[no_mangle]
pub unsafe extern "C" fn ips_evaluate(
    ds: *const IpsDataset,
    method_json: *const c_char,
    trial_index: u32,
    out: *mut IpsTrialSummary,
) -> IpsStatus {
    guard(|| {
        let ds = dataset_ref(ds)?;
        let out = out_ref(out, "out")?;
        let text = str_arg(method_json, "method_json")?;
        let method: MethodConfig =
            serde_json::from_str(text).map_err(|e| Fail(IpsStatus::IpsErrParse, e.to_string()))?;
        let r = evaluate(ds, &method, trial_index)?;
        let stats = ips_bench::error_stats(&r.errors_3d, r.floor_hits.as_deref())?;
        *out = IpsTrialSummary {
            mean_error: stats.mean,
            median_error: stats.median,
            p75_error: stats.p75,
            elapsed_seconds: r.elapsed_seconds,
            floor_hit_rate: stats.floor_hit_rate.unwrap_or(-1.0),
            cr: r.compression.map_or(1.0, |c| c.cr),
        };
        Ok(())
    })
}

/// Mean of `n` trial values.
#[no_mangle]
pub unsafe extern "C" fn ips_aggregate_trials(values: *const f64, n: usize, out: *mut f64) -> IpsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = aggregate_trials(slice_arg(values, n, "values")?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ips_normalize_to_baseline(method_mean: f64, baseline_mean: f64, out: *mut f64) -> IpsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = normalize_to_baseline(method_mean, baseline_mean)?;
        Ok(())
    })
}

/// Mean and sample standard deviation of per-scenario normalized values.
#[no_mangle]
pub unsafe extern "C" fn ips_aggregate_scenarios(
    values: *const f64,
    n: usize,
    mean_out: *mut f64,
    std_out: *mut f64,
) -> IpsStatus {
    guard(|| {
        let mean_out = out_ref(mean_out, "mean_out")?;
        let std_out = out_ref(std_out, "std_out")?;
        let (m, s) = aggregate_scenarios(slice_arg(values, n, "values")?)?;
        *mean_out = m;
        *std_out = s;
        Ok(())
    })
}

/// `Σ weights[i] · t_i(values[i])` with `transforms[i]` one of the
/// `IPS_TRANSFORM_*` codes (null means identity for all).
#[no_mangle]
pub unsafe extern "C" fn ips_weighted_combine(
    values: *const f64,
    weights: *const f64,
    transforms: *const i32,
    n: usize,
    out: *mut f64,
) -> IpsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let values = slice_arg(values, n, "values")?;
        let weights = slice_arg(weights, n, "weights")?;
        let codes: Vec<i32> = if transforms.is_null() {
            vec![IPS_TRANSFORM_IDENTITY; n]
        } else {
            slice::from_raw_parts(transforms, n).to_vec()
        };
        let mut score = WeightedScore::new();
        let mut aggs = std::collections::BTreeMap::new();
        for i in 0..n {
            let t = match codes[i] {
                IPS_TRANSFORM_IDENTITY => Transform::Identity,
                IPS_TRANSFORM_SQUARE => Transform::Square,
                IPS_TRANSFORM_ONE_MINUS => Transform::OneMinus,
                c => return Err(invalid(format!("unknown transform code {c}"))),
            };
            let key = format!("m{i:06}");
            score = score.with(&key, weights[i], t);
            aggs.insert(key, values[i]);
        }
        *out = ips_bench::weighted_combine(&aggs, &score)?;
        Ok(())
    })
}

/// `original_bits / ceil(log2 k)`.
#[no_mangle]
pub unsafe extern "C" fn ips_akm_compression_ratio(k: usize, original_bits: u32, out: *mut f64) -> IpsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if k < 2 || original_bits == 0 {
            return Err(invalid("k must be >= 2 and original_bits positive"));
        }
        *out = compression_ratio(k, original_bits);
        Ok(())
    })
}

/// Optimal 1-D clustering of `values` into at most `k` centroids, written
/// ascending to `centroids_out` (capacity `cap`); `len_out` receives the
/// count actually produced.
#[no_mangle]
pub unsafe extern "C" fn ips_akm_stage1(
    values: *const f64,
    n: usize,
    k: usize,
    centroids_out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> IpsStatus {
    guard(|| {
        let len_out = out_ref(len_out, "len_out")?;
        let s = akm_stage1(slice_arg(values, n, "values")?, k)?;
        *len_out = s.centroids.len();
        if cap < s.centroids.len() {
            return Err(Fail(
                IpsStatus::IpsErrBufferTooSmall,
                format!("need {} slots, got {cap}", s.centroids.len()),
            ));
        }
        if centroids_out.is_null() {
            return Err(null("centroids_out"));
        }
        slice::from_raw_parts_mut(centroids_out, s.centroids.len()).copy_from_slice(&s.centroids);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ips_gmms_color_score(v: f64, out: *mut f64) -> IpsStatus {
    guard(|| {
        *out_ref(out, "out")? = color_score(v)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ips_gmms_shape_aspect(v: f64, out: *mut f64) -> IpsStatus {
    guard(|| {
        *out_ref(out, "out")? = shape_aspect(v)?;
        Ok(())
    })
}

/// Renders a GMMS plot. `color_values` and `shape_values` are row-major
/// `n_methods × n_scenarios` arrays. The SVG text is returned in
/// `svg_out` and must be released with [`ips_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ips_gmms_render(
    methods: *const *const c_char,
    n_methods: usize,
    scenarios: *const *const c_char,
    n_scenarios: usize,
    color_values: *const f64,
    shape_values: *const f64,
    cell_px: u32,
    svg_out: *mut *mut c_char,
) -> IpsStatus {
    guard(|| {
        let svg_out = out_ref(svg_out, "svg_out")?;
        if (n_methods > 0 && methods.is_null()) || (n_scenarios > 0 && scenarios.is_null()) {
            return Err(null("labels"));
        }
        let names = |p: *const *const c_char, n: usize, what: &str| -> Result<Vec<String>, Fail> {
            (0..n).map(|i| str_arg(*p.add(i), what).map(str::to_string)).collect()
        };
        let methods = names(methods, n_methods, "method label")?;
        let scenarios = names(scenarios, n_scenarios, "scenario label")?;
        let cells = n_methods * n_scenarios;
        let color = slice_arg(color_values, cells, "color_values")?;
        let shape = slice_arg(shape_values, cells, "shape_values")?;
        let mut grid = GmmsGrid::new("color", "shape");
        for (i, m) in methods.iter().enumerate() {
            for (j, s) in scenarios.iter().enumerate() {
                let at = i * n_scenarios + j;
                grid.insert(m, s, color[at], shape[at]);
            }
        }
        *svg_out = into_c_string(render_gmms(&grid, cell_px)?)?;
        Ok(())
    })
}
