//! C ABI over `manifoldwalk`.
//!
//! Point clouds cross the boundary as opaque `MwPointCloud` handles created
//! by `mw_point_cloud_new` (or a generator) and released with
//! `mw_point_cloud_free`. Every fallible call returns an `MwStatus`; on
//! failure `mw_last_error_message` describes the most recent error on the
//! calling thread. Panics never unwind into C; they surface as
//! `MW_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use manifoldwalk::baselines::{baseline_distance, MeasureKind};
use manifoldwalk::datasets::{
    add_noise, gen_moons, gen_s_curve, gen_swiss_roll, LabeledPointCloud, NoiseSpec,
    PartiallyLabeledCloud, PointCloud,
};
use manifoldwalk::graphs::{adjacency, knn_graph};
use manifoldwalk::matrix::Matrix;
use manifoldwalk::similarity::{manifold_distance, Variant};
use manifoldwalk::transfer::{baseline_classify, transfer_classify, TransferConfig};
use manifoldwalk::Error;

/// Written to unlabeled rows that received no prediction because transfer
/// was gated off.
pub const MW_NO_PREDICTION: usize = !0;

/// Label value marking an unlabeled target row.
pub const MW_UNLABELED: i64 = -1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwStatus {
    Ok = 0,
    InvalidArgument = 1,
    DimensionMismatch = 2,
    Numerical = 3,
    EmptyTrainingSet = 4,
    Degenerate = 5,
    NullPointer = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwVariant {
    Rows = 0,
    Columns = 1,
    RowsAndColumns = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwMeasure {
    Cosine = 0,
    Rbf = 1,
    Procrustes = 2,
    Wasserstein = 3,
    Hausdorff = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwDataset {
    SwissRoll = 0,
    SCurve = 1,
    Moons = 2,
}

/// Transfer settings. `t` NaN means the automatic walk parameter; `dt`
/// INFINITY disables the gate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwTransferOptions {
    pub k: usize,
    pub t: f64,
    pub dt: f64,
    pub variant: MwVariant,
    pub symmetrize: bool,
    pub joint_scale: bool,
}

/// Opaque point cloud handle.
pub struct MwPointCloud {
    inner: PointCloud,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> MwStatus {
    match err {
        Error::DimensionMismatch { .. } => MwStatus::DimensionMismatch,
        Error::EmptyTrainingSet(_) => MwStatus::EmptyTrainingSet,
        Error::Degenerate(_) => MwStatus::Degenerate,
        e if e.is_numerical() => MwStatus::Numerical,
        _ => MwStatus::InvalidArgument,
    }
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status and the
/// thread-local message.
fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> MwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MwStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            MwStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MwStatus::Panic
        }
    }
}

unsafe fn handle<'a>(p: *const MwPointCloud, what: &'static str) -> Result<&'a PointCloud, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or(Failure::Null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn boxed(cloud: PointCloud) -> *mut MwPointCloud {
    Box::into_raw(Box::new(MwPointCloud { inner: cloud }))
}

fn variant(v: MwVariant) -> Variant {
    match v {
        MwVariant::Rows => Variant::Rows,
        MwVariant::Columns => Variant::Columns,
        MwVariant::RowsAndColumns => Variant::RowsAndColumns,
    }
}

fn walk_param(t: f64) -> Result<Option<f64>, Failure> {
    if t.is_nan() {
        Ok(None)
    } else if t.is_finite() && t >= 0.0 {
        Ok(Some(t))
    } else {
        Err(Failure::Lib(Error::InvalidArgument(format!(
            "t must be NaN (automatic) or finite and >= 0, got {t}"
        ))))
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mw_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(
        concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes(),
    ) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

#[no_mangle]
pub extern "C" fn mw_transfer_options_default() -> MwTransferOptions {
    let d = TransferConfig::default();
    MwTransferOptions {
        k: d.k,
        t: f64::NAN,
        dt: d.dt,
        variant: MwVariant::Rows,
        symmetrize: d.symmetrize,
        joint_scale: d.joint_scale,
    }
}

/// Copies `n * d` row-major values into a new cloud.
///
/// # Safety
/// `data` must point to `n * d` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_point_cloud_new(
    data: *const f64,
    n: usize,
    d: usize,
    out: *mut *mut MwPointCloud,
) -> MwStatus {
    guarded(|| {
        let out = out_ref(out, "out")?;
        let len = n.checked_mul(d).ok_or_else(|| {
            Failure::Lib(Error::InvalidArgument(format!("{n} x {d} overflows")))
        })?;
        let values = slice(data, len, "data")?.to_vec();
        let cloud = PointCloud::new(Matrix::from_row_major(n, d, values))?;
        *out = boxed(cloud);
        Ok(())
    })
}

/// Releases a cloud. NULL is ignored.
///
/// # Safety
/// `cloud` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mw_point_cloud_free(cloud: *mut MwPointCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Number of rows, or 0 for NULL.
///
/// # Safety
/// `cloud` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_point_cloud_len(cloud: *const MwPointCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.inner.len())
}

/// Number of columns, or 0 for NULL.
///
/// # Safety
/// `cloud` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_point_cloud_dim(cloud: *const MwPointCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.inner.dim())
}

/// Copies the row-major values into `out`, which holds `len` doubles;
/// `len` must equal rows times columns.
///
/// # Safety
/// `cloud` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mw_point_cloud_copy_data(
    cloud: *const MwPointCloud,
    out: *mut f64,
    len: usize,
) -> MwStatus {
    guarded(|| {
        let c = handle(cloud, "cloud")?;
        let values = c.features().as_slice();
        if values.len() != len {
            return Err(Error::DimensionMismatch {
                left: format!("{} values", values.len()),
                right: format!("buffer of {len}"),
            }
            .into());
        }
        slice_mut(out, len, "out")?.copy_from_slice(values);
        Ok(())
    })
}

/// Generates a labeled synthetic dataset. `classes` is ignored for moons.
/// `labels` receives `n` class ids.
///
/// # Safety
/// `out_cloud` must be writable and `labels` must hold `n` entries.
#[no_mangle]
pub unsafe extern "C" fn mw_dataset_generate(
    kind: MwDataset,
    n: usize,
    classes: usize,
    seed: u64,
    out_cloud: *mut *mut MwPointCloud,
    labels: *mut usize,
) -> MwStatus {
    guarded(|| {
        let out = out_ref(out_cloud, "out_cloud")?;
        let labels = slice_mut(labels, n, "labels")?;
        let data = match kind {
            MwDataset::SwissRoll => gen_swiss_roll(n, classes, seed)?,
            MwDataset::SCurve => gen_s_curve(n, classes, seed)?,
            MwDataset::Moons => gen_moons(n, seed)?,
        };
        labels.copy_from_slice(data.labels());
        *out = boxed(data.cloud().clone());
        Ok(())
    })
}

/// New cloud with Gaussian noise of level 0-4 added to every entry.
///
/// # Safety
/// `cloud` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_add_noise(
    cloud: *const MwPointCloud,
    level: u8,
    seed: u64,
    out: *mut *mut MwPointCloud,
) -> MwStatus {
    guarded(|| {
        let c = handle(cloud, "cloud")?;
        let out = out_ref(out, "out")?;
        let noisy = add_noise(c, NoiseSpec::level(level)?, seed);
        *out = boxed(noisy);
        Ok(())
    })
}

/// Manifold distance between the k-NN graphs of two clouds with equal row
/// counts. `t` NaN selects the automatic walk parameter.
///
/// # Safety
/// `a` and `b` must be live handles and `out_distance` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_manifold_distance(
    a: *const MwPointCloud,
    b: *const MwPointCloud,
    k: usize,
    t: f64,
    variant_kind: MwVariant,
    symmetrize: bool,
    out_distance: *mut f64,
) -> MwStatus {
    guarded(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        let out = out_ref(out_distance, "out_distance")?;
        let t = walk_param(t)?;
        let ga = adjacency(&knn_graph(a, k, symmetrize)?);
        let gb = adjacency(&knn_graph(b, k, symmetrize)?);
        *out = manifold_distance(&ga, &gb, t, variant(variant_kind))?.distance;
        Ok(())
    })
}

/// One of the conventional point-cloud distances with default parameters.
///
/// # Safety
/// `a` and `b` must be live handles and `out_distance` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_baseline_distance(
    measure: MwMeasure,
    a: *const MwPointCloud,
    b: *const MwPointCloud,
    out_distance: *mut f64,
) -> MwStatus {
    guarded(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        let out = out_ref(out_distance, "out_distance")?;
        let kind = match measure {
            MwMeasure::Cosine => MeasureKind::Cosine,
            MwMeasure::Rbf => MeasureKind::Rbf,
            MwMeasure::Procrustes => MeasureKind::Procrustes,
            MwMeasure::Wasserstein => MeasureKind::Wasserstein,
            MwMeasure::Hausdorff => MeasureKind::Hausdorff,
        };
        *out = baseline_distance(kind, a, b)?;
        Ok(())
    })
}

fn partial(cloud: &PointCloud, labels: &[i64]) -> Result<PartiallyLabeledCloud, Failure> {
    let mut out = Vec::with_capacity(labels.len());
    for (row, &l) in labels.iter().enumerate() {
        out.push(match l {
            MW_UNLABELED => None,
            l if l >= 0 => Some(l as usize),
            l => {
                return Err(Error::InvalidArgument(format!(
                    "row {row}: label {l} is neither -1 nor a class id"
                ))
                .into())
            }
        });
    }
    let classes = out.iter().flatten().max().map_or(0, |m| m + 1);
    Ok(PartiallyLabeledCloud::new(cloud.clone(), out, classes)?)
}

fn write_predictions(
    out: &mut [usize],
    target: &PartiallyLabeledCloud,
    predictions: Option<&[usize]>,
) {
    for (slot, label) in out.iter_mut().zip(target.labels()) {
        if let Some(l) = label {
            *slot = *l;
        }
    }
    for (pos, row) in target.unlabeled_indices().into_iter().enumerate() {
        out[row] = predictions.map_or(MW_NO_PREDICTION, |p| p[pos]);
    }
}

/// Gated transfer classification of the unlabeled target rows.
///
/// `target_labels` holds one entry per target row: a class id, or -1 for
/// unlabeled rows. `source_labels` holds one class id per source row.
/// `predictions` receives one class id per target row (labeled rows keep
/// their label). When the measured distance exceeds `dt` the call still
/// succeeds, `*out_gated` is true and unlabeled rows get
/// `MW_NO_PREDICTION`. `out_distance` and `out_gated` may be NULL.
///
/// # Safety
/// Handles must be live; each array must hold as many entries as its cloud
/// has rows; `options` may be NULL for defaults.
#[no_mangle]
pub unsafe extern "C" fn mw_transfer_classify(
    target: *const MwPointCloud,
    target_labels: *const i64,
    source: *const MwPointCloud,
    source_labels: *const usize,
    options: *const MwTransferOptions,
    predictions: *mut usize,
    out_distance: *mut f64,
    out_gated: *mut bool,
) -> MwStatus {
    guarded(|| {
        let t_cloud = handle(target, "target")?;
        let s_cloud = handle(source, "source")?;
        let t_labels = slice(target_labels, t_cloud.len(), "target_labels")?;
        let s_labels = slice(source_labels, s_cloud.len(), "source_labels")?;
        let out = slice_mut(predictions, t_cloud.len(), "predictions")?;
        let opts = options.as_ref().copied().unwrap_or_else(|| mw_transfer_options_default());
        let cfg = TransferConfig {
            k: opts.k,
            classify_k: None,
            t: walk_param(opts.t)?,
            dt: opts.dt,
            variant: variant(opts.variant),
            symmetrize: opts.symmetrize,
            joint_scale: opts.joint_scale,
        };
        let target = partial(t_cloud, t_labels)?;
        let source = LabeledPointCloud::new(s_cloud.clone(), s_labels.to_vec())?;
        let outcome = transfer_classify(&target, &source, &cfg)?;
        write_predictions(out, &target, outcome.predictions.as_deref());
        if let Some(d) = out_distance.as_mut() {
            *d = outcome.measured_distance;
        }
        if let Some(g) = out_gated.as_mut() {
            *g = outcome.gated;
        }
        Ok(())
    })
}

/// Plain k-NN over the labeled target rows only; arrays as in
/// `mw_transfer_classify`.
///
/// # Safety
/// `target` must be live; `target_labels` and `predictions` must hold one
/// entry per row.
#[no_mangle]
pub unsafe extern "C" fn mw_baseline_classify(
    target: *const MwPointCloud,
    target_labels: *const i64,
    k: usize,
    predictions: *mut usize,
) -> MwStatus {
    guarded(|| {
        let cloud = handle(target, "target")?;
        let labels = slice(target_labels, cloud.len(), "target_labels")?;
        let out = slice_mut(predictions, cloud.len(), "predictions")?;
        let target = partial(cloud, labels)?;
        let p = baseline_classify(&target, k)?;
        write_predictions(out, &target, Some(&p));
        Ok(())
    })
}
