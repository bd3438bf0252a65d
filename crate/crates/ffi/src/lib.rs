//! C interface to dataset generation, trained models and evaluation.
//!
//! Every function returns a [`DmStatus`]. On failure the message is kept per thread and can
//! be read with [`dm_last_error`]. Handles are opaque and must be released with their
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use damnets::dataset::{load_nts, save_nts};
use damnets::eval::{mmd_bar, StatisticId};
use damnets::generators::{
    gen_ba, gen_bipartite, gen_community_decay, gen_many, BAParams, BipartiteParams,
    CommunityDecayParams,
};
use damnets::graph::NetworkTimeSeries;
use damnets::model::{load_checkpoint, AnyModel};
use damnets::rng::{child_seeds, rng_from_seed};
use damnets::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Io = 4,
    Parse = 5,
    Model = 6,
    Panic = 7,
}

/// A list of network time series.
pub struct DmDataset {
    series: Vec<NetworkTimeSeries>,
}

/// A trained transition model read from a checkpoint.
pub struct DmModel {
    inner: AnyModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(DmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => DmStatus::Io,
            Error::Parse { .. } | Error::Json(_) | Error::Checkpoint(_) => DmStatus::Parse,
            Error::NodeOutOfRange { .. } => DmStatus::OutOfRange,
            Error::InvalidParam(_) | Error::Empty(_) | Error::NodeCountMismatch { .. } => {
                DmStatus::InvalidArgument
            }
            _ => DmStatus::Model,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: DmStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            DmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            DmStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers of the public functions promise non-null pointers are valid.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(DmStatus::NullPointer, format!("{name} is null")))
}

fn out_ptr<T>(p: *mut T, name: &str) -> Result<*mut T, Failure> {
    if p.is_null() {
        fail(DmStatus::NullPointer, format!("{name} is null"))
    } else {
        Ok(p)
    }
}

fn str_arg(p: *const c_char, name: &str) -> Result<String, Failure> {
    non_null(p, name)?;
    // SAFETY: non-null and, per the contract, NUL-terminated.
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(DmStatus::InvalidArgument, format!("{name} is not UTF-8")))?;
    Ok(s.to_owned())
}

fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    str_arg(p, name).map(PathBuf::from)
}

fn emit_dataset(series: Vec<NetworkTimeSeries>, out: *mut *mut DmDataset) {
    // SAFETY: `out` was checked non-null by the caller.
    unsafe { *out = Box::into_raw(Box::new(DmDataset { series })) };
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn dm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads a JSON Lines dataset.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_dataset_load(path: *const c_char, out: *mut *mut DmDataset) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let series = load_nts(path_arg(path, "path")?)?;
        emit_dataset(series, out);
        Ok(())
    })
}

/// Writes a dataset as JSON Lines.
///
/// # Safety
/// `ds` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dm_dataset_save(ds: *const DmDataset, path: *const c_char) -> DmStatus {
    guard(|| {
        let ds = non_null(ds, "dataset")?;
        save_nts(&ds.series, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Generates `count` preferential-attachment series on `n` nodes with `m` edges per arrival.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_generate_ba(
    n: usize,
    m: usize,
    count: usize,
    seed: u64,
    out: *mut *mut DmDataset,
) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        emit_dataset(gen_many(count, seed, |seed| gen_ba(BAParams { n, m, seed }))?, out);
        Ok(())
    })
}

/// Generates `count` bipartite concentration series with `per_side` nodes on each side.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_generate_bipartite(
    per_side: usize,
    p: f64,
    p_con: f64,
    steps: usize,
    count: usize,
    seed: u64,
    out: *mut *mut DmDataset,
) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let series = gen_many(count, seed, |seed| {
            gen_bipartite(BipartiteParams {
                per_side,
                p,
                p_con,
                steps,
                seed,
            })
        })?;
        emit_dataset(series, out);
        Ok(())
    })
}

/// Generates `count` community decay series. `sizes` holds `num_communities` entries and
/// `decay` indexes the community whose internal edges are rewired outward.
///
/// # Safety
/// `sizes` must point to `num_communities` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_generate_community(
    sizes: *const usize,
    num_communities: usize,
    p_int: f64,
    p_ext: f64,
    decay: usize,
    f_dec: f64,
    steps: usize,
    count: usize,
    seed: u64,
    out: *mut *mut DmDataset,
) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        non_null(sizes, "sizes")?;
        let community_sizes = std::slice::from_raw_parts(sizes, num_communities).to_vec();
        let params = CommunityDecayParams {
            community_sizes,
            p_int,
            p_ext,
            decay,
            f_dec,
            steps,
            seed: 0,
        };
        let series = gen_many(count, seed, |seed| {
            gen_community_decay(&CommunityDecayParams {
                seed,
                ..params.clone()
            })
        })?;
        emit_dataset(series, out);
        Ok(())
    })
}

/// Releases a dataset. Null is ignored.
///
/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dm_dataset_free(ds: *mut DmDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Number of series in the dataset.
///
/// # Safety
/// `ds` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dm_dataset_len(ds: *const DmDataset, out: *mut usize) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = non_null(ds, "dataset")?.series.len();
        Ok(())
    })
}

fn series_at(ds: *const DmDataset, index: usize) -> Result<&'static NetworkTimeSeries, Failure> {
    let ds: &'static DmDataset = non_null(ds, "dataset")?;
    ds.series.get(index).ok_or_else(|| {
        Failure(
            DmStatus::OutOfRange,
            format!("series {index} out of range for {} series", ds.series.len()),
        )
    })
}

/// Node count and number of snapshots (`T + 1`) of one series.
///
/// # Safety
/// `ds` must be a live handle; `n` and `num_graphs` writable.
#[no_mangle]
pub unsafe extern "C" fn dm_series_shape(
    ds: *const DmDataset,
    series: usize,
    n: *mut usize,
    num_graphs: *mut usize,
) -> DmStatus {
    guard(|| {
        let (n, num_graphs) = (out_ptr(n, "n")?, out_ptr(num_graphs, "num_graphs")?);
        let s = series_at(ds, series)?;
        *n = s.n;
        *num_graphs = s.graphs.len();
        Ok(())
    })
}

/// Copies the edges of snapshot `t` as `(i, j)` pairs with `i < j` into `buf`, which holds
/// room for `capacity` pairs (`2 * capacity` values). `count` receives the edge count; if it
/// exceeds `capacity` nothing is copied and `DM_STATUS_OUT_OF_RANGE` is returned, so a call
/// with `capacity = 0` queries the size.
///
/// # Safety
/// `ds` must be a live handle, `buf` must hold `2 * capacity` writable values (or be null when
/// `capacity` is 0) and `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_series_edges(
    ds: *const DmDataset,
    series: usize,
    t: usize,
    buf: *mut u32,
    capacity: usize,
    count: *mut usize,
) -> DmStatus {
    guard(|| {
        let count = out_ptr(count, "count")?;
        let s = series_at(ds, series)?;
        let g = s.graphs.get(t).ok_or_else(|| {
            Failure(
                DmStatus::OutOfRange,
                format!("snapshot {t} out of range for {} snapshots", s.graphs.len()),
            )
        })?;
        *count = g.num_edges();
        if g.num_edges() > capacity {
            return fail(
                DmStatus::OutOfRange,
                format!("{} edges do not fit in a buffer of {capacity}", g.num_edges()),
            );
        }
        if capacity > 0 {
            let buf = std::slice::from_raw_parts_mut(out_ptr(buf, "buf")?, 2 * capacity);
            for (k, (i, j)) in g.edges().enumerate() {
                buf[2 * k] = i as u32;
                buf[2 * k + 1] = j as u32;
            }
        }
        Ok(())
    })
}

/// Reads a checkpoint written by `damnets train`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dm_model_load(path: *const c_char, out: *mut *mut DmModel) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (inner, _) = load_checkpoint(path_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(DmModel { inner }));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dm_model_free(model: *mut DmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Node count the model was trained for.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dm_model_n(model: *const DmModel, out: *mut usize) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = non_null(model, "model")?.inner.model().n();
        Ok(())
    })
}

/// Samples `per_series` trajectories of `steps` transitions from the first snapshot of every
/// series in `init`. Results are ordered by initial series, then by sample.
///
/// # Safety
/// `model` and `init` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dm_model_sample(
    model: *const DmModel,
    init: *const DmDataset,
    steps: usize,
    per_series: usize,
    seed: u64,
    out: *mut *mut DmDataset,
) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let model = non_null(model, "model")?.inner.model();
        let init = &non_null(init, "init")?.series;
        let seeds = child_seeds(seed, init.len() * per_series);
        let mut series = Vec::with_capacity(seeds.len());
        for (i, s) in init.iter().enumerate() {
            for k in 0..per_series {
                let mut rng = rng_from_seed(seeds[i * per_series + k]);
                let id = format!("{}/sample{k}", s.id);
                series.push(model.sample_series(&id, &s.graphs[0], steps, &mut rng)?);
            }
        }
        emit_dataset(series, out);
        Ok(())
    })
}

/// Time-summed MMD between two datasets for one statistic, named as on the command line
/// (`degree`, `clustering`, `spectral`, `transitivity`, `assortativity`, `closeness`,
/// `spectral_bipartivity`).
///
/// # Safety
/// `test` and `samples` must be live handles, `stat` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dm_mmd_bar(
    test: *const DmDataset,
    samples: *const DmDataset,
    stat: *const c_char,
    out: *mut f64,
) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let ids = StatisticId::parse_list(&str_arg(stat, "stat")?)?;
        let [id] = ids[..] else {
            return fail(DmStatus::InvalidArgument, "expected exactly one statistic");
        };
        *out = mmd_bar(&non_null(test, "test")?.series, &non_null(samples, "samples")?.series, id)?;
        Ok(())
    })
}
