use std::ffi::{CStr, CString};
use std::ptr;

use damnets::model::{save_checkpoint, CheckpointMeta, Damnets, ModelConfig};
use damnets_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dm_last_error()) }.to_string_lossy().into_owned()
}

fn ba(count: usize, seed: u64) -> *mut DmDataset {
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { dm_generate_ba(12, 2, count, seed, &mut ds) }, DmStatus::Ok);
    assert!(!ds.is_null());
    ds
}

fn edges(ds: *const DmDataset, s: usize, t: usize) -> Vec<(u32, u32)> {
    let mut count = 0;
    let status = unsafe { dm_series_edges(ds, s, t, ptr::null_mut(), 0, &mut count) };
    if count == 0 {
        assert_eq!(status, DmStatus::Ok);
        return Vec::new();
    }
    assert_eq!(status, DmStatus::OutOfRange);
    let mut buf = vec![0u32; 2 * count];
    assert_eq!(
        unsafe { dm_series_edges(ds, s, t, buf.as_mut_ptr(), count, &mut count) },
        DmStatus::Ok
    );
    buf.chunks(2).map(|p| (p[0], p[1])).collect()
}

#[test]
fn generate_inspect_and_free() {
    let ds = ba(3, 1);
    let (mut len, mut n, mut graphs) = (0, 0, 0);
    unsafe {
        assert_eq!(dm_dataset_len(ds, &mut len), DmStatus::Ok);
        assert_eq!(dm_series_shape(ds, 0, &mut n, &mut graphs), DmStatus::Ok);
    }
    assert_eq!((len, n, graphs), (3, 12, 11));
    let last = edges(ds, 0, 10);
    assert_eq!(last.len(), 20);
    assert!(last.iter().all(|&(i, j)| i < j && j < 12));
    assert!(edges(ds, 0, 0).is_empty());
    unsafe { dm_dataset_free(ds) };
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("d.jsonl").to_str().unwrap()).unwrap();
    let ds = ba(2, 5);
    assert_eq!(unsafe { dm_dataset_save(ds, path.as_ptr()) }, DmStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { dm_dataset_load(path.as_ptr(), &mut back) }, DmStatus::Ok);
    for t in 0..11 {
        assert_eq!(edges(ds, 1, t), edges(back, 1, t));
    }
    let mut zero = f64::NAN;
    let stat = CString::new("degree").unwrap();
    assert_eq!(unsafe { dm_mmd_bar(ds, back, stat.as_ptr(), &mut zero) }, DmStatus::Ok);
    assert_eq!(zero, 0.0);
    unsafe {
        dm_dataset_free(ds);
        dm_dataset_free(back);
    }
}

#[test]
fn other_generators() {
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(dm_generate_bipartite(5, 0.4, 0.2, 4, 2, 3, &mut ds), DmStatus::Ok);
        let (mut n, mut g) = (0, 0);
        dm_series_shape(ds, 1, &mut n, &mut g);
        assert_eq!((n, g), (10, 5));
        dm_dataset_free(ds);

        let sizes = [6usize, 6, 6];
        assert_eq!(
            dm_generate_community(sizes.as_ptr(), 3, 0.8, 0.02, 2, 0.2, 5, 2, 4, &mut ds),
            DmStatus::Ok
        );
        dm_series_shape(ds, 0, &mut n, &mut g);
        assert_eq!((n, g), (18, 6));
        dm_dataset_free(ds);
    }
}

#[test]
fn model_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("m.ckpt");
    let model = Damnets::new(12, &ModelConfig { hidden: 8, row_heads: 2, ..ModelConfig::default() }).unwrap();
    save_checkpoint(&model, &CheckpointMeta::default(), &ckpt).unwrap();
    let path = CString::new(ckpt.to_str().unwrap()).unwrap();

    let mut m = ptr::null_mut();
    assert_eq!(unsafe { dm_model_load(path.as_ptr(), &mut m) }, DmStatus::Ok);
    let mut n = 0;
    assert_eq!(unsafe { dm_model_n(m, &mut n) }, DmStatus::Ok);
    assert_eq!(n, 12);

    let init = ba(2, 9);
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(dm_model_sample(m, init, 3, 2, 7, &mut a), DmStatus::Ok);
        assert_eq!(dm_model_sample(m, init, 3, 2, 7, &mut b), DmStatus::Ok);
    }
    let (mut len, mut graphs) = (0, 0);
    unsafe {
        dm_dataset_len(a, &mut len);
        dm_series_shape(a, 3, &mut n, &mut graphs);
    }
    assert_eq!((len, graphs), (4, 4));
    for s in 0..4 {
        assert_eq!(edges(a, s, 0), edges(init, s / 2, 0));
        for t in 0..4 {
            assert_eq!(edges(a, s, t), edges(b, s, t));
        }
    }
    unsafe {
        dm_dataset_free(a);
        dm_dataset_free(b);
        dm_dataset_free(init);
        dm_model_free(m);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { dm_generate_ba(3, 5, 1, 0, &mut ds) }, DmStatus::InvalidArgument);
    assert!(ds.is_null());
    assert!(!last_error().is_empty());

    let missing = CString::new("/nonexistent/x.jsonl").unwrap();
    assert_eq!(unsafe { dm_dataset_load(missing.as_ptr(), &mut ds) }, DmStatus::Io);

    let mut len = 0;
    assert_eq!(unsafe { dm_dataset_len(ptr::null(), &mut len) }, DmStatus::NullPointer);
    assert!(last_error().contains("null"));

    let ok = ba(1, 0);
    let mut count = 0;
    assert_eq!(
        unsafe { dm_series_edges(ok, 4, 0, ptr::null_mut(), 0, &mut count) },
        DmStatus::OutOfRange
    );
    let stat = CString::new("degree,clustering").unwrap();
    let mut v = 0.0;
    assert_eq!(unsafe { dm_mmd_bar(ok, ok, stat.as_ptr(), &mut v) }, DmStatus::InvalidArgument);
    assert_eq!(unsafe { dm_dataset_len(ok, &mut len) }, DmStatus::Ok);
    assert!(last_error().is_empty());
    unsafe {
        dm_dataset_free(ok);
        dm_dataset_free(ptr::null_mut());
        dm_model_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/damnets.h")).unwrap();
    for sym in ["dm_generate_ba", "dm_model_sample", "dm_mmd_bar", "DM_STATUS_OK", "typedef struct DmDataset DmDataset"] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
}
