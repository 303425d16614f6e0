mod common;

use std::fs;

use ckd::data::{load_dataset, read_csv_matrix, save_dataset, split, synth, write_csv_matrix, Dataset, SynthSpec};
use ckd::CkdError;
use common::*;

#[test]
fn csv_roundtrip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(1);
    let m = gaussian(7, 5, &mut r) * 1e3;
    let path = dir.path().join("m.csv");
    write_csv_matrix(&path, &m).unwrap();
    assert_eq!(read_csv_matrix(&path).unwrap(), m);
}

#[test]
fn dataset_roundtrip() {
    let ds = synth(&SynthSpec { n: 60, query_fraction: 0.25, ..SynthSpec::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = save_dataset(&ds, dir.path()).unwrap();
    let back = load_dataset(&manifest).unwrap();
    assert!((&back.x1 - &ds.x1).amax() <= 1e-12);
    assert!((&back.x2 - &ds.x2).amax() <= 1e-12);
    assert_eq!(back.y, ds.y);
    assert_eq!(back.split, ds.split);
    let files: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(files.len(), 5, "{files:?}");
}

#[test]
fn explicit_train_split_roundtrips() {
    let ds = synth(&SynthSpec { n: 20, query_fraction: 0.0, ..SynthSpec::default() }).unwrap();
    let split = ckd::data::Split { train: (0..10).collect(), query: (15..20).collect() };
    let ds = ds.with_split(split.clone()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let back = load_dataset(&save_dataset(&ds, dir.path()).unwrap()).unwrap();
    assert_eq!(back.split, split);
}

fn write(dir: &std::path::Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn loader_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "x1.csv", "1,2\n3,4\n5,6\n");
    write(p, "x2.csv", "1\n2\n3\n");
    write(p, "y.csv", "1,0\n0,0\n0,1\n");
    write(p, "manifest.json", r#"{"x1":"x1.csv","x2":"x2.csv","y":"y.csv"}"#);
    assert!(matches!(load_dataset(&p.join("manifest.json")), Err(CkdError::UnlabeledSample { row: 1 })));

    write(p, "y.csv", "1,0\n0,1\n");
    assert!(matches!(load_dataset(&p.join("manifest.json")), Err(CkdError::Data(_))));

    write(p, "y.csv", "1,0\n0,1\n1,1\n");
    write(p, "manifest.json", r#"{"x1":"x1.csv","x2":"x2.csv","y":"y.csv","extra":1}"#);
    assert!(matches!(load_dataset(&p.join("manifest.json")), Err(CkdError::Data(_))));

    write(p, "manifest.json", r#"{"x1":"x1.csv","x2":"x2.csv","y":"y.csv","query_idx":"q.txt"}"#);
    write(p, "q.txt", "7\n");
    assert!(load_dataset(&p.join("manifest.json")).is_err());

    write(p, "x1.csv", "1,2\n3,x\n5,6\n");
    assert!(matches!(load_dataset(&p.join("manifest.json")), Err(CkdError::Data(_))));

    assert!(matches!(load_dataset(&p.join("missing.json")), Err(CkdError::Io { .. })));
}

fn base() -> Dataset {
    synth(&SynthSpec { n: 90, c: 6, labels_max: 3, query_fraction: 0.0, ..SynthSpec::default() }).unwrap()
}

#[test]
fn split_is_deterministic_and_disjoint() {
    let ds = base();
    for seed in 0..100 {
        let a = split(&ds, 0.3, seed).unwrap();
        let b = split(&ds, 0.3, seed).unwrap();
        assert_eq!(a.split, b.split);
        let mut all: Vec<usize> = a.split.train.iter().chain(&a.split.query).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..90).collect::<Vec<_>>(), "seed {seed}");
        assert_eq!(a.split.query.len(), 27);
    }
    assert_ne!(split(&ds, 0.3, 0).unwrap().split, split(&ds, 0.3, 1).unwrap().split);
}

#[test]
fn split_rejects_bad_fraction() {
    let ds = base();
    for f in [0.0, 1.0, -0.2, f64::NAN] {
        assert!(split(&ds, f, 0).is_err());
    }
}

#[test]
fn synth_is_seeded() {
    let spec = SynthSpec { noise_sigma: 0.3, labels_max: 2, ..SynthSpec::default() };
    let a = synth(&spec).unwrap();
    let b = synth(&spec).unwrap();
    assert_eq!((&a.x1, &a.x2, &a.y, &a.split), (&b.x1, &b.x2, &b.y, &b.split));
    let c = synth(&SynthSpec { seed: 1, ..spec }).unwrap();
    assert_ne!(a.x1, c.x1);
    assert!(synth(&SynthSpec { latent_dim: 25, ..spec }).is_err());
}
