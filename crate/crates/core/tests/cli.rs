use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn damnets(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_damnets"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = damnets(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("small.cfg"),
        "# tiny model\nhidden = 8\nrow_layers = 1\nrow_heads = 2\nmax_epochs = 2\nbatch_size = 4\n",
    )
    .unwrap();
    let summary = ok(
        dir,
        &["gen", "--model", "ba", "--n", "8", "--m", "2", "--num-series", "6", "--seed", "1", "--out", "ba.jsonl"],
    );
    assert!(summary.contains("T=6"), "{summary}");

    let train = ["train", "--data", "ba.jsonl", "--model", "damnets", "--config", "small.cfg", "--seed", "3"];
    ok(dir, &[&train[..], &["--out", "a.ckpt"]].concat());
    ok(dir, &[&train[..], &["--out", "b.ckpt"]].concat());
    assert_eq!(fs::read(dir.join("a.ckpt")).unwrap(), fs::read(dir.join("b.ckpt")).unwrap());
    let log = fs::read_to_string(dir.join("a.ckpt.log.csv")).unwrap();
    assert!(log.starts_with("epoch,train_nll,val_nll"));
    assert_eq!(log.lines().count(), 3);

    let sample = ["sample", "--ckpt", "a.ckpt", "--init-from", "ba.jsonl", "--steps", "6", "--per-series", "2", "--seed", "7"];
    ok(dir, &[&sample[..], &["--out", "s1.jsonl"]].concat());
    ok(dir, &[&sample[..], &["--out", "s2.jsonl"]].concat());
    let s1 = fs::read_to_string(dir.join("s1.jsonl")).unwrap();
    assert_eq!(s1, fs::read_to_string(dir.join("s2.jsonl")).unwrap());
    assert_eq!(s1.lines().count(), 12);

    ok(dir, &["eval", "--test", "ba.jsonl", "--samples", "ba.jsonl", "--stats", "all", "--out", "self.json"]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("self.json")).unwrap()).unwrap();
    let per_stat = report["per_stat"].as_object().unwrap();
    assert_eq!(per_stat.len(), 7);
    assert!(per_stat.values().all(|s| s["mmd_bar"].as_f64() == Some(0.0)));

    ok(dir, &["eval", "--test", "ba.jsonl", "--samples", "s1.jsonl", "--stats", "degree,transitivity", "--out", "r.json"]);
    ok(dir, &["plot", "--report", "self.json", "--out", "plots/all"]);
    let mut names: Vec<String> = fs::read_dir(dir.join("plots/all"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names.len(), 8);
    assert!(names.contains(&"spectral_bipartivity.svg".to_string()));
    assert!(names.contains(&"degree_distribution.svg".to_string()));
}

#[test]
fn age_d_and_other_generators() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(
        dir,
        &["gen", "--model", "community", "--sizes", "4,4", "--p-int", "0.9", "--p-ext", "0.05", "--f-dec", "0.2", "--T", "3", "--num-series", "4", "--seed", "2", "--out", "c.jsonl"],
    );
    ok(
        dir,
        &["gen", "--model", "bipartite", "--per-side", "5", "--p", "0.3", "--p-con", "0.2", "--T", "3", "--num-series", "2", "--out", "b.jsonl"],
    );
    ok(
        dir,
        &["train", "--data", "c.jsonl", "--model", "age-d", "--set", "hidden=8", "--set", "age_layers=1", "--set", "age_heads=2", "--set", "max_epochs=1", "--out", "m.ckpt"],
    );
    let out = damnets(dir, &["sample", "--ckpt", "m.ckpt", "--init-from", "b.jsonl", "--steps", "2", "--out", "x.jsonl"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n=8"));
}

#[test]
fn usage_errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert!(!damnets(dir, &["gen", "--model", "ba", "--n", "10", "--num-series", "1", "--out", "x.jsonl"]).status.success());
    assert!(!dir.join("x.jsonl").exists());
    assert!(!damnets(dir, &["gen", "--model", "ba", "--n", "10"]).status.success());
    assert!(!damnets(dir, &["train", "--data", "missing.jsonl", "--out", "m.ckpt"]).status.success());
    assert!(!damnets(dir, &["eval", "--test", "a", "--samples", "b", "--stats", "bogus", "--out", "r.json"]).status.success());
    assert!(!damnets(dir, &["plot", "--report", "none.json", "--out", "p"]).status.success());
}
