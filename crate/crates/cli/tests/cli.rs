use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn shipped() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("..").join("core").join("data").join("niemeier")
}

fn run(args: &[&str], data_root: Option<&Path>, cache: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lattice-forge"));
    cmd.args(args).env("LATTICE_FORGE_CACHE", cache);
    match data_root {
        Some(d) => cmd.env("LATTICE_FORGE_DATA", d),
        None => cmd.env_remove("LATTICE_FORGE_DATA"),
    };
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// A data root whose `niemeier/` holds copies of the shipped glue files.
fn copied_root(dir: &Path) -> PathBuf {
    let root = dir.join("data");
    let n = root.join("niemeier");
    fs::create_dir_all(&n).unwrap();
    for e in fs::read_dir(shipped()).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, n.join(p.file_name().unwrap())).unwrap();
    }
    root
}

#[test]
fn disc_census_and_json() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["disc", "--lattice", "T", "--expect-census", "0:6,1:10,1/2:10,3/2:6"], None, tmp.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&["disc", "--lattice", "T", "--expect-census", "0:7,1:9,1/2:10,3/2:6"], None, tmp.path());
    assert_eq!(code(&o), 1);
    let o = run(&["disc", "--json", "--lattice", "U+U+E8+A1^5"], None, tmp.path());
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["invariant_factors"], serde_json::json!([2, 2, 2, 2, 2]));
}

#[test]
fn invariants_and_lattice_files() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["invariants", "--lattice", "A1(-1)+A1^4", "--expect", "((1,4),5,1)"], None, tmp.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&["invariants", "--lattice", "T", "--expect", "((2,14),5,1)"], None, tmp.path());
    assert_eq!(code(&o), 1);
    let file = tmp.path().join("a2.json");
    fs::write(&file, r#"{"gram": [[-2, 1], [1, -2]]}"#).unwrap();
    let o = run(&["roots", "--lattice", file.to_str().unwrap(), "--expect", "A2"], None, tmp.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let o = run(&["invariants", "--lattice", "no-such-thing"], None, tmp.path());
    assert_ne!(code(&o), 0);
}

#[test]
fn classify_and_orbits() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["classify", "--lattice", "T", "--vector", "r1", "--marked", "r1", "--expect", "Δ3b"], None, tmp.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&["classify", "--lattice", "T", "--vector", "r2", "--marked", "r1", "--expect", "Δ3b"], None, tmp.path());
    assert_eq!(code(&o), 1);
    let o = run(&["orbits", "--lattice", "T", "--q", "0", "--stabilizer", "r1", "--expect-count", "3"], None, tmp.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn vinberg_with_dot() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["vinberg", "--lattice", "M_v", "--controller", "e+f", "--norms", "-2", "--dot"], None, tmp.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("graph"));
    let o = run(&["vinberg", "--lattice", "M_v", "--controller", "e+f", "--norms", "-2", "--max-roots", "10"], None, tmp.path());
    assert_ne!(code(&o), 0);
}

#[test]
fn verify_shipped_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--json"], None, tmp.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["all_passed"], true);
}

#[test]
fn verify_flags_a_swapped_catalog() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("catalog.json");
    let o = run(&["catalog", "--write", file.to_str().unwrap()], None, tmp.path());
    assert_eq!(code(&o), 0);
    let mut cat: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    let entries = cat["entries"].as_array_mut().unwrap();
    let pos = |n: &str| entries.iter().position(|e| e["name"] == n).unwrap();
    let (i, j) = (pos("S2"), pos("S3"));
    let a = entries[i]["lattice"].take();
    let b = std::mem::replace(&mut entries[j]["lattice"], a);
    entries[i]["lattice"] = b;
    fs::write(&file, serde_json::to_string(&cat).unwrap()).unwrap();
    let o = run(&["verify", "--catalog", file.to_str().unwrap(), "--only", "minus2-complements"], None, tmp.path());
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("invariant mismatch"));
}

#[test]
fn verify_flags_corrupted_glue() {
    let tmp = tempfile::tempdir().unwrap();
    let root = copied_root(tmp.path());
    let f = root.join("niemeier").join("e7-2-d10.json");
    fs::write(&f, fs::read_to_string(&f).unwrap().replacen("-1/2", "-1/4", 1)).unwrap();
    let o = run(&["verify", "--only", "genus-table,discriminant-census"], Some(&root), &tmp.path().join("cache"));
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn verify_skips_without_data() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--only", "genus-table,discriminant-census"], Some(&tmp.path().join("absent")), tmp.path());
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    assert!(stdout(&o).contains("skipped: data missing"));
    let o = run(&["niemeier"], Some(&tmp.path().join("absent")), tmp.path());
    assert_ne!(code(&o), 0);
}
