use std::fs;
use std::path::{Path, PathBuf};

use lattice_forge::atlas::Catalog;
use lattice_forge::verify::{paper_verify_with, ItemStatus, VerifyOptions, ITEMS};

fn shipped() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("niemeier")
}

fn opts(data: &Path, cache: &Path, only: &[&str]) -> VerifyOptions {
    VerifyOptions {
        catalog: Catalog::standard().unwrap(),
        data_dir: data.to_path_buf(),
        cache_dir: Some(cache.to_path_buf()),
        only: only.iter().map(|s| s.to_string()).collect(),
    }
}

fn copy_data(to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(shipped()).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, to.join(p.file_name().unwrap())).unwrap();
    }
}

#[test]
fn shipped_run_passes_in_order() {
    let cache = tempfile::tempdir().unwrap();
    let report = paper_verify_with(&opts(&shipped(), cache.path(), &[]));
    let ids: Vec<&str> = report.items.iter().map(|i| i.id.as_str()).collect();
    assert_eq!(ids, ITEMS.iter().map(|(id, _)| *id).collect::<Vec<_>>());
    for i in &report.items {
        assert_eq!(i.status, ItemStatus::Pass, "{}: {}", i.id, i.detail);
    }
    assert_eq!(report.exit_code(), 0);
    let json = report.to_json();
    assert_eq!(json["all_passed"], true);
    assert!(report.render_text().contains("discriminant-census"));
}

#[test]
fn swapped_complement_entries_fail() {
    let cache = tempfile::tempdir().unwrap();
    let mut o = opts(&shipped(), cache.path(), &["minus2-complements", "nikulin-invariants"]);
    o.catalog.swap_lattices("S2", "S3").unwrap();
    let report = paper_verify_with(&o);
    let item = report.item("minus2-complements").unwrap();
    assert_eq!(item.status, ItemStatus::Fail);
    assert!(item.detail.contains("invariant mismatch"), "{}", item.detail);
    assert_eq!(report.item("nikulin-invariants").unwrap().status, ItemStatus::Pass);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn corrupted_glue_fails_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("niemeier");
    copy_data(&data);
    let f = data.join("e7-2-d10.json");
    let text = fs::read_to_string(&f).unwrap();
    fs::write(&f, text.replacen("-1/2", "-1/4", 1)).unwrap();
    let cache = dir.path().join("cache");
    let report = paper_verify_with(&opts(&data, &cache, &["genus-table", "discriminant-census"]));
    assert_eq!(report.item("genus-table").unwrap().status, ItemStatus::Fail);
    assert_eq!(report.item("discriminant-census").unwrap().status, ItemStatus::Pass);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn unreadable_glue_fails_rather_than_skips() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("niemeier");
    copy_data(&data);
    fs::write(data.join("a17-e7.json"), "{ truncated").unwrap();
    let report = paper_verify_with(&opts(&data, &dir.path().join("cache"), &["genus-table"]));
    assert_eq!(report.item("genus-table").unwrap().status, ItemStatus::Fail);
}

#[test]
fn missing_data_only_skips_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = paper_verify_with(&opts(&dir.path().join("absent"), dir.path(), &["genus-table", "discriminant-census", "catalog"]));
    let g = report.item("genus-table").unwrap();
    assert_eq!(g.status, ItemStatus::Skipped);
    assert_eq!(g.detail, "skipped: data missing");
    assert_eq!(report.count(ItemStatus::Pass), 2);
    assert_eq!(report.exit_code(), 3);

    // a directory lacking one row's file is also missing data
    let data = dir.path().join("partial");
    copy_data(&data);
    fs::remove_file(data.join("d16-e8.json")).unwrap();
    let report = paper_verify_with(&opts(&data, dir.path(), &["genus-table"]));
    assert_eq!(report.item("genus-table").unwrap().status, ItemStatus::Skipped);
}
