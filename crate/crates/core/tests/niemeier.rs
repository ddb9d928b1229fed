use std::collections::BTreeSet;
use std::path::PathBuf;

use lattice_forge::disc::two_elementary_invariants;
use lattice_forge::niemeier::{complement_entries, genus_table_with, load_file, load_niemeier_from, r1, r2, GenusEntry, GenusOptions};
use lattice_forge::roots::{short_vectors, RootSystemType};
use lattice_forge::{make_standard, GramLattice};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("niemeier")
}

fn ty(s: &str) -> RootSystemType {
    s.parse().unwrap()
}

fn labels(v: &[GenusEntry]) -> BTreeSet<String> {
    v.iter().map(|e| e.label.clone()).collect()
}

#[test]
fn loaded_lattices_are_niemeier() {
    for t in ["E8^3", "E7^2+D10", "D16+E8", "A17+E7"] {
        let n = load_niemeier_from(&data_dir(), &ty(t)).unwrap();
        let l = &n.lattice;
        assert_eq!(l.rank(), 24);
        assert!(l.is_even());
        assert_eq!(l.determinant().abs(), 1);
        assert_eq!(n.roots.len(), ty(t).root_count(), "{t}");
    }
    let e83 = load_niemeier_from(&data_dir(), &ty("E8^3")).unwrap();
    assert!(e83.glue.is_empty());
    let d16 = load_niemeier_from(&data_dir(), &ty("D16+E8")).unwrap();
    assert_eq!(short_vectors(&d16.lattice, -2).unwrap().len(), 2 * 16 * 15 + 240);
    assert!(load_niemeier_from(&data_dir(), &ty("A24")).is_err());
}

#[test]
fn corrupted_glue_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data_dir().join("e7-2-d10.json")).unwrap();
    assert!(text.contains("-1/2"));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text.replacen("-1/2", "-1/4", 1)).unwrap();
    assert!(load_file(&bad).is_err());
    std::fs::write(&bad, "{not json").unwrap();
    assert!(load_file(&bad).is_err());
}

#[test]
fn complement_cells() {
    let e83 = load_niemeier_from(&data_dir(), &ty("E8^3")).unwrap();
    let g1 = complement_entries(&r1(), &e83).unwrap();
    assert_eq!(labels(&g1), BTreeSet::from(["E₇⊕D₄⊕A₁²".into(), "D₆²⊕A₁".into(), "E₈⊕A₁⁵".into()]));
    let g2 = complement_entries(&r2(), &e83).unwrap();
    assert_eq!(labels(&g2), BTreeSet::from(["E₈⊕D₄⊕A₁".to_string()]));

    let d16 = load_niemeier_from(&data_dir(), &ty("D16+E8")).unwrap();
    assert_eq!(labels(&complement_entries(&r2(), &d16).unwrap()), BTreeSet::from(["D₁₂⊕A₁".to_string()]));
    let a17 = load_niemeier_from(&data_dir(), &ty("A17+E7")).unwrap();
    assert!(complement_entries(&r2(), &a17).unwrap().is_empty());

    for e in g1.iter().chain(&g2) {
        assert_eq!(e.rank, 13);
        assert_eq!((e.signature.positive, e.signature.negative), (0, 13));
    }
}

#[test]
fn full_table() {
    let cache = tempfile::tempdir().unwrap();
    let opts = GenusOptions { data_dir: data_dir(), cache_dir: Some(cache.path().to_path_buf()) };
    let table = genus_table_with(&opts).unwrap();
    assert!(table.genus_consistent());
    let row = |r: &str| table.rows.iter().find(|x| x.row == r).unwrap();

    assert_eq!(row("a").listed_g2().len(), 1);
    let b = row("b");
    let e7a16 = b.g1.iter().find(|e| e.label == "overline{E₇⊕A₁⁶}").unwrap();
    assert!(e7a16.saturated);
    assert_eq!(b.listed_g1().iter().filter(|e| e.saturated).count(), 3);
    assert_eq!(
        b.listed_g2().iter().map(|e| (e.label.as_str(), e.saturated)).collect::<BTreeSet<_>>(),
        BTreeSet::from([("E₇⊕D₆", false), ("overline{D₁₀⊕A₁³}", true)])
    );
    let c = row("c");
    assert_eq!(c.listed_g1().iter().map(|e| e.label.as_str()).collect::<Vec<_>>(), ["overline{D₈⊕A₁⁵}"]);
    let d = row("d");
    assert_eq!(d.listed_g1().len(), 1);
    assert_eq!(d.listed_g1()[0].label, "(A₁⁴)^⊥ in A₁₇");
    assert!(d.g2.is_empty());

    // saturation flag is exactly index 2
    for r in &table.rows {
        for e in r.g1.iter().chain(&r.g2) {
            assert_eq!(e.saturated, e.index == 2);
        }
    }

    // second run comes from the cache and agrees
    let again = genus_table_with(&opts).unwrap();
    assert_eq!(serde_json::to_value(&again.rows).unwrap(), serde_json::to_value(&table.rows).unwrap());
}

#[test]
fn g1_members_give_t_after_two_hyperbolic_planes() {
    let t = two_elementary_invariants(&make_standard("U+U+E8+A1^5").unwrap()).unwrap();
    let e83 = load_niemeier_from(&data_dir(), &ty("E8^3")).unwrap();
    let u = make_standard("U").unwrap();
    for e in complement_entries(&r1(), &e83).unwrap() {
        let n = GramLattice::from_rows(e.complement_gram.clone(), "N").unwrap();
        let sum = GramLattice::direct_sum(&[&u, &u, &n], "UUN").unwrap();
        assert_eq!(two_elementary_invariants(&sum).unwrap(), t, "{}", e.label);
    }
}
