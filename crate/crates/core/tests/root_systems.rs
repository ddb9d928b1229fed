use std::collections::BTreeSet;

use lattice_forge::embed::{embed_root_lattice, subsystems_bds, verify_embedding};
use lattice_forge::roots::{identify_ade, identify_simple_roots, roots, short_vectors, simple_system, RootSystemType};
use lattice_forge::{make_standard, GramLattice};

/// Weyl-orbit closure of the basis under reflections in the basis vectors.
/// Every root of a simply laced system is a W-image of a simple root.
fn weyl_closure(l: &GramLattice) -> BTreeSet<Vec<i64>> {
    let simple: Vec<Vec<i64>> = (0..l.rank()).map(|i| l.basis_vector(i)).collect();
    let mut seen: BTreeSet<Vec<i64>> = simple.iter().cloned().collect();
    let mut stack: Vec<Vec<i64>> = simple.clone();
    while let Some(x) = stack.pop() {
        for s in &simple {
            let c = l.pair(&x, s);
            let y: Vec<i64> = x.iter().zip(s).map(|(a, b)| a + c * b).collect();
            if seen.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    seen
}

fn box_count(l: &GramLattice, norm: i64, radius: i64) -> usize {
    let n = l.rank();
    let mut v = vec![-radius; n];
    let mut count = 0;
    loop {
        if l.norm(&v) == norm {
            count += 1;
        }
        let mut i = 0;
        while i < n && v[i] == radius {
            v[i] = -radius;
            i += 1;
        }
        if i == n {
            return count;
        }
        v[i] += 1;
    }
}

fn vec_set(v: &[Vec<i64>]) -> BTreeSet<Vec<i64>> {
    v.iter().cloned().collect()
}

#[test]
fn short_vector_counts() {
    assert_eq!(short_vectors(&make_standard("A1").unwrap(), -2).unwrap().len(), 2);
    let d4 = make_standard("D4").unwrap();
    let got = short_vectors(&d4, -2).unwrap();
    assert_eq!(got.len(), 24);
    assert_eq!(box_count(&d4, -2, 2), 24);
    assert_eq!(vec_set(&got.vectors), weyl_closure(&d4));
    let e8 = make_standard("E8").unwrap();
    let got = short_vectors(&e8, -2).unwrap();
    assert_eq!(got.len(), 240);
    assert_eq!(vec_set(&got.vectors), weyl_closure(&e8));
    assert!(short_vectors(&make_standard("U").unwrap(), -2).is_err());
}

#[test]
fn root_sets() {
    // r_i ± r_j have norm −4 and divisibility 2, so they are roots too
    let a15 = make_standard("A1^5").unwrap();
    assert_eq!(short_vectors(&a15, -2).unwrap().len(), 10);
    assert_eq!(roots(&a15).unwrap().len(), 10 + 40);
    assert_eq!(roots(&make_standard("<-4>").unwrap()).unwrap().vectors, vec![vec![-1], vec![1]]);
    assert_eq!(roots(&make_standard("E8+A1").unwrap()).unwrap().len(), 242);
    // D4 has 24 long roots and 24 reflective norm −4 vectors (F4 shape)
    let d4 = make_standard("D4").unwrap();
    assert_eq!(roots(&d4).unwrap().len(), 48);
    let e8 = make_standard("E8").unwrap();
    assert_eq!(roots(&e8).unwrap().len(), 240);
}

#[test]
fn roots_are_closed_under_their_reflections() {
    for e in ["A3+A1", "D5", "E6", "A1^2+<-4>"] {
        let l = make_standard(e).unwrap();
        let set = roots(&l).unwrap();
        let all = vec_set(&set.vectors);
        for r in &set.vectors {
            let neg: Vec<i64> = r.iter().map(|x| -x).collect();
            assert!(all.contains(&neg));
            let half = -l.norm(r) / 2;
            for x in &set.vectors {
                let c = l.pair(x, r) / half;
                let y: Vec<i64> = x.iter().zip(r).map(|(a, b)| a + c * b).collect();
                assert!(all.contains(&y), "{e}");
            }
        }
    }
}

#[test]
fn simple_systems() {
    let check = |e: &str| {
        let l = make_standard(e).unwrap();
        let s = simple_system(&l, &roots(&l).unwrap().vectors).unwrap();
        assert_eq!(s.len(), l.rank());
        for (i, a) in s.iter().enumerate() {
            for b in &s[i + 1..] {
                assert!(l.pair(a, b) >= 0);
            }
        }
        (l, s)
    };
    let (l, s) = check("A1^4");
    assert!(s.iter().enumerate().all(|(i, a)| s[i + 1..].iter().all(|b| l.pair(a, b) == 0)));
    let (l, s) = check("D4");
    let mut degrees: Vec<usize> = s.iter().map(|a| s.iter().filter(|b| l.pair(a, b) == 1).count()).collect();
    degrees.sort_unstable();
    assert_eq!(degrees, [1, 1, 1, 3]);
    let (l, s) = check("E8");
    assert_eq!(identify_simple_roots(&l, &s).unwrap().to_string(), "E8");
    let e8 = make_standard("E8").unwrap();
    let mut a = s.iter().map(|x| s.iter().map(|y| l.pair(x, y)).collect::<Vec<_>>()).collect::<Vec<_>>();
    a.iter_mut().flatten().for_each(|x| *x = -*x);
    // negated Gram of the simple roots is a Cartan matrix of E8 up to relabelling
    assert_eq!(a.iter().map(|r| r.iter().sum::<i64>()).sum::<i64>(), e8.gram().to_rows().iter().flatten().map(|x| -x).sum::<i64>());
}

#[test]
fn ade_identification() {
    let t = identify_ade(&make_standard("E7+A1^4").unwrap()).unwrap();
    assert_eq!(t, "E7+A1^4".parse::<RootSystemType>().unwrap());
    assert_eq!(t.pretty(), "E₇⊕A₁⁴");
    assert_eq!(identify_ade(&make_standard("A1+<-4>").unwrap()).unwrap().to_string(), "A1");
    assert!("D3".parse::<RootSystemType>().map(|t| t.to_string()).unwrap_or_default() == "A3");
    assert!("E9".parse::<RootSystemType>().is_err());
}

#[test]
fn bds_subsystems() {
    let e8: RootSystemType = "E8".parse().unwrap();
    let subs: BTreeSet<String> = subsystems_bds(&e8, 4).unwrap().iter().map(|s| s.root_type.to_string()).collect();
    for want in ["E7+A1", "D8", "A8", "E6+A2", "D4"] {
        assert!(subs.contains(want), "{want}");
    }
    let d4: RootSystemType = "D4".parse().unwrap();
    let subs = subsystems_bds(&d4, 4).unwrap();
    assert!(subs.iter().any(|s| s.root_type.to_string() == "A1^4"));
    assert!(subsystems_bds(&d4, 1).unwrap().iter().all(|s| s.root_type.rank() <= 4));
    // every realization really spans the claimed type
    let l = e8.lattice().unwrap();
    for s in subsystems_bds(&e8, 7).unwrap() {
        assert_eq!(identify_simple_roots(&l, &s.simple_roots).unwrap(), s.root_type);
    }
}

#[test]
fn root_lattice_embeddings() {
    let e8 = make_standard("E8").unwrap();
    let src: RootSystemType = "A1^4".parse().unwrap();
    let found = embed_root_lattice(&src, &e8).unwrap();
    assert_eq!(found.len(), 2);
    let mut perps = BTreeSet::new();
    let all_roots = roots(&e8).unwrap().vectors;
    for e in &found {
        assert!(verify_embedding(e, &e8).unwrap());
        assert!(e.images.iter().all(|v| all_roots.contains(v)));
        let perp: Vec<Vec<i64>> = all_roots.iter().filter(|r| e.images.iter().all(|s| e8.pair(r, s) == 0)).cloned().collect();
        let t = lattice_forge::roots::identify_root_subset(&e8, &perp).unwrap();
        perps.insert(t.to_string());
    }
    // the two Weyl classes of four orthogonal roots
    assert_eq!(perps, BTreeSet::from(["A1^4".to_string(), "D4".to_string()]));
    let d4: RootSystemType = "D4".parse().unwrap();
    assert!(embed_root_lattice(&d4, &make_standard("A1^5").unwrap()).unwrap().is_empty());
}
