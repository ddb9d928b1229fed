//! Randomized checks with fixed seeds, shared by the property and acceptance targets.

use lattice_forge::classify::complement_form_check;
use lattice_forge::roots::{identify_ade, short_vectors, RootSystemType};
use lattice_forge::snf::smith_normal_form;
use lattice_forge::{make_standard, GramLattice, IntMatrix};
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn wide(a: &[Vec<i64>]) -> Vec<Vec<i128>> {
    a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()
}

/// Plain i128 product, independent of the library's checked arithmetic.
fn product<A: Copy + Into<i128>, B: Copy + Into<i128>>(a: &[Vec<A>], b: &[Vec<B>]) -> Vec<Vec<i128>> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter().map(|r| (0..n).map(|j| r.iter().zip(b).map(|(&x, row)| x.into() * row[j].into()).sum()).collect()).collect()
}

pub fn smith_forms_reconstruct() {
    let mut r = rng(1);
    for case in 0..200 {
        let (m, n) = (r.gen_range(1..=6), r.gen_range(1..=6));
        let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| r.gen_range(-9..=9)).collect()).collect();
        let a = IntMatrix::from_rows(rows).unwrap();
        let s = smith_normal_form(&a).unwrap();
        assert_eq!(product(&product(&s.left.to_rows(), &a.to_rows()), &s.right.to_rows()), wide(&s.diag.to_rows()), "case {case}");
        assert_eq!(s.left.det().unwrap().abs(), 1);
        assert_eq!(s.right.det().unwrap().abs(), 1);
        for i in 0..m {
            for j in 0..n {
                if i != j {
                    assert_eq!(s.diag[(i, j)], 0);
                }
            }
        }
        let d = s.diagonal_entries();
        let nonzero: Vec<i64> = d.iter().copied().filter(|&x| x != 0).collect();
        assert_eq!(nonzero.len(), s.rank);
        assert!(d[..s.rank].iter().all(|&x| x > 0));
        assert!(d.windows(2).all(|w| w[1] % w[0].max(1) == 0 || w[1] == 0), "case {case}: {d:?}");
    }
}

fn random_primitive(r: &mut ChaCha8Rng, ambient: &GramLattice) -> Option<Vec<Vec<i64>>> {
    let k = r.gen_range(1..=3.min(ambient.rank() - 1));
    let vecs: Vec<Vec<i64>> = (0..k).map(|_| (0..ambient.rank()).map(|_| r.gen_range(-2..=2)).collect()).collect();
    let sat = ambient.saturation(&vecs).ok()?;
    let basis = sat.sublattice.embedding.to_rows();
    ambient.orthogonal_complement(&basis).ok()?;
    Some(basis)
}

pub fn complement_forms_are_negatives() {
    let mut r = rng(2);
    let ambients = ["U^3", "U+E8", "U^2+E8", "E8"].map(|e| make_standard(e).unwrap());
    let mut done = 0;
    let mut tries = 0;
    while done < 50 {
        tries += 1;
        assert!(tries < 5000, "too few nondegenerate samples");
        let amb = &ambients[done % ambients.len()];
        let Some(k) = random_primitive(&mut r, amb) else { continue };
        let w = complement_form_check(&k, amb).unwrap();
        assert!(w.holds(), "{k:?} in {}", amb.label());
        assert_eq!(w.source_factors, w.target_factors);
        done += 1;
    }
}

/// Box bound `|x_i| ≤ sqrt(|norm| · (−G⁻¹)_ii)` and plain enumeration.
fn box_oracle(l: &GramLattice, norm: i64) -> Vec<Vec<i64>> {
    let inv = l.gram().inverse_rational().unwrap();
    let n = l.rank();
    let radius: Vec<i64> = (0..n)
        .map(|i| {
            let b = (&inv[i][i] * num_rational::BigRational::from_integer((norm).into())).abs();
            b.to_f64().unwrap().sqrt().floor() as i64 + 1
        })
        .collect();
    let mut out = Vec::new();
    let mut v: Vec<i64> = radius.iter().map(|&x| -x).collect();
    loop {
        if l.norm(&v) == norm {
            out.push(v.clone());
        }
        let mut i = 0;
        while i < n && v[i] == radius[i] {
            v[i] = -radius[i];
            i += 1;
        }
        if i == n {
            break;
        }
        v[i] += 1;
    }
    out.sort();
    out
}

fn random_unimodular(r: &mut ChaCha8Rng, n: usize) -> IntMatrix {
    let mut m = IntMatrix::identity(n).to_rows();
    for _ in 0..3 * n {
        let (i, j) = (r.gen_range(0..n), r.gen_range(0..n));
        if i != j {
            let c = r.gen_range(-1..=1);
            let src = m[j].clone();
            for (a, b) in m[i].iter_mut().zip(src) {
                *a += c * b;
            }
        }
    }
    IntMatrix::from_rows(m).unwrap()
}

pub fn short_vectors_match_box_oracle() {
    let mut r = rng(3);
    let exprs = ["A1", "<-4>", "<-6>", "A2", "A1^2", "A1+<-4>", "A3", "A2+A1", "A1^3", "A1^2+<-4>", "A4", "D4", "A3+A1", "A2^2", "A2+A1^2", "A1^4", "A1^3+<-4>"];
    let mut lattices: Vec<GramLattice> = exprs.iter().map(|e| make_standard(e).unwrap()).collect();
    // the same lattices in scrambled bases
    for e in exprs {
        let l = make_standard(e).unwrap();
        let u = random_unimodular(&mut r, l.rank());
        let g = u.mul(l.gram()).unwrap().mul(&u.transpose()).unwrap();
        lattices.push(GramLattice::new(g, format!("{e} scrambled")).unwrap());
    }
    for l in &lattices {
        for norm in [-2, -4, -6, -8] {
            let mut got = short_vectors(l, norm).unwrap().vectors;
            got.sort();
            assert_eq!(got, box_oracle(l, norm), "{} norm {norm}", l.label());
        }
    }
}

fn all_irreducible() -> Vec<String> {
    let mut v: Vec<String> = (1..=17).map(|n| format!("A{n}")).collect();
    v.extend((4..=17).map(|n| format!("D{n}")));
    v.extend(["E6", "E7", "E8"].map(String::from));
    v
}

pub fn ade_round_trip() {
    for e in all_irreducible() {
        let t: RootSystemType = e.parse().unwrap();
        assert_eq!(identify_ade(&make_standard(&e).unwrap()).unwrap(), t, "{e}");
    }
    let mut r = rng(4);
    let pieces = ["A1", "A2", "A3", "A4", "A5", "A7", "D4", "D5", "D6", "E6", "E7", "E8"];
    for _ in 0..60 {
        let mut parts = Vec::new();
        let mut rank = 0;
        loop {
            let p = pieces[r.gen_range(0..pieces.len())];
            let k: usize = p[1..].parse().unwrap();
            if rank + k > 17 {
                break;
            }
            rank += k;
            parts.push(p);
        }
        if parts.is_empty() {
            continue;
        }
        let expr = parts.join("+");
        let want: RootSystemType = expr.parse().unwrap();
        assert_eq!(identify_ade(&make_standard(&expr).unwrap()).unwrap(), want, "{expr}");
    }
}
