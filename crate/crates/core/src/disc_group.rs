//! Orthogonal groups `O(q)` of small discriminant forms and their orbits.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc::{DiscClass, DiscriminantForm};
use crate::error::{LatticeError, Result};

/// Action on `A_L`, stored as the images of the form's generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiscIsometry {
    pub images: Vec<Vec<i64>>,
}

/// Which subgroup of `O(q)` acts: all of it, the stabilizer of a marked
/// class, or the subgroup acting trivially on the discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Full,
    Stabilizer(DiscClass),
    TrivialOnDisc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupConfig {
    /// Largest `ℓ` for exhaustive search over `GL(ℓ, F2)`.
    pub max_two_rank: usize,
    /// Largest `|A_L|` for backtracking over generator images.
    pub max_generic_order: u128,
}

impl Default for GroupConfig {
    fn default() -> Self {
        Self { max_two_rank: 5, max_generic_order: 1 << 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalGroup {
    /// Canonically sorted; the identity comes first among equals.
    pub elements: Vec<DiscIsometry>,
    /// Candidate maps examined by the search.
    pub candidates: u64,
    pub method: String,
}

impl OrthogonalGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

impl DiscIsometry {
    pub fn identity(d: &DiscriminantForm) -> Self {
        let k = d.invariant_factors().len();
        Self { images: (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect() }
    }

    pub fn apply_coeffs(&self, factors: &[i64], c: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; factors.len()];
        for (ci, img) in c.iter().zip(&self.images) {
            if *ci == 0 {
                continue;
            }
            for (o, (x, d)) in out.iter_mut().zip(img.iter().zip(factors)) {
                *o = (*o + ci * x).rem_euclid(*d);
            }
        }
        out
    }

    pub fn apply(&self, d: &DiscriminantForm, x: &DiscClass) -> Result<DiscClass> {
        if !d.owns(x) {
            return Err(LatticeError::MismatchedParents);
        }
        d.class(&self.apply_coeffs(d.invariant_factors(), x.coeffs()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self, factors: &[i64]) -> Self {
        Self { images: other.images.iter().map(|img| self.apply_coeffs(factors, img)).collect() }
    }
}

pub fn disc_orthogonal_group(d: &DiscriminantForm) -> Result<OrthogonalGroup> {
    disc_orthogonal_group_with(d, GroupConfig::default())
}

pub fn disc_orthogonal_group_with(d: &DiscriminantForm, cfg: GroupConfig) -> Result<OrthogonalGroup> {
    let k = d.invariant_factors().len();
    if k == 0 {
        return Ok(OrthogonalGroup { elements: vec![DiscIsometry { images: vec![] }], candidates: 1, method: "trivial".into() });
    }
    if d.is_two_elementary() && k <= cfg.max_two_rank {
        return Ok(two_elementary_brute_force(d));
    }
    if d.order() <= cfg.max_generic_order {
        return Ok(backtrack(d));
    }
    let bound = if d.is_two_elementary() { 1u128 << cfg.max_two_rank } else { cfg.max_generic_order };
    Err(LatticeError::TooLarge { size: d.order(), bound })
}

fn mask_coeffs(mask: u32, k: usize) -> Vec<i64> {
    (0..k).map(|i| i64::from((mask >> i) & 1 == 1)).collect()
}

/// Every invertible `ℓ × ℓ` matrix over `F2` is tested against `q` on the
/// basis and `b` on basis pairs.
fn two_elementary_brute_force(d: &DiscriminantForm) -> OrthogonalGroup {
    let k = d.invariant_factors().len();
    let size = 1usize << k;
    let q: Vec<i128> = (0..size as u32).map(|m| d.q_num(&mask_coeffs(m, k))).collect();
    let b: Vec<Vec<i128>> = (0..size as u32)
        .map(|x| (0..size as u32).map(|y| d.b_num(&mask_coeffs(x, k), &mask_coeffs(y, k))).collect())
        .collect();
    let basis: Vec<u32> = (0..k).map(|i| 1u32 << i).collect();

    struct Search<'a> {
        k: usize,
        q: &'a [i128],
        b: &'a [Vec<i128>],
        basis: &'a [u32],
    }

    impl Search<'_> {
        fn rec(&self, rows: &mut Vec<u32>, span: &mut Vec<bool>, found: &mut Vec<Vec<u32>>, count: &mut u64) {
            if rows.len() == self.k {
                *count += 1;
                let ok = (0..self.k).all(|i| {
                    self.q[rows[i] as usize] == self.q[self.basis[i] as usize]
                        && (0..i).all(|j| self.b[rows[i] as usize][rows[j] as usize] == self.b[self.basis[i] as usize][self.basis[j] as usize])
                });
                if ok {
                    found.push(rows.clone());
                }
                return;
            }
            for v in 1..(1u32 << self.k) {
                if span[v as usize] {
                    continue;
                }
                let old = span.clone();
                let cur: Vec<usize> = (0..span.len()).filter(|&s| old[s]).collect();
                for s in cur {
                    span[s ^ v as usize] = true;
                }
                rows.push(v);
                self.rec(rows, span, found, count);
                rows.pop();
                *span = old;
            }
        }
    }

    let search = Search { k, q: &q, b: &b, basis: &basis };
    let (found, count) = (1..(1u32 << k))
        .into_par_iter()
        .map(|first| {
            let mut span = vec![false; size];
            span[0] = true;
            span[first as usize] = true;
            let mut rows = vec![first];
            let mut found = Vec::new();
            let mut count = 0;
            search.rec(&mut rows, &mut span, &mut found, &mut count);
            (found, count)
        })
        .reduce(|| (Vec::new(), 0), |mut a, b| {
            a.0.extend(b.0);
            (a.0, a.1 + b.1)
        });
    let mut elements: Vec<DiscIsometry> = found
        .into_iter()
        .map(|rows| DiscIsometry { images: rows.iter().map(|&m| mask_coeffs(m, k)).collect() })
        .collect();
    elements.sort();
    OrthogonalGroup { elements, candidates: count, method: "gl2-brute-force".into() }
}

fn backtrack(d: &DiscriminantForm) -> OrthogonalGroup {
    let factors = d.invariant_factors().to_vec();
    let k = factors.len();
    let all: Vec<Vec<i64>> = d.classes().map(|c| c.coeffs().to_vec()).collect();
    let gens: Vec<Vec<i64>> = (0..k).map(|i| d.generator_class(i).coeffs().to_vec()).collect();
    let order = all.len();
    let mut elements = Vec::new();
    let mut count = 0u64;
    let mut images: Vec<Vec<i64>> = Vec::new();

    fn killed_by(c: &[i64], m: i64, factors: &[i64]) -> bool {
        c.iter().zip(factors).all(|(x, d)| (x * m) % d == 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        d: &DiscriminantForm,
        factors: &[i64],
        all: &[Vec<i64>],
        gens: &[Vec<i64>],
        images: &mut Vec<Vec<i64>>,
        out: &mut Vec<DiscIsometry>,
        count: &mut u64,
        order: usize,
    ) {
        let i = images.len();
        if i == gens.len() {
            *count += 1;
            let iso = DiscIsometry { images: images.clone() };
            let mut seen = BTreeSet::new();
            for c in all {
                seen.insert(iso.apply_coeffs(factors, c));
            }
            if seen.len() == order {
                out.push(iso);
            }
            return;
        }
        let qi = d.q_num(&gens[i]);
        for y in all {
            if !killed_by(y, factors[i], factors) || d.q_num(y) != qi {
                continue;
            }
            if (0..i).any(|j| d.b_num(y, &images[j]) != d.b_num(&gens[i], &gens[j])) {
                continue;
            }
            images.push(y.clone());
            rec(d, factors, all, gens, images, out, count, order);
            images.pop();
        }
    }

    rec(d, &factors, &all, &gens, &mut images, &mut elements, &mut count, order);
    elements.sort();
    OrthogonalGroup { elements, candidates: count, method: "backtracking".into() }
}

/// Elements of the subgroup selected by `spec`.
pub fn realize(d: &DiscriminantForm, group: &OrthogonalGroup, spec: &GroupSpec) -> Result<Vec<DiscIsometry>> {
    match spec {
        GroupSpec::Full => Ok(group.elements.clone()),
        GroupSpec::TrivialOnDisc => Ok(vec![DiscIsometry::identity(d)]),
        GroupSpec::Stabilizer(m) => {
            if !d.owns(m) {
                return Err(LatticeError::MismatchedParents);
            }
            let mut out = Vec::new();
            for g in &group.elements {
                if g.apply(d, m)? == *m {
                    out.push(g.clone());
                }
            }
            Ok(out)
        }
    }
}

/// Orbits of the filtered classes, each sorted, listed by smallest member.
pub fn orbits_on_classes(
    d: &DiscriminantForm,
    group: &OrthogonalGroup,
    spec: &GroupSpec,
    filter: impl Fn(&DiscClass) -> bool,
) -> Result<Vec<Vec<DiscClass>>> {
    let elems = realize(d, group, spec)?;
    let mut done = BTreeSet::new();
    let mut orbits = Vec::new();
    for x in d.classes() {
        if done.contains(&x) || !filter(&x) {
            continue;
        }
        let mut orbit = BTreeSet::new();
        for g in &elems {
            let y = g.apply(d, &x)?;
            if filter(&y) {
                orbit.insert(y);
            }
        }
        done.extend(orbit.iter().cloned());
        orbits.push(orbit.into_iter().collect());
    }
    Ok(orbits)
}

/// Checks closure, identity, and preservation of `q` and `b` on all classes.
pub fn verify_group(d: &DiscriminantForm, group: &OrthogonalGroup) -> Result<bool> {
    let factors = d.invariant_factors();
    let set: BTreeSet<&DiscIsometry> = group.elements.iter().collect();
    if !set.contains(&DiscIsometry::identity(d)) || set.len() != group.elements.len() {
        return Ok(false);
    }
    for g in &group.elements {
        for h in &group.elements {
            if !set.contains(&g.compose(h, factors)) {
                return Ok(false);
            }
        }
    }
    let classes: Vec<DiscClass> = d.classes().collect();
    for g in &group.elements {
        let imgs: Vec<DiscClass> = classes.iter().map(|x| g.apply(d, x)).collect::<Result<_>>()?;
        for (x, gx) in classes.iter().zip(&imgs) {
            if d.q_value(x)? != d.q_value(gx)? {
                return Ok(false);
            }
            for (y, gy) in classes.iter().zip(&imgs) {
                if d.b_value(x, y)? != d.b_value(gx, gy)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::discriminant_form;
    use crate::expr::make_standard;

    #[test]
    fn a1_group_is_trivial() {
        let d = discriminant_form(&make_standard("A1").unwrap()).unwrap();
        let g = disc_orthogonal_group(&d).unwrap();
        assert_eq!(g.order(), 1);
        let u = discriminant_form(&make_standard("U").unwrap()).unwrap();
        assert_eq!(disc_orthogonal_group(&u).unwrap().order(), 1);
    }

    #[test]
    fn d4_form_has_s3_symmetry() {
        let d = discriminant_form(&make_standard("D4").unwrap()).unwrap();
        let g = disc_orthogonal_group(&d).unwrap();
        assert_eq!(g.order(), 6);
        assert!(verify_group(&d, &g).unwrap());
    }

    #[test]
    fn generic_backtracking_on_a2() {
        let d = discriminant_form(&make_standard("A2+A2").unwrap()).unwrap();
        let g = disc_orthogonal_group(&d).unwrap();
        assert_eq!(g.method, "backtracking");
        assert!(verify_group(&d, &g).unwrap());
        // ±1 on each A2 factor plus the swap
        assert_eq!(g.order(), 8);
    }

    #[test]
    fn too_large_is_reported() {
        let d = discriminant_form(&make_standard("A1^6").unwrap()).unwrap();
        let cfg = GroupConfig { max_two_rank: 5, max_generic_order: 16 };
        assert!(matches!(disc_orthogonal_group_with(&d, cfg), Err(LatticeError::TooLarge { .. })));
    }
}
