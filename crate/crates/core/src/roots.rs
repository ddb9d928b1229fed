//! Root systems of negative definite lattices and ADE identification.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::expr::ade_gram;
use crate::fincke::vectors_of_norm;
use crate::lattice::GramLattice;
use crate::matrix::IntMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    D,
    E,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::D => 'D',
            Family::E => 'E',
        }
    }
}

/// A multiset of ADE components, e.g. `E7+A1^4`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RootSystemType {
    components: BTreeMap<(Family, usize), usize>,
}

impl RootSystemType {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(f: Family, n: usize) -> Result<Self> {
        let mut t = Self::empty();
        t.add(f, n, 1)?;
        Ok(t)
    }

    pub fn from_components(parts: &[(Family, usize, usize)]) -> Result<Self> {
        let mut t = Self::empty();
        for &(f, n, m) in parts {
            t.add(f, n, m)?;
        }
        Ok(t)
    }

    /// Adds `m` copies, normalizing `D2 = A1²` and `D3 = A3`.
    pub fn add(&mut self, f: Family, n: usize, m: usize) -> Result<()> {
        if m == 0 {
            return Ok(());
        }
        match (f, n) {
            (_, 0) => return Err(LatticeError::NotRootSystem("rank 0 component".into())),
            (Family::D, 1) => return Err(LatticeError::NotRootSystem("D1".into())),
            (Family::D, 2) => return self.add(Family::A, 1, 2 * m),
            (Family::D, 3) => return self.add(Family::A, 3, m),
            (Family::E, k) if !(6..=8).contains(&k) => return Err(LatticeError::NotRootSystem(format!("E{k}"))),
            _ => {}
        }
        *self.components.entry((f, n)).or_default() += m;
        Ok(())
    }

    pub fn merged(&self, other: &Self) -> Self {
        let mut t = self.clone();
        for (&(f, n), &m) in &other.components {
            *t.components.entry((f, n)).or_default() += m;
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.components.iter().map(|(&(_, n), &m)| n * m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Number of roots `|Φ|`.
    pub fn root_count(&self) -> usize {
        self.components
            .iter()
            .map(|(&(f, n), &m)| {
                m * match f {
                    Family::A => n * (n + 1),
                    Family::D => 2 * n * (n - 1),
                    Family::E => [72, 126, 240][n - 6],
                }
            })
            .sum()
    }

    /// Components with multiplicity, largest first (E before D before A).
    pub fn components(&self) -> Vec<(Family, usize, usize)> {
        let mut v: Vec<_> = self.components.iter().map(|(&(f, n), &m)| (f, n, m)).collect();
        v.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
        v
    }

    /// Each component once per copy, in display order.
    pub fn flat(&self) -> Vec<(Family, usize)> {
        self.components().into_iter().flat_map(|(f, n, m)| std::iter::repeat_n((f, n), m)).collect()
    }

    /// Negated Cartan matrix of the whole system, blocks in `flat()` order.
    pub fn gram(&self) -> Result<IntMatrix> {
        let blocks: Vec<IntMatrix> = self.flat().into_iter().map(|(f, n)| ade_gram(f.letter(), n)).collect::<Result<_>>()?;
        let refs: Vec<&IntMatrix> = blocks.iter().collect();
        Ok(IntMatrix::block_diag(&refs))
    }

    pub fn lattice(&self) -> Result<GramLattice> {
        GramLattice::new(self.gram()?, self.to_string())
    }

    /// Subscript/superscript rendering, e.g. `E₇⊕A₁⁴`.
    pub fn pretty(&self) -> String {
        if self.is_empty() {
            return "∅".into();
        }
        const SUB: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
        const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
        let digits = |k: usize, table: &[char; 10]| k.to_string().chars().map(|c| table[c as usize - '0' as usize]).collect::<String>();
        self.components()
            .iter()
            .map(|&(f, n, m)| {
                let mut s = format!("{}{}", f.letter(), digits(n, &SUB));
                if m > 1 {
                    s.push_str(&digits(m, &SUP));
                }
                s
            })
            .collect::<Vec<_>>()
            .join("⊕")
    }
}

impl fmt::Display for RootSystemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .components()
            .iter()
            .map(|&(fam, n, m)| if m > 1 { format!("{}{}^{}", fam.letter(), n, m) } else { format!("{}{}", fam.letter(), n) })
            .collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for RootSystemType {
    type Err = LatticeError;
    fn from_str(s: &str) -> Result<Self> {
        let mut t = Self::empty();
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(t);
        }
        for part in s.split(['+', '⊕']) {
            let part = part.trim();
            let mut chars = part.chars();
            let fam = match chars.next() {
                Some('A') => Family::A,
                Some('D') => Family::D,
                Some('E') => Family::E,
                _ => return Err(LatticeError::Parse(format!("bad component `{part}`"))),
            };
            let rest: String = chars.collect();
            let (n, m) = match rest.split_once('^') {
                Some((a, b)) => (a, b),
                None => (rest.as_str(), "1"),
            };
            let n: usize = n.parse().map_err(|_| LatticeError::Parse(format!("bad rank in `{part}`")))?;
            let m: usize = m.parse().map_err(|_| LatticeError::Parse(format!("bad multiplicity in `{part}`")))?;
            t.add(fam, n, m)?;
        }
        Ok(t)
    }
}

impl Serialize for RootSystemType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RootSystemType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Roots of a lattice, in lattice coordinates, canonically sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSet {
    pub vectors: Vec<Vec<i64>>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// All vectors of the given negative even norm.
pub fn short_vectors(l: &GramLattice, norm: i64) -> Result<RootSet> {
    Ok(RootSet { vectors: vectors_of_norm(l, norm)? })
}

/// `(x, L) ⊆ (r²/2)ℤ`: the reflection in `r` preserves `L`.
pub fn is_reflective(l: &GramLattice, r: &[i64]) -> bool {
    let n = l.norm(r);
    if n >= 0 || n % 2 != 0 {
        return false;
    }
    let half = -n / 2;
    l.pairings(r).iter().all(|p| p % half == 0)
}

/// Norm −2 vectors and reflective norm −4 vectors.
pub fn roots(l: &GramLattice) -> Result<RootSet> {
    let mut v = vectors_of_norm(l, -2)?;
    v.extend(vectors_of_norm(l, -4)?.into_iter().filter(|r| is_reflective(l, r)));
    v.sort();
    Ok(RootSet { vectors: v })
}

fn lex_positive(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Simple roots of the positive system cut out by lexicographic order on
/// coordinates. Only norm −2 roots are used.
pub fn simple_system(l: &GramLattice, roots: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let all: HashSet<&[i64]> = roots.iter().map(Vec::as_slice).collect();
    for r in roots {
        let neg: Vec<i64> = r.iter().map(|x| -x).collect();
        if !all.contains(neg.as_slice()) {
            return Err(LatticeError::NotRootSystem("not closed under negation".into()));
        }
    }
    let pos: Vec<&Vec<i64>> = roots.iter().filter(|r| l.norm(r) == -2 && lex_positive(r)).collect();
    let pos_set: HashSet<&[i64]> = pos.iter().map(|r| r.as_slice()).collect();
    let mut simple = Vec::new();
    let mut diff = vec![0i64; l.rank()];
    'next: for r in &pos {
        for s in &pos {
            for ((d, a), b) in diff.iter_mut().zip(r.iter()).zip(s.iter()) {
                *d = a - b;
            }
            if pos_set.contains(diff.as_slice()) {
                continue 'next;
            }
        }
        simple.push((*r).clone());
    }
    for (i, a) in simple.iter().enumerate() {
        for b in &simple[i + 1..] {
            if l.pair(a, b) < 0 {
                return Err(LatticeError::NotRootSystem("simple roots pair negatively".into()));
            }
        }
    }
    Ok(simple)
}

/// ADE type of a simply laced simple system given by its Gram matrix.
pub fn identify_simple_gram(g: &IntMatrix) -> Result<RootSystemType> {
    let n = g.rows();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        if g[(i, i)] != -2 {
            return Err(LatticeError::NotRootSystem(format!("simple root of norm {}", g[(i, i)])));
        }
        for j in 0..n {
            if i == j || g[(i, j)] == 0 {
                continue;
            }
            if g[(i, j)] != 1 {
                return Err(LatticeError::NotRootSystem(format!("pairing {} between simple roots", g[(i, j)])));
            }
            adj[i].push(j);
        }
    }
    let mut t = RootSystemType::empty();
    for comp in components(&adj) {
        let (f, k) = classify_tree(&comp, &adj)?;
        t.add(f, k, 1)?;
    }
    Ok(t)
}

pub(crate) fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![s];
        seen[s] = true;
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}

/// Dynkin type of a connected simply laced graph.
pub(crate) fn classify_tree(comp: &[usize], adj: &[Vec<usize>]) -> Result<(Family, usize)> {
    let k = comp.len();
    let edges: usize = comp.iter().map(|&v| adj[v].len()).sum::<usize>() / 2;
    if edges != k - 1 {
        return Err(LatticeError::NotRootSystem("Dynkin graph has a cycle".into()));
    }
    let branch: Vec<usize> = comp.iter().copied().filter(|&v| adj[v].len() > 2).collect();
    if branch.is_empty() {
        return Ok((Family::A, k));
    }
    if branch.len() > 1 || adj[branch[0]].len() > 3 {
        return Err(LatticeError::NotRootSystem("not of ADE shape".into()));
    }
    let c = branch[0];
    let mut arms: Vec<usize> = adj[c]
        .iter()
        .map(|&start| {
            let (mut prev, mut cur, mut len) = (c, start, 1);
            while let Some(&nx) = adj[cur].iter().find(|&&w| w != prev) {
                prev = cur;
                cur = nx;
                len += 1;
            }
            len
        })
        .collect();
    arms.sort();
    match (arms[0], arms[1], arms[2]) {
        (1, 1, m) => Ok((Family::D, m + 3)),
        (1, 2, 2) => Ok((Family::E, 6)),
        (1, 2, 3) => Ok((Family::E, 7)),
        (1, 2, 4) => Ok((Family::E, 8)),
        _ => Err(LatticeError::NotRootSystem("not of ADE shape".into())),
    }
}

/// Type of the root system spanned by the given simple roots.
pub fn identify_simple_roots(l: &GramLattice, simple: &[Vec<i64>]) -> Result<RootSystemType> {
    let rows: Vec<Vec<i64>> = simple.iter().map(|a| simple.iter().map(|b| l.pair(a, b)).collect()).collect();
    if rows.is_empty() {
        return Ok(RootSystemType::empty());
    }
    identify_simple_gram(&IntMatrix::from_rows(rows)?)
}

/// Type of the (−2)-root system of a negative definite lattice.
pub fn identify_ade(l: &GramLattice) -> Result<RootSystemType> {
    let r = vectors_of_norm(l, -2)?;
    let s = simple_system(l, &r)?;
    identify_simple_roots(l, &s)
}

/// Roots of `l` orthogonal to every vector in `sub`.
pub fn orthogonal_roots(l: &GramLattice, roots: &[Vec<i64>], sub: &[Vec<i64>]) -> Vec<Vec<i64>> {
    roots.iter().filter(|r| sub.iter().all(|s| l.pair(r, s) == 0)).cloned().collect()
}

/// Type of a root subsystem given as a closed set of (−2)-roots.
pub fn identify_root_subset(l: &GramLattice, roots: &[Vec<i64>]) -> Result<RootSystemType> {
    let s = simple_system(l, roots)?;
    identify_simple_roots(l, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::make_standard;

    #[test]
    fn parse_and_display() {
        let t: RootSystemType = "E7+A1^4".parse().unwrap();
        assert_eq!(t.rank(), 11);
        assert_eq!(t.to_string(), "E7+A1^4");
        assert_eq!(t.pretty(), "E₇⊕A₁⁴");
        let d: RootSystemType = "D2+D3".parse().unwrap();
        assert_eq!(d.to_string(), "A3+A1^2");
        assert!("E9".parse::<RootSystemType>().is_err());
    }

    #[test]
    fn identify_round_trip() {
        for s in ["E7+A1^4", "D4", "E8", "A5+D5+E6", "D6^2+A1"] {
            let l = make_standard(s).unwrap();
            let t: RootSystemType = s.parse().unwrap();
            assert_eq!(identify_ade(&l).unwrap(), t, "{s}");
        }
    }

    #[test]
    fn root_sets() {
        let a = make_standard("A1^5").unwrap();
        assert_eq!(short_vectors(&a, -2).unwrap().len(), 10);
        // r_i ± r_j have norm −4 and divisibility 2
        assert_eq!(roots(&a).unwrap().len(), 50);
        assert_eq!(roots(&make_standard("<-4>").unwrap()).unwrap().len(), 2);
        assert_eq!(roots(&make_standard("E8+A1").unwrap()).unwrap().len(), 242);
    }

    #[test]
    fn simple_systems() {
        let l = make_standard("A1^4").unwrap();
        let r = short_vectors(&l, -2).unwrap();
        assert_eq!(simple_system(&l, &r.vectors).unwrap().len(), 4);
        let e8 = make_standard("E8").unwrap();
        let s = simple_system(&e8, &short_vectors(&e8, -2).unwrap().vectors).unwrap();
        assert_eq!(identify_simple_roots(&e8, &s).unwrap().to_string(), "E8");
    }

    #[test]
    fn non_simply_laced_rejected() {
        let g = IntMatrix::from_rows(vec![vec![-2, 2], vec![2, -2]]).unwrap();
        assert!(identify_simple_gram(&g).is_err());
    }
}
