//! Coxeter diagrams of systems of roots with nonnegative mutual pairings,
//! their parabolic subdiagrams and the finite-volume criterion.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::lattice::GramLattice;
use crate::matrix::{gcd_slice, IntMatrix};
use crate::snf::integer_kernel;

/// Largest diagram the subset enumerations accept (vertex sets are bitmasks).
pub const MAX_VERTICES: usize = 128;

type Mask = u128;

pub(crate) mod ratio_str {
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Ratio<i64>, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<Ratio<i64>>().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeClass {
    None,
    /// `g = 1/2`
    Single,
    /// `0 < g < 1`, `g ≠ 1/2`; carries `g²`.
    Labeled,
    /// `g = 1`
    Dashed,
    /// `g > 1`
    Bold,
}

impl EdgeClass {
    pub fn of(g_sq: Ratio<i64>) -> Self {
        if g_sq.is_zero() {
            EdgeClass::None
        } else if g_sq == Ratio::new(1, 4) {
            EdgeClass::Single
        } else if g_sq == Ratio::from_integer(1) {
            EdgeClass::Dashed
        } else if g_sq > Ratio::from_integer(1) {
            EdgeClass::Bold
        } else {
            EdgeClass::Labeled
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoxeterVertex {
    pub name: String,
    pub norm: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoxeterEdge {
    pub i: usize,
    pub j: usize,
    pub pairing: i64,
    #[serde(with = "ratio_str")]
    pub g_sq: Ratio<i64>,
    pub class: EdgeClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoxeterDiagram {
    pub vertices: Vec<CoxeterVertex>,
    /// Nonzero pairings only, `i < j`.
    pub edges: Vec<CoxeterEdge>,
    gram: Vec<Vec<i64>>,
}

/// How vertices and edges are compared in isomorphism tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    /// Vertex norms and exact pairings.
    Exact,
    /// Edge classes only.
    Classes,
}

impl CoxeterDiagram {
    /// From named vertices and their pairing matrix (norms on the diagonal).
    pub fn from_gram(names: Vec<String>, gram: Vec<Vec<i64>>) -> Result<Self> {
        Self::build(names, gram, None)
    }

    fn build(names: Vec<String>, gram: Vec<Vec<i64>>, roots: Option<Vec<Vec<i64>>>) -> Result<Self> {
        let n = names.len();
        if n > MAX_VERTICES {
            return Err(LatticeError::TooLarge { size: n as u128, bound: MAX_VERTICES as u128 });
        }
        if gram.len() != n || gram.iter().any(|r| r.len() != n) {
            return Err(LatticeError::NotSquare { rows: gram.len(), cols: gram.first().map_or(0, Vec::len) });
        }
        for i in 0..n {
            if gram[i][i] >= 0 {
                return Err(LatticeError::InvalidVector(format!("vertex {} has norm {} >= 0", names[i], gram[i][i])));
            }
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::NotSymmetric);
                }
                if i != j && gram[i][j] < 0 {
                    return Err(LatticeError::InvalidVector(format!("negative pairing between {} and {}", names[i], names[j])));
                }
            }
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let p = gram[i][j];
                if p != 0 {
                    let g_sq = Ratio::new(p * p, gram[i][i] * gram[j][j]);
                    edges.push(CoxeterEdge { i, j, pairing: p, g_sq, class: EdgeClass::of(g_sq) });
                }
            }
        }
        let vertices = names
            .into_iter()
            .enumerate()
            .map(|(i, name)| CoxeterVertex { name, norm: gram[i][i], root: roots.as_ref().map(|r| r[i].clone()) })
            .collect();
        Ok(Self { vertices, edges, gram })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn names(&self) -> Vec<&str> {
        self.vertices.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn g_sq(&self, i: usize, j: usize) -> Ratio<i64> {
        let p = self.gram[i][j];
        Ratio::new(p * p, self.gram[i][i] * self.gram[j][j])
    }

    pub fn edge(&self, i: usize, j: usize) -> EdgeClass {
        if i == j {
            EdgeClass::None
        } else {
            EdgeClass::of(self.g_sq(i, j))
        }
    }

    /// Subdiagram on the given vertices, in that order.
    pub fn induced(&self, keep: &[usize]) -> Result<Self> {
        let names = keep.iter().map(|&i| self.vertices[i].name.clone()).collect();
        let gram = keep.iter().map(|&i| keep.iter().map(|&j| self.gram[i][j]).collect()).collect();
        let roots = keep.iter().map(|&i| self.vertices[i].root.clone()).collect::<Option<Vec<_>>>();
        Self::build(names, gram, roots)
    }

    /// Graphviz rendering: solid for single, dashed for `g = 1`, bold for
    /// `g > 1`, and an exact `g²` label otherwise.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph coxeter {\n  node [shape=circle, label=\"\", width=0.15, style=filled, fillcolor=black];\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let extra = if v.norm != -2 { format!(" ({})", v.norm) } else { String::new() };
            out.push_str(&format!("  v{i} [xlabel=\"{}{}\"];\n", v.name, extra));
        }
        for e in &self.edges {
            let style = match e.class {
                EdgeClass::None => continue,
                EdgeClass::Single => String::new(),
                EdgeClass::Dashed => " [style=dashed]".into(),
                EdgeClass::Bold => " [style=bold, penwidth=3]".into(),
                EdgeClass::Labeled => format!(" [label=\"g²={}\"]", e.g_sq),
            };
            out.push_str(&format!("  v{} -- v{}{};\n", e.i, e.j, style));
        }
        out.push_str("}\n");
        out
    }

    fn labels(&self, m: Matching) -> Vec<Vec<i64>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match m {
                        Matching::Exact => self.gram[i][j],
                        Matching::Classes if i == j => 0,
                        Matching::Classes => self.edge(i, j) as i64,
                    })
                    .collect()
            })
            .collect()
    }

    /// All vertex bijections `self → other` preserving the chosen labels;
    /// stops after `limit` maps.
    pub fn isomorphisms(&self, other: &Self, m: Matching, limit: usize) -> Vec<Vec<usize>> {
        let n = self.len();
        if other.len() != n {
            return Vec::new();
        }
        let a = self.labels(m);
        let b = other.labels(m);
        let inv = |l: &[Vec<i64>], i: usize| {
            let mut row: Vec<i64> = l[i].iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
            row.sort_unstable();
            (l[i][i], row)
        };
        let ia: Vec<_> = (0..n).map(|i| inv(&a, i)).collect();
        let ib: Vec<_> = (0..n).map(|i| inv(&b, i)).collect();
        let mut sa = ia.clone();
        let mut sb = ib.clone();
        sa.sort();
        sb.sort();
        if sa != sb {
            return Vec::new();
        }
        // most constrained vertices first: rarest invariant, then by adjacency to placed ones
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        while order.len() < n {
            let next = (0..n)
                .filter(|&i| !placed[i])
                .max_by_key(|&i| {
                    let links = order.iter().filter(|&&j| a[i][j] != 0).count();
                    let rarity = ib.iter().filter(|x| **x == ia[i]).count();
                    (links, usize::MAX - rarity, usize::MAX - i)
                })
                .expect("unplaced vertex");
            placed[next] = true;
            order.push(next);
        }
        let mut found = Vec::new();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];

        #[allow(clippy::too_many_arguments)]
        fn rec(
            k: usize,
            order: &[usize],
            a: &[Vec<i64>],
            b: &[Vec<i64>],
            ia: &[(i64, Vec<i64>)],
            ib: &[(i64, Vec<i64>)],
            map: &mut [usize],
            used: &mut [bool],
            found: &mut Vec<Vec<usize>>,
            limit: usize,
        ) {
            if found.len() >= limit {
                return;
            }
            if k == order.len() {
                found.push(map.to_vec());
                return;
            }
            let i = order[k];
            for c in 0..b.len() {
                if used[c] || ia[i] != ib[c] {
                    continue;
                }
                if order[..k].iter().any(|&j| a[i][j] != b[c][map[j]]) {
                    continue;
                }
                map[i] = c;
                used[c] = true;
                rec(k + 1, order, a, b, ia, ib, map, used, found, limit);
                used[c] = false;
                map[i] = usize::MAX;
            }
        }
        rec(0, &order, &a, &b, &ia, &ib, &mut map, &mut used, &mut found, limit);
        found
    }

    pub fn is_isomorphic(&self, other: &Self, m: Matching) -> bool {
        !self.isomorphisms(other, m, 1).is_empty()
    }

    pub fn automorphisms(&self, m: Matching) -> Vec<Vec<usize>> {
        self.isomorphisms(self, m, usize::MAX)
    }
}

/// Diagram of the given roots of `l`, named `r0, r1, …`.
pub fn coxeter_diagram(l: &GramLattice, roots: &[Vec<i64>]) -> Result<CoxeterDiagram> {
    let names = (0..roots.len()).map(|i| format!("r{i}")).collect();
    coxeter_diagram_named(l, roots, names)
}

pub fn coxeter_diagram_named(l: &GramLattice, roots: &[Vec<i64>], names: Vec<String>) -> Result<CoxeterDiagram> {
    if names.len() != roots.len() {
        return Err(LatticeError::Dimension { expected: roots.len(), got: names.len() });
    }
    for r in roots {
        if r.len() != l.rank() {
            return Err(LatticeError::Dimension { expected: l.rank(), got: r.len() });
        }
    }
    let gram = roots.iter().map(|a| roots.iter().map(|b| l.pair(a, b)).collect()).collect();
    CoxeterDiagram::build(names, gram, Some(roots.to_vec()))
}

/// A connected affine (extended Dynkin) diagram, e.g. `Ẽ₈`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AffineComponent {
    /// `A`, `B`, `C`, `D`, `E`, `F`, `G`, or `X` for an unrecognised shape.
    pub family: char,
    pub n: usize,
}

const SUB: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn digits(k: usize, table: &[char; 10]) -> String {
    k.to_string().chars().map(|c| table[c as usize - '0' as usize]).collect()
}

impl AffineComponent {
    /// Rank `n`: one less than the vertex count.
    pub fn rank(&self) -> usize {
        self.n
    }

    fn sort_key(&self) -> (usize, std::cmp::Reverse<usize>) {
        let fam = "EFDCBGAX".find(self.family).unwrap_or(7);
        (fam, std::cmp::Reverse(self.n))
    }

    pub fn pretty(&self) -> String {
        let letter = match self.family {
            'A' => "Ã".to_string(),
            'E' => "Ẽ".to_string(),
            f => format!("{f}\u{303}"),
        };
        format!("{letter}{}", digits(self.n, &SUB))
    }
}

impl fmt::Display for AffineComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}~", self.family, self.n)
    }
}

/// `Ẽ₈⊕D̃₄⊕Ã₁`, with repeated components as powers.
pub fn affine_type_name(comps: &[AffineComponent]) -> String {
    let mut sorted = comps.to_vec();
    sorted.sort_by_key(|c| c.sort_key());
    let mut parts: Vec<(AffineComponent, usize)> = Vec::new();
    for c in sorted {
        match parts.last_mut() {
            Some((d, k)) if *d == c => *k += 1,
            _ => parts.push((c, 1)),
        }
    }
    parts
        .iter()
        .map(|(c, k)| if *k > 1 { format!("{}{}", c.pretty(), digits(*k, &SUP)) } else { c.pretty() })
        .collect::<Vec<_>>()
        .join("⊕")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParabolicSubdiagram {
    pub vertices: Vec<usize>,
    pub names: Vec<String>,
    pub components: Vec<AffineComponent>,
    pub rank: usize,
    pub type_name: String,
    /// The isotropic vector fixed by the subdiagram, when roots are known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropic: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParabolicReport {
    /// Maximal parabolic subdiagrams.
    pub subdiagrams: Vec<ParabolicSubdiagram>,
    pub maximal_rank: usize,
    /// Type name of each maximal subdiagram with its multiplicity.
    pub classes: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteVolumeCertificate {
    pub holds: bool,
    pub dimension: usize,
    /// Elliptic subdiagrams of rank `dimension − 1` whose extensions were counted.
    pub elliptic_checked: usize,
    pub maximal_parabolics: Vec<ParabolicSubdiagram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Bitmask machinery over a diagram.
struct Structure<'a> {
    d: &'a CoxeterDiagram,
    n: usize,
    neg: Vec<Vec<i64>>,
    adj: Vec<Mask>,
    /// pairs allowed inside an elliptic subdiagram
    ell_ok: Vec<Mask>,
    /// pairs allowed inside an affine subdiagram
    aff_ok: Vec<Mask>,
}

fn bit(i: usize) -> Mask {
    1 << i
}

fn members(m: Mask) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    let mut x = m;
    while x != 0 {
        let i = x.trailing_zeros() as usize;
        out.push(i);
        x &= x - 1;
    }
    out
}

/// Leading principal minors by fraction-free elimination, stopping at the
/// first that is not positive. `None` on overflow.
fn minors_i128(m: &[Vec<i64>], idx: &[usize]) -> Option<Vec<i128>> {
    let c = idx.len();
    let mut a: Vec<Vec<i128>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j] as i128).collect()).collect();
    let mut prev: i128 = 1;
    let mut out = Vec::with_capacity(c);
    for k in 0..c {
        let p = a[k][k];
        out.push(p);
        if p <= 0 {
            return Some(out);
        }
        for i in k + 1..c {
            for j in k + 1..c {
                let v = a[i][j].checked_mul(p)?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = v / prev;
            }
        }
        prev = p;
    }
    Some(out)
}

fn minors_big(m: &[Vec<i64>], idx: &[usize]) -> Vec<BigInt> {
    let c = idx.len();
    let mut a: Vec<Vec<BigInt>> = idx.iter().map(|&i| idx.iter().map(|&j| BigInt::from(m[i][j])).collect()).collect();
    let mut prev = BigInt::from(1);
    let mut out = Vec::with_capacity(c);
    for k in 0..c {
        let p = a[k][k].clone();
        out.push(p.clone());
        if !p.is_positive() {
            return out;
        }
        for i in k + 1..c {
            for j in k + 1..c {
                a[i][j] = (&a[i][j] * &p - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = p;
    }
    out
}

/// Signs of the leading minors: `(all positive, last minor is zero after
/// positive predecessors)`.
fn minor_signs(m: &[Vec<i64>], idx: &[usize]) -> (bool, bool) {
    let c = idx.len();
    let sign_of = |v: Vec<i8>| {
        let pd = v.len() == c && v.iter().all(|&s| s > 0);
        let singular = v.len() == c && v[..c - 1].iter().all(|&s| s > 0) && v[c - 1] == 0;
        (pd, singular)
    };
    match minors_i128(m, idx) {
        Some(v) => sign_of(v.iter().map(|x| x.signum() as i8).collect()),
        None => sign_of(minors_big(m, idx).iter().map(|x| if x.is_positive() { 1 } else if x.is_zero() { 0 } else { -1 }).collect()),
    }
}

impl<'a> Structure<'a> {
    fn new(d: &'a CoxeterDiagram) -> Self {
        let n = d.len();
        let neg: Vec<Vec<i64>> = d.gram.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let mut adj = vec![0; n];
        let mut ell_ok = vec![0; n];
        let mut aff_ok = vec![0; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let g = d.g_sq(i, j);
                if !g.is_zero() {
                    adj[i] |= bit(j);
                }
                let coxeter = [Ratio::new(0, 1), Ratio::new(1, 4), Ratio::new(1, 2), Ratio::new(3, 4)].contains(&g);
                if coxeter {
                    ell_ok[i] |= bit(j);
                    aff_ok[i] |= bit(j);
                } else if g == Ratio::from_integer(1) {
                    aff_ok[i] |= bit(j);
                }
            }
        }
        Self { d, n, neg, adj, ell_ok, aff_ok }
    }

    /// Connected component of `v` inside `m`.
    fn component(&self, m: Mask, v: usize) -> Mask {
        let mut comp = bit(v);
        let mut frontier = bit(v);
        while frontier != 0 {
            let i = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = self.adj[i] & m & !comp;
            comp |= new;
            frontier |= new;
        }
        comp
    }

    /// Whether `s ∪ {v}` is elliptic, given that `s` is.
    fn extends_elliptic(&self, s: Mask, v: usize) -> bool {
        if s & bit(v) != 0 || self.ell_ok[v] & s & self.adj[v] != s & self.adj[v] {
            return false;
        }
        let comp = self.component(s | bit(v), v);
        let mut idx: Vec<usize> = members(comp & !bit(v));
        idx.push(v);
        minor_signs(&self.neg, &idx).0
    }

    /// All elliptic vertex subsets, the empty one included.
    fn elliptic_sets(&self) -> Vec<Mask> {
        let mut out = Vec::new();
        let mut stack: Vec<(Mask, usize)> = vec![(0, 0)];
        while let Some((s, start)) = stack.pop() {
            out.push(s);
            for v in start..self.n {
                if self.extends_elliptic(s, v) {
                    stack.push((s | bit(v), v + 1));
                }
            }
        }
        out
    }

    /// Connected affine subdiagrams, found as `S ∪ {v}` with `S` elliptic and
    /// the whole thing connected and singular.
    fn affine_components(&self, elliptic: &[Mask]) -> Vec<Mask> {
        let found: HashSet<Mask> = elliptic
            .par_iter()
            .filter(|&&s| s != 0 && self.component(s, s.trailing_zeros() as usize) == s)
            .flat_map_iter(|&s| {
                (0..self.n).filter_map(move |v| {
                    if s & bit(v) != 0 || self.adj[v] & s == 0 || self.aff_ok[v] & s != s {
                        return None;
                    }
                    let mut idx = members(s);
                    idx.push(v);
                    minor_signs(&self.neg, &idx).1.then_some(s | bit(v))
                })
            })
            .collect();
        let mut out: Vec<Mask> = found.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// Maximal sets of pairwise disjoint, non-adjacent affine components.
    fn maximal_parabolics(&self, affine: &[Mask]) -> Vec<Vec<usize>> {
        let k = affine.len();
        let reach: Vec<Mask> = affine.iter().map(|&c| members(c).iter().fold(c, |acc, &i| acc | self.adj[i])).collect();
        let compatible = |a: usize, b: usize| affine[a] & reach[b] == 0;
        let nbrs: Vec<Vec<usize>> = (0..k).map(|a| (0..k).filter(|&b| b != a && compatible(a, b)).collect()).collect();
        let mut out = Vec::new();
        bron_kerbosch(Vec::new(), (0..k).collect(), Vec::new(), &nbrs, &mut out);
        out.iter_mut().for_each(|c| c.sort_unstable());
        out.sort();
        out
    }

    fn describe(&self, comps: &[usize], affine: &[Mask]) -> ParabolicSubdiagram {
        let mut mask = 0;
        let mut components = Vec::new();
        for &c in comps {
            mask |= affine[c];
            components.push(self.name_affine(&members(affine[c])));
        }
        components.sort_by_key(|c| c.sort_key());
        let vertices = members(mask);
        let names = vertices.iter().map(|&i| self.d.vertices[i].name.clone()).collect();
        let rank = vertices.len() - comps.len();
        let type_name = affine_type_name(&components);
        let isotropic = comps.first().and_then(|&c| self.isotropic(&members(affine[c])));
        ParabolicSubdiagram { vertices, names, components, rank, type_name, isotropic }
    }

    /// Primitive isotropic vector `Σ kᵢ rᵢ` from the null vector of an affine component.
    fn isotropic(&self, nodes: &[usize]) -> Option<Vec<i64>> {
        let roots: Vec<&Vec<i64>> = nodes.iter().map(|&i| self.d.vertices[i].root.as_ref()).collect::<Option<_>>()?;
        let g = IntMatrix::from_rows(nodes.iter().map(|&i| nodes.iter().map(|&j| self.d.gram[i][j]).collect()).collect()).ok()?;
        let ker = integer_kernel(&g).ok()?;
        let mut k = ker.first()?.clone();
        if k.iter().any(|&x| x < 0) {
            k.iter_mut().for_each(|x| *x = -*x);
        }
        let dim = roots[0].len();
        let mut v = vec![0i64; dim];
        for (c, r) in k.iter().zip(&roots) {
            for (x, y) in v.iter_mut().zip(r.iter()) {
                *x += c * y;
            }
        }
        let g = gcd_slice(&v);
        if g == 0 {
            return None;
        }
        Some(v.iter().map(|x| x / g).collect())
    }

    fn m_value(&self, i: usize, j: usize) -> u32 {
        let g = self.d.g_sq(i, j);
        if g == Ratio::new(1, 4) {
            3
        } else if g == Ratio::new(1, 2) {
            4
        } else if g == Ratio::new(3, 4) {
            6
        } else if g == Ratio::from_integer(1) {
            0
        } else {
            2
        }
    }

    /// Names a connected affine diagram by its shape.
    fn name_affine(&self, nodes: &[usize]) -> AffineComponent {
        let c = nodes.len();
        let x = AffineComponent { family: 'X', n: c - 1 };
        let mut deg = vec![0usize; c];
        let mut edges = Vec::new();
        for a in 0..c {
            for b in a + 1..c {
                let m = self.m_value(nodes[a], nodes[b]);
                if m != 2 {
                    deg[a] += 1;
                    deg[b] += 1;
                    edges.push((a, b, m));
                }
            }
        }
        let fam = |f: char| AffineComponent { family: f, n: c - 1 };
        if c == 2 {
            return if edges.first().map(|e| e.2) == Some(0) { fam('A') } else { x };
        }
        let marks: Vec<&(usize, usize, u32)> = edges.iter().filter(|e| e.2 != 3).collect();
        if edges.len() == c {
            return if marks.is_empty() && deg.iter().all(|&d| d == 2) { fam('A') } else { x };
        }
        let leaves: Vec<usize> = (0..c).filter(|&a| deg[a] == 1).collect();
        let branches: Vec<usize> = (0..c).filter(|&a| deg[a] >= 3).collect();
        let arm = |from: usize, first: usize| -> Vec<usize> {
            let mut path = vec![from, first];
            loop {
                let cur = *path.last().expect("nonempty");
                if deg[cur] != 2 {
                    return path;
                }
                let prev = path[path.len() - 2];
                let next = edges.iter().find_map(|&(a, b, _)| {
                    if a == cur && b != prev {
                        Some(b)
                    } else if b == cur && a != prev {
                        Some(a)
                    } else {
                        None
                    }
                });
                match next {
                    Some(n) => path.push(n),
                    None => return path,
                }
            }
        };
        let neighbours = |a: usize| -> Vec<usize> { edges.iter().filter_map(|&(p, q, _)| if p == a { Some(q) } else if q == a { Some(p) } else { None }).collect() };
        let m_between = |a: usize, b: usize| edges.iter().find(|e| (e.0 == a && e.1 == b) || (e.0 == b && e.1 == a)).map_or(2, |e| e.2);
        if marks.is_empty() {
            match branches.as_slice() {
                [b] if deg[*b] == 4 && c == 5 => return fam('D'),
                [b] if deg[*b] == 3 => {
                    let mut arms: Vec<usize> = neighbours(*b).iter().map(|&n| arm(*b, n).len() - 1).collect();
                    arms.sort_unstable();
                    return match arms.as_slice() {
                        [2, 2, 2] => fam('E'),
                        [1, 3, 3] => fam('E'),
                        [1, 2, 5] => fam('E'),
                        _ => x,
                    };
                }
                [p, q] if deg[*p] == 3 && deg[*q] == 3 => return fam('D'),
                _ => return x,
            }
        }
        if leaves.len() == 2 && branches.is_empty() {
            // a path; read the bond sequence from one end
            let path = arm(leaves[0], neighbours(leaves[0])[0]);
            let bonds: Vec<u32> = path.windows(2).map(|w| m_between(w[0], w[1])).collect();
            let fours = bonds.iter().filter(|&&m| m == 4).count();
            if fours == 2 && bonds[0] == 4 && bonds[bonds.len() - 1] == 4 {
                return fam('C');
            }
            if c == 5 && fours == 1 && (bonds[1] == 4 || bonds[2] == 4) {
                return fam('F');
            }
            if c == 3 && bonds.contains(&6) {
                return fam('G');
            }
            return x;
        }
        if branches.len() == 1 && marks.len() == 1 && marks[0].2 == 4 {
            let b = branches[0];
            let mut short = 0;
            for n in neighbours(b) {
                let p = arm(b, n);
                if p.len() == 2 && deg[n] == 1 {
                    short += 1;
                }
            }
            let far = marks[0];
            if short >= 2 && (deg[far.0] == 1 || deg[far.1] == 1) {
                return fam('B');
            }
        }
        x
    }
}

fn bron_kerbosch(r: Vec<usize>, mut p: Vec<usize>, mut x: Vec<usize>, nbrs: &[Vec<usize>], out: &mut Vec<Vec<usize>>) {
    if p.is_empty() && x.is_empty() {
        if !r.is_empty() {
            out.push(r);
        }
        return;
    }
    let pivot = p.iter().chain(x.iter()).copied().max_by_key(|&u| nbrs[u].iter().filter(|v| p.contains(v)).count()).expect("p or x nonempty");
    let candidates: Vec<usize> = p.iter().copied().filter(|v| !nbrs[pivot].contains(v)).collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.iter().copied().filter(|u| nbrs[v].contains(u)).collect();
        let x2 = x.iter().copied().filter(|u| nbrs[v].contains(u)).collect();
        bron_kerbosch(r2, p2, x2, nbrs, out);
        p.retain(|&u| u != v);
        x.push(v);
    }
}

fn report_from(st: &Structure, affine: &[Mask]) -> ParabolicReport {
    let subdiagrams: Vec<ParabolicSubdiagram> = st.maximal_parabolics(affine).iter().map(|c| st.describe(c, affine)).collect();
    let maximal_rank = subdiagrams.iter().map(|s| s.rank).max().unwrap_or(0);
    let mut classes = BTreeMap::new();
    for s in &subdiagrams {
        *classes.entry(s.type_name.clone()).or_insert(0) += 1;
    }
    ParabolicReport { subdiagrams, maximal_rank, classes }
}

/// Maximal parabolic subdiagrams (every component affine).
pub fn parabolic_subdiagrams(d: &CoxeterDiagram) -> ParabolicReport {
    let st = Structure::new(d);
    let elliptic = st.elliptic_sets();
    let affine = st.affine_components(&elliptic);
    report_from(&st, &affine)
}

/// Vinberg's criterion in hyperbolic `n`-space: every elliptic subdiagram
/// of rank `n − 1` has exactly two extensions (elliptic of rank `n` or
/// parabolic of rank `n − 1`), and every maximal parabolic subdiagram has
/// rank `n − 1`.
pub fn finite_volume_check(d: &CoxeterDiagram, n: usize) -> FiniteVolumeCertificate {
    let st = Structure::new(d);
    let elliptic = st.elliptic_sets();
    let affine = st.affine_components(&elliptic);
    let report = report_from(&st, &affine);
    let mut cert = FiniteVolumeCertificate { holds: true, dimension: n, elliptic_checked: 0, maximal_parabolics: report.subdiagrams.clone(), failure: None };
    if let Some(p) = report.subdiagrams.iter().find(|p| p.rank + 1 != n) {
        cert.holds = false;
        cert.failure = Some(format!("maximal parabolic {} on {{{}}} has rank {}", p.type_name, p.names.join(","), p.rank));
        return cert;
    }
    if n == 0 {
        return cert;
    }
    let full: Vec<Mask> = report.subdiagrams.iter().map(|p| p.vertices.iter().fold(0, |m, &i| m | bit(i))).collect();
    let targets: Vec<Mask> = elliptic.iter().copied().filter(|s| s.count_ones() as usize == n - 1).collect();
    cert.elliptic_checked = targets.len();
    let bad = targets.par_iter().find_first(|&&s| {
        let ell = (0..st.n).filter(|&v| st.extends_elliptic(s, v)).count();
        let par = full.iter().filter(|&&p| p & s == s).count();
        ell + par != 2
    });
    if let Some(&s) = bad {
        let ell = (0..st.n).filter(|&v| st.extends_elliptic(s, v)).count();
        let par = full.iter().filter(|&&p| p & s == s).count();
        let names: Vec<&str> = members(s).iter().map(|&i| st.d.vertices[i].name.as_str()).collect();
        cert.holds = false;
        cert.failure = Some(format!("elliptic {{{}}} has {} elliptic and {} parabolic extensions", names.join(","), ell, par));
    }
    cert
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagram(n: usize, norms: &[i64], edges: &[(usize, usize, i64)]) -> CoxeterDiagram {
        let mut g = vec![vec![0; n]; n];
        for i in 0..n {
            g[i][i] = norms[i % norms.len()];
        }
        for &(i, j, p) in edges {
            g[i][j] = p;
            g[j][i] = p;
        }
        CoxeterDiagram::from_gram((0..n).map(|i| format!("v{i}")).collect(), g).unwrap()
    }

    #[test]
    fn edge_classes() {
        assert_eq!(EdgeClass::of(Ratio::new(0, 1)), EdgeClass::None);
        assert_eq!(EdgeClass::of(Ratio::new(1, 4)), EdgeClass::Single);
        assert_eq!(EdgeClass::of(Ratio::new(1, 2)), EdgeClass::Labeled);
        assert_eq!(EdgeClass::of(Ratio::new(1, 1)), EdgeClass::Dashed);
        assert_eq!(EdgeClass::of(Ratio::new(9, 4)), EdgeClass::Bold);
        let d = diagram(3, &[-2], &[(0, 1, 1)]);
        assert_eq!(d.edge(0, 1), EdgeClass::Single);
        assert_eq!(d.edge(0, 2), EdgeClass::None);
    }

    #[test]
    fn negative_pairing_rejected() {
        let g = vec![vec![-2, -1], vec![-1, -2]];
        assert!(CoxeterDiagram::from_gram(vec!["a".into(), "b".into()], g).is_err());
    }

    #[test]
    fn affine_pair() {
        let d = diagram(2, &[-2], &[(0, 1, 2)]);
        let r = parabolic_subdiagrams(&d);
        assert_eq!(r.subdiagrams.len(), 1);
        assert_eq!(r.subdiagrams[0].type_name, "Ã₁");
        assert_eq!(r.maximal_rank, 1);
    }

    #[test]
    fn affine_shapes() {
        // extended D4: centre 0
        let d4 = diagram(5, &[-2], &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1)]);
        assert_eq!(parabolic_subdiagrams(&d4).subdiagrams[0].type_name, "D̃₄");
        // extended E8: arms 1,2,5 from node 0
        let e = [(0, 1, 1), (0, 2, 1), (2, 3, 1), (0, 4, 1), (4, 5, 1), (5, 6, 1), (6, 7, 1), (7, 8, 1)];
        assert_eq!(parabolic_subdiagrams(&diagram(9, &[-2], &e)).subdiagrams[0].type_name, "Ẽ₈");
        // a triangle is extended A2
        let a = diagram(3, &[-2], &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        assert_eq!(parabolic_subdiagrams(&a).subdiagrams[0].type_name, "Ã₂");
        // C̃2 from norms -2, -4, -2 with pairing 2
        let c = diagram(3, &[-2, -4, -2], &[(0, 1, 2), (1, 2, 2)]);
        assert_eq!(parabolic_subdiagrams(&c).subdiagrams[0].type_name, "C̃₂");
    }

    #[test]
    fn finite_volume_trivia() {
        let empty = CoxeterDiagram::from_gram(vec![], vec![]).unwrap();
        assert!(finite_volume_check(&empty, 14).holds);
        // ideal triangle group (2, 3, ∞) in the hyperbolic plane
        let t = diagram(3, &[-2], &[(0, 2, 1), (1, 2, 2)]);
        assert!(finite_volume_check(&t, 2).holds);
        // two disjoint A1 nodes in the plane bound an infinite region
        let two = diagram(2, &[-2], &[]);
        assert!(!finite_volume_check(&two, 2).holds);
    }

    #[test]
    fn automorphisms_of_a_triangle() {
        let a = diagram(3, &[-2], &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        assert_eq!(a.automorphisms(Matching::Exact).len(), 6);
        let p = diagram(3, &[-2], &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(p.automorphisms(Matching::Exact).len(), 2);
    }
}
