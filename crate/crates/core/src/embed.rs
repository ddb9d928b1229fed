//! Root subsystems (Borel–de Siebenthal) and embeddings of root lattices
//! into lattices with a known root system.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::fincke::vectors_of_norm;
use crate::lattice::GramLattice;
use crate::roots::{identify_simple_roots, RootSystemType};

/// A subsystem type with simple roots realizing it, in the coordinates of
/// the parent's standard lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub root_type: RootSystemType,
    pub simple_roots: Vec<Vec<i64>>,
}

fn adjacency(l: &GramLattice, s: &[Vec<i64>]) -> Vec<Vec<usize>> {
    (0..s.len()).map(|i| (0..s.len()).filter(|&j| j != i && l.pair(&s[i], &s[j]) != 0).collect()).collect()
}

/// Highest root of an irreducible simply laced simple system: climb by
/// adding simple roots while the sum is still a root.
fn highest_root(l: &GramLattice, comp: &[Vec<i64>]) -> Vec<i64> {
    let mut theta = comp[0].clone();
    loop {
        let step = comp.iter().find(|b| l.pair(&theta, b) == 1);
        match step {
            Some(b) => {
                for (t, x) in theta.iter_mut().zip(b.iter()) {
                    *t += x;
                }
            }
            None => return theta,
        }
    }
}

/// All subsystem types reachable from `t` by replacing a component with its
/// extended diagram minus a node, or deleting a node, down to `min_rank`.
pub fn subsystems_bds(t: &RootSystemType, min_rank: usize) -> Result<Vec<Subsystem>> {
    let l = t.lattice()?;
    let start: Vec<Vec<i64>> = (0..l.rank()).map(|i| l.basis_vector(i)).collect();
    let mut seen: BTreeMap<RootSystemType, Vec<Vec<i64>>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    seen.insert(t.clone(), start.clone());
    queue.push_back(start);
    while let Some(s) = queue.pop_front() {
        let adj = adjacency(&l, &s);
        let mut next: Vec<Vec<Vec<i64>>> = Vec::new();
        for comp in crate::roots::components(&adj) {
            let members: Vec<Vec<i64>> = comp.iter().map(|&i| s[i].clone()).collect();
            let theta: Vec<i64> = highest_root(&l, &members).iter().map(|x| -x).collect();
            let rest: Vec<Vec<i64>> = (0..s.len()).filter(|i| !comp.contains(i)).map(|i| s[i].clone()).collect();
            for skip in 0..members.len() {
                let mut n = rest.clone();
                n.extend(members.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| v.clone()));
                n.push(theta.clone());
                next.push(n);
            }
        }
        if s.len() > min_rank {
            for skip in 0..s.len() {
                next.push(s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| v.clone()).collect());
            }
        }
        for n in next {
            let ty = identify_simple_roots(&l, &n)?;
            if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(ty) {
                e.insert(n.clone());
                queue.push_back(n);
            }
        }
    }
    let mut out: Vec<Subsystem> = seen.into_iter().map(|(root_type, simple_roots)| Subsystem { root_type, simple_roots }).collect();
    out.sort_by(|a, b| b.root_type.rank().cmp(&a.root_type.rank()).then(a.root_type.to_string().cmp(&b.root_type.to_string())));
    Ok(out)
}

/// Whether `sub` occurs as a root subsystem of `t`.
pub fn is_subsystem(sub: &RootSystemType, t: &RootSystemType) -> Result<bool> {
    if sub.rank() > t.rank() {
        return Ok(false);
    }
    Ok(subsystems_bds(t, sub.rank())?.iter().any(|s| &s.root_type == sub))
}

/// Images of the simple roots of `source` (in `source.flat()` order) in the
/// target lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub source: RootSystemType,
    pub images: Vec<Vec<i64>>,
}

/// Roots of a target with pairing and reflection tables.
#[derive(Debug, Clone)]
pub struct RootTable {
    pub roots: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    pair: Vec<Vec<i32>>,
    positive: Vec<bool>,
}

impl RootTable {
    pub fn new(l: &GramLattice, roots: Vec<Vec<i64>>) -> Self {
        let index: HashMap<Vec<i64>, usize> = roots.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        let gx: Vec<Vec<i64>> = roots.iter().map(|r| l.pairings(r)).collect();
        let pair = roots
            .iter()
            .map(|a| gx.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>() as i32).collect())
            .collect();
        let positive = roots.iter().map(|r| r.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)).collect();
        Self { roots, index, pair, positive }
    }

    pub fn from_lattice(l: &GramLattice) -> Result<Self> {
        Ok(Self::new(l, vectors_of_norm(l, -2)?))
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn index_of(&self, v: &[i64]) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn pairing(&self, a: usize, b: usize) -> i32 {
        self.pair[a][b]
    }

    /// `s_r(x) = x + (x, r) r` for norm −2 roots.
    fn reflect(&self, r: usize, x: usize) -> usize {
        let c = self.pair[x][r] as i64;
        if c == 0 {
            return x;
        }
        let y: Vec<i64> = self.roots[x].iter().zip(&self.roots[r]).map(|(a, b)| a + c * b).collect();
        self.index[&y]
    }

    /// Roots orthogonal to every root in `fixed`.
    pub fn orthogonal_to(&self, fixed: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|&x| fixed.iter().all(|&f| self.pair[x][f] == 0)).collect()
    }
}

/// Simple roots of `t` visited breadth first within each component.
fn search_order(t: &RootSystemType) -> Result<Vec<usize>> {
    let g = t.gram()?;
    let n = g.rows();
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut q = VecDeque::from([s]);
        seen[s] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            for w in 0..n {
                if w != v && g[(v, w)] != 0 && !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    Ok(order)
}

/// Embeddings of the root lattice of `source` into the span of the target's
/// roots, one per orbit of the target's Weyl group. At each step the next
/// simple root's image is chosen up to the pointwise stabilizer of the
/// images already fixed, which is generated by reflections in the roots
/// orthogonal to them.
pub fn embed_root_lattice(source: &RootSystemType, target: &GramLattice) -> Result<Vec<Embedding>> {
    let table = RootTable::from_lattice(target)?;
    embed_with_table(source, &table)
}

pub fn embed_with_table(source: &RootSystemType, table: &RootTable) -> Result<Vec<Embedding>> {
    let g = source.gram()?;
    let order = search_order(source)?;
    let n = order.len();
    let mut found = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);

    fn rec(
        k: usize,
        order: &[usize],
        g: &crate::matrix::IntMatrix,
        table: &RootTable,
        chosen: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
    ) {
        if k == order.len() {
            found.push(chosen.clone());
            return;
        }
        let i = order[k];
        let candidates: Vec<usize> = (0..table.len())
            .filter(|&x| (0..k).all(|j| table.pair[x][chosen[j]] as i64 == g[(i, order[j])]))
            .collect();
        if candidates.is_empty() {
            return;
        }
        let gens: Vec<usize> = table.orthogonal_to(chosen).into_iter().filter(|&r| table.positive[r]).collect();
        let mut seen = vec![false; table.len()];
        for &c in &candidates {
            if seen[c] {
                continue;
            }
            let mut stack = vec![c];
            seen[c] = true;
            while let Some(x) = stack.pop() {
                for &r in &gens {
                    let y = table.reflect(r, x);
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            chosen.push(c);
            rec(k + 1, order, g, table, chosen, found);
            chosen.pop();
        }
    }

    if n == 0 {
        return Ok(vec![Embedding { source: source.clone(), images: vec![] }]);
    }
    rec(0, &order, &g, table, &mut chosen, &mut found);
    let mut out = Vec::with_capacity(found.len());
    for f in found {
        let mut images = vec![Vec::new(); n];
        for (k, &i) in order.iter().enumerate() {
            images[i] = table.roots[f[k]].clone();
        }
        out.push(Embedding { source: source.clone(), images });
    }
    Ok(out)
}

/// Checks that an embedding preserves the source Gram matrix and lands in roots.
pub fn verify_embedding(e: &Embedding, target: &GramLattice) -> Result<bool> {
    let g = e.source.gram()?;
    if e.images.len() != g.rows() {
        return Err(LatticeError::Dimension { expected: g.rows(), got: e.images.len() });
    }
    for (i, a) in e.images.iter().enumerate() {
        for (j, b) in e.images.iter().enumerate() {
            if target.pair(a, b) != g[(i, j)] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::make_standard;

    fn ty(s: &str) -> RootSystemType {
        s.parse().unwrap()
    }

    #[test]
    fn bds_of_e8() {
        let subs = subsystems_bds(&ty("E8"), 8).unwrap();
        let names: Vec<String> = subs.iter().map(|s| s.root_type.to_string()).collect();
        for want in ["E7+A1", "D8", "A8", "E6+A2", "A4^2", "D4^2", "A1^8"] {
            assert!(names.contains(&want.to_string()), "{want} missing from {names:?}");
        }
        assert!(is_subsystem(&ty("D4"), &ty("E8")).unwrap());
    }

    #[test]
    fn small_realizability() {
        assert!(is_subsystem(&ty("A1^4"), &ty("D4")).unwrap());
        assert!(!is_subsystem(&ty("A1^5"), &ty("D4")).unwrap());
        assert!(is_subsystem(&ty("E7+A1"), &ty("E8")).unwrap());
    }

    #[test]
    fn embeddings_preserve_gram() {
        let e8 = make_standard("E8").unwrap();
        let es = embed_root_lattice(&ty("A1^4"), &e8).unwrap();
        assert!(!es.is_empty());
        for e in &es {
            assert!(verify_embedding(e, &e8).unwrap());
        }
        // two W(E8)-classes of orthogonal root quadruples
        assert_eq!(es.len(), 2);
        assert_eq!(embed_root_lattice(&ty("E7"), &e8).unwrap().len(), 1);
        let a = make_standard("A1^5").unwrap();
        assert!(embed_root_lattice(&ty("D4"), &a).unwrap().is_empty());
    }
}
