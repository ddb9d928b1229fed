//! Integral lattices given by a Gram matrix in a fixed basis.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::matrix::{gcd_slice, narrow, IntMatrix};
use crate::snf::{integer_kernel, smith_normal_form, solve_integer};

/// A named block of consecutive basis vectors, recording direct-sum provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    pub name: String,
    /// Half-open index range `[start, end)`.
    pub range: [usize; 2],
}

impl Summand {
    pub fn new(name: impl Into<String>, start: usize, end: usize) -> Self {
        Self { name: name.into(), range: [start, end] }
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.range[0]..self.range[1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct RawLattice {
    #[serde(default)]
    label: String,
    gram: IntMatrix,
    #[serde(default)]
    summands: Vec<Summand>,
}

/// A nondegenerate integral lattice: symmetric integer Gram matrix plus
/// optional label and summand provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLattice", into = "RawLattice")]
pub struct GramLattice {
    label: String,
    gram: IntMatrix,
    summands: Vec<Summand>,
}

impl TryFrom<RawLattice> for GramLattice {
    type Error = LatticeError;
    fn try_from(raw: RawLattice) -> Result<Self> {
        Self::with_summands(raw.gram, raw.label, raw.summands)
    }
}

impl From<GramLattice> for RawLattice {
    fn from(l: GramLattice) -> Self {
        RawLattice { label: l.label, gram: l.gram, summands: l.summands }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasicInvariants {
    pub rank: usize,
    pub determinant: i128,
    pub is_even: bool,
    pub is_unimodular: bool,
}

/// Signature `(p, n)`: numbers of positive and negative squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.positive, self.negative)
    }
}

/// Orthogonal complement or saturation: a lattice together with the
/// coordinates of its basis vectors in the ambient basis (one row each).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sublattice {
    pub lattice: GramLattice,
    pub embedding: IntMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Saturation {
    pub sublattice: Sublattice,
    /// `[closure : span(sub)]`.
    pub index: u64,
}

/// A vector of a lattice, in the lattice basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeVector<'a> {
    ambient: &'a GramLattice,
    coords: Vec<i64>,
}

impl<'a> LatticeVector<'a> {
    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn ambient(&self) -> &'a GramLattice {
        self.ambient
    }

    pub fn norm(&self) -> i64 {
        self.ambient.norm(&self.coords)
    }

    pub fn pair(&self, other: &[i64]) -> i64 {
        self.ambient.pair(&self.coords, other)
    }

    pub fn divisibility(&self) -> Result<i64> {
        self.ambient.divisibility(&self.coords)
    }

    pub fn is_primitive(&self) -> bool {
        gcd_slice(&self.coords) == 1
    }
}

impl GramLattice {
    pub fn new(gram: IntMatrix, label: impl Into<String>) -> Result<Self> {
        Self::with_summands(gram, label, Vec::new())
    }

    pub fn with_summands(gram: IntMatrix, label: impl Into<String>, summands: Vec<Summand>) -> Result<Self> {
        if !gram.is_square() {
            return Err(LatticeError::NotSquare { rows: gram.rows(), cols: gram.cols() });
        }
        if !gram.is_symmetric() {
            return Err(LatticeError::NotSymmetric);
        }
        if gram.det()? == 0 {
            return Err(LatticeError::Degenerate);
        }
        for s in &summands {
            if s.range[0] > s.range[1] || s.range[1] > gram.rows() {
                return Err(LatticeError::Validation(format!("summand `{}` out of range", s.name)));
            }
        }
        Ok(Self { label: label.into(), gram, summands })
    }

    pub fn from_rows(rows: Vec<Vec<i64>>, label: impl Into<String>) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows)?, label)
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn summand(&self, name: &str) -> Option<&Summand> {
        self.summands.iter().find(|s| s.name == name)
    }

    pub fn relabeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn vector(&self, coords: Vec<i64>) -> Result<LatticeVector<'_>> {
        if coords.len() != self.rank() {
            return Err(LatticeError::Dimension { expected: self.rank(), got: coords.len() });
        }
        Ok(LatticeVector { ambient: self, coords })
    }

    pub fn basis_vector(&self, i: usize) -> Vec<i64> {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        v
    }

    pub fn pair(&self, x: &[i64], y: &[i64]) -> i64 {
        self.gram.bilinear(x, y) as i64
    }

    pub fn norm(&self, x: &[i64]) -> i64 {
        self.pair(x, x)
    }

    /// Pairings of `x` with every basis vector, i.e. `G x`.
    pub fn pairings(&self, x: &[i64]) -> Vec<i64> {
        (0..self.rank()).map(|i| self.gram.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect()
    }

    pub fn determinant(&self) -> i128 {
        self.gram.det().expect("determinant checked at construction")
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)] % 2 == 0)
    }

    pub fn basic_invariants(&self) -> BasicInvariants {
        let determinant = self.determinant();
        BasicInvariants {
            rank: self.rank(),
            determinant,
            is_even: self.is_even(),
            is_unimodular: determinant.abs() == 1,
        }
    }

    /// Exact signature by symmetric rational elimination.
    pub fn signature(&self) -> Signature {
        signature_of(&self.gram).expect("nondegenerate by construction")
    }

    pub fn is_negative_definite(&self) -> bool {
        self.signature().positive == 0
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature().negative == 0
    }

    pub fn is_definite(&self) -> bool {
        let s = self.signature();
        s.positive == 0 || s.negative == 0
    }

    /// Positive generator of the ideal `(v, L) ⊆ ℤ`.
    pub fn divisibility(&self, v: &[i64]) -> Result<i64> {
        if v.len() != self.rank() {
            return Err(LatticeError::Dimension { expected: self.rank(), got: v.len() });
        }
        if v.iter().all(|&x| x == 0) {
            return Err(LatticeError::ZeroVector);
        }
        Ok(gcd_slice(&self.pairings(v)))
    }

    pub fn direct_sum(parts: &[&GramLattice], label: impl Into<String>) -> Result<Self> {
        let blocks: Vec<&IntMatrix> = parts.iter().map(|p| &p.gram).collect();
        let gram = IntMatrix::block_diag(&blocks);
        let mut summands = Vec::new();
        let mut offset = 0;
        for p in parts {
            if p.summands.is_empty() {
                summands.push(Summand::new(p.label.clone(), offset, offset + p.rank()));
            } else {
                for s in &p.summands {
                    summands.push(Summand::new(s.name.clone(), s.range[0] + offset, s.range[1] + offset));
                }
            }
            offset += p.rank();
        }
        Self::with_summands(gram, label, summands)
    }

    /// `L(α)`: the same module with the form multiplied by `α`.
    pub fn rescaled(&self, alpha: i64) -> Result<Self> {
        if alpha == 0 {
            return Err(LatticeError::Degenerate);
        }
        Ok(Self {
            label: format!("{}({})", self.label, alpha),
            gram: self.gram.scaled(alpha)?,
            summands: self.summands.clone(),
        })
    }

    /// Restriction of the form to the span of the given vectors (rows).
    pub fn restrict(&self, basis: &[Vec<i64>], label: impl Into<String>) -> Result<GramLattice> {
        let b = IntMatrix::from_rows(basis.to_vec())?;
        let g = b.mul(&self.gram)?.mul(&b.transpose())?;
        GramLattice::new(g, label)
    }

    /// `{x ∈ L : (x, s) = 0 for all s in sub}` with its Gram matrix.
    pub fn orthogonal_complement(&self, sub: &[Vec<i64>]) -> Result<Sublattice> {
        let n = self.rank();
        for s in sub {
            if s.len() != n {
                return Err(LatticeError::Dimension { expected: n, got: s.len() });
            }
        }
        if sub.is_empty() {
            return Ok(Sublattice { lattice: self.clone(), embedding: IntMatrix::identity(n) });
        }
        let s = IntMatrix::from_rows(sub.to_vec())?;
        if smith_normal_form(&s)?.rank != sub.len() {
            return Err(LatticeError::Dependent);
        }
        let sg = s.mul(&self.gram)?;
        let basis = integer_kernel(&sg)?;
        if basis.is_empty() {
            return Err(LatticeError::Degenerate);
        }
        let lattice = self.restrict(&basis, format!("complement in {}", self.label))?;
        Ok(Sublattice { lattice, embedding: IntMatrix::from_rows(basis)? })
    }

    /// Primitive closure `(ℚ·sub) ∩ L` and the index of `span(sub)` in it.
    pub fn saturation(&self, sub: &[Vec<i64>]) -> Result<Saturation> {
        let n = self.rank();
        let s = IntMatrix::from_rows(sub.to_vec())?;
        if s.cols() != n {
            return Err(LatticeError::Dimension { expected: n, got: s.cols() });
        }
        if smith_normal_form(&s)?.rank != sub.len() {
            return Err(LatticeError::Dependent);
        }
        let closure = saturate_rows(sub, n)?;
        let c = IntMatrix::from_rows(closure.clone())?;
        // coordinates of each sub vector in the closure basis
        let ct = c.transpose();
        let mut coords = Vec::with_capacity(sub.len());
        for v in sub {
            coords.push(solve_integer(&ct, v)?.ok_or_else(|| LatticeError::Validation("saturation lost a vector".into()))?);
        }
        let index = IntMatrix::from_rows(coords)?.det()?.unsigned_abs();
        let lattice = self.restrict(&closure, format!("saturation in {}", self.label))?;
        Ok(Saturation {
            sublattice: Sublattice { lattice, embedding: c },
            index: u64::try_from(index).map_err(|_| LatticeError::Overflow)?,
        })
    }

    pub fn is_primitive_sublattice(&self, sub: &[Vec<i64>]) -> Result<bool> {
        Ok(self.saturation(sub)?.index == 1)
    }
}

/// Basis of `(ℚ·rows) ∩ ℤⁿ`.
pub fn saturate_rows(rows: &[Vec<i64>], n: usize) -> Result<Vec<Vec<i64>>> {
    let s = IntMatrix::from_rows(rows.to_vec())?;
    let perp = integer_kernel(&s)?;
    if perp.is_empty() {
        return Ok((0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect());
    }
    integer_kernel(&IntMatrix::from_rows(perp)?)
}

/// Signature of a nondegenerate symmetric integer matrix.
pub fn signature_of(gram: &IntMatrix) -> Result<Signature> {
    let n = gram.rows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer(BigInt::from(gram[(i, j)]))).collect())
        .collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let (mut pos, mut neg) = (0, 0);
    while !alive.is_empty() {
        if let Some(k) = alive.iter().position(|&i| !a[i][i].is_zero()) {
            let p = alive.remove(k);
            let d = a[p][p].clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            for &i in &alive {
                if a[i][p].is_zero() {
                    continue;
                }
                let f = &a[i][p] / &d;
                for &j in &alive {
                    let t = &f * &a[p][j];
                    a[i][j] -= t;
                }
            }
            continue;
        }
        // all remaining diagonal entries vanish: split off a hyperbolic 2x2 block
        let mut pair = None;
        'find: for (x, &i) in alive.iter().enumerate() {
            for &j in &alive[x + 1..] {
                if !a[i][j].is_zero() {
                    pair = Some((i, j));
                    break 'find;
                }
            }
        }
        let (p, q) = pair.ok_or(LatticeError::Degenerate)?;
        alive.retain(|&i| i != p && i != q);
        pos += 1;
        neg += 1;
        // eliminate with the block [[0, c], [c, 0]]; its inverse is [[0, 1/c], [1/c, 0]]
        let c = a[p][q].clone();
        for &i in &alive {
            for &j in &alive {
                let t = (&a[i][p] * &a[q][j] + &a[i][q] * &a[p][j]) / &c;
                a[i][j] -= t;
            }
        }
    }
    Ok(Signature { positive: pos, negative: neg })
}

/// Checked conversion helper for callers working in `i128`.
pub fn to_i64(v: i128) -> Result<i64> {
    narrow(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> GramLattice {
        GramLattice::from_rows(vec![vec![0, 1], vec![1, 0]], "U").unwrap()
    }

    #[test]
    fn hyperbolic_plane_invariants() {
        let inv = u().basic_invariants();
        assert_eq!(inv, BasicInvariants { rank: 2, determinant: -1, is_even: true, is_unimodular: true });
        assert_eq!(u().signature(), Signature { positive: 1, negative: 1 });
    }

    #[test]
    fn rejects_bad_grams() {
        assert_eq!(GramLattice::from_rows(vec![vec![0, 1], vec![2, 0]], "x"), Err(LatticeError::NotSymmetric));
        assert_eq!(GramLattice::from_rows(vec![vec![1, 1], vec![1, 1]], "x"), Err(LatticeError::Degenerate));
    }

    #[test]
    fn divisibility_in_u_and_u2() {
        let u = u();
        assert_eq!(u.divisibility(&[1, 0]).unwrap(), 1);
        let u2 = u.rescaled(2).unwrap();
        assert_eq!(u2.divisibility(&[1, 0]).unwrap(), 2);
        assert_eq!(u.divisibility(&[0, 0]), Err(LatticeError::ZeroVector));
    }

    #[test]
    fn saturation_of_doubled_vector() {
        let s = u().saturation(&[vec![2, 2]]).unwrap();
        assert_eq!(s.index, 2);
        assert_eq!(s.sublattice.embedding.row(0).iter().map(|x| x.abs()).collect::<Vec<_>>(), vec![1, 1]);
        let again = u().saturation(&[vec![1, 1]]).unwrap();
        assert_eq!(again.index, 1);
    }

    #[test]
    fn complement_in_u() {
        let c = u().orthogonal_complement(&[vec![1, 1]]).unwrap();
        assert_eq!(c.lattice.rank(), 1);
        assert_eq!(c.lattice.gram()[(0, 0)], -2);
        assert_eq!(u().orthogonal_complement(&[vec![1, 1], vec![2, 2]]), Err(LatticeError::Dependent));
    }

    #[test]
    fn json_round_trip_validates() {
        let l = u();
        let s = serde_json::to_string(&l).unwrap();
        assert!(s.contains("\"gram\":[[0,1],[1,0]]"));
        let back: GramLattice = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
        assert!(serde_json::from_str::<GramLattice>(r#"{"gram":[[1,1],[1,1]]}"#).is_err());
    }
}
