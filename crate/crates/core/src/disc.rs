//! Discriminant forms `A_L = L*/L` with `q: A_L → ℚ/2ℤ` and `b: A_L × A_L → ℚ/ℤ`.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::lattice::{GramLattice, Signature};
use crate::matrix::{rat_is_integer, rat_string, rat_to_i64};
use crate::snf::smith_normal_form;

/// Largest group that `value_census` enumerates by default.
pub const DEFAULT_CENSUS_BOUND: u64 = 1 << 16;

/// An element of `A_L`, as residues against the form's generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiscClass {
    coeffs: Vec<i64>,
    parent: u64,
}

impl DiscClass {
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for DiscClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl Serialize for DiscClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

#[derive(Debug, Clone)]
pub struct DiscriminantForm {
    invariant_factors: Vec<i64>,
    generators: Vec<Vec<BigRational>>,
    gram_rational: Vec<Vec<BigRational>>,
    // rows of the left SNF transform for the nontrivial factors
    class_rows: Vec<Vec<i64>>,
    gram: Vec<Vec<i64>>,
    den: i128,
    bnum: Vec<Vec<i128>>,
    id: u64,
}

/// Nikulin invariants of an even 2-elementary lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoElemInvariants {
    pub s_plus: usize,
    pub s_minus: usize,
    pub ell: usize,
    pub delta: u8,
}

impl fmt::Display for TwoElemInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({},{}),{},{})", self.s_plus, self.s_minus, self.ell, self.delta)
    }
}

/// Signature, invariant factors and q-value census. Equal keys are
/// necessary for two lattices to share a genus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenusKey {
    pub signature: Signature,
    pub invariant_factors: Vec<i64>,
    pub census: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identification {
    pub name: Option<String>,
    pub invariants: TwoElemInvariants,
}

impl Identification {
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("unmatched")
    }
}

fn big(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn fingerprint(rows: &[Vec<i64>]) -> u64 {
    let mut h = DefaultHasher::new();
    rows.hash(&mut h);
    h.finish()
}

impl DiscriminantForm {
    pub fn new(lattice: &GramLattice) -> Result<Self> {
        let g = lattice.gram();
        let n = g.rows();
        let snf = smith_normal_form(g)?;
        let diag = snf.diagonal_entries();
        let nontrivial: Vec<usize> = (0..n).filter(|&i| diag[i] != 1).collect();
        let invariant_factors: Vec<i64> = nontrivial.iter().map(|&i| diag[i]).collect();
        let cols: Vec<Vec<i64>> = nontrivial.iter().map(|&i| snf.right.column(i)).collect();
        let generators: Vec<Vec<BigRational>> = nontrivial
            .iter()
            .zip(&cols)
            .map(|(&i, c)| c.iter().map(|&x| big(x) / big(diag[i])).collect())
            .collect();
        let k = nontrivial.len();
        let e = invariant_factors.iter().copied().max().unwrap_or(1) as i128;
        let den = e * e;
        let mut gram_rational = vec![vec![BigRational::zero(); k]; k];
        let mut bnum = vec![vec![0i128; k]; k];
        for a in 0..k {
            for b in 0..k {
                let raw = g.bilinear(&cols[a], &cols[b]);
                let (da, db) = (invariant_factors[a] as i128, invariant_factors[b] as i128);
                gram_rational[a][b] = BigRational::new(BigInt::from(raw), BigInt::from(da * db));
                bnum[a][b] = raw
                    .checked_mul((e / da) * (e / db))
                    .and_then(|x| x.checked_rem_euclid(2 * den))
                    .ok_or(LatticeError::Overflow)?;
            }
        }
        let class_rows = nontrivial.iter().map(|&i| snf.left.row(i).to_vec()).collect();
        let gram = g.to_rows();
        let id = fingerprint(&gram);
        Ok(Self { invariant_factors, generators, gram_rational, class_rows, gram, den, bnum, id })
    }

    pub fn invariant_factors(&self) -> &[i64] {
        &self.invariant_factors
    }

    pub fn generators(&self) -> &[Vec<BigRational>] {
        &self.generators
    }

    pub fn gram_rational(&self) -> &[Vec<BigRational>] {
        &self.gram_rational
    }

    pub fn order(&self) -> u128 {
        self.invariant_factors.iter().map(|&d| d as u128).product()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    pub fn is_two_elementary(&self) -> bool {
        self.invariant_factors.iter().all(|&d| d == 2)
    }

    pub fn exponent(&self) -> i64 {
        self.invariant_factors.iter().copied().max().unwrap_or(1)
    }

    pub fn lattice_rank(&self) -> usize {
        self.gram.len()
    }

    fn wrap(&self, coeffs: Vec<i64>) -> DiscClass {
        DiscClass { coeffs, parent: self.id }
    }

    pub fn zero(&self) -> DiscClass {
        self.wrap(vec![0; self.invariant_factors.len()])
    }

    /// Class with the given residues, reduced into `0 ≤ c_i < d_i`.
    pub fn class(&self, coeffs: &[i64]) -> Result<DiscClass> {
        if coeffs.len() != self.invariant_factors.len() {
            return Err(LatticeError::Dimension { expected: self.invariant_factors.len(), got: coeffs.len() });
        }
        Ok(self.wrap(coeffs.iter().zip(&self.invariant_factors).map(|(&c, &d)| c.rem_euclid(d)).collect()))
    }

    pub fn generator_class(&self, i: usize) -> DiscClass {
        let mut c = vec![0; self.invariant_factors.len()];
        c[i] = 1;
        self.wrap(c)
    }

    pub fn owns(&self, x: &DiscClass) -> bool {
        x.parent == self.id && x.coeffs.len() == self.invariant_factors.len()
    }

    fn check(&self, x: &DiscClass) -> Result<()> {
        if self.owns(x) {
            Ok(())
        } else {
            Err(LatticeError::MismatchedParents)
        }
    }

    /// Mixed-radix position of a class in `classes()` order.
    pub fn index_of(&self, x: &DiscClass) -> u64 {
        let mut idx = 0u64;
        for (c, d) in x.coeffs.iter().zip(&self.invariant_factors) {
            idx = idx * (*d as u64) + *c as u64;
        }
        idx
    }

    pub fn class_at(&self, mut idx: u64) -> DiscClass {
        let mut c = vec![0; self.invariant_factors.len()];
        for (slot, d) in c.iter_mut().zip(&self.invariant_factors).rev() {
            *slot = (idx % *d as u64) as i64;
            idx /= *d as u64;
        }
        self.wrap(c)
    }

    /// All classes in mixed-radix order (last coordinate fastest).
    pub fn classes(&self) -> impl Iterator<Item = DiscClass> + '_ {
        let n = u64::try_from(self.order()).unwrap_or(u64::MAX);
        (0..n).map(move |i| self.class_at(i))
    }

    pub fn add(&self, x: &DiscClass, y: &DiscClass) -> Result<DiscClass> {
        self.check(x)?;
        self.check(y)?;
        let c: Vec<i64> = x.coeffs.iter().zip(&y.coeffs).zip(&self.invariant_factors).map(|((a, b), d)| (a + b) % d).collect();
        Ok(self.wrap(c))
    }

    pub fn scale(&self, x: &DiscClass, k: i64) -> Result<DiscClass> {
        self.check(x)?;
        let c: Vec<i64> = x.coeffs.iter().zip(&self.invariant_factors).map(|(a, d)| (a * k).rem_euclid(*d)).collect();
        Ok(self.wrap(c))
    }

    /// `q` numerator over `den`, reduced mod `2·den`.
    pub(crate) fn q_num(&self, c: &[i64]) -> i128 {
        let mut s = 0i128;
        for (a, ca) in c.iter().enumerate() {
            if *ca == 0 {
                continue;
            }
            for (b, cb) in c.iter().enumerate() {
                s += (*ca as i128) * (*cb as i128) * self.bnum[a][b];
            }
            s = s.rem_euclid(2 * self.den);
        }
        s.rem_euclid(2 * self.den)
    }

    /// `b` numerator over `den`, reduced mod `den`.
    pub(crate) fn b_num(&self, x: &[i64], y: &[i64]) -> i128 {
        let mut s = 0i128;
        for (a, ca) in x.iter().enumerate() {
            if *ca == 0 {
                continue;
            }
            for (b, cb) in y.iter().enumerate() {
                s += (*ca as i128) * (*cb as i128) * self.bnum[a][b];
            }
            s = s.rem_euclid(self.den);
        }
        s.rem_euclid(self.den)
    }

    pub(crate) fn den(&self) -> i128 {
        self.den
    }

    fn rat_of(&self, num: i128) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(self.den))
    }

    /// `q(x)` in `[0, 2)`.
    pub fn q_value(&self, x: &DiscClass) -> Result<BigRational> {
        self.check(x)?;
        Ok(self.rat_of(self.q_num(&x.coeffs)))
    }

    /// `b(x, y)` in `[0, 1)`.
    pub fn b_value(&self, x: &DiscClass, y: &DiscClass) -> Result<BigRational> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.rat_of(self.b_num(&x.coeffs, &y.coeffs)))
    }

    /// A dual vector (lattice coordinates) representing the class.
    pub fn lift(&self, x: &DiscClass) -> Result<Vec<BigRational>> {
        self.check(x)?;
        let mut v = vec![BigRational::zero(); self.lattice_rank()];
        for (c, g) in x.coeffs.iter().zip(&self.generators) {
            for (vi, gi) in v.iter_mut().zip(g) {
                *vi += gi * big(*c);
            }
        }
        Ok(v)
    }

    /// Class of `y ∈ L*` given in lattice coordinates.
    pub fn class_of_dual(&self, y: &[BigRational]) -> Result<DiscClass> {
        let n = self.lattice_rank();
        if y.len() != n {
            return Err(LatticeError::Dimension { expected: n, got: y.len() });
        }
        let mut z = Vec::with_capacity(n);
        for row in &self.gram {
            let mut s = BigRational::zero();
            for (a, b) in row.iter().zip(y) {
                s += b * big(*a);
            }
            if !rat_is_integer(&s) {
                return Err(LatticeError::InvalidVector("not in the dual lattice".into()));
            }
            z.push(rat_to_i64(&s).ok_or(LatticeError::Overflow)?);
        }
        self.class_of_pairings(&z, 1)
    }

    /// Class of `v / m` for a lattice vector `v` whose pairings are all divisible by `m`.
    pub fn class_of_fraction(&self, v: &[i64], m: i64) -> Result<DiscClass> {
        let n = self.lattice_rank();
        if v.len() != n {
            return Err(LatticeError::Dimension { expected: n, got: v.len() });
        }
        let z: Vec<i64> = self.gram.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
        self.class_of_pairings(&z, m)
    }

    /// Class of the dual vector whose pairings with the basis are `z / m`.
    pub(crate) fn class_of_pairings(&self, z: &[i64], m: i64) -> Result<DiscClass> {
        if z.iter().any(|x| x % m != 0) {
            return Err(LatticeError::InvalidVector(format!("v/{m} is not in the dual lattice")));
        }
        let mut c = Vec::with_capacity(self.class_rows.len());
        for (row, d) in self.class_rows.iter().zip(&self.invariant_factors) {
            let s: i128 = row.iter().zip(z).map(|(a, b)| (*a as i128) * ((*b / m) as i128)).sum();
            c.push(s.rem_euclid(*d as i128) as i64);
        }
        Ok(self.wrap(c))
    }

    /// Exhaustive count of classes per q-value (keys in `[0, 2)`).
    pub fn census(&self, bound: u64) -> Result<BTreeMap<BigRational, u64>> {
        let size = self.order();
        if size > bound as u128 {
            return Err(LatticeError::TooLarge { size, bound: bound as u128 });
        }
        let mut counts: BTreeMap<i128, u64> = BTreeMap::new();
        for x in self.classes() {
            *counts.entry(self.q_num(&x.coeffs)).or_default() += 1;
        }
        Ok(counts.into_iter().map(|(k, v)| (self.rat_of(k), v)).collect())
    }

    pub fn census_strings(&self, bound: u64) -> Result<BTreeMap<String, u64>> {
        Ok(self.census(bound)?.into_iter().map(|(k, v)| (rat_string(&k), v)).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gens: Vec<Vec<String>> = self.generators.iter().map(|g| g.iter().map(rat_string).collect()).collect();
        let gram: Vec<Vec<String>> = self.gram_rational.iter().map(|r| r.iter().map(rat_string).collect()).collect();
        let q: Vec<String> = (0..self.invariant_factors.len()).map(|i| rat_string(&self.rat_of(self.q_num(&self.generator_class(i).coeffs)))).collect();
        serde_json::json!({
            "invariant_factors": self.invariant_factors,
            "order": self.order().to_string(),
            "generators": gens,
            "gram_rational": gram,
            "generator_q": q,
        })
    }
}

pub fn discriminant_form(l: &GramLattice) -> Result<DiscriminantForm> {
    DiscriminantForm::new(l)
}

pub fn value_census(d: &DiscriminantForm) -> Result<BTreeMap<BigRational, u64>> {
    d.census(DEFAULT_CENSUS_BOUND)
}

pub fn two_elementary_invariants(l: &GramLattice) -> Result<TwoElemInvariants> {
    if !l.is_even() {
        return Err(LatticeError::NotEven);
    }
    let d = DiscriminantForm::new(l)?;
    if !d.is_two_elementary() {
        return Err(LatticeError::NotTwoElementary);
    }
    let ell = d.invariant_factors().len();
    let integral = if d.order() <= DEFAULT_CENSUS_BOUND as u128 {
        d.census(DEFAULT_CENSUS_BOUND)?.keys().all(rat_is_integer)
    } else {
        // q is integral everywhere iff it is on generators, since 2b is integral here
        (0..ell).all(|i| d.q_num(&d.generator_class(i).coeffs) % d.den() == 0)
    };
    let sig = l.signature();
    Ok(TwoElemInvariants { s_plus: sig.positive, s_minus: sig.negative, ell, delta: u8::from(!integral) })
}

/// Name of the catalog lattice sharing `(s, ℓ, δ)` with `l`. Only certified
/// for even indefinite 2-elementary input, where the triple determines the
/// isometry class.
pub fn identify_two_elementary(l: &GramLattice, catalog: &[(String, GramLattice)]) -> Result<Identification> {
    if l.is_definite() {
        return Err(LatticeError::NotCertified("lattice is definite".into()));
    }
    let inv = match two_elementary_invariants(l) {
        Ok(i) => i,
        Err(e) => return Err(LatticeError::NotCertified(e.to_string())),
    };
    for (name, c) in catalog {
        if c.is_definite() {
            continue;
        }
        if two_elementary_invariants(c).ok() == Some(inv) {
            return Ok(Identification { name: Some(name.clone()), invariants: inv });
        }
    }
    Ok(Identification { name: None, invariants: inv })
}

pub fn genus_key(l: &GramLattice) -> Result<GenusKey> {
    let d = DiscriminantForm::new(l)?;
    Ok(GenusKey {
        signature: l.signature(),
        invariant_factors: d.invariant_factors().to_vec(),
        census: d.census_strings(DEFAULT_CENSUS_BOUND)?,
    })
}

/// `-q` as a rational in `[0, 2)`.
pub fn negate_q(q: &BigRational) -> BigRational {
    let two = big(2);
    if q.is_zero() {
        q.clone()
    } else {
        &two - q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::make_standard;
    use crate::matrix::parse_rat;

    #[test]
    fn a1_form() {
        let d = discriminant_form(&make_standard("A1").unwrap()).unwrap();
        assert_eq!(d.invariant_factors(), &[2]);
        assert_eq!(d.q_value(&d.generator_class(0)).unwrap(), parse_rat("3/2").unwrap());
        let half = d.class_of_fraction(&[1], 2).unwrap();
        assert_eq!(half, d.generator_class(0));
    }

    #[test]
    fn unimodular_is_trivial() {
        let d = discriminant_form(&make_standard("U").unwrap()).unwrap();
        assert!(d.is_trivial());
        let c = value_census(&d).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[&BigRational::zero()], 1);
    }

    #[test]
    fn u2_census() {
        let d = discriminant_form(&make_standard("U(2)").unwrap()).unwrap();
        let c = d.census_strings(16).unwrap();
        assert_eq!(c.get("0"), Some(&3));
        assert_eq!(c.get("1"), Some(&1));
        assert_eq!(
            two_elementary_invariants(&make_standard("U(2)").unwrap()).unwrap(),
            TwoElemInvariants { s_plus: 1, s_minus: 1, ell: 2, delta: 0 }
        );
    }

    #[test]
    fn q_is_well_defined_on_cosets() {
        let l = make_standard("D4+A2").unwrap();
        let d = discriminant_form(&l).unwrap();
        for x in d.classes() {
            let y = d.lift(&x).unwrap();
            let mut shifted = y.clone();
            shifted[0] += big(1);
            shifted[3] += big(-2);
            assert_eq!(d.class_of_dual(&shifted).unwrap(), x);
            let neg = d.scale(&x, -1).unwrap();
            assert_eq!(d.q_value(&neg).unwrap(), d.q_value(&x).unwrap());
        }
    }

    #[test]
    fn mismatched_parents_rejected() {
        let a = discriminant_form(&make_standard("A1").unwrap()).unwrap();
        let b = discriminant_form(&make_standard("A2").unwrap()).unwrap();
        assert_eq!(a.q_value(&b.zero()), Err(LatticeError::MismatchedParents));
    }

    #[test]
    fn definite_identification_refused() {
        let e8 = make_standard("E8").unwrap();
        assert!(matches!(identify_two_elementary(&e8, &[]), Err(LatticeError::NotCertified(_))));
    }
}
