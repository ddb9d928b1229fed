//! Orbit labels of (−2)-vectors and isotropic vectors, read off from norm,
//! divisibility and the class of `v/2` in the discriminant form.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::disc::{DiscClass, DiscriminantForm};
use crate::disc_group::{disc_orthogonal_group, DiscIsometry, orbits_on_classes, GroupSpec, OrthogonalGroup};
use crate::error::{LatticeError, Result};
use crate::lattice::GramLattice;
use crate::matrix::{gcd_slice, parse_rat};
use crate::snf::solve_integer;
use crate::IntMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Minus2Label {
    Delta1,
    Delta2,
    Delta3,
    Delta3a,
    Delta3b,
}

impl fmt::Display for Minus2Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Delta1 => "Δ1",
            Self::Delta2 => "Δ2",
            Self::Delta3 => "Δ3",
            Self::Delta3a => "Δ3a",
            Self::Delta3b => "Δ3b",
        })
    }
}

/// `I2a`: `b(v/2, ξ) = 0`; `I2b`: `b(v/2, ξ) = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IsotropicLabel {
    I1,
    I2,
    I2a,
    I2b,
}

impl fmt::Display for IsotropicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::I1 => "I1",
            Self::I2 => "I2",
            Self::I2a => "I2a",
            Self::I2b => "I2b",
        })
    }
}

/// A lattice with its discriminant form, `O(q)` and the `O(q)`-fixed class
/// with `q = −1/2`, computed once and shared by all classifications.
#[derive(Debug, Clone)]
pub struct ClassifierContext {
    lattice: GramLattice,
    form: DiscriminantForm,
    group: OrthogonalGroup,
    fixed: Option<DiscClass>,
}

impl ClassifierContext {
    pub fn new(lattice: &GramLattice) -> Result<Self> {
        if !lattice.is_even() {
            return Err(LatticeError::NotEven);
        }
        let form = DiscriminantForm::new(lattice)?;
        let group = disc_orthogonal_group(&form)?;
        let minus_half = parse_rat("3/2")?;
        let orbits = orbits_on_classes(&form, &group, &GroupSpec::Full, |x| form.q_value(x).map(|q| q == minus_half).unwrap_or(false))?;
        let singles: Vec<&Vec<DiscClass>> = orbits.iter().filter(|o| o.len() == 1).collect();
        let fixed = if singles.len() == 1 { Some(singles[0][0].clone()) } else { None };
        Ok(Self { lattice: lattice.clone(), form, group, fixed })
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.lattice
    }

    pub fn form(&self) -> &DiscriminantForm {
        &self.form
    }

    pub fn group(&self) -> &OrthogonalGroup {
        &self.group
    }

    /// The class called `O₁`, if `O(q)` fixes exactly one class with `q = −1/2`.
    pub fn fixed_class(&self) -> Option<&DiscClass> {
        self.fixed.as_ref()
    }

    fn check_vector(&self, v: &[i64], norm: i64) -> Result<i64> {
        let n = self.lattice.rank();
        if v.len() != n {
            return Err(LatticeError::Dimension { expected: n, got: v.len() });
        }
        let got = self.lattice.norm(v);
        if got != norm {
            return Err(LatticeError::InvalidVector(format!("norm {got}, expected {norm}")));
        }
        if gcd_slice(v) != 1 {
            return Err(LatticeError::InvalidVector("not primitive".into()));
        }
        self.lattice.divisibility(v)
    }

    pub fn classify_minus2(&self, r: &[i64], marked: Option<&DiscClass>) -> Result<Minus2Label> {
        let div = self.check_vector(r, -2)?;
        if let Some(m) = marked {
            if !self.form.owns(m) {
                return Err(LatticeError::MismatchedParents);
            }
        }
        if div == 1 {
            return Ok(Minus2Label::Delta1);
        }
        let half = self.form.class_of_fraction(r, 2)?;
        if Some(&half) == self.fixed.as_ref() {
            return Ok(Minus2Label::Delta2);
        }
        Ok(match marked {
            None => Minus2Label::Delta3,
            Some(m) if *m == half => Minus2Label::Delta3b,
            Some(_) => Minus2Label::Delta3a,
        })
    }

    pub fn classify_isotropic(&self, v: &[i64], marked: Option<&DiscClass>) -> Result<IsotropicLabel> {
        let div = self.check_vector(v, 0)?;
        match div {
            1 => Ok(IsotropicLabel::I1),
            2 => match marked {
                None => Ok(IsotropicLabel::I2),
                Some(m) => {
                    let half = self.form.class_of_fraction(v, 2)?;
                    Ok(if self.form.b_value(&half, m)?.is_zero() { IsotropicLabel::I2a } else { IsotropicLabel::I2b })
                }
            },
            d => Err(LatticeError::Unsupported(format!("isotropic vector of divisibility {d}"))),
        }
    }
}

/// Explicit isomorphism `A_K → A_{K⊥}` negating `q`, for `K` primitive in a
/// unimodular `L`. The images of the generators of `A_K` are recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplementWitness {
    pub source_factors: Vec<i64>,
    pub target_factors: Vec<i64>,
    pub images: Vec<DiscClass>,
    pub negates_q: bool,
    pub bijective: bool,
}

impl ComplementWitness {
    pub fn holds(&self) -> bool {
        self.negates_q && self.bijective
    }
}

pub fn complement_form_check(sub: &[Vec<i64>], ambient: &GramLattice) -> Result<ComplementWitness> {
    if ambient.determinant().abs() != 1 {
        return Err(LatticeError::Validation("ambient lattice is not unimodular".into()));
    }
    if !ambient.is_primitive_sublattice(sub)? {
        return Err(LatticeError::InvalidVector("sublattice is not primitive".into()));
    }
    let k = ambient.restrict(sub, "K")?;
    let perp = ambient.orthogonal_complement(sub)?;
    let fk = DiscriminantForm::new(&k)?;
    let fp = DiscriminantForm::new(&perp.lattice)?;
    let g = ambient.gram();
    let b = IntMatrix::from_rows(sub.to_vec())?;
    let bg = b.mul(g)?;
    let c = &perp.embedding;
    let cg = c.mul(g)?;
    let gc_inv = perp.lattice.gram().inverse_rational()?;
    let n = ambient.rank();

    let mut images = Vec::new();
    for gen in fk.generators() {
        // x = Bᵀ gen in ambient coordinates; pairings of x with K are G_K gen
        let mut x = vec![BigRational::zero(); n];
        for (gi, row) in gen.iter().zip(sub) {
            for (xj, &r) in x.iter_mut().zip(row) {
                *xj += gi * BigRational::from_integer(r.into());
            }
        }
        let target: Vec<i64> = (0..sub.len())
            .map(|a| {
                let s: BigRational = (0..n).map(|j| &x[j] * BigRational::from_integer(bg[(a, j)].into())).sum();
                crate::matrix::rat_to_i64(&s).ok_or(LatticeError::Validation("generator not dual".into()))
            })
            .collect::<Result<_>>()?;
        let lambda = solve_integer(&bg, &target)?.ok_or_else(|| LatticeError::Validation("no lift in the ambient lattice".into()))?;
        let w: Vec<BigRational> = (0..n).map(|j| BigRational::from_integer(lambda[j].into()) - &x[j]).collect();
        // coordinates of w in the complement basis: G_C⁻¹ · C G w
        let cgw: Vec<BigRational> = (0..c.rows())
            .map(|a| (0..n).map(|j| &w[j] * BigRational::from_integer(cg[(a, j)].into())).sum())
            .collect();
        let y: Vec<BigRational> = gc_inv.iter().map(|row| row.iter().zip(&cgw).map(|(p, q)| p * q).sum()).collect();
        images.push(fp.class_of_dual(&y)?);
    }

    let hom = DiscIsometry { images: images.iter().map(|c| c.coeffs().to_vec()).collect() };
    let mut negates_q = true;
    let mut seen = std::collections::BTreeSet::new();
    for x in fk.classes() {
        let img = fp.class(&hom.apply_coeffs(fp.invariant_factors(), x.coeffs()))?;
        let qx = fk.q_value(&x)?;
        let qy = fp.q_value(&img)?;
        if crate::disc::negate_q(&qx) != qy {
            negates_q = false;
        }
        seen.insert(img);
    }
    let bijective = fk.order() == fp.order() && seen.len() as u128 == fp.order();
    Ok(ComplementWitness {
        source_factors: fk.invariant_factors().to_vec(),
        target_factors: fp.invariant_factors().to_vec(),
        images,
        negates_q,
        bijective,
    })
}
