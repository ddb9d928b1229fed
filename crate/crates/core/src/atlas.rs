//! Named lattices of the double-plane K3 setting: the invariant and
//! anti-invariant lattices `S`, `T`, their degenerations, the hyperbolic
//! lattice `M_v`, the K3 lattice with `S ⊕ T` inside it, and period-domain
//! predicates over rational points.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::disc::{genus_key, two_elementary_invariants, DiscClass, DiscriminantForm};
use crate::error::{LatticeError, Result};
use crate::expr::make_standard;
use crate::lattice::GramLattice;

/// A declared pairing `(a, b) = value` between distinguished vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub a: String,
    pub b: String,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub expression: String,
    pub lattice: GramLattice,
    /// Named vectors in the lattice basis, in display order.
    pub distinguished: Vec<(String, Vec<i64>)>,
    #[serde(default)]
    pub relations: Vec<Relation>,
    pub notes: String,
}

/// Images of a catalog lattice's basis in another catalog lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEmbedding {
    pub source: String,
    pub target: String,
    pub images: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
    pub embeddings: Vec<CatalogEmbedding>,
}

/// Outcome of the startup self-check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogCheck {
    pub relations_checked: usize,
    pub failures: Vec<String>,
    /// Nikulin triple of `S^⊥` in the K3 lattice, when computable.
    pub complement_invariants: Option<String>,
}

impl CatalogCheck {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn combo(n: usize, terms: &[(usize, i64)]) -> Vec<i64> {
    let mut v = vec![0; n];
    for &(i, c) in terms {
        v[i] += c;
    }
    v
}

fn place(n: usize, at: usize, coeffs: &[i64]) -> Vec<i64> {
    let mut v = vec![0; n];
    v[at..at + coeffs.len()].copy_from_slice(coeffs);
    v
}

fn rel(a: &str, b: &str, value: i64) -> Relation {
    Relation { a: a.into(), b: b.into(), value }
}

/// `x² = norm` for each name and zero between distinct names.
fn orthogonal_family(names: &[&str], norm: i64) -> Vec<Relation> {
    let mut out = Vec::new();
    for (i, a) in names.iter().enumerate() {
        out.push(rel(a, a, norm));
        for b in &names[i + 1..] {
            out.push(rel(a, b, 0));
        }
    }
    out
}

fn hyperbolic_pair(e: &str, f: &str, m: i64) -> Vec<Relation> {
    vec![rel(e, e, 0), rel(f, f, 0), rel(e, f, m)]
}

fn cross(xs: &[&str], ys: &[&str]) -> Vec<Relation> {
    xs.iter().flat_map(|a| ys.iter().map(move |b| rel(a, b, 0))).collect()
}

// Eight mutually orthogonal roots of E8 in simple-root coordinates. The
// first four span the `A1^4` of `S`, the rest are `r2..r5`.
const FRAME: [[i64; 8]; 8] = [
    [0, 0, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0],
    [0, 1, 1, 1, 0, 0, 0, 0],
    [0, 1, 1, 2, 2, 1, 0, 0],
    [0, 1, 1, 2, 2, 2, 2, 1],
    [2, 3, 3, 5, 4, 3, 2, 1],
    [2, 2, 4, 5, 4, 3, 2, 1],
];

const S_NAMES: [&str; 5] = ["s0", "s1", "s2", "s3", "s4"];
const R_NAMES: [&str; 5] = ["r1", "r2", "r3", "r4", "r5"];

fn entry(name: &str, expression: &str, notes: &str) -> Result<CatalogEntry> {
    Ok(CatalogEntry {
        name: name.into(),
        expression: expression.into(),
        lattice: make_standard(expression)?.relabeled(name),
        distinguished: Vec::new(),
        relations: Vec::new(),
        notes: notes.into(),
    })
}

fn named_basis(prefix: &str, count: usize, n: usize, start: usize) -> Vec<(String, Vec<i64>)> {
    (0..count).map(|i| (format!("{prefix}{}", i + 1), unit(n, start + i))).collect()
}

impl Catalog {
    pub fn standard() -> Result<Self> {
        let mut entries = Vec::new();

        let mut s = entry("S", "A1(-1)+A1^4", "invariant lattice of the covering involution")?;
        s.distinguished = (0..5).map(|i| (format!("s{i}"), unit(5, i))).collect();
        s.relations = orthogonal_family(&S_NAMES[1..], -2);
        s.relations.push(rel("s0", "s0", 2));
        s.relations.extend(cross(&["s0"], &S_NAMES[1..]));
        entries.push(s);

        let mut t = entry("T", "U+U+E8+A1^5", "anti-invariant lattice; generic transcendental lattice")?;
        t.distinguished = vec![("e1".into(), unit(17, 0)), ("f1".into(), unit(17, 1)), ("e2".into(), unit(17, 2)), ("f2".into(), unit(17, 3))];
        t.distinguished.extend(named_basis("a", 8, 17, 4));
        t.distinguished.extend(named_basis("r", 5, 17, 12));
        t.relations = orthogonal_family(&R_NAMES, -2);
        t.relations.extend(hyperbolic_pair("e1", "f1", 1));
        t.relations.extend(hyperbolic_pair("e2", "f2", 1));
        t.relations.extend(cross(&["e1", "f1", "e2", "f2"], &R_NAMES));
        entries.push(t);

        for (name, expr, notes) in [
            ("T1", "U+U+E7+A1^5", "r^⊥ in T for r of type Δ1"),
            ("T2", "U+U(2)+E8+D4", "r^⊥ in T for r of type Δ2"),
            ("T3", "U+U+E8+A1^4", "r^⊥ in T for r of type Δ3"),
            ("S1", "A1(-1)+A1^5", "T1^⊥ in the K3 lattice"),
            ("S2", "U(2)+D4", "T2^⊥ in the K3 lattice"),
            ("S3", "U+A1^4", "T3^⊥ in the K3 lattice"),
            ("S'", "U+A1^3+<-4>", "complement of T' in the K3 lattice"),
            ("T'", "U+U+E8+A1^3+<-4>", "r^⊥ in T for primitive r with r² = −4, r/2 ∈ T*"),
        ] {
            entries.push(entry(name, expr, notes)?);
        }

        let mut alt = entry("T_alt", "U+U(2)+A1+D4+E8", "second model of T with isotropic e, f, e', f'")?;
        alt.distinguished = vec![
            ("e".into(), unit(17, 0)),
            ("f".into(), unit(17, 1)),
            ("e'".into(), unit(17, 2)),
            ("f'".into(), unit(17, 3)),
            ("b".into(), unit(17, 4)),
        ];
        alt.distinguished.extend(named_basis("g", 4, 17, 5));
        alt.distinguished.extend(named_basis("a", 8, 17, 9));
        alt.relations = hyperbolic_pair("e", "f", 1);
        alt.relations.extend(hyperbolic_pair("e'", "f'", 2));
        alt.relations.extend(cross(&["e", "f"], &["e'", "f'", "b"]));
        alt.relations.push(rel("b", "b", -2));
        entries.push(alt);

        let mut mv = entry("M_v", "U+E8+D4+A1", "hyperbolic lattice with controlling vector e+f")?;
        mv.distinguished = vec![("e".into(), unit(15, 0)), ("f".into(), unit(15, 1))];
        mv.distinguished.extend(named_basis("a", 8, 15, 2));
        mv.distinguished.extend(named_basis("g", 4, 15, 10));
        mv.distinguished.push(("b".into(), unit(15, 14)));
        mv.distinguished.push(("u".into(), combo(15, &[(0, 1), (1, -1)])));
        mv.distinguished.push(("x".into(), combo(15, &[(0, 1), (1, 1)])));
        mv.relations = hyperbolic_pair("e", "f", 1);
        mv.relations.extend([rel("u", "u", -2), rel("x", "x", 2), rel("u", "x", 0), rel("b", "b", -2)]);
        mv.relations.extend(cross(&["u", "x"], &["a1", "g1", "b"]));
        entries.push(mv);

        // L = U³ ⊕ E8 ⊕ E8 with S = ⟨e1+f1⟩ ⊕ (four frame roots of the first E8)
        let n = 22;
        let mut k3 = entry("L_K3", "U^3+E8^2", "even unimodular lattice of signature (3,19)")?;
        for i in 1..=3 {
            k3.distinguished.push((format!("e{i}"), unit(n, 2 * i - 2)));
            k3.distinguished.push((format!("f{i}"), unit(n, 2 * i - 1)));
        }
        k3.distinguished.extend(named_basis("a", 8, n, 6));
        k3.distinguished.extend(named_basis("b", 8, n, 14));
        let s_img: Vec<Vec<i64>> = std::iter::once(combo(n, &[(0, 1), (1, 1)])).chain(FRAME[..4].iter().map(|c| place(n, 6, c))).collect();
        let r_img: Vec<Vec<i64>> = std::iter::once(combo(n, &[(0, 1), (1, -1)])).chain(FRAME[4..].iter().map(|c| place(n, 6, c))).collect();
        for (name, v) in S_NAMES.iter().zip(&s_img) {
            k3.distinguished.push((name.to_string(), v.clone()));
        }
        for (name, v) in R_NAMES.iter().zip(&r_img) {
            k3.distinguished.push((name.to_string(), v.clone()));
        }
        k3.relations = orthogonal_family(&S_NAMES[1..], -2);
        k3.relations.push(rel("s0", "s0", 2));
        k3.relations.extend(cross(&["s0"], &S_NAMES[1..]));
        k3.relations.extend(orthogonal_family(&R_NAMES, -2));
        k3.relations.extend(cross(&S_NAMES, &R_NAMES));
        entries.push(k3);

        let t_img: Vec<Vec<i64>> = (2..6).map(|i| unit(n, i)).chain((14..22).map(|i| unit(n, i))).chain(r_img).collect();
        let embeddings = vec![
            CatalogEmbedding { source: "S".into(), target: "L_K3".into(), images: s_img },
            CatalogEmbedding { source: "T".into(), target: "L_K3".into(), images: t_img },
        ];
        Ok(Self { entries, embeddings })
    }

    pub fn get(&self, name: &str) -> Result<&CatalogEntry> {
        self.entries.iter().find(|e| e.name == name).ok_or_else(|| LatticeError::Config(format!("no catalog entry `{name}`")))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn embedding(&self, source: &str, target: &str) -> Result<&CatalogEmbedding> {
        self.embeddings
            .iter()
            .find(|e| e.source == source && e.target == target)
            .ok_or_else(|| LatticeError::Config(format!("no embedding {source} -> {target}")))
    }

    /// `(name, lattice)` pairs for identification, restricted to `names`.
    pub fn candidates(&self, names: &[&str]) -> Vec<(String, GramLattice)> {
        names.iter().filter_map(|n| self.get(n).ok()).map(|e| (e.name.clone(), e.lattice.clone())).collect()
    }

    /// Swaps the lattices (not the names) of two entries.
    pub fn swap_lattices(&mut self, a: &str, b: &str) -> Result<()> {
        let i = self.entries.iter().position(|e| e.name == a).ok_or_else(|| LatticeError::Config(format!("no catalog entry `{a}`")))?;
        let j = self.entries.iter().position(|e| e.name == b).ok_or_else(|| LatticeError::Config(format!("no catalog entry `{b}`")))?;
        let li = self.entries[i].lattice.clone();
        self.entries[i].lattice = self.entries[j].lattice.clone().relabeled(a);
        self.entries[j].lattice = li.relabeled(b);
        Ok(())
    }

    /// Declared relations, embedding Gram compatibility, and `S^⊥ ≅ T` in
    /// the K3 lattice up to Nikulin invariants.
    pub fn validate(&self) -> CatalogCheck {
        let mut failures = Vec::new();
        let mut checked = 0;
        for e in &self.entries {
            let n = e.lattice.rank();
            let short: Vec<String> = e.distinguished.iter().filter(|(_, v)| v.len() != n).map(|(name, v)| format!("{}: `{name}` has {} coordinates, lattice rank {n}", e.name, v.len())).collect();
            if !short.is_empty() {
                failures.extend(short);
                continue;
            }
            for r in &e.relations {
                checked += 1;
                match (e.vector(&r.a), e.vector(&r.b)) {
                    (Ok(a), Ok(b)) => {
                        let got = e.lattice.pair(&a, &b);
                        if got != r.value {
                            failures.push(format!("{}: ({}, {}) = {got}, declared {}", e.name, r.a, r.b, r.value));
                        }
                    }
                    (Err(x), _) | (_, Err(x)) => failures.push(format!("{}: {x}", e.name)),
                }
            }
        }
        for emb in &self.embeddings {
            checked += 1;
            match (self.get(&emb.source), self.get(&emb.target)) {
                (Ok(src), Ok(tgt)) => match tgt.lattice.restrict(&emb.images, "image") {
                    Ok(img) if img.gram() == src.lattice.gram() => {}
                    Ok(_) => failures.push(format!("embedding {} -> {} does not preserve the form", emb.source, emb.target)),
                    Err(x) => failures.push(format!("embedding {} -> {}: {x}", emb.source, emb.target)),
                },
                (Err(x), _) | (_, Err(x)) => failures.push(x.to_string()),
            }
        }
        let complement_invariants = match self.k3_complement_check() {
            Ok((inv, problems)) => {
                failures.extend(problems);
                Some(inv)
            }
            Err(x) => {
                failures.push(format!("S in L_K3: {x}"));
                None
            }
        };
        CatalogCheck { relations_checked: checked, failures, complement_invariants }
    }

    fn k3_complement_check(&self) -> Result<(String, Vec<String>)> {
        let k3 = &self.get("L_K3")?.lattice;
        let s = self.embedding("S", "L_K3")?;
        let t = self.embedding("T", "L_K3")?;
        let mut problems = Vec::new();
        if k3.determinant().abs() != 1 || !k3.is_even() {
            problems.push("L_K3 is not even unimodular".into());
        }
        if !k3.is_primitive_sublattice(&s.images)? {
            problems.push("S is not primitive in L_K3".into());
        }
        if s.images.iter().any(|a| t.images.iter().any(|b| k3.pair(a, b) != 0)) {
            problems.push("images of S and T are not orthogonal".into());
        }
        let perp = k3.orthogonal_complement(&s.images)?;
        let t_img = k3.restrict(&t.images, "T image")?;
        if perp.lattice.determinant().abs() != t_img.determinant().abs() {
            problems.push("T image has finite index > 1 in S^⊥".into());
        }
        let inv = two_elementary_invariants(&perp.lattice)?;
        let want = two_elementary_invariants(&self.get("T")?.lattice)?;
        if inv != want {
            problems.push(format!("S^⊥ has invariants {inv}, T has {want}"));
        }
        Ok((inv.to_string(), problems))
    }

    /// For each generator pair `(x, φ(x))` of the identification, whether
    /// `x̂ + φ̂(x)` lies in the K3 lattice, using the catalog embeddings.
    pub fn glue_check(&self) -> Result<Vec<bool>> {
        let k3 = self.get("L_K3")?;
        let s = self.embedding("S", "L_K3")?;
        let t = self.embedding("T", "L_K3")?;
        let n = k3.lattice.rank();
        let image = |emb: &CatalogEmbedding, coords: &[i64]| -> Vec<i64> {
            let mut out = vec![0; n];
            for (c, row) in coords.iter().zip(&emb.images) {
                for (o, x) in out.iter_mut().zip(row) {
                    *o += c * x;
                }
            }
            out
        };
        let sv = |i: usize| -> Vec<i64> { (0..5).map(|j| i64::from(j == i)).collect() };
        let tv = self.get("T")?;
        let mut out = Vec::new();
        for j in 0..5 {
            let lift: Vec<i64> = if j == 0 { sv(0) } else { (1..5).filter(|&i| i != j).map(sv).fold(vec![0; 5], |a, v| a.iter().zip(&v).map(|(x, y)| x + y).collect()) };
            let r = tv.vector(&format!("r{}", j + 1))?;
            let sum: Vec<i64> = image(s, &lift).iter().zip(image(t, &r)).map(|(a, b)| a + b).collect();
            out.push(sum.iter().all(|x| x % 2 == 0));
        }
        Ok(out)
    }

    /// Classes of `A_S` and their images in `A_T` under `s0/2 ↦ ξ1`,
    /// `Σ_{i≠j} s_i/2 ↦ ξ_{j+1}`, on the five generators.
    pub fn disc_identification(&self) -> Result<DiscIdentification> {
        let s = self.get("S")?;
        let t = self.get("T")?;
        let ds = DiscriminantForm::new(&s.lattice)?;
        let dt = DiscriminantForm::new(&t.lattice)?;
        let mut source = vec![ds.class_of_fraction(&s.vector("s0")?, 2)?];
        for j in 1..=4 {
            let sum: Vec<i64> = (1..=4).filter(|&i| i != j).map(|i| s.vector(&format!("s{i}"))).collect::<Result<Vec<_>>>()?.into_iter().fold(vec![0; 5], |acc, v| acc.iter().zip(&v).map(|(a, b)| a + b).collect());
            source.push(ds.class_of_fraction(&sum, 2)?);
        }
        let target: Vec<DiscClass> = (1..=5).map(|i| dt.class_of_fraction(&t.vector(&format!("r{i}"))?, 2)).collect::<Result<_>>()?;
        Ok(DiscIdentification { source_form: ds, target_form: dt, source, target })
    }
}

/// A homomorphism `A_S → A_T` given on generators.
#[derive(Debug, Clone)]
pub struct DiscIdentification {
    pub source_form: DiscriminantForm,
    pub target_form: DiscriminantForm,
    pub source: Vec<DiscClass>,
    pub target: Vec<DiscClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub bijective: bool,
    pub negates_q: bool,
    /// `q_S(x)` and `q_T(φ(x))` for every `x`, keyed by the subset of generators.
    pub values: Vec<(String, String, String)>,
}

impl IdentificationReport {
    pub fn holds(&self) -> bool {
        self.bijective && self.negates_q
    }
}

impl DiscIdentification {
    pub fn image_of_marked(&self) -> &DiscClass {
        &self.target[0]
    }

    pub fn check(&self) -> Result<IdentificationReport> {
        let k = self.source.len();
        let (ds, dt) = (&self.source_form, &self.target_form);
        let mut seen_s = std::collections::BTreeSet::new();
        let mut seen_t = std::collections::BTreeSet::new();
        let mut negates = true;
        let mut values = Vec::new();
        for mask in 0u32..(1 << k) {
            let mut x = ds.zero();
            let mut y = dt.zero();
            for i in 0..k {
                if mask >> i & 1 == 1 {
                    x = ds.add(&x, &self.source[i])?;
                    y = dt.add(&y, &self.target[i])?;
                }
            }
            let qs = ds.q_value(&x)?;
            let qt = dt.q_value(&y)?;
            if crate::disc::negate_q(&qs) != qt {
                negates = false;
            }
            values.push((format!("{mask:05b}"), crate::matrix::rat_string(&qs), crate::matrix::rat_string(&qt)));
            seen_s.insert(x);
            seen_t.insert(y);
        }
        let full = 1u128 << k;
        let bijective = seen_s.len() as u128 == full && seen_t.len() as u128 == full && ds.order() == full && dt.order() == full;
        Ok(IdentificationReport { bijective, negates_q: negates, values })
    }
}

impl CatalogEntry {
    pub fn distinguished_vector(&self, name: &str) -> Option<&[i64]> {
        self.distinguished.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Parses `"e+f"`, `"2e1-r3"`, or a comma separated coordinate list.
    pub fn vector(&self, text: &str) -> Result<Vec<i64>> {
        parse_vector(text, self.lattice.rank(), |n| self.distinguished_vector(n).map(<[i64]>::to_vec))
    }

    pub fn genus(&self) -> Result<crate::disc::GenusKey> {
        genus_key(&self.lattice)
    }
}

/// Integer linear combination of named vectors, or explicit coordinates.
pub fn parse_vector(text: &str, rank: usize, lookup: impl Fn(&str) -> Option<Vec<i64>>) -> Result<Vec<i64>> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(LatticeError::Parse("empty vector".into()));
    }
    let bad = || LatticeError::Parse(format!("cannot read vector `{text}`"));
    if s.contains(',') || s.parse::<i64>().is_ok() {
        let v: Vec<i64> = s.trim_matches(|c| c == '[' || c == ']').split(',').map(|x| x.parse::<i64>().map_err(|_| bad())).collect::<Result<_>>()?;
        if v.len() != rank {
            return Err(LatticeError::Dimension { expected: rank, got: v.len() });
        }
        return Ok(v);
    }
    let mut out = vec![0i64; rank];
    let mut terms: Vec<(i64, String)> = Vec::new();
    let mut sign = 1;
    let mut cur = String::new();
    for c in s.chars() {
        if c == '+' || c == '-' {
            if !cur.is_empty() {
                terms.push((sign, std::mem::take(&mut cur)));
            } else if !terms.is_empty() || sign != 1 {
                return Err(bad());
            }
            sign = if c == '-' { -1 } else { 1 };
        } else {
            cur.push(c);
        }
    }
    if cur.is_empty() {
        return Err(bad());
    }
    terms.push((sign, cur));
    for (sign, term) in terms {
        let split = term.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
        let (num, name) = term.split_at(split);
        let name = name.strip_prefix('*').unwrap_or(name);
        let coeff = if num.is_empty() { 1 } else { num.parse::<i64>().map_err(|_| bad())? };
        let v = lookup(name).ok_or_else(|| LatticeError::Parse(format!("unknown vector `{name}`")))?;
        if v.len() != rank {
            return Err(LatticeError::Dimension { expected: rank, got: v.len() });
        }
        for (o, x) in out.iter_mut().zip(&v) {
            *o += sign * coeff * x;
        }
    }
    Ok(out)
}

/// `ω = re + i·im` with rational coordinates in the basis of `T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodPoint {
    #[serde(with = "rat_vec")]
    pub re: Vec<BigRational>,
    #[serde(with = "rat_vec")]
    pub im: Vec<BigRational>,
}

mod rat_vec {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::matrix::{parse_rat, rat_string};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(rat_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter().map(|x| parse_rat(x).map_err(serde::de::Error::custom)).collect()
    }
}

mod rat_one {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::matrix::{parse_rat, rat_string};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_string(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        parse_rat(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl PeriodPoint {
    pub fn new(re: Vec<BigRational>, im: Vec<BigRational>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(LatticeError::Dimension { expected: re.len(), got: im.len() });
        }
        if re.iter().chain(&im).all(Zero::is_zero) {
            return Err(LatticeError::InvalidVector("period point is zero".into()));
        }
        Ok(Self { re, im })
    }

    pub fn from_integers(re: &[i64], im: &[i64]) -> Result<Self> {
        let conv = |v: &[i64]| v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
        Self::new(conv(re), conv(im))
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        Self { re: self.re.iter().map(|x| x * c).collect(), im: self.im.iter().map(|x| x * c).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    InDomain,
    NotInDomain,
}

/// `(ω, ω)` split as `(re,re) − (im,im)` and `(re,im)`, plus `(ω, ω̄)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodValues {
    #[serde(with = "rat_one")]
    pub re_re: BigRational,
    #[serde(with = "rat_one")]
    pub im_im: BigRational,
    #[serde(with = "rat_one")]
    pub re_im: BigRational,
}

fn rational_pair(l: &GramLattice, x: &[BigRational], y: &[BigRational]) -> BigRational {
    let g = l.gram();
    let mut acc = BigRational::zero();
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            let gij = g[(i, j)];
            if gij != 0 {
                acc += xi * yj * BigRational::from_integer(BigInt::from(gij));
            }
        }
    }
    acc
}

pub fn period_values(t: &GramLattice, w: &PeriodPoint) -> Result<PeriodValues> {
    if w.re.len() != t.rank() {
        return Err(LatticeError::Dimension { expected: t.rank(), got: w.re.len() });
    }
    Ok(PeriodValues { re_re: rational_pair(t, &w.re, &w.re), im_im: rational_pair(t, &w.im, &w.im), re_im: rational_pair(t, &w.re, &w.im) })
}

/// `(ω, ω) = 0` and `(ω, ω̄) > 0`.
pub fn period_membership(t: &GramLattice, w: &PeriodPoint) -> Result<Membership> {
    let v = period_values(t, w)?;
    let inside = v.re_re == v.im_im && v.re_im.is_zero() && v.re_re.is_positive();
    Ok(if inside { Membership::InDomain } else { Membership::NotInDomain })
}

/// `ω ∈ H_r`: `ω` in the period domain and `(r, ω) = 0`.
pub fn hyperplane_membership(t: &GramLattice, w: &PeriodPoint, r: &[i64]) -> Result<bool> {
    if r.len() != t.rank() {
        return Err(LatticeError::Dimension { expected: t.rank(), got: r.len() });
    }
    let n = t.norm(r);
    if n != -2 {
        return Err(LatticeError::InvalidVector(format!("hyperplanes need a −2 vector, got norm {n}")));
    }
    if period_membership(t, w)? == Membership::NotInDomain {
        return Ok(false);
    }
    let rr: Vec<BigRational> = r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
    Ok(rational_pair(t, &rr, &w.re).is_zero() && rational_pair(t, &rr, &w.im).is_zero())
}

/// Nikulin triples of every 2-elementary catalog entry.
pub fn catalog_invariants(c: &Catalog) -> BTreeMap<String, String> {
    c.entries.iter().filter_map(|e| two_elementary_invariants(&e.lattice).ok().map(|i| (e.name.clone(), i.to_string()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_catalog_is_consistent() {
        let c = Catalog::standard().unwrap();
        let check = c.validate();
        assert!(check.holds(), "{:?}", check.failures);
        assert_eq!(check.complement_invariants.as_deref(), Some("((2,15),5,1)"));
    }

    #[test]
    fn vector_parsing() {
        let c = Catalog::standard().unwrap();
        let mv = c.get("M_v").unwrap();
        assert_eq!(mv.vector("e+f").unwrap(), mv.vector("x").unwrap());
        assert_eq!(mv.vector("2e - f").unwrap()[..2], [2, -1]);
        assert_eq!(mv.vector("-e").unwrap()[0], -1);
        assert!(mv.vector("e+").is_err());
        assert!(mv.vector("zz").is_err());
        assert_eq!(mv.vector("1,1,0,0,0,0,0,0,0,0,0,0,0,0,0").unwrap(), mv.vector("x").unwrap());
        assert!(mv.vector("1,1").is_err());
    }

    #[test]
    fn broken_relation_is_reported() {
        let mut c = Catalog::standard().unwrap();
        c.entries[0].relations.push(rel("s0", "s1", 1));
        assert!(!c.validate().holds());
    }

    #[test]
    fn identification_negates_q() {
        let c = Catalog::standard().unwrap();
        let rep = c.disc_identification().unwrap().check().unwrap();
        assert!(rep.holds());
        assert_eq!(rep.values.len(), 32);
        assert_eq!(c.glue_check().unwrap(), vec![true; 5]);
    }
}
