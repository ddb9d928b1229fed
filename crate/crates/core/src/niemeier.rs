//! Niemeier lattices from glue codes, and the genus table of complements of
//! `E7+A1^4` and `E7+D4`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::disc::genus_key;
use crate::embed::{embed_with_table, RootTable};
use crate::error::{LatticeError, Result};
use crate::expr::ade_gram;
use crate::lattice::{GramLattice, Signature};
use crate::matrix::{parse_rat, rat_to_i64, IntMatrix};
use crate::roots::{identify_root_subset, identify_simple_roots, RootSystemType};
use crate::snf::hnf_rows;

pub const DATA_ENV: &str = "LATTICE_FORGE_DATA";
pub const CACHE_ENV: &str = "LATTICE_FORGE_CACHE";
const GLUE_FORMAT: &str = "lattice-forge/niemeier-glue";
const CACHE_VERSION: &str = "genus-row-v1";

/// Directory holding the glue files: `$LATTICE_FORGE_DATA/niemeier` if the
/// variable is set, otherwise the copy shipped with this crate.
pub fn default_data_dir() -> PathBuf {
    match std::env::var_os(DATA_ENV) {
        Some(root) => PathBuf::from(root).join("niemeier"),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("niemeier"),
    }
}

pub fn default_cache_dir() -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(d) => PathBuf::from(d),
        None => std::env::temp_dir().join("lattice-forge-cache"),
    }
}

/// On-disk glue code: components in basis order, glue vectors as exact
/// fractions over each component's simple roots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueFile {
    pub format: String,
    pub version: u32,
    pub root_type: String,
    pub components: Vec<String>,
    #[serde(default)]
    pub glue_weights: Vec<Vec<usize>>,
    pub glue: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone)]
pub struct NiemeierLattice {
    pub root_type: RootSystemType,
    pub components: Vec<String>,
    /// Glue vectors over the simple roots of the root lattice.
    pub glue: Vec<Vec<BigRational>>,
    /// The unimodular lattice, in a Hermite basis of root lattice + glue.
    pub lattice: GramLattice,
    /// Root lattice, simple roots in component order.
    pub root_lattice: GramLattice,
    /// Rows: basis of `lattice` written over the simple roots.
    pub basis_over_roots: Vec<Vec<BigRational>>,
    /// Component index ranges inside the root lattice basis.
    pub blocks: Vec<(RootSystemType, usize, usize)>,
    pub roots: RootTable,
    pub source_hash: String,
}

fn data_err(msg: impl Into<String>) -> LatticeError {
    LatticeError::Data(msg.into())
}

fn hash_bytes(b: &[u8]) -> String {
    hex::encode(Sha256::digest(b))
}

/// Glue files found in `dir`, keyed by declared root type.
pub fn available(dir: &Path) -> Result<BTreeMap<RootSystemType, PathBuf>> {
    let rd = fs::read_dir(dir).map_err(|e| data_err(format!("{}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    let mut paths: Vec<PathBuf> = rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect();
    paths.sort();
    for p in paths {
        let text = fs::read_to_string(&p).map_err(|e| data_err(format!("{}: {e}", p.display())))?;
        if let Ok(f) = serde_json::from_str::<GlueFile>(&text) {
            if let Ok(t) = f.root_type.parse() {
                out.insert(t, p);
            }
        }
    }
    Ok(out)
}

pub fn load_niemeier(root_type: &RootSystemType) -> Result<NiemeierLattice> {
    load_niemeier_from(&default_data_dir(), root_type)
}

pub fn load_niemeier_from(dir: &Path, root_type: &RootSystemType) -> Result<NiemeierLattice> {
    let files = available(dir)?;
    let path = files.get(root_type).ok_or_else(|| data_err(format!("no glue data for {root_type} in {}", dir.display())))?;
    load_file(path)
}

pub fn load_file(path: &Path) -> Result<NiemeierLattice> {
    let bytes = fs::read(path).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    let file: GlueFile = serde_json::from_slice(&bytes).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    build(&file, hash_bytes(&bytes))
}

fn lcm_den(v: &[BigRational], acc: BigInt) -> BigInt {
    v.iter().fold(acc, |a, x| a.lcm(x.denom()))
}

/// Builds and validates: even, unimodular, rank 24, roots exactly the
/// declared root system.
pub fn build(file: &GlueFile, source_hash: String) -> Result<NiemeierLattice> {
    if file.format != GLUE_FORMAT {
        return Err(data_err(format!("unknown format `{}`", file.format)));
    }
    let root_type: RootSystemType = file.root_type.parse()?;
    let mut blocks = Vec::new();
    let mut sum = RootSystemType::empty();
    let mut grams = Vec::new();
    let mut offset = 0;
    for c in &file.components {
        let t: RootSystemType = c.parse()?;
        let flat = t.flat();
        if flat.len() != 1 {
            return Err(data_err(format!("component `{c}` is not irreducible")));
        }
        let (f, n) = flat[0];
        grams.push(ade_gram(f.letter(), n)?);
        blocks.push((t.clone(), offset, offset + n));
        offset += n;
        sum = sum.merged(&t);
    }
    if sum != root_type {
        return Err(LatticeError::Validation(format!("components {sum} do not match declared {root_type}")));
    }
    let refs: Vec<&IntMatrix> = grams.iter().collect();
    let root_lattice = GramLattice::new(IntMatrix::block_diag(&refs), root_type.to_string())?;
    let n = root_lattice.rank();
    if n != 24 {
        return Err(LatticeError::Validation(format!("rank {n}, expected 24")));
    }
    let mut glue = Vec::new();
    for g in &file.glue {
        if g.len() != blocks.len() {
            return Err(data_err("glue vector does not list every component"));
        }
        let mut v = Vec::with_capacity(n);
        for (part, (_, s, e)) in g.iter().zip(&blocks) {
            if part.len() != e - s {
                return Err(data_err("glue component has wrong length"));
            }
            for x in part {
                v.push(parse_rat(x)?);
            }
        }
        glue.push(v);
    }
    // Hermite basis of ℤ^n + Σ ℤ·glue, scaled to integers
    let den = glue.iter().fold(BigInt::one(), |a, g| lcm_den(g, a));
    let den_i = i64::try_from(&den).map_err(|_| LatticeError::Overflow)?;
    let mut rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if i == j { den_i } else { 0 }).collect()).collect();
    for g in &glue {
        let scaled: Vec<i64> = g
            .iter()
            .map(|x| rat_to_i64(&(x * BigRational::from_integer(den.clone()))).ok_or(LatticeError::Overflow))
            .collect::<Result<_>>()?;
        rows.push(scaled);
    }
    let h = hnf_rows(&rows, n)?;
    let d = BigRational::from_integer(den.clone());
    let basis_over_roots: Vec<Vec<BigRational>> =
        h.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into()) / &d).collect()).collect();
    let mut gram = vec![vec![0i64; n]; n];
    let gr = root_lattice.gram();
    for i in 0..n {
        for j in 0..n {
            let mut s = BigRational::zero();
            for a in 0..n {
                if basis_over_roots[i][a].is_zero() {
                    continue;
                }
                for b in 0..n {
                    let g = gr[(a, b)];
                    if g != 0 && !basis_over_roots[j][b].is_zero() {
                        s += &basis_over_roots[i][a] * &basis_over_roots[j][b] * BigRational::from_integer(g.into());
                    }
                }
            }
            gram[i][j] = rat_to_i64(&s).ok_or_else(|| LatticeError::Validation("glue pairs non-integrally".into()))?;
        }
    }
    let lattice = GramLattice::from_rows(gram, format!("N({root_type})"))?;
    if !lattice.is_even() {
        return Err(LatticeError::Validation(format!("N({root_type}) is not even")));
    }
    if lattice.determinant().abs() != 1 {
        return Err(LatticeError::Validation(format!("N({root_type}) has determinant {}", lattice.determinant())));
    }
    let roots = RootTable::from_lattice(&lattice)?;
    if roots.len() != root_type.root_count() {
        return Err(LatticeError::Validation(format!(
            "N({root_type}) has {} roots, expected {}",
            roots.len(),
            root_type.root_count()
        )));
    }
    let found = identify_root_subset(&lattice, &roots.roots)?;
    if found != root_type {
        return Err(LatticeError::Validation(format!("roots of the glued lattice form {found}, not {root_type}")));
    }
    Ok(NiemeierLattice {
        root_type,
        components: file.components.clone(),
        glue,
        lattice,
        root_lattice,
        basis_over_roots,
        blocks,
        roots,
        source_hash,
    })
}

impl NiemeierLattice {
    /// Coordinates over the simple roots of a vector given in the `lattice` basis.
    pub fn to_root_coords(&self, v: &[i64]) -> Result<Vec<i64>> {
        let n = v.len();
        (0..n)
            .map(|a| {
                let s: BigRational = v.iter().zip(&self.basis_over_roots).map(|(&c, row)| &row[a] * BigRational::from_integer(c.into())).sum();
                rat_to_i64(&s).ok_or_else(|| LatticeError::InvalidVector("not in the root lattice".into()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusEntry {
    pub complement_root_type: RootSystemType,
    /// Complement in `N` is an index-2 overlattice of the complement in the root lattice.
    pub saturated: bool,
    pub index: u64,
    pub rank: usize,
    pub signature: Signature,
    pub invariant_factors: Vec<i64>,
    pub census: BTreeMap<String, u64>,
    pub label: String,
    /// Images of the source simple roots, in the lattice basis of `N`.
    pub embedding: Vec<Vec<i64>>,
    pub complement_gram: Vec<Vec<i64>>,
    /// A plain root lattice already listed in an earlier row.
    #[serde(default)]
    pub repeated: bool,
}

impl GenusEntry {
    pub fn key(&self) -> (RootSystemType, bool, Vec<i64>, BTreeMap<String, u64>) {
        (self.complement_root_type.clone(), self.saturated, self.invariant_factors.clone(), self.census.clone())
    }
}

fn isqrt(x: i128) -> Option<u64> {
    let r = (x as f64).sqrt().round() as i128;
    (r >= 0 && r * r == x).then_some(r as u64)
}

/// Complements of primitive embeddings of `source` into `n`, one entry per
/// distinct (root type, saturation flag, discriminant data).
pub fn complement_entries(source: &RootSystemType, n: &NiemeierLattice) -> Result<Vec<GenusEntry>> {
    let embeddings = embed_with_table(source, &n.roots)?;
    let mut out: Vec<GenusEntry> = Vec::new();
    for e in embeddings {
        if !n.lattice.is_primitive_sublattice(&e.images)? {
            continue;
        }
        let idx: Vec<usize> = e.images.iter().map(|v| n.roots.index_of(v).expect("image is a root")).collect();
        let comp_roots: Vec<Vec<i64>> = n.roots.orthogonal_to(&idx).into_iter().map(|i| n.roots.roots[i].clone()).collect();
        let comp_type = identify_root_subset(&n.lattice, &comp_roots)?;
        let c_n = n.lattice.orthogonal_complement(&e.images)?;
        let images_r: Vec<Vec<i64>> = e.images.iter().map(|v| n.to_root_coords(v)).collect::<Result<_>>()?;
        let c_r = n.root_lattice.orthogonal_complement(&images_r)?;
        let ratio = c_r.lattice.determinant().abs() / c_n.lattice.determinant().abs();
        let index = isqrt(ratio).ok_or_else(|| LatticeError::Validation("complement index is not an integer".into()))?;
        let key = genus_key(&c_n.lattice)?;
        let saturated = index == 2;
        let label = entry_label(n, &images_r, &comp_type, c_n.lattice.rank(), saturated)?;
        let entry = GenusEntry {
            complement_root_type: comp_type,
            saturated,
            index,
            rank: c_n.lattice.rank(),
            signature: key.signature,
            invariant_factors: key.invariant_factors,
            census: key.census,
            label,
            embedding: e.images.clone(),
            complement_gram: c_n.lattice.gram().to_rows(),
            repeated: false,
        };
        if !out.iter().any(|x| x.key() == entry.key()) {
            out.push(entry);
        }
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(out)
}

/// Pretty label; complements not spanned by roots are named per component,
/// as in `(A₁⁴)^⊥ in A₁₇`.
fn entry_label(n: &NiemeierLattice, images_r: &[Vec<i64>], comp_type: &RootSystemType, rank: usize, saturated: bool) -> Result<String> {
    if comp_type.rank() == rank {
        let t = comp_type.pretty();
        return Ok(if saturated { format!("overline{{{t}}}") } else { t });
    }
    let mut parts = Vec::new();
    for (t, s, e) in &n.blocks {
        let inside: Vec<Vec<i64>> = images_r.iter().filter(|v| v[*s..*e].iter().any(|&x| x != 0)).map(|v| v[*s..*e].to_vec()).collect();
        if inside.is_empty() || inside.len() == e - s {
            continue;
        }
        let block = t.lattice()?;
        let sub_type = identify_simple_roots(&block, &inside)?;
        let roots = crate::fincke::vectors_of_norm(&block, -2)?;
        let orth = crate::roots::orthogonal_roots(&block, &roots, &inside);
        let orth_type = identify_root_subset(&block, &orth)?;
        if orth_type.rank() < (e - s) - inside.len() {
            parts.push(format!("({})^⊥ in {}", sub_type.pretty(), t.pretty()));
        }
    }
    Ok(parts.join("⊕"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusRow {
    pub row: String,
    pub niemeier: RootSystemType,
    pub g1: Vec<GenusEntry>,
    pub g2: Vec<GenusEntry>,
    pub source_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusTable {
    pub rows: Vec<GenusRow>,
}

pub fn r1() -> RootSystemType {
    "E7+A1^4".parse().expect("valid type")
}

pub fn r2() -> RootSystemType {
    "E7+D4".parse().expect("valid type")
}

/// Table rows in order a–d.
pub fn table_rows() -> Vec<(&'static str, RootSystemType)> {
    ["E8^3", "E7^2+D10", "D16+E8", "A17+E7"]
        .iter()
        .zip(["a", "b", "c", "d"])
        .map(|(t, r)| (r, t.parse().expect("valid type")))
        .collect()
}

#[derive(Debug, Clone)]
pub struct GenusOptions {
    pub data_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
}

impl Default for GenusOptions {
    fn default() -> Self {
        Self { data_dir: default_data_dir(), cache_dir: Some(default_cache_dir()) }
    }
}

pub fn genus_row(row: &str, root_type: &RootSystemType, opts: &GenusOptions) -> Result<GenusRow> {
    let files = available(&opts.data_dir)?;
    let path = files.get(root_type).ok_or_else(|| data_err(format!("no glue data for {root_type}")))?;
    let bytes = fs::read(path).map_err(|e| data_err(e.to_string()))?;
    let mut h = Sha256::new();
    h.update(CACHE_VERSION.as_bytes());
    h.update(&bytes);
    let hash = hex::encode(h.finalize());
    let cache_file = opts.cache_dir.as_ref().map(|d| d.join(format!("row-{row}-{}.json", &hash[..16])));
    if let Some(cf) = &cache_file {
        if let Ok(text) = fs::read_to_string(cf) {
            if let Ok(cached) = serde_json::from_str::<GenusRow>(&text) {
                if cached.source_hash == hash {
                    return Ok(cached);
                }
            }
        }
    }
    let file: GlueFile = serde_json::from_slice(&bytes).map_err(|e| data_err(e.to_string()))?;
    let n = build(&file, hash_bytes(&bytes))?;
    let g1 = complement_entries(&r1(), &n)?;
    let g2 = complement_entries(&r2(), &n)?;
    let out = GenusRow { row: row.to_string(), niemeier: root_type.clone(), g1, g2, source_hash: hash };
    if let Some(cf) = &cache_file {
        if let Some(dir) = cf.parent() {
            let _ = fs::create_dir_all(dir);
        }
        if let Ok(text) = serde_json::to_string(&out) {
            let _ = fs::write(cf, text);
        }
    }
    Ok(out)
}

pub fn genus_table() -> Result<GenusTable> {
    genus_table_with(&GenusOptions::default())
}

pub fn genus_table_with(opts: &GenusOptions) -> Result<GenusTable> {
    let rows: Vec<Result<GenusRow>> = table_rows().par_iter().map(|(r, t)| genus_row(r, t, opts)).collect();
    let mut rows: Vec<GenusRow> = rows.into_iter().collect::<Result<_>>()?;
    mark_repeats(&mut rows);
    Ok(GenusTable { rows })
}

/// Plain entries are the root lattices themselves, so one already shown in
/// an earlier row is the same lattice and is flagged.
fn mark_repeats(rows: &mut [GenusRow]) {
    let mut seen: Vec<(bool, RootSystemType)> = Vec::new();
    for r in rows.iter_mut() {
        let mut here = Vec::new();
        for (g, list) in [(false, &mut r.g1), (true, &mut r.g2)] {
            for e in list.iter_mut() {
                let plain = e.index == 1 && e.complement_root_type.rank() == e.rank;
                e.repeated = plain && seen.contains(&(g, e.complement_root_type.clone()));
                if plain {
                    here.push((g, e.complement_root_type.clone()));
                }
            }
        }
        seen.extend(here);
    }
}

impl GenusRow {
    pub fn listed_g1(&self) -> Vec<&GenusEntry> {
        self.g1.iter().filter(|e| !e.repeated).collect()
    }

    pub fn listed_g2(&self) -> Vec<&GenusEntry> {
        self.g2.iter().filter(|e| !e.repeated).collect()
    }
}

impl GenusTable {
    /// Members of each genus share signature and discriminant census.
    pub fn genus_consistent(&self) -> bool {
        let same = |entries: Vec<&GenusEntry>| entries.windows(2).all(|w| w[0].signature == w[1].signature && w[0].census == w[1].census && w[0].invariant_factors == w[1].invariant_factors);
        same(self.rows.iter().flat_map(|r| r.g1.iter()).collect()) && same(self.rows.iter().flat_map(|r| r.g2.iter()).collect())
    }

    pub fn render_text(&self) -> String {
        let mut out = String::from("row  N(R)          G1                                                          G2\n");
        for r in &self.rows {
            let g1: Vec<&str> = r.listed_g1().iter().map(|e| e.label.as_str()).collect();
            let g2: Vec<&str> = r.listed_g2().iter().map(|e| e.label.as_str()).collect();
            out.push_str(&format!("{:<4} {:<13} {:<59} {}\n", r.row, r.niemeier.to_string(), g1.join(", "), g2.join(", ")));
        }
        out
    }
}
