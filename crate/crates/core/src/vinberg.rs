//! Vinberg's algorithm on even hyperbolic lattices of signature `(1, n)`.
//!
//! Roots are vectors `r` with `r² = k` for an allowed negative even `k` and
//! `2(r, x)/k ∈ ℤ` for all `x`. Heights are compared through the exact
//! rational `h² = (r, x̄)² / (−r²)`.

use std::collections::HashSet;

use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::coxeter::{coxeter_diagram_named, finite_volume_check, ratio_str, CoxeterDiagram, FiniteVolumeCertificate, MAX_VERTICES};
use crate::error::{LatticeError, Result};
use crate::fincke::{vectors_of_norm, FinckePohst};
use crate::lattice::GramLattice;
use crate::matrix::{gcd_slice, rat, IntMatrix};
use crate::snf::solve_integer;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VinbergConfig {
    pub controlling_vector: Vec<i64>,
    pub allowed_norms: Vec<i64>,
    #[serde(with = "ratio_str")]
    pub max_height_sq: Ratio<i64>,
    pub max_roots: usize,
}

impl VinbergConfig {
    pub fn new(controlling_vector: Vec<i64>) -> Self {
        Self { controlling_vector, allowed_norms: vec![-2, -4], max_height_sq: Ratio::from_integer(10_000), max_roots: MAX_VERTICES }
    }

    pub fn with_norms(mut self, norms: &[i64]) -> Self {
        self.allowed_norms = norms.to_vec();
        self
    }

    pub fn with_max_height_sq(mut self, h: Ratio<i64>) -> Self {
        self.max_height_sq = h;
        self
    }

    pub fn with_max_roots(mut self, m: usize) -> Self {
        self.max_roots = m;
        self
    }

    fn validate(&self, l: &GramLattice) -> Result<()> {
        if self.allowed_norms.is_empty() {
            return Err(LatticeError::Config("no allowed root norms".into()));
        }
        if let Some(k) = self.allowed_norms.iter().find(|&&k| k >= 0 || k % 2 != 0) {
            return Err(LatticeError::Config(format!("root norm {k} is not negative and even")));
        }
        if self.max_roots == 0 || self.max_roots > MAX_VERTICES {
            return Err(LatticeError::Config(format!("max_roots must lie in 1..={MAX_VERTICES}")));
        }
        if self.controlling_vector.len() != l.rank() {
            return Err(LatticeError::Dimension { expected: l.rank(), got: self.controlling_vector.len() });
        }
        if l.norm(&self.controlling_vector) <= 0 {
            return Err(LatticeError::InvalidVector("controlling vector must have positive norm".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VinbergRoot {
    pub vector: Vec<i64>,
    pub norm: i64,
    /// `(r, x̄)`
    pub pairing: i64,
    #[serde(with = "ratio_str")]
    pub height_sq: Ratio<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellRecord {
    pub norm: i64,
    pub pairing: i64,
    #[serde(with = "ratio_str")]
    pub height_sq: Ratio<i64>,
    /// Roots in the shell pairing nonnegatively with the height-0 block.
    pub candidates: usize,
    pub accepted: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunStatus {
    /// The finite-volume criterion holds for the accepted roots.
    Complete,
    /// A cutoff was hit first.
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VinbergRun {
    pub controlling_vector: Vec<i64>,
    pub allowed_norms: Vec<i64>,
    pub roots: Vec<VinbergRoot>,
    /// Number of leading roots with `(r, x̄) = 0`.
    pub height_zero: usize,
    pub shells: Vec<ShellRecord>,
    #[serde(flatten)]
    pub status: RunStatus,
    pub certificate: FiniteVolumeCertificate,
}

impl VinbergRun {
    pub fn vectors(&self) -> Vec<Vec<i64>> {
        self.roots.iter().map(|r| r.vector.clone()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }

    pub fn diagram(&self, l: &GramLattice) -> Result<CoxeterDiagram> {
        let names = (0..self.roots.len()).map(|i| format!("r{i}")).collect();
        coxeter_diagram_named(l, &self.vectors(), names)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run serializes")
    }
}

fn is_crystallographic(l: &GramLattice, r: &[i64], k: i64) -> bool {
    l.pairings(r).iter().all(|p| (2 * p) % k == 0)
}

fn lex_positive(r: &[i64]) -> bool {
    r.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn is_root(l: &GramLattice, r: &[i64], norms: &[i64]) -> bool {
    let k = l.norm(r);
    norms.contains(&k) && gcd_slice(r) == 1 && is_crystallographic(l, r, k)
}

/// Simple roots of the (finite) root system of `x̄^⊥`, positive for the
/// lexicographic order on coordinates.
pub fn height_zero_block(l: &GramLattice, x: &[i64], norms: &[i64]) -> Result<Vec<Vec<i64>>> {
    let comp = l.orthogonal_complement(&[x.to_vec()])?;
    let basis = comp.embedding.to_rows();
    let to_ambient = |c: &[i64]| -> Vec<i64> {
        let mut v = vec![0i64; l.rank()];
        for (ci, b) in c.iter().zip(&basis) {
            for (x, y) in v.iter_mut().zip(b) {
                *x += ci * y;
            }
        }
        v
    };
    let mut roots = Vec::new();
    for &k in norms {
        for c in vectors_of_norm(&comp.lattice, k)? {
            let v = to_ambient(&c);
            if is_root(l, &v, norms) {
                roots.push(v);
            }
        }
    }
    let pos: Vec<&Vec<i64>> = roots.iter().filter(|r| lex_positive(r)).collect();
    let pos_set: HashSet<&[i64]> = pos.iter().map(|r| r.as_slice()).collect();
    let mut simple: Vec<Vec<i64>> = Vec::new();
    'next: for r in &pos {
        for s in &pos {
            let d: Vec<i64> = r.iter().zip(s.iter()).map(|(a, b)| a - b).collect();
            if pos_set.contains(d.as_slice()) {
                continue 'next;
            }
        }
        simple.push((*r).clone());
    }
    simple.sort_by(|a, b| b.cmp(a));
    Ok(simple)
}

/// Every `r` with `r² = k` and `(r, x̄) = pairing`, by enumerating the
/// translated complement `r₀ + x̄^⊥`.
pub fn shell_vectors(l: &GramLattice, x: &[i64], k: i64, pairing: i64) -> Result<Vec<Vec<i64>>> {
    let xx = l.norm(x);
    if xx <= 0 {
        return Err(LatticeError::InvalidVector("controlling vector must have positive norm".into()));
    }
    let gx = l.pairings(x);
    let Some(r0) = solve_integer(&IntMatrix::from_rows(vec![gx])?, &[pairing])? else {
        return Ok(Vec::new());
    };
    let comp = l.orthogonal_complement(&[x.to_vec()])?;
    let basis = comp.embedding.to_rows();
    let gk = comp.lattice.gram();
    // t = r0 − (N/x̄²) x̄ lies in x̄^⊥ ⊗ ℚ; write t = Σ cᵢ bᵢ
    let t: Vec<BigRational> = r0.iter().zip(x).map(|(&a, &b)| rat(a) - BigRational::new(pairing.into(), xx.into()) * rat(b)).collect();
    let gl = l.gram();
    let rhs: Vec<BigRational> = basis
        .iter()
        .map(|b| {
            let gb = gl.mul_vec(b).expect("shape");
            gb.iter().zip(&t).fold(BigRational::zero(), |acc, (g, ti)| acc + rat(*g) * ti)
        })
        .collect();
    let inv = gk.inverse_rational()?;
    let c: Vec<BigRational> = inv.iter().map(|row| row.iter().zip(&rhs).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)).collect();
    let center: Vec<f64> = c.iter().map(|v| -v.to_f64().unwrap_or(0.0)).collect();
    let bound = (BigRational::new((pairing * pairing).into(), xx.into()) - rat(k)).to_f64().unwrap_or(0.0);
    let mut out = Vec::new();
    if bound < 0.0 {
        return Ok(out);
    }
    let fp = FinckePohst::for_negative_definite(&comp.lattice)?;
    fp.for_each(bound, Some(&center), &mut |z| {
        let mut r = r0.clone();
        for (zi, b) in z.iter().zip(&basis) {
            for (x, y) in r.iter_mut().zip(b) {
                *x += zi * y;
            }
        }
        if l.norm(&r) == k && l.pair(&r, x) == pairing {
            out.push(r);
        }
        true
    });
    out.sort();
    Ok(out)
}

/// Shell enumeration restricted to the cone `(r, sᵢ) ≥ 0` over the simple
/// roots `sᵢ` of `x̄^⊥`, which must span it. With `pᵢ = (r, sᵢ)` one has
/// `pᵀ adj(−G) p = det(−G)·(N²/x̄² − k)` and `adj(−G) ≥ 0` entrywise.
struct Cone {
    simple: Vec<Vec<i64>>,
    adj: Vec<Vec<i128>>,
    det: i128,
    x: Vec<i64>,
    xx: i64,
}

impl Cone {
    fn new(l: &GramLattice, x: &[i64], simple: &[Vec<i64>]) -> Result<Option<Self>> {
        let m = simple.len();
        if m + 1 != l.rank() {
            return Ok(None);
        }
        let neg = IntMatrix::from_rows(simple.iter().map(|a| simple.iter().map(|b| -l.pair(a, b)).collect()).collect())?;
        let det = neg.det()?;
        if det <= 0 {
            return Ok(None);
        }
        let inv = neg.inverse_rational()?;
        let mut adj = vec![vec![0i128; m]; m];
        for i in 0..m {
            for j in 0..m {
                let v = &inv[i][j] * rat(det as i64);
                if !v.is_integer() || v.is_negative() {
                    return Ok(None);
                }
                adj[i][j] = v.to_integer().to_i128().ok_or(LatticeError::Overflow)?;
            }
        }
        Ok(Some(Self { simple: simple.to_vec(), adj, det, x: x.to_vec(), xx: l.norm(x) }))
    }

    fn shell(&self, l: &GramLattice, k: i64, pairing: i64) -> Vec<Vec<i64>> {
        let num = self.det * (pairing as i128 * pairing as i128 - k as i128 * self.xx as i128);
        if num % self.xx as i128 != 0 {
            return Vec::new();
        }
        let target = num / self.xx as i128;
        let m = self.simple.len();
        let mut out = Vec::new();
        let mut p = vec![0i128; m];
        self.rec(0, 0, target, &mut p, &mut |p| {
            if let Some(r) = self.lift(p, pairing) {
                if l.norm(&r) == k && l.pair(&r, &self.x) == pairing {
                    out.push(r);
                }
            }
        });
        out.sort();
        out
    }

    fn rec(&self, i: usize, value: i128, target: i128, p: &mut [i128], f: &mut dyn FnMut(&[i128])) {
        if i == p.len() {
            if value == target {
                f(p);
            }
            return;
        }
        let cross: i128 = (0..i).map(|j| self.adj[j][i] * p[j]).sum();
        let a = self.adj[i][i];
        let mut t: i128 = 0;
        loop {
            let v = value + a * t * t + 2 * t * cross;
            if v > target {
                break;
            }
            p[i] = t;
            self.rec(i + 1, v, target, p, f);
            t += 1;
        }
        p[i] = 0;
    }

    /// `r = (N/x̄²) x̄ − Σ (adj·p)ⱼ sⱼ / det`, if integral.
    fn lift(&self, p: &[i128], pairing: i64) -> Option<Vec<i64>> {
        let m = p.len();
        let scale = self.det * self.xx as i128;
        let mut num: Vec<i128> = self.x.iter().map(|&v| pairing as i128 * self.det * v as i128).collect();
        for j in 0..m {
            let c: i128 = (0..m).map(|i| self.adj[j][i] * p[i]).sum();
            if c == 0 {
                continue;
            }
            for (acc, &s) in num.iter_mut().zip(&self.simple[j]) {
                *acc -= self.xx as i128 * c * s as i128;
            }
        }
        num.iter().map(|&v| if v % scale == 0 { i64::try_from(v / scale).ok() } else { None }).collect()
    }
}

/// Runs Vinberg's algorithm from `cfg.controlling_vector`.
pub fn vinberg_run(l: &GramLattice, cfg: &VinbergConfig) -> Result<VinbergRun> {
    cfg.validate(l)?;
    let sig = l.signature();
    if sig.positive != 1 || sig.negative + 1 != l.rank() {
        return Err(LatticeError::Signature { expected: format!("(1,{})", l.rank().saturating_sub(1)), p: sig.positive, n: sig.negative });
    }
    if !l.is_even() {
        return Err(LatticeError::NotEven);
    }
    let x = &cfg.controlling_vector;
    let n = l.rank() - 1;
    let mut norms = cfg.allowed_norms.clone();
    norms.sort_unstable_by(|a, b| b.cmp(a));
    norms.dedup();

    let block = height_zero_block(l, x, &norms)?;
    let cone = Cone::new(l, x, &block)?;
    let mut roots: Vec<VinbergRoot> = block
        .iter()
        .map(|r| VinbergRoot { vector: r.clone(), norm: l.norm(r), pairing: 0, height_sq: Ratio::zero() })
        .collect();
    let height_zero = roots.len();
    let mut shells = Vec::new();

    let diagram_of = |roots: &[VinbergRoot]| -> Result<CoxeterDiagram> {
        let v: Vec<Vec<i64>> = roots.iter().map(|r| r.vector.clone()).collect();
        coxeter_diagram_named(l, &v, (0..v.len()).map(|i| format!("r{i}")).collect())
    };
    let mut cert = finite_volume_check(&diagram_of(&roots)?, n);
    let finish = |roots, shells, status, certificate| VinbergRun {
        controlling_vector: x.clone(),
        allowed_norms: norms.clone(),
        roots,
        height_zero,
        shells,
        status,
        certificate,
    };
    if roots.len() > cfg.max_roots {
        let reason = format!("height-0 block alone has {} roots, above max_roots", roots.len());
        return Ok(finish(roots, shells, RunStatus::Inconclusive { reason }, cert));
    }
    if cert.holds && height_zero > 0 {
        return Ok(finish(roots, shells, RunStatus::Complete, cert));
    }

    // next admissible pairing per norm: N must be a multiple of |k|/2
    let mut next: Vec<(i64, i64)> = norms.iter().map(|&k| (k, -k / 2)).collect();
    loop {
        let h = |&(k, nn): &(i64, i64)| Ratio::new(nn * nn, -k);
        let hmin = next.iter().map(h).min().expect("norms nonempty");
        if hmin > cfg.max_height_sq {
            let reason = format!("height cutoff h² > {} reached", cfg.max_height_sq);
            return Ok(finish(roots, shells, RunStatus::Inconclusive { reason }, cert));
        }
        let mut batch: Vec<(i64, Vec<i64>)> = Vec::new();
        let mut batch_shells = Vec::new();
        for slot in next.iter_mut() {
            if h(slot) != hmin {
                continue;
            }
            let (k, nn) = *slot;
            let found = match &cone {
                Some(c) => c.shell(l, k, nn),
                None => shell_vectors(l, x, k, nn)?.into_iter().filter(|r| block.iter().all(|s| l.pair(r, s) >= 0)).collect(),
            };
            let found: Vec<Vec<i64>> = found.into_iter().filter(|r| is_root(l, r, &norms)).collect();
            batch_shells.push(ShellRecord { norm: k, pairing: nn, height_sq: hmin, candidates: found.len(), accepted: 0 });
            batch.extend(found.into_iter().map(|r| (k, r)));
            slot.1 += -k / 2;
        }
        batch.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
        let before = roots.len();
        for (k, r) in batch {
            if roots[height_zero..].iter().all(|a| l.pair(&a.vector, &r) >= 0) {
                let nn = l.pair(&r, x);
                if let Some(s) = batch_shells.iter_mut().find(|s| s.norm == k && s.pairing == nn) {
                    s.accepted += 1;
                }
                roots.push(VinbergRoot { vector: r, norm: k, pairing: nn, height_sq: hmin });
                if roots.len() > cfg.max_roots {
                    shells.extend(batch_shells);
                    let reason = format!("more than {} roots accepted", cfg.max_roots);
                    return Ok(finish(roots, shells, RunStatus::Inconclusive { reason }, cert));
                }
            }
        }
        shells.extend(batch_shells);
        if roots.len() > before {
            cert = finite_volume_check(&diagram_of(&roots)?, n);
            if cert.holds {
                return Ok(finish(roots, shells, RunStatus::Complete, cert));
            }
        }
    }
}

/// Accepted roots pairwise nonnegative, heights nondecreasing, and the
/// first block orthogonal to `x̄`.
pub fn check_run(l: &GramLattice, run: &VinbergRun) -> bool {
    let v = run.vectors();
    let pairwise = v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| l.pair(a, b) >= 0));
    let heights = run.roots.windows(2).all(|w| w[0].height_sq <= w[1].height_sq);
    let zero = run.roots[..run.height_zero].iter().all(|r| r.pairing == 0);
    let consistent = run.roots.iter().all(|r| {
        l.norm(&r.vector) == r.norm && l.pair(&r.vector, &run.controlling_vector) == r.pairing && is_root(l, &r.vector, &run.allowed_norms)
    });
    pairwise && heights && zero && consistent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::make_standard;

    #[test]
    fn toy_u_plus_a1() {
        let l = make_standard("U+A1").unwrap();
        let run = vinberg_run(&l, &VinbergConfig::new(vec![1, 1, 0])).unwrap();
        assert!(run.is_complete());
        assert!(check_run(&l, &run));
        assert_eq!(run.height_zero, 2);
        assert_eq!(run.roots.len(), 3);
    }

    #[test]
    fn cone_matches_full_shell() {
        let l = make_standard("U+A2").unwrap();
        let x = vec![1, 1, 0, 0];
        let block = height_zero_block(&l, &x, &[-2]).unwrap();
        let cone = Cone::new(&l, &x, &block).unwrap().unwrap();
        for nn in 1..6 {
            let full: Vec<Vec<i64>> = shell_vectors(&l, &x, -2, nn).unwrap().into_iter().filter(|r| block.iter().all(|s| l.pair(r, s) >= 0)).collect();
            assert_eq!(cone.shell(&l, -2, nn), full);
        }
    }

    #[test]
    fn wrong_signature() {
        let l = make_standard("U+U").unwrap();
        assert!(matches!(vinberg_run(&l, &VinbergConfig::new(vec![1, 1, 0, 0])), Err(LatticeError::Signature { .. })));
    }
}
