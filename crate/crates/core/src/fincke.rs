//! Fincke–Pohst enumeration of lattice points in an ellipsoid.
//!
//! Pruning uses `f64` with widened bounds; every emitted point is an exact
//! integer vector and callers check norms exactly.

use crate::error::{LatticeError, Result};
use crate::lattice::GramLattice;
use crate::matrix::IntMatrix;

const SLACK: f64 = 1e-6;

/// Quadratic-form decomposition `Q(x) = Σ q_ii (x_i + Σ_{j>i} q_ij x_j)²`.
#[derive(Debug, Clone)]
pub struct FinckePohst {
    n: usize,
    q: Vec<Vec<f64>>,
    exact: IntMatrix,
}

impl FinckePohst {
    /// `q` must be positive definite.
    pub fn new(q: &IntMatrix) -> Result<Self> {
        let n = q.rows();
        let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| q[(i, j)] as f64).collect()).collect();
        for i in 0..n {
            if a[i][i] <= 0.0 {
                return Err(LatticeError::NotNegativeDefinite);
            }
            for j in i + 1..n {
                a[j][i] = a[i][j];
                a[i][j] /= a[i][i];
            }
            for k in i + 1..n {
                for l in k..n {
                    a[k][l] -= a[k][i] * a[i][l];
                }
            }
        }
        Ok(Self { n, q: a, exact: q.clone() })
    }

    /// For a negative definite lattice, the decomposition of `−G`.
    pub fn for_negative_definite(l: &GramLattice) -> Result<Self> {
        if !l.is_negative_definite() {
            return Err(LatticeError::NotNegativeDefinite);
        }
        Self::new(&l.gram().scaled(-1)?)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Exact `xᵀ Q x`.
    pub fn value(&self, x: &[i64]) -> i128 {
        self.exact.bilinear(x, x)
    }

    /// Calls `f` on every integer `x` with `Q(x − c) ≤ bound` (plus a little
    /// slack). Stops early when `f` returns `false`.
    pub fn for_each(&self, bound: f64, center: Option<&[f64]>, f: &mut dyn FnMut(&[i64]) -> bool) {
        let n = self.n;
        if n == 0 {
            f(&[]);
            return;
        }
        let zero = vec![0.0; n];
        let c = center.unwrap_or(&zero);
        let mut x = vec![0i64; n];
        let bound = bound * (1.0 + 1e-9) + SLACK;
        self.rec(n - 1, bound, c, &mut x, f);
    }

    fn rec(&self, i: usize, remaining: f64, c: &[f64], x: &mut [i64], f: &mut dyn FnMut(&[i64]) -> bool) -> bool {
        let mut u = -c[i];
        for j in i + 1..self.n {
            u += self.q[i][j] * (x[j] as f64 - c[j]);
        }
        let r = (remaining.max(0.0) / self.q[i][i]).sqrt();
        let lo = (-u - r - SLACK).ceil() as i64;
        let hi = (-u + r + SLACK).floor() as i64;
        for v in lo..=hi {
            x[i] = v;
            let t = v as f64 + u;
            let rest = remaining - self.q[i][i] * t * t;
            if rest < -SLACK {
                continue;
            }
            let go = if i == 0 { f(x) } else { self.rec(i - 1, rest, c, x, f) };
            if !go {
                return false;
            }
        }
        x[i] = 0;
        true
    }
}

/// All `x` with `x² = norm` in a negative definite lattice, sorted.
pub fn vectors_of_norm(l: &GramLattice, norm: i64) -> Result<Vec<Vec<i64>>> {
    if norm >= 0 {
        return Err(LatticeError::InvalidVector(format!("norm {norm} must be negative")));
    }
    let fp = FinckePohst::for_negative_definite(l)?;
    let target = -norm as i128;
    let mut out = Vec::new();
    fp.for_each(target as f64, None, &mut |x| {
        if fp.value(x) == target {
            out.push(x.to_vec());
        }
        true
    });
    out.sort();
    Ok(out)
}

/// Box enumeration `|x_i| ≤ radius`, exact; a test oracle for small ranks.
pub fn box_vectors_of_norm(l: &GramLattice, norm: i64, radius: i64) -> Vec<Vec<i64>> {
    let n = l.rank();
    let mut out = Vec::new();
    let mut x = vec![-radius; n];
    if n == 0 {
        return out;
    }
    loop {
        if l.norm(&x) == norm {
            out.push(x.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                out.sort();
                return out;
            }
            if x[i] < radius {
                x[i] += 1;
                break;
            }
            x[i] = -radius;
            i += 1;
        }
    }
}
