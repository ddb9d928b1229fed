//! LLL reduction of integer row bases in the Euclidean norm.
//!
//! Gram–Schmidt data is kept in `f64` and only steers the choice of
//! operations; every update is an exact unimodular row operation, so the
//! result spans the same lattice whatever rounding happens.

use crate::error::{LatticeError, Result};

const DELTA: f64 = 0.99;

pub(crate) fn axpy(dst: &mut [i128], src: &[i128], q: i128) -> Result<()> {
    let out: Vec<i128> = dst.iter().zip(src).map(|(&x, &y)| q.checked_mul(y).and_then(|t| x.checked_add(t)).ok_or(LatticeError::Overflow)).collect::<Result<_>>()?;
    dst.copy_from_slice(&out);
    Ok(())
}

struct Gso {
    star: Vec<Vec<f64>>,
    mu: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

fn gso(b: &[Vec<i128>]) -> Gso {
    let k = b.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut mu = vec![vec![0.0; k]; k];
    let mut norms = vec![0.0; k];
    for i in 0..k {
        let mut v: Vec<f64> = b[i].iter().map(|&x| x as f64).collect();
        for j in 0..i {
            let m = if norms[j] > 0.0 { dot_f(&b[i], &star[j]) / norms[j] } else { 0.0 };
            mu[i][j] = m;
            for (a, s) in v.iter_mut().zip(&star[j]) {
                *a -= m * s;
            }
        }
        norms[i] = v.iter().map(|x| x * x).sum();
        star.push(v);
    }
    Gso { star, mu, norms }
}

fn dot_f(a: &[i128], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, y)| x as f64 * y).sum()
}

/// A row operation performed by [`lll_ops`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    /// `row[dst] += q · row[src]`
    Add { dst: usize, src: usize, q: i128 },
    Swap(usize, usize),
}

/// LLL-reduces linearly independent integer rows in place.
pub fn lll(b: &mut [Vec<i128>]) -> Result<()> {
    lll_ops(b).map(|_| ())
}

/// As [`lll`], returning the row operations in the order applied.
pub fn lll_ops(b: &mut [Vec<i128>]) -> Result<Vec<RowOp>> {
    let n = b.len();
    let mut ops = Vec::new();
    if n < 2 {
        return Ok(ops);
    }
    let mut k = 1;
    let mut steps = 0usize;
    let mut g = gso(b);
    while k < n {
        steps += 1;
        if steps > 100_000 {
            break;
        }
        for j in (0..k).rev() {
            let q = g.mu[k][j].round();
            if q != 0.0 && q.is_finite() {
                let (lo, hi) = b.split_at_mut(k);
                axpy(&mut hi[0], &lo[j], -(q as i128))?;
                ops.push(RowOp::Add { dst: k, src: j, q: -(q as i128) });
                for l in 0..j {
                    g.mu[k][l] -= q * g.mu[j][l];
                }
                g.mu[k][j] -= q;
            }
        }
        if g.norms[k] >= (DELTA - g.mu[k][k - 1] * g.mu[k][k - 1]) * g.norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            ops.push(RowOp::Swap(k - 1, k));
            g = gso(b);
            k = (k - 1).max(1);
        }
    }
    Ok(ops)
}

/// Subtracts from `v` the integer combination of `basis` given by nearest
/// plane rounding. `basis` should already be reduced.
pub fn size_reduce(v: &mut [i128], basis: &[Vec<i128>]) -> Result<()> {
    if basis.is_empty() {
        return Ok(());
    }
    let g = gso(basis);
    for j in (0..basis.len()).rev() {
        if g.norms[j] <= 0.0 {
            continue;
        }
        let q = (dot_f(v, &g.star[j]) / g.norms[j]).round();
        if q != 0.0 && q.is_finite() {
            axpy(v, &basis[j], -(q as i128))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_a_skewed_basis() {
        let mut b = vec![vec![1, 0, 0], vec![1000, 1, 0], vec![77777, 999, 1]];
        lll(&mut b).unwrap();
        assert!(b.iter().flatten().all(|x| x.abs() <= 1));
        let mut v = vec![5000, 7, 3];
        size_reduce(&mut v, &b).unwrap();
        assert!(v.iter().all(|x| x.abs() <= 1));
    }
}
