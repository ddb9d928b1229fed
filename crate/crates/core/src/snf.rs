//! Smith normal form over ℤ and the integer linear algebra built on it
//! (kernels, solving, bases of row lattices).

use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::matrix::{narrow, IntMatrix};
use crate::reduce::{axpy, lll, lll_ops, size_reduce, RowOp};

/// `left · A · right = diag`, with `left`, `right` unimodular and the
/// diagonal a nonnegative divisibility chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfResult {
    pub diag: IntMatrix,
    pub left: IntMatrix,
    pub right: IntMatrix,
    pub rank: usize,
}

impl SnfResult {
    pub fn diagonal_entries(&self) -> Vec<i64> {
        let k = self.diag.rows().min(self.diag.cols());
        (0..k).map(|i| self.diag[(i, i)]).collect()
    }

    pub fn elementary_divisors(&self) -> Vec<i64> {
        self.diagonal_entries().into_iter().take(self.rank).collect()
    }
}

type Work = Vec<Vec<i128>>;

/// Transforms with no entry above this are left as the elimination made them.
const POLISH_ABOVE: i128 = 1 << 12;

fn to_work(a: &IntMatrix) -> Work {
    (0..a.rows()).map(|i| a.row(i).iter().map(|&v| v as i128).collect()).collect()
}

fn identity_work(n: usize) -> Work {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

fn from_work(w: &Work, cols: usize) -> Result<IntMatrix> {
    let rows = w
        .iter()
        .map(|r| r.iter().map(|&v| narrow(v)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Ok(IntMatrix::zeros(0, cols));
    }
    IntMatrix::from_rows(rows)
}

fn row_axpy(m: &mut Work, dst: usize, src: usize, q: i128) -> Result<()> {
    if q == 0 {
        return Ok(());
    }
    let (a, b) = if dst < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, &y) in a.iter_mut().zip(b.iter()) {
        *x = q.checked_mul(y).and_then(|t| x.checked_add(t)).ok_or(LatticeError::Overflow)?;
    }
    Ok(())
}

fn col_axpy(m: &mut Work, dst: usize, src: usize, q: i128) -> Result<()> {
    if q == 0 {
        return Ok(());
    }
    for row in m.iter_mut() {
        let y = row[src];
        row[dst] = q.checked_mul(y).and_then(|t| row[dst].checked_add(t)).ok_or(LatticeError::Overflow)?;
    }
    Ok(())
}

fn swap_cols(m: &mut Work, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// Nearest integer to `a / b`, ties toward zero.
fn round_div(a: i128, b: i128) -> i128 {
    let q = a.div_euclid(b);
    let r = a.rem_euclid(b);
    if 2 * r > b.abs() {
        q + b.signum()
    } else {
        q
    }
}

/// Smith normal form with transforms. Deterministic for a fixed input.
pub fn smith_normal_form(a: &IntMatrix) -> Result<SnfResult> {
    let (m, n) = (a.rows(), a.cols());
    let mut s = to_work(a);
    let mut u = identity_work(m);
    let mut vt = identity_work(n); // rows of vt are columns of V
    let mut rank = 0;
    'outer: for t in 0..m.min(n) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = s[i][j];
                    if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < s[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break 'outer;
            };
            s.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut s, t, pj);
            vt.swap(t, pj);

            let p = s[t][t];
            let mut dirty = false;
            for i in t + 1..m {
                let q = round_div(s[i][t], p);
                row_axpy(&mut s, i, t, -q)?;
                row_axpy(&mut u, i, t, -q)?;
                dirty |= s[i][t] != 0;
            }
            for j in t + 1..n {
                let q = round_div(s[t][j], p);
                col_axpy(&mut s, j, t, -q)?;
                row_axpy(&mut vt, j, t, -q)?;
                dirty |= s[t][j] != 0;
            }
            if dirty {
                continue;
            }
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| s[i][j] % p != 0));
            if let Some(i) = bad {
                row_axpy(&mut s, t, i, 1)?;
                row_axpy(&mut u, t, i, 1)?;
                continue;
            }
            break;
        }
        if s[t][t] < 0 {
            for x in s[t].iter_mut() {
                *x = -*x;
            }
            for x in u[t].iter_mut() {
                *x = -*x;
            }
        }
        rank = t + 1;
    }
    let d: Vec<i128> = (0..rank).map(|i| s[i][i]).collect();
    if u.iter().chain(&vt).flatten().any(|x| x.abs() > POLISH_ABOVE) {
        polish(&d, &mut u, &mut vt);
    }
    let diag = from_work(&s, n)?;
    let left = from_work(&u, m)?;
    let right = from_work(&vt, n)?.transpose();
    Ok(SnfResult { diag, left, right, rank })
}

fn norm2(v: &[i128]) -> f64 {
    v.iter().map(|&x| (x as f64) * (x as f64)).sum()
}

fn cost(u: &Work, vt: &Work) -> f64 {
    u.iter().chain(vt).map(|r| norm2(r)).sum()
}

/// LLL on the kernel rows, then the other rows reduced against them.
fn reduce_tail(m: &mut Work, rank: usize) -> Result<()> {
    let (head, tail) = m.split_at_mut(rank);
    lll(tail)?;
    head.iter_mut().try_for_each(|row| size_reduce(row, tail))
}

/// Rows of `u` sharing an invariant factor may be mixed by any unimodular
/// `E` if the matching columns of `V` take `E⁻¹`.
fn reduce_blocks(d: &[i128], u: &mut Work, vt: &mut Work) -> Result<()> {
    let rank = d.len();
    let mut start = 0;
    while start < rank {
        let end = (start..rank).find(|&i| d[i] != d[start]).unwrap_or(rank);
        if end - start > 1 {
            for op in lll_ops(&mut u[start..end])? {
                match op {
                    RowOp::Add { dst, src, q } => {
                        let col = vt[start + dst].clone();
                        axpy(&mut vt[start + src], &col, -q)?;
                    }
                    RowOp::Swap(a, b) => vt.swap(start + a, start + b),
                }
            }
        }
        start = end;
    }
    Ok(())
}

/// Pairwise reduction across invariant factors: row `i` of `u` may take
/// `c·(dᵢ/dⱼ)` times row `j < i`, or `c` times row `j > i`; column `j` of `V`
/// compensates with `−c` resp. `−c·(dⱼ/dᵢ)` times column `i`. A step is
/// kept only if the two rows it touches get shorter together.
fn reduce_across(d: &[i128], u: &mut Work, vt: &mut Work) -> Result<()> {
    let rank = d.len();
    for _ in 0..50 {
        let mut changed = false;
        for i in 0..rank {
            for j in 0..rank {
                if i == j {
                    continue;
                }
                let (mu, mv) = if j < i { (d[i] / d[j], 1) } else { (1, d[j] / d[i]) };
                let src: Vec<i128> = u[j].iter().map(|&x| x.checked_mul(mu).ok_or(LatticeError::Overflow)).collect::<Result<_>>()?;
                let den = norm2(&src);
                if den == 0.0 {
                    continue;
                }
                let num: f64 = u[i].iter().zip(&src).map(|(&a, &b)| a as f64 * b as f64).sum();
                let c = -(num / den).round();
                if c == 0.0 || !c.is_finite() {
                    continue;
                }
                let c = c as i128;
                let mut row = u[i].clone();
                axpy(&mut row, &src, c)?;
                let mut col = vt[j].clone();
                axpy(&mut col, &vt[i], -c.checked_mul(mv).ok_or(LatticeError::Overflow)?)?;
                if norm2(&row) + norm2(&col) < norm2(&u[i]) + norm2(&vt[j]) {
                    u[i] = row;
                    vt[j] = col;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(())
}

/// Shrinks the transforms using the freedom `left·A·right = diag` leaves.
/// Every stage is exact and unimodular, and is kept only if it lowers the
/// total squared size of both transforms; overflow abandons the stage.
fn polish(d: &[i128], u: &mut Work, vt: &mut Work) {
    let rank = d.len();
    type Stage<'a> = Box<dyn Fn(&mut Work, &mut Work) -> Result<()> + 'a>;
    let stages: Vec<Stage> = vec![
        Box::new(|u, vt| reduce_tail(u, rank).and_then(|_| reduce_tail(vt, rank))),
        Box::new(|u, vt| reduce_blocks(d, u, vt)),
        Box::new(|u, vt| reduce_blocks(d, vt, u)),
        Box::new(|u, vt| reduce_across(d, u, vt)),
        Box::new(|u, vt| reduce_across(d, vt, u)),
    ];
    for _ in 0..4 {
        let mut improved = false;
        for stage in &stages {
            let (mut u2, mut v2) = (u.clone(), vt.clone());
            if stage(&mut u2, &mut v2).is_ok() && cost(&u2, &v2) < cost(u, vt) {
                *u = u2;
                *vt = v2;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

/// A ℤ-basis (as columns) of `{x ∈ ℤⁿ : A x = 0}`. The result is saturated.
pub fn integer_kernel(a: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let snf = smith_normal_form(a)?;
    Ok((snf.rank..a.cols()).map(|j| snf.right.column(j)).collect())
}

/// Some integer solution of `A x = b`, or `None` if there is none.
pub fn solve_integer(a: &IntMatrix, b: &[i64]) -> Result<Option<Vec<i64>>> {
    if b.len() != a.rows() {
        return Err(LatticeError::Dimension { expected: a.rows(), got: b.len() });
    }
    let snf = smith_normal_form(a)?;
    let c = snf.left.mul_vec(b)?;
    let mut y = vec![0i64; a.cols()];
    for (i, &ci) in c.iter().enumerate() {
        if i < snf.rank {
            let d = snf.diag[(i, i)];
            if ci % d != 0 {
                return Ok(None);
            }
            y[i] = ci / d;
        } else if ci != 0 {
            return Ok(None);
        }
    }
    Ok(Some(snf.right.mul_vec(&y)?))
}

/// A basis of the ℤ-span of the given integer row vectors.
pub fn row_lattice_basis(rows: &[Vec<i64>], width: usize) -> Result<Vec<Vec<i64>>> {
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let m = IntMatrix::from_rows(rows.to_vec())?;
    if m.cols() != width {
        return Err(LatticeError::Dimension { expected: width, got: m.cols() });
    }
    let snf = smith_normal_form(&m)?;
    let um = snf.left.mul(&m)?;
    Ok((0..snf.rank).map(|i| um.row(i).to_vec()).collect())
}

/// Row-style Hermite normal form basis of the ℤ-span of the rows: pivots
/// positive, entries above each pivot reduced into `[0, pivot)`.
pub fn hnf_rows(rows: &[Vec<i64>], width: usize) -> Result<Vec<Vec<i64>>> {
    let mut a: Work = rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    for r in &a {
        if r.len() != width {
            return Err(LatticeError::Dimension { expected: width, got: r.len() });
        }
    }
    let m = a.len();
    let mut r = 0;
    for col in 0..width {
        if r == m {
            break;
        }
        loop {
            let best = (r..m).filter(|&i| a[i][col] != 0).min_by_key(|&i| a[i][col].abs());
            let Some(p) = best else { break };
            a.swap(r, p);
            let mut clean = true;
            for i in r + 1..m {
                let q = a[i][col] / a[r][col];
                row_axpy(&mut a, i, r, -q)?;
                clean &= a[i][col] == 0;
            }
            if clean {
                break;
            }
        }
        if a[r][col] == 0 {
            continue;
        }
        if a[r][col] < 0 {
            for x in a[r].iter_mut() {
                *x = -*x;
            }
        }
        let p = a[r][col];
        for i in 0..r {
            let q = a[i][col].div_euclid(p);
            row_axpy(&mut a, i, r, -q)?;
        }
        r += 1;
    }
    a.truncate(r);
    a.iter().map(|row| row.iter().map(|&v| narrow(v)).collect()).collect()
}

/// Rank of an integer matrix.
pub fn rank(a: &IntMatrix) -> Result<usize> {
    Ok(smith_normal_form(a)?.rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(a: &IntMatrix) -> SnfResult {
        let r = smith_normal_form(a).unwrap();
        let prod = r.left.mul(a).unwrap().mul(&r.right).unwrap();
        assert_eq!(prod, r.diag);
        assert_eq!(r.left.det().unwrap().abs(), 1);
        assert_eq!(r.right.det().unwrap().abs(), 1);
        let d = r.elementary_divisors();
        for w in d.windows(2) {
            assert_eq!(w[1] % w[0], 0);
        }
        r
    }

    #[test]
    fn two_a1_blocks() {
        let a = IntMatrix::from_rows(vec![vec![-2, 0], vec![0, -2]]).unwrap();
        assert_eq!(check(&a).elementary_divisors(), vec![2, 2]);
    }

    #[test]
    fn hyperbolic_plane_is_unimodular() {
        let a = IntMatrix::from_rows(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(check(&a).elementary_divisors(), vec![1, 1]);
    }

    #[test]
    fn rectangular_and_singular() {
        let a = IntMatrix::from_rows(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]).unwrap();
        assert_eq!(check(&a).elementary_divisors(), vec![2, 6, 12]);
        let b = IntMatrix::from_rows(vec![vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
        let r = check(&b);
        assert_eq!(r.rank, 1);
        let ker = integer_kernel(&b).unwrap();
        assert_eq!(ker.len(), 2);
        for k in ker {
            assert_eq!(b.mul_vec(&k).unwrap(), vec![0, 0]);
        }
    }

    #[test]
    fn hermite_basis() {
        let h = hnf_rows(&[vec![2, 0], vec![0, 2], vec![1, 1]], 2).unwrap();
        assert_eq!(h, vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn solving() {
        let a = IntMatrix::from_rows(vec![vec![2, 0], vec![0, 3]]).unwrap();
        assert_eq!(solve_integer(&a, &[4, 9]).unwrap(), Some(vec![2, 3]));
        assert_eq!(solve_integer(&a, &[1, 0]).unwrap(), None);
    }
}
