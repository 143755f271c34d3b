//! Exact Gaussian elimination over [`Ratio`].

use crate::error::{Error, Result};
use crate::rational::Ratio;

/// Solves `a x = b` for each right-hand side in `rhs`.
/// Returns one solution vector per right-hand side.
pub fn solve(a: &[Vec<Ratio>], rhs: &[Vec<Ratio>]) -> Result<Vec<Vec<Ratio>>> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) || rhs.iter().any(|b| b.len() != n) {
        return Err(Error::InvalidParameter("system is not square".into()));
    }
    // augmented matrix [a | b_1 ... b_k]
    let k = rhs.len();
    let mut m: Vec<Vec<Ratio>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend(rhs.iter().map(|b| b[i]));
            row
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(Error::SingularSystem)?;
        m.swap(col, pivot);
        let inv = m[col][col].recip()?;
        for x in &mut m[col][col..] {
            *x = x.checked_mul(inv)?;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = x.checked_sub(factor.checked_mul(*p)?)?;
            }
        }
    }
    Ok((0..k)
        .map(|j| (0..n).map(|i| m[i][n + j]).collect())
        .collect())
}
