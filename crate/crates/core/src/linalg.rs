//! Exact Gaussian elimination over [`Scalar`].

use crate::coeff::{CoeffError, Scalar};

/// Reduced row echelon form in place; returns the pivot columns.
pub fn row_reduce(m: &mut [Vec<Scalar>]) -> Result<Vec<usize>, CoeffError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv()?;
        for x in m[r].iter_mut() {
            *x = x.try_mul(&inv)?;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = f.try_mul(&m[r][j])?;
                    m[i][j] = m[i][j].try_sub(&t)?;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Ok(pivots)
}

pub fn rank(m: &[Vec<Scalar>]) -> Result<usize, CoeffError> {
    let mut work = m.to_vec();
    Ok(row_reduce(&mut work)?.len())
}

/// Solves `sum_j x_j * columns[j] = target`; `None` when inconsistent.
/// Free variables are set to zero.
pub fn solve_columns(columns: &[Vec<Scalar>], target: &[Scalar]) -> Result<Option<Vec<Scalar>>, CoeffError> {
    let n = columns.len();
    let rows = target.len();
    let mut m: Vec<Vec<Scalar>> = (0..rows)
        .map(|i| {
            let mut row: Vec<Scalar> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let pivots = row_reduce(&mut m)?;
    if pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut x = vec![Scalar::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][n].clone();
    }
    Ok(Some(x))
}
