//! Dense Gauss-Jordan elimination over any [`Scalar`] field.
//!
//! Used for the allocation-matrix completion and the mixture-exponential
//! coefficient system. Systems here are tiny (at most a few dozen unknowns),
//! so a rank-revealing dense elimination is enough.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Solution<Q> {
    Unique(Vec<Q>),
    /// Fewer independent equations than unknowns.
    Underdetermined { rank: usize, unknowns: usize },
    /// The equations contradict each other; `residual` is the largest
    /// violation left in a zero row.
    Inconsistent { residual: Q },
}

/// Solves `matrix · x = rhs` for a (possibly non-square) system.
///
/// Redundant equations are allowed as long as they are consistent.
pub fn solve<Q: Scalar>(mut matrix: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Solution<Q> {
    let rows = matrix.len();
    assert_eq!(rows, rhs.len(), "row count of matrix and rhs differ");
    let cols = matrix.first().map_or(0, Vec::len);

    let mut scale = Q::zero();
    for row in &matrix {
        assert_eq!(row.len(), cols, "ragged matrix");
        for v in row {
            scale = Q::max_of(scale, v.abs());
        }
    }
    let mut rhs_scale = Q::one();
    for v in &rhs {
        rhs_scale = Q::max_of(rhs_scale, v.abs());
    }
    let pivot_floor = Q::pivot_tol() * Q::max_of(scale, Q::one());

    let mut pivot_cols = Vec::with_capacity(cols.min(rows));
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut best = r;
        for k in r + 1..rows {
            if matrix[k][c].abs() > matrix[best][c].abs() {
                best = k;
            }
        }
        if matrix[best][c].abs() <= pivot_floor {
            continue;
        }
        matrix.swap(r, best);
        rhs.swap(r, best);

        let pivot = matrix[r][c].clone();
        for v in matrix[r].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        rhs[r] = rhs[r].clone() / pivot;

        for k in 0..rows {
            if k == r || matrix[k][c].is_zero() {
                continue;
            }
            let factor = matrix[k][c].clone();
            for j in 0..cols {
                let delta = factor.clone() * matrix[r][j].clone();
                matrix[k][j] = matrix[k][j].clone() - delta;
            }
            let delta = factor * rhs[r].clone();
            rhs[k] = rhs[k].clone() - delta;
        }
        pivot_cols.push(c);
        r += 1;
    }

    let rank = pivot_cols.len();
    let mut residual = Q::zero();
    for v in rhs.iter().skip(rank) {
        residual = Q::max_of(residual, v.abs());
    }
    let consistency_floor = Q::pivot_tol() * rhs_scale * Q::from_usize(16).expect("small int");
    if residual > consistency_floor {
        return Solution::Inconsistent { residual };
    }
    if rank < cols {
        return Solution::Underdetermined { rank, unknowns: cols };
    }

    let mut x = vec![Q::zero(); cols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        x[c] = rhs[row].clone();
    }
    Solution::Unique(x)
}
