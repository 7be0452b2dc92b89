//! Exact and numerical rank computations.
//!
//! Matrices assembled from 0/1 statistics are ranked in exact integer
//! arithmetic (fraction-free Gaussian elimination over `BigInt`), so the
//! central combinatorial quantities carry no floating-point ambiguity.
//! Numerical rank with an explicit spectral gap is used only for Jacobians.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Exact rank of an integer matrix via fraction-free (Bareiss) elimination.
pub fn int_rank(rows: &[Vec<i64>]) -> usize {
    let m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    bigint_rank(m)
}

fn bigint_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let mut rank = 0usize;
    let mut prev = BigInt::from(1);
    let mut col = 0usize;
    while rank < nrows && col < ncols {
        // Pivot: the absolutely smallest nonzero entry keeps growth down.
        let pivot_row = (rank..nrows)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| m[r][col].abs());
        let Some(p) = pivot_row else {
            col += 1;
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        col += 1;
    }
    rank
}

/// Exact rank of the affine hull of a point set: rank of the matrix whose
/// rows are `p_i - p_0`.
pub fn affine_rank(points: &[Vec<i64>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = &points[0];
    let rows: Vec<Vec<i64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    int_rank(&rows)
}

/// Checks that `target` lies in the row space of `rows`, exactly.
pub fn in_row_span(rows: &[Vec<i64>], target: &[i64]) -> bool {
    let base = int_rank(rows);
    let mut extended = rows.to_vec();
    extended.push(target.to_vec());
    int_rank(&extended) == base
}

/// Outcome of a numerical rank computation.
#[derive(Debug, Clone)]
pub struct NumericalRank {
    pub rank: usize,
    /// Ratio `sigma_rank / sigma_{rank+1}`; infinite when the rank exhausts
    /// the spectrum.
    pub gap: f64,
    pub singular_values: Vec<f64>,
}

/// Numerical rank with relative threshold `tol * sigma_max`.
pub fn numerical_rank(matrix: &DMatrix<f64>, tol: f64) -> NumericalRank {
    let svd = matrix.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return NumericalRank {
            rank: 0,
            gap: f64::INFINITY,
            singular_values: sv,
        };
    }
    let cut = tol * smax;
    let rank = sv.iter().take_while(|&&s| s > cut).count();
    let gap = if rank == 0 {
        f64::INFINITY
    } else if rank < sv.len() && sv[rank] > 0.0 {
        sv[rank - 1] / sv[rank]
    } else {
        f64::INFINITY
    };
    NumericalRank {
        rank,
        gap,
        singular_values: sv,
    }
}
