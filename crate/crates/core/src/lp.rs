//! Dense simplex solver for small strict-feasibility programs.
//!
//! Everything the crate needs reduces to one primitive: maximize a margin `t`
//! subject to `<g_i, x> >= t`, `<e_j, x> = 0` and a box `|x_k| <= bound`.
//! The origin is always feasible, so a single phase suffices.

const PIVOT_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// Result of a margin maximization.
#[derive(Debug, Clone)]
pub struct Margin {
    /// Optimal margin; the system `<g_i, x> > 0` is strictly solvable within
    /// the box iff this is positive.
    pub margin: f64,
    /// A maximizing point.
    pub point: Vec<f64>,
}

/// Maximizes `t` subject to `<g, x> >= t` for every row of `strict`,
/// `<e, x> = 0` for every row of `eq`, `|x_k| <= bound` and `t <= 1`.
pub fn max_margin(strict: &[Vec<f64>], eq: &[Vec<f64>], nvars: usize, bound: f64) -> Margin {
    // z = [u; w; t] >= 0 with x = u - w. All right-hand sides are
    // nonnegative, so the slack basis is feasible.
    let nz = 2 * nvars + 1;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for g in strict {
        debug_assert_eq!(g.len(), nvars);
        // -g.u + g.w + t <= 0
        let mut a = vec![0.0; nz];
        for k in 0..nvars {
            a[k] = -g[k];
            a[nvars + k] = g[k];
        }
        a[2 * nvars] = 1.0;
        rows.push((a, 0.0));
    }
    for e in eq {
        debug_assert_eq!(e.len(), nvars);
        let mut a = vec![0.0; nz];
        for k in 0..nvars {
            a[k] = e[k];
            a[nvars + k] = -e[k];
        }
        rows.push((a.clone(), 0.0));
        rows.push((a.iter().map(|v| -v).collect(), 0.0));
    }
    for k in 0..2 * nvars {
        let mut a = vec![0.0; nz];
        a[k] = 1.0;
        rows.push((a, bound));
    }
    let mut a = vec![0.0; nz];
    a[2 * nvars] = 1.0;
    rows.push((a, 1.0));

    // Minimize -t.
    let mut cost = vec![0.0; nz];
    cost[2 * nvars] = -1.0;

    let solution = simplex_min(&rows, &cost);
    let point = (0..nvars)
        .map(|k| solution[k] - solution[nvars + k])
        .collect();
    Margin {
        margin: solution[2 * nvars],
        point,
    }
}

/// Minimizes `c.z` over `A z <= b`, `z >= 0`, assuming `b >= 0` so the slack
/// basis starts feasible. Returns the optimal `z`.
fn simplex_min(rows: &[(Vec<f64>, f64)], cost: &[f64]) -> Vec<f64> {
    let m = rows.len();
    let nz = cost.len();
    let width = nz + m + 1; // structural vars, slacks, rhs
    let mut t = vec![vec![0.0f64; width]; m + 1];
    for (i, (a, b)) in rows.iter().enumerate() {
        t[i][..nz].copy_from_slice(a);
        t[i][nz + i] = 1.0;
        t[i][width - 1] = *b;
    }
    t[m][..nz].copy_from_slice(cost);
    let mut basis: Vec<usize> = (nz..nz + m).collect();

    let mut pivots = 0usize;
    loop {
        pivots += 1;
        if pivots > MAX_PIVOTS {
            break; // fall back to current (feasible) point
        }
        // Dantzig rule, switching to Bland once cycling becomes plausible.
        let bland = pivots > 10 * (m + nz);
        let mut enter = None;
        if bland {
            enter = (0..nz + m).find(|&j| t[m][j] < -PIVOT_EPS);
        } else {
            let mut best = -PIVOT_EPS;
            for j in 0..nz + m {
                if t[m][j] < best {
                    best = t[m][j];
                    enter = Some(j);
                }
            }
        }
        let Some(e) = enter else { break };
        // Ratio test; ties resolved by smallest basis index (Bland).
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][e] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][e];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - PIVOT_EPS
                            || (ratio < lr + PIVOT_EPS && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((l, _)) = leave else {
            break; // unbounded direction; the box should prevent this
        };
        // Pivot on (l, e).
        let piv = t[l][e];
        for v in t[l].iter_mut() {
            *v /= piv;
        }
        for i in 0..=m {
            if i != l && t[i][e].abs() > 0.0 {
                let f = t[i][e];
                for j in 0..width {
                    t[i][j] -= f * t[l][j];
                }
                t[i][e] = 0.0;
            }
        }
        basis[l] = e;
    }

    let mut z = vec![0.0; nz];
    for (i, &b) in basis.iter().enumerate() {
        if b < nz {
            z[b] = t[i][width - 1];
        }
    }
    z
}

/// Convenience wrapper: is there a point with `<g_i, x> > 0` for all rows and
/// `<e_j, x> = 0`, strictly within tolerance `tol`?
pub fn strictly_feasible(
    strict: &[Vec<f64>],
    eq: &[Vec<f64>],
    nvars: usize,
    bound: f64,
    tol: f64,
) -> Option<Vec<f64>> {
    let res = max_margin(strict, eq, nvars, bound);
    if res.margin > tol {
        Some(res.point)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfplane_intersection_is_feasible() {
        // x1 > 0, x2 > 0, x1 + x2 > 0
        let strict = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let x = strictly_feasible(&strict, &[], 2, 10.0, 1e-6).unwrap();
        assert!(x[0] > 0.0 && x[1] > 0.0);
    }

    #[test]
    fn opposite_halfplanes_are_infeasible() {
        let strict = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        assert!(strictly_feasible(&strict, &[], 2, 10.0, 1e-6).is_none());
    }

    #[test]
    fn equalities_are_respected() {
        // x1 = x2 and x1 > 0
        let strict = vec![vec![1.0, 0.0]];
        let eq = vec![vec![1.0, -1.0]];
        let x = strictly_feasible(&strict, &eq, 2, 10.0, 1e-6).unwrap();
        assert!((x[0] - x[1]).abs() < 1e-7);
        assert!(x[0] > 0.0);
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        // Points of the square with bias coordinate; XOR labels.
        let pts = [
            (vec![1.0, 0.0, 0.0], 1.0),
            (vec![1.0, 0.0, 1.0], -1.0),
            (vec![1.0, 1.0, 0.0], -1.0),
            (vec![1.0, 1.0, 1.0], 1.0),
        ];
        let strict: Vec<Vec<f64>> = pts
            .iter()
            .map(|(p, s)| p.iter().map(|v| v * s).collect())
            .collect();
        assert!(strictly_feasible(&strict, &[], 3, 100.0, 1e-6).is_none());
    }

    #[test]
    fn margin_is_attained_and_verifiable() {
        let strict = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let m = max_margin(&strict, &[], 2, 5.0);
        assert!(m.margin > 0.9); // t is capped at 1
        for g in &strict {
            let v: f64 = g.iter().zip(&m.point).map(|(a, b)| a * b).sum();
            assert!(v >= m.margin - 1e-7);
        }
    }
}
