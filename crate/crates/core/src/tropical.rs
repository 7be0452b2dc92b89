//! The tropical (max-plus) evaluation of the RBM log-marginal, its regions
//! of linearity, the assembled block matrix, and tropical dimension via rank
//! maximization over slicings.
//!
//! All ranks of assembled 0/1 block matrices are computed in exact integer
//! arithmetic; the reported dimension is `max rank - 1`, quotienting the
//! all-ones direction, which always lies in the column span because the
//! cells of each unit partition the visible states.

use serde::{Deserialize, Serialize};

use crate::coding::{ball, ball_packing_with};
use crate::error::{Error, Result};
use crate::geometry::{parallel_slicing, Slicing, SlicingFile};
use crate::linalg::int_rank;
use crate::models::{DiscreteRBM, ThetaMatrix};
use crate::statespace::{
    build_statistics, StateSpace, SufficientStatistics, EXACT_ENUMERATION_CAP,
};

/// The homogeneous statistics of the joint model: one row per bipartite edge
/// `{i, j}` and joint state `(x_i, h_j)` of its endpoints.
#[derive(Debug, Clone)]
pub struct HomogeneousStatistics {
    visible: StateSpace,
    hidden: StateSpace,
}

impl HomogeneousStatistics {
    pub fn new(visible: StateSpace, hidden: StateSpace) -> Self {
        Self { visible, hidden }
    }

    /// Row count `sum_{i,j} r_i * s_j`.
    pub fn dim(&self) -> usize {
        let rv: usize = self.visible.cards().iter().sum();
        let rh: usize = self.hidden.cards().iter().sum();
        rv * rh
    }

    pub fn cols(&self) -> usize {
        self.visible.size() * self.hidden.size()
    }

    /// Dense rows in edge-major order: for each hidden unit j, variable i,
    /// hidden state w, visible state u, the indicator of `x_i = u, h_j = w`.
    pub fn to_rows_i64(&self) -> Vec<Vec<i64>> {
        let hy = self.hidden.size();
        let mut rows = Vec::with_capacity(self.dim());
        for j in 0..self.hidden.n() {
            for i in 0..self.visible.n() {
                for w in 0..self.hidden.cards()[j] {
                    for u in 0..self.visible.cards()[i] {
                        let mut row = Vec::with_capacity(self.cols());
                        for c in 0..self.cols() {
                            let x = self.visible.state_of(c / hy);
                            let h = self.hidden.state_of(c % hy);
                            row.push(i64::from(x[i] == u && h[j] == w));
                        }
                        rows.push(row);
                    }
                }
            }
        }
        rows
    }
}

/// The visible-side homogeneous matrix: rows `1{x_i = u}` for every variable
/// and every state, including state 0.
pub fn homogeneous_visible_rows(space: &StateSpace) -> Vec<Vec<i64>> {
    let mut rows = Vec::new();
    for i in 0..space.n() {
        for u in 0..space.cards()[i] {
            rows.push(
                (0..space.size())
                    .map(|x| i64::from(space.state_of(x)[i] == u))
                    .collect(),
            );
        }
    }
    rows
}

/// The block matrix of a collection of per-unit slicings: one `d_X`-wide
/// block per (unit, hidden state); the row of visible state `x` carries
/// `A_x` in the block of the cell containing `x`, once per unit.
#[derive(Debug, Clone)]
pub struct TropicalBlockMatrix {
    rows: Vec<Vec<i64>>,
    unit_cards: Vec<usize>,
    dx: usize,
}

/// Assembles the block matrix from one slicing per hidden unit.
pub fn tropical_matrix(
    stats: &SufficientStatistics,
    slicings: &[Slicing],
) -> Result<TropicalBlockMatrix> {
    if slicings.is_empty() {
        return Err(Error::InvalidInput("no slicings".into()));
    }
    for s in slicings {
        if s.assignment().len() != stats.cols() {
            return Err(Error::SpaceMismatch);
        }
    }
    let dx = stats.dim();
    let width: usize = slicings.iter().map(|s| s.unit_card() * dx).sum();
    let mut rows = vec![vec![0i64; width]; stats.cols()];
    for (x, row) in rows.iter_mut().enumerate() {
        let col = stats.column_i64(x);
        let mut offset = 0;
        for s in slicings {
            let cell = s.assignment()[x];
            let base = offset + cell * dx;
            row[base..base + dx].copy_from_slice(&col);
            offset += s.unit_card() * dx;
        }
    }
    Ok(TropicalBlockMatrix {
        rows,
        unit_cards: slicings.iter().map(Slicing::unit_card).collect(),
        dx,
    })
}

impl TropicalBlockMatrix {
    pub fn rows_i64(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn unit_cards(&self) -> &[usize] {
        &self.unit_cards
    }

    pub fn width(&self) -> usize {
        self.unit_cards.iter().map(|&s| s * self.dx).sum()
    }

    /// Exact rank over the integers.
    pub fn rank(&self) -> usize {
        int_rank(&self.rows)
    }

    /// The all-ones vector over the visible states lies in the column span:
    /// summing every block of one unit reproduces it.
    pub fn ones_in_column_span(&self) -> bool {
        // Work with the transpose: columns become rows.
        let nrows = self.rows.len();
        let width = self.width();
        let mut cols: Vec<Vec<i64>> = (0..width)
            .map(|c| (0..nrows).map(|r| self.rows[r][c]).collect())
            .collect();
        let base = int_rank(&cols);
        cols.push(vec![1i64; nrows]);
        int_rank(&cols) == base
    }
}

/// The tropical evaluation `max_h <theta, A_{(v,h)}>` by direct scan over
/// the hidden joint states.
pub fn tropical_value(rbm: &DiscreteRBM, v: usize) -> Result<f64> {
    let hy = rbm.hidden().size() as u128;
    if hy > EXACT_ENUMERATION_CAP {
        return Err(Error::InstanceTooLarge {
            size: hy,
            cap: EXACT_ENUMERATION_CAP,
        });
    }
    let proj = rbm.project_visible(v);
    let best = (0..rbm.hidden().size())
        .map(|y| rbm.hid_stats().dot(&proj, y))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best)
}

/// The same value through the per-unit decomposition: the shared constant
/// plus one maximum per hidden unit.
pub fn tropical_value_by_units(rbm: &DiscreteRBM, v: usize) -> f64 {
    let (c0, scores) = rbm.unit_scores(v);
    c0 + scores
        .iter()
        .map(|unit| unit.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
}

/// The per-unit slicings induced by the parameters of `rbm`: cell of `x` at
/// unit `j` is the maximizing hidden state of that unit. Fails when a point
/// ties across cells.
pub fn induced_slicings(rbm: &DiscreteRBM) -> Result<Vec<Slicing>> {
    let stats = rbm.vis_stats();
    let th = rbm.theta().matrix();
    let mut out = Vec::with_capacity(rbm.hidden().n());
    for (j, &s) in rbm.hidden().cards().iter().enumerate() {
        let mut map = nalgebra::DMatrix::zeros(s, stats.dim());
        for w in 1..s {
            let row = rbm.hid_stats().row_index(j, w);
            for i in 0..stats.dim() {
                map[(w, i)] = th[(row, i)];
            }
        }
        out.push(Slicing::from_map(stats, s, map)?);
    }
    Ok(out)
}

/// Assembles parameters whose induced per-unit slicings are the given ones:
/// unit `j`'s rows are copied from the slicing's realizing map.
pub fn theta_from_slicings(
    visible: &StateSpace,
    hidden: &StateSpace,
    slicings: &[Slicing],
) -> Result<ThetaMatrix> {
    if slicings.len() != hidden.n() {
        return Err(Error::InvalidInput(
            "need exactly one slicing per hidden unit".into(),
        ));
    }
    let vis_stats = build_statistics(visible);
    let hid_stats = build_statistics(hidden);
    let mut th = nalgebra::DMatrix::zeros(hid_stats.dim(), vis_stats.dim());
    for (j, s) in slicings.iter().enumerate() {
        if s.unit_card() != hidden.cards()[j] {
            return Err(Error::InvalidInput("slicing/unit cardinality mismatch".into()));
        }
        for w in 1..s.unit_card() {
            let row = hid_stats.row_index(j, w);
            for i in 0..vis_stats.dim() {
                th[(row, i)] = s.map()[(w, i)];
            }
        }
    }
    ThetaMatrix::new(th)
}

/// Embeds a parameter perturbation into the block-matrix coordinates: block
/// `(j, k)` receives the perturbation of unit `j`'s state-`k` functional,
/// the constant row split evenly across units.
pub fn embed_perturbation(
    visible: &StateSpace,
    hidden: &StateSpace,
    delta: &ThetaMatrix,
) -> Vec<f64> {
    let vis_stats = build_statistics(visible);
    let hid_stats = build_statistics(hidden);
    let d = delta.matrix();
    let m = hidden.n() as f64;
    let dx = vis_stats.dim();
    let mut out = Vec::new();
    for (j, &s) in hidden.cards().iter().enumerate() {
        for k in 0..s {
            for i in 0..dx {
                let mut v = d[(0, i)] / m;
                if k >= 1 {
                    v += d[(hid_stats.row_index(j, k), i)];
                }
                out.push(v);
            }
        }
    }
    out
}

/// Per ball, a parallel-hyperplane slicing whose inner cells pair up the
/// Hamming spheres around the center and whose last cell is the complement.
/// Returns `None` when a radius exceeds the number of variables; errors when
/// the balls overlap.
pub fn ball_slicing_certificate(
    space: &StateSpace,
    centers: &[usize],
    radii: &[usize],
) -> Result<Option<Vec<Slicing>>> {
    if centers.len() != radii.len() || centers.is_empty() {
        return Err(Error::InvalidInput("centers/radii length mismatch".into()));
    }
    for (a, (&ca, &ra)) in centers.iter().zip(radii).enumerate() {
        for (&cb, &rb) in centers.iter().zip(radii).skip(a + 1) {
            let d = space.hamming(&space.state_of(ca), &space.state_of(cb))?;
            if d <= ra + rb {
                return Err(Error::OverlappingBalls);
            }
        }
    }
    if radii.iter().any(|&r| r > space.n()) {
        return Ok(None);
    }
    let stats = build_statistics(space);
    let mut out = Vec::with_capacity(centers.len());
    for (&c, &r) in centers.iter().zip(radii) {
        let dir = distance_functional(&stats, c);
        // Cells: sphere pairs {0,1}, {2,3}, ... inside the ball, then the
        // complement; thresholds at odd half-integers and after the ball.
        let mut thresholds: Vec<f64> = (0..)
            .map(|t| 1.5 + 2.0 * t as f64)
            .take_while(|&t| t < r as f64)
            .collect();
        thresholds.push(r as f64 + 0.5);
        let k = thresholds.len() + 1;
        let (slicing, _) = parallel_slicing(&stats, k, &dir, &thresholds)?;
        out.push(slicing);
    }
    Ok(Some(out))
}

/// The linear functional with `<u, A_x> = d_H(x, center)`.
fn distance_functional(stats: &SufficientStatistics, center: usize) -> Vec<f64> {
    let space = stats.space();
    let c = space.state_of(center);
    let mut u = vec![0.0f64; stats.dim()];
    for (i, &ci) in c.iter().enumerate() {
        if ci != 0 {
            u[0] += 1.0;
            u[stats.row_index(i, ci)] -= 1.0;
        } else {
            for v in 1..space.cards()[i] {
                u[stats.row_index(i, v)] += 1.0;
            }
        }
    }
    u
}

/// Outcome of the tropical-dimension search: the achieved value, its
/// certificate, and whether the value is exact or only a lower bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TropicalDimension {
    /// `max rank(A) - 1` over the searched slicing collections.
    pub value: usize,
    pub rank: usize,
    /// The maximizing slicings, one per hidden unit.
    pub slicings: Vec<SlicingFile>,
    /// Which candidate family achieved the maximum.
    pub family: String,
    /// Exact when the search was exhaustive or the value meets the
    /// parameter-count upper bound; otherwise a lower bound.
    pub exact: bool,
    pub exact_reason: Option<String>,
}

/// Maximizes the rank of the assembled block matrix over slicing
/// collections: structured Hamming-ball candidates first, then parallel
/// sweeps and random maps, with an exhaustive pass for a single binary
/// hidden unit on tiny spaces when the budget covers it.
pub fn tropical_dimension(
    visible: &StateSpace,
    hidden: &StateSpace,
    budget: usize,
    seed: u64,
) -> Result<TropicalDimension> {
    use rand::{Rng, SeedableRng};
    let stats = build_statistics(visible);
    let dx = stats.dim();
    let dy: usize = 1 + hidden.cards().iter().map(|&s| s - 1).sum::<usize>();
    let upper = (dx * dy).min(visible.size()) - 1;
    let mut best: Option<(usize, Vec<Slicing>, String)> = None;
    let mut consider = |rank: usize, slicings: Vec<Slicing>, family: &str,
                        best: &mut Option<(usize, Vec<Slicing>, String)>| {
        if best.as_ref().map_or(true, |(r, _, _)| rank > *r) {
            *best = Some((rank, slicings, family.to_string()));
        }
    };

    // Structured family: disjoint balls of radius 2 s_j - 3, preferring
    // packings with a full-rank complement.
    let radii: Vec<usize> = hidden.cards().iter().map(|&s| 2 * s - 3).collect();
    if radii.iter().all(|&r| r <= visible.n()) {
        let packing = ball_packing_with(visible, &radii, true)
            .or_else(|| ball_packing_with(visible, &radii, false));
        if let Some(p) = packing {
            if let Some(slicings) = ball_slicing_certificate(visible, &p.centers, &radii)? {
                let rank = tropical_matrix(&stats, &slicings)?.rank();
                consider(rank, slicings, "hamming-ball", &mut best);
            }
        }
    }

    // Exhaustive pass: one binary hidden unit on a tiny space.
    let mut exhausted = false;
    if hidden.n() == 1 && hidden.cards()[0] == 2 && visible.size() <= 16 {
        let total = 1usize << visible.size();
        if budget >= total {
            for s in crate::geometry::enumerate_slicings(&stats, 2, 2 * total, seed) {
                let rank = tropical_matrix(&stats, std::slice::from_ref(&s))?.rank();
                consider(rank, vec![s], "exhaustive", &mut best);
            }
            exhausted = true;
        }
    }

    // Random collections: per unit, a parallel sweep or a generic map.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for _ in 0..budget {
        let mut slicings = Vec::with_capacity(hidden.n());
        let mut family = "parallel";
        let mut ok = true;
        for &card in hidden.cards() {
            let use_parallel = rng.gen_bool(0.5);
            let s = if use_parallel {
                random_parallel(&stats, card, &mut rng)
            } else {
                family = "random-map";
                let map = nalgebra::DMatrix::from_fn(card, dx, |_, _| rng.gen_range(-1.0..1.0));
                Slicing::from_map(&stats, card, map).ok()
            };
            match s {
                Some(s) => slicings.push(s),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let rank = tropical_matrix(&stats, &slicings)?.rank();
        consider(rank, slicings, family, &mut best);
    }

    let (rank, slicings, family) =
        best.ok_or_else(|| Error::InvalidInput("search produced no slicing".into()))?;
    let value = rank - 1;
    let (exact, exact_reason) = if value == upper {
        (true, Some("meets parameter-count upper bound".to_string()))
    } else if exhausted {
        (true, Some("exhaustive slicing enumeration".to_string()))
    } else {
        (false, None)
    };
    Ok(TropicalDimension {
        value,
        rank,
        slicings: slicings.iter().map(Slicing::to_file).collect(),
        family,
        exact,
        exact_reason,
    })
}

fn random_parallel<R: rand::Rng>(
    stats: &SufficientStatistics,
    card: usize,
    rng: &mut R,
) -> Option<Slicing> {
    let dir: Vec<f64> = (0..stats.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut projs: Vec<f64> = (0..stats.cols()).map(|x| stats.dot(&dir, x)).collect();
    projs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    projs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if projs.len() < card {
        return None;
    }
    let gaps: Vec<f64> = projs.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    let mut picks: Vec<usize> = (0..gaps.len()).collect();
    for i in 0..picks.len() {
        let j = rng.gen_range(i..picks.len());
        picks.swap(i, j);
    }
    let mut chosen: Vec<f64> = picks[..card - 1].iter().map(|&g| gaps[g]).collect();
    chosen.sort_by(|a, b| a.partial_cmp(b).unwrap());
    parallel_slicing(stats, card, &dir, &chosen).ok().map(|(s, _)| s)
}

/// Convenience: the ball of a packing certificate (used by callers reporting
/// which states the structured family isolates).
pub fn packing_balls(space: &StateSpace, centers: &[usize], radii: &[usize]) -> Vec<Vec<usize>> {
    centers
        .iter()
        .zip(radii)
        .map(|(&c, &r)| ball(space, c, r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::affine_rank;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(cards: &[usize]) -> StateSpace {
        StateSpace::new(cards.to_vec()).unwrap()
    }

    fn random_rbm(vis: &[usize], hid: &[usize], seed: u64) -> DiscreteRBM {
        let v = space(vis);
        let h = space(hid);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let th = ThetaMatrix::random_normal(
            build_statistics(&h).dim(),
            build_statistics(&v).dim(),
            &mut rng,
        );
        DiscreteRBM::new(v, h, th).unwrap()
    }

    #[test]
    fn homogeneous_rows_span_the_kronecker_rows() {
        let vis = space(&[2, 2]);
        let hid = space(&[2]);
        let hom = HomogeneousStatistics::new(vis.clone(), hid.clone());
        let mut hom_rows = hom.to_rows_i64();
        hom_rows.push(vec![1; hom.cols()]);
        let base = int_rank(&hom_rows);
        let kron = crate::statespace::joint_statistics(
            &build_statistics(&vis),
            &build_statistics(&hid),
        )
        .unwrap();
        let mut all = hom_rows.clone();
        all.extend(kron.to_rows_i64());
        assert_eq!(int_rank(&all), base);
        // And the Kronecker rows alone span the same space.
        assert_eq!(int_rank(&kron.to_rows_i64()), base);
    }

    #[test]
    fn tropical_value_zero_theta() {
        let rbm = DiscreteRBM::new(space(&[2, 2]), space(&[2]), ThetaMatrix::zeros(2, 3)).unwrap();
        for v in 0..4 {
            assert_eq!(tropical_value(&rbm, v).unwrap(), 0.0);
            assert_eq!(tropical_value_by_units(&rbm, v), 0.0);
        }
    }

    #[test]
    fn tropical_decomposition_identity() {
        for seed in 0..100 {
            let rbm = random_rbm(&[2, 3], &[2, 2], seed);
            for v in 0..rbm.visible().size() {
                let a = tropical_value(&rbm, v).unwrap();
                let b = tropical_value_by_units(&rbm, v);
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn single_unit_maximizer_is_cone_member() {
        for seed in 0..10 {
            let rbm = random_rbm(&[2, 2, 2], &[3], seed);
            for v in 0..rbm.visible().size() {
                let val = tropical_value(&rbm, v).unwrap();
                let proj = rbm.project_visible(v);
                let best = crate::geometry::strict_cone_of(rbm.hid_stats(), &proj);
                if let Some(y) = best {
                    let direct = rbm.hid_stats().dot(&proj, y);
                    assert!((direct - val).abs() < 1e-12 * (1.0 + val.abs()));
                    assert!(crate::geometry::normal_cone_contains(
                        rbm.hid_stats(),
                        y,
                        &proj,
                        true
                    )
                    .unwrap());
                }
            }
        }
    }

    #[test]
    fn degenerate_single_cell_block_is_the_statistics_matrix() {
        let stats = build_statistics(&space(&[2, 2, 2]));
        let map = nalgebra::DMatrix::zeros(1, stats.dim());
        let s = Slicing::from_map(&stats, 1, map).unwrap();
        let a = tropical_matrix(&stats, &[s]).unwrap();
        assert_eq!(a.rank(), stats.dim());
        assert!(a.ones_in_column_span());
    }

    #[test]
    fn vertex_isolating_split_rank() {
        // Cells {v} and the rest on the 3-cube: the isolated block
        // contributes one row, the complement full statistic rank.
        let stats = build_statistics(&space(&[2, 2, 2]));
        let dir = vec![0.0, 1.0, 1.0, 1.0];
        let (s, _) = parallel_slicing(&stats, 2, &dir, &[2.5]).unwrap();
        assert_eq!(s.cells()[1], vec![7]);
        let a = tropical_matrix(&stats, &[s]).unwrap();
        // Oracle (exact integer rank of the assembled matrix): 1 + d_X = 5.
        assert_eq!(a.rank(), 5);
        assert!(a.ones_in_column_span());
    }

    #[test]
    fn radius_one_ball_split_reaches_full_rank() {
        let sp = space(&[2, 2, 2]);
        let stats = build_statistics(&sp);
        let slicings = ball_slicing_certificate(&sp, &[0], &[1])
            .unwrap()
            .expect("radius within n");
        assert_eq!(slicings.len(), 1);
        let cells = slicings[0].cells();
        let mut inner = cells[0].clone();
        inner.sort_unstable();
        assert_eq!(inner, ball(&sp, 0, 1));
        let a = tropical_matrix(&stats, &slicings).unwrap();
        assert_eq!(a.rank(), 8);
    }

    #[test]
    fn prism_with_four_binary_units_rank_caps_at_six() {
        let sp = space(&[3, 2]);
        let stats = build_statistics(&sp);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut slicings = Vec::new();
        while slicings.len() < 4 {
            if let Some(s) = super::random_parallel(&stats, 2, &mut rng) {
                slicings.push(s);
            }
        }
        let a = tropical_matrix(&stats, &slicings).unwrap();
        assert!(a.rank() <= 6);
        assert!(a.ones_in_column_span());
    }

    #[test]
    fn block_rank_is_invariant_under_homogeneous_blocks() {
        // Swapping each d_X block for the taller homogeneous visible block
        // never changes the rank.
        let sp = space(&[2, 2, 2]);
        let stats = build_statistics(&sp);
        let slicings = ball_slicing_certificate(&sp, &[0], &[1]).unwrap().unwrap();
        let a = tropical_matrix(&stats, &slicings).unwrap();
        let hom = homogeneous_visible_rows(&sp);
        let mut rows = vec![Vec::new(); sp.size()];
        for (x, row) in rows.iter_mut().enumerate() {
            for s in &slicings {
                for cell in 0..s.unit_card() {
                    for h in &hom {
                        row.push(if s.assignment()[x] == cell { h[x] } else { 0 });
                    }
                }
            }
        }
        assert_eq!(int_rank(&rows), a.rank());
    }

    #[test]
    fn region_of_linearity_matches_block_matrix() {
        let vis = space(&[2, 2, 2]);
        let hid = space(&[2, 3]);
        let stats = build_statistics(&vis);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut slicings = Vec::new();
        for &card in hid.cards() {
            loop {
                if let Some(s) = super::random_parallel(&stats, card, &mut rng) {
                    slicings.push(s);
                    break;
                }
            }
        }
        let theta = theta_from_slicings(&vis, &hid, &slicings).unwrap();
        let rbm = DiscreteRBM::new(vis.clone(), hid.clone(), theta.clone()).unwrap();
        // The parameters induce exactly these slicings.
        let induced = induced_slicings(&rbm).unwrap();
        for (a, b) in induced.iter().zip(&slicings) {
            assert_eq!(a.assignment(), b.assignment());
        }
        let a = tropical_matrix(&stats, &slicings).unwrap();
        // Small perturbations leave every argmax fixed; the tropical values
        // then move linearly with matrix A.
        let mut rng2 = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let delta = ThetaMatrix::new(nalgebra::DMatrix::from_fn(
                theta.matrix().nrows(),
                theta.matrix().ncols(),
                |_, _| rng2.gen_range(-1e-4..1e-4),
            ))
            .unwrap();
            let perturbed = ThetaMatrix::new(theta.matrix() + delta.matrix()).unwrap();
            let rbm2 = DiscreteRBM::new(vis.clone(), hid.clone(), perturbed).unwrap();
            let dvec = embed_perturbation(&vis, &hid, &delta);
            for v in 0..vis.size() {
                let lhs =
                    tropical_value_by_units(&rbm2, v) - tropical_value_by_units(&rbm, v);
                let rhs: f64 = a.rows_i64()[v]
                    .iter()
                    .zip(&dvec)
                    .map(|(&c, &d)| c as f64 * d)
                    .sum();
                assert!((lhs - rhs).abs() < 1e-9, "v={v} lhs={lhs} rhs={rhs}");
            }
        }
    }

    #[test]
    fn sphere_affine_hulls_drop_one_dimension() {
        // Affine hull of a middle sphere: dimension sum(r_i - 1) - 1.
        for cards in [vec![2, 2, 2], vec![3, 2, 2]] {
            let sp = space(&cards);
            let stats = build_statistics(&sp);
            let dfull: usize = cards.iter().map(|&r| r - 1).sum();
            for k in 1..sp.n() {
                let pts: Vec<Vec<i64>> = (0..sp.size())
                    .filter(|&x| {
                        sp.hamming(&sp.state_of(x), &sp.state_of(0)).unwrap() == k
                    })
                    .map(|x| stats.column_i64(x))
                    .collect();
                assert_eq!(affine_rank(&pts), dfull - 1, "cards {cards:?} k {k}");
            }
            // Radius-one ball columns are affinely independent.
            let ball_pts: Vec<Vec<i64>> = ball(&sp, 0, 1)
                .iter()
                .map(|&x| stats.column_i64(x))
                .collect();
            assert_eq!(affine_rank(&ball_pts), ball_pts.len() - 1);
        }
    }

    #[test]
    fn radius_zero_gives_vertex_and_complement() {
        let sp = space(&[2, 2]);
        let slicings = ball_slicing_certificate(&sp, &[2], &[0]).unwrap().unwrap();
        let cells = slicings[0].cells();
        assert_eq!(cells[0], vec![2]);
        assert_eq!(cells[1].len(), 3);
    }

    #[test]
    fn overlapping_balls_error_and_oversize_radius_none() {
        let sp = space(&[2, 2, 2]);
        assert!(matches!(
            ball_slicing_certificate(&sp, &[0, 1], &[1, 1]),
            Err(Error::OverlappingBalls)
        ));
        assert!(ball_slicing_certificate(&sp, &[0], &[4]).unwrap().is_none());
    }

    #[test]
    fn naive_bayes_three_bits_reaches_seven() {
        let td = tropical_dimension(&space(&[2, 2, 2]), &space(&[2]), 50, 3).unwrap();
        assert_eq!(td.value, 7);
        assert!(td.exact);
        assert_eq!(td.rank, 8);
    }

    #[test]
    fn two_bits_saturate_at_full_simplex() {
        // Parameters exceed the ambient dimension: min(2*3, 4) - 1 = 3.
        let td = tropical_dimension(&space(&[2, 2]), &space(&[2]), 50, 5).unwrap();
        assert_eq!(td.value, 3);
        assert!(td.exact);
    }

    #[test]
    fn search_value_never_exceeds_upper_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let n = rng.gen_range(2..4);
            let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..4)).collect();
            let m = rng.gen_range(1..3);
            let hcards: Vec<usize> = (0..m).map(|_| rng.gen_range(2..4)).collect();
            let vis = space(&cards);
            let hid = space(&hcards);
            let dx = build_statistics(&vis).dim();
            let dy = build_statistics(&hid).dim();
            let td = tropical_dimension(&vis, &hid, 30, rng.gen()).unwrap();
            assert!(td.value <= (dx * dy).min(vis.size()) - 1);
        }
    }
}
