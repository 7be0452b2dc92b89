//! Normal fans of products of simplices, slicings, inference functions, and
//! strong modes.
//!
//! The normal cone of the product of simplices `Q_X` at the vertex `A_x`
//! consists of the directions maximized at `x`. A slicing partitions the
//! visible vertices into preimages of the maximal cones of a hidden unit's
//! fan under a linear map; slicings are accepted only when every mapped
//! point clears every cone facet by a genericity margin.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::Code;
use crate::error::{Error, Result};
use crate::lp::max_margin;
use crate::models::{DiscreteRBM, Distribution, ThetaMatrix, DELTA_MAGNITUDE};
use crate::statespace::{build_statistics, StateSpace, SufficientStatistics};

/// Margin by which a mapped point must clear every cone facet, relative to
/// the point's magnitude, before a slicing is accepted.
pub const GENERICITY_EPS: f64 = 1e-9;

/// Membership of `v` in the normal cone of `Q_X` at vertex `x`:
/// `<v, A_x - A_y> >= 0` for all `y != x` (`> 0` when strict).
pub fn normal_cone_contains(
    stats: &SufficientStatistics,
    x: usize,
    v: &[f64],
    strict: bool,
) -> Result<bool> {
    if v.len() != stats.dim() {
        return Err(Error::DimensionMismatch {
            expected: stats.dim(),
            got: v.len(),
        });
    }
    let vx = stats.dot(v, x);
    for y in 0..stats.cols() {
        if y == x {
            continue;
        }
        let d = vx - stats.dot(v, y);
        if (strict && d <= 0.0) || (!strict && d < 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The unique vertex whose cone interior contains `v`, if any.
pub fn strict_cone_of(stats: &SufficientStatistics, v: &[f64]) -> Option<usize> {
    let vals: Vec<f64> = (0..stats.cols()).map(|x| stats.dot(v, x)).collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] == max).collect();
    if winners.len() == 1 {
        Some(winners[0])
    } else {
        None
    }
}

/// The full argmax set of `p(y|x)`: the hidden states maximizing
/// `<Theta A_x, A_y>`. Ties factor over the hidden units.
pub fn inference_function(rbm: &DiscreteRBM, x: usize) -> Vec<usize> {
    let (_, scores) = rbm.unit_scores(x);
    let per_unit: Vec<Vec<usize>> = scores
        .iter()
        .map(|unit| {
            let max = unit.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..unit.len()).filter(|&w| unit[w] == max).collect()
        })
        .collect();
    let mut joint = vec![Vec::new()];
    for unit in &per_unit {
        let mut next = Vec::with_capacity(joint.len() * unit.len());
        for prefix in &joint {
            for &w in unit {
                let mut p: Vec<usize> = prefix.clone();
                p.push(w);
                next.push(p);
            }
        }
        joint = next;
    }
    let mut out: Vec<usize> = joint
        .iter()
        .map(|state| rbm.hidden().index_of(state).unwrap())
        .collect();
    out.sort_unstable();
    out
}

/// Single-valued inference function; ties break to the lowest joint index.
pub fn inference_single(rbm: &DiscreteRBM, x: usize) -> usize {
    inference_function(rbm, x)[0]
}

/// A partition of the visible vertices into preimages of the maximal cones
/// of one hidden unit's fan, with its realizing linear map.
#[derive(Debug, Clone)]
pub struct Slicing {
    unit_card: usize,
    /// Cell of each visible state.
    assignment: Vec<usize>,
    /// `unit_card x d_X` map into the unit's statistic space; row 0 is the
    /// constant slot and does not affect cone membership.
    map: DMatrix<f64>,
}

/// JSON form: the realizing map and the cells keyed by hidden state index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlicingFile {
    pub theta: Vec<Vec<f64>>,
    pub cells: BTreeMap<String, Vec<usize>>,
}

impl Slicing {
    /// Classifies every visible vertex by the cone its image lies in,
    /// rejecting maps that leave any point within the genericity margin of a
    /// facet.
    pub fn from_map(
        stats: &SufficientStatistics,
        unit_card: usize,
        map: DMatrix<f64>,
    ) -> Result<Self> {
        if map.nrows() != unit_card || map.ncols() != stats.dim() {
            return Err(Error::DimensionMismatch {
                expected: unit_card * stats.dim(),
                got: map.nrows() * map.ncols(),
            });
        }
        let mut assignment = Vec::with_capacity(stats.cols());
        for x in 0..stats.cols() {
            let vals = cell_values(&map, stats, x);
            let scale = 1.0 + vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let (winner, best) = vals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(w, &v)| (w, v))
                .unwrap();
            let runner_up = vals
                .iter()
                .enumerate()
                .filter(|&(w, _)| w != winner)
                .map(|(_, &v)| v)
                .fold(f64::NEG_INFINITY, f64::max);
            if best - runner_up <= GENERICITY_EPS * scale {
                return Err(Error::NonGenericSlicing {
                    state: stats.space().state_of(x),
                });
            }
            assignment.push(winner);
        }
        Ok(Self {
            unit_card,
            assignment,
            map,
        })
    }

    pub fn unit_card(&self) -> usize {
        self.unit_card
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn map(&self) -> &DMatrix<f64> {
        &self.map
    }

    /// States of each cell, indexed by hidden state.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.unit_card];
        for (x, &c) in self.assignment.iter().enumerate() {
            cells[c].push(x);
        }
        cells
    }

    /// Independent realizability check: a linear program over the reduced
    /// map entries must strictly separate every cell into its cone.
    pub fn lp_realizable(&self, stats: &SufficientStatistics) -> bool {
        lp_assignment_witness(stats, self.unit_card, &self.assignment).is_some()
    }

    pub fn to_file(&self) -> SlicingFile {
        let theta = (0..self.map.nrows())
            .map(|r| (0..self.map.ncols()).map(|c| self.map[(r, c)]).collect())
            .collect();
        let mut cells = BTreeMap::new();
        for (y, cell) in self.cells().into_iter().enumerate() {
            cells.insert(y.to_string(), cell);
        }
        SlicingFile { theta, cells }
    }
}

/// Per-state scores of a mapped point: state 0 scores the constant slot
/// against itself, so differences reduce to `v_w` vs 0.
fn cell_values(map: &DMatrix<f64>, stats: &SufficientStatistics, x: usize) -> Vec<f64> {
    let mut vals = vec![0.0f64; map.nrows()];
    for w in 1..map.nrows() {
        let row: Vec<f64> = (0..map.ncols()).map(|i| map[(w, i)]).collect();
        vals[w] = stats.dot(&row, x);
    }
    vals
}

/// LP witness for a prescribed cell assignment; returns the reduced map
/// rows when the assignment is strictly realizable.
fn lp_assignment_witness(
    stats: &SufficientStatistics,
    unit_card: usize,
    assignment: &[usize],
) -> Option<DMatrix<f64>> {
    let d = stats.dim();
    let nvars = (unit_card - 1) * d;
    let mut strict = Vec::new();
    for (x, &cell) in assignment.iter().enumerate() {
        let col = stats.column_f64(x);
        for w in 0..unit_card {
            if w == cell {
                continue;
            }
            // score_cell - score_w >= t, scores linear in the reduced rows.
            let mut g = vec![0.0; nvars];
            if cell >= 1 {
                for i in 0..d {
                    g[(cell - 1) * d + i] += col[i];
                }
            }
            if w >= 1 {
                for i in 0..d {
                    g[(w - 1) * d + i] -= col[i];
                }
            }
            strict.push(g);
        }
    }
    let res = max_margin(&strict, &[], nvars, 100.0);
    if res.margin <= 1e-6 {
        return None;
    }
    // Rescale so the slicing constructor's genericity margin is cleared
    // comfortably.
    let factor = 2.0 / res.margin;
    let mut map = DMatrix::zeros(unit_card, d);
    for w in 1..unit_card {
        for i in 0..d {
            map[(w, i)] = res.point[(w - 1) * d + i] * factor;
        }
    }
    Some(map)
}

/// The line parameters `(r, b)` realizing a parallel-hyperplane slicing;
/// cell `y` is hit by the line exactly on the interval `I_y`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParallelWitness {
    pub r: Vec<f64>,
    pub b: Vec<f64>,
}

impl ParallelWitness {
    /// The intervals `I_y` on which state `y` wins: breakpoints are the
    /// difference quotients of consecutive `(b, r)` pairs.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        line_intervals(&self.r, &self.b)
    }
}

/// Intervals of a line `lambda r - b` through the fan of the simplex on
/// `{1..k}`: `I_y = (c_{y-1}, c_y)` with `c_y = (b_{y+1}-b_y)/(r_{y+1}-r_y)`.
pub fn line_intervals(r: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    let k = r.len();
    assert_eq!(b.len(), k);
    let cut: Vec<f64> = (0..k - 1)
        .map(|y| (b[y + 1] - b[y]) / (r[y + 1] - r[y]))
        .collect();
    (0..k)
        .map(|y| {
            let lo = if y == 0 { f64::NEG_INFINITY } else { cut[y - 1] };
            let hi = if y == k - 1 { f64::INFINITY } else { cut[y] };
            (lo, hi)
        })
        .collect()
}

/// Slices the visible vertices by `k-1` parallel hyperplanes orthogonal to
/// `direction` at the given thresholds; cells are ordered by increasing
/// projection and assigned to hidden states `0..k`. Returns the slicing and
/// the realizing line parameters.
pub fn parallel_slicing(
    stats: &SufficientStatistics,
    k: usize,
    direction: &[f64],
    thresholds: &[f64],
) -> Result<(Slicing, ParallelWitness)> {
    if k < 2 || thresholds.len() != k - 1 {
        return Err(Error::InvalidInput(format!(
            "need k-1 thresholds for k = {k} cells"
        )));
    }
    if direction.len() != stats.dim() {
        return Err(Error::DimensionMismatch {
            expected: stats.dim(),
            got: direction.len(),
        });
    }
    if direction.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidInput("zero direction".into()));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("thresholds must strictly increase".into()));
    }
    let norm1: f64 = direction.iter().map(|v| v.abs()).sum();
    for x in 0..stats.cols() {
        let proj = stats.dot(direction, x);
        for &t in thresholds {
            if (proj - t).abs() <= GENERICITY_EPS * (1.0 + norm1 + t.abs()) {
                return Err(Error::NonGenericSlicing {
                    state: stats.space().state_of(x),
                });
            }
        }
    }
    // Line construction: shift projections positive, then place breakpoints
    // exactly at the shifted thresholds with unit slope increments. The
    // resulting (b, r) pairs interpolate a strictly increasing concave
    // function because the thresholds increase.
    let shift = thresholds[0] - 1.0;
    let mut r = vec![0.0f64; k];
    let mut b = vec![0.0f64; k];
    for y in 1..k {
        r[y] = y as f64;
        b[y] = b[y - 1] + (thresholds[y - 1] - shift);
    }
    let mut map = DMatrix::zeros(k, stats.dim());
    for w in 1..k {
        let slope = r[w]; // r[w] - r[0]
        for i in 0..stats.dim() {
            map[(w, i)] = slope * direction[i];
        }
        map[(w, 0)] -= slope * shift + b[w]; // b[w] - b[0], constant slot
    }
    let slicing = Slicing::from_map(stats, k, map)?;
    // The constructed cells must agree with the threshold cells.
    for x in 0..stats.cols() {
        let proj = stats.dot(direction, x);
        let cell = thresholds.iter().filter(|&&t| t < proj).count();
        if slicing.assignment[x] != cell {
            return Err(Error::NonGenericSlicing {
                state: stats.space().state_of(x),
            });
        }
    }
    Ok((slicing, ParallelWitness { r, b }))
}

/// Best-effort enumeration of realizable slicings of the visible vertices by
/// one hidden unit of the given cardinality. Families searched: exhaustive
/// cell assignments certified by linear programming (tiny instances only),
/// parallel-hyperplane sweeps over random directions, and random linear
/// maps. Deduplicated by cell assignment; coverage is not exhaustive beyond
/// the first family.
pub fn enumerate_slicings(
    stats: &SufficientStatistics,
    hidden_card: usize,
    budget: usize,
    seed: u64,
) -> Vec<Slicing> {
    let mut found: BTreeMap<Vec<usize>, Slicing> = BTreeMap::new();
    if budget == 0 || hidden_card < 2 {
        return Vec::new();
    }
    let size = stats.cols();
    let mut spent = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Exhaustive assignments when the assignment space is tiny.
    let total = (hidden_card as f64).powi(size as i32);
    if total <= 65_536.0 {
        let total = total as usize;
        for code in 0..total {
            if spent >= budget {
                break;
            }
            spent += 1;
            let mut assignment = Vec::with_capacity(size);
            let mut a = code;
            for _ in 0..size {
                assignment.push(a % hidden_card);
                a /= hidden_card;
            }
            if let Some(map) = lp_assignment_witness(stats, hidden_card, &assignment) {
                if let Ok(s) = Slicing::from_map(stats, hidden_card, map) {
                    found.entry(s.assignment.clone()).or_insert(s);
                }
            }
        }
    }

    // Parallel sweeps over random directions.
    while spent < budget {
        spent += 1;
        let dir: Vec<f64> = (0..stats.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut projs: Vec<f64> = (0..size).map(|x| stats.dot(&dir, x)).collect();
        projs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        projs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        if projs.len() < hidden_card {
            continue;
        }
        let gaps: Vec<f64> = projs.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
        // One random choice of k-1 distinct gaps per direction.
        let mut picks: Vec<usize> = (0..gaps.len()).collect();
        for i in 0..picks.len() {
            let j = rng.gen_range(i..picks.len());
            picks.swap(i, j);
        }
        let mut chosen: Vec<f64> = picks[..hidden_card - 1].iter().map(|&g| gaps[g]).collect();
        chosen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if let Ok((s, _)) = parallel_slicing(stats, hidden_card, &dir, &chosen) {
            found.entry(s.assignment.clone()).or_insert(s);
        }
        if spent >= budget {
            break;
        }
        // Random generic map.
        spent += 1;
        let map = DMatrix::from_fn(hidden_card, stats.dim(), |_, _| rng.gen_range(-1.0..1.0));
        if let Ok(s) = Slicing::from_map(stats, hidden_card, map) {
            found.entry(s.assignment.clone()).or_insert(s);
        }
    }
    found.into_values().collect()
}

/// States whose probability strictly exceeds the total probability of their
/// Hamming-distance-one neighbors.
pub fn strong_modes(p: &Distribution) -> Vec<usize> {
    let space = p.space();
    (0..space.size())
        .filter(|&x| {
            let s: f64 = space.neighbors(x).iter().map(|&y| p.prob(y)).sum();
            p.prob(x) > s
        })
        .collect()
}

/// Same set computed from a single pass of per-edge accumulation.
pub fn strong_modes_by_neighbor_sums(p: &Distribution) -> Vec<usize> {
    let space = p.space();
    let mut sums = vec![0.0f64; space.size()];
    for x in 0..space.size() {
        for y in space.neighbors(x) {
            if y > x {
                sums[x] += p.prob(y);
                sums[y] += p.prob(x);
            }
        }
    }
    (0..space.size()).filter(|&x| p.prob(x) > sums[x]).collect()
}

/// A parameter matrix realizing a prescribed strong-mode set, together with
/// the vertex-to-codeword assignment that produced it.
#[derive(Debug, Clone)]
pub struct StrongModeCertificate {
    /// Scaled parameters whose marginal has the code as strong-mode set.
    pub theta: ThetaMatrix,
    /// Unscaled feasible point of the cone program.
    pub theta_raw: ThetaMatrix,
    /// Codeword state assigned to each hidden joint state.
    pub assignment: Vec<usize>,
    /// Margin achieved by the cone program.
    pub margin: f64,
}

/// Searches for parameters with strong-mode set equal to `code`: a linear
/// map must send every hidden vertex into the cone of some codeword, cover
/// every codeword, and give all vertices the same maximal pairing value.
/// Runs `budget` random vertex-to-codeword assignments through a feasibility
/// program; absence of a certificate is not a proof of impossibility.
pub fn strong_mode_certificate(
    visible: &StateSpace,
    hidden: &StateSpace,
    code: &Code,
    budget: usize,
    seed: u64,
) -> Result<Option<StrongModeCertificate>> {
    if code.space() != visible {
        return Err(Error::SpaceMismatch);
    }
    if let Some(d) = code.min_distance() {
        if d < 2 {
            return Err(Error::InvalidCode(format!(
                "strong-mode codes need minimum distance >= 2, got {d}"
            )));
        }
    }
    let hid_size = hidden.size();
    if hid_size < code.len() {
        // Each codeword cone needs at least one hidden vertex.
        return Ok(None);
    }
    let vis_stats = build_statistics(visible);
    let hid_stats = build_statistics(hidden);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = code.words();

    for _ in 0..budget.max(1) {
        // Random surjection: a random permutation covers each codeword once,
        // the remaining vertices draw uniformly.
        let mut ys: Vec<usize> = (0..hid_size).collect();
        for i in 0..hid_size {
            let j = rng.gen_range(i..hid_size);
            ys.swap(i, j);
        }
        let mut assignment = vec![0usize; hid_size];
        for (slot, &y) in ys.iter().enumerate() {
            assignment[y] = if slot < words.len() {
                words[slot]
            } else {
                words[rng.gen_range(0..words.len())]
            };
        }
        if let Some(cert) = certificate_for_assignment(
            visible,
            hidden,
            &vis_stats,
            &hid_stats,
            code,
            &assignment,
        )? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

fn certificate_for_assignment(
    visible: &StateSpace,
    hidden: &StateSpace,
    vis_stats: &SufficientStatistics,
    hid_stats: &SufficientStatistics,
    code: &Code,
    assignment: &[usize],
) -> Result<Option<StrongModeCertificate>> {
    let dx = vis_stats.dim();
    let dy = hid_stats.dim();
    let nvars = dx * dy; // Theta[(j, i)] at index i*dy + j, as in vec(Theta)
    let coeff = |y: usize, x: usize| -> Vec<f64> {
        // <Theta^T A_y, A_x> = sum_{i,j} Theta[j][i] A_y[j] A_x[i]
        let ay = hid_stats.column_f64(y);
        let ax = vis_stats.column_f64(x);
        let mut g = vec![0.0; nvars];
        for i in 0..dx {
            if ax[i] == 0.0 {
                continue;
            }
            for j in 0..dy {
                g[i * dy + j] = ax[i] * ay[j];
            }
        }
        g
    };
    let mut strict = Vec::new();
    let mut eq = Vec::new();
    let base = coeff(0, assignment[0]);
    for y in 0..hidden.size() {
        let target = assignment[y];
        let own = coeff(y, target);
        for x in 0..visible.size() {
            if x == target {
                continue;
            }
            let other = coeff(y, x);
            strict.push(own.iter().zip(&other).map(|(a, b)| a - b).collect());
        }
        if y > 0 {
            eq.push(own.iter().zip(&base).map(|(a, b)| a - b).collect());
        }
    }
    let res = max_margin(&strict, &eq, nvars, 50.0);
    if res.margin <= 1e-6 {
        return Ok(None);
    }
    let theta_raw = ThetaMatrix::from_vectorized(dy, dx, &res.point)?;
    // Sharpen until the off-code mass is far below every tolerance.
    let scale = (DELTA_MAGNITUDE + (hidden.size() as f64).ln() + 10.0) / res.margin;
    let theta = theta_raw.scale(scale);
    let rbm = DiscreteRBM::new(visible.clone(), hidden.clone(), theta.clone())?;
    let marginal = rbm.marginal()?;
    if strong_modes(&marginal) == code.words() {
        Ok(Some(StrongModeCertificate {
            theta,
            theta_raw,
            assignment: assignment.to_vec(),
            margin: res.margin,
        }))
    } else {
        Ok(None)
    }
}

/// The classic integer configuration mapping the six vertices of the prism
/// (one ternary and one binary variable) into six distinct orthants of the
/// 4-cube's normal fan, each orthant with an even number of positive
/// coordinates.
#[derive(Debug, Clone)]
pub struct PrismOrthantEmbedding {
    /// The 4x4 integer map.
    pub map: Vec<Vec<i64>>,
    /// Prism statistics columns in display order: states (2,1), (1,1),
    /// (0,1), (2,0), (1,0), (0,0); rows constant, x2=1, x1=2, x1=1.
    pub prism: Vec<Vec<i64>>,
    /// The 4x6 image `map * prism`.
    pub image: Vec<Vec<i64>>,
    /// Display order of the prism columns as state indices.
    pub column_states: Vec<usize>,
}

/// Builds the embedding from the library's canonical statistics matrix by an
/// explicit row/column permutation, then multiplies in exact integers.
pub fn prism_orthant_embedding() -> PrismOrthantEmbedding {
    let space = StateSpace::new(vec![3, 2]).unwrap();
    let stats = build_statistics(&space);
    let column_states: Vec<usize> = [[2, 1], [1, 1], [0, 1], [2, 0], [1, 0], [0, 0]]
        .iter()
        .map(|s| space.index_of(s).unwrap())
        .collect();
    // Display rows: constant, x2=1, x1=2, x1=1.
    let row_order = [
        0,
        stats.row_index(1, 1),
        stats.row_index(0, 2),
        stats.row_index(0, 1),
    ];
    let prism: Vec<Vec<i64>> = row_order
        .iter()
        .map(|&r| {
            column_states
                .iter()
                .map(|&c| i64::from(stats.entry(r, c)))
                .collect()
        })
        .collect();
    let map: Vec<Vec<i64>> = vec![
        vec![3, -2, -2, -2],
        vec![1, 2, -2, -2],
        vec![1, -2, -2, 2],
        vec![1, -2, 2, -2],
    ];
    let image: Vec<Vec<i64>> = (0..4)
        .map(|r| {
            (0..6)
                .map(|c| (0..4).map(|k| map[r][k] * prism[k][c]).sum())
                .collect()
        })
        .collect();
    PrismOrthantEmbedding {
        map,
        prism,
        image,
        column_states,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::exp_family_distribution;

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
    fn zero_vector_in_every_cone() {
        let stats = build_statistics(&space(&[2, 2]));
        let v = vec![0.0; stats.dim()];
        for x in 0..stats.cols() {
            assert!(normal_cone_contains(&stats, x, &v, false).unwrap());
            assert!(!normal_cone_contains(&stats, x, &v, true).unwrap());
        }
    }

    #[test]
    fn vertex_direction_lies_strictly_in_its_cone() {
        let stats = build_statistics(&space(&[2, 2]));
        let n = stats.cols() as f64;
        for x in 0..stats.cols() {
            // A_x minus the mean of all columns.
            let mut v = stats.column_f64(x);
            for y in 0..stats.cols() {
                let c = stats.column_f64(y);
                for (slot, cv) in v.iter_mut().zip(&c) {
                    *slot -= cv / n;
                }
            }
            assert!(normal_cone_contains(&stats, x, &v, true).unwrap());
            // Oracle: full argmax scan.
            assert_eq!(strict_cone_of(&stats, &v), Some(x));
        }
    }

    #[test]
    fn cone_dimension_mismatch_is_an_error() {
        let stats = build_statistics(&space(&[2, 2]));
        assert!(normal_cone_contains(&stats, 0, &[1.0], false).is_err());
    }

    #[test]
    fn random_vectors_land_in_exactly_one_strict_cone() {
        let stats = build_statistics(&space(&[3, 2, 2]));
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut confirmed = 0;
        while confirmed < 1000 {
            let v: Vec<f64> = (0..stats.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let Some(x) = strict_cone_of(&stats, &v) else {
                continue; // boundary tie, measure zero: resample
            };
            let members: Vec<usize> = (0..stats.cols())
                .filter(|&y| normal_cone_contains(&stats, y, &v, true).unwrap())
                .collect();
            assert_eq!(members, vec![x]);
            confirmed += 1;
        }
    }

    #[test]
    fn zero_theta_infers_all_hidden_states() {
        let rbm = DiscreteRBM::new(space(&[2, 2]), space(&[2, 2]), ThetaMatrix::zeros(3, 3))
            .unwrap();
        for x in 0..4 {
            assert_eq!(inference_function(&rbm, x), vec![0, 1, 2, 3]);
            assert_eq!(inference_single(&rbm, x), 0);
        }
    }

    #[test]
    fn inference_agrees_with_conditional_argmax() {
        for seed in 0..10 {
            let rbm = random_rbm(&[2, 3], &[2, 2], seed);
            for x in 0..rbm.visible().size() {
                let inferred = inference_function(&rbm, x);
                let cond = rbm.conditional_hidden(x).unwrap();
                let max = cond.probs().iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let brute: Vec<usize> = (0..rbm.hidden().size())
                    .filter(|&y| (cond.prob(y) - max).abs() < 1e-12 * max.max(1.0))
                    .collect();
                assert_eq!(inferred, brute, "seed {seed} x {x}");
            }
        }
    }

    #[test]
    fn inference_matches_cone_membership() {
        for seed in 0..5 {
            let rbm = random_rbm(&[2, 2, 2], &[3], seed + 50);
            let hid_stats = rbm.hid_stats();
            for x in 0..rbm.visible().size() {
                let v = rbm.project_visible(x);
                let inferred = inference_function(&rbm, x);
                let cones: Vec<usize> = (0..rbm.hidden().size())
                    .filter(|&y| normal_cone_contains(hid_stats, y, &v, false).unwrap())
                    .collect();
                assert_eq!(inferred, cones);
            }
        }
    }

    #[test]
    fn halfspace_slicing_is_rank_one_and_realizable() {
        let stats = build_statistics(&space(&[2, 2]));
        let dir = vec![0.0, 1.0, 1.0]; // Hamming weight
        let (s, w) = parallel_slicing(&stats, 2, &dir, &[0.5]).unwrap();
        assert_eq!(s.assignment(), &[0, 1, 1, 1]);
        // Realizing map has one nonzero reduced row: rank 1.
        assert_eq!(s.map().nrows(), 2);
        assert!(s.lp_realizable(&stats));
        let iv = w.intervals();
        assert_eq!(iv.len(), 2);
        assert!(iv[0].1 <= iv[1].0 + 1e-12);
    }

    #[test]
    fn weight_slicing_of_cube_gives_hamming_spheres() {
        let stats = build_statistics(&space(&[2, 2, 2]));
        let dir = vec![0.0, 1.0, 1.0, 1.0];
        let (s, _) = parallel_slicing(&stats, 4, &dir, &[0.5, 1.5, 2.5]).unwrap();
        let sp = stats.space();
        for (x, &cell) in s.assignment().iter().enumerate() {
            let weight: usize = sp.state_of(x).iter().sum();
            assert_eq!(cell, weight);
        }
        assert!(s.lp_realizable(&stats));
    }

    #[test]
    fn state_on_hyperplane_is_reported() {
        let stats = build_statistics(&space(&[2, 2]));
        let dir = vec![0.0, 1.0, 1.0];
        let err = parallel_slicing(&stats, 2, &dir, &[1.0]).unwrap_err();
        match err {
            Error::NonGenericSlicing { state } => {
                let w: usize = state.iter().sum();
                assert_eq!(w, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn concave_line_construction_has_nonempty_intervals() {
        // Explicit strictly increasing, strictly concave r = f(b) with
        // f(b) = -exp(-b) over three breakpoints.
        let b = vec![0.0, 1.0, 2.0];
        let r: Vec<f64> = b.iter().map(|&x| -(-x as f64).exp()).collect();
        let iv = line_intervals(&r, &b);
        assert_eq!(iv.len(), 3);
        for (lo, hi) in &iv {
            assert!(lo < hi, "empty interval ({lo}, {hi})");
        }
        // A 3-cell parallel slicing of the prism realizes these intervals.
        let stats = build_statistics(&space(&[3, 2]));
        let dir = vec![0.0, 1.0, 2.0, 0.3];
        let (s, w) = parallel_slicing(&stats, 3, &dir, &[0.7, 1.9]).unwrap();
        for (lo, hi) in w.intervals() {
            assert!(lo < hi);
        }
        assert_eq!(s.cells().len(), 3);
    }

    #[test]
    fn square_has_fourteen_separable_bipartitions() {
        // All 16 cell assignments of the 4 square vertices minus the two
        // diagonal (exclusive-or) splits.
        let stats = build_statistics(&space(&[2, 2]));
        let found = enumerate_slicings(&stats, 2, 4000, 3);
        assert_eq!(found.len(), 14);
        let xor_a = vec![0, 1, 1, 0];
        let xor_b = vec![1, 0, 0, 1];
        for s in &found {
            assert_ne!(s.assignment(), xor_a.as_slice());
            assert_ne!(s.assignment(), xor_b.as_slice());
            assert!(s.lp_realizable(&stats));
        }
    }

    #[test]
    fn discrete_slicing_separates_every_vertex() {
        let stats = build_statistics(&space(&[2, 2]));
        let found = enumerate_slicings(&stats, 4, 30_000, 11);
        assert!(found
            .iter()
            .any(|s| {
                let mut cells: Vec<usize> = s.assignment().to_vec();
                cells.sort_unstable();
                cells.dedup();
                cells.len() == 4
            }));
    }

    #[test]
    fn zero_budget_returns_nothing() {
        let stats = build_statistics(&space(&[2, 2]));
        assert!(enumerate_slicings(&stats, 2, 0, 0).is_empty());
    }

    #[test]
    fn strong_modes_basics() {
        let sp = space(&[2, 2, 2]);
        let delta = Distribution::point_mass(sp.clone(), 5);
        assert_eq!(strong_modes(&delta), vec![5]);
        let uniform = Distribution::uniform(sp);
        assert!(strong_modes(&uniform).is_empty());
    }

    #[test]
    fn both_strong_mode_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sp = space(&[2, 3, 2]);
        for _ in 0..50 {
            let logs: Vec<f64> = (0..sp.size()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let p = Distribution::from_log_unnormalized(sp.clone(), &logs).unwrap();
            assert_eq!(strong_modes(&p), strong_modes_by_neighbor_sums(&p));
        }
    }

    #[test]
    fn concentrated_mixture_has_codeword_modes() {
        // Sharp products at a distance-2 code: the strong modes are exactly
        // the codewords, and there are at most k of them.
        let sp = space(&[2, 2, 2]);
        let stats = build_statistics(&sp);
        let code = [0usize, 3, 5]; // 000, 011, 101: pairwise distance 2
        let d = DELTA_MAGNITUDE;
        let mut probs = vec![0.0f64; sp.size()];
        for &w in &code {
            let state = sp.state_of(w);
            let mut param = vec![0.0; stats.dim()];
            for (i, &xi) in state.iter().enumerate() {
                param[stats.row_index(i, 1)] = if xi == 1 { d } else { -d };
            }
            let comp = exp_family_distribution(&stats, &param).unwrap();
            for (slot, &v) in probs.iter_mut().zip(comp.probs()) {
                *slot += v / code.len() as f64;
            }
        }
        let total: f64 = probs.iter().sum();
        let p = Distribution::new(sp, probs.iter().map(|v| v / total).collect()).unwrap();
        let modes = strong_modes(&p);
        assert_eq!(modes, code.to_vec());
        assert!(modes.len() <= 3);
    }

    #[test]
    fn certificate_for_antipodal_pair() {
        let vis = space(&[2, 2, 2, 2]);
        let hid = space(&[2]);
        let code = Code::from_states(vis.clone(), &[vec![0, 0, 0, 0], vec![1, 1, 1, 1]]).unwrap();
        let cert = strong_mode_certificate(&vis, &hid, &code, 50, 7)
            .unwrap()
            .expect("certificate should exist");
        let rbm = DiscreteRBM::new(vis.clone(), hid, cert.theta.clone()).unwrap();
        let modes = strong_modes(&rbm.marginal().unwrap());
        assert_eq!(modes, code.words());
        // Lemma-style necessity: some hidden vertex lands in each code cone.
        let vis_stats = build_statistics(&vis);
        for &w in code.words() {
            let hit = (0..rbm.hidden().size()).any(|y| {
                normal_cone_contains(&vis_stats, w, &rbm.project_hidden(y), false).unwrap()
            });
            assert!(hit);
        }
    }

    #[test]
    fn certificate_trivial_single_word() {
        let vis = space(&[2, 2]);
        let hid = space(&[2]);
        let code = Code::from_states(vis.clone(), &[vec![1, 0]]).unwrap();
        let cert = strong_mode_certificate(&vis, &hid, &code, 20, 1)
            .unwrap()
            .expect("constant map certificate");
        let rbm = DiscreteRBM::new(vis, hid, cert.theta).unwrap();
        assert_eq!(strong_modes(&rbm.marginal().unwrap()), code.words());
    }

    #[test]
    fn certificate_rejects_distance_one_codes() {
        let vis = space(&[2, 2]);
        let hid = space(&[2]);
        let code = Code::from_states(vis.clone(), &[vec![0, 0], vec![0, 1]]).unwrap();
        assert!(matches!(
            strong_mode_certificate(&vis, &hid, &code, 5, 1),
            Err(Error::InvalidCode(_))
        ));
    }

    #[test]
    fn certificate_needs_enough_hidden_vertices() {
        let vis = space(&[2, 2, 2]);
        let hid = space(&[2]);
        // Three codewords but only two hidden vertices.
        let code =
            Code::from_states(vis.clone(), &[vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        assert!(strong_mode_certificate(&vis, &hid, &code, 5, 1)
            .unwrap()
            .is_none());
    }

    #[test]
    fn prism_embedding_frozen_matrix() {
        let e = prism_orthant_embedding();
        assert_eq!(
            e.image,
            vec![
                vec![-1, -1, 1, 1, 1, 3],
                vec![1, 1, 3, -1, -1, 1],
                vec![-3, 1, -1, -1, 3, 1],
                vec![1, -3, -1, 3, -1, 1],
            ]
        );
        // Six distinct sign patterns, each with an even number of positives.
        let mut patterns = Vec::new();
        for c in 0..6 {
            let pattern: Vec<bool> = (0..4).map(|r| e.image[r][c] > 0).collect();
            assert_eq!(pattern.iter().filter(|&&b| b).count() % 2, 0);
            patterns.push(pattern);
        }
        patterns.sort();
        patterns.dedup();
        assert_eq!(patterns.len(), 6);
    }

    #[test]
    fn prism_embedding_matches_cone_machinery() {
        // Embed the 4x4 map as a 5x4 Theta with zero constant row; the
        // orthant of each image is the binary hidden state read off the
        // sign pattern, confirmed by strict cone membership.
        let e = prism_orthant_embedding();
        let vis = space(&[3, 2]);
        let hid = space(&[2, 2, 2, 2]);
        let mut rows = vec![vec![0.0; 4]];
        // The display rows of the prism matrix are (const, x2=1, x1=2, x1=1)
        // while the canonical statistic order is (const, x1=1, x1=2, x2=1):
        // reorder map columns to act on canonical coordinates.
        let col_of_display = [0usize, 3, 2, 1];
        for r in 0..4 {
            let mut row = vec![0.0; 4];
            for (disp, &canon) in col_of_display.iter().enumerate() {
                row[canon] = e.map[r][disp] as f64;
            }
            rows.push(row);
        }
        let theta = ThetaMatrix::from_rows(&rows).unwrap();
        let rbm = DiscreteRBM::new(vis.clone(), hid.clone(), theta).unwrap();
        let hid_stats = rbm.hid_stats();
        let mut seen = Vec::new();
        for (c, &state_idx) in e.column_states.iter().enumerate() {
            let v = rbm.project_visible(state_idx);
            let expected_hidden: Vec<usize> =
                (0..4).map(|r| usize::from(e.image[r][c] > 0)).collect();
            let y = hid.index_of(&expected_hidden).unwrap();
            assert!(normal_cone_contains(hid_stats, y, &v, true).unwrap());
            assert_eq!(inference_function(&rbm, state_idx), vec![y]);
            seen.push(y);
        }
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }
}
