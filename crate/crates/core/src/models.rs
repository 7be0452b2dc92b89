//! Exponential families, mixtures of products, and the discrete RBM with its
//! exact marginal and conditional inference.
//!
//! The parameter matrix `Theta` (d_Y x d_X) is the single source of truth.
//! Its column-by-column vectorization is the natural parameter of the joint
//! exponential family with statistics `A_X (x) A_Y`; the pairing factors as
//! `<theta, A_{(x,y)}> = <Theta A_x, A_y> = <Theta^T A_y, A_x>`. The binary
//! `(W, B, C)` weights and the positive edge parameters `gamma` of the
//! monomial parametrization are converters, not stored state.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{kahan_sum, log_sum_exp};
use crate::statespace::{
    build_statistics, joint_statistics, JointStatistics, StateSpace, SufficientStatistics,
    EXACT_ENUMERATION_CAP,
};

/// Tolerance for identities that hold exactly up to floating-point rounding.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for values produced by iterative optimization.
pub const OPT_TOL: f64 = 1e-6;
/// Parameter magnitude standing in for "arbitrarily sharp": `exp(-40)` is
/// far below every tolerance in use.
pub const DELTA_MAGNITUDE: f64 = 40.0;

/// A probability distribution over the joint states of a [`StateSpace`].
#[derive(Debug, Clone)]
pub struct Distribution {
    space: StateSpace,
    probs: Vec<f64>,
}

impl Distribution {
    /// Wraps an explicit probability vector, checking nonnegativity and
    /// normalization to 1e-12.
    pub fn new(space: StateSpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.size() {
            return Err(Error::DimensionMismatch {
                expected: space.size(),
                got: probs.len(),
            });
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput("negative or non-finite probability".into()));
        }
        let sum = kahan_sum(probs.iter().copied());
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { space, probs })
    }

    /// Normalizes unnormalized log-masses with a single log-sum-exp pass.
    pub fn from_log_unnormalized(space: StateSpace, logs: &[f64]) -> Result<Self> {
        if logs.len() != space.size() {
            return Err(Error::DimensionMismatch {
                expected: space.size(),
                got: logs.len(),
            });
        }
        let z = log_sum_exp(logs);
        if !z.is_finite() {
            return Err(Error::InvalidInput("all masses vanish".into()));
        }
        let mut probs: Vec<f64> = logs.iter().map(|&l| (l - z).exp()).collect();
        // One compensated renormalization keeps the sum at 1 +- eps
        // independently of the state count.
        let s = kahan_sum(probs.iter().copied());
        for p in &mut probs {
            *p /= s;
        }
        Ok(Self { space, probs })
    }

    pub fn uniform(space: StateSpace) -> Self {
        let n = space.size();
        Self {
            space,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(space: StateSpace, idx: usize) -> Self {
        let mut probs = vec![0.0; space.size()];
        probs[idx] = 1.0;
        Self { space, probs }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&i| self.probs[i] > 0.0).collect()
    }

    /// Half the l1 distance.
    pub fn total_variation(&self, other: &Distribution) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// Marginalizes a joint distribution over `X x Y` (index `x*|Y| + y`)
    /// down to `X`.
    pub fn marginalize_onto_first(&self, vis: &StateSpace) -> Result<Distribution> {
        let block = self.space.size() / vis.size();
        if block * vis.size() != self.space.size() {
            return Err(Error::SpaceMismatch);
        }
        let probs: Vec<f64> = (0..vis.size())
            .map(|x| kahan_sum(self.probs[x * block..(x + 1) * block].iter().copied()))
            .collect();
        Distribution::new(vis.clone(), probs)
    }

    /// Writes `state,probability` CSV rows.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "state,probability")?;
        for (i, p) in self.probs.iter().enumerate() {
            writeln!(w, "{},{}", self.space.label(i), p)?;
        }
        Ok(())
    }
}

/// Renormalized entrywise product of two distributions on the same space.
pub fn hadamard_product(p: &Distribution, q: &Distribution) -> Result<Distribution> {
    if p.space != q.space {
        return Err(Error::SpaceMismatch);
    }
    let raw: Vec<f64> = p.probs.iter().zip(&q.probs).map(|(a, b)| a * b).collect();
    let z = kahan_sum(raw.iter().copied());
    if z <= 0.0 {
        return Err(Error::DisjointSupports);
    }
    Distribution::new(p.space.clone(), raw.iter().map(|v| v / z).collect())
}

/// The product distribution `p(x) ~ exp(<param, A_x>)` of the independence
/// model with statistics `stats`.
pub fn exp_family_distribution(
    stats: &SufficientStatistics,
    param: &[f64],
) -> Result<Distribution> {
    if param.len() != stats.dim() {
        return Err(Error::DimensionMismatch {
            expected: stats.dim(),
            got: param.len(),
        });
    }
    if param.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteParameter);
    }
    let logs: Vec<f64> = (0..stats.cols()).map(|x| stats.dot(param, x)).collect();
    Distribution::from_log_unnormalized(stats.space().clone(), &logs)
}

/// The `d_Y x d_X` parameter matrix of a discrete RBM.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    entries: DMatrix<f64>,
}

impl ThetaMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteParameter);
        }
        Ok(Self { entries })
    }

    pub fn zeros(dy: usize, dx: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dy, dx),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dy = rows.len();
        let dx = rows.first().map_or(0, Vec::len);
        if dy == 0 || dx == 0 || rows.iter().any(|r| r.len() != dx) {
            return Err(Error::InvalidInput("ragged or empty theta".into()));
        }
        Self::new(DMatrix::from_fn(dy, dx, |r, c| rows[r][c]))
    }

    pub fn random_normal<R: Rng>(dy: usize, dx: usize, rng: &mut R) -> Self {
        Self {
            entries: DMatrix::from_fn(dy, dx, |_, _| rng.sample(StandardNormal)),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dy(&self) -> usize {
        self.entries.nrows()
    }

    pub fn dx(&self) -> usize {
        self.entries.ncols()
    }

    /// Column-by-column vectorization; index `(i, j) -> i*d_Y + j`.
    pub fn vectorize(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dy() * self.dx());
        for i in 0..self.dx() {
            for j in 0..self.dy() {
                v.push(self.entries[(j, i)]);
            }
        }
        v
    }

    /// Inverse of [`vectorize`](Self::vectorize).
    pub fn from_vectorized(dy: usize, dx: usize, theta: &[f64]) -> Result<Self> {
        if theta.len() != dy * dx {
            return Err(Error::DimensionMismatch {
                expected: dy * dx,
                got: theta.len(),
            });
        }
        Self::new(DMatrix::from_fn(dy, dx, |j, i| theta[i * dy + j]))
    }

    /// Embeds binary RBM weights: interactions `w` (m x n), visible bias `b`,
    /// hidden bias `c`, as the block matrix `[[0, b^T], [c, w]]`.
    pub fn from_binary_weights(w: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<Self> {
        let m = w.len();
        let n = b.len();
        if c.len() != m || w.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("inconsistent binary weight shapes".into()));
        }
        let mut rows = vec![vec![0.0; n + 1]; m + 1];
        rows[0][1..].copy_from_slice(b);
        for j in 0..m {
            rows[j + 1][0] = c[j];
            rows[j + 1][1..].copy_from_slice(&w[j]);
        }
        Self::from_rows(&rows)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * factor,
        }
    }
}

/// JSON model file: `{ "visible": [..], "hidden": [..], "theta": [[..], ..] }`
/// with `theta` row-major `d_Y x d_X`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub visible: Vec<usize>,
    pub hidden: Vec<usize>,
    pub theta: Vec<Vec<f64>>,
}

/// A discrete restricted Boltzmann machine: visible and hidden product state
/// spaces with full bipartite interactions.
#[derive(Debug, Clone)]
pub struct DiscreteRBM {
    visible: StateSpace,
    hidden: StateSpace,
    theta: ThetaMatrix,
    vis_stats: SufficientStatistics,
    hid_stats: SufficientStatistics,
}

impl DiscreteRBM {
    pub fn new(visible: StateSpace, hidden: StateSpace, theta: ThetaMatrix) -> Result<Self> {
        let vis_stats = build_statistics(&visible);
        let hid_stats = build_statistics(&hidden);
        if theta.dy() != hid_stats.dim() || theta.dx() != vis_stats.dim() {
            return Err(Error::DimensionMismatch {
                expected: hid_stats.dim() * vis_stats.dim(),
                got: theta.dy() * theta.dx(),
            });
        }
        Ok(Self {
            visible,
            hidden,
            theta,
            vis_stats,
            hid_stats,
        })
    }

    pub fn from_model_file(file: &ModelFile) -> Result<Self> {
        let visible = StateSpace::new(file.visible.clone())?;
        let hidden = StateSpace::new(file.hidden.clone())?;
        Self::new(visible, hidden, ThetaMatrix::from_rows(&file.theta)?)
    }

    pub fn to_model_file(&self) -> ModelFile {
        ModelFile {
            visible: self.visible.cards().to_vec(),
            hidden: self.hidden.cards().to_vec(),
            theta: (0..self.theta.dy())
                .map(|j| (0..self.theta.dx()).map(|i| self.theta.matrix()[(j, i)]).collect())
                .collect(),
        }
    }

    pub fn visible(&self) -> &StateSpace {
        &self.visible
    }

    pub fn hidden(&self) -> &StateSpace {
        &self.hidden
    }

    pub fn theta(&self) -> &ThetaMatrix {
        &self.theta
    }

    pub fn vis_stats(&self) -> &SufficientStatistics {
        &self.vis_stats
    }

    pub fn hid_stats(&self) -> &SufficientStatistics {
        &self.hid_stats
    }

    pub fn joint_stats(&self) -> Result<JointStatistics> {
        joint_statistics(&self.vis_stats, &self.hid_stats)
    }

    fn check_cap(&self) -> Result<()> {
        let size = self.visible.size() as u128 * self.hidden.size() as u128;
        if size > EXACT_ENUMERATION_CAP {
            return Err(Error::InstanceTooLarge {
                size,
                cap: EXACT_ENUMERATION_CAP,
            });
        }
        Ok(())
    }

    /// `Theta A_x`, a point in the hidden parameter space.
    pub fn project_visible(&self, x: usize) -> Vec<f64> {
        let th = self.theta.matrix();
        (0..th.nrows())
            .map(|j| {
                let row: Vec<f64> = (0..th.ncols()).map(|i| th[(j, i)]).collect();
                self.vis_stats.dot(&row, x)
            })
            .collect()
    }

    /// `Theta^T A_y`, a point in the visible parameter space.
    pub fn project_hidden(&self, y: usize) -> Vec<f64> {
        let th = self.theta.matrix();
        (0..th.ncols())
            .map(|i| {
                let col: Vec<f64> = (0..th.nrows()).map(|j| th[(j, i)]).collect();
                self.hid_stats.dot(&col, y)
            })
            .collect()
    }

    /// Per-hidden-unit score table at visible state `x`: entry `[j][w]` is the
    /// contribution of unit `j` in state `w`, with state 0 normalized to 0.
    /// Together with the shared constant `(Theta A_x)_0` these determine every
    /// conditional and marginal quantity.
    pub fn unit_scores(&self, x: usize) -> (f64, Vec<Vec<f64>>) {
        let v = self.project_visible(x);
        let mut scores = Vec::with_capacity(self.hidden.n());
        for (j, &s) in self.hidden.cards().iter().enumerate() {
            let mut unit = Vec::with_capacity(s);
            unit.push(0.0);
            for w in 1..s {
                unit.push(v[self.hid_stats.row_index(j, w)]);
            }
            scores.push(unit);
        }
        (v[0], scores)
    }

    /// Exact joint distribution on `X x Y`.
    pub fn joint(&self) -> Result<Distribution> {
        self.check_cap()?;
        let hy = self.hidden.size();
        let mut logs = Vec::with_capacity(self.visible.size() * hy);
        for x in 0..self.visible.size() {
            let v = self.project_visible(x);
            for y in 0..hy {
                logs.push(self.hid_stats.dot(&v, y));
            }
        }
        let joint_space = self.visible.product(&self.hidden)?;
        Distribution::from_log_unnormalized(joint_space, &logs)
    }

    /// Exact marginal on `X`: the joint mass summed over the hidden states,
    /// accumulated in log space.
    pub fn marginal(&self) -> Result<Distribution> {
        self.check_cap()?;
        let hy = self.hidden.size();
        let mut logs = Vec::with_capacity(self.visible.size());
        let mut row = vec![0.0; hy];
        for x in 0..self.visible.size() {
            let v = self.project_visible(x);
            for (y, slot) in row.iter_mut().enumerate() {
                *slot = self.hid_stats.dot(&v, y);
            }
            logs.push(log_sum_exp(&row));
        }
        Distribution::from_log_unnormalized(self.visible.clone(), &logs)
    }

    /// Exact marginal on `Y`.
    pub fn hidden_marginal(&self) -> Result<Distribution> {
        self.check_cap()?;
        let mut logs = Vec::with_capacity(self.hidden.size());
        let mut row = vec![0.0; self.visible.size()];
        for y in 0..self.hidden.size() {
            let v = self.project_hidden(y);
            for (x, slot) in row.iter_mut().enumerate() {
                *slot = self.vis_stats.dot(&v, x);
            }
            logs.push(log_sum_exp(&row));
        }
        Distribution::from_log_unnormalized(self.hidden.clone(), &logs)
    }

    /// Exact marginal through the monomial parametrization: a product over
    /// hidden units of bracketed sums of edge parameters.
    pub fn marginal_polynomial(&self) -> Result<Distribution> {
        HomogeneousParams::from_theta(self)?.marginal()
    }

    /// The conditional `p(.|y)` on the visible states: the product
    /// distribution with parameter `Theta^T A_y`.
    pub fn conditional_visible(&self, y: usize) -> Result<Distribution> {
        if y >= self.hidden.size() {
            return Err(Error::SpaceMismatch);
        }
        exp_family_distribution(&self.vis_stats, &self.project_hidden(y))
    }

    /// The conditional `p(.|x)` on the hidden states: the product
    /// distribution with parameter `Theta A_x`.
    pub fn conditional_hidden(&self, x: usize) -> Result<Distribution> {
        if x >= self.visible.size() {
            return Err(Error::SpaceMismatch);
        }
        exp_family_distribution(&self.hid_stats, &self.project_visible(x))
    }

    /// Per-unit conditional table `P(y_j = w | x)`, computed without
    /// enumerating the hidden space.
    pub fn unit_conditionals(&self, x: usize) -> Vec<Vec<f64>> {
        let (_, scores) = self.unit_scores(x);
        scores
            .into_iter()
            .map(|unit| {
                let z = log_sum_exp(&unit);
                unit.iter().map(|s| (s - z).exp()).collect()
            })
            .collect()
    }
}

/// Positive edge parameters `gamma_{j,i,(w,u)}` of the monomial
/// parametrization, stored as logs: index `[unit j][variable i][w][u]`.
#[derive(Debug, Clone)]
pub struct HomogeneousParams {
    visible: StateSpace,
    hidden: StateSpace,
    log_gamma: Vec<Vec<Vec<Vec<f64>>>>,
}

impl HomogeneousParams {
    /// Derives the canonical edge parameters of an RBM. The constant and
    /// single-side rows of `Theta` are split evenly over the bipartite edges,
    /// so that `sum_{j,i} log gamma_{j,i,(y_j,x_i)} = <Theta A_x, A_y>`.
    pub fn from_theta(rbm: &DiscreteRBM) -> Result<Self> {
        let th = rbm.theta().matrix();
        let n = rbm.visible().n();
        let m = rbm.hidden().n();
        let vis = rbm.vis_stats();
        let hid = rbm.hid_stats();
        let mut log_gamma = Vec::with_capacity(m);
        for (j, &s) in rbm.hidden().cards().iter().enumerate() {
            let mut per_var = Vec::with_capacity(n);
            for (i, &r) in rbm.visible().cards().iter().enumerate() {
                let mut table = vec![vec![0.0f64; r]; s];
                for (w, row) in table.iter_mut().enumerate() {
                    for (u, slot) in row.iter_mut().enumerate() {
                        let mut v = th[(0, 0)] / (n * m) as f64;
                        if u >= 1 {
                            v += th[(0, vis.row_index(i, u))] / m as f64;
                        }
                        if w >= 1 {
                            v += th[(hid.row_index(j, w), 0)] / n as f64;
                        }
                        if u >= 1 && w >= 1 {
                            v += th[(hid.row_index(j, w), vis.row_index(i, u))];
                        }
                        *slot = v;
                    }
                }
                per_var.push(table);
            }
            log_gamma.push(per_var);
        }
        Ok(Self {
            visible: rbm.visible().clone(),
            hidden: rbm.hidden().clone(),
            log_gamma,
        })
    }

    /// Wraps user-supplied positive parameters `gamma[j][i][w][u]`.
    pub fn from_gammas(
        visible: StateSpace,
        hidden: StateSpace,
        gamma: &[Vec<Vec<Vec<f64>>>],
    ) -> Result<Self> {
        if gamma.len() != hidden.n() {
            return Err(Error::InvalidInput("gamma has wrong unit count".into()));
        }
        let mut log_gamma = Vec::with_capacity(gamma.len());
        for (j, per_var) in gamma.iter().enumerate() {
            if per_var.len() != visible.n() {
                return Err(Error::InvalidInput("gamma has wrong variable count".into()));
            }
            let mut out_var = Vec::with_capacity(per_var.len());
            for (i, table) in per_var.iter().enumerate() {
                if table.len() != hidden.cards()[j]
                    || table.iter().any(|row| row.len() != visible.cards()[i])
                {
                    return Err(Error::InvalidInput("gamma table shape mismatch".into()));
                }
                let mut out = Vec::with_capacity(table.len());
                for row in table {
                    let mut lrow = Vec::with_capacity(row.len());
                    for &g in row {
                        if !(g > 0.0) || !g.is_finite() {
                            return Err(Error::NonPositiveParameter(g));
                        }
                        lrow.push(g.ln());
                    }
                    out.push(lrow);
                }
                out_var.push(out);
            }
            log_gamma.push(out_var);
        }
        Ok(Self {
            visible,
            hidden,
            log_gamma,
        })
    }

    /// The equivalent `Theta`, undoing the canonical splitting.
    pub fn to_theta(&self) -> Result<ThetaMatrix> {
        let vis = build_statistics(&self.visible);
        let hid = build_statistics(&self.hidden);
        let mut th = DMatrix::zeros(hid.dim(), vis.dim());
        let g = &self.log_gamma;
        th[(0, 0)] = (0..self.hidden.n())
            .map(|j| (0..self.visible.n()).map(|i| g[j][i][0][0]).sum::<f64>())
            .sum();
        for (i, &r) in self.visible.cards().iter().enumerate() {
            for u in 1..r {
                th[(0, vis.row_index(i, u))] = (0..self.hidden.n())
                    .map(|j| g[j][i][0][u] - g[j][i][0][0])
                    .sum();
            }
        }
        for (j, &s) in self.hidden.cards().iter().enumerate() {
            for w in 1..s {
                th[(hid.row_index(j, w), 0)] = (0..self.visible.n())
                    .map(|i| g[j][i][w][0] - g[j][i][0][0])
                    .sum();
                for (i, &r) in self.visible.cards().iter().enumerate() {
                    for u in 1..r {
                        th[(hid.row_index(j, w), vis.row_index(i, u))] =
                            g[j][i][w][u] - g[j][i][w][0] - g[j][i][0][u] + g[j][i][0][0];
                    }
                }
            }
        }
        ThetaMatrix::new(th)
    }

    /// The visible marginal: `p(v) ~ prod_j sum_{h_j} prod_i gamma_{j,i,(h_j,v_i)}`,
    /// evaluated per unit in log space. This route never touches `Theta A_x`.
    pub fn marginal(&self) -> Result<Distribution> {
        let mut logs = Vec::with_capacity(self.visible.size());
        for v in self.visible.states() {
            let mut total = 0.0;
            for (j, &s) in self.hidden.cards().iter().enumerate() {
                let bracket: Vec<f64> = (0..s)
                    .map(|h| {
                        v.iter()
                            .enumerate()
                            .map(|(i, &vi)| self.log_gamma[j][i][h][vi])
                            .sum()
                    })
                    .collect();
                total += log_sum_exp(&bracket);
            }
            logs.push(total);
        }
        Distribution::from_log_unnormalized(self.visible.clone(), &logs)
    }
}

/// A `k`-mixture of product distributions: weights on the simplex and one
/// exponential-family parameter vector per component.
#[derive(Debug, Clone)]
pub struct MixtureModelSpec {
    pub space: StateSpace,
    pub weights: Vec<f64>,
    pub components: Vec<Vec<f64>>,
}

impl MixtureModelSpec {
    pub fn new(space: StateSpace, weights: Vec<f64>, components: Vec<Vec<f64>>) -> Result<Self> {
        if weights.len() != components.len() || weights.is_empty() {
            return Err(Error::InvalidInput("component/weight count mismatch".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be nonnegative".into()));
        }
        let s = kahan_sum(weights.iter().copied());
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("weights sum to {s}")));
        }
        let d = space.stat_dim();
        if components.iter().any(|c| c.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: components.iter().map(Vec::len).find(|&l| l != d).unwrap_or(0),
            });
        }
        Ok(Self {
            space,
            weights,
            components,
        })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }
}

/// The mixture distribution `sum_i lambda_i p^{(i)}`.
pub fn mixture_distribution(spec: &MixtureModelSpec) -> Result<Distribution> {
    let stats = build_statistics(&spec.space);
    let mut probs = vec![0.0f64; spec.space.size()];
    for (w, comp) in spec.weights.iter().zip(&spec.components) {
        let p = exp_family_distribution(&stats, comp)?;
        for (slot, &v) in probs.iter_mut().zip(p.probs()) {
            *slot += w * v;
        }
    }
    let s = kahan_sum(probs.iter().copied());
    for p in &mut probs {
        *p /= s;
    }
    Distribution::new(spec.space.clone(), probs)
}

/// Realizes a mixture of products exactly as a single-hidden-unit RBM:
/// conditional components match the mixture components and the hidden
/// marginal matches the weights. Zero weights are floored at `exp(-700)`.
pub fn mixture_to_rbm(spec: &MixtureModelSpec) -> Result<DiscreteRBM> {
    let stats = build_statistics(&spec.space);
    let k = spec.k();
    if k < 2 {
        // A single component is the product distribution itself; embed it as
        // a degenerate two-state hidden unit with both conditionals equal.
        let hidden = StateSpace::new(vec![2])?;
        let dx = stats.dim();
        let mut th = DMatrix::zeros(2, dx);
        for i in 0..dx {
            th[(0, i)] = spec.components[0][i];
        }
        return DiscreteRBM::new(spec.space.clone(), hidden, ThetaMatrix::new(th)?);
    }
    let hidden = StateSpace::new(vec![k])?;
    let dx = stats.dim();
    let log_z: Vec<f64> = spec
        .components
        .iter()
        .map(|c| {
            let logs: Vec<f64> = (0..stats.cols()).map(|x| stats.dot(c, x)).collect();
            log_sum_exp(&logs)
        })
        .collect();
    let t: Vec<f64> = spec
        .weights
        .iter()
        .zip(&log_z)
        .map(|(&w, &z)| w.ln().max(-700.0) - z)
        .collect();
    // Row 0 carries component 0; row w the offset of component w.
    let mut th = DMatrix::zeros(k, dx);
    for i in 0..dx {
        th[(0, i)] = spec.components[0][i];
    }
    th[(0, 0)] += t[0];
    for w in 1..k {
        for i in 0..dx {
            th[(w, i)] = spec.components[w][i] - spec.components[0][i];
        }
        th[(w, 0)] += t[w] - t[0];
    }
    DiscreteRBM::new(spec.space.clone(), hidden, ThetaMatrix::new(th)?)
}
