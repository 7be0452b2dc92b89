//! Finite state spaces and sufficient-statistics matrices of independence models.
//!
//! A state space is a product `X = X_1 x ... x X_n` with `X_i = {0, ..., r_i - 1}`.
//! Joint states are enumerated lexicographically with variable 1 most
//! significant, so `(0,...,0)` is state 0 and `(r_1-1,...,r_n-1)` is the last.
//! The sufficient-statistics matrix has one constant row followed by the
//! indicator rows `1{x_i = y}` for `y in {1, ..., r_i - 1}`, grouped by
//! variable in increasing order.

use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Joint states of visible and hidden spaces are enumerated exactly when
/// `|X|*|Y|` stays at or below this cap; larger instances are refused.
pub const EXACT_ENUMERATION_CAP: u128 = 1 << 24;

/// An ordered list of finite variable cardinalities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSpace {
    cards: Vec<usize>,
    size: usize,
}

impl StateSpace {
    /// Builds a state space from per-variable cardinalities, each at least 2.
    pub fn new(cards: Vec<usize>) -> Result<Self> {
        if cards.is_empty() {
            return Err(Error::InvalidStateSpace("no variables".into()));
        }
        if let Some(&r) = cards.iter().find(|&&r| r < 2) {
            return Err(Error::InvalidStateSpace(format!(
                "cardinality {r} < 2"
            )));
        }
        let mut size: u128 = 1;
        for &r in &cards {
            size = size
                .checked_mul(r as u128)
                .ok_or(Error::InvalidStateSpace("size overflow".into()))?;
        }
        if size > u128::from(u32::MAX) {
            return Err(Error::InstanceTooLarge {
                size,
                cap: u128::from(u32::MAX),
            });
        }
        Ok(Self {
            cards,
            size: size as usize,
        })
    }

    pub fn n(&self) -> usize {
        self.cards.len()
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    /// Total number of joint states.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of rows of the sufficient-statistics matrix, `1 + sum (r_i - 1)`.
    pub fn stat_dim(&self) -> usize {
        1 + self.cards.iter().map(|&r| r - 1).sum::<usize>()
    }

    pub fn contains(&self, state: &[usize]) -> bool {
        state.len() == self.n() && state.iter().zip(&self.cards).all(|(&x, &r)| x < r)
    }

    /// Index of a joint state; variable 1 is most significant.
    pub fn index_of(&self, state: &[usize]) -> Result<usize> {
        if !self.contains(state) {
            return Err(Error::SpaceMismatch);
        }
        let mut idx = 0usize;
        for (&x, &r) in state.iter().zip(&self.cards) {
            idx = idx * r + x;
        }
        Ok(idx)
    }

    /// Joint state with the given index.
    pub fn state_of(&self, mut idx: usize) -> Vec<usize> {
        assert!(idx < self.size, "state index out of range");
        let mut state = vec![0usize; self.n()];
        for i in (0..self.n()).rev() {
            state[i] = idx % self.cards[i];
            idx /= self.cards[i];
        }
        state
    }

    /// Iterates all joint states in index order.
    pub fn states(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size).map(|i| self.state_of(i))
    }

    /// Hamming distance between two joint states of this space.
    pub fn hamming(&self, x: &[usize], y: &[usize]) -> Result<usize> {
        if !self.contains(x) || !self.contains(y) {
            return Err(Error::SpaceMismatch);
        }
        Ok(x.iter().zip(y).filter(|(a, b)| a != b).count())
    }

    /// Indices of the states at Hamming distance one from `idx`.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let state = self.state_of(idx);
        let mut out = Vec::with_capacity(self.cards.iter().map(|&r| r - 1).sum());
        // Stride of variable i in the mixed-radix index.
        let mut stride = 1usize;
        for i in (0..self.n()).rev() {
            let zeroed = idx - state[i] * stride;
            for v in 0..self.cards[i] {
                if v != state[i] {
                    out.push(zeroed + v * stride);
                }
            }
            stride *= self.cards[i];
        }
        out.sort_unstable();
        out
    }

    /// Concatenated space `X x Y`, whose joint index is `x * |Y| + y`.
    pub fn product(&self, other: &StateSpace) -> Result<StateSpace> {
        let mut cards = self.cards.clone();
        cards.extend_from_slice(&other.cards);
        StateSpace::new(cards)
    }

    /// Short label `x1-x2-...-xn` used in CSV headers.
    pub fn label(&self, idx: usize) -> String {
        let mut s = String::new();
        for (k, v) in self.state_of(idx).iter().enumerate() {
            if k > 0 {
                s.push('-');
            }
            let _ = write!(s, "{v}");
        }
        s
    }
}

impl Serialize for StateSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.cards.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let cards = Vec::<usize>::deserialize(deserializer)?;
        StateSpace::new(cards).map_err(serde::de::Error::custom)
    }
}

/// Label of one row of a sufficient-statistics matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowLabel {
    /// The all-ones row.
    Constant,
    /// Indicator of `x_var = state` (`var` is 0-based, `state >= 1`).
    Indicator { var: usize, state: usize },
}

impl RowLabel {
    pub fn text(&self) -> String {
        match self {
            RowLabel::Constant => "1".to_string(),
            RowLabel::Indicator { var, state } => format!("x{}={}", var + 1, state),
        }
    }
}

/// The dense 0/1 matrix of sufficient statistics of an independence model.
///
/// Row 0 is constant one; row `(i, y)` has a one in column `x` iff `x_i = y`.
#[derive(Debug, Clone)]
pub struct SufficientStatistics {
    space: StateSpace,
    labels: Vec<RowLabel>,
    /// Start of variable i's indicator rows: `1 + sum_{i' < i} (r_i' - 1)`.
    row_offsets: Vec<usize>,
    /// Row-major entries, `d x |X|`.
    data: Vec<u8>,
}

/// Builds the sufficient-statistics matrix of the independence model on `space`.
pub fn build_statistics(space: &StateSpace) -> SufficientStatistics {
    let d = space.stat_dim();
    let cols = space.size();
    let mut labels = Vec::with_capacity(d);
    labels.push(RowLabel::Constant);
    let mut row_offsets = Vec::with_capacity(space.n());
    let mut off = 1usize;
    for (i, &r) in space.cards().iter().enumerate() {
        row_offsets.push(off);
        for y in 1..r {
            labels.push(RowLabel::Indicator { var: i, state: y });
        }
        off += r - 1;
    }
    let mut data = vec![0u8; d * cols];
    data[..cols].fill(1);
    for c in 0..cols {
        let state = space.state_of(c);
        for (i, &x) in state.iter().enumerate() {
            if x >= 1 {
                data[(row_offsets[i] + x - 1) * cols + c] = 1;
            }
        }
    }
    SufficientStatistics {
        space: space.clone(),
        labels,
        row_offsets,
        data,
    }
}

impl SufficientStatistics {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    /// Number of rows `d = 1 + sum (r_i - 1)`.
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn cols(&self) -> usize {
        self.space.size()
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    pub fn entry(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.cols() + col]
    }

    /// Row index of the indicator `1{x_var = state}`, `state >= 1`.
    pub fn row_index(&self, var: usize, state: usize) -> usize {
        debug_assert!(state >= 1 && state < self.space.cards()[var]);
        self.row_offsets[var] + state - 1
    }

    /// The column `A_x` as f64.
    pub fn column_f64(&self, col: usize) -> Vec<f64> {
        (0..self.dim()).map(|r| f64::from(self.entry(r, col))).collect()
    }

    /// The column `A_x` as i64.
    pub fn column_i64(&self, col: usize) -> Vec<i64> {
        (0..self.dim()).map(|r| i64::from(self.entry(r, col))).collect()
    }

    /// `<v, A_x>` without materializing the column: the constant slot plus one
    /// indicator slot per variable in a nonzero state.
    pub fn dot(&self, v: &[f64], col: usize) -> f64 {
        debug_assert_eq!(v.len(), self.dim());
        let mut acc = v[0];
        let mut idx = col;
        for i in (0..self.space.n()).rev() {
            let r = self.space.cards()[i];
            let x = idx % r;
            idx /= r;
            if x >= 1 {
                acc += v[self.row_offsets[i] + x - 1];
            }
        }
        acc
    }

    /// Dense i64 copy, row-major, for exact rank computations.
    pub fn to_rows_i64(&self) -> Vec<Vec<i64>> {
        (0..self.dim())
            .map(|r| (0..self.cols()).map(|c| i64::from(self.entry(r, c))).collect())
            .collect()
    }

    /// Writes the matrix as CSV with a header row of column state labels.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "row")?;
        for c in 0..self.cols() {
            write!(w, ",{}", self.space.label(c))?;
        }
        writeln!(w)?;
        for r in 0..self.dim() {
            write!(w, "{}", self.labels[r].text())?;
            for c in 0..self.cols() {
                write!(w, ",{}", self.entry(r, c))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// The Kronecker product of two sufficient-statistics matrices, kept in
/// factored form; columns are indexed by joint states `(x, y) = x*|Y| + y`.
#[derive(Debug, Clone)]
pub struct JointStatistics {
    vis: SufficientStatistics,
    hid: SufficientStatistics,
}

/// Pairs two factor matrices, refusing instances above the exact cap.
pub fn joint_statistics(
    vis: &SufficientStatistics,
    hid: &SufficientStatistics,
) -> Result<JointStatistics> {
    let cols = vis.cols() as u128 * hid.cols() as u128;
    if cols > EXACT_ENUMERATION_CAP {
        return Err(Error::InstanceTooLarge {
            size: cols,
            cap: EXACT_ENUMERATION_CAP,
        });
    }
    Ok(JointStatistics {
        vis: vis.clone(),
        hid: hid.clone(),
    })
}

impl JointStatistics {
    pub fn vis(&self) -> &SufficientStatistics {
        &self.vis
    }

    pub fn hid(&self) -> &SufficientStatistics {
        &self.hid
    }

    /// Number of rows `d_X * d_Y`.
    pub fn dim(&self) -> usize {
        self.vis.dim() * self.hid.dim()
    }

    pub fn cols(&self) -> usize {
        self.vis.cols() * self.hid.cols()
    }

    /// Entry of row `(i, j)` (in `vec(Theta)` order, `i*d_Y + j`) at column `(x, y)`.
    pub fn entry(&self, row: usize, x: usize, y: usize) -> u8 {
        let dy = self.hid.dim();
        self.vis.entry(row / dy, x) * self.hid.entry(row % dy, y)
    }

    /// The `(x, y)` column `A_x (x) A_y`.
    pub fn column_f64(&self, x: usize, y: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.vis.dim() {
            let a = f64::from(self.vis.entry(i, x));
            for j in 0..self.hid.dim() {
                out.push(a * f64::from(self.hid.entry(j, y)));
            }
        }
        out
    }

    /// `<theta, A_{(x,y)}>` for a parameter vector of length `d_X * d_Y`
    /// in column-by-column `vec(Theta)` order.
    pub fn dot(&self, theta: &[f64], x: usize, y: usize) -> f64 {
        debug_assert_eq!(theta.len(), self.dim());
        let dy = self.hid.dim();
        let mut acc = 0.0;
        for i in 0..self.vis.dim() {
            if self.vis.entry(i, x) == 0 {
                continue;
            }
            let block = &theta[i * dy..(i + 1) * dy];
            for (j, t) in block.iter().enumerate() {
                if self.hid.entry(j, y) == 1 {
                    acc += t;
                }
            }
        }
        acc
    }

    /// Dense i64 copy, row-major.
    pub fn to_rows_i64(&self) -> Vec<Vec<i64>> {
        let hy = self.hid.cols();
        (0..self.dim())
            .map(|r| {
                (0..self.cols())
                    .map(|c| i64::from(self.entry(r, c / hy, c % hy)))
                    .collect()
            })
            .collect()
    }
}
