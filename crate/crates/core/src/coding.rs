//! Hamming-metric code quantities: maximal code sizes, covering numbers,
//! Gilbert-Varshamov bounds, Hamming codes, and ball packings.
//!
//! Exact searches are branch-and-bound and are the source of truth at desk
//! scale; closed forms serve as fast paths and cross-checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::int_rank;
use crate::statespace::{build_statistics, StateSpace};

/// Largest space size for which the exact searches run; beyond this the
/// bounds fall back to closed forms flagged as non-exact.
const SEARCH_LIMIT: usize = 1 << 12;
/// Largest space size for which code attributes are computed exhaustively.
const ATTRIBUTE_LIMIT: usize = 1 << 22;

/// A subset of a state space with its Hamming-metric attributes.
#[derive(Debug, Clone)]
pub struct Code {
    space: StateSpace,
    words: Vec<usize>,
    min_distance: Option<usize>,
    covering_radius: usize,
}

impl Code {
    /// Builds a code from state indices; attributes are computed eagerly.
    pub fn new(space: StateSpace, mut words: Vec<usize>) -> Result<Self> {
        words.sort_unstable();
        words.dedup();
        if words.is_empty() {
            return Err(Error::InvalidCode("empty code".into()));
        }
        if *words.last().unwrap() >= space.size() {
            return Err(Error::InvalidCode("word outside the space".into()));
        }
        if space.size() > ATTRIBUTE_LIMIT {
            return Err(Error::InstanceTooLarge {
                size: space.size() as u128,
                cap: ATTRIBUTE_LIMIT as u128,
            });
        }
        let min_distance = min_pairwise_distance(&space, &words);
        let covering_radius = covering_radius(&space, &words);
        Ok(Self {
            space,
            words,
            min_distance,
            covering_radius,
        })
    }

    pub fn from_states(space: StateSpace, states: &[Vec<usize>]) -> Result<Self> {
        let words = states
            .iter()
            .map(|s| space.index_of(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, words)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn words(&self) -> &[usize] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Minimum pairwise Hamming distance; `None` for a single word.
    pub fn min_distance(&self) -> Option<usize> {
        self.min_distance
    }

    pub fn covering_radius(&self) -> usize {
        self.covering_radius
    }

    /// A code is perfect for radius `r` when the balls of radius `r` around
    /// its words tile the space exactly.
    pub fn is_perfect(&self, radius: usize) -> bool {
        let ball: u128 = ball_volume(&self.space, radius);
        self.words.len() as u128 * ball == self.space.size() as u128
            && self.covering_radius == radius
    }

    pub fn to_file(&self) -> CodeFile {
        CodeFile {
            space: self.space.cards().to_vec(),
            words: self.words.iter().map(|&w| self.space.state_of(w)).collect(),
            min_distance: self.min_distance,
            covering_radius: self.covering_radius,
        }
    }

    pub fn from_file(file: &CodeFile) -> Result<Self> {
        let space = StateSpace::new(file.space.clone())?;
        Self::from_states(space, &file.words)
    }
}

/// JSON form of a code: word list plus attribute block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFile {
    pub space: Vec<usize>,
    pub words: Vec<Vec<usize>>,
    pub min_distance: Option<usize>,
    pub covering_radius: usize,
}

fn min_pairwise_distance(space: &StateSpace, words: &[usize]) -> Option<usize> {
    let states: Vec<Vec<usize>> = words.iter().map(|&w| space.state_of(w)).collect();
    let mut best: Option<usize> = None;
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            let d = states[a]
                .iter()
                .zip(&states[b])
                .filter(|(x, y)| x != y)
                .count();
            best = Some(best.map_or(d, |m| m.min(d)));
            if best == Some(1) {
                return best;
            }
        }
    }
    best
}

/// Max over all states of the distance to the nearest word, via multi-source
/// breadth-first search on the Hamming graph.
fn covering_radius(space: &StateSpace, words: &[usize]) -> usize {
    let mut dist = vec![usize::MAX; space.size()];
    let mut frontier: Vec<usize> = words.to_vec();
    for &w in words {
        dist[w] = 0;
    }
    let mut level = 0usize;
    let mut radius = 0usize;
    while !frontier.is_empty() {
        radius = level;
        level += 1;
        let mut next = Vec::new();
        for &s in &frontier {
            for nb in space.neighbors(s) {
                if dist[nb] == usize::MAX {
                    dist[nb] = level;
                    next.push(nb);
                }
            }
        }
        frontier = next;
    }
    radius
}

/// Number of states within Hamming distance `radius` of any fixed center.
pub fn ball_volume(space: &StateSpace, radius: usize) -> u128 {
    let n = space.n();
    let r = radius.min(n);
    let mut dp = vec![0u128; r + 1];
    dp[0] = 1;
    for i in 0..n {
        let choices = (space.cards()[i] - 1) as u128;
        for d in (1..=r).rev() {
            dp[d] += dp[d - 1] * choices;
        }
    }
    dp.iter().sum()
}

/// State indices within distance `radius` of `center`.
pub fn ball(space: &StateSpace, center: usize, radius: usize) -> Vec<usize> {
    let c = space.state_of(center);
    (0..space.size())
        .filter(|&x| space.hamming(&space.state_of(x), &c).unwrap() <= radius)
        .collect()
}

/// Result of a bound computation: the value and whether it is exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: usize,
    pub exact: bool,
    /// Witness code (for packings) or cover (for coverings), as state indices.
    pub witness: Vec<usize>,
}

/// Maximal cardinality of a subset of the space with minimum pairwise
/// Hamming distance at least `d`.
///
/// Exact branch-and-bound for `|X| <= 4096`; beyond that, closed forms
/// (`d = 1`, `d = 2`, `d > n`) or a greedy lower bound flagged non-exact.
pub fn max_code_size(space: &StateSpace, d: usize) -> BoundResult {
    let size = space.size();
    if d <= 1 {
        return BoundResult {
            value: size,
            exact: true,
            witness: (0..size).collect(),
        };
    }
    if d > space.n() {
        return BoundResult {
            value: 1,
            exact: true,
            witness: vec![0],
        };
    }
    if size <= SEARCH_LIMIT {
        let (value, witness) = max_code_search(space, d);
        return BoundResult {
            value,
            exact: true,
            witness,
        };
    }
    if d == 2 {
        // Single generalized parity check: fixing the largest coordinate to
        // the sum of the others modulo its cardinality attains the
        // projection bound |X| / max_i r_i.
        let rmax = *space.cards().iter().max().unwrap();
        return BoundResult {
            value: size / rmax,
            exact: true,
            witness: parity_code(space),
        };
    }
    let witness = greedy_code(space, d);
    BoundResult {
        value: witness.len(),
        exact: false,
        witness,
    }
}

fn parity_code(space: &StateSpace) -> Vec<usize> {
    let imax = (0..space.n()).max_by_key(|&i| space.cards()[i]).unwrap();
    let rmax = space.cards()[imax];
    space
        .states()
        .filter(|s| {
            let sum: usize = s
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != imax)
                .map(|(_, &v)| v)
                .sum();
            s[imax] == sum % rmax
        })
        .map(|s| space.index_of(&s).unwrap())
        .collect()
}

fn greedy_code(space: &StateSpace, d: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_states: Vec<Vec<usize>> = Vec::new();
    for x in 0..space.size() {
        let s = space.state_of(x);
        if chosen_states
            .iter()
            .all(|c| c.iter().zip(&s).filter(|(a, b)| a != b).count() >= d)
        {
            chosen.push(x);
            chosen_states.push(s);
        }
    }
    chosen
}

/// Exact maximum via branch-and-bound on the conflict graph. Translation
/// symmetry lets us assume the all-zeros word is in an optimal code.
fn max_code_search(space: &StateSpace, d: usize) -> (usize, Vec<usize>) {
    let size = space.size();
    let states: Vec<Vec<usize>> = space.states().collect();
    let compatible = |a: usize, b: usize| {
        states[a]
            .iter()
            .zip(&states[b])
            .filter(|(x, y)| x != y)
            .count()
            >= d
    };
    let mut best: Vec<usize> = greedy_code(space, d);

    fn extend(
        current: &mut Vec<usize>,
        candidates: &[usize],
        best: &mut Vec<usize>,
        compatible: &dyn Fn(usize, usize) -> bool,
    ) {
        if current.len() + candidates.len() <= best.len() {
            return;
        }
        if candidates.is_empty() {
            if current.len() > best.len() {
                *best = current.clone();
            }
            return;
        }
        let v = candidates[0];
        // Include v.
        current.push(v);
        let filtered: Vec<usize> = candidates[1..]
            .iter()
            .copied()
            .filter(|&u| compatible(u, v))
            .collect();
        extend(current, &filtered, best, compatible);
        current.pop();
        // Exclude v.
        extend(current, &candidates[1..], best, compatible);
    }

    let mut current = vec![0usize];
    let candidates: Vec<usize> = (1..size).filter(|&x| compatible(x, 0)).collect();
    extend(&mut current, &candidates, &mut best, &compatible);
    best.sort_unstable();
    (best.len(), best)
}

/// Gilbert-Varshamov lower bound on the maximal `q`-ary code size of length
/// `n` and minimum distance `d`; uses the prime-power refinement when it
/// applies and returns the larger of the two bounds.
pub fn gilbert_varshamov(q: u64, n: u32, d: u32) -> u128 {
    assert!(q >= 2 && d >= 1 && d <= n);
    let qn = (q as u128).pow(n);
    let mut vol: u128 = 0;
    for j in 0..d {
        vol += binomial(n, j) * (q as u128 - 1).pow(j);
    }
    let sphere_bound = qn.div_ceil(vol);
    let mut best = sphere_bound;
    if is_prime_power(q).is_some() {
        let mut vol2: u128 = 0;
        for j in 0..d.saturating_sub(1) {
            vol2 += binomial(n - 1, j) * (q as u128 - 1).pow(j);
        }
        // Largest k with q^k < q^n / vol2.
        let mut k = 0u32;
        let mut power: u128 = 1;
        while (k as usize) < n as usize {
            let next = power * q as u128;
            if next * vol2 < qn {
                power = next;
                k += 1;
            } else {
                break;
            }
        }
        best = best.max((q as u128).pow(k));
    }
    best
}

fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

/// Splits a prime power into `(p, e)`.
pub fn is_prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 0u64;
    let rest = q;
    for cand in 2..=q {
        if rest % cand == 0 {
            p = cand;
            break;
        }
    }
    let mut rest = q;
    let mut e = 0u32;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    if rest == 1 {
        Some((p, e))
    } else {
        None
    }
}

/// Finite-field arithmetic tables for prime powers up to 9.
struct Gf {
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
}

impl Gf {
    fn new(q: u64) -> Result<Self> {
        let (p, e) = is_prime_power(q).ok_or(Error::UnsupportedField(q))?;
        if q > 9 {
            return Err(Error::UnsupportedField(q));
        }
        // Irreducible polynomials (coefficients constant-first) for the
        // non-prime cases in range.
        let irreducible: Vec<u64> = match (p, e) {
            (_, 1) => vec![],
            (2, 2) => vec![1, 1, 1],    // x^2 + x + 1
            (2, 3) => vec![1, 1, 0, 1], // x^3 + x + 1
            (3, 2) => vec![1, 0, 1],    // x^2 + 1
            _ => return Err(Error::UnsupportedField(q)),
        };
        let q = q as usize;
        let digits = |a: usize| -> Vec<u64> {
            let mut a = a as u64;
            let mut out = vec![0u64; e as usize];
            for slot in out.iter_mut() {
                *slot = a % p;
                a /= p;
            }
            out
        };
        let undigits =
            |d: &[u64]| -> usize { d.iter().rev().fold(0u64, |acc, &v| acc * p + v) as usize };
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                let (da, db) = (digits(a), digits(b));
                let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = undigits(&sum) as u8;
                // Polynomial product reduced by the irreducible polynomial.
                let mut prod = vec![0u64; 2 * e as usize];
                for (i, &x) in da.iter().enumerate() {
                    for (j, &y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                if e > 1 {
                    for i in (e as usize..prod.len()).rev() {
                        let c = prod[i];
                        if c == 0 {
                            continue;
                        }
                        prod[i] = 0;
                        // x^i = x^(i-e) * x^e with x^e = -(low part).
                        for (k, &coef) in irreducible[..e as usize].iter().enumerate() {
                            let sub = (c * coef) % p;
                            let idx = i - e as usize + k;
                            prod[idx] = (prod[idx] + p - sub) % p;
                        }
                    }
                }
                mul[a * q + b] = undigits(&prod[..e as usize]) as u8;
            }
        }
        Ok(Self { q, add, mul })
    }

    fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b] as usize
    }

    fn neg(&self, a: usize) -> usize {
        (0..self.q).find(|&b| self.add(a, b) == 0).unwrap()
    }
}

/// The `q`-ary Hamming code of redundancy `r`: length `(q^r - 1)/(q - 1)`,
/// `q^(n-r)` words, minimum distance 3, covering radius 1.
pub fn hamming_code(q: u64, r: u32) -> Result<Code> {
    if r < 2 {
        return Err(Error::InvalidInput("hamming_code needs r >= 2".into()));
    }
    let gf = Gf::new(q)?;
    let qz = q as usize;
    let n = ((q as u128).pow(r) - 1) / (q as u128 - 1);
    let n = usize::try_from(n).map_err(|_| Error::InvalidInput("length overflow".into()))?;
    // Columns of the parity-check matrix: one representative per projective
    // point (first nonzero entry 1), unit vectors placed last so the
    // information symbols sit in the leading positions.
    let mut non_unit: Vec<Vec<usize>> = Vec::new();
    let mut units: Vec<Vec<usize>> = Vec::new();
    for raw in 1..qz.pow(r) {
        let mut v = Vec::with_capacity(r as usize);
        let mut a = raw;
        for _ in 0..r {
            v.push(a % qz);
            a /= qz;
        }
        let first = v.iter().find(|&&x| x != 0).copied().unwrap();
        if first != 1 {
            continue;
        }
        if v.iter().filter(|&&x| x != 0).count() == 1 {
            units.push(v);
        } else {
            non_unit.push(v);
        }
    }
    units.sort_unstable_by_key(|v| v.iter().position(|&x| x != 0).unwrap());
    let mut columns = non_unit;
    let k = columns.len();
    debug_assert_eq!(k + units.len(), n);
    columns.extend(units);

    let space = StateSpace::new(vec![qz; n])?;
    if space.size() > ATTRIBUTE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: space.size() as u128,
            cap: ATTRIBUTE_LIMIT as u128,
        });
    }
    // Codewords (u, v) with v = -P u, P the non-unit columns.
    let mut words = Vec::with_capacity(qz.pow((n - r as usize) as u32));
    let mut u = vec![0usize; k];
    loop {
        let mut word = u.clone();
        for row in 0..r as usize {
            let mut acc = 0usize;
            for (col, &uc) in u.iter().enumerate() {
                acc = gf.add(acc, gf.mul(columns[col][row], uc));
            }
            word.push(gf.neg(acc));
        }
        words.push(space.index_of(&word)?);
        // Next information vector.
        let mut pos = 0;
        while pos < k {
            u[pos] += 1;
            if u[pos] < qz {
                break;
            }
            u[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }
    Code::new(space, words)
}

/// Exact minimal size of a subset with covering radius at most `radius`.
pub fn min_covering_size(space: &StateSpace, radius: usize) -> BoundResult {
    let size = space.size();
    if radius >= space.n() {
        return BoundResult {
            value: 1,
            exact: true,
            witness: vec![0],
        };
    }
    if size > SEARCH_LIMIT {
        let witness = greedy_cover(space, radius);
        return BoundResult {
            value: witness.len(),
            exact: false,
            witness,
        };
    }
    let balls: Vec<Vec<usize>> = (0..size).map(|c| ball(space, c, radius)).collect();
    let max_ball = balls.iter().map(Vec::len).max().unwrap();
    let mut best = greedy_cover(space, radius);

    // Depth-first set cover: branch on the centers able to cover the first
    // uncovered state, with a volume lower bound.
    fn dfs(
        chosen: &mut Vec<usize>,
        covered: &mut [u32],
        uncovered: usize,
        balls: &[Vec<usize>],
        max_ball: usize,
        best: &mut Vec<usize>,
    ) {
        if uncovered == 0 {
            if chosen.len() < best.len() {
                *best = chosen.clone();
            }
            return;
        }
        let lb = chosen.len() + uncovered.div_ceil(max_ball);
        if lb >= best.len() {
            return;
        }
        let first = covered.iter().position(|&c| c == 0).unwrap();
        for &center in &balls[first] {
            chosen.push(center);
            let mut newly = 0usize;
            for &s in &balls[center] {
                if covered[s] == 0 {
                    newly += 1;
                }
                covered[s] += 1;
            }
            dfs(chosen, covered, uncovered - newly, balls, max_ball, best);
            for &s in &balls[center] {
                covered[s] -= 1;
            }
            chosen.pop();
        }
    }

    let mut covered = vec![0u32; size];
    let mut chosen = Vec::new();
    dfs(&mut chosen, &mut covered, size, &balls, max_ball, &mut best);
    best.sort_unstable();
    BoundResult {
        value: best.len(),
        exact: true,
        witness: best,
    }
}

fn greedy_cover(space: &StateSpace, radius: usize) -> Vec<usize> {
    let size = space.size();
    let mut covered = vec![false; size];
    let mut chosen = Vec::new();
    let mut remaining = size;
    while remaining > 0 {
        let mut best_center = 0;
        let mut best_gain = 0;
        for c in 0..size {
            let gain = ball(space, c, radius)
                .iter()
                .filter(|&&s| !covered[s])
                .count();
            if gain > best_gain {
                best_gain = gain;
                best_center = c;
            }
        }
        chosen.push(best_center);
        for s in ball(space, best_center, radius) {
            if !covered[s] {
                covered[s] = true;
                remaining -= 1;
            }
        }
    }
    chosen
}

/// A found ball packing together with the rank of the uncovered complement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Packing {
    pub centers: Vec<usize>,
    pub radii: Vec<usize>,
    /// Whether the `A`-columns of the states outside every ball have full
    /// rank `d_X`.
    pub complement_full_rank: bool,
}

/// Searches for pairwise disjoint Hamming balls with the given radii.
/// `require_full_rank` restricts the search to packings whose uncovered
/// complement has full statistic rank.
pub fn ball_packing_with(
    space: &StateSpace,
    radii: &[usize],
    require_full_rank: bool,
) -> Option<Packing> {
    let size = space.size();
    let total: u128 = radii.iter().map(|&r| ball_volume(space, r)).sum();
    if radii.is_empty() || total > size as u128 {
        return None;
    }
    let stats = build_statistics(space);
    let full = stats.dim();
    let complement_rank = |balls: &[Vec<usize>]| -> bool {
        let mut in_ball = vec![false; size];
        for b in balls {
            for &s in b {
                in_ball[s] = true;
            }
        }
        let cols: Vec<Vec<i64>> = (0..size)
            .filter(|&s| !in_ball[s])
            .map(|s| stats.column_i64(s))
            .collect();
        int_rank(&cols) == full
    };

    fn dfs(
        idx: usize,
        centers: &mut Vec<usize>,
        balls: &mut Vec<Vec<usize>>,
        space: &StateSpace,
        radii: &[usize],
        require: bool,
        check: &dyn Fn(&[Vec<usize>]) -> bool,
    ) -> bool {
        if idx == radii.len() {
            return !require || check(balls);
        }
        for c in 0..space.size() {
            // Fixed center order for equal radii avoids permuted repeats.
            if idx > 0 && radii[idx] == radii[idx - 1] && c <= centers[idx - 1] {
                continue;
            }
            let cs = space.state_of(c);
            let ok = centers.iter().enumerate().all(|(k, &prev)| {
                space.hamming(&space.state_of(prev), &cs).unwrap() > radii[k] + radii[idx]
            });
            if !ok {
                continue;
            }
            centers.push(c);
            balls.push(ball(space, c, radii[idx]));
            if dfs(idx + 1, centers, balls, space, radii, require, check) {
                return true;
            }
            centers.pop();
            balls.pop();
        }
        false
    }

    let mut centers = Vec::new();
    let mut balls = Vec::new();
    if dfs(
        0,
        &mut centers,
        &mut balls,
        space,
        radii,
        require_full_rank,
        &complement_rank,
    ) {
        let ok = complement_rank(&balls);
        Some(Packing {
            centers,
            radii: radii.to_vec(),
            complement_full_rank: ok,
        })
    } else {
        None
    }
}

/// Searches for any packing and reports the complement-rank condition.
pub fn ball_packing(space: &StateSpace, radii: &[usize]) -> Option<Packing> {
    ball_packing_with(space, radii, false)
}
