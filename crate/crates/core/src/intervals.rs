//! Random intervals, disjoint pairs and periodogram contrasts.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::wavelets::{PeriodogramMatrix, Scale};

/// Rejection-sampling budget per interval.
pub const MAX_REJECTION_DRAWS: usize = 1_000_000;

/// Closed index interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start > end {
            return Err(Error::InfeasibleConfig(format!(
                "interval start {start} after end {end}"
            )));
        }
        Ok(Interval { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: usize) -> bool {
        self.start <= k && k <= self.end
    }

    pub fn is_disjoint(&self, other: &Interval) -> bool {
        self.end < other.start || other.end < self.start
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Draws `count` intervals in `0..len` whose endpoints are uniform over all
/// pairs of distinct indices with `e - s + 1 >= min_len`.
pub fn sample_intervals(
    len: usize,
    count: usize,
    min_len: usize,
    stream: &Stream,
) -> Result<Vec<Interval>> {
    if min_len > len {
        return Err(Error::InfeasibleConfig(format!(
            "minimum interval length {min_len} exceeds series length {len}"
        )));
    }
    if min_len < 2 {
        return Err(Error::InfeasibleConfig(format!(
            "minimum interval length must be at least 2, got {min_len}"
        )));
    }
    if count < 2 {
        return Err(Error::InfeasibleConfig(format!(
            "need at least two intervals, got {count}"
        )));
    }
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut accepted = None;
        for _ in 0..MAX_REJECTION_DRAWS {
            let a = rng.random_range(0..len);
            let mut b = rng.random_range(0..len - 1);
            if b >= a {
                b += 1;
            }
            let (s, e) = if a < b { (a, b) } else { (b, a) };
            if e - s + 1 >= min_len {
                accepted = Some(Interval { start: s, end: e });
                break;
            }
        }
        out.push(accepted.ok_or(Error::SamplingFailure(MAX_REJECTION_DRAWS))?);
    }
    Ok(out)
}

/// Sampled intervals plus every index pair `(p, q)`, `p < q`, of disjoint
/// members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalPairSet {
    pub intervals: Vec<Interval>,
    pub pairs: Vec<(usize, usize)>,
}

impl IntervalPairSet {
    /// Number of disjoint pairs `D`.
    pub fn count(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, index: usize) -> (Interval, Interval) {
        let (p, q) = self.pairs[index];
        (self.intervals[p], self.intervals[q])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Interval, Interval)> + '_ {
        self.pairs
            .iter()
            .map(|&(p, q)| (self.intervals[p], self.intervals[q]))
    }
}

pub fn disjoint_pairs(intervals: Vec<Interval>) -> Result<IntervalPairSet> {
    if intervals.len() < 2 {
        return Err(Error::InfeasibleConfig(format!(
            "need at least two intervals, got {}",
            intervals.len()
        )));
    }
    let mut pairs = Vec::new();
    for p in 0..intervals.len() {
        for q in p + 1..intervals.len() {
            if intervals[p].is_disjoint(&intervals[q]) {
                pairs.push((p, q));
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoDisjointPairs);
    }
    Ok(IntervalPairSet { intervals, pairs })
}

/// Zero-sum, unit-norm step vector realising a contrast as an inner product:
/// `+w/n_p` on `L_p`, `-w/n_q` on `L_q`, with `w = sqrt(n_p n_q / (n_p + n_q))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastVector {
    pub first: Interval,
    pub second: Interval,
    pub len: usize,
    pub positive: f64,
    pub negative: f64,
}

impl ContrastVector {
    pub fn weight(&self, k: usize) -> f64 {
        if self.first.contains(k) {
            self.positive
        } else if self.second.contains(k) {
            self.negative
        } else {
            0.0
        }
    }

    pub fn dense(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.weight(k)).collect()
    }

    /// Non-zero entries in index order of the two intervals.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let p = (self.first.start..=self.first.end).map(move |k| (k, self.positive));
        let q = (self.second.start..=self.second.end).map(move |k| (k, self.negative));
        p.chain(q)
    }
}

fn check_pair(first: &Interval, second: &Interval, len: usize) -> Result<()> {
    for iv in [first, second] {
        if iv.end >= len {
            return Err(Error::IndexOutOfRange { index: iv.end, len });
        }
    }
    if !first.is_disjoint(second) {
        return Err(Error::InvalidPair(
            first.start,
            first.end,
            second.start,
            second.end,
        ));
    }
    Ok(())
}

fn pair_factor(n_p: usize, n_q: usize) -> f64 {
    let (a, b) = (n_p as f64, n_q as f64);
    (a * b / (a + b)).sqrt()
}

pub fn contrast_weights(first: Interval, second: Interval, len: usize) -> Result<ContrastVector> {
    check_pair(&first, &second, len)?;
    let w = pair_factor(first.len(), second.len());
    Ok(ContrastVector {
        first,
        second,
        len,
        positive: w / first.len() as f64,
        negative: -w / second.len() as f64,
    })
}

/// Running sums `S[k] = x[0] + ... + x[k-1]` of one periodogram row.
#[derive(Debug, Clone, Default)]
pub struct PrefixSums {
    sums: Vec<f64>,
}

impl PrefixSums {
    pub fn new(row: &[f64]) -> Self {
        let mut p = PrefixSums::default();
        p.refill(row);
        p
    }

    pub fn refill(&mut self, row: &[f64]) {
        self.sums.clear();
        self.sums.reserve(row.len() + 1);
        let mut acc = 0.0;
        self.sums.push(acc);
        for v in row {
            acc += v;
            self.sums.push(acc);
        }
    }

    pub fn len(&self) -> usize {
        self.sums.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn interval_sum(&self, iv: &Interval) -> f64 {
        self.sums[iv.end + 1] - self.sums[iv.start]
    }

    /// Contrast over `(first, second)` in O(1).
    pub fn contrast(&self, first: &Interval, second: &Interval) -> Result<f64> {
        check_pair(first, second, self.len())?;
        Ok(self.contrast_unchecked(first, second))
    }

    fn contrast_unchecked(&self, first: &Interval, second: &Interval) -> f64 {
        let (n_p, n_q) = (first.len(), second.len());
        pair_factor(n_p, n_q)
            * (self.interval_sum(first) / n_p as f64 - self.interval_sum(second) / n_q as f64)
    }
}

/// `C_j(p, q)` for one periodogram row.
pub fn contrast_stat(row: &[f64], first: &Interval, second: &Interval) -> Result<f64> {
    PrefixSums::new(row).contrast(first, second)
}

/// Contrasts for every scale and disjoint pair, `J* x D`, row-major by scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastTable {
    pub j_star: usize,
    pub pairs: usize,
    pub values: Vec<f64>,
}

impl ContrastTable {
    pub fn get(&self, scale: Scale, pair: usize) -> f64 {
        self.values[(scale.level() - 1) * self.pairs + pair]
    }

    pub fn row(&self, scale: Scale) -> &[f64] {
        let l = scale.level() - 1;
        &self.values[l * self.pairs..(l + 1) * self.pairs]
    }
}

/// Evaluates all contrasts of a fixed pair set against many periodograms.
#[derive(Debug, Clone)]
pub struct ContrastEvaluator {
    len: usize,
    pairs: Vec<(Interval, Interval)>,
}

impl ContrastEvaluator {
    pub fn new(pairs: &IntervalPairSet, len: usize) -> Result<Self> {
        let pairs: Vec<_> = pairs.iter().collect();
        for (a, b) in &pairs {
            check_pair(a, b, len)?;
        }
        Ok(ContrastEvaluator { len, pairs })
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Fills `out` (`J* x D`) from a row-major `J* x T` periodogram slice.
    pub fn evaluate_into(&self, periodogram: &[f64], prefix: &mut PrefixSums, out: &mut [f64]) {
        let d = self.pairs.len();
        debug_assert_eq!(periodogram.len() % self.len, 0);
        debug_assert_eq!(out.len(), periodogram.len() / self.len * d);
        for (row, cells) in periodogram
            .chunks_exact(self.len)
            .zip(out.chunks_exact_mut(d))
        {
            prefix.refill(row);
            for ((a, b), c) in self.pairs.iter().zip(cells.iter_mut()) {
                *c = prefix.contrast_unchecked(a, b);
            }
        }
    }

    pub fn evaluate(&self, periodogram: &PeriodogramMatrix) -> Result<ContrastTable> {
        if periodogram.len() != self.len {
            return Err(Error::InfeasibleConfig(format!(
                "periodogram length {} differs from pair-set length {}",
                periodogram.len(),
                self.len
            )));
        }
        let j_star = periodogram.j_star();
        let mut values = vec![0.0; j_star * self.pairs.len()];
        let flat: Vec<f64> = periodogram
            .rows()
            .flat_map(|(_, r)| r.iter().copied())
            .collect();
        self.evaluate_into(&flat, &mut PrefixSums::default(), &mut values);
        Ok(ContrastTable {
            j_star,
            pairs: self.pairs.len(),
            values,
        })
    }
}

pub fn contrast_all(
    periodogram: &PeriodogramMatrix,
    pairs: &IntervalPairSet,
) -> Result<ContrastTable> {
    ContrastEvaluator::new(pairs, periodogram.len())?.evaluate(periodogram)
}
