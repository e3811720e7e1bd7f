//! Exact finite distributions of test statistics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Relative tolerance under which two real statistic values count as tied.
pub const TIE_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Distribution of an integer-valued statistic over a dense integer range.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticDistribution {
    support: Vec<i64>,
    probs: Vec<f64>,
}

impl StatisticDistribution {
    pub fn point_mass(value: i64) -> Self {
        StatisticDistribution {
            support: vec![value],
            probs: vec![1.0],
        }
    }

    /// Builds from `(value, probability)` pairs, summing repeated values and dropping
    /// zero-probability values.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, f64)>) -> Self {
        let mut acc: BTreeMap<i64, f64> = BTreeMap::new();
        for (v, p) in pairs {
            *acc.entry(v).or_insert(0.0) += p;
        }
        let (support, probs) = acc.into_iter().filter(|&(_, p)| p > 0.0).unzip();
        StatisticDistribution { support, probs }
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn min(&self) -> i64 {
        self.support[0]
    }

    pub fn max(&self) -> i64 {
        *self.support.last().expect("non-empty")
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn prob(&self, value: i64) -> f64 {
        match self.support.binary_search(&value) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// `Pr(X >= value)`.
    pub fn upper_tail(&self, value: i64) -> f64 {
        let start = self.support.partition_point(|&v| v < value);
        self.probs[start..].iter().sum()
    }

    fn dense(&self) -> (i64, Vec<f64>) {
        let lo = self.min();
        let mut d = vec![0.0; (self.max() - lo + 1) as usize];
        for (&v, &p) in self.support.iter().zip(&self.probs) {
            d[(v - lo) as usize] = p;
        }
        (lo, d)
    }

    fn from_dense(lo: i64, d: Vec<f64>) -> Self {
        Self::from_pairs(d.into_iter().enumerate().map(|(i, p)| (lo + i as i64, p)))
    }

    /// Distribution of `X + Y` for independent `X` and `Y`.
    pub fn convolve(&self, other: &StatisticDistribution) -> Self {
        let (lo_a, a) = self.dense();
        let (lo_b, b) = other.dense();
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, &pa) in a.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (j, &pb) in b.iter().enumerate() {
                out[i + j] += pa * pb;
            }
        }
        Self::from_dense(lo_a + lo_b, out)
    }

    /// Distribution of the sum of `n` i.i.d. copies (point mass at 0 for `n = 0`).
    pub fn n_fold(&self, n: usize) -> Self {
        let mut result = StatisticDistribution::point_mass(0);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.convolve(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.convolve(&base);
            }
        }
        result
    }

    /// Shifts and scales: `a * X + b`.
    pub fn affine(&self, a: i64, b: i64) -> Self {
        Self::from_pairs(self.support.iter().zip(&self.probs).map(|(&v, &p)| (a * v + b, p)))
    }

    pub fn to_null(&self) -> NullDistribution {
        NullDistribution {
            values: self.support.iter().map(|&v| v as f64).collect(),
            probs: self.probs.clone(),
            integral: true,
            approximate: None,
        }
    }
}

/// Which side of the statistic's distribution the critical region covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// Reject for large values.
    Upper,
    /// Reject for small values.
    Lower,
}

/// Distribution of a (possibly real-valued) statistic with tie-aware lookups.
///
/// Integral statistics compare exactly; real statistics treat values within
/// [`TIE_RELATIVE_TOLERANCE`] of each other as equal.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
    integral: bool,
    /// `Some(draws)` when estimated by Monte Carlo rather than computed exactly.
    approximate: Option<usize>,
}

pub(crate) fn tied(integral: bool, x: f64, y: f64) -> bool {
    if integral {
        x == y
    } else {
        (x - y).abs() <= TIE_RELATIVE_TOLERANCE * x.abs().max(y.abs())
    }
}

impl NullDistribution {
    /// Builds from raw `(value, probability)` pairs, merging ties.
    pub fn from_pairs(integral: bool, pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<(f64, f64)> = pairs.into_iter().filter(|&(_, p)| p > 0.0).collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(raw.len());
        let mut probs: Vec<f64> = Vec::with_capacity(raw.len());
        // Merged groups keep the value of their first (smallest) member.
        for (v, p) in raw {
            match values.last() {
                Some(&last) if tied(integral, last, v) => *probs.last_mut().expect("paired") += p,
                _ => {
                    values.push(v);
                    probs.push(p);
                }
            }
        }
        NullDistribution {
            values,
            probs,
            integral,
            approximate: None,
        }
    }

    pub fn with_approximation(mut self, draws: usize) -> Self {
        self.approximate = Some(draws);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn approximate(&self) -> Option<usize> {
        self.approximate
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Mixture `Σ w_i D_i` of distributions of the same statistic.
    pub fn mixture(parts: &[(f64, &NullDistribution)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidMixture("no components".into()))?;
        let integral = first.1.integral;
        let pairs = parts
            .iter()
            .flat_map(|(w, d)| d.values.iter().zip(&d.probs).map(move |(&v, &p)| (v, w * p)));
        let mut out = NullDistribution::from_pairs(integral, pairs.collect::<Vec<_>>());
        out.approximate = parts.iter().filter_map(|(_, d)| d.approximate).min();
        Ok(out)
    }

    /// `(Pr(X > x), Pr(X = x), Pr(X < x))` with tie-aware equality.
    pub fn split_at(&self, x: f64) -> (f64, f64, f64) {
        let (mut above, mut at, mut below) = (0.0, 0.0, 0.0);
        for (&v, &p) in self.values.iter().zip(&self.probs) {
            if tied(self.integral, v, x) {
                at += p;
            } else if v > x {
                above += p;
            } else {
                below += p;
            }
        }
        (above, at, below)
    }

    /// Probability that the critical function `1{X beyond K} + γ 1{X = K}` rejects.
    pub fn rejection_probability(&self, threshold: f64, gamma: f64, tail: Tail) -> f64 {
        let (above, at, below) = self.split_at(threshold);
        let beyond = match tail {
            Tail::Upper => above,
            Tail::Lower => below,
        };
        beyond + gamma * at
    }

    /// Tail probability including ties: `Pr(X >= x)` (upper) or `Pr(X <= x)` (lower).
    pub fn tail_inclusive(&self, x: f64, tail: Tail) -> f64 {
        let (above, at, below) = self.split_at(x);
        match tail {
            Tail::Upper => above + at,
            Tail::Lower => below + at,
        }
    }

    /// Threshold `K` and randomization `γ` giving rejection probability exactly `alpha`.
    ///
    /// `K` is the support point closest to the tail end with `Pr(X beyond K) <= alpha`.
    pub fn critical_values(&self, alpha: f64, tail: Tail) -> (f64, f64) {
        let n = self.values.len();
        let order: Vec<usize> = match tail {
            Tail::Upper => (0..n).rev().collect(),
            Tail::Lower => (0..n).collect(),
        };
        let mut beyond = 0.0;
        for &i in &order {
            let p = self.probs[i];
            if beyond + p > alpha {
                let gamma = ((alpha - beyond) / p).clamp(0.0, 1.0);
                return (self.values[i], gamma);
            }
            beyond += p;
        }
        // alpha reaches the whole mass: reject everything at the far end.
        let last = *order.last().expect("non-empty distribution");
        (self.values[last], 1.0)
    }
}
