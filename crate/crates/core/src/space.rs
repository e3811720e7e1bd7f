//! Ordered `n`-ballot sample spaces, enumerated in mixed radix.

use crate::error::{Error, Result};
use crate::models::Model;
use crate::profile::Profile;
use crate::rank::Ballot;

/// Default cap on the number of ordered profiles a space may hold.
pub const ORDERED_PROFILE_LIMIT: u128 = 1_000_000;

/// All sequences of `n` single ballots. Point `i` has digits `i_1 ... i_n` (first ballot
/// most significant) in base `|S|`.
#[derive(Debug, Clone)]
pub struct ProfileSpace {
    model: Model,
    n: u64,
    singles: Vec<Ballot>,
    len: usize,
}

impl ProfileSpace {
    pub fn new(model: &Model, n: u64) -> Result<Self> {
        Self::with_limit(model, n, ORDERED_PROFILE_LIMIT)
    }

    pub fn with_limit(model: &Model, n: u64, limit: u128) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyProfile);
        }
        let s = model.support_size();
        let needed = s.checked_pow(n as u32).unwrap_or(u128::MAX);
        if needed > limit {
            return Err(Error::EnumerationLimit {
                what: format!("ordered {n}-profiles of {model:?}"),
                needed,
                limit,
            });
        }
        let singles = model.support()?;
        Ok(ProfileSpace {
            model: *model,
            n,
            singles,
            len: needed as usize,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn singles(&self) -> &[Ballot] {
        &self.singles
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let base = self.singles.len();
        let mut out = vec![0; self.n as usize];
        for d in out.iter_mut().rev() {
            *d = idx % base;
            idx /= base;
        }
        out
    }

    pub fn profile(&self, idx: usize) -> Profile {
        let mut p = Profile::new(self.model.m(), self.model.kind());
        for d in self.digits(idx) {
            p.push(self.singles[d].clone(), 1).expect("space ballots match the model");
        }
        p
    }

    /// Single-ballot pmf under `center`, indexed like [`Self::singles`].
    pub fn single_pmf(&self, center: &Ballot) -> Result<Vec<f64>> {
        self.singles.iter().map(|v| self.model.pmf(center, v)).collect()
    }

    /// `π_center(P)` for every point, as the `n`-fold Kronecker power of the single pmf.
    pub fn probabilities(&self, center: &Ballot) -> Result<Vec<f64>> {
        let single = self.single_pmf(center)?;
        Ok(kron_power(&single, self.n as usize))
    }

    /// Applies `f` to every point's digit vector, in index order.
    pub fn map_points<T>(&self, mut f: impl FnMut(&[usize]) -> T) -> Vec<T> {
        let base = self.singles.len();
        let mut digits = vec![0usize; self.n as usize];
        let mut out = Vec::with_capacity(self.len);
        for _ in 0..self.len {
            out.push(f(&digits));
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < base {
                    break;
                }
                *d = 0;
            }
        }
        out
    }
}

pub(crate) fn kron_power(v: &[f64], n: usize) -> Vec<f64> {
    let mut acc = vec![1.0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(acc.len() * v.len());
        for &a in &acc {
            next.extend(v.iter().map(|&x| a * x));
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::Ranking;

    #[test]
    fn probabilities_sum_to_one_and_match_profiles() {
        let model = Model::mallows(3, 0.5).unwrap();
        let space = ProfileSpace::new(&model, 2).unwrap();
        assert_eq!(space.len(), 36);
        let w: Ballot = Ranking::identity(3).into();
        let probs = space.probabilities(&w).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for idx in [0, 7, 35] {
            let p = space.profile(idx);
            let direct = crate::models::profile_pmf(&model, &w, &p).unwrap();
            assert!((direct - probs[idx]).abs() < 1e-15);
        }
        let digits = space.map_points(|d| d.to_vec());
        assert_eq!(digits[7], space.digits(7));
    }

    #[test]
    fn limit_is_enforced() {
        let model = Model::mallows(6, 0.5).unwrap();
        assert!(matches!(ProfileSpace::new(&model, 3), Err(Error::EnumerationLimit { .. })));
    }
}
