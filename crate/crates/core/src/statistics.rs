//! Test statistics and their exact null distributions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::distribution::NullDistribution;
use crate::error::{Error, Result};
use crate::models::{approximate_statistic_distribution, statistic_null_distribution, Model, PairLinearStatistic};
use crate::profile::Profile;
use crate::rank::{Alt, Ballot};
use crate::space::ProfileSpace;

/// Draws used when a Mallows statistic must be estimated by simulation.
pub const MONTE_CARLO_DRAWS: usize = 200_000;
const MONTE_CARLO_SEED: u64 = 0x5eed;

pub trait TestStatistic: Send + Sync + fmt::Debug {
    /// Stable token used in reports and cache keys.
    fn name(&self) -> String;

    fn evaluate(&self, profile: &Profile) -> Result<f64>;

    /// Integral statistics compare exactly; others use a relative tie tolerance.
    fn is_integral(&self) -> bool;

    /// Distribution of the statistic for `n` i.i.d. ballots drawn around `center`.
    fn distribution(&self, model: &Model, center: &Ballot, n: u64) -> Result<NullDistribution>;
}

impl TestStatistic for PairLinearStatistic {
    fn name(&self) -> String {
        self.label().to_string()
    }

    fn evaluate(&self, profile: &Profile) -> Result<f64> {
        PairLinearStatistic::evaluate(self, profile).map(|v| v as f64)
    }

    fn is_integral(&self) -> bool {
        true
    }

    fn distribution(&self, model: &Model, center: &Ballot, n: u64) -> Result<NullDistribution> {
        match statistic_null_distribution(model, center, self, n) {
            Ok(d) => Ok(d.to_null()),
            Err(Error::EnumerationLimit { .. }) if matches!(model, Model::Mallows(_)) => {
                let d = approximate_statistic_distribution(
                    model,
                    center,
                    self,
                    n,
                    MONTE_CARLO_DRAWS,
                    MONTE_CARLO_SEED,
                )?;
                Ok(d.to_null().with_approximation(MONTE_CARLO_DRAWS))
            }
            Err(e) => Err(e),
        }
    }
}

/// `Ratio_{Λ,h1}(P) = π_{h1}(P) / Σ Λ(h0) π_{h0}(P)` on a fixed `n`.
#[derive(Debug, Clone)]
pub struct MixtureRatio {
    lambda: Vec<(Ballot, f64)>,
    h1: Ballot,
    model: Model,
    space: Arc<ProfileSpace>,
    ratios: Vec<f64>,
}

impl MixtureRatio {
    pub fn new(lambda: &[(Ballot, f64)], h1: &Ballot, model: &Model, n: u64) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidMixture("empty support".into()));
        }
        let space = Arc::new(ProfileSpace::new(model, n)?);
        let p1 = space.single_pmf(h1)?;
        let p0: Vec<(f64, Vec<f64>)> = lambda
            .iter()
            .map(|(h, w)| Ok((*w, space.single_pmf(h)?)))
            .collect::<Result<_>>()?;
        let ratios = space.map_points(|d| {
            let num: f64 = d.iter().map(|&i| p1[i]).product();
            let den: f64 = p0
                .iter()
                .map(|(w, p)| w * d.iter().map(|&i| p[i]).product::<f64>())
                .sum();
            num / den
        });
        Ok(MixtureRatio {
            lambda: lambda.to_vec(),
            h1: h1.clone(),
            model: *model,
            space,
            ratios,
        })
    }

    pub fn n(&self) -> u64 {
        self.space.n()
    }

    pub fn space(&self) -> &Arc<ProfileSpace> {
        &self.space
    }

    /// Ratio at every point of the ordered sample space.
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }
}

impl TestStatistic for MixtureRatio {
    fn name(&self) -> String {
        format!("mixture_ratio:{}", self.lambda.len())
    }

    fn evaluate(&self, profile: &Profile) -> Result<f64> {
        if profile.n() != self.n() {
            return Err(Error::Unsupported(format!(
                "ratio built for n={}, profile has n={}",
                self.n(),
                profile.n()
            )));
        }
        let lp = |h: &Ballot| crate::models::profile_log_pmf(&self.model, h, profile);
        let num = lp(&self.h1)?;
        let terms: Vec<f64> = self
            .lambda
            .iter()
            .map(|(h, w)| Ok(w.ln() + lp(h)?))
            .collect::<Result<_>>()?;
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let den = top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
        Ok((num - den).exp())
    }

    fn is_integral(&self) -> bool {
        false
    }

    fn distribution(&self, model: &Model, center: &Ballot, n: u64) -> Result<NullDistribution> {
        if *model != self.model || n != self.n() {
            return Err(Error::Unsupported("ratio distribution for a different model or n".into()));
        }
        let probs = self.space.probabilities(center)?;
        Ok(NullDistribution::from_pairs(
            false,
            self.ratios.iter().cloned().zip(probs).collect::<Vec<_>>(),
        ))
    }
}

/// `S(P) = Σ_{b≠a} φ^{w_P(a≻b)}`, small when `a` beats everyone by wide margins.
#[derive(Debug, Clone, PartialEq)]
pub struct CondorcetWinnerSum {
    m: usize,
    a: Alt,
    phi: f64,
}

impl CondorcetWinnerSum {
    pub fn new(m: usize, a: Alt, phi: f64) -> Result<Self> {
        if a >= m {
            return Err(Error::UnknownAlternative(a.to_string()));
        }
        if m < 2 {
            return Err(Error::InvalidHypothesis("need at least two alternatives".into()));
        }
        Ok(CondorcetWinnerSum { m, a, phi })
    }

    /// Sum over the weight multiset, added in ascending weight order so equal
    /// multisets give bit-identical sums.
    pub fn from_weights(&self, weights: &[i64]) -> f64 {
        let mut w = weights.to_vec();
        w.sort_unstable();
        w.iter().map(|&x| self.phi.powi(x as i32)).sum()
    }

    /// The likelihood ratio `(m-1) / S`.
    pub fn ratio(&self, s: f64) -> f64 {
        (self.m - 1) as f64 / s
    }
}

fn binomial_pmf(n: u64, q: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut log_c = 0.0;
    for k in 0..=n {
        if k > 0 {
            log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        out.push((log_c + k as f64 * q.ln() + (n - k) as f64 * (1.0 - q).ln()).exp());
    }
    out
}

impl TestStatistic for CondorcetWinnerSum {
    fn name(&self) -> String {
        format!("condorcet_sum:{}", self.a)
    }

    fn evaluate(&self, profile: &Profile) -> Result<f64> {
        if profile.m() != self.m {
            return Err(Error::SizeMismatch {
                expected: self.m,
                got: profile.m(),
            });
        }
        let g = profile.wmg()?;
        let w: Vec<i64> = (0..self.m).filter(|&b| b != self.a).map(|b| g.weight(self.a, b)).collect();
        Ok(self.from_weights(&w))
    }

    fn is_integral(&self) -> bool {
        false
    }

    fn distribution(&self, model: &Model, center: &Ballot, n: u64) -> Result<NullDistribution> {
        let Model::Condorcet(c) = model else {
            return Err(Error::Unsupported(
                "the pairwise-sum statistic factorizes only under Condorcet's model".into(),
            ));
        };
        if model.m() != self.m || (model.phi() - self.phi).abs() > 0.0 {
            return Err(Error::Unsupported("statistic built for a different model".into()));
        }
        let rel = center.to_relation();
        // Distribution over sorted weight multisets; pairs with `a` are independent.
        let mut states: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        states.insert(Vec::new(), 1.0);
        for b in (0..self.m).filter(|&b| b != self.a) {
            let q = if rel.prefers(self.a, b) {
                c.agreement()
            } else {
                1.0 - c.agreement()
            };
            let pmf = binomial_pmf(n, q);
            let mut next: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
            for (key, p) in &states {
                for (k, pk) in pmf.iter().enumerate() {
                    let w = 2 * k as i64 - n as i64;
                    let mut nk = key.clone();
                    let pos = nk.partition_point(|&x| x < w);
                    nk.insert(pos, w);
                    *next.entry(nk).or_insert(0.0) += p * pk;
                }
            }
            states = next;
        }
        Ok(NullDistribution::from_pairs(
            false,
            states.into_iter().map(|(k, p)| (self.from_weights(&k), p)).collect::<Vec<_>>(),
        ))
    }
}
