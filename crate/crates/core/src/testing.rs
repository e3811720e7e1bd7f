//! Neyman–Pearson machinery on finite models: size, power, likelihood ratio tests
//! and least favorable distributions.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::distribution::{tied, NullDistribution, Tail};
use crate::error::{check_alpha, Error, Result};
use crate::models::{validate_above_set, Model, PairLinearStatistic};
use crate::profile::Profile;
use crate::rank::{num_pairs, pair_index, Alt, Ballot, BallotKind, BinaryRelation, Ranking};
use crate::space::ProfileSpace;
use crate::statistics::{MixtureRatio, TestStatistic};

/// Absolute tolerance for exact size and power comparisons.
pub const SIZE_TOLERANCE: f64 = 1e-10;

/// An explicit finite set of parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    m: usize,
    kind: BallotKind,
    params: Vec<Ballot>,
}

impl Hypothesis {
    pub fn new(params: Vec<Ballot>) -> Result<Self> {
        let first = params
            .first()
            .ok_or_else(|| Error::InvalidHypothesis("empty parameter set".into()))?;
        let (m, kind) = (first.m(), first.kind());
        let mut out: Vec<Ballot> = Vec::with_capacity(params.len());
        for p in params {
            if p.m() != m || p.kind() != kind {
                return Err(Error::InvalidHypothesis("mixed parameter kinds or sizes".into()));
            }
            if !out.contains(&p) {
                out.push(p);
            }
        }
        Ok(Hypothesis { m, kind, params: out })
    }

    fn filtered(model: &Model, pred: impl Fn(&Ballot) -> bool) -> Result<Self> {
        let params: Vec<Ballot> = model.support()?.into_iter().filter(|b| pred(b)).collect();
        Self::new(params)
    }

    /// The whole parameter space of `model`.
    pub fn all(model: &Model) -> Result<Self> {
        Self::filtered(model, |_| true)
    }

    /// `a` preferred to every other alternative (`L_{a≻others}` or `R_{a≻others}`).
    pub fn top(model: &Model, a: Alt) -> Result<Self> {
        check_target(model.m(), a)?;
        Self::filtered(model, |b| b.above(a).is_empty())
    }

    /// Every other alternative preferred to `a`.
    pub fn bottom(model: &Model, a: Alt) -> Result<Self> {
        check_target(model.m(), a)?;
        Self::filtered(model, |b| b.above(a).len() == model.m() - 1)
    }

    /// Parameters in which exactly `set` is preferred to `a` (`L_{B≻a}` or `R_{B≻a}`).
    pub fn above_set(model: &Model, set: &[Alt], a: Alt) -> Result<Self> {
        check_target(model.m(), a)?;
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        if let Some(&b) = sorted.iter().find(|&&b| b >= model.m()) {
            return Err(Error::UnknownAlternative(b.to_string()));
        }
        validate_above_set(&sorted, a)?;
        Self::filtered(model, |b| b.above(a) == sorted)
    }

    /// Parameters of `model` outside this hypothesis.
    pub fn complement(&self, model: &Model) -> Result<Self> {
        Self::filtered(model, |b| !self.params.contains(b))
    }

    pub fn params(&self) -> &[Ballot] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn contains(&self, b: &Ballot) -> bool {
        self.params.contains(b)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> BallotKind {
        self.kind
    }

    pub fn check_disjoint(&self, other: &Hypothesis) -> Result<()> {
        match self.params.iter().find(|p| other.contains(p)) {
            Some(p) => Err(Error::InvalidHypothesis(format!("{p:?} is in both hypotheses"))),
            None => Ok(()),
        }
    }
}

fn check_target(m: usize, a: Alt) -> Result<()> {
    if a >= m {
        Err(Error::UnknownAlternative(a.to_string()))
    } else {
        Ok(())
    }
}

/// A randomized test: probability of rejecting `H0` on each profile.
pub trait CriticalFunction: Send + Sync {
    fn value(&self, profile: &Profile) -> Result<f64>;

    /// `E_{P ~ π_h} f(P)` for `n` ballots.
    fn rejection_probability(&self, model: &Model, h: &Ballot, n: u64) -> Result<f64>;
}

/// `Size(f) = max_{h0 ∈ H0} Size(f, h0)`, with the maximizing parameter.
pub fn size(test: &dyn CriticalFunction, h0: &Hypothesis, model: &Model, n: u64) -> Result<(f64, Ballot)> {
    let sizes: Vec<f64> = h0
        .params()
        .par_iter()
        .map(|h| test.rejection_probability(model, h, n))
        .collect::<Result<_>>()?;
    let (i, s) = sizes
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    Ok((s, h0.params()[i].clone()))
}

pub fn power(test: &dyn CriticalFunction, h1: &Ballot, model: &Model, n: u64) -> Result<f64> {
    test.rejection_probability(model, h1, n)
}

/// A critical function tabulated on every point of an ordered sample space.
#[derive(Debug, Clone)]
pub struct GeneralTest {
    space: Arc<ProfileSpace>,
    values: Vec<f64>,
}

impl GeneralTest {
    pub fn new(space: Arc<ProfileSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::SizeMismatch {
                expected: space.len(),
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Unsupported(format!("critical value {v} outside [0, 1]")));
        }
        Ok(GeneralTest { space, values })
    }

    /// Tabulates `f` on the space (for example to compare with an oracle).
    pub fn tabulate(space: Arc<ProfileSpace>, f: &dyn CriticalFunction) -> Result<Self> {
        let values = (0..space.len())
            .map(|i| f.value(&space.profile(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, values)
    }

    pub fn space(&self) -> &Arc<ProfileSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl CriticalFunction for GeneralTest {
    fn value(&self, profile: &Profile) -> Result<f64> {
        // Ordered points sharing a multiset carry the average value of that multiset.
        let matches: Vec<f64> = (0..self.space.len())
            .filter(|&i| self.space.profile(i).same_multiset(profile))
            .map(|i| self.values[i])
            .collect();
        if matches.is_empty() {
            return Err(Error::Unsupported("profile outside the enumerated space".into()));
        }
        Ok(matches.iter().sum::<f64>() / matches.len() as f64)
    }

    fn rejection_probability(&self, model: &Model, h: &Ballot, n: u64) -> Result<f64> {
        if *model != *self.space.model() || n != self.space.n() {
            return Err(Error::Unsupported("test tabulated for a different model or n".into()));
        }
        let probs = self.space.probabilities(h)?;
        Ok(probs.iter().zip(&self.values).map(|(p, v)| p * v).sum())
    }
}

/// `f(P) = 1` beyond the threshold, `Γ` at it and `0` otherwise.
#[derive(Clone)]
pub struct ThresholdTest {
    statistic: Arc<dyn TestStatistic>,
    tail: Tail,
    threshold: f64,
    gamma: f64,
    alpha: f64,
    null: NullDistribution,
}

impl fmt::Debug for ThresholdTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThresholdTest")
            .field("statistic", &self.statistic.name())
            .field("tail", &self.tail)
            .field("threshold", &self.threshold)
            .field("gamma", &self.gamma)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl ThresholdTest {
    /// Level-`alpha` test whose size under `null` is exactly `alpha`.
    pub fn calibrate(statistic: Arc<dyn TestStatistic>, tail: Tail, null: NullDistribution, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if null.values().is_empty() {
            return Err(Error::Numerical("empty null distribution".into()));
        }
        let (threshold, gamma) = null.critical_values(alpha, tail);
        Ok(ThresholdTest {
            statistic,
            tail,
            threshold,
            gamma,
            alpha,
            null,
        })
    }

    /// A test with explicit critical values; `null` is kept for p-values.
    pub fn with_critical_values(
        statistic: Arc<dyn TestStatistic>,
        tail: Tail,
        null: NullDistribution,
        threshold: f64,
        gamma: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Unsupported(format!("randomization {gamma} outside [0, 1]")));
        }
        let alpha = null.rejection_probability(threshold, gamma, tail);
        Ok(ThresholdTest {
            statistic,
            tail,
            threshold,
            gamma,
            alpha,
            null,
        })
    }

    pub fn statistic(&self) -> &Arc<dyn TestStatistic> {
        &self.statistic
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Distribution of the statistic at the designated worst-case null parameter.
    pub fn null(&self) -> &NullDistribution {
        &self.null
    }

    pub fn is_approximate(&self) -> bool {
        self.null.approximate().is_some()
    }

    /// Rejection probability for an observed statistic value.
    pub fn decide(&self, stat: f64) -> f64 {
        if tied(self.statistic.is_integral(), stat, self.threshold) {
            return self.gamma;
        }
        let beyond = match self.tail {
            Tail::Upper => stat > self.threshold,
            Tail::Lower => stat < self.threshold,
        };
        if beyond {
            1.0
        } else {
            0.0
        }
    }

    /// `Pr_null(statistic at least as extreme as observed)`.
    pub fn p_value(&self, stat: f64) -> f64 {
        self.null.tail_inclusive(stat, self.tail).clamp(0.0, 1.0)
    }
}

impl CriticalFunction for ThresholdTest {
    fn value(&self, profile: &Profile) -> Result<f64> {
        Ok(self.decide(self.statistic.evaluate(profile)?))
    }

    fn rejection_probability(&self, model: &Model, h: &Ballot, n: u64) -> Result<f64> {
        let d = self.statistic.distribution(model, h, n)?;
        Ok(d.rejection_probability(self.threshold, self.gamma, self.tail))
    }
}

/// Neyman–Pearson test of `h0` against `h1`: rejects for large `KT(P, h0) - KT(P, h1)`.
pub fn np_lr_test(h0: &Ballot, h1: &Ballot, alpha: f64, model: &Model, n: u64) -> Result<ThresholdTest> {
    check_alpha(alpha)?;
    if h0 == h1 {
        return Err(Error::InvalidHypothesis("h0 equals h1".into()));
    }
    let stat = PairLinearStatistic::kt_difference(h0, h1)?;
    let null = stat.distribution(model, h0, n)?;
    ThresholdTest::calibrate(Arc::new(stat), Tail::Upper, null, alpha)
}

/// Likelihood ratio test of the `Λ`-mixture against `h1`, rejecting for large ratios.
pub fn mixture_lr_test(lambda: &LeastFavorable, h1: &Ballot, alpha: f64, model: &Model, n: u64) -> Result<ThresholdTest> {
    check_alpha(alpha)?;
    if lambda.support().any(|h| h == h1) {
        return Err(Error::InvalidMixture("h1 is in the support".into()));
    }
    let stat = MixtureRatio::new(lambda.items(), h1, model, n)?;
    let parts: Vec<(f64, NullDistribution)> = lambda
        .items()
        .iter()
        .map(|(h, w)| Ok((*w, stat.distribution(model, h, n)?)))
        .collect::<Result<_>>()?;
    let refs: Vec<(f64, &NullDistribution)> = parts.iter().map(|(w, d)| (*w, d)).collect();
    let null = NullDistribution::mixture(&refs)?;
    ThresholdTest::calibrate(Arc::new(stat), Tail::Upper, null, alpha)
}

/// A finite probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture<T> {
    items: Vec<(T, f64)>,
}

pub type LeastFavorable = Mixture<Ballot>;

impl<T: PartialEq + Clone> Mixture<T> {
    /// Weights must be non-negative and sum to one (within `1e-9`); zero weights are dropped
    /// and equal items merged.
    pub fn new(items: Vec<(T, f64)>) -> Result<Self> {
        let mut out: Vec<(T, f64)> = Vec::new();
        let mut total = 0.0;
        for (x, w) in items {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidMixture(format!("weight {w}")));
            }
            total += w;
            if w == 0.0 {
                continue;
            }
            match out.iter_mut().find(|(y, _)| *y == x) {
                Some((_, v)) => *v += w,
                None => out.push((x, w)),
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidMixture("empty support".into()));
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMixture(format!("weights sum to {total}")));
        }
        Ok(Mixture { items: out })
    }

    pub fn point(x: T) -> Self {
        Mixture { items: vec![(x, 1.0)] }
    }

    pub fn uniform(xs: Vec<T>) -> Result<Self> {
        let w = 1.0 / xs.len() as f64;
        Self::new(xs.into_iter().map(|x| (x, w)).collect())
    }

    pub fn items(&self) -> &[(T, f64)] {
        &self.items
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.items.iter().map(|(x, _)| x)
    }

    pub fn weight(&self, x: &T) -> f64 {
        self.items.iter().find(|(y, _)| y == x).map_or(0.0, |(_, w)| *w)
    }

    pub fn is_deterministic(&self) -> bool {
        self.items.len() == 1
    }

    pub fn map<U: PartialEq + Clone>(&self, f: impl Fn(&T) -> U) -> Result<Mixture<U>> {
        Mixture::new(self.items.iter().map(|(x, w)| (f(x), *w)).collect())
    }
}

/// `Λ*(x, y1) = Λ_X(x)`: lifts a least favorable distribution to a product model.
pub fn product_lf<T: PartialEq + Clone, U: PartialEq + Clone>(lambda_x: &Mixture<T>, y1: &U) -> Mixture<(T, U)> {
    Mixture {
        items: lambda_x.items.iter().map(|(x, w)| ((x.clone(), y1.clone()), *w)).collect(),
    }
}

/// `Ext(Λ, h1, t)`: choose a coordinate uniformly, draw it from `Λ`, set the rest to `h1`.
pub fn ext_lf<T: PartialEq + Clone>(lambda: &Mixture<T>, h1: &T, t: usize) -> Result<Mixture<Vec<T>>> {
    if t < 1 {
        return Err(Error::InvalidMixture("t must be at least 1".into()));
    }
    let mut items = Vec::new();
    for j in 0..t {
        for (x, w) in &lambda.items {
            let mut v = vec![h1.clone(); t];
            v[j] = x.clone();
            items.push((v, w / t as f64));
        }
    }
    Mixture::new(items)
}

/// Maps coordinate vectors of a product of pairwise models onto binary relations.
/// Coordinate `j` set to `true` means `pairs[j].0 ≻ pairs[j].1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCoordinates {
    m: usize,
    pairs: Vec<(Alt, Alt)>,
}

impl PairCoordinates {
    pub fn new(m: usize, pairs: Vec<(Alt, Alt)>) -> Result<Self> {
        // from_pairs validates coverage
        BinaryRelation::from_pairs(m, &pairs)?;
        Ok(PairCoordinates { m, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn relation(&self, coords: &[bool]) -> Result<BinaryRelation> {
        if coords.len() != self.pairs.len() {
            return Err(Error::SizeMismatch {
                expected: self.pairs.len(),
                got: coords.len(),
            });
        }
        let wins: Vec<(Alt, Alt)> = self
            .pairs
            .iter()
            .zip(coords)
            .map(|(&(x, y), &c)| if c { (x, y) } else { (y, x) })
            .collect();
        BinaryRelation::from_pairs(self.m, &wins)
    }

    pub fn coordinates(&self, rel: &BinaryRelation) -> Vec<bool> {
        self.pairs.iter().map(|&(x, y)| rel.prefers(x, y)).collect()
    }

    pub fn lift(&self, lambda: &Mixture<Vec<bool>>) -> Result<LeastFavorable> {
        Mixture::new(
            lambda
                .items()
                .iter()
                .map(|(c, w)| Ok((Ballot::from(self.relation(c)?), *w)))
                .collect::<Result<_>>()?,
        )
    }
}

/// Outcome of a least-favorable check.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// Both conditions hold. `unique` is set when no profile sits exactly on the threshold.
    Holds { unique: bool },
    Violated {
        param: Ballot,
        size: f64,
        detail: String,
    },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }
}

/// Checks that the `Λ` likelihood ratio test has size exactly `alpha` on `Spt(Λ)` and at
/// most `alpha` on the rest of `H0`.
pub fn verify_least_favorable(
    lambda: &LeastFavorable,
    h0: &Hypothesis,
    h1: &Ballot,
    alpha: f64,
    model: &Model,
    n: u64,
) -> Result<Verdict> {
    if let Some(x) = lambda.support().find(|x| !h0.contains(x)) {
        return Err(Error::InvalidMixture(format!("{x:?} is not in H0")));
    }
    let test = mixture_lr_test(lambda, h1, alpha, model, n)?;
    for h in lambda.support() {
        let s = test.rejection_probability(model, h, n)?;
        if (s - alpha).abs() > SIZE_TOLERANCE {
            return Ok(Verdict::Violated {
                param: h.clone(),
                size: s,
                detail: format!("size {s} at a support point, expected {alpha}"),
            });
        }
    }
    for h in h0.params() {
        let s = test.rejection_probability(model, h, n)?;
        if s > alpha + SIZE_TOLERANCE {
            return Ok(Verdict::Violated {
                param: h.clone(),
                size: s,
                detail: format!("size {s} exceeds {alpha}"),
            });
        }
    }
    let (_, at, _) = test.null().split_at(test.threshold());
    Ok(Verdict::Holds { unique: at == 0.0 })
}

/// Per-parameter distributions of `Ratio_{Λ,h1}` for one ballot, and the dominance verdict.
#[derive(Debug, Clone)]
pub struct UniformCheck {
    pub verdict: Verdict,
    /// Distribution of the ratio (not its logarithm) under each `h0`.
    pub distributions: Vec<(Ballot, NullDistribution)>,
}

impl UniformCheck {
    pub fn distribution(&self, h: &Ballot) -> Option<&NullDistribution> {
        self.distributions.iter().find(|(x, _)| x == h).map(|(_, d)| d)
    }
}

/// Weak-dominance test: `Pr_{h0*}(X ≥ p) ≥ Pr_{h0}(X ≥ p)` at every support point `p`,
/// for `h0*` in `Spt(Λ)` and every `h0`, where `X = log Ratio_{Λ,h1}` of a single ballot.
pub fn check_uniform_lf(lambda: &LeastFavorable, h0: &Hypothesis, h1: &Ballot, model: &Model) -> Result<UniformCheck> {
    let stat = MixtureRatio::new(lambda.items(), h1, model, 1)?;
    let distributions: Vec<(Ballot, NullDistribution)> = h0
        .params()
        .iter()
        .map(|h| Ok((h.clone(), stat.distribution(model, h, 1)?)))
        .collect::<Result<_>>()?;
    let points = NullDistribution::from_pairs(false, stat.ratios().iter().map(|&r| (r, 1.0)).collect::<Vec<_>>());
    for star in lambda.support() {
        let ds = &distributions
            .iter()
            .find(|(h, _)| h == star)
            .ok_or_else(|| Error::InvalidMixture(format!("{star:?} is not in H0")))?
            .1;
        for (h, d) in &distributions {
            for &p in points.values() {
                let a = ds.tail_inclusive(p, Tail::Upper);
                let b = d.tail_inclusive(p, Tail::Upper);
                if a < b - 1e-12 {
                    return Ok(UniformCheck {
                        verdict: Verdict::Violated {
                            param: h.clone(),
                            size: b,
                            detail: format!(
                                "Pr(X >= log {p}) is {b} under {h:?} but {a} under support point {star:?}"
                            ),
                        },
                        distributions,
                    });
                }
            }
        }
    }
    Ok(UniformCheck {
        verdict: Verdict::Holds { unique: false },
        distributions,
    })
}

/// A deterministic `Λ` certified least favorable for every sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct IidCertificate {
    pub lambda: LeastFavorable,
    pub h1: Ballot,
}

pub fn extend_iid(lambda: &LeastFavorable, h0: &Hypothesis, h1: &Ballot, model: &Model) -> Result<IidCertificate> {
    if !lambda.is_deterministic() {
        return Err(Error::InvalidMixture(
            "extension to n i.i.d. ballots needs a deterministic distribution".into(),
        ));
    }
    match check_uniform_lf(lambda, h0, h1, model)?.verdict {
        Verdict::Holds { .. } => Ok(IidCertificate {
            lambda: lambda.clone(),
            h1: h1.clone(),
        }),
        Verdict::Violated { detail, .. } => Err(Error::InvalidMixture(format!("not uniformly least favorable: {detail}"))),
    }
}

/// The ranking obtained from `r` by moving `a` to the top.
pub fn raise_to_top(r: &Ranking, a: Alt) -> Ranking {
    r.with_moved(a, 0)
}

/// The relation obtained from `r` by making `a` beat everyone.
pub fn relation_with_top(r: &BinaryRelation, a: Alt) -> BinaryRelation {
    (0..r.m()).filter(|&b| b != a).fold(*r, |acc, b| acc.with_preference(a, b))
}

/// The `m-1` relations obtained from `r` (with `a` on top) by reversing one pair `{a, b}`.
pub fn one_pair_reversals(r: &BinaryRelation, a: Alt) -> Vec<BinaryRelation> {
    let top = relation_with_top(r, a);
    (0..r.m()).filter(|&b| b != a).map(|b| top.with_preference(b, a)).collect()
}

/// Index of pair `{x, y}` regardless of order.
pub fn pair_of(m: usize, x: Alt, y: Alt) -> usize {
    debug_assert!(m >= 2 && num_pairs(m) > 0);
    pair_index(m, x.min(y), x.max(y))
}
