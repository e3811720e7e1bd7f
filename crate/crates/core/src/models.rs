//! Mallows' model over rankings and Condorcet's model over binary relations.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::StatisticDistribution;
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::rank::{num_pairs, pair_index, pairs, Alt, Ballot, BallotKind, BinaryRelation, Ranking};

/// Largest `m` whose `m!` rankings are enumerated.
pub const MALLOWS_ENUMERATION_LIMIT: usize = 8;
/// Largest `m` whose `2^C(m,2)` relations are materialized.
pub const CONDORCET_ENUMERATION_LIMIT: usize = 5;

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < 1.0 {
        Ok(())
    } else {
        Err(Error::DispersionOutOfRange(phi))
    }
}

/// `Π_{l=1..m} (1 - φ^l) / (1 - φ)`.
pub fn mallows_normalizer(m: usize, phi: f64) -> Result<f64> {
    check_phi(phi)?;
    Ok((1..=m).map(|l| (1.0 - phi.powi(l as i32)) / (1.0 - phi)).product())
}

/// `(1 + φ)^C(m,2)`.
pub fn condorcet_normalizer(m: usize, phi: f64) -> Result<f64> {
    check_phi(phi)?;
    Ok((1.0 + phi).powi(num_pairs(m) as i32))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MallowsModel {
    m: usize,
    phi: f64,
    log_z: f64,
}

impl MallowsModel {
    pub fn new(m: usize, phi: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidAlternativeSet("no alternatives".into()));
        }
        let z = mallows_normalizer(m, phi)?;
        Ok(MallowsModel { m, phi, log_z: z.ln() })
    }

    pub fn pmf(&self, center: &Ranking, v: &Ranking) -> Result<f64> {
        check_sizes(self.m, center.m(), v.m())?;
        Ok((v.kendall_tau(center) as f64 * self.phi.ln() - self.log_z).exp())
    }

    /// Repeated insertion: the `i`-th alternative of the center lands `k` slots above
    /// the bottom of the partial ranking with probability `∝ φ^k`.
    pub fn sample<R: Rng + ?Sized>(&self, center: &Ranking, rng: &mut R) -> Ranking {
        let mut order: Vec<Alt> = Vec::with_capacity(self.m);
        for (i, &alt) in center.order().iter().enumerate() {
            // slots 0..=i; slot i is the bottom (no new inversions)
            let weights: Vec<f64> = (0..=i).map(|j| self.phi.powi((i - j) as i32)).collect();
            let total: f64 = weights.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut slot = i;
            for (j, w) in weights.iter().enumerate() {
                if u < *w {
                    slot = j;
                    break;
                }
                u -= w;
            }
            order.insert(slot, alt);
        }
        Ranking::new(order).expect("insertion keeps a permutation")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondorcetModel {
    m: usize,
    phi: f64,
    log_z: f64,
}

impl CondorcetModel {
    pub fn new(m: usize, phi: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidAlternativeSet("no alternatives".into()));
        }
        let z = condorcet_normalizer(m, phi)?;
        Ok(CondorcetModel { m, phi, log_z: z.ln() })
    }

    pub fn pmf(&self, center: &BinaryRelation, v: &BinaryRelation) -> Result<f64> {
        check_sizes(self.m, center.m(), v.m())?;
        Ok((v.kendall_tau(center) as f64 * self.phi.ln() - self.log_z).exp())
    }

    /// Probability that a single ballot agrees with the center on one pair.
    pub fn agreement(&self) -> f64 {
        1.0 / (1.0 + self.phi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, center: &BinaryRelation, rng: &mut R) -> BinaryRelation {
        let agree = self.agreement();
        BinaryRelation::from_fn(self.m, |a, b| {
            let keep = rng.gen::<f64>() < agree;
            center.prefers(a, b) == keep
        })
    }
}

fn check_sizes(m: usize, x: usize, y: usize) -> Result<()> {
    for got in [x, y] {
        if got != m {
            return Err(Error::SizeMismatch { expected: m, got });
        }
    }
    Ok(())
}

/// A fixed-dispersion model: Mallows over rankings or Condorcet over relations.
#[derive(Clone, Copy, PartialEq)]
pub enum Model {
    Mallows(MallowsModel),
    Condorcet(CondorcetModel),
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(m={}, phi={})", self.name(), self.m(), self.phi())
    }
}

impl Model {
    pub fn mallows(m: usize, phi: f64) -> Result<Self> {
        MallowsModel::new(m, phi).map(Model::Mallows)
    }

    pub fn condorcet(m: usize, phi: f64) -> Result<Self> {
        CondorcetModel::new(m, phi).map(Model::Condorcet)
    }

    /// `"mallows"` or `"condorcet"`.
    pub fn by_name(name: &str, m: usize, phi: f64) -> Result<Self> {
        match name {
            "mallows" => Self::mallows(m, phi),
            "condorcet" => Self::condorcet(m, phi),
            other => Err(Error::Unsupported(format!("unknown model {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Mallows(_) => "mallows",
            Model::Condorcet(_) => "condorcet",
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Model::Mallows(x) => x.m,
            Model::Condorcet(x) => x.m,
        }
    }

    pub fn phi(&self) -> f64 {
        match self {
            Model::Mallows(x) => x.phi,
            Model::Condorcet(x) => x.phi,
        }
    }

    pub fn kind(&self) -> BallotKind {
        match self {
            Model::Mallows(_) => BallotKind::Linear,
            Model::Condorcet(_) => BallotKind::Binary,
        }
    }

    pub fn log_normalizer(&self) -> f64 {
        match self {
            Model::Mallows(x) => x.log_z,
            Model::Condorcet(x) => x.log_z,
        }
    }

    pub fn normalizer(&self) -> f64 {
        self.log_normalizer().exp()
    }

    fn check_ballot(&self, b: &Ballot) -> Result<()> {
        if b.kind() != self.kind() {
            return Err(Error::KindMismatch {
                expected: self.kind(),
                got: b.kind(),
            });
        }
        if b.m() != self.m() {
            return Err(Error::SizeMismatch {
                expected: self.m(),
                got: b.m(),
            });
        }
        Ok(())
    }

    pub fn log_pmf(&self, center: &Ballot, v: &Ballot) -> Result<f64> {
        self.check_ballot(center)?;
        self.check_ballot(v)?;
        Ok(self.log_pmf_unchecked(center, v))
    }

    pub(crate) fn log_pmf_unchecked(&self, center: &Ballot, v: &Ballot) -> f64 {
        v.kt_unchecked(center) as f64 * self.phi().ln() - self.log_normalizer()
    }

    pub fn pmf(&self, center: &Ballot, v: &Ballot) -> Result<f64> {
        self.log_pmf(center, v).map(f64::exp)
    }

    /// Number of points in the single-ballot sample space.
    pub fn support_size(&self) -> u128 {
        match self {
            Model::Mallows(x) => (1..=x.m as u128).product(),
            Model::Condorcet(x) => 1u128 << num_pairs(x.m).min(127),
        }
    }

    fn enumeration_limit(&self) -> usize {
        match self {
            Model::Mallows(_) => MALLOWS_ENUMERATION_LIMIT,
            Model::Condorcet(_) => CONDORCET_ENUMERATION_LIMIT,
        }
    }

    /// Every ballot of the single-ballot sample space (also the parameter space).
    pub fn support(&self) -> Result<Vec<Ballot>> {
        if self.m() > self.enumeration_limit() {
            return Err(Error::EnumerationLimit {
                what: format!("{} support for m={}", self.name(), self.m()),
                needed: self.support_size(),
                limit: match self {
                    Model::Mallows(_) => 40320,
                    Model::Condorcet(_) => 1 << num_pairs(CONDORCET_ENUMERATION_LIMIT),
                },
            });
        }
        Ok(match self {
            Model::Mallows(x) => Ranking::all(x.m).into_iter().map(Ballot::from).collect(),
            Model::Condorcet(x) => BinaryRelation::all(x.m).into_iter().map(Ballot::from).collect(),
        })
    }

    pub fn sample_ballot<R: Rng + ?Sized>(&self, center: &Ballot, rng: &mut R) -> Result<Ballot> {
        self.check_ballot(center)?;
        Ok(match (self, center) {
            (Model::Mallows(x), Ballot::Linear(c)) => x.sample(c, rng).into(),
            (Model::Condorcet(x), Ballot::Binary(c)) => x.sample(c, rng).into(),
            _ => unreachable!("kind checked"),
        })
    }

    /// Distribution of a pair-linear statistic for one ballot drawn around `center`.
    pub fn single_ballot_distribution(
        &self,
        center: &Ballot,
        stat: &PairLinearStatistic,
    ) -> Result<StatisticDistribution> {
        self.check_ballot(center)?;
        if stat.m() != self.m() {
            return Err(Error::SizeMismatch {
                expected: self.m(),
                got: stat.m(),
            });
        }
        match self {
            Model::Mallows(_) => {
                let support = self.support()?;
                Ok(StatisticDistribution::from_pairs(support.iter().map(|v| {
                    (stat.evaluate_ballot(v), self.log_pmf_unchecked(center, v).exp())
                })))
            }
            Model::Condorcet(x) => {
                let rel = center.to_relation();
                let agree = x.agreement();
                let mut dist = StatisticDistribution::point_mass(stat.constant());
                for &(p, coef) in stat.coefficients() {
                    // probability that the lower id wins pair p
                    let q = if rel.pair_bit(p) { agree } else { 1.0 - agree };
                    dist = dist.convolve(&StatisticDistribution::from_pairs([(0, 1.0 - q), (coef, q)]));
                }
                Ok(dist)
            }
        }
    }
}

/// `log π_W(P) = Σ_V count(V) · log π_W(V)`.
pub fn profile_log_pmf(model: &Model, center: &Ballot, profile: &Profile) -> Result<f64> {
    if profile.kind() != model.kind() {
        return Err(Error::KindMismatch {
            expected: model.kind(),
            got: profile.kind(),
        });
    }
    let mut total = 0.0;
    for (b, c) in profile.entries() {
        total += *c as f64 * model.log_pmf(center, b)?;
    }
    Ok(total)
}

pub fn profile_pmf(model: &Model, center: &Ballot, profile: &Profile) -> Result<f64> {
    profile_log_pmf(model, center, profile).map(f64::exp)
}

/// `n` i.i.d. ballots around `center`, reproducible from `seed`.
pub fn sample(model: &Model, center: &Ballot, n: u64, seed: u64) -> Result<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(model, center, n, &mut rng)
}

pub fn sample_with<R: Rng + ?Sized>(model: &Model, center: &Ballot, n: u64, rng: &mut R) -> Result<Profile> {
    if n == 0 {
        return Err(Error::EmptyProfile);
    }
    let mut p = Profile::new(model.m(), model.kind());
    for _ in 0..n {
        p.push(model.sample_ballot(center, rng)?, 1)?;
    }
    Ok(p)
}

/// An integer statistic `c + Σ_p coef_p · I_p(V)` summed over ballots, where
/// `I_p(V) = 1` when the lower id wins pair `p` in `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLinearStatistic {
    m: usize,
    constant: i64,
    coefs: Vec<(usize, i64)>,
    label: String,
}

impl PairLinearStatistic {
    pub fn zero(m: usize) -> Self {
        PairLinearStatistic {
            m,
            constant: 0,
            coefs: Vec::new(),
            label: "zero".into(),
        }
    }

    fn labelled(mut self, label: String) -> Self {
        self.label = label;
        self
    }

    /// Short token naming the statistic, e.g. `w_toward:1,2>0`.
    pub fn label(&self) -> &str {
        &self.label
    }

    fn add_margin(&mut self, x: Alt, y: Alt, scale: i64) {
        // margin(x, y) = 2·[x ≻ y] - 1
        let (lo, hi) = (x.min(y), x.max(y));
        let p = pair_index(self.m, lo, hi);
        let sign = if x < y { 1 } else { -1 };
        self.constant += scale * (if x < y { -1 } else { 1 });
        self.add_coef(p, 2 * sign * scale);
    }

    fn add_coef(&mut self, p: usize, c: i64) {
        match self.coefs.iter_mut().find(|(q, _)| *q == p) {
            Some((_, v)) => *v += c,
            None => self.coefs.push((p, c)),
        }
        self.coefs.retain(|&(_, v)| v != 0);
        self.coefs.sort_unstable();
    }

    /// Per-ballot margin `w(x ≻ y)`.
    pub fn margin(m: usize, x: Alt, y: Alt) -> Result<Self> {
        check_alts(m, &[x, y])?;
        if x == y {
            return Err(Error::InvalidAboveSet("margin of an alternative with itself".into()));
        }
        let mut s = Self::zero(m);
        s.add_margin(x, y, 1);
        Ok(s.labelled(format!("margin:{x}>{y}")))
    }

    /// `w(B ≻ a)`.
    pub fn weight_toward(m: usize, set: &[Alt], a: Alt) -> Result<Self> {
        check_alts(m, set)?;
        check_alts(m, &[a])?;
        validate_above_set(set, a)?;
        let mut s = Self::zero(m);
        for &b in set {
            s.add_margin(b, a, 1);
        }
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        let list = sorted.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",");
        Ok(s.labelled(format!("w_toward:{list}>{a}")))
    }

    /// `w(a ≻ others)`.
    pub fn weight_from(m: usize, a: Alt) -> Result<Self> {
        check_alts(m, &[a])?;
        let mut s = Self::zero(m);
        for b in (0..m).filter(|&b| b != a) {
            s.add_margin(a, b, 1);
        }
        Ok(s.labelled(format!("w_from:{a}")))
    }

    /// Borda score of `a`: number of alternatives ranked below it.
    pub fn borda(m: usize, a: Alt) -> Result<Self> {
        check_alts(m, &[a])?;
        let mut s = Self::zero(m);
        for b in (0..m).filter(|&b| b != a) {
            let p = pair_index(m, a.min(b), a.max(b));
            if a < b {
                s.add_coef(p, 1);
            } else {
                s.constant += 1;
                s.add_coef(p, -1);
            }
        }
        Ok(s.labelled(format!("borda:{a}")))
    }

    /// `KT(V, h0) - KT(V, h1)`, the log-likelihood-ratio exponent of `h1` against `h0`.
    pub fn kt_difference(h0: &Ballot, h1: &Ballot) -> Result<Self> {
        h0.check_compatible(h1)?;
        let m = h0.m();
        let r0 = h0.to_relation();
        let r1 = h1.to_relation();
        let mut s = Self::zero(m);
        for (p, _) in pairs(m).enumerate() {
            let (b0, b1) = (r0.pair_bit(p), r1.pair_bit(p));
            if b0 != b1 {
                // V disagrees with h0 and agrees with h1 when I_p = b1
                if b1 {
                    s.constant -= 1;
                    s.add_coef(p, 2);
                } else {
                    s.constant += 1;
                    s.add_coef(p, -2);
                }
            }
        }
        Ok(s.labelled(format!("kt_diff:{:x}|{:x}", r0.bits(), r1.bits())))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn constant(&self) -> i64 {
        self.constant
    }

    pub fn coefficients(&self) -> &[(usize, i64)] {
        &self.coefs
    }

    pub fn evaluate_ballot(&self, v: &Ballot) -> i64 {
        let rel = v.to_relation();
        self.constant
            + self
                .coefs
                .iter()
                .filter(|&&(p, _)| rel.pair_bit(p))
                .map(|&(_, c)| c)
                .sum::<i64>()
    }

    pub fn evaluate(&self, profile: &Profile) -> Result<i64> {
        if profile.m() != self.m {
            return Err(Error::SizeMismatch {
                expected: self.m,
                got: profile.m(),
            });
        }
        Ok(profile
            .entries()
            .iter()
            .map(|(b, c)| *c as i64 * self.evaluate_ballot(b))
            .sum())
    }
}

fn check_alts(m: usize, alts: &[Alt]) -> Result<()> {
    match alts.iter().find(|&&a| a >= m) {
        Some(a) => Err(Error::UnknownAlternative(a.to_string())),
        None => Ok(()),
    }
}

pub(crate) fn validate_above_set(set: &[Alt], a: Alt) -> Result<()> {
    if set.is_empty() {
        return Err(Error::InvalidAboveSet("empty set".into()));
    }
    for (i, &b) in set.iter().enumerate() {
        if b == a {
            return Err(Error::InvalidAboveSet(format!("target {a} is in the set")));
        }
        if set[..i].contains(&b) {
            return Err(Error::InvalidAboveSet(format!("{b} repeated")));
        }
    }
    Ok(())
}

/// Exact distribution of `Σ_{V ∈ P_n} stat(V)` for `n` i.i.d. ballots around `center`.
pub fn statistic_null_distribution(
    model: &Model,
    center: &Ballot,
    stat: &PairLinearStatistic,
    n: u64,
) -> Result<StatisticDistribution> {
    Ok(model.single_ballot_distribution(center, stat)?.n_fold(n as usize))
}

/// Monte Carlo estimate of the single-ballot distribution, convolved `n` times.
/// For Mallows models beyond the enumeration limit.
pub fn approximate_statistic_distribution(
    model: &Model,
    center: &Ballot,
    stat: &PairLinearStatistic,
    n: u64,
    draws: usize,
    seed: u64,
) -> Result<StatisticDistribution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = std::collections::BTreeMap::<i64, usize>::new();
    for _ in 0..draws {
        let v = model.sample_ballot(center, &mut rng)?;
        *counts.entry(stat.evaluate_ballot(&v)).or_default() += 1;
    }
    let single =
        StatisticDistribution::from_pairs(counts.into_iter().map(|(v, c)| (v, c as f64 / draws as f64)));
    Ok(single.n_fold(n as usize))
}
