//! Winner and non-winner tests with exact critical values and p-values, and a registry
//! that exposes them by name.

use std::fmt;
use std::sync::Arc;

use crate::cache::{through_cumulative, DiskCache, TableKey};
use crate::distribution::{NullDistribution, Tail};
use crate::error::{check_alpha, Error, Result};
use crate::models::{validate_above_set, Model, PairLinearStatistic};
use crate::profile::Profile;
use crate::rank::{Alt, Ballot, BallotKind, BinaryRelation, Ranking};
use crate::statistics::{CondorcetWinnerSum, TestStatistic};
use crate::testing::{one_pair_reversals, relation_with_top, Hypothesis, LeastFavorable, Mixture, ThresholdTest};

/// The worst-case null distributions the tests are calibrated against. Each depends only
/// on the model, `n` and (for non-winner tests) `|B|`, so it is computed for `a = 0`,
/// `B = {1..|B|}` and shared across relabelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullKind {
    /// `w(B ≻ a)` under a ranking or relation with `a` on top and `B` next.
    NonWinner { above: usize },
    /// `w(a ≻ others)` under a Mallows ranking with `a` at the bottom.
    Winner,
    /// `Borda_a` of one ballot under a ranking with `a` second.
    Borda,
    /// `Σ_b φ^{w(a≻b)}` under a relation where `a` beats all but one alternative.
    CondorcetWinner,
}

impl NullKind {
    pub fn token(&self) -> String {
        match self {
            NullKind::NonWinner { above } => format!("nonwinner-{above}"),
            NullKind::Winner => "winner".into(),
            NullKind::Borda => "borda".into(),
            NullKind::CondorcetWinner => "condorcet-winner".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "winner" => Ok(NullKind::Winner),
            "borda" => Ok(NullKind::Borda),
            "condorcet-winner" => Ok(NullKind::CondorcetWinner),
            _ => s
                .strip_prefix("nonwinner-")
                .and_then(|k| k.parse().ok())
                .filter(|&k: &usize| k > 0)
                .map(|above| NullKind::NonWinner { above })
                .ok_or_else(|| {
                    Error::Unsupported(format!(
                        "unknown statistic {s:?} (expected nonwinner-K, winner, borda or condorcet-winner)"
                    ))
                }),
        }
    }

    pub fn tail(&self) -> Tail {
        match self {
            NullKind::CondorcetWinner => Tail::Lower,
            _ => Tail::Upper,
        }
    }

    fn check(&self, model: &Model, n: u64) -> Result<()> {
        let m = model.m();
        match (self, model) {
            (NullKind::NonWinner { above }, _) if *above == 0 || *above >= m => {
                Err(Error::InvalidAboveSet(format!("|B| = {above} with m = {m}")))
            }
            (NullKind::Winner | NullKind::Borda, Model::Condorcet(_)) => Err(Error::Unsupported(format!(
                "{} statistic is defined for Mallows' model",
                self.token()
            ))),
            (NullKind::CondorcetWinner, Model::Mallows(_)) => Err(Error::Unsupported(
                "condorcet-winner statistic is defined for Condorcet's model".into(),
            )),
            (NullKind::Borda, _) if n != 1 => {
                Err(Error::Unsupported("the Borda test is only available for a single ballot".into()))
            }
            (_, _) if m < 2 => Err(Error::InvalidHypothesis("need at least two alternatives".into())),
            _ => Ok(()),
        }
    }

    /// The statistic for target `a` and above-set `set` (used by non-winner kinds only).
    pub fn statistic(&self, model: &Model, a: Alt, set: &[Alt]) -> Result<Arc<dyn TestStatistic>> {
        let m = model.m();
        Ok(match self {
            NullKind::NonWinner { .. } => Arc::new(PairLinearStatistic::weight_toward(m, set, a)?),
            NullKind::Winner => Arc::new(PairLinearStatistic::weight_from(m, a)?),
            NullKind::Borda => Arc::new(PairLinearStatistic::borda(m, a)?),
            NullKind::CondorcetWinner => Arc::new(CondorcetWinnerSum::new(m, a, model.phi())?),
        })
    }

    /// The worst-case null parameter `h0*` for target `a` and above-set `set`.
    pub fn worst_case_parameter(&self, model: &Model, a: Alt, set: &[Alt]) -> Result<Ballot> {
        let m = model.m();
        if a >= m {
            return Err(Error::UnknownAlternative(a.to_string()));
        }
        let rest = |skip: &[Alt]| -> Vec<Alt> { (0..m).filter(|x| *x != a && !skip.contains(x)).collect() };
        let ranking = match self {
            NullKind::NonWinner { .. } => {
                let mut sorted = set.to_vec();
                sorted.sort_unstable();
                let mut order = vec![a];
                order.extend(&sorted);
                order.extend(rest(&sorted));
                Ranking::new(order)?
            }
            NullKind::Winner => Ranking::new(rest(&[]).into_iter().chain([a]).collect())?,
            NullKind::Borda => {
                let mut order = rest(&[]);
                order.insert(1, a);
                Ranking::new(order)?
            }
            NullKind::CondorcetWinner => {
                let b = rest(&[])[0];
                let rel = relation_with_top(&Ranking::identity(m).to_relation(), a).with_preference(b, a);
                return Ok(rel.into());
            }
        };
        Ok(match model {
            Model::Mallows(_) => ranking.into(),
            Model::Condorcet(_) => ranking.to_relation().into(),
        })
    }

    fn canonical_set(&self) -> Vec<Alt> {
        match self {
            NullKind::NonWinner { above } => (1..=*above).collect(),
            _ => Vec::new(),
        }
    }

    /// Exact (or, past the enumeration limit, Monte Carlo) null distribution.
    pub fn null_distribution(&self, model: &Model, n: u64) -> Result<NullDistribution> {
        self.check(model, n)?;
        let set = self.canonical_set();
        let stat = self.statistic(model, 0, &set)?;
        let center = self.worst_case_parameter(model, 0, &set)?;
        stat.distribution(model, &center, n)
    }

    /// As [`Self::null_distribution`], reading and filling `cache` for exact results.
    /// Exact results are passed through the table's cumulative form either way, so a test
    /// gives bit-identical output with or without a cache.
    pub fn null_distribution_cached(&self, model: &Model, n: u64, cache: Option<&DiskCache>) -> Result<NullDistribution> {
        let Some(cache) = cache else {
            let d = self.null_distribution(model, n)?;
            return Ok(if d.approximate().is_none() { through_cumulative(&d) } else { d });
        };
        self.check(model, n)?;
        let key = TableKey::new(model, n, self.token());
        let integral = !matches!(self, NullKind::CondorcetWinner);
        if let Some(d) = cache.get(&key, integral) {
            return Ok(d);
        }
        let d = self.null_distribution(model, n)?;
        if d.approximate().is_some() {
            return Ok(d);
        }
        cache.put(&key, &d)?;
        Ok(through_cumulative(&d))
    }
}

fn sorted_set(set: &[Alt], a: Alt, m: usize) -> Result<Vec<Alt>> {
    if a >= m {
        return Err(Error::UnknownAlternative(a.to_string()));
    }
    if let Some(b) = set.iter().find(|&&b| b >= m) {
        return Err(Error::UnknownAlternative(b.to_string()));
    }
    validate_above_set(set, a)?;
    let mut s = set.to_vec();
    s.sort_unstable();
    Ok(s)
}

fn require(model: &Model, kind: BallotKind) -> Result<()> {
    if model.kind() != kind {
        return Err(Error::KindMismatch {
            expected: kind,
            got: model.kind(),
        });
    }
    Ok(())
}

fn build(kind: NullKind, model: &Model, a: Alt, set: &[Alt], alpha: f64, n: u64, cache: Option<&DiskCache>) -> Result<ThresholdTest> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::EmptyProfile);
    }
    let set = match kind {
        NullKind::NonWinner { .. } => sorted_set(set, a, model.m())?,
        _ => {
            if a >= model.m() {
                return Err(Error::UnknownAlternative(a.to_string()));
            }
            Vec::new()
        }
    };
    let kind = match kind {
        NullKind::NonWinner { .. } => NullKind::NonWinner { above: set.len() },
        k => k,
    };
    let null = kind.null_distribution_cached(model, n, cache)?;
    let stat = kind.statistic(model, a, &set)?;
    ThresholdTest::calibrate(stat, kind.tail(), null, alpha)
}

/// Mallows non-winner test `f_{α,a,B}`: `H0 = L_{a≻others}` against `H1 = L_{B≻a}`,
/// rejecting when `w(B ≻ a)` is large.
pub fn mallows_nonwinner_test(a: Alt, set: &[Alt], alpha: f64, model: &Model, n: u64) -> Result<ThresholdTest> {
    require(model, BallotKind::Linear)?;
    build(NullKind::NonWinner { above: set.len() }, model, a, set, alpha, n, None)
}

/// Mallows winner test `f_{α,a}`: `H0 = L_{others≻a}` against `H1 = L_{a≻others}`,
/// rejecting when `w(a ≻ others) = 2·Borda_a - n(m-1)` is large.
pub fn mallows_winner_test(a: Alt, alpha: f64, model: &Model, n: u64) -> Result<ThresholdTest> {
    require(model, BallotKind::Linear)?;
    build(NullKind::Winner, model, a, &[], alpha, n, None)
}

/// Single-ballot Borda test `f̄_{α,a}` of `H0 = ℒ(𝒜) \ L_{a≻others}` against `L_{a≻others}`.
pub fn mallows_borda_test(a: Alt, alpha: f64, model: &Model, n: u64) -> Result<ThresholdTest> {
    require(model, BallotKind::Linear)?;
    build(NullKind::Borda, model, a, &[], alpha, n, None)
}

/// Condorcet non-winner test `g_{α,a,B}`.
pub fn condorcet_nonwinner_test(a: Alt, set: &[Alt], alpha: f64, model: &Model, n: u64) -> Result<ThresholdTest> {
    require(model, BallotKind::Binary)?;
    build(NullKind::NonWinner { above: set.len() }, model, a, set, alpha, n, None)
}

/// Condorcet winner test `g_{α,a}` of `H0 = ℬ(𝒜) \ R_{a≻others}` against `R_{a≻others}`.
/// Rejects when `S = Σ_{b≠a} φ^{w(a≻b)}` is small, i.e. `(m-1)/S` is large.
pub fn condorcet_winner_test(a: Alt, alpha: f64, model: &Model, n: u64) -> Result<ThresholdTest> {
    require(model, BallotKind::Binary)?;
    build(NullKind::CondorcetWinner, model, a, &[], alpha, n, None)
}

/// Least favorable distribution of the Condorcet winner test at `h1`: uniform over the
/// `m-1` relations that agree with `h1` except that one pair `{a, b}` is reversed.
pub fn condorcet_winner_least_favorable(a: Alt, h1: &BinaryRelation) -> Result<LeastFavorable> {
    if a >= h1.m() {
        return Err(Error::UnknownAlternative(a.to_string()));
    }
    Mixture::uniform(one_pair_reversals(h1, a).into_iter().map(Ballot::from).collect())
}

/// Answer of the non-winner characterization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UmpExistence {
    /// Every alternative parameter ranks exactly this set above the target.
    Yes(Vec<Alt>),
    /// Two alternative parameters with different above-sets.
    No(Ballot, Ballot),
}

/// A UMP non-winner test against `h1` exists iff all of `h1` share one above-set.
pub fn nonwinner_ump_exists(a: Alt, h1: &Hypothesis) -> Result<UmpExistence> {
    let first = &h1.params()[0];
    if a >= first.m() {
        return Err(Error::UnknownAlternative(a.to_string()));
    }
    if let Some(p) = h1.params().iter().find(|p| p.above(a).is_empty()) {
        return Err(Error::InvalidHypothesis(format!("{p:?} puts the target on top, so it lies in H0")));
    }
    let set = first.above(a);
    Ok(match h1.params().iter().find(|p| p.above(a) != set) {
        Some(other) => UmpExistence::No(first.clone(), other.clone()),
        None => UmpExistence::Yes(set),
    })
}

pub fn mallows_nonwinner_ump_exists(a: Alt, h1: &Hypothesis) -> Result<UmpExistence> {
    if h1.kind() != BallotKind::Linear {
        return Err(Error::KindMismatch {
            expected: BallotKind::Linear,
            got: h1.kind(),
        });
    }
    nonwinner_ump_exists(a, h1)
}

pub fn condorcet_nonwinner_ump_exists(a: Alt, h1: &Hypothesis) -> Result<UmpExistence> {
    if h1.kind() != BallotKind::Binary {
        return Err(Error::KindMismatch {
            expected: BallotKind::Binary,
            got: h1.kind(),
        });
    }
    nonwinner_ump_exists(a, h1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Reject,
    Retain,
    /// On the threshold: reject with this probability.
    Randomized(f64),
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Reject => write!(f, "reject"),
            Decision::Retain => write!(f, "retain"),
            Decision::Randomized(g) => write!(f, "randomized({g})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub gamma: f64,
    pub tail: Tail,
    pub decision: Decision,
    pub p_value: f64,
    pub alpha: f64,
    pub model: String,
    /// Monte Carlo draws behind the null distribution, when it is not exact.
    pub approximate: Option<usize>,
}

/// Runs `test` on `profile`.
pub fn run(name: &str, test: &ThresholdTest, profile: &Profile, model: &Model) -> Result<TestReport> {
    if profile.kind() != model.kind() {
        return Err(Error::KindMismatch {
            expected: model.kind(),
            got: profile.kind(),
        });
    }
    if profile.m() != model.m() {
        return Err(Error::SizeMismatch {
            expected: model.m(),
            got: profile.m(),
        });
    }
    let stat = test.statistic().evaluate(profile)?;
    let r = test.decide(stat);
    let decision = if r == 1.0 && !crate::distribution::tied(test.statistic().is_integral(), stat, test.threshold()) {
        Decision::Reject
    } else if r == 0.0 {
        Decision::Retain
    } else {
        Decision::Randomized(r)
    };
    Ok(TestReport {
        test: name.to_string(),
        statistic: stat,
        threshold: test.threshold(),
        gamma: test.gamma(),
        tail: test.tail(),
        decision,
        p_value: test.p_value(stat),
        alpha: test.alpha(),
        model: format!("{model:?}"),
        approximate: test.null().approximate(),
    })
}

/// What a test family needs to build a test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestRequest {
    pub model: Model,
    pub target: Alt,
    /// Non-winner families only; defaults to every other alternative.
    pub above_set: Option<Vec<Alt>>,
    pub alpha: f64,
    pub n: u64,
}

impl TestRequest {
    fn set(&self) -> Vec<Alt> {
        self.above_set
            .clone()
            .unwrap_or_else(|| (0..self.model.m()).filter(|&b| b != self.target).collect())
    }
}

pub trait TestFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// `"mallows"` or `"condorcet"`.
    fn model(&self) -> &'static str;

    fn null_kind(&self, req: &TestRequest) -> NullKind;

    fn build(&self, req: &TestRequest, cache: Option<&DiskCache>) -> Result<ThresholdTest>;
}

struct Standard {
    name: &'static str,
    description: &'static str,
    model: &'static str,
    nonwinner: bool,
    kind: NullKind,
}

impl TestFamily for Standard {
    fn name(&self) -> &'static str {
        self.name
    }

    fn description(&self) -> &'static str {
        self.description
    }

    fn model(&self) -> &'static str {
        self.model
    }

    fn null_kind(&self, req: &TestRequest) -> NullKind {
        if self.nonwinner {
            NullKind::NonWinner { above: req.set().len() }
        } else {
            self.kind
        }
    }

    fn build(&self, req: &TestRequest, cache: Option<&DiskCache>) -> Result<ThresholdTest> {
        if req.model.name() != self.model {
            return Err(Error::Unsupported(format!("{} needs the {} model", self.name, self.model)));
        }
        if !self.nonwinner && req.above_set.is_some() {
            return Err(Error::Unsupported(format!("{} takes no above-set", self.name)));
        }
        build(self.null_kind(req), &req.model, req.target, &req.set(), req.alpha, req.n, cache)
    }
}

/// Test families selectable by name.
pub struct Registry {
    families: Vec<Box<dyn TestFamily>>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::standard()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry { families: Vec::new() }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        let std = |name, description, model, nonwinner, kind| {
            Box::new(Standard {
                name,
                description,
                model,
                nonwinner,
                kind,
            })
        };
        r.register(std(
            "mallows-nonwinner",
            "H0: target ranked first; rejects for large w(B > target)",
            "mallows",
            true,
            NullKind::NonWinner { above: 1 },
        ));
        r.register(std(
            "mallows-winner",
            "H0: target ranked last; rejects for large w(target > others)",
            "mallows",
            false,
            NullKind::Winner,
        ));
        r.register(std(
            "mallows-borda",
            "single ballot, H0: target not first; rejects for large Borda score",
            "mallows",
            false,
            NullKind::Borda,
        ));
        r.register(std(
            "condorcet-nonwinner",
            "H0: target beats everyone; rejects for large w(B > target)",
            "condorcet",
            true,
            NullKind::NonWinner { above: 1 },
        ));
        r.register(std(
            "condorcet-winner",
            "H0: target does not beat everyone; rejects for small sum of phi^w(target > b)",
            "condorcet",
            false,
            NullKind::CondorcetWinner,
        ));
        r
    }

    /// Adds a family, replacing any family of the same name.
    pub fn register(&mut self, family: Box<dyn TestFamily>) {
        self.families.retain(|f| f.name() != family.name());
        self.families.push(family);
    }

    pub fn get(&self, name: &str) -> Result<&dyn TestFamily> {
        self.families
            .iter()
            .find(|f| f.name() == name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::Unsupported(format!("no test family named {name:?} (known: {})", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.iter().map(|f| f.name()).collect()
    }

    pub fn families(&self) -> impl Iterator<Item = &dyn TestFamily> {
        self.families.iter().map(|f| f.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;
    use crate::testing::{size, CriticalFunction};

    #[test]
    fn p7_statistics_and_decisions() {
        let p7 = crate::profile::tests::p7();
        let model = Model::mallows(3, 0.5).unwrap();
        let t = mallows_nonwinner_test(0, &[1, 2], 0.05, &model, 7).unwrap();
        let r = run("mallows-nonwinner", &t, &p7, &model).unwrap();
        assert_eq!(r.statistic, -2.0);
        assert_eq!(r.decision, Decision::Retain);
        let t = mallows_winner_test(0, 0.05, &model, 7).unwrap();
        assert_eq!(run("mallows-winner", &t, &p7, &model).unwrap().statistic, 2.0);
    }

    #[test]
    fn worst_case_sizes() {
        let model = Model::mallows(4, 0.6).unwrap();
        for alpha in [0.05, 0.3] {
            let t = mallows_nonwinner_test(1, &[0, 3], alpha, &model, 2).unwrap();
            let h0 = Hypothesis::top(&model, 1).unwrap();
            let (s, _) = size(&t, &h0, &model, 2).unwrap();
            assert!((s - alpha).abs() < 1e-10);
            let t = mallows_borda_test(2, alpha, &model, 1).unwrap();
            let h0 = Hypothesis::top(&model, 2).unwrap().complement(&model).unwrap();
            let (s, at) = size(&t, &h0, &model, 1).unwrap();
            assert!((s - alpha).abs() < 1e-10);
            assert_eq!(at.as_ranking().unwrap().position(2), 1);
        }
        let cm = Model::condorcet(3, 0.4).unwrap();
        let t = condorcet_winner_test(1, 0.2, &cm, 2).unwrap();
        let h0 = Hypothesis::top(&cm, 1).unwrap().complement(&cm).unwrap();
        let (s, _) = size(&t, &h0, &cm, 2).unwrap();
        assert!((s - 0.2).abs() < 1e-10);
        assert!(t.rejection_probability(&cm, &h0.params()[0], 2).unwrap() <= 0.2 + 1e-10);
    }

    #[test]
    fn single_pair_condorcet() {
        let phi = 0.3;
        let model = Model::condorcet(2, phi).unwrap();
        let d = NullKind::NonWinner { above: 1 }.null_distribution(&model, 1).unwrap();
        assert_eq!(d.values(), &[-1.0, 1.0]);
        assert!((d.probs()[1] - phi / (1.0 + phi)).abs() < 1e-15);
    }

    #[test]
    fn characterization() {
        let model = Model::mallows(3, 0.5).unwrap();
        let r = |o: Vec<usize>| Ballot::from(Ranking::new(o).unwrap());
        let h1 = Hypothesis::new(vec![r(vec![1, 0, 2]), r(vec![2, 0, 1])]).unwrap();
        assert!(matches!(mallows_nonwinner_ump_exists(0, &h1).unwrap(), UmpExistence::No(..)));
        let h1 = Hypothesis::bottom(&model, 0).unwrap();
        assert_eq!(mallows_nonwinner_ump_exists(0, &h1).unwrap(), UmpExistence::Yes(vec![1, 2]));
        let bad = Hypothesis::new(vec![r(vec![0, 1, 2])]).unwrap();
        assert!(mallows_nonwinner_ump_exists(0, &bad).is_err());
        assert!(condorcet_nonwinner_ump_exists(0, &h1).is_err());
    }

    #[test]
    fn registry_lookup() {
        let reg = Registry::standard();
        assert_eq!(reg.names().len(), 5);
        let req = TestRequest {
            model: Model::condorcet(3, 0.5).unwrap(),
            target: 0,
            above_set: None,
            alpha: 0.1,
            n: 3,
        };
        let t = reg.get("condorcet-winner").unwrap().build(&req, None).unwrap();
        assert_eq!(t.tail(), Tail::Lower);
        assert!(reg.get("mallows-winner").unwrap().build(&req, None).is_err());
        assert!(reg.get("nope").is_err());
        let top: Ballot = BinaryRelation::from_fn(3, |x, y| x < y).into();
        let p = Profile::from_ballots(vec![top; 3]).unwrap();
        assert_eq!(t.value(&p).unwrap(), 1.0);
    }
}
