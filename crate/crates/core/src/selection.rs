//! Winner selection from per-alternative winner or non-winner tests, and the Borda rule.

use rayon::prelude::*;

use crate::distribution::{NullDistribution, Tail, TIE_RELATIVE_TOLERANCE};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::profile::Profile;
use crate::rank::{Alt, BallotKind};
use crate::ump::NullKind;

/// Winner set and the per-alternative score behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub winners: Vec<Alt>,
    /// p-values for the test-based procedures, Borda scores for the Borda rule.
    pub scores: Vec<f64>,
}

/// Tail probabilities of an observed statistic, kept on both sides so that p-values close
/// to one still compare accurately.
#[derive(Debug, Clone, Copy)]
struct TailPair {
    /// `Pr(X at least as extreme as observed)`: the p-value.
    p: f64,
    /// `Pr(X strictly less extreme)` = `1 - p`.
    q: f64,
}

impl TailPair {
    fn new(null: &NullDistribution, x: f64, tail: Tail) -> Self {
        let (above, at, below) = null.split_at(x);
        let (p, q) = match tail {
            Tail::Upper => (above + at, below),
            Tail::Lower => (below + at, above),
        };
        TailPair { p: p.min(1.0), q }
    }

    /// `Less` when `self` has the smaller p-value.
    fn compare(&self, other: &TailPair) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let close = |x: f64, y: f64| (x - y).abs() <= TIE_RELATIVE_TOLERANCE * x.abs().max(y.abs());
        if self.p < 0.5 && other.p < 0.5 {
            if close(self.p, other.p) {
                Equal
            } else {
                self.p.total_cmp(&other.p)
            }
        } else if self.q < 0.5 && other.q < 0.5 {
            if close(self.q, other.q) {
                Equal
            } else {
                other.q.total_cmp(&self.q)
            }
        } else if close(self.p, other.p) {
            Equal
        } else {
            self.p.total_cmp(&other.p)
        }
    }
}

fn check_profile(profile: &Profile, model: &Model) -> Result<()> {
    if profile.is_empty() {
        return Err(Error::EmptyProfile);
    }
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
    Ok(())
}

fn tails(profile: &Profile, model: &Model, kind: NullKind) -> Result<Vec<TailPair>> {
    let m = model.m();
    let null = kind.null_distribution(model, profile.n())?;
    (0..m)
        .into_par_iter()
        .map(|a| {
            let others: Vec<Alt> = (0..m).filter(|&b| b != a).collect();
            let stat = kind.statistic(model, a, &others)?;
            Ok(TailPair::new(&null, stat.evaluate(profile)?, kind.tail()))
        })
        .collect()
}

fn extreme(tails: &[TailPair], smallest: bool) -> Vec<Alt> {
    let mut best = vec![0];
    for a in 1..tails.len() {
        let ord = tails[a].compare(&tails[best[0]]);
        let ord = if smallest { ord } else { ord.reverse() };
        match ord {
            std::cmp::Ordering::Less => best = vec![a],
            std::cmp::Ordering::Equal => best.push(a),
            std::cmp::Ordering::Greater => {}
        }
    }
    best
}

fn winner_kind(model: &Model) -> NullKind {
    match model {
        Model::Mallows(_) => NullKind::Winner,
        Model::Condorcet(_) => NullKind::CondorcetWinner,
    }
}

/// Alternatives whose winner test rejects at the smallest level (minimum p-value).
pub fn select_by_winner_tests(profile: &Profile, model: &Model) -> Result<Selection> {
    check_profile(profile, model)?;
    let t = tails(profile, model, winner_kind(model))?;
    Ok(Selection {
        winners: extreme(&t, true),
        scores: t.iter().map(|x| x.p).collect(),
    })
}

/// Alternatives whose non-winner test (`B` = all others) is hardest to reject
/// (maximum p-value).
pub fn select_by_nonwinner_tests(profile: &Profile, model: &Model) -> Result<Selection> {
    check_profile(profile, model)?;
    let kind = NullKind::NonWinner { above: model.m() - 1 };
    let t = tails(profile, model, kind)?;
    Ok(Selection {
        winners: extreme(&t, false),
        scores: t.iter().map(|x| x.p).collect(),
    })
}

pub fn borda_winner(profile: &Profile) -> Result<Selection> {
    if profile.kind() != BallotKind::Linear {
        return Err(Error::KindMismatch {
            expected: BallotKind::Linear,
            got: profile.kind(),
        });
    }
    if profile.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let scores = profile.borda_scores()?;
    let top = *scores.iter().max().expect("m >= 1");
    Ok(Selection {
        winners: (0..scores.len()).filter(|&a| scores[a] == top).collect(),
        scores: scores.iter().map(|&s| s as f64).collect(),
    })
}

/// Smallest level at which the winner test of `a` rejects, found by bisection over
/// `alpha` on the critical table. Cross-checks the p-value convention.
pub fn minimum_rejecting_alpha(profile: &Profile, model: &Model, a: Alt, iterations: usize) -> Result<f64> {
    check_profile(profile, model)?;
    let kind = winner_kind(model);
    let null = kind.null_distribution(model, profile.n())?;
    let stat = kind.statistic(model, a, &[])?.evaluate(profile)?;
    let tail = kind.tail();
    let integral = null.is_integral();
    // rejects with probability one at level alpha
    let rejects = |alpha: f64| {
        let (k, g) = null.critical_values(alpha, tail);
        let tie = crate::distribution::tied(integral, stat, k);
        let beyond = match tail {
            Tail::Upper => stat > k,
            Tail::Lower => stat < k,
        };
        (beyond && !tie) || (tie && g >= 1.0)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if rejects(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::{Ballot, Ranking};

    #[test]
    fn p7_selection() {
        let p7 = crate::profile::tests::p7();
        let b = borda_winner(&p7).unwrap();
        assert_eq!(b.scores, vec![8.0, 9.0, 4.0]);
        assert_eq!(b.winners, vec![1]);
        let model = Model::mallows(3, 0.5).unwrap();
        assert_eq!(select_by_winner_tests(&p7, &model).unwrap().winners, vec![1]);
        assert_eq!(select_by_nonwinner_tests(&p7, &model).unwrap().winners, vec![1]);
    }

    #[test]
    fn symmetric_profile_ties() {
        let p = Profile::from_ballots(Ranking::all(3).into_iter().map(Ballot::from)).unwrap();
        let model = Model::mallows(3, 0.5).unwrap();
        assert_eq!(select_by_winner_tests(&p, &model).unwrap().winners, vec![0, 1, 2]);
        assert_eq!(select_by_nonwinner_tests(&p, &model).unwrap().winners, vec![0, 1, 2]);
        assert_eq!(borda_winner(&p).unwrap().winners, vec![0, 1, 2]);
    }

    #[test]
    fn bisection_matches_p_value() {
        let p7 = crate::profile::tests::p7();
        let model = Model::mallows(3, 0.5).unwrap();
        let s = select_by_winner_tests(&p7, &model).unwrap();
        for a in 0..3 {
            let b = minimum_rejecting_alpha(&p7, &model, a, 60).unwrap();
            assert!((b - s.scores[a]).abs() < 1e-12, "{a}: {b} vs {}", s.scores[a]);
        }
    }
}
