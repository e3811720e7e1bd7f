use crate::error::{Error, Result};
use crate::rank::{Alt, Ballot, BallotKind, Permutation};

/// A multiset of ballots of one kind over the same `m` alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    m: usize,
    kind: BallotKind,
    entries: Vec<(Ballot, u64)>,
    n: u64,
}

impl Profile {
    pub fn new(m: usize, kind: BallotKind) -> Self {
        Profile {
            m,
            kind,
            entries: Vec::new(),
            n: 0,
        }
    }

    /// Collects ballots; the first ballot fixes `m` and the kind.
    pub fn from_ballots<I>(ballots: I) -> Result<Self>
    where
        I: IntoIterator<Item = Ballot>,
    {
        let mut iter = ballots.into_iter();
        let first = iter.next().ok_or(Error::EmptyProfile)?;
        let mut p = Profile::new(first.m(), first.kind());
        p.push(first, 1)?;
        for b in iter {
            p.push(b, 1)?;
        }
        Ok(p)
    }

    /// Adds `count` copies of a ballot, merging with an equal entry if present.
    pub fn push(&mut self, ballot: Ballot, count: u64) -> Result<()> {
        if ballot.kind() != self.kind {
            return Err(Error::KindMismatch {
                expected: self.kind,
                got: ballot.kind(),
            });
        }
        if ballot.m() != self.m {
            return Err(Error::SizeMismatch {
                expected: self.m,
                got: ballot.m(),
            });
        }
        if count == 0 {
            return Ok(());
        }
        match self.entries.iter_mut().find(|(b, _)| *b == ballot) {
            Some((_, c)) => *c += count,
            None => self.entries.push((ballot, count)),
        }
        self.n += count;
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> BallotKind {
        self.kind
    }

    /// Total number of ballots.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Distinct ballots with their multiplicities, in insertion order.
    pub fn entries(&self) -> &[(Ballot, u64)] {
        &self.entries
    }

    /// Every ballot, repeated by multiplicity.
    pub fn ballots(&self) -> impl Iterator<Item = &Ballot> {
        self.entries
            .iter()
            .flat_map(|(b, c)| std::iter::repeat(b).take(*c as usize))
    }

    pub fn wmg(&self) -> Result<Wmg> {
        if self.is_empty() {
            return Err(Error::EmptyProfile);
        }
        Ok(Wmg::from_profile(self))
    }

    /// Total Borda score per alternative (linear profiles only).
    pub fn borda_scores(&self) -> Result<Vec<u64>> {
        if self.kind != BallotKind::Linear {
            return Err(Error::KindMismatch {
                expected: BallotKind::Linear,
                got: self.kind,
            });
        }
        let mut scores = vec![0u64; self.m];
        for (b, c) in &self.entries {
            let r = b.as_ranking().expect("linear profile");
            for (a, s) in scores.iter_mut().enumerate() {
                *s += c * r.borda(a) as u64;
            }
        }
        Ok(scores)
    }

    pub fn permuted(&self, perm: &Permutation) -> Result<Profile> {
        let mut out = Profile::new(self.m, self.kind);
        for (b, c) in &self.entries {
            out.push(perm.apply(b)?, *c)?;
        }
        Ok(out)
    }

    /// Same multiset of ballots, regardless of entry order.
    pub fn same_multiset(&self, other: &Profile) -> bool {
        self.m == other.m
            && self.kind == other.kind
            && self.n == other.n
            && self
                .entries
                .iter()
                .all(|(b, c)| other.entries.iter().any(|(b2, c2)| b2 == b && c2 == c))
    }
}

/// Weighted majority graph: `w(a, b) = #(a ≻ b) - #(b ≻ a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wmg {
    m: usize,
    n: u64,
    w: Vec<i64>,
}

impl Wmg {
    fn from_profile(p: &Profile) -> Self {
        let m = p.m();
        let mut w = vec![0i64; m * m];
        for (b, c) in p.entries() {
            let c = *c as i64;
            for x in 0..m {
                for y in x + 1..m {
                    let d = c * b.margin(x, y);
                    w[x * m + y] += d;
                    w[y * m + x] -= d;
                }
            }
        }
        Wmg { m, n: p.n(), w }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn weight(&self, a: Alt, b: Alt) -> i64 {
        self.w[a * self.m + b]
    }

    /// `w(B ≻ a) = Σ_{b ∈ B} w(b ≻ a)`.
    pub fn weight_toward(&self, set: &[Alt], a: Alt) -> Result<i64> {
        if a >= self.m {
            return Err(Error::UnknownAlternative(a.to_string()));
        }
        if set.is_empty() {
            return Err(Error::InvalidAboveSet("empty set".into()));
        }
        let mut total = 0;
        for (i, &b) in set.iter().enumerate() {
            if b >= self.m {
                return Err(Error::UnknownAlternative(b.to_string()));
            }
            if b == a {
                return Err(Error::InvalidAboveSet(format!("target {a} is in the set")));
            }
            if set[..i].contains(&b) {
                return Err(Error::InvalidAboveSet(format!("{b} repeated")));
            }
            total += self.weight(b, a);
        }
        Ok(total)
    }

    /// `w(a ≻ others) = Σ_{b ≠ a} w(a ≻ b)`.
    pub fn weight_from(&self, a: Alt) -> i64 {
        (0..self.m).filter(|&b| b != a).map(|b| self.weight(a, b)).sum()
    }
}
