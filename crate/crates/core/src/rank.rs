//! Alternatives, rankings, binary relations and the permutations acting on them.
//!
//! Every ballot is ultimately a vector of pairwise directions. Pairs `{a, b}` with
//! `a < b` are indexed lexicographically, and a direction bit of `1` means `a ≻ b`.

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Integer id of an alternative, in `0..m`.
pub type Alt = usize;

/// Largest number of alternatives a [`BinaryRelation`] can hold (`C(11, 2) = 55` bits).
pub const MAX_RELATION_ALTERNATIVES: usize = 11;

/// Number of unordered pairs over `m` alternatives.
pub fn num_pairs(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Index of the unordered pair `{a, b}` (requires `a < b < m`).
#[inline]
pub fn pair_index(m: usize, a: Alt, b: Alt) -> usize {
    debug_assert!(a < b && b < m);
    a * m - a * (a + 1) / 2 + (b - a - 1)
}

/// All pairs `(a, b)` with `a < b`, in index order.
pub fn pairs(m: usize) -> impl Iterator<Item = (Alt, Alt)> {
    (0..m).flat_map(move |a| (a + 1..m).map(move |b| (a, b)))
}

/// Display names for the alternatives; ids are positions in the list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternativeSet {
    names: Vec<String>,
}

impl AlternativeSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidAlternativeSet("no alternatives".into()));
        }
        for name in &names {
            if name.is_empty() || name.contains(|c: char| c.is_whitespace() || ",>:#".contains(c)) {
                return Err(Error::InvalidAlternativeSet(format!("bad name {name:?}")));
            }
        }
        if let Some(dup) = names.iter().duplicates().next() {
            return Err(Error::InvalidAlternativeSet(format!("duplicate name {dup:?}")));
        }
        Ok(AlternativeSet { names })
    }

    /// `a, b, c, ...` for `m <= 26`, otherwise `a1, a2, ...`.
    pub fn letters(m: usize) -> Self {
        let names = if m <= 26 {
            (0..m).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
        } else {
            (1..=m).map(|i| format!("a{i}")).collect()
        };
        AlternativeSet { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: Alt) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Result<Alt> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownAlternative(name.to_string()))
    }

    /// Parses a comma-separated list of names into ids.
    pub fn ids(&self, list: &str) -> Result<Vec<Alt>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| self.id(s))
            .collect()
    }
}

/// A linear order, most preferred first, with a cached position index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    order: Vec<Alt>,
    pos: Vec<usize>,
}

impl Ranking {
    pub fn new(order: Vec<Alt>) -> Result<Self> {
        let m = order.len();
        let mut pos = vec![usize::MAX; m];
        for (i, &a) in order.iter().enumerate() {
            if a >= m {
                return Err(Error::InvalidRanking(format!("alternative {a} out of range for m={m}")));
            }
            if pos[a] != usize::MAX {
                return Err(Error::InvalidRanking(format!("alternative {a} appears twice")));
            }
            pos[a] = i;
        }
        Ok(Ranking { order, pos })
    }

    pub fn identity(m: usize) -> Self {
        Ranking {
            order: (0..m).collect(),
            pos: (0..m).collect(),
        }
    }

    /// All `m!` rankings in lexicographic order of `order`.
    pub fn all(m: usize) -> Vec<Ranking> {
        (0..m)
            .permutations(m)
            .map(|order| Ranking::new(order).expect("permutation"))
            .collect()
    }

    pub fn m(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[Alt] {
        &self.order
    }

    /// Zero-based position of `a` (0 = top).
    pub fn position(&self, a: Alt) -> usize {
        self.pos[a]
    }

    pub fn prefers(&self, a: Alt, b: Alt) -> bool {
        self.pos[a] < self.pos[b]
    }

    /// Number of alternatives ranked below `a`.
    pub fn borda(&self, a: Alt) -> usize {
        self.m() - 1 - self.pos[a]
    }

    /// Alternatives ranked strictly above `a`.
    pub fn above(&self, a: Alt) -> Vec<Alt> {
        let mut v = self.order[..self.pos[a]].to_vec();
        v.sort_unstable();
        v
    }

    pub fn kendall_tau(&self, other: &Ranking) -> usize {
        debug_assert_eq!(self.m(), other.m());
        let m = self.m();
        let mut d = 0;
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (self.order[i], self.order[j]);
                if other.pos[b] < other.pos[a] {
                    d += 1;
                }
            }
        }
        d
    }

    /// Moves `a` to position `to`, shifting the others.
    pub fn with_moved(&self, a: Alt, to: usize) -> Ranking {
        let mut order: Vec<Alt> = self.order.iter().copied().filter(|&x| x != a).collect();
        order.insert(to, a);
        Ranking::new(order).expect("moved ranking")
    }

    pub fn to_relation(&self) -> BinaryRelation {
        BinaryRelation::from_fn(self.m(), |a, b| self.prefers(a, b))
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.order.iter().join(">"))
    }
}

/// An irreflexive, antisymmetric and total relation stored as one bit per pair.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryRelation {
    m: usize,
    bits: u64,
}

impl BinaryRelation {
    /// Builds from `prefers(a, b)` evaluated for every `a < b`.
    pub fn from_fn(m: usize, mut prefers: impl FnMut(Alt, Alt) -> bool) -> Self {
        assert!(m <= MAX_RELATION_ALTERNATIVES, "at most {MAX_RELATION_ALTERNATIVES} alternatives");
        let mut bits = 0u64;
        for (i, (a, b)) in pairs(m).enumerate() {
            if prefers(a, b) {
                bits |= 1 << i;
            }
        }
        BinaryRelation { m, bits }
    }

    pub fn from_bits(m: usize, bits: u64) -> Result<Self> {
        if m > MAX_RELATION_ALTERNATIVES {
            return Err(Error::InvalidRelation(format!(
                "at most {MAX_RELATION_ALTERNATIVES} alternatives supported"
            )));
        }
        let np = num_pairs(m);
        if np < 64 && bits >> np != 0 {
            return Err(Error::InvalidRelation(format!("bits beyond C({m},2)")));
        }
        Ok(BinaryRelation { m, bits })
    }

    /// Builds from a list of `(winner, loser)` pairs covering every pair exactly once.
    pub fn from_pairs(m: usize, wins: &[(Alt, Alt)]) -> Result<Self> {
        if m > MAX_RELATION_ALTERNATIVES {
            return Err(Error::InvalidRelation(format!(
                "at most {MAX_RELATION_ALTERNATIVES} alternatives supported"
            )));
        }
        let mut seen = vec![false; num_pairs(m)];
        let mut bits = 0u64;
        for &(x, y) in wins {
            if x >= m || y >= m || x == y {
                return Err(Error::InvalidRelation(format!("bad pair ({x}, {y})")));
            }
            let (lo, hi) = (x.min(y), x.max(y));
            let idx = pair_index(m, lo, hi);
            if seen[idx] {
                return Err(Error::InvalidRelation(format!("pair {{{lo}, {hi}}} given twice")));
            }
            seen[idx] = true;
            if x < y {
                bits |= 1 << idx;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let (a, b) = pairs(m).nth(missing).expect("pair");
            return Err(Error::InvalidRelation(format!("pair {{{a}, {b}}} missing")));
        }
        Ok(BinaryRelation { m, bits })
    }

    /// All `2^C(m,2)` relations, in bit order.
    pub fn all(m: usize) -> Vec<BinaryRelation> {
        assert!(m <= 6, "2^C(m,2) relations only materialized for m <= 6");
        (0..1u64 << num_pairs(m)).map(|bits| BinaryRelation { m, bits }).collect()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Direction bit of pair `p` (`true` means the lower id wins).
    pub fn pair_bit(&self, p: usize) -> bool {
        self.bits >> p & 1 == 1
    }

    pub fn prefers(&self, a: Alt, b: Alt) -> bool {
        debug_assert_ne!(a, b);
        if a < b {
            self.pair_bit(pair_index(self.m, a, b))
        } else {
            !self.pair_bit(pair_index(self.m, b, a))
        }
    }

    /// Sets the direction of `{a, b}` to `a ≻ b`.
    pub fn with_preference(mut self, a: Alt, b: Alt) -> Self {
        let (lo, hi) = (a.min(b), a.max(b));
        let idx = pair_index(self.m, lo, hi);
        if a < b {
            self.bits |= 1 << idx;
        } else {
            self.bits &= !(1 << idx);
        }
        self
    }

    pub fn kendall_tau(&self, other: &BinaryRelation) -> usize {
        debug_assert_eq!(self.m, other.m);
        (self.bits ^ other.bits).count_ones() as usize
    }

    /// Alternatives `b` with `b ≻ a`.
    pub fn above(&self, a: Alt) -> Vec<Alt> {
        (0..self.m).filter(|&b| b != a && self.prefers(b, a)).collect()
    }

    /// The ranking this relation encodes, if it is transitive.
    pub fn to_ranking(&self) -> Option<Ranking> {
        let m = self.m;
        let mut order: Vec<Alt> = (0..m).collect();
        order.sort_by_key(|&a| self.above(a).len());
        let r = Ranking::new(order).ok()?;
        (r.to_relation() == *self).then_some(r)
    }
}

impl fmt::Debug for BinaryRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = pairs(self.m).map(|(a, b)| {
            if self.prefers(a, b) {
                format!("{a}>{b}")
            } else {
                format!("{b}>{a}")
            }
        });
        write!(f, "{{{}}}", parts.format(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BallotKind {
    Linear,
    Binary,
}

impl fmt::Display for BallotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BallotKind::Linear => f.write_str("linear"),
            BallotKind::Binary => f.write_str("binary"),
        }
    }
}

/// A single vote or ground-truth parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ballot {
    Linear(Ranking),
    Binary(BinaryRelation),
}

impl Ballot {
    pub fn kind(&self) -> BallotKind {
        match self {
            Ballot::Linear(_) => BallotKind::Linear,
            Ballot::Binary(_) => BallotKind::Binary,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Ballot::Linear(r) => r.m(),
            Ballot::Binary(r) => r.m(),
        }
    }

    pub fn prefers(&self, a: Alt, b: Alt) -> bool {
        match self {
            Ballot::Linear(r) => r.prefers(a, b),
            Ballot::Binary(r) => r.prefers(a, b),
        }
    }

    /// Pairwise margin of this single ballot: `+1` if `a ≻ b`, `-1` otherwise.
    pub fn margin(&self, a: Alt, b: Alt) -> i64 {
        if self.prefers(a, b) {
            1
        } else {
            -1
        }
    }

    /// Sorted list of alternatives preferred to `a`.
    pub fn above(&self, a: Alt) -> Vec<Alt> {
        match self {
            Ballot::Linear(r) => r.above(a),
            Ballot::Binary(r) => r.above(a),
        }
    }

    pub fn as_ranking(&self) -> Option<&Ranking> {
        match self {
            Ballot::Linear(r) => Some(r),
            Ballot::Binary(_) => None,
        }
    }

    pub fn as_relation(&self) -> Option<&BinaryRelation> {
        match self {
            Ballot::Binary(r) => Some(r),
            Ballot::Linear(_) => None,
        }
    }

    pub fn to_relation(&self) -> BinaryRelation {
        match self {
            Ballot::Linear(r) => r.to_relation(),
            Ballot::Binary(r) => *r,
        }
    }

    pub(crate) fn check_compatible(&self, other: &Ballot) -> Result<()> {
        if self.kind() != other.kind() {
            return Err(Error::KindMismatch {
                expected: self.kind(),
                got: other.kind(),
            });
        }
        if self.m() != other.m() {
            return Err(Error::SizeMismatch {
                expected: self.m(),
                got: other.m(),
            });
        }
        Ok(())
    }

    /// Kendall-tau distance without compatibility checks.
    pub(crate) fn kt_unchecked(&self, other: &Ballot) -> usize {
        match (self, other) {
            (Ballot::Linear(x), Ballot::Linear(y)) => x.kendall_tau(y),
            (Ballot::Binary(x), Ballot::Binary(y)) => x.kendall_tau(y),
            _ => unreachable!("kind checked by caller"),
        }
    }
}

impl From<Ranking> for Ballot {
    fn from(r: Ranking) -> Self {
        Ballot::Linear(r)
    }
}

impl From<BinaryRelation> for Ballot {
    fn from(r: BinaryRelation) -> Self {
        Ballot::Binary(r)
    }
}

/// Number of unordered pairs on which `x` and `y` disagree.
pub fn kendall_tau(x: &Ballot, y: &Ballot) -> Result<usize> {
    x.check_compatible(y)?;
    Ok(x.kt_unchecked(y))
}

/// A bijection on alternative ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<Alt>);

impl Permutation {
    pub fn new(map: Vec<Alt>) -> Result<Self> {
        let m = map.len();
        let mut hit = vec![false; m];
        for &x in &map {
            if x >= m || hit[x] {
                return Err(Error::InvalidPermutation(format!("{map:?} is not a bijection on 0..{m}")));
            }
            hit[x] = true;
        }
        Ok(Permutation(map))
    }

    pub fn identity(m: usize) -> Self {
        Permutation((0..m).collect())
    }

    /// The transposition exchanging `a` and `b`.
    pub fn swap(m: usize, a: Alt, b: Alt) -> Self {
        let mut map: Vec<Alt> = (0..m).collect();
        map.swap(a, b);
        Permutation(map)
    }

    /// The relabelling sending ranking `from` onto ranking `to`.
    pub fn between(from: &Ranking, to: &Ranking) -> Self {
        let mut map = vec![0; from.m()];
        for (i, &a) in from.order().iter().enumerate() {
            map[a] = to.order()[i];
        }
        Permutation(map)
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn image(&self, a: Alt) -> Alt {
        self.0[a]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.m()];
        for (a, &b) in self.0.iter().enumerate() {
            inv[b] = a;
        }
        Permutation(inv)
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if self.m() != m {
            return Err(Error::SizeMismatch {
                expected: self.m(),
                got: m,
            });
        }
        Ok(())
    }

    pub fn apply_ranking(&self, r: &Ranking) -> Result<Ranking> {
        self.check_m(r.m())?;
        Ranking::new(r.order().iter().map(|&a| self.0[a]).collect())
    }

    pub fn apply_relation(&self, r: &BinaryRelation) -> Result<BinaryRelation> {
        self.check_m(r.m())?;
        let inv = self.inverse();
        Ok(BinaryRelation::from_fn(r.m(), |a, b| r.prefers(inv.0[a], inv.0[b])))
    }

    pub fn apply(&self, x: &Ballot) -> Result<Ballot> {
        match x {
            Ballot::Linear(r) => self.apply_ranking(r).map(Ballot::Linear),
            Ballot::Binary(r) => self.apply_relation(r).map(Ballot::Binary),
        }
    }

    pub fn apply_set(&self, set: &[Alt]) -> Vec<Alt> {
        let mut v: Vec<Alt> = set.iter().map(|&a| self.0[a]).collect();
        v.sort_unstable();
        v
    }
}
