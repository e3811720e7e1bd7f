//! Plain-text ballot files.
//!
//! ```text
//! # seven diners
//! alts: a,b,c
//! 3: a>b>c
//! 3: b>c>a
//! 1: a>c>b
//! ```
//!
//! Binary-relation ballots list every pair once: `2: a>b, c>a, b>c`. The kind is
//! inferred from the first ballot unless a `kind: linear|binary` header says otherwise
//! (needed for binary relations over two alternatives).

use std::fmt::Write as _;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::rank::{num_pairs, pairs, AlternativeSet, Ballot, BallotKind, BinaryRelation, Ranking};

/// A parsed ballot file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallotFile {
    pub alternatives: AlternativeSet,
    pub profile: Profile,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse(text: &str) -> Result<BallotFile> {
    let mut alternatives: Option<AlternativeSet> = None;
    let mut declared: Option<BallotKind> = None;
    let mut profile: Option<Profile> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("alts:") {
            if alternatives.is_some() {
                return Err(parse_err(line_no, "duplicate alts header"));
            }
            let names: Vec<&str> = rest.split(',').map(str::trim).collect();
            let set = AlternativeSet::new(names).map_err(|e| parse_err(line_no, e.to_string()))?;
            alternatives = Some(set);
            continue;
        }
        if let Some(rest) = line.strip_prefix("kind:") {
            if profile.is_some() {
                return Err(parse_err(line_no, "`kind:` header after ballots"));
            }
            declared = Some(match rest.trim() {
                "linear" => BallotKind::Linear,
                "binary" => BallotKind::Binary,
                other => return Err(parse_err(line_no, format!("unknown kind {other:?}"))),
            });
            continue;
        }
        let alts = alternatives
            .as_ref()
            .ok_or_else(|| parse_err(line_no, "ballot before the `alts:` header"))?;

        let (count, body) = line
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, "expected `count: ballot`"))?;
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad count {:?}", count.trim())))?;
        if count == 0 {
            return Err(parse_err(line_no, "count must be positive"));
        }
        let hint = declared.or(profile.as_ref().map(Profile::kind));
        let ballot = parse_ballot(alts, body.trim(), hint).map_err(|e| match e {
            Error::Parse { message, .. } => parse_err(line_no, message),
            other => parse_err(line_no, other.to_string()),
        })?;

        let p = profile.get_or_insert_with(|| Profile::new(alts.len(), ballot.kind()));
        p.push(ballot, count).map_err(|e| parse_err(line_no, e.to_string()))?;
    }

    let alternatives = alternatives.ok_or_else(|| parse_err(0, "missing `alts:` header"))?;
    let profile = profile.ok_or_else(|| parse_err(0, "no ballots"))?;
    Ok(BallotFile {
        alternatives,
        profile,
    })
}

/// Parses one ballot body (`a>b>c` or `a>b, c>a, b>c`).
pub fn parse_ballot(alts: &AlternativeSet, body: &str, kind: Option<BallotKind>) -> Result<Ballot> {
    let m = alts.len();
    let kind = kind.unwrap_or(if body.contains(',') {
        BallotKind::Binary
    } else {
        BallotKind::Linear
    });
    if kind == BallotKind::Binary {
        let mut wins = Vec::new();
        for part in body.split(',') {
            let (x, y) = part
                .split_once('>')
                .ok_or_else(|| parse_err(0, format!("bad pair {:?}", part.trim())))?;
            if y.contains('>') {
                return Err(parse_err(0, format!("bad pair {:?}", part.trim())));
            }
            wins.push((alts.id(x.trim())?, alts.id(y.trim())?));
        }
        if wins.len() != num_pairs(m) {
            return Err(parse_err(
                0,
                format!("binary relation needs all {} pairs, got {}", num_pairs(m), wins.len()),
            ));
        }
        return Ok(BinaryRelation::from_pairs(m, &wins)?.into());
    }
    let order = body
        .split('>')
        .map(|s| alts.id(s.trim()))
        .collect::<Result<Vec<_>>>()?;
    if order.len() != m {
        return Err(parse_err(0, format!("ranking lists {} of {m} alternatives", order.len())));
    }
    Ok(Ranking::new(order)?.into())
}

pub fn format_ballot(alts: &AlternativeSet, ballot: &Ballot) -> String {
    match ballot {
        Ballot::Linear(r) => r.order().iter().map(|&a| alts.name(a)).join(">"),
        Ballot::Binary(rel) => pairs(rel.m())
            .map(|(a, b)| {
                let (x, y) = if rel.prefers(a, b) { (a, b) } else { (b, a) };
                format!("{}>{}", alts.name(x), alts.name(y))
            })
            .join(", "),
    }
}

pub fn serialize(file: &BallotFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alts: {}", file.alternatives.names().join(","));
    if file.profile.kind() == BallotKind::Binary {
        let _ = writeln!(out, "kind: binary");
    }
    for (b, c) in file.profile.entries() {
        let _ = writeln!(out, "{c}: {}", format_ballot(&file.alternatives, b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const P7: &str = "# seven diners\nalts: a,b,c\n3: a>b>c\n3: b>c>a\n\n1: a>c>b\n";

    #[test]
    fn parses_rankings() {
        let f = parse(P7).unwrap();
        assert_eq!(f.profile.n(), 7);
        assert_eq!(f.profile.entries().len(), 3);
        let g = f.profile.wmg().unwrap();
        assert_eq!(g.weight(1, 2), 5);
    }

    #[test]
    fn parses_relations() {
        let f = parse("alts: a,b,c\n2: a>b, c>a, b>c\n1: b>a, a>c, b>c\n").unwrap();
        assert_eq!(f.profile.kind(), BallotKind::Binary);
        assert_eq!(f.profile.n(), 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("alts: a,b,c\n1: a>b>c\n2: a>b>x\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let e = parse("alts: a,b,c\n1: a>b\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse("1: a>b\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse("alts: a,b,c\nzero: a>b>c\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse("alts: a,b,c\n1: a>b, b>c\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse("alts: a,b,c\n1: a>b>c\n1: a>b, b>c, a>c\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn serialize_round_trip() {
        let f = parse(P7).unwrap();
        let again = parse(&serialize(&f)).unwrap();
        assert_eq!(f, again);
        let g = parse("alts: x,y,z\n2: x>y, z>x, y>z\n").unwrap();
        assert_eq!(parse(&serialize(&g)).unwrap(), g);
        let two = parse("alts: x,y\nkind: binary\n2: y>x\n").unwrap();
        assert_eq!(two.profile.kind(), BallotKind::Binary);
        assert_eq!(parse(&serialize(&two)).unwrap(), two);
    }
}
