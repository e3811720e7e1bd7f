//! Brute-force most powerful tests by linear programming over an enumerated sample space.

use std::sync::Arc;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{check_alpha, Error, Result};
use crate::models::Model;
use crate::rank::Ballot;
use crate::simplex::{maximize, rational, LpStatus as SimplexStatus, Scalar};
use crate::space::ProfileSpace;
use crate::testing::{GeneralTest, Hypothesis, LeastFavorable, Mixture};

/// Largest number of ordered profiles the dense LP accepts.
pub const LP_VARIABLE_LIMIT: usize = 4096;
/// Largest number of variables for the exact rational re-solve.
pub const EXACT_VARIABLE_LIMIT: usize = 200;
/// Power shortfall tolerated by the UMP feasibility check.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Duals at or below this are treated as zero.
const DUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    /// Optimal power at `h1`.
    pub power: f64,
    pub test: GeneralTest,
    /// Dual weight of each size constraint, in `H0` order.
    pub duals: Vec<(Ballot, f64)>,
    /// Size of the optimal test at each member of `H0`.
    pub sizes: Vec<f64>,
    pub alpha: f64,
}

fn lp_space(model: &Model, n: u64) -> Result<Arc<ProfileSpace>> {
    let space = ProfileSpace::new(model, n)?;
    if space.len() > LP_VARIABLE_LIMIT {
        return Err(Error::EnumerationLimit {
            what: "LP variables (ordered profiles)".into(),
            needed: space.len() as u128,
            limit: LP_VARIABLE_LIMIT as u128,
        });
    }
    Ok(Arc::new(space))
}

fn check_inputs(h0: &Hypothesis, h1: &Ballot, model: &Model) -> Result<()> {
    if h0.kind() != model.kind() || h0.m() != model.m() || h1.kind() != model.kind() || h1.m() != model.m() {
        return Err(Error::InvalidHypothesis("parameters do not match the model".into()));
    }
    if h0.contains(h1) {
        return Err(Error::InvalidHypothesis(format!("{h1:?} is in H0")));
    }
    Ok(())
}

/// Maximizes `Σ π_h1(P) f(P)` subject to `Σ π_h0(P) f(P) ≤ α` for all `h0 ∈ H0` and
/// `0 ≤ f ≤ 1`, over ordered `n`-profiles.
pub fn mp_test_lp(h0: &Hypothesis, h1: &Ballot, alpha: f64, model: &Model, n: u64) -> Result<LpResult> {
    check_alpha(alpha)?;
    check_inputs(h0, h1, model)?;
    let space = lp_space(model, n)?;
    mp_test_lp_in(&space, h0, h1, alpha)
}

/// [`mp_test_lp`] on an already enumerated space.
pub fn mp_test_lp_in(space: &Arc<ProfileSpace>, h0: &Hypothesis, h1: &Ballot, alpha: f64) -> Result<LpResult> {
    check_alpha(alpha)?;
    let n_vars = space.len();
    let p1 = space.probabilities(h1)?;
    let p0: Vec<Vec<f64>> = h0.params().iter().map(|h| space.probabilities(h)).collect::<Result<_>>()?;
    let mut a = p0.clone();
    let mut b = vec![alpha; p0.len()];
    for j in 0..n_vars {
        let mut row = vec![0.0; n_vars];
        row[j] = 1.0;
        a.push(row);
        b.push(1.0);
    }
    let sol = maximize(&p1, &a, &b)?;
    if sol.status != SimplexStatus::Optimal {
        return Err(Error::Numerical("bounded LP reported unbounded".into()));
    }
    let values: Vec<f64> = sol.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let sizes = p0
        .iter()
        .map(|p| p.iter().zip(&values).map(|(x, y)| x * y).sum())
        .collect();
    let power = p1.iter().zip(&values).map(|(x, y)| x * y).sum();
    let duals = h0
        .params()
        .iter()
        .cloned()
        .zip(sol.duals.iter().map(|d| d.max(0.0)))
        .collect();
    Ok(LpResult {
        status: LpStatus::Optimal,
        power,
        test: GeneralTest::new(space.clone(), values)?,
        duals,
        sizes,
        alpha,
    })
}

/// Exact optimum and size-constraint duals of [`mp_test_lp`], re-solved over the rationals
/// (probabilities are taken at their exact binary values).
#[derive(Debug, Clone)]
pub struct ExactLp {
    pub power: BigRational,
    pub duals: Vec<BigRational>,
}

pub fn mp_test_lp_exact(h0: &Hypothesis, h1: &Ballot, alpha: f64, model: &Model, n: u64) -> Result<ExactLp> {
    check_alpha(alpha)?;
    check_inputs(h0, h1, model)?;
    let space = lp_space(model, n)?;
    let n_vars = space.len();
    if n_vars > EXACT_VARIABLE_LIMIT {
        return Err(Error::EnumerationLimit {
            what: "exact LP variables".into(),
            needed: n_vars as u128,
            limit: EXACT_VARIABLE_LIMIT as u128,
        });
    }
    let conv = |v: Vec<f64>| v.into_iter().map(rational).collect::<Result<Vec<_>>>();
    let p1 = conv(space.probabilities(h1)?)?;
    let mut a = Vec::new();
    for h in h0.params() {
        a.push(conv(space.probabilities(h)?)?);
    }
    let k = a.len();
    let alpha_q = rational(alpha)?;
    let mut b = vec![alpha_q; k];
    for j in 0..n_vars {
        let mut row = vec![<BigRational as Scalar>::zero(); n_vars];
        row[j] = <BigRational as Scalar>::one();
        a.push(row);
        b.push(<BigRational as Scalar>::one());
    }
    let sol = maximize(&p1, &a, &b)?;
    Ok(ExactLp {
        power: sol.objective,
        duals: sol.duals[..k].to_vec(),
    })
}

/// Outcome of the UMP feasibility check.
#[derive(Debug, Clone)]
pub enum UmpVerdict {
    /// One level-α test reaches `β(h1) - 1e-9` at every `h1`.
    Exists(GeneralTest),
    /// No level-α test does; `shortfall = max_f min_h1 (β(h1) - power(f, h1))`.
    NotExists(NonExistence),
}

impl UmpVerdict {
    pub fn exists(&self) -> bool {
        matches!(self, UmpVerdict::Exists(_))
    }
}

#[derive(Debug, Clone)]
pub struct NonExistence {
    pub alpha: f64,
    pub shortfall: f64,
    /// Most powerful power `β(h1)` for each member of `H1`.
    pub betas: Vec<(Ballot, f64)>,
}

/// Decides whether a level-`alpha` UMP test of `H0` against `H1` exists.
pub fn ump_exists_lp(h0: &Hypothesis, h1: &Hypothesis, alpha: f64, model: &Model, n: u64) -> Result<UmpVerdict> {
    check_alpha(alpha)?;
    h0.check_disjoint(h1)?;
    for h in h1.params() {
        check_inputs(h0, h, model)?;
    }
    let space = lp_space(model, n)?;
    let betas: Vec<(Ballot, f64)> = h1
        .params()
        .par_iter()
        .map(|h| Ok((h.clone(), mp_test_lp_in(&space, h0, h, alpha)?.power)))
        .collect::<Result<_>>()?;
    let n_vars = space.len();
    // variables: f(P) for each point, then t' = t + 1 >= 0; maximize t'
    let mut c = vec![0.0; n_vars + 1];
    c[n_vars] = 1.0;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for h in h0.params() {
        let mut row = space.probabilities(h)?;
        row.push(0.0);
        a.push(row);
        b.push(alpha);
    }
    for (h, beta) in &betas {
        let mut row: Vec<f64> = space.probabilities(h)?.into_iter().map(|p| -p).collect();
        row.push(1.0);
        a.push(row);
        b.push((1.0 - beta).max(0.0));
    }
    for j in 0..n_vars {
        let mut row = vec![0.0; n_vars + 1];
        row[j] = 1.0;
        a.push(row);
        b.push(1.0);
    }
    let sol = maximize(&c, &a, &b)?;
    if sol.status != SimplexStatus::Optimal {
        return Err(Error::Numerical("bounded LP reported unbounded".into()));
    }
    let shortfall = 1.0 - sol.objective;
    if shortfall <= FEASIBILITY_TOLERANCE {
        let values = sol.x[..n_vars].iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(UmpVerdict::Exists(GeneralTest::new(space, values)?))
    } else {
        Ok(UmpVerdict::NotExists(NonExistence { alpha, shortfall, betas }))
    }
}

/// Normalized duals of the binding size constraints.
///
/// When the optimal dual is not unique this is whichever one the simplex stops at, and the
/// likelihood ratio test of the returned mixture (ties randomized uniformly) can exceed
/// `alpha` somewhere in `H0`. Check with [`crate::testing::verify_least_favorable`].
pub fn extract_least_favorable(result: &LpResult) -> Result<LeastFavorable> {
    if result.status != LpStatus::Optimal {
        return Err(Error::DegenerateDual("LP not solved to optimality".into()));
    }
    let total: f64 = result.duals.iter().map(|(_, d)| d).filter(|d| **d > DUAL_FLOOR).sum();
    if total <= DUAL_FLOOR {
        return Err(Error::DegenerateDual("every size constraint has a zero dual".into()));
    }
    Mixture::new(
        result
            .duals
            .iter()
            .filter(|(_, d)| *d > DUAL_FLOOR)
            .map(|(h, d)| (h.clone(), d / total))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::Ranking;
    use crate::testing::{np_lr_test, CriticalFunction};

    fn r(order: &[usize]) -> Ballot {
        Ranking::new(order.to_vec()).unwrap().into()
    }

    #[test]
    fn simple_hypothesis_matches_neyman_pearson() {
        let model = Model::mallows(3, 0.5).unwrap();
        let (h0, h1) = (r(&[1, 0, 2]), r(&[0, 1, 2]));
        for n in 1..=2 {
            for alpha in [0.01, 0.05, 0.1, 0.3] {
                let lp = mp_test_lp(&Hypothesis::new(vec![h0.clone()]).unwrap(), &h1, alpha, &model, n).unwrap();
                let np = np_lr_test(&h0, &h1, alpha, &model, n).unwrap();
                assert!((lp.power - np.rejection_probability(&model, &h1, n).unwrap()).abs() < 1e-9);
                let lf = extract_least_favorable(&lp).unwrap();
                assert_eq!(lf.items(), &[(h0.clone(), 1.0)]);
            }
        }
    }

    #[test]
    fn exact_resolve_agrees() {
        let model = Model::mallows(3, 0.5).unwrap();
        let h1 = r(&[0, 1, 2]);
        let h0 = Hypothesis::new(vec![h1.clone()]).unwrap().complement(&model).unwrap();
        let f = mp_test_lp(&h0, &h1, 0.2, &model, 1).unwrap();
        let e = mp_test_lp_exact(&h0, &h1, 0.2, &model, 1).unwrap();
        assert!((Scalar::to_f64(&e.power) - f.power).abs() < 1e-12);
    }

    #[test]
    fn singleton_alternative_always_exists() {
        let model = Model::mallows(3, 0.7).unwrap();
        let h1 = r(&[0, 1, 2]);
        let h0 = Hypothesis::new(vec![h1.clone()]).unwrap().complement(&model).unwrap();
        let v = ump_exists_lp(&h0, &Hypothesis::new(vec![h1]).unwrap(), 0.1, &model, 1).unwrap();
        assert!(v.exists());
    }
}
