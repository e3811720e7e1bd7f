//! Dense tableau simplex with Bland's rule, generic over `f64` and exact rationals.
//!
//! Solves `max c·x` subject to `A x ≤ b`, `x ≥ 0`, with `b ≥ 0` so the slack basis is
//! feasible from the start.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

const MAX_PIVOTS: usize = 200_000;

pub trait Scalar:
    Clone + Debug + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Strictly positive beyond round-off.
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn approx_eq(&self, other: &Self) -> bool;
    fn to_f64(&self) -> f64;
}

const EPS: f64 = 1e-12;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_pos(&self) -> bool {
        *self > EPS
    }
    fn is_neg(&self) -> bool {
        *self < -EPS
    }
    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= EPS * self.abs().max(other.abs()).max(1.0)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_pos(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_neg(&self) -> bool {
        Signed::is_negative(self)
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Exact rational value of a finite `f64`.
pub fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Numerical(format!("{x} has no rational value")))
}

pub fn rational_ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub objective: T,
    pub x: Vec<T>,
    /// One non-negative dual per constraint row.
    pub duals: Vec<T>,
    /// Slack `b - A x` per row.
    pub slacks: Vec<T>,
    pub pivots: usize,
}

/// `max c·x` s.t. `a x ≤ b`, `x ≥ 0`; requires `b ≥ 0`.
pub fn maximize<T: Scalar>(c: &[T], a: &[Vec<T>], b: &[T]) -> Result<LpSolution<T>> {
    let n = c.len();
    let m = a.len();
    if b.len() != m {
        return Err(Error::SizeMismatch { expected: m, got: b.len() });
    }
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::SizeMismatch {
            expected: n,
            got: row.len(),
        });
    }
    if b.iter().any(|v| v.is_neg()) {
        return Err(Error::Numerical("right-hand side must be non-negative".into()));
    }
    let width = n + m + 1;
    // Row 0 holds reduced costs z_j - c_j; the last column is the right-hand side.
    let mut t: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    let mut obj = vec![T::zero(); width];
    for j in 0..n {
        obj[j] = -c[j].clone();
    }
    t.push(obj);
    for i in 0..m {
        let mut row = vec![T::zero(); width];
        row[..n].clone_from_slice(&a[i]);
        row[n + i] = T::one();
        row[width - 1] = if b[i].is_neg() { T::zero() } else { b[i].clone() };
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0;
    let status = loop {
        let Some(enter) = (0..n + m).find(|&j| t[0][j].is_neg()) else {
            break LpStatus::Optimal;
        };
        let mut leave: Option<(usize, T)> = None;
        for i in 1..=m {
            if !t[i][enter].is_pos() {
                continue;
            }
            let ratio = t[i][width - 1].clone() / t[i][enter].clone();
            leave = match leave {
                None => Some((i, ratio)),
                Some((k, best)) => {
                    if ratio.approx_eq(&best) {
                        if basis[i - 1] < basis[k - 1] {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    } else if ratio < best {
                        Some((i, ratio))
                    } else {
                        Some((k, best))
                    }
                }
            };
        }
        let Some((r, _)) = leave else {
            break LpStatus::Unbounded;
        };
        pivot(&mut t, r, enter);
        basis[r - 1] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Numerical(format!("simplex did not converge in {MAX_PIVOTS} pivots")));
        }
    };
    let mut x = vec![T::zero(); n];
    let mut slack_vals = vec![T::zero(); m];
    for (i, &j) in basis.iter().enumerate() {
        let v = t[i + 1][width - 1].clone();
        if j < n {
            x[j] = v;
        } else {
            slack_vals[j - n] = v;
        }
    }
    let duals = (0..m).map(|i| t[0][n + i].clone()).collect();
    Ok(LpSolution {
        status,
        objective: t[0][width - 1].clone(),
        x,
        duals,
        slacks: slack_vals,
        pivots,
    })
}

fn pivot<T: Scalar>(t: &mut [Vec<T>], r: usize, col: usize) {
    let p = t[r][col].clone();
    for v in t[r].iter_mut() {
        *v = v.clone() / p.clone();
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[col].clone();
        if !f.is_pos() && !f.is_neg() {
            // treat round-off as an exact zero
            if T::zero() != f {
                row[col] = T::zero();
            }
            continue;
        }
        for (v, pv) in row.iter_mut().zip(&prow) {
            *v = v.clone() - f.clone() * pv.clone();
        }
        row[col] = T::zero();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp_float_and_exact() {
        // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3
        let a = vec![vec![1.0, 1.0], vec![1.0, 3.0], vec![1.0, 0.0]];
        let s = maximize(&[3.0, 2.0], &a, &[4.0, 6.0, 3.0]).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 11.0).abs() < 1e-12);
        assert!((s.x[0] - 3.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        // strong duality
        let dual_obj: f64 = s.duals.iter().zip([4.0, 6.0, 3.0]).map(|(y, b)| y * b).sum();
        assert!((dual_obj - 11.0).abs() < 1e-12);

        let q = |v: i64| rational_ratio(v, 1);
        let ar: Vec<Vec<BigRational>> = a.iter().map(|r| r.iter().map(|&v| q(v as i64)).collect()).collect();
        let s = maximize(&[q(3), q(2)], &ar, &[q(4), q(6), q(3)]).unwrap();
        assert_eq!(s.objective, q(11));
        assert_eq!(s.duals, vec![q(2), q(0), q(1)]);
    }

    #[test]
    fn unbounded_and_degenerate() {
        let s = maximize(&[1.0, 1.0], &[vec![1.0, -1.0]], &[1.0]).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        let s = maximize(&[1.0, 1.0], &[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 0.0]], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 0.0);
        assert!(maximize(&[1.0], &[vec![1.0]], &[-1.0]).is_err());
    }
}
