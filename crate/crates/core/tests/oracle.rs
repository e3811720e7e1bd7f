//! LP oracle cross-checks: vertex enumeration, exact re-solve and dual extraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use umpvote::models::Model;
use umpvote::oracle::{extract_least_favorable, mp_test_lp, mp_test_lp_exact, ump_exists_lp};
use umpvote::rank::{Ballot, BinaryRelation, Ranking};
use umpvote::simplex::{maximize, rational, LpStatus, Scalar};
use umpvote::testing::{raise_to_top, verify_least_favorable, CriticalFunction, Hypothesis, Mixture};
use umpvote::ump::{condorcet_winner_least_favorable, mallows_winner_test};

/// Solves the square system `m x = rhs` by Gaussian elimination with partial pivoting.
fn solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let k = rhs.len();
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        for r in 0..k {
            if r != c {
                let f = m[r][c] / m[c][c];
                for j in c..k {
                    m[r][j] -= f * m[c][j];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    Some((0..k).map(|i| rhs[i] / m[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Best objective over every vertex of `{x : a x <= b, 0 <= x <= 1}`.
fn vertex_optimum(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
    let k = c.len();
    // all constraints as rows g x <= h
    let mut g: Vec<Vec<f64>> = a.to_vec();
    let mut h: Vec<f64> = b.to_vec();
    for j in 0..k {
        let mut up = vec![0.0; k];
        up[j] = 1.0;
        g.push(up);
        h.push(1.0);
        let mut down = vec![0.0; k];
        down[j] = -1.0;
        g.push(down);
        h.push(0.0);
    }
    let mut best = f64::NEG_INFINITY;
    for rows in combinations(g.len(), k) {
        let sys = rows.iter().map(|&r| g[r].clone()).collect();
        let rhs = rows.iter().map(|&r| h[r]).collect();
        let Some(x) = solve(sys, rhs) else { continue };
        let feasible = g.iter().zip(&h).all(|(row, hv)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= hv + 1e-9);
        if feasible {
            best = best.max(c.iter().zip(&x).map(|(p, q)| p * q).sum());
        }
    }
    best
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..3 {
        let k = rng.gen_range(5..=8);
        let rows = rng.gen_range(1..=3);
        // probability vectors, like size constraints
        let prob = |rng: &mut ChaCha8Rng| {
            let v: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect::<Vec<f64>>()
        };
        let c = prob(&mut rng);
        let a: Vec<Vec<f64>> = (0..rows).map(|_| prob(&mut rng)).collect();
        let alpha = rng.gen_range(0.05..0.6);
        let b = vec![alpha; rows];
        let mut full_a = a.clone();
        let mut full_b = b.clone();
        for j in 0..k {
            let mut r = vec![0.0; k];
            r[j] = 1.0;
            full_a.push(r);
            full_b.push(1.0);
        }
        let s = maximize(&c, &full_a, &full_b).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        let v = vertex_optimum(&c, &a, &b);
        assert!((s.objective - v).abs() < 1e-10, "trial {trial}: simplex {} vs vertices {v}", s.objective);
        // strong duality
        let dual: f64 = s.duals.iter().zip(&full_b).map(|(y, b)| y * b).sum();
        assert!((dual - s.objective).abs() < 1e-10);
    }
}

#[test]
fn exact_resolve_agrees_on_mallows_four() {
    let model = Model::mallows(4, 0.6).unwrap();
    let h1s = Hypothesis::top(&model, 0).unwrap();
    let h0 = h1s.complement(&model).unwrap();
    for &alpha in &[0.1, 0.35] {
        let h1 = &h1s.params()[2];
        let f = mp_test_lp(&h0, h1, alpha, &model, 1).unwrap();
        let e = mp_test_lp_exact(&h0, h1, alpha, &model, 1).unwrap();
        assert!((Scalar::to_f64(&e.power) - f.power).abs() < 1e-12);
        // the exact duals certify the optimum: Σ y_h α + Σ z_j >= power, with equality
        let dual_part: f64 = e.duals.iter().map(|d| Scalar::to_f64(d) * alpha).sum();
        assert!(dual_part <= f.power + 1e-12);
        assert!(rational(alpha).is_ok());
    }
}

#[test]
fn complementary_slackness_and_exact_size() {
    let model = Model::condorcet(3, 0.4).unwrap();
    let h0 = Hypothesis::top(&model, 1).unwrap();
    for h1 in h0.complement(&model).unwrap().params() {
        for n in 1..=2 {
            let lp = mp_test_lp(&h0, h1, 0.15, &model, n).unwrap();
            for ((h, d), s) in lp.duals.iter().zip(&lp.sizes) {
                assert!(*s <= 0.15 + 1e-9, "{h:?}: size {s}");
                if *d > 1e-12 {
                    assert!((s - 0.15).abs() < 1e-9, "{h:?}: dual {d} on a slack constraint");
                }
            }
            let direct = lp.test.rejection_probability(&model, h1, n).unwrap();
            assert!((direct - lp.power).abs() < 1e-12);
        }
    }
}

#[test]
fn extracted_duals_for_mallows_winner_are_the_lowered_ranking() {
    let model = Model::mallows(3, 0.5).unwrap();
    let a = 0;
    let h0 = Hypothesis::bottom(&model, a).unwrap();
    for h1 in Hypothesis::top(&model, a).unwrap().params() {
        for &alpha in &[0.07, 0.3] {
            let lp = mp_test_lp(&h0, h1, alpha, &model, 1).unwrap();
            let lf = extract_least_favorable(&lp).unwrap();
            // a moved from the top to the bottom, the rest in h1's order
            let r = h1.as_ranking().unwrap();
            let lowered: Ballot = Ranking::new(r.order()[1..].iter().copied().chain([a]).collect()).unwrap().into();
            assert!(verify_least_favorable(&lf, &h0, h1, alpha, &model, 1).unwrap().holds());
            let point = Mixture::point(lowered.clone());
            assert!(verify_least_favorable(&point, &h0, h1, alpha, &model, 1).unwrap().holds());
            // the UMP test reaches the LP optimum
            let t = mallows_winner_test(a, alpha, &model, 1).unwrap();
            assert!((t.rejection_probability(&model, h1, 1).unwrap() - lp.power).abs() < 1e-9);
            assert_eq!(raise_to_top(lowered.as_ranking().unwrap(), a), *r);
        }
    }
}

#[test]
fn condorcet_winner_least_favorable_verifies() {
    let model = Model::condorcet(3, 0.5).unwrap();
    let a = 0;
    let h1s = Hypothesis::top(&model, a).unwrap();
    let h0 = h1s.complement(&model).unwrap();
    for h1 in h1s.params() {
        let lf = condorcet_winner_least_favorable(a, h1.as_relation().unwrap()).unwrap();
        assert_eq!(lf.items().len(), 2);
        for n in 1..=2 {
            for &alpha in &[0.05, 0.2, 0.5] {
                let v = verify_least_favorable(&lf, &h0, h1, alpha, &model, n).unwrap();
                assert!(v.holds(), "{h1:?} n={n} alpha={alpha}: {v:?}");
                let lp = mp_test_lp(&h0, h1, alpha, &model, n).unwrap();
                let extracted = extract_least_favorable(&lp).unwrap();
                assert!(extracted.support().all(|x| lf.weight(x) > 0.0), "{:?}", extracted.items());
                // at n=1 both reversals bind with equal weight on the single rejected point, so
                // the optimal dual is not unique; a full-support dual is least favorable
                if extracted.items().len() == 2 {
                    let v = verify_least_favorable(&extracted, &h0, h1, alpha, &model, n).unwrap();
                    assert!(v.holds(), "{h1:?} n={n} alpha={alpha}: {v:?}");
                }
            }
        }
    }
}

#[test]
fn shared_above_set_admits_ump_and_mixed_does_not() {
    let model = Model::condorcet(3, 0.5).unwrap();
    let h0 = Hypothesis::top(&model, 0).unwrap();
    let shared = Hypothesis::above_set(&model, &[1, 2], 0).unwrap();
    assert!(ump_exists_lp(&h0, &shared, 0.2, &model, 2).unwrap().exists());
    let mixed = Hypothesis::new(vec![
        BinaryRelation::from_pairs(3, &[(1, 0), (0, 2), (1, 2)]).unwrap().into(),
        BinaryRelation::from_pairs(3, &[(1, 0), (2, 0), (1, 2)]).unwrap().into(),
    ])
    .unwrap();
    let found = (1..=25).any(|k| !ump_exists_lp(&h0, &mixed, k as f64 / 26.0, &model, 2).unwrap().exists());
    assert!(found);
}
