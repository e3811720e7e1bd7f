//! p-values are super-uniform at the worst-case null parameter.

use umpvote::models::{sample, Model};
use umpvote::ump::{condorcet_winner_test, mallows_nonwinner_test, mallows_winner_test, NullKind};
use umpvote::testing::ThresholdTest;

const DRAWS: u64 = 4000;

fn check(test: &ThresholdTest, model: &Model, kind: NullKind, set: &[usize], n: u64, seed: u64) {
    let h0 = kind.worst_case_parameter(model, 0, set).unwrap();
    let ps: Vec<f64> = (0..DRAWS)
        .map(|i| {
            let p = sample(model, &h0, n, seed * 1_000_003 + i).unwrap();
            test.p_value(test.statistic().evaluate(&p).unwrap())
        })
        .collect();
    for &u in &[0.01, 0.05, 0.1, 0.25, 0.5, 0.75] {
        let freq = ps.iter().filter(|p| **p <= u).count() as f64 / DRAWS as f64;
        let sigma = (u * (1.0 - u) / DRAWS as f64).sqrt();
        assert!(freq <= u + 3.0 * sigma, "{kind:?} n={n} u={u}: {freq}");
    }
}

#[test]
fn worst_case_p_values_are_super_uniform() {
    let model = Model::mallows(4, 0.6).unwrap();
    for n in [1, 3] {
        let t = mallows_winner_test(0, 0.05, &model, n).unwrap();
        check(&t, &model, NullKind::Winner, &[], n, 1);
        let t = mallows_nonwinner_test(0, &[1, 2], 0.05, &model, n).unwrap();
        check(&t, &model, NullKind::NonWinner { above: 2 }, &[1, 2], n, 2);
    }
    let model = Model::condorcet(4, 0.4).unwrap();
    let t = condorcet_winner_test(0, 0.05, &model, 2).unwrap();
    check(&t, &model, NullKind::CondorcetWinner, &[], 2, 3);
}
