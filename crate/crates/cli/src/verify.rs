//! `umpvote verify`: property checks against enumeration and the LP oracle.

use std::process::ExitCode;

use clap::{Args, ValueEnum};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use umpvote::models::{condorcet_normalizer, mallows_normalizer, sample_with, Model, PairLinearStatistic};
use umpvote::oracle::{mp_test_lp_in, ump_exists_lp};
use umpvote::profile::Profile;
use umpvote::rank::{kendall_tau, Alt, Ballot, BinaryRelation, Permutation, Ranking};
use umpvote::selection::{borda_winner, minimum_rejecting_alpha, select_by_nonwinner_tests, select_by_winner_tests};
use umpvote::space::ProfileSpace;
use umpvote::statistics::MixtureRatio;
use umpvote::testing::{
    ext_lf, extend_iid, one_pair_reversals, size, verify_least_favorable, CriticalFunction, Hypothesis, Mixture,
};
use umpvote::ump::{mallows_borda_test, nonwinner_ump_exists, NullKind, Registry, TestRequest, UmpExistence};

use crate::Failure;

#[derive(Clone, Copy, PartialEq, ValueEnum)]
pub enum Suite {
    Lemmas,
    Theorems,
    All,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 4)]
    max_m: usize,
    #[arg(long, default_value_t = 2)]
    max_n: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.8")]
    phi_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.2,0.5")]
    alpha_grid: Vec<f64>,
    /// Seed for the randomly drawn instances.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

struct Config {
    max_m: usize,
    max_n: u64,
    phis: Vec<f64>,
    alphas: Vec<f64>,
    seed: u64,
}

enum Status {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn(&Config) -> Status;

/// Largest ordered-profile space the oracle checks will build an LP over.
const LP_BUDGET: usize = 600;
const POWER_TOLERANCE: f64 = 1e-9;
const SIZE_TOLERANCE: f64 = 1e-10;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Status::Fail(format!($($fmt)+));
        }
    };
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Status::Fail(e.to_string()),
        }
    };
}

const LEMMAS: &[(&str, Check)] = &[
    ("kendall-tau-metric", kendall_tau_metric),
    ("wmg-parity", wmg_parity),
    ("model-normalization", model_normalization),
    ("pmf-equivariance", pmf_equivariance),
    ("null-distribution-enumeration", null_distribution_enumeration),
    ("condorcet-independence", condorcet_independence),
    ("mixture-ratio-identity", mixture_ratio_identity),
    ("iid-extension", iid_extension),
    ("above-set-dominance", above_set_dominance),
    ("borda-dominance", borda_dominance),
    ("winner-statistic-borda-identity", borda_identity),
];

const THEOREMS: &[(&str, Check)] = &[
    ("exact-size", exact_size),
    ("ump-vs-oracle", ump_vs_oracle),
    ("oracle-lp-properties", oracle_lp_properties),
    ("characterizations", characterizations),
    ("winner-regime-small-phi", winner_regime_small_phi),
    ("borda-regime-large-phi", borda_regime_large_phi),
    ("borda-correspondence", borda_correspondence),
    ("selection-neutrality", selection_neutrality),
    ("p-value-bisection", p_value_bisection),
];

pub fn run(args: VerifyArgs) -> Result<ExitCode, Failure> {
    if args.max_m < 2 {
        return Err(Failure::Config("--max-m must be at least 2".into()));
    }
    if args.max_n < 1 {
        return Err(Failure::Config("--max-n must be at least 1".into()));
    }
    if let Some(p) = args.phi_grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Failure::Config(format!("dispersion {p} outside (0, 1)")));
    }
    if let Some(a) = args.alpha_grid.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Failure::Config(format!("level {a} outside (0, 1)")));
    }
    let mut alphas = args.alpha_grid.clone();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let cfg = Config {
        max_m: args.max_m,
        max_n: args.max_n,
        phis: args.phi_grid.clone(),
        alphas,
        seed: args.seed,
    };
    let mut checks: Vec<(&str, Check)> = Vec::new();
    if args.suite != Suite::Theorems {
        checks.extend_from_slice(LEMMAS);
    }
    if args.suite != Suite::Lemmas {
        checks.extend_from_slice(THEOREMS);
    }
    // run in parallel, report in the fixed order above
    let results: Vec<Status> = checks.par_iter().map(|(_, c)| c(&cfg)).collect();
    let mut failed = 0;
    for ((name, _), status) in checks.iter().zip(results) {
        match status {
            Status::Pass(d) => println!("PASS {name} {d}"),
            Status::Fail(d) => {
                failed += 1;
                println!("FAIL {name} {d}")
            }
            Status::Skip(d) => println!("SKIP {name} {d}"),
        }
    }
    Ok(if failed > 0 { ExitCode::from(5) } else { ExitCode::SUCCESS })
}

fn rng(cfg: &Config, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn random_ranking(m: usize, rng: &mut ChaCha8Rng) -> Ranking {
    let mut v: Vec<Alt> = (0..m).collect();
    v.shuffle(rng);
    Ranking::new(v).expect("shuffled identity")
}

fn random_relation(m: usize, rng: &mut ChaCha8Rng) -> BinaryRelation {
    BinaryRelation::from_fn(m, |_, _| rng.gen())
}

fn random_permutation(m: usize, rng: &mut ChaCha8Rng) -> Permutation {
    Permutation::new(random_ranking(m, rng).order().to_vec()).expect("bijection")
}

fn random_ballot(model: &Model, rng: &mut ChaCha8Rng) -> Ballot {
    match model {
        Model::Mallows(_) => random_ranking(model.m(), rng).into(),
        Model::Condorcet(_) => random_relation(model.m(), rng).into(),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn models(cfg: &Config, m: usize) -> Vec<Model> {
    cfg.phis
        .iter()
        .flat_map(|&phi| [Model::mallows(m, phi).unwrap(), Model::condorcet(m, phi).unwrap()])
        .collect()
}

// --- lemmas ---------------------------------------------------------------------------

fn kendall_tau_metric(cfg: &Config) -> Status {
    let mut rng = rng(cfg, 1);
    let mut triples = 0;
    for m in 2..=cfg.max_m.min(8) {
        for _ in 0..50 {
            let model = if rng.gen() { Model::mallows(m, 0.5) } else { Model::condorcet(m, 0.5) };
            let model = tri!(model);
            let [x, y, z] = [0; 3].map(|_| random_ballot(&model, &mut rng));
            let d = |u: &Ballot, v: &Ballot| kendall_tau(u, v).unwrap();
            ensure!(d(&x, &y) == d(&y, &x), "asymmetric on {x:?}, {y:?}");
            ensure!(d(&x, &x) == 0, "d(x, x) != 0 for {x:?}");
            ensure!(d(&x, &z) <= d(&x, &y) + d(&y, &z), "triangle fails on {x:?}, {y:?}, {z:?}");
            let perm = random_permutation(m, &mut rng);
            let (px, py) = (tri!(perm.apply(&x)), tri!(perm.apply(&y)));
            ensure!(d(&px, &py) == d(&x, &y), "relabeling changes d on {x:?}, {y:?}");
            triples += 1;
        }
    }
    Status::Pass(format!("{triples} random triples, m <= {}", cfg.max_m.min(8)))
}

fn random_profile(model: &Model, n: u64, rng: &mut ChaCha8Rng) -> Profile {
    let center = random_ballot(model, rng);
    sample_with(model, &center, n, rng).expect("valid model")
}

fn wmg_parity(cfg: &Config) -> Status {
    let mut rng = rng(cfg, 2);
    let mut count = 0;
    for m in 2..=cfg.max_m.min(6) {
        for model in models(cfg, m) {
            let n = rng.gen_range(1..=9);
            let p = random_profile(&model, n, &mut rng);
            let g = tri!(p.wmg());
            for a in 0..m {
                for b in 0..m {
                    if a != b {
                        ensure!((g.weight(a, b) - n as i64).rem_euclid(2) == 0, "w({a},{b}) = {} with n = {n}", g.weight(a, b));
                        ensure!(g.weight(a, b) == -g.weight(b, a), "w not antisymmetric at ({a},{b})");
                    }
                }
                let mut set: Vec<Alt> = (0..m).filter(|&b| b != a && rng.gen()).collect();
                if set.is_empty() {
                    set.push((a + 1) % m);
                }
                let direct: i64 = set.iter().map(|&b| g.weight(b, a)).sum();
                ensure!(tri!(g.weight_toward(&set, a)) == direct, "weight_toward({set:?}, {a}) mismatch");
                let perm = random_permutation(m, &mut rng);
                let gp = tri!(tri!(p.permuted(&perm)).wmg());
                for b in 0..m {
                    if a != b {
                        ensure!(gp.weight(perm.image(a), perm.image(b)) == g.weight(a, b), "wmg not relabeling-invariant");
                    }
                }
            }
            count += 1;
        }
    }
    Status::Pass(format!("{count} random profiles"))
}

fn model_normalization(cfg: &Config) -> Status {
    let mut done = Vec::new();
    for &phi in &cfg.phis {
        for m in 2..=cfg.max_m.min(6) {
            let model = tri!(Model::mallows(m, phi));
            let center = Ballot::from(Ranking::identity(m));
            let support = tri!(model.support());
            let total: f64 = support.iter().map(|v| model.pmf(&center, v).unwrap()).sum();
            ensure!(close(total, 1.0, 1e-12), "mallows m={m} phi={phi}: pmf sums to {total}");
            let z: f64 = support.iter().map(|v| phi.powi(kendall_tau(&center, v).unwrap() as i32)).sum();
            ensure!(close(tri!(mallows_normalizer(m, phi)), z, 1e-12 * z), "mallows m={m} phi={phi}: normalizer");
        }
        for m in 2..=cfg.max_m.min(4) {
            let model = tri!(Model::condorcet(m, phi));
            let center = Ballot::from(Ranking::identity(m).to_relation());
            let support = tri!(model.support());
            let total: f64 = support.iter().map(|v| model.pmf(&center, v).unwrap()).sum();
            ensure!(close(total, 1.0, 1e-12), "condorcet m={m} phi={phi}: pmf sums to {total}");
            let z: f64 = support.iter().map(|v| phi.powi(kendall_tau(&center, v).unwrap() as i32)).sum();
            ensure!(close(tri!(condorcet_normalizer(m, phi)), z, 1e-12 * z), "condorcet m={m} phi={phi}: normalizer");
        }
        done.push(phi);
    }
    Status::Pass(format!(
        "Mallows m <= {}, Condorcet m <= {}, phi in {:?}",
        cfg.max_m.min(6),
        cfg.max_m.min(4),
        done
    ))
}

fn pmf_equivariance(cfg: &Config) -> Status {
    let mut rng = rng(cfg, 4);
    let mut count = 0;
    for m in 2..=cfg.max_m.min(6) {
        for model in models(cfg, m) {
            for _ in 0..20 {
                let (w, v) = (random_ballot(&model, &mut rng), random_ballot(&model, &mut rng));
                let perm = random_permutation(m, &mut rng);
                let a = tri!(model.pmf(&w, &v));
                let b = tri!(model.pmf(&tri!(perm.apply(&w)), &tri!(perm.apply(&v))));
                ensure!(close(a, b, 1e-15), "{model:?}: {a} vs {b} under relabeling");
                count += 1;
            }
        }
    }
    Status::Pass(format!("{count} random (W, V, M)"))
}

/// Groups `(value, prob)` pairs with values equal to 1e-12 relative.
fn merge(mut pairs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (v, p) in pairs {
        match out.last_mut() {
            Some((u, q)) if (v - *u).abs() <= 1e-12 * v.abs().max(u.abs()) => *q += p,
            _ => out.push((v, p)),
        }
    }
    out
}

fn null_distribution_enumeration(cfg: &Config) -> Status {
    if cfg.max_m < 3 {
        return Status::Skip("needs --max-m >= 3".into());
    }
    let top_n = cfg.max_n.clamp(2, 3);
    let mut count = 0;
    for model in models(cfg, 3) {
        let kinds = match model {
            Model::Mallows(_) => vec![NullKind::NonWinner { above: 1 }, NullKind::NonWinner { above: 2 }, NullKind::Winner],
            Model::Condorcet(_) => vec![
                NullKind::NonWinner { above: 1 },
                NullKind::NonWinner { above: 2 },
                NullKind::CondorcetWinner,
            ],
        };
        for kind in kinds {
            for n in 1..=top_n {
                let d = tri!(kind.null_distribution(&model, n));
                let set: Vec<Alt> = match kind {
                    NullKind::NonWinner { above } => (1..=above).collect(),
                    _ => vec![],
                };
                let stat = tri!(kind.statistic(&model, 0, &set));
                let center = tri!(kind.worst_case_parameter(&model, 0, &set));
                let space = tri!(ProfileSpace::new(&model, n));
                let probs = tri!(space.probabilities(&center));
                let pairs = (0..space.len())
                    .map(|i| Ok((stat.evaluate(&space.profile(i))?, probs[i])))
                    .collect::<umpvote::Result<Vec<_>>>();
                let brute = merge(tri!(pairs));
                ensure!(
                    brute.len() == d.values().len(),
                    "{model:?} {} n={n}: {} values by enumeration, {} computed",
                    kind.token(),
                    brute.len(),
                    d.values().len()
                );
                for ((v, p), (u, q)) in brute.iter().zip(d.values().iter().zip(d.probs())) {
                    ensure!(
                        close(*v, *u, 1e-12 * v.abs().max(1.0)) && close(*p, *q, 1e-12),
                        "{model:?} {} n={n}: ({v}, {p}) vs ({u}, {q})",
                        kind.token()
                    );
                }
                count += 1;
            }
        }
    }
    Status::Pass(format!("{count} distributions, m=3, n <= {top_n}"))
}

fn condorcet_independence(cfg: &Config) -> Status {
    if cfg.max_m < 3 {
        return Status::Skip("needs --max-m >= 3".into());
    }
    let mut rng = rng(cfg, 6);
    for &phi in &cfg.phis {
        let model = tri!(Model::condorcet(3, phi));
        let center: Ballot = random_relation(3, &mut rng).into();
        let support = tri!(model.support());
        let pmf: Vec<f64> = support.iter().map(|v| model.pmf(&center, v).unwrap()).collect();
        let rel = |v: &Ballot| *v.as_relation().unwrap();
        let c = rel(&center);
        let marginal = |p: usize| -> f64 {
            support
                .iter()
                .zip(&pmf)
                .filter(|(v, _)| rel(v).pair_bit(p) == c.pair_bit(p))
                .map(|(_, q)| q)
                .sum()
        };
        let agree: Vec<f64> = (0..3).map(marginal).collect();
        for (v, q) in support.iter().zip(&pmf) {
            let product: f64 = (0..3)
                .map(|p| if rel(v).pair_bit(p) == c.pair_bit(p) { agree[p] } else { 1.0 - agree[p] })
                .product();
            ensure!(close(*q, product, 1e-12), "phi={phi} {v:?}: joint {q} vs product {product}");
        }
        ensure!(close(agree[0], 1.0 / (1.0 + phi), 1e-12), "phi={phi}: agreement {}", agree[0]);
    }
    Status::Pass("joint pmf equals the product of pair marginals, m=3".into())
}

fn mixture_ratio_identity(cfg: &Config) -> Status {
    if cfg.max_m < 3 || cfg.max_n < 2 {
        return Status::Skip("needs --max-m >= 3 and --max-n >= 2".into());
    }
    let mut checked = 0;
    for &phi in &cfg.phis {
        let model = tri!(Model::condorcet(3, phi));
        let h1 = Ranking::identity(3).to_relation();
        let lambda = tri!(Mixture::uniform(one_pair_reversals(&h1, 0).into_iter().map(Ballot::from).collect()));
        let h1: Ballot = h1.into();
        let single = tri!(MixtureRatio::new(lambda.items(), &h1, &model, 1));
        let singles = single.space().singles().to_vec();
        for t in 2..=cfg.max_n.min(3) as usize {
            let ext = tri!(ext_lf(&lambda, &h1, t));
            let space = tri!(ProfileSpace::new(&model, t as u64));
            for idx in 0..space.len() {
                let d = space.digits(idx);
                let lhs: f64 = d.iter().map(|&i| 1.0 / single.ratios()[i]).sum::<f64>() / t as f64;
                let rhs: f64 = ext
                    .items()
                    .iter()
                    .map(|(hs, w)| {
                        w * hs
                            .iter()
                            .zip(&d)
                            .map(|(h, &i)| model.pmf(h, &singles[i]).unwrap() / model.pmf(&h1, &singles[i]).unwrap())
                            .product::<f64>()
                    })
                    .sum();
                ensure!(close(lhs, rhs, 1e-12 * rhs.max(1.0)), "phi={phi} t={t} point {d:?}: {lhs} vs {rhs}");
                checked += 1;
            }
        }
    }
    Status::Pass(format!("{checked} Condorcet points, m=3"))
}

fn iid_extension(cfg: &Config) -> Status {
    if cfg.max_m < 3 || cfg.max_n < 2 {
        return Status::Skip("needs --max-m >= 3 and --max-n >= 2".into());
    }
    let top_n = cfg.max_n.min(3);
    let mut certified = 0;
    for model in models(cfg, 3) {
        let top = tri!(Hypothesis::top(&model, 0));
        let rest = tri!(top.complement(&model));
        for (h0, h1s) in [(&top, &rest), (&rest, &top)] {
            for h1 in h1s.params() {
                for h in h0.params() {
                    let lambda = Mixture::point(h.clone());
                    if extend_iid(&lambda, h0, h1, &model).is_err() {
                        continue;
                    }
                    certified += 1;
                    for n in 2..=top_n {
                        for &alpha in &cfg.alphas {
                            let v = tri!(verify_least_favorable(&lambda, h0, h1, alpha, &model, n));
                            ensure!(v.holds(), "{model:?} h1={h1:?} point {h:?} n={n} alpha={alpha}: {v:?}");
                        }
                    }
                }
            }
        }
    }
    ensure!(certified > 0, "no deterministic distribution passed the single-ballot check");
    Status::Pass(format!("{certified} certified points hold at n <= {top_n}"))
}

/// `C` dominates `C'` under `w`: some bijection maps `C \ C'` onto `C' \ C` with each element
/// sent to one ranked below it.
fn dominates(w: &Ranking, c: &[Alt], cp: &[Alt]) -> bool {
    let mut out: Vec<usize> = c.iter().filter(|x| !cp.contains(x)).map(|&x| w.position(x)).collect();
    let mut inn: Vec<usize> = cp.iter().filter(|x| !c.contains(x)).map(|&x| w.position(x)).collect();
    out.sort_unstable();
    inn.sort_unstable();
    out.len() == inn.len() && out.iter().zip(&inn).all(|(o, i)| o < i)
}

fn above_set_dominance(cfg: &Config) -> Status {
    if cfg.max_m < 3 {
        return Status::Skip("needs --max-m >= 3".into());
    }
    let m = cfg.max_m.min(4);
    let mut rng = rng(cfg, 9);
    for &phi in &cfg.phis {
        let model = tri!(Model::mallows(m, phi));
        let support = tri!(model.support());
        let mut configs = 0;
        while configs < 20 {
            let w = random_ranking(m, &mut rng);
            let a = rng.gen_range(0..m);
            let mut others: Vec<Alt> = (0..m).filter(|&x| x != a).collect();
            let k = rng.gen_range(1..=others.len());
            others.shuffle(&mut rng);
            let c: Vec<Alt> = others[..k].to_vec();
            others.shuffle(&mut rng);
            let cp: Vec<Alt> = others[..k].to_vec();
            if !dominates(&w, &c, &cp) {
                continue;
            }
            configs += 1;
            let sc = tri!(PairLinearStatistic::weight_toward(m, &c, a));
            let scp = tri!(PairLinearStatistic::weight_toward(m, &cp, a));
            let wb: Ballot = w.clone().into();
            for kk in -(k as i64)..=(k as i64) {
                let tail = |s: &PairLinearStatistic| -> f64 {
                    support
                        .iter()
                        .filter(|v| s.evaluate_ballot(v) >= kk)
                        .map(|v| model.pmf(&wb, v).unwrap())
                        .sum()
                };
                let (lhs, rhs) = (tail(&scp), tail(&sc));
                ensure!(lhs <= rhs + 1e-12, "phi={phi} W={w:?} a={a} C={c:?} C'={cp:?} K={kk}: {lhs} > {rhs}");
            }
        }
    }
    Status::Pass(format!("20 configurations per phi, m={m}"))
}

fn borda_dominance(cfg: &Config) -> Status {
    if cfg.max_m < 3 {
        return Status::Skip("needs --max-m >= 3".into());
    }
    let m = cfg.max_m.min(4);
    let mut rng = rng(cfg, 10);
    for &phi in &cfg.phis {
        let model = tri!(Model::mallows(m, phi));
        let support = tri!(model.support());
        for _ in 0..20 {
            let w = random_ranking(m, &mut rng);
            let i = rng.gen_range(0..m - 1);
            let j = rng.gen_range(i + 1..m);
            let (b, c) = (w.order()[i], w.order()[j]);
            let wb: Ballot = w.clone().into();
            for kk in 0..m {
                let tail = |x: Alt| -> f64 {
                    support
                        .iter()
                        .filter(|v| v.as_ranking().unwrap().borda(x) >= kk)
                        .map(|v| model.pmf(&wb, v).unwrap())
                        .sum()
                };
                let (pb, pc) = (tail(b), tail(c));
                ensure!(pb + 1e-12 >= pc, "phi={phi} W={w:?} b={b} c={c} K={kk}: {pb} < {pc}");
            }
        }
    }
    Status::Pass(format!("20 configurations per phi, m={m}"))
}

fn borda_identity(cfg: &Config) -> Status {
    let mut rng = rng(cfg, 11);
    let mut count = 0;
    for m in 2..=cfg.max_m.min(6) {
        for &phi in &cfg.phis {
            let model = tri!(Model::mallows(m, phi));
            let n = rng.gen_range(1..=15);
            let p = random_profile(&model, n, &mut rng);
            let borda = tri!(p.borda_scores());
            for a in 0..m {
                let w = tri!(tri!(PairLinearStatistic::weight_from(m, a)).evaluate(&p));
                let want = 2 * borda[a] as i64 - (n * (m as u64 - 1)) as i64;
                ensure!(w == want, "m={m} n={n} a={a}: w(a > others) = {w}, 2 Borda - n(m-1) = {want}");
            }
            count += 1;
        }
    }
    Status::Pass(format!("{count} random profiles"))
}

// --- theorems -------------------------------------------------------------------------

/// The null hypothesis a family's test is built for.
fn null_hypothesis(kind: NullKind, model: &Model, a: Alt) -> umpvote::Result<Hypothesis> {
    match kind {
        NullKind::NonWinner { .. } => Hypothesis::top(model, a),
        NullKind::Winner => Hypothesis::bottom(model, a),
        NullKind::Borda | NullKind::CondorcetWinner => Hypothesis::top(model, a)?.complement(model),
    }
}

/// The alternative hypothesis paired with [`null_hypothesis`].
fn alternative_hypothesis(kind: NullKind, model: &Model, a: Alt, set: &[Alt]) -> umpvote::Result<Hypothesis> {
    match kind {
        NullKind::NonWinner { .. } => Hypothesis::above_set(model, set, a),
        _ => Hypothesis::top(model, a),
    }
}

/// Every (family, above-set) request the registry supports on `model` with `n` ballots.
fn requests(registry: &Registry, model: &Model, n: u64, alpha: f64) -> Vec<(&'static str, TestRequest)> {
    let m = model.m();
    let a = 0;
    let mut out = Vec::new();
    for f in registry.families() {
        if f.model() != model.name() {
            continue;
        }
        let probe = TestRequest {
            model: *model,
            target: a,
            above_set: Some(vec![]),
            alpha,
            n,
        };
        match f.null_kind(&probe) {
            NullKind::NonWinner { .. } => {
                for bits in 1u32..(1 << (m - 1)) {
                    let set: Vec<Alt> = (1..m).filter(|b| bits & (1 << (b - 1)) != 0).collect();
                    out.push((
                        f.name(),
                        TestRequest {
                            model: *model,
                            target: a,
                            above_set: Some(set),
                            alpha,
                            n,
                        },
                    ));
                }
            }
            NullKind::Borda if n != 1 => {}
            _ => out.push((
                f.name(),
                TestRequest {
                    model: *model,
                    target: a,
                    above_set: None,
                    alpha,
                    n,
                },
            )),
        }
    }
    out
}

fn exact_size(cfg: &Config) -> Status {
    let registry = Registry::standard();
    let mut count = 0;
    let top_m = cfg.max_m.min(4);
    for m in 2..=top_m {
        for model in models(cfg, m) {
            let top_n = if matches!(model, Model::Condorcet(_)) && m == 4 { 1 } else { cfg.max_n.min(2) };
            for n in 1..=top_n {
                for &alpha in &cfg.alphas {
                    for (name, req) in requests(&registry, &model, n, alpha) {
                        let family = registry.get(name).unwrap();
                        let test = tri!(family.build(&req, None));
                        let set = req.above_set.clone().unwrap_or_default();
                        let kind = family.null_kind(&req);
                        let star = tri!(kind.worst_case_parameter(&model, 0, &set));
                        let at_star = tri!(test.rejection_probability(&model, &star, n));
                        ensure!(
                            close(at_star, alpha, SIZE_TOLERANCE),
                            "{name} {model:?} B={set:?} n={n} alpha={alpha}: size at worst case {at_star}"
                        );
                        let h0 = tri!(null_hypothesis(kind, &model, 0));
                        let (worst, at) = tri!(size(&test, &h0, &model, n));
                        ensure!(
                            worst <= at_star + SIZE_TOLERANCE,
                            "{name} {model:?} B={set:?} n={n} alpha={alpha}: size {worst} at {at:?} exceeds {at_star} at {star:?}"
                        );
                        count += 1;
                    }
                }
            }
        }
    }
    Status::Pass(format!("{count} tests, m <= {top_m}, n <= {}", cfg.max_n.min(2)))
}

fn ump_vs_oracle(cfg: &Config) -> Status {
    if cfg.max_m < 3 {
        return Status::Skip("needs --max-m >= 3".into());
    }
    let registry = Registry::standard();
    let mut worst = 0.0f64;
    let mut points = 0;
    let mut skipped = Vec::new();
    for model in models(cfg, 3) {
        for n in 1..=cfg.max_n {
            let space = tri!(ProfileSpace::new(&model, n));
            if space.len() > LP_BUDGET {
                skipped.push(format!("{} n={n}", model.name()));
                continue;
            }
            let space = std::sync::Arc::new(space);
            for &alpha in &cfg.alphas {
                for (name, req) in requests(&registry, &model, n, alpha) {
                    let family = registry.get(name).unwrap();
                    let kind = family.null_kind(&req);
                    if kind == NullKind::Borda {
                        // single-ballot test checked under borda-regime-large-phi
                        continue;
                    }
                    let set = req.above_set.clone().unwrap_or_default();
                    let test = tri!(family.build(&req, None));
                    let h0 = tri!(null_hypothesis(kind, &model, 0));
                    let h1 = tri!(alternative_hypothesis(kind, &model, 0, &set));
                    for h in h1.params() {
                        let lp = tri!(mp_test_lp_in(&space, &h0, h, alpha));
                        let p = tri!(test.rejection_probability(&model, h, n));
                        let gap = (p - lp.power).abs();
                        worst = worst.max(gap);
                        ensure!(
                            gap <= POWER_TOLERANCE,
                            "{name} {model:?} B={set:?} n={n} alpha={alpha} h1={h:?}: power {p}, optimum {}",
                            lp.power
                        );
                        points += 1;
                    }
                }
            }
        }
    }
    let mut detail = format!("{points} (test, h1) points, max gap {worst:.1e}");
    if !skipped.is_empty() {
        detail.push_str(&format!("; past the LP budget: {}", skipped.join(", ")));
    }
    Status::Pass(detail)
}

fn oracle_lp_properties(cfg: &Config) -> Status {
    if cfg.max_m < 3 {
        return Status::Skip("needs --max-m >= 3".into());
    }
    let grid: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
    let mut count = 0;
    for model in models(cfg, 3) {
        let space = std::sync::Arc::new(tri!(ProfileSpace::new(&model, 1)));
        let h0 = tri!(Hypothesis::top(&model, 0));
        let h1s = tri!(h0.complement(&model));
        for h1 in h1s.params().iter().take(3) {
            let mut powers = Vec::new();
            for &alpha in &grid {
                let lp = tri!(mp_test_lp_in(&space, &h0, h1, alpha));
                for ((h, d), s) in lp.duals.iter().zip(&lp.sizes) {
                    ensure!(
                        *d <= 1e-12 || close(*s, alpha, 1e-9),
                        "{model:?} h1={h1:?} alpha={alpha}: dual {d} on slack constraint {h:?} (size {s})"
                    );
                }
                powers.push(lp.power);
            }
            for w in powers.windows(2) {
                ensure!(w[1] >= w[0] - 1e-12, "{model:?} h1={h1:?}: optimum decreases in alpha");
            }
            for w in powers.windows(3) {
                ensure!(w[0] + w[2] <= 2.0 * w[1] + 1e-9, "{model:?} h1={h1:?}: optimum not concave in alpha");
            }
            count += 1;
        }
    }
    Status::Pass(format!("{count} LP families over 19 levels: monotone, concave, complementary slackness"))
}

/// 25 equally spaced levels in (0, 1).
fn sweep() -> Vec<f64> {
    (1..=25).map(|k| k as f64 / 26.0).collect()
}

fn characterizations(cfg: &Config) -> Status {
    if cfg.max_m < 3 || cfg.max_n < 2 {
        return Status::Skip("needs --max-m >= 3 and --max-n >= 2".into());
    }
    let mut refuted = 0;
    for model in models(cfg, 3) {
        let h0 = tri!(Hypothesis::top(&model, 0));
        let groups: Vec<Hypothesis> = [vec![1], vec![2], vec![1, 2]]
            .iter()
            .map(|s| Hypothesis::above_set(&model, s, 0))
            .collect::<umpvote::Result<_>>()
            .unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                let h1 = tri!(Hypothesis::new(vec![groups[i].params()[0].clone(), groups[j].params()[0].clone()]));
                ensure!(
                    matches!(tri!(nonwinner_ump_exists(0, &h1)), UmpExistence::No(..)),
                    "{model:?}: mixed above-sets not flagged"
                );
                let mut witness = None;
                for alpha in sweep() {
                    if !tri!(ump_exists_lp(&h0, &h1, alpha, &model, 2)).exists() {
                        witness = Some(alpha);
                        break;
                    }
                }
                ensure!(witness.is_some(), "{model:?} H1={h1:?} n=2: a UMP test exists at every swept level");
                refuted += 1;
            }
        }
        for g in &groups {
            for &alpha in &cfg.alphas {
                ensure!(
                    tri!(ump_exists_lp(&h0, g, alpha, &model, 2)).exists(),
                    "{model:?} H1={g:?} alpha={alpha}: no UMP test for a shared above-set"
                );
            }
        }
    }
    Status::Pass(format!("{refuted} mixed H1 refuted at n=2; shared above-sets admit UMP tests"))
}

fn winner_regime_small_phi(cfg: &Config) -> Status {
    if cfg.max_m < 4 {
        return Status::Skip("needs --max-m >= 4".into());
    }
    let model = tri!(Model::mallows(4, 0.2));
    let h1 = tri!(Hypothesis::top(&model, 0));
    let h0 = tri!(h1.complement(&model));
    let verdicts: Vec<(f64, bool)> = sweep()
        .into_par_iter()
        .map(|alpha| Ok((alpha, ump_exists_lp(&h0, &h1, alpha, &model, 1)?.exists())))
        .collect::<umpvote::Result<_>>()
        .map_err(|e| e.to_string())
        .unwrap_or_default();
    let witnesses: Vec<String> = verdicts.iter().filter(|(_, e)| !e).map(|(a, _)| format!("{a:.4}")).collect();
    ensure!(!verdicts.is_empty(), "oracle failed");
    ensure!(!witnesses.is_empty(), "m=4 phi=0.2: a UMP winner test exists at every swept level");
    Status::Pass(format!("m=4 phi=0.2: no UMP winner test at alpha in [{}]", witnesses.join(", ")))
}

fn borda_regime_large_phi(cfg: &Config) -> Status {
    if cfg.max_m < 4 {
        return Status::Skip("needs --max-m >= 4".into());
    }
    let model = tri!(Model::mallows(4, 0.95));
    let h1 = tri!(Hypothesis::top(&model, 0));
    let h0 = tri!(h1.complement(&model));
    let space = std::sync::Arc::new(tri!(ProfileSpace::new(&model, 1)));
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for &alpha in &cfg.alphas {
        let test = tri!(mallows_borda_test(0, alpha, &model, 1));
        let mut gap = 0.0f64;
        for h in h1.params() {
            let lp = tri!(mp_test_lp_in(&space, &h0, h, alpha));
            gap = gap.max(lp.power - tri!(test.rejection_probability(&model, h, 1)));
        }
        worst = worst.max(gap);
        if gap > POWER_TOLERANCE {
            bad.push(format!("{alpha} (gap {gap:.2e})"));
        }
    }
    ensure!(bad.is_empty(), "m=4 phi=0.95: Borda test below the most powerful test at alpha {}", bad.join(", "));
    Status::Pass(format!("m=4 phi=0.95: Borda test most powerful at every h1, max gap {worst:.1e}"))
}

fn borda_correspondence(cfg: &Config) -> Status {
    if cfg.max_m < 3 {
        return Status::Skip("needs --max-m >= 3".into());
    }
    let mut rng = rng(cfg, 20);
    let top_m = cfg.max_m.min(4);
    for i in 0..100 {
        let m = rng.gen_range(3..=top_m);
        let n = rng.gen_range(3..=9);
        let phi = cfg.phis[rng.gen_range(0..cfg.phis.len())];
        let model = tri!(Model::mallows(m, phi));
        let p = random_profile(&model, n, &mut rng);
        let b = tri!(borda_winner(&p)).winners;
        let w = tri!(select_by_winner_tests(&p, &model)).winners;
        let nw = tri!(select_by_nonwinner_tests(&p, &model)).winners;
        ensure!(w == b && nw == b, "profile {i} (m={m} n={n} phi={phi}): Borda {b:?}, winner tests {w:?}, non-winner tests {nw:?}");
    }
    Status::Pass(format!("100 random profiles, m in 3..={top_m}, 0 mismatches"))
}

fn selection_neutrality(cfg: &Config) -> Status {
    let mut rng = rng(cfg, 21);
    let top_m = cfg.max_m.min(4);
    let mut count = 0;
    for m in 2..=top_m {
        for model in models(cfg, m) {
            let p = random_profile(&model, rng.gen_range(2..=7), &mut rng);
            let perm = random_permutation(m, &mut rng);
            let q = tri!(p.permuted(&perm));
            let sorted = |mut v: Vec<Alt>| {
                v.sort_unstable();
                v
            };
            let w = tri!(select_by_winner_tests(&p, &model)).winners;
            let wq = tri!(select_by_winner_tests(&q, &model)).winners;
            ensure!(sorted(perm.apply_set(&w)) == wq, "{model:?}: winner tests not neutral");
            let nw = tri!(select_by_nonwinner_tests(&p, &model)).winners;
            let nwq = tri!(select_by_nonwinner_tests(&q, &model)).winners;
            ensure!(sorted(perm.apply_set(&nw)) == nwq, "{model:?}: non-winner tests not neutral");
            if matches!(model, Model::Mallows(_)) {
                let b = tri!(borda_winner(&p)).winners;
                let bq = tri!(borda_winner(&q)).winners;
                ensure!(sorted(perm.apply_set(&b)) == bq, "Borda not neutral");
            }
            count += 1;
        }
    }
    Status::Pass(format!("{count} relabeled profiles"))
}

fn p_value_bisection(cfg: &Config) -> Status {
    let mut rng = rng(cfg, 22);
    let mut count = 0;
    for m in 2..=cfg.max_m.min(4) {
        for model in models(cfg, m) {
            let p = random_profile(&model, rng.gen_range(1..=6), &mut rng);
            let sel = tri!(select_by_winner_tests(&p, &model));
            for a in 0..m {
                let b = tri!(minimum_rejecting_alpha(&p, &model, a, 60));
                ensure!(close(b, sel.scores[a], 1e-12), "{model:?} a={a}: bisection {b}, p-value {}", sel.scores[a]);
                count += 1;
            }
        }
    }
    Status::Pass(format!("{count} p-values match the smallest rejecting level"))
}
