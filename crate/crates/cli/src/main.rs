use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use umpvote::ballot_file::{self, BallotFile};
use umpvote::cache::{format_table, DiskCache, TableKey};
use umpvote::models::{Model, MALLOWS_ENUMERATION_LIMIT};
use umpvote::rank::{AlternativeSet, Alt};
use umpvote::selection::{borda_winner, select_by_nonwinner_tests, select_by_winner_tests, Selection};
use umpvote::testing::Hypothesis;
use umpvote::ump::{nonwinner_ump_exists, run, Decision, NullKind, Registry, TestRequest, UmpExistence};

mod verify;

const EXIT_HELP: &str = "\
Exit codes:
  0  retained (test) / success
  1  parse error in arguments or input files
  2  invalid configuration (e.g. no UMP test exists for the requested H1)
  3  rejected
  4  on the boundary: rejection is randomized (see reject_probability)
  5  verification failure (verify)";

#[derive(Parser)]
#[command(name = "umpvote", version, about = "Winner and non-winner hypothesis tests for preference profiles", after_help = EXIT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one winner or non-winner test on a ballot file.
    Test(TestArgs),
    /// Write the exact null distribution of a test statistic as a critical-value table.
    Table(TableArgs),
    /// Choose winners by combining per-alternative tests, or by Borda.
    Select(SelectArgs),
    /// Run the built-in verification checks against brute-force oracles.
    Verify(verify::VerifyArgs),
    /// List the registered test families.
    Families,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelName {
    Mallows,
    Condorcet,
}

impl ModelName {
    fn as_str(self) -> &'static str {
        match self {
            ModelName::Mallows => "mallows",
            ModelName::Condorcet => "condorcet",
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Kind {
    Winner,
    Nonwinner,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    WinnerTests,
    NonwinnerTests,
    Borda,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, value_enum)]
    model: ModelName,
    #[arg(long)]
    phi: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, required_unless_present = "family")]
    kind: Option<Kind>,
    /// Test family by registry name; overrides `--kind` (see `umpvote families`).
    #[arg(long)]
    family: Option<String>,
    /// Alternative under test, by name.
    #[arg(long)]
    target: String,
    /// Alternatives ranked above the target under H1, comma separated (non-winner tests).
    #[arg(long)]
    above_set: Option<String>,
    /// Alternative parameters, separated by `;`; their common above-set is used, and a
    /// mismatch is reported as a configuration error.
    #[arg(long)]
    h1: Option<String>,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Turn a boundary decision into reject/retain with a seeded coin.
    #[arg(long, requires = "seed")]
    realize: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_enum)]
    model: ModelName,
    #[arg(long)]
    phi: f64,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: u64,
    /// nonwinner-K (K = |B|), winner, borda or condorcet-winner.
    #[arg(long)]
    statistic: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, value_enum, default_value = "mallows")]
    model: ModelName,
    /// Needed by the test-based methods.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug)]
pub(crate) enum Failure {
    Parse(String),
    Config(String),
}

impl From<umpvote::Error> for Failure {
    fn from(e: umpvote::Error) -> Self {
        match e {
            umpvote::Error::Parse { .. } => Failure::Parse(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

/// Prints `key: value` or `key<TAB>value` lines.
pub(crate) struct Out {
    format: Format,
    lines: Vec<(String, String)>,
}

impl Out {
    fn new(format: Format) -> Self {
        Out { format, lines: Vec::new() }
    }

    fn put(&mut self, key: impl Into<String>, value: impl Display) {
        // values never contain tabs or newlines so machine output stays one pair per line
        let v = value.to_string().replace(['\t', '\n'], " ");
        self.lines.push((key.into(), v));
    }

    fn print(&self) {
        let width = self.lines.iter().map(|(k, _)| k.len() + 1).max().unwrap_or(0);
        for (k, v) in &self.lines {
            match self.format {
                Format::Machine => println!("{k}\t{v}"),
                Format::Text => println!("{:width$}  {v}", format!("{k}:")),
            }
        }
    }
}

fn read_profile(path: &Path) -> Result<BallotFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    ballot_file::parse(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn names(alts: &AlternativeSet, set: &[Alt]) -> String {
    if set.is_empty() {
        return "-".into();
    }
    set.iter().map(|&x| alts.name(x)).collect::<Vec<_>>().join(",")
}

/// Shortest decimal that reads back to the same `f64`.
fn fmt_f(x: f64) -> String {
    format!("{x}")
}

fn parse_set(alts: &AlternativeSet, list: &str) -> Result<Vec<Alt>, Failure> {
    alts.ids(list).map_err(|e| Failure::Parse(format!("--above-set: {e}")))
}

/// Above-set for a non-winner test from `--above-set` and/or `--h1`.
fn resolve_above_set(args: &TestArgs, file: &BallotFile, model: &Model, target: Alt) -> Result<Option<Vec<Alt>>, Failure> {
    let alts = &file.alternatives;
    let given = args.above_set.as_deref().map(|s| parse_set(alts, s)).transpose()?;
    let Some(h1) = &args.h1 else {
        return Ok(given);
    };
    let params = h1
        .split(';')
        .map(|b| ballot_file::parse_ballot(alts, b.trim(), Some(model.kind())))
        .collect::<umpvote::Result<Vec<_>>>()
        .map_err(|e| Failure::Parse(format!("--h1: {e}")))?;
    let h1 = Hypothesis::new(params)?;
    match nonwinner_ump_exists(target, &h1)? {
        UmpExistence::Yes(mut set) => {
            set.sort_unstable();
            if let Some(mut g) = given {
                g.sort_unstable();
                if g != set {
                    return Err(Failure::Config(format!(
                        "--above-set {{{}}} disagrees with the H1 above-set {{{}}}",
                        names(alts, &g),
                        names(alts, &set)
                    )));
                }
            }
            Ok(Some(set))
        }
        UmpExistence::No(x, y) => Err(Failure::Config(format!(
            "no UMP non-winner test exists: H1 contains {} with {{{}}} above {} and {} with {{{}}} above {}",
            ballot_file::format_ballot(alts, &x),
            names(alts, &x.above(target)),
            alts.name(target),
            ballot_file::format_ballot(alts, &y),
            names(alts, &y.above(target)),
            alts.name(target),
        ))),
    }
}

fn cmd_test(args: TestArgs) -> Result<ExitCode, Failure> {
    let file = read_profile(&args.profile)?;
    let alts = &file.alternatives;
    let model = Model::by_name(args.model.as_str(), alts.len(), args.phi)?;
    let target = alts.id(&args.target).map_err(|e| Failure::Parse(format!("--target: {e}")))?;
    let registry = Registry::standard();
    let family_name = match (&args.family, args.kind) {
        (Some(f), _) => f.clone(),
        (None, Some(Kind::Winner)) => format!("{}-winner", args.model.as_str()),
        (None, Some(Kind::Nonwinner)) => format!("{}-nonwinner", args.model.as_str()),
        (None, None) => unreachable!("clap requires --kind or --family"),
    };
    let family = registry.get(&family_name)?;
    let nonwinner = matches!(
        family.null_kind(&TestRequest {
            model: model.clone(),
            target,
            above_set: Some(vec![]),
            alpha: args.alpha,
            n: 1,
        }),
        NullKind::NonWinner { .. }
    );
    let above_set = if nonwinner {
        let set = resolve_above_set(&args, &file, &model, target)?;
        if set.is_none() {
            return Err(Failure::Config(
                "a non-winner test needs the H1 above-set: pass --above-set or --h1".into(),
            ));
        }
        set
    } else {
        if args.above_set.is_some() || args.h1.is_some() {
            return Err(Failure::Config(format!("{family_name} takes no --above-set or --h1")));
        }
        None
    };
    let req = TestRequest {
        model: model.clone(),
        target,
        above_set: above_set.clone(),
        alpha: args.alpha,
        n: file.profile.n(),
    };
    let cache = DiskCache::from_env();
    let test = family.build(&req, cache.as_ref())?;
    let report = run(&family_name, &test, &file.profile, &model)?;

    let mut out = Out::new(args.format);
    out.put("test", &report.test);
    out.put("model", model.name());
    out.put("phi", model.phi());
    out.put("m", model.m());
    out.put("n", file.profile.n());
    out.put("alpha", report.alpha);
    out.put("target", alts.name(target));
    if let Some(set) = &above_set {
        out.put("above_set", names(alts, set));
    }
    out.put("statistic", fmt_f(report.statistic));
    out.put("tail", format!("{:?}", report.tail).to_lowercase());
    out.put("threshold", fmt_f(report.threshold));
    out.put("gamma", fmt_f(report.gamma));
    let reject_probability = match report.decision {
        Decision::Reject => 1.0,
        Decision::Retain => 0.0,
        Decision::Randomized(g) => g,
    };
    out.put(
        "decision",
        match report.decision {
            Decision::Randomized(_) => "randomized".to_string(),
            d => d.to_string(),
        },
    );
    out.put("reject_probability", fmt_f(reject_probability));
    out.put("p_value", fmt_f(report.p_value));
    if let Some(draws) = report.approximate {
        out.put("null_distribution", format!("monte-carlo ({draws} draws)"));
    } else {
        out.put("null_distribution", "exact");
    }
    let code = match report.decision {
        Decision::Reject => 3,
        Decision::Retain => 0,
        Decision::Randomized(g) => {
            if args.realize {
                let seed = args.seed.expect("clap enforces --seed with --realize");
                let u: f64 = ChaCha8Rng::seed_from_u64(seed).gen();
                let rejected = u < g;
                out.put("realized", if rejected { "reject" } else { "retain" });
                out.put("seed", seed);
                if rejected {
                    3
                } else {
                    0
                }
            } else {
                4
            }
        }
    };
    out.print();
    Ok(ExitCode::from(code))
}

fn cmd_table(args: TableArgs) -> Result<ExitCode, Failure> {
    let model = Model::by_name(args.model.as_str(), args.m, args.phi)?;
    let kind = NullKind::parse(&args.statistic).map_err(|e| Failure::Parse(format!("--statistic: {e}")))?;
    let dist = kind.null_distribution(&model, args.n)?;
    if dist.approximate().is_some() {
        return Err(Failure::Config(format!(
            "enumeration limit exceeded: exact Mallows tables need m <= {MALLOWS_ENUMERATION_LIMIT}, got m = {}",
            args.m
        )));
    }
    let key = TableKey::new(&model, args.n, kind.token());
    match &args.output {
        Some(path) => {
            umpvote::cache::write_table(path, &key, &dist)?;
            eprintln!("wrote {} rows to {}", dist.values().len(), path.display());
        }
        None => print!("{}", format_table(&key, &dist)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_select(args: SelectArgs) -> Result<ExitCode, Failure> {
    let file = read_profile(&args.profile)?;
    let alts = &file.alternatives;
    let model = || -> Result<Model, Failure> {
        let phi = args
            .phi
            .ok_or_else(|| Failure::Config("--phi is required for test-based selection".into()))?;
        Ok(Model::by_name(args.model.as_str(), alts.len(), phi)?)
    };
    let (label, score_key, sel): (&str, &str, Selection) = match args.method {
        Method::WinnerTests => ("winner-tests", "p_value", select_by_winner_tests(&file.profile, &model()?)?),
        Method::NonwinnerTests => ("nonwinner-tests", "p_value", select_by_nonwinner_tests(&file.profile, &model()?)?),
        Method::Borda => ("borda", "borda", borda_winner(&file.profile)?),
    };
    let mut out = Out::new(args.format);
    out.put("method", label);
    out.put("n", file.profile.n());
    out.put("winners", names(alts, &sel.winners));
    for (a, s) in sel.scores.iter().enumerate() {
        out.put(format!("{score_key}.{}", alts.name(a)), fmt_f(*s));
    }
    out.print();
    Ok(ExitCode::SUCCESS)
}

fn cmd_families() -> Result<ExitCode, Failure> {
    let registry = Registry::standard();
    for f in registry.families() {
        println!("{:22}{:11}{}", f.name(), f.model(), f.description());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Table(a) => cmd_table(a),
        Command::Select(a) => cmd_select(a),
        Command::Verify(a) => verify::run(a),
        Command::Families => cmd_families(),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
