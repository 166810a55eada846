//! `csg`: command-line front end for the concurrent stochastic game toolkit.
//!
//! Every command reads a game (or an envelope carrying a game and earlier
//! artifacts) from `--game` or standard input and writes either JSON
//! artifacts or one text record per line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csg_core::bellman::{horizon_values, reach_values, safety_values, IterOptions, Objective, ValueVector};
use csg_core::builtin::builtin;
use csg_core::game::{validate, Mode};
use csg_core::io::{
    decode_leaks, decode_targets, encode_targets, read_document, CertFile, Envelope, GameFile, PartitionFile,
    StrategyFile, ValueFile,
};
use csg_core::leaky::{leak_all, make_leak, LeakRecord};
use csg_core::num::{format_rational, parse_rational};
use csg_core::optimal::{synthesize_optimal, OptimalOptions};
use csg_core::random::{random_game, RandomSpec};
use csg_core::reach_eps::{synthesize_eps, EpsOptions, EpsSplit};
use csg_core::safety::synthesize_safety;
use csg_core::verify::{approx, certify_objective, guarantee, simulate, stage_strategy_guarantee, CertReport};
use csg_core::{Distribution, Error, Game, MemorylessStrategy, Player, Rational, StateId, Strategy};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "csg", version, about = "Values and memoryless strategies for concurrent stochastic reachability games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a game file and list every problem found.
    Validate(Common),
    /// Compute reach or avoid values by value iteration.
    Values(ValuesArgs),
    /// Compute the exact step-bounded reach values.
    Horizon(HorizonArgs),
    /// Synthesize an optimal memoryless strategy for avoiding the losing sink.
    SynthSafety(SafetyArgs),
    /// Synthesize an eps-optimal memoryless strategy for reaching the target.
    SynthReachEps(ReachEpsArgs),
    /// Synthesize a memoryless strategy that is optimal wherever an optimal strategy exists.
    SynthOptimal(OptimalArgs),
    /// Add leaks to ⊥ on Min actions.
    Leak(LeakArgs),
    /// Certify a Max strategy against exact Min best responses.
    Verify(VerifyArgs),
    /// Estimate reach/avoid frequencies by Monte Carlo playouts.
    Simulate(SimulateArgs),
    /// Print a built-in example game.
    Example(ExampleArgs),
    /// Print a reproducible random game.
    Random(RandomArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Records,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Reach,
    Avoid,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Reach => Objective::Reach,
            ObjectiveArg::Avoid => Objective::Avoid,
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Game or envelope file; `-` or absent reads standard input.
    #[arg(long)]
    game: Option<PathBuf>,
    /// Output format; the default depends on the command.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for internal parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Log every simplex tableau to standard error.
    #[arg(long)]
    dump_lp: bool,
}

#[derive(Args, Clone)]
struct IterArgs {
    /// Sup-norm residual at which value iteration stops.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Largest denominator tried when snapping to rationals; 0 disables snapping.
    #[arg(long, default_value_t = 64)]
    snap_den: u64,
}

impl IterArgs {
    fn options(&self) -> IterOptions {
        IterOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            snap_den: (self.snap_den > 0).then_some(self.snap_den),
            ..IterOptions::default()
        }
    }
}

#[derive(Args)]
struct ValuesArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    iter: IterArgs,
    #[arg(long, value_enum, default_value = "reach")]
    objective: ObjectiveArg,
}

#[derive(Args)]
struct HorizonArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    horizon: usize,
}

#[derive(Args)]
struct SafetyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    iter: IterArgs,
    /// Fixpoint residual accepted for float values.
    #[arg(long, default_value_t = 1e-6)]
    theta: f64,
}

#[derive(Args)]
struct ReachEpsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    iter: IterArgs,
    #[arg(long)]
    eps: String,
    /// Budget split `e1,e2,e3` summing to eps.
    #[arg(long)]
    split: Option<String>,
    /// Comma-separated states to certify; default: states of positive value.
    #[arg(long)]
    s0: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    theta: f64,
    #[arg(long, default_value_t = 100_000)]
    horizon_cap: usize,
}

#[derive(Args)]
struct OptimalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    iter: IterArgs,
    /// Upper bound on the eps spent on states without optimal strategies.
    #[arg(long, default_value = "1/100")]
    eps_fallback: String,
    #[arg(long, default_value_t = 1e-6)]
    theta: f64,
    #[arg(long, default_value_t = 100_000)]
    horizon_cap: usize,
}

#[derive(Args)]
struct LeakArgs {
    #[command(flatten)]
    common: Common,
    /// Leak on every Min action.
    #[arg(long, conflicts_with = "leaks")]
    eps: Option<String>,
    /// JSON list of {state, min_action, epsilon} records.
    #[arg(long)]
    leaks: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Max strategy file; default: the strategy in the envelope.
    #[arg(long)]
    strategy: Option<PathBuf>,
    /// Map state -> "p/q"; default: the targets in the envelope.
    #[arg(long)]
    targets: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "reach")]
    objective: ObjectiveArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    strategy: Option<PathBuf>,
    /// Min strategy file; default: Min's exact best response to a memoryless
    /// Max strategy, uniform against a stage strategy.
    #[arg(long)]
    opponent: Option<PathBuf>,
    /// Start state; default: every state that is not a sink.
    #[arg(long)]
    start: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    #[arg(long, default_value_t = 1_000)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExampleArgs {
    /// snowball, leaky_mdp or value_gift.
    name: String,
    /// Parameters as key=value, e.g. k=4 or q=3/4,5/6.
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long)]
    float: bool,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    states: usize,
    #[arg(long, default_value_t = 3)]
    max_a: usize,
    #[arg(long, default_value_t = 3)]
    max_b: usize,
    #[arg(long, default_value_t = 0.4)]
    density: f64,
    #[arg(long)]
    turn_based: bool,
}

enum Failure {
    Input(String),
    Certificate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unsound(_) => Failure::Certificate(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<Outcome, Failure>;

/// What a command prints, and whether its certificate passed.
struct Outcome {
    text: String,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Validate(c) => Some(c),
        Command::Values(a) => Some(&a.common),
        Command::Horizon(a) => Some(&a.common),
        Command::SynthSafety(a) => Some(&a.common),
        Command::SynthReachEps(a) => Some(&a.common),
        Command::SynthOptimal(a) => Some(&a.common),
        Command::Leak(a) => Some(&a.common),
        Command::Verify(a) => Some(&a.common),
        Command::Simulate(a) => Some(&a.common),
        Command::Example(_) | Command::Random(_) => None,
    };
    let mut logger = env_logger::Builder::new();
    logger.filter_level(log::LevelFilter::Warn);
    if common.is_some_and(|c| c.dump_lp) {
        logger.filter_module("csg_core::lp", log::LevelFilter::Trace);
    }
    logger.target(env_logger::Target::Stderr).init();
    if let Some(jobs) = common.and_then(|c| c.jobs) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Validate(c) => cmd_validate(&c),
        Command::Values(a) => cmd_values(&a),
        Command::Horizon(a) => cmd_horizon(&a),
        Command::SynthSafety(a) => cmd_safety(&a),
        Command::SynthReachEps(a) => cmd_reach_eps(&a),
        Command::SynthOptimal(a) => cmd_optimal(&a),
        Command::Leak(a) => cmd_leak(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Example(a) => cmd_example(&a),
        Command::Random(a) => cmd_random(&a),
    };
    match result {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.text.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Certificate(msg)) => {
            eprintln!("certificate failure: {msg}");
            ExitCode::from(1)
        }
    }
}

fn read_text(path: Option<&PathBuf>) -> Result<String, Failure> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        }
        _ => {
            io::stdin().read_to_string(&mut text)?;
        }
    }
    Ok(text)
}

fn load(common: &Common) -> Result<(Envelope, Game), Failure> {
    let doc = read_document(&read_text(common.game.as_ref())?)?;
    let game = doc.game.to_game()?;
    Ok((doc, game))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    text
}

fn ok(text: String) -> CmdResult {
    Ok(Outcome { text, pass: true })
}

fn parse_rat(flag: &str, text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure::Input(format!("--{flag}: {e}")))
}

fn cmd_validate(c: &Common) -> CmdResult {
    let text = read_text(c.game.as_ref())?;
    let doc = read_document(&text)?;
    let (game, mut diags) = doc.game.to_game_unchecked()?;
    if diags.is_empty() {
        if doc.game.targets.is_some() {
            if let Err(Error::InvalidGame(d)) = doc.game.to_game() {
                diags = d;
            }
        } else {
            diags = validate(&game);
        }
    }
    let text = match c.format.unwrap_or(Format::Records) {
        Format::Json => json(&serde_json::json!({ "valid": diags.is_empty(), "diagnostics": diags })),
        Format::Records => {
            let mut out = String::new();
            for d in &diags {
                let _ = writeln!(out, "diagnostic kind={:?} message={:?}", d.kind, d.message);
            }
            if diags.is_empty() {
                let _ = writeln!(out, "valid states={} mode={:?}", game.n_states(), game.mode());
            }
            out
        }
    };
    if diags.is_empty() {
        ok(text)
    } else {
        print!("{text}");
        Err(Failure::Input(format!("{} problem(s) found", diags.len())))
    }
}

fn value_records(game: &Game, v: &ValueVector) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "objective={:?} horizon={:?} exact={} converged={} iterations={} residual={:e}",
        v.objective, v.horizon, v.exact, v.converged, v.iterations, v.residual
    );
    for s in game.states() {
        let _ = writeln!(
            out,
            "state={} value={} approx={:.12}",
            game.name(s),
            format_rational(&v.values[s]),
            approx(&v.values[s])
        );
    }
    out
}

fn emit_values(game: &Game, v: &ValueVector, format: Option<Format>) -> CmdResult {
    match format.unwrap_or(Format::Json) {
        Format::Json => ok(json(&ValueFile::from_values(game, v))),
        Format::Records => ok(value_records(game, v)),
    }
}

fn cmd_values(a: &ValuesArgs) -> CmdResult {
    let (_, game) = load(&a.common)?;
    let opts = a.iter.options();
    let v = match a.objective {
        ObjectiveArg::Reach => reach_values(&game, &opts),
        ObjectiveArg::Avoid => safety_values(&game, &opts),
    };
    if !v.converged {
        log::warn!("value iteration stopped at {} sweeps before reaching tol", v.iterations);
    }
    emit_values(&game, &v, a.common.format)
}

fn cmd_horizon(a: &HorizonArgs) -> CmdResult {
    let (_, game) = load(&a.common)?;
    let v = horizon_values(&game, a.horizon).pop().expect("horizon sequence is nonempty");
    emit_values(&game, &v, a.common.format)
}

fn cmd_safety(a: &SafetyArgs) -> CmdResult {
    let (_, game) = load(&a.common)?;
    let v = safety_values(&game, &a.iter.options());
    let sigma = synthesize_safety(&game, &v, a.theta)?;
    let targets: BTreeMap<StateId, Rational> = game.states().map(|s| (s, v.values[s].clone())).collect();
    let report = certify_objective(&game, &sigma, &targets, Objective::Avoid)?;
    let mut env = Envelope::new(&game);
    env.strategy = Some(StrategyFile::memoryless(&game, &sigma));
    env.values = Some(ValueFile::from_values(&game, &v));
    artifact(a.common.format, env, &game, &report, v.exact)
}

/// Writes the envelope as JSON, or the certificate as records. Float
/// certificates are informative only and never fail the command.
fn artifact(format: Option<Format>, mut env: Envelope, game: &Game, report: &CertReport, exact: bool) -> CmdResult {
    let pass = report.passed() || !exact;
    if !report.passed() && !exact {
        log::warn!("certificate against float values failed; values were not snapped");
    }
    let text = match format.unwrap_or(Format::Json) {
        Format::Json => {
            env.targets = Some(encode_targets(
                game,
                &report.records.iter().map(|r| (r.state, r.target.clone())).collect(),
            ));
            env.certificate = Some(CertFile::from_report(game, report));
            json(&env)
        }
        Format::Records => cert_records(game, report),
    };
    Ok(Outcome { text, pass })
}

fn cert_records(game: &Game, report: &CertReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        let _ = writeln!(
            out,
            "state={} target={} achieved={} pass={} witness={}",
            game.name(r.state),
            format_rational(&r.target),
            format_rational(&r.achieved),
            r.pass,
            game.min_label(r.state, report.witness[r.state])
        );
    }
    let _ = writeln!(out, "objective={:?} pass={}", report.objective, report.passed());
    out
}

fn parse_states(game: &Game, list: &str) -> Result<BTreeSet<StateId>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| game.state_by_name(name).map_err(Failure::from))
        .collect()
}

fn cmd_reach_eps(a: &ReachEpsArgs) -> CmdResult {
    let (_, game) = load(&a.common)?;
    let eps = parse_rat("eps", &a.eps)?;
    let split = match &a.split {
        Some(text) => {
            let parts = text
                .split(',')
                .map(|p| parse_rat("split", p.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            let [e1, e2, e3]: [Rational; 3] = parts
                .try_into()
                .map_err(|_| Failure::Input("--split needs three values".into()))?;
            Some(EpsSplit::new(e1, e2, e3)?)
        }
        None => None,
    };
    let s0 = a.s0.as_deref().map(|l| parse_states(&game, l)).transpose()?;
    let opts = EpsOptions {
        iter: a.iter.options(),
        horizon_cap: a.horizon_cap,
        theta: a.theta,
    };
    let out = synthesize_eps(&game, &eps, s0.as_ref(), split.as_ref(), &opts)?;
    log::info!("horizon {}, leak {}", out.horizon, out.leak);
    let mut env = Envelope::new(&game);
    env.strategy = Some(StrategyFile::memoryless(&game, &out.strategy));
    env.values = Some(ValueFile::from_values(&game, &out.values));
    env.leaky = Some(GameFile::from_game(&out.leaky));
    artifact(a.common.format, env, &game, &out.report, out.values.exact)
}

fn cmd_optimal(a: &OptimalArgs) -> CmdResult {
    let (_, game) = load(&a.common)?;
    let fallback = parse_rat("eps-fallback", &a.eps_fallback)?;
    let opts = OptimalOptions {
        iter: a.iter.options(),
        eps: EpsOptions {
            iter: a.iter.options(),
            horizon_cap: a.horizon_cap,
            theta: a.theta,
        },
    };
    let out = synthesize_optimal(&game, &fallback, &opts)?;
    for v in &out.violations {
        log::warn!(
            "local certificate fails at {} against {}: slack {}",
            game.name(v.state),
            game.min_label(v.state, v.min_action),
            v.slack
        );
    }
    let pass = out.passed();
    let mut env = Envelope::new(&game);
    env.strategy = Some(StrategyFile::memoryless(&game, &out.strategy));
    env.values = Some(ValueFile::from_values(&game, &out.values));
    env.partition = Some(PartitionFile::from_partition(&game, &out.partition));
    let mut result = artifact(a.common.format, env, &game, &out.report, true)?;
    if a.common.format == Some(Format::Records) {
        let part = PartitionFile::from_partition(&game, &out.partition);
        let _ = writeln!(
            result.text,
            "S0={} S1={} eps={}",
            part.s0.join(","),
            part.s1.join(","),
            format_rational(&out.eps)
        );
    }
    result.pass &= pass;
    Ok(result)
}

fn cmd_leak(a: &LeakArgs) -> CmdResult {
    let (_, game) = load(&a.common)?;
    let leaky = match (&a.eps, &a.leaks) {
        (Some(eps), None) => leak_all(&game, &parse_rat("eps", eps)?)?,
        (None, Some(path)) => {
            let records: Vec<LeakRecord> = serde_json::from_str(&read_text(Some(path))?).map_err(Error::from)?;
            make_leak(&game, &decode_leaks(&game, &records)?)?
        }
        _ => return Err(Failure::Input("give --eps or --leaks".into())),
    };
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => ok(json(&GameFile::from_game(&leaky))),
        Format::Records => {
            let mut out = String::new();
            for s in leaky.states() {
                for i in 0..leaky.n_max(s) {
                    for j in 0..leaky.n_min(s) {
                        let succ: Vec<String> = leaky
                            .dist(s, i, j)
                            .iter()
                            .map(|(t, p)| format!("{}:{}", leaky.name(t), format_rational(p)))
                            .collect();
                        let _ = writeln!(
                            out,
                            "state={} max_action={} min_action={} successors={}",
                            leaky.name(s),
                            leaky.max_label(s, i),
                            leaky.min_label(s, j),
                            succ.join(",")
                        );
                    }
                }
            }
            ok(out)
        }
    }
}

fn load_strategy(game: &Game, env: &Envelope, path: Option<&PathBuf>) -> Result<Strategy, Failure> {
    let file = match path {
        Some(p) => serde_json::from_str::<StrategyFile>(&read_text(Some(p))?).map_err(Error::from)?,
        None => env
            .strategy
            .clone()
            .ok_or_else(|| Failure::Input("no strategy given and none in the input".into()))?,
    };
    Ok(file.to_strategy(game)?)
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let (env, game) = load(&a.common)?;
    let strategy = load_strategy(&game, &env, a.strategy.as_ref())?;
    if strategy.player() != Player::Max {
        return Err(Failure::Input("verify certifies Max strategies".into()));
    }
    let targets = match (&a.targets, &env.targets) {
        (Some(p), _) => {
            let file: BTreeMap<String, String> = serde_json::from_str(&read_text(Some(p))?).map_err(Error::from)?;
            decode_targets(&game, &file)?
        }
        (None, Some(file)) => decode_targets(&game, file)?,
        (None, None) => game.states().map(|s| (s, Rational::from_integer(0.into()))).collect(),
    };
    let objective = Objective::from(a.objective);
    let report = match &strategy {
        Strategy::Memoryless(m) => certify_objective(&game, m, &targets, objective)?,
        Strategy::Stage(st) => {
            let achieved = stage_strategy_guarantee(&game, st, objective)?;
            let tail = MemorylessStrategy::new(Player::Max, st.default.clone());
            let mut report = certify_objective(&game, &tail, &targets, objective)?;
            for r in &mut report.records {
                r.achieved = achieved[r.state].clone();
                r.pass = r.achieved >= r.target;
            }
            report
        }
    };
    let text = match a.common.format.unwrap_or(Format::Records) {
        Format::Records => cert_records(&game, &report),
        Format::Json => json(&CertFile::from_report(&game, &report)),
    };
    Ok(Outcome {
        text,
        pass: report.passed(),
    })
}

fn cmd_simulate(a: &SimulateArgs) -> CmdResult {
    let (env, game) = load(&a.common)?;
    let sigma = load_strategy(&game, &env, a.strategy.as_ref())?;
    let pi = match &a.opponent {
        Some(p) => serde_json::from_str::<StrategyFile>(&read_text(Some(p))?)
            .map_err(Error::from)?
            .to_strategy(&game)?,
        None => match &sigma {
            Strategy::Memoryless(m) => {
                let (_, witness) = guarantee(&game, m, Objective::Reach)?;
                Strategy::Memoryless(MemorylessStrategy::new(
                    Player::Min,
                    witness.into_iter().map(Distribution::point).collect(),
                ))
            }
            Strategy::Stage(_) => Strategy::Memoryless(MemorylessStrategy::uniform(&game, Player::Min)),
        },
    };
    let starts: Vec<StateId> = match &a.start {
        Some(name) => vec![game.state_by_name(name)?],
        None => game.states().filter(|&s| !game.is_sink(s)).collect(),
    };
    let reports = starts
        .iter()
        .map(|&s| simulate(&game, &sigma, &pi, s, a.runs, a.horizon, a.seed))
        .collect::<Result<Vec<_>, _>>()?;
    match a.common.format.unwrap_or(Format::Records) {
        Format::Json => {
            let named: BTreeMap<&str, _> = reports.iter().map(|r| (game.name(r.start), r)).collect();
            ok(json(&named))
        }
        Format::Records => {
            let mut out = String::new();
            for r in &reports {
                let _ = writeln!(
                    out,
                    "state={} runs={} reach={:.6} reach_low={:.6} reach_high={:.6} avoid={:.6} avoid_low={:.6} avoid_high={:.6}",
                    game.name(r.start),
                    r.runs,
                    r.reach.frequency,
                    r.reach.low,
                    r.reach.high,
                    r.avoid.frequency,
                    r.avoid.low,
                    r.avoid.high
                );
            }
            ok(out)
        }
    }
}

fn cmd_example(a: &ExampleArgs) -> CmdResult {
    let params = a
        .params
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Failure::Input(format!("--param {p:?} is not key=value")))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    let mut game = builtin(&a.name, &params)?;
    if a.float {
        game = game.with_mode(Mode::Float);
    }
    ok(json(&GameFile::from_game(&game)))
}

fn cmd_random(a: &RandomArgs) -> CmdResult {
    let game = random_game(&RandomSpec {
        seed: a.seed,
        n_states: a.states,
        max_a: a.max_a,
        max_b: a.max_b,
        density: a.density,
        turn_based: a.turn_based,
    })?;
    ok(json(&GameFile::from_game(&game)))
}
