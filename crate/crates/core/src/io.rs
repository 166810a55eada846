//! JSON file formats for games, strategies, value vectors, certificates,
//! partitions and leak specifications.
//!
//! Probabilities are `"p/q"` strings in exact mode and JSON numbers in float
//! mode. Float numbers are read as the exact binary value of the `f64`, so a
//! float game round-trips bit for bit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bellman::{Horizon, Objective, ValueVector};
use crate::error::{Error, Result};
use crate::game::{collapse_targets, validate, Diagnostic, DiagnosticKind, Distribution, Game, GameBuilder, Mode, Player, StateId};
use crate::leaky::{LeakRecord, LeakSpec};
use crate::num::{format_rational, parse_rational, Rational, Scalar};
use crate::optimal::Partition;
use crate::strategy::{MemorylessStrategy, StageStrategy, Strategy};
use crate::verify::CertReport;

/// A probability as written in a file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prob {
    Text(String),
    Number(f64),
}

impl Prob {
    pub fn encode(mode: Mode, p: &Rational) -> Prob {
        match mode {
            Mode::Exact => Prob::Text(format_rational(p)),
            Mode::Float => Prob::Number(p.to_f64()),
        }
    }

    pub fn decode(&self, mode: Mode) -> Result<Rational> {
        match (self, mode) {
            (Prob::Text(t), _) => parse_rational(t),
            (Prob::Number(x), Mode::Float) => {
                if x.is_finite() {
                    Ok(x.to_rational())
                } else {
                    Err(Error::Parse(format!("probability {x} is not finite")))
                }
            }
            (Prob::Number(x), Mode::Exact) => Err(Error::Parse(format!(
                "exact-mode probability {x} must be a \"p/q\" string"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRecord {
    pub state: String,
    pub max_action: String,
    pub min_action: String,
    pub successors: BTreeMap<String, Prob>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    #[serde(default)]
    pub mode: Mode,
    pub states: Vec<String>,
    /// The target sink; alternatively give `targets`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<String>,
    /// States merged into a fresh ⊤ on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<String>>,
    pub bottom: String,
    pub transitions: Vec<TransitionRecord>,
}

impl GameFile {
    pub fn from_game(game: &Game) -> Self {
        let mode = game.mode();
        let mut transitions = Vec::new();
        for s in game.states() {
            for a in 0..game.n_max(s) {
                for b in 0..game.n_min(s) {
                    transitions.push(TransitionRecord {
                        state: game.name(s).to_string(),
                        max_action: game.max_label(s, a).to_string(),
                        min_action: game.min_label(s, b).to_string(),
                        successors: game
                            .dist(s, a, b)
                            .iter()
                            .map(|(t, p)| (game.name(t).to_string(), Prob::encode(mode, p)))
                            .collect(),
                    });
                }
            }
        }
        GameFile {
            mode,
            states: game.names().to_vec(),
            top: Some(game.name(game.top()).to_string()),
            targets: None,
            bottom: game.name(game.bottom()).to_string(),
            transitions,
        }
    }

    /// Builds the game without validating it, with the diagnostics found
    /// while reading the records. Action order follows first appearance.
    pub fn to_game_unchecked(&self) -> Result<(Game, Vec<Diagnostic>)> {
        let mut diags = Vec::new();
        let mut b = GameBuilder::new(self.mode);
        let mut seen_names = BTreeSet::new();
        for name in &self.states {
            if !seen_names.insert(name.as_str()) {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::Structure,
                    message: format!("state {name} listed twice"),
                });
            }
            b.state(name);
        }
        let index = |name: &str| self.states.iter().position(|n| n == name);
        let mut given = BTreeSet::new();
        for rec in &self.transitions {
            let Some(s) = index(&rec.state) else {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::DanglingState,
                    message: format!("transition from unknown state {}", rec.state),
                });
                continue;
            };
            let a = b.max_action(s, &rec.max_action);
            let j = b.min_action(s, &rec.min_action);
            let triple = format!("p({},{},{})", rec.state, rec.max_action, rec.min_action);
            if !given.insert((s, a, j)) {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::Structure,
                    message: format!("{triple}: given twice"),
                });
                continue;
            }
            let mut succ = Vec::new();
            for (name, p) in &rec.successors {
                match index(name) {
                    Some(t) => succ.push((t, p.decode(self.mode)?)),
                    None => diags.push(Diagnostic {
                        kind: DiagnosticKind::DanglingState,
                        message: format!("{triple}: unknown successor {name}"),
                    }),
                }
            }
            b.transition(s, a, j, succ);
        }
        match &self.top {
            Some(top) => match index(top) {
                Some(t) => {
                    b.top(t);
                }
                None => diags.push(Diagnostic {
                    kind: DiagnosticKind::DanglingState,
                    message: format!("top {top} is not a listed state"),
                }),
            },
            None if self.targets.is_none() => diags.push(Diagnostic {
                kind: DiagnosticKind::Structure,
                message: "neither top nor targets given".into(),
            }),
            None => {}
        }
        match index(&self.bottom) {
            Some(t) => {
                b.bottom(t);
            }
            None => diags.push(Diagnostic {
                kind: DiagnosticKind::DanglingState,
                message: format!("bottom {} is not a listed state", self.bottom),
            }),
        }
        if self.targets.is_some() && self.top.is_some() {
            diags.push(Diagnostic {
                kind: DiagnosticKind::Structure,
                message: "give either top or targets, not both".into(),
            });
        }
        Ok((b.build_unchecked(), diags))
    }

    /// Reads, validates and, when `targets` is given, normalizes the game.
    pub fn to_game(&self) -> Result<Game> {
        let (game, mut diags) = self.to_game_unchecked()?;
        let targets = match &self.targets {
            Some(targets) => {
                let mut set = BTreeSet::new();
                for t in targets {
                    match self.states.iter().position(|n| n == t) {
                        Some(i) => {
                            set.insert(i);
                        }
                        None => return Err(Error::UnknownState(t.clone())),
                    }
                }
                Some(set)
            }
            None => None,
        };
        if let Some(set) = targets {
            if !diags.is_empty() {
                return Err(Error::InvalidGame(diags));
            }
            // The first target stands in for ⊤ until the targets are merged.
            let mut parts = game.parts();
            parts.top = *set.iter().next().ok_or_else(|| Error::InvalidParams("empty target list".into()))?;
            let provisional = Game::from_parts(parts);
            let merged = collapse_targets(&sinkify(&provisional, &set), &set)?;
            return Ok(merged);
        }
        diags.extend(validate(&game));
        if diags.is_empty() {
            Ok(game)
        } else {
            Err(Error::InvalidGame(diags))
        }
    }
}

/// Turns every target into a sink so that the merged game validates no
/// matter what rows the targets were given.
fn sinkify(game: &Game, targets: &BTreeSet<StateId>) -> Game {
    let mut parts = game.parts();
    for &t in targets {
        parts.max_labels[t] = vec!["stay".into()];
        parts.min_labels[t] = vec!["stay".into()];
        parts.trans[t] = vec![vec![Distribution::point(t)]];
    }
    Game::from_parts(parts)
}

pub type MixFile = BTreeMap<String, Prob>;

/// A memoryless strategy (`choice`) or a stage strategy (`stages` plus
/// `default`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub player: Player,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice: Option<BTreeMap<String, MixFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<BTreeMap<String, MixFile>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<BTreeMap<String, MixFile>>,
}

fn encode_row(game: &Game, player: Player, row: &[Distribution]) -> BTreeMap<String, MixFile> {
    let mode = game.mode();
    game.states()
        .map(|s| {
            let mix = row[s]
                .iter()
                .map(|(a, p)| (game.action_label(player, s, a).to_string(), Prob::encode(mode, p)))
                .collect();
            (game.name(s).to_string(), mix)
        })
        .collect()
}

fn decode_row(game: &Game, player: Player, mode: Mode, row: &BTreeMap<String, MixFile>) -> Result<Vec<Distribution>> {
    for name in row.keys() {
        game.state_by_name(name)?;
    }
    game.states()
        .map(|s| match row.get(game.name(s)) {
            Some(mix) => {
                let mut d = Distribution::new();
                for (label, p) in mix {
                    let a = game.action_index(player, s, label).ok_or_else(|| {
                        Error::InvalidStrategy(format!("state {}: unknown action {label}", game.name(s)))
                    })?;
                    d.add(a, p.decode(mode)?);
                }
                Ok(d)
            }
            None if game.n_actions(player, s) == 1 => Ok(Distribution::point(0)),
            None => Err(Error::InvalidStrategy(format!("no choice for state {}", game.name(s)))),
        })
        .collect()
}

impl StrategyFile {
    pub fn from_strategy(game: &Game, strategy: &Strategy) -> Self {
        let player = strategy.player();
        match strategy {
            Strategy::Memoryless(m) => StrategyFile {
                player,
                mode: game.mode(),
                choice: Some(encode_row(game, player, m.choices())),
                stages: None,
                default: None,
            },
            Strategy::Stage(st) => StrategyFile {
                player,
                mode: game.mode(),
                choice: None,
                stages: Some(st.stages.iter().map(|r| encode_row(game, player, r)).collect()),
                default: Some(encode_row(game, player, &st.default)),
            },
        }
    }

    pub fn memoryless(game: &Game, m: &MemorylessStrategy) -> Self {
        Self::from_strategy(game, &Strategy::Memoryless(m.clone()))
    }

    pub fn to_strategy(&self, game: &Game) -> Result<Strategy> {
        let strategy = match (&self.choice, &self.stages, &self.default) {
            (Some(choice), None, None) => Strategy::Memoryless(MemorylessStrategy::new(
                self.player,
                decode_row(game, self.player, self.mode, choice)?,
            )),
            (None, Some(stages), Some(default)) => Strategy::Stage(StageStrategy {
                player: self.player,
                stages: stages
                    .iter()
                    .map(|r| decode_row(game, self.player, self.mode, r))
                    .collect::<Result<_>>()?,
                default: decode_row(game, self.player, self.mode, default)?,
            }),
            _ => {
                return Err(Error::Parse(
                    "strategy needs either `choice` or both `stages` and `default`".into(),
                ))
            }
        };
        strategy.check(game)?;
        Ok(strategy)
    }

    pub fn to_memoryless(&self, game: &Game) -> Result<MemorylessStrategy> {
        match self.to_strategy(game)? {
            Strategy::Memoryless(m) => Ok(m),
            Strategy::Stage(_) => Err(Error::InvalidStrategy("a memoryless strategy is required".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HorizonFile {
    Inf,
    #[serde(untagged)]
    Steps(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueFile {
    pub objective: Objective,
    pub horizon: HorizonFile,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub exact: bool,
    pub residual: f64,
    pub values: BTreeMap<String, String>,
}

impl ValueFile {
    pub fn from_values(game: &Game, v: &ValueVector) -> Self {
        ValueFile {
            objective: v.objective,
            horizon: match v.horizon {
                Horizon::Infinite => HorizonFile::Inf,
                Horizon::Steps(n) => HorizonFile::Steps(n),
            },
            tol: v.tol,
            iterations: v.iterations,
            converged: v.converged,
            exact: v.exact,
            residual: if v.residual.is_finite() { v.residual } else { -1.0 },
            values: game
                .states()
                .map(|s| (game.name(s).to_string(), format_rational(&v.values[s])))
                .collect(),
        }
    }

    pub fn to_values(&self, game: &Game) -> Result<ValueVector> {
        let values = game
            .states()
            .map(|s| {
                let text = self
                    .values
                    .get(game.name(s))
                    .ok_or_else(|| Error::Parse(format!("no value for state {}", game.name(s))))?;
                parse_rational(text)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ValueVector {
            objective: self.objective,
            horizon: match self.horizon {
                HorizonFile::Inf => Horizon::Infinite,
                HorizonFile::Steps(n) => Horizon::Steps(n),
            },
            values,
            exact: self.exact,
            tol: self.tol,
            iterations: self.iterations,
            converged: self.converged,
            residual: self.residual,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertRecordFile {
    pub state: String,
    pub target: String,
    pub achieved: String,
    pub pass: bool,
    /// Min's best-response action at this state.
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertFile {
    pub objective: Objective,
    pub pass: bool,
    pub records: Vec<CertRecordFile>,
}

impl CertFile {
    pub fn from_report(game: &Game, report: &CertReport) -> Self {
        CertFile {
            objective: report.objective,
            pass: report.passed(),
            records: report
                .records
                .iter()
                .map(|r| CertRecordFile {
                    state: game.name(r.state).to_string(),
                    target: format_rational(&r.target),
                    achieved: format_rational(&r.achieved),
                    pass: r.pass,
                    witness: game
                        .action_label(Player::Min, r.state, report.witness[r.state])
                        .to_string(),
                })
                .collect(),
        }
    }
}

/// Targets file: state name to probability string.
pub type TargetsFile = BTreeMap<String, String>;

pub fn decode_targets(game: &Game, file: &TargetsFile) -> Result<BTreeMap<StateId, Rational>> {
    file.iter()
        .map(|(name, p)| Ok((game.state_by_name(name)?, parse_rational(p)?)))
        .collect()
}

pub fn encode_targets(game: &Game, targets: &BTreeMap<StateId, Rational>) -> TargetsFile {
    targets
        .iter()
        .map(|(&s, p)| (game.name(s).to_string(), format_rational(p)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    pub alpha: BTreeMap<String, String>,
    pub delta: String,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    #[serde(rename = "S0")]
    pub s0: Vec<String>,
    #[serde(rename = "S1")]
    pub s1: Vec<String>,
    pub witnesses: BTreeMap<String, WitnessFile>,
}

impl PartitionFile {
    pub fn from_partition(game: &Game, part: &Partition) -> Self {
        let names = |set: &BTreeSet<StateId>| set.iter().map(|&s| game.name(s).to_string()).collect();
        PartitionFile {
            s0: names(&part.s0),
            s1: names(&part.s1),
            witnesses: part
                .witnesses
                .iter()
                .map(|(&s, w)| {
                    (
                        game.name(s).to_string(),
                        WitnessFile {
                            alpha: w
                                .alpha
                                .iter()
                                .map(|(a, p)| (game.max_label(s, a).to_string(), format_rational(p)))
                                .collect(),
                            delta: format_rational(&w.delta),
                            rank: w.rank,
                        },
                    )
                })
                .collect(),
        }
    }
}

pub fn encode_leaks(game: &Game, spec: &LeakSpec) -> Vec<LeakRecord> {
    spec.iter()
        .map(|(s, b, e)| LeakRecord {
            state: game.name(s).to_string(),
            min_action: game.min_label(s, b).to_string(),
            epsilon: format_rational(e),
        })
        .collect()
}

pub fn decode_leaks(game: &Game, records: &[LeakRecord]) -> Result<LeakSpec> {
    let mut spec = LeakSpec::new();
    for r in records {
        let s = game.state_by_name(&r.state)?;
        let b = game
            .action_index(Player::Min, s, &r.min_action)
            .ok_or_else(|| Error::InvalidParams(format!("state {}: unknown Min action {}", r.state, r.min_action)))?;
        spec.insert(s, b, parse_rational(&r.epsilon)?);
    }
    spec.check(game)?;
    Ok(spec)
}

/// Everything a pipeline stage may hand to the next one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub game: GameFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<ValueFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaky: Option<GameFile>,
}

impl Envelope {
    pub fn new(game: &Game) -> Self {
        Envelope {
            game: GameFile::from_game(game),
            strategy: None,
            targets: None,
            values: None,
            certificate: None,
            partition: None,
            leaky: None,
        }
    }
}

/// Reads either a bare game file or an envelope.
pub fn read_document(text: &str) -> Result<Envelope> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("game").is_some() {
        Ok(serde_json::from_value(value)?)
    } else {
        let game: GameFile = serde_json::from_value(value)?;
        Ok(Envelope {
            game,
            strategy: None,
            targets: None,
            values: None,
            certificate: None,
            partition: None,
            leaky: None,
        })
    }
}

pub fn game_to_json(game: &Game) -> String {
    serde_json::to_string_pretty(&GameFile::from_game(game)).expect("game files serialize")
}

pub fn game_from_json(text: &str) -> Result<Game> {
    let file: GameFile = serde_json::from_str(text)?;
    file.to_game()
}
