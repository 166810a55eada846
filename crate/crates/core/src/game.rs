//! Finite concurrent stochastic games with designated sinks `top` and `bottom`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{Rational, Scalar};

pub type StateId = usize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Max,
    Min,
}

/// Finitely supported probability map. Zero-mass keys are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Distribution {
    entries: BTreeMap<usize, Rational>,
}

impl Distribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(key: usize) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(key, Rational::one());
        Distribution { entries }
    }

    /// Sums duplicate keys and drops zero entries.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Rational)>>(pairs: I) -> Self {
        let mut d = Distribution::new();
        for (k, p) in pairs {
            d.add(k, p);
        }
        d
    }

    pub fn uniform(keys: impl IntoIterator<Item = usize>) -> Self {
        let keys: Vec<usize> = keys.into_iter().collect();
        let p = Rational::new(1.into(), (keys.len() as i64).into());
        Self::from_pairs(keys.into_iter().map(|k| (k, p.clone())))
    }

    pub fn add(&mut self, key: usize, p: Rational) {
        if p.is_zero() {
            return;
        }
        let slot = self.entries.entry(key).or_insert_with(Rational::zero);
        *slot += p;
        if slot.is_zero() {
            self.entries.remove(&key);
        }
    }

    pub fn get(&self, key: usize) -> Rational {
        self.entries.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.entries.iter().map(|(k, p)| (*k, p))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self) -> Rational {
        self.entries.values().fold(Rational::zero(), |a, p| a + p)
    }

    /// Mass placed on the keys in `set`.
    pub fn mass_in(&self, set: &BTreeSet<usize>) -> Rational {
        self.iter()
            .filter(|(k, _)| set.contains(k))
            .fold(Rational::zero(), |a, (_, p)| a + p)
    }

    pub fn expectation<T: Scalar>(&self, v: &[T]) -> T {
        self.iter()
            .fold(T::zero(), |acc, (k, p)| acc + T::from_rational(p) * v[k].clone())
    }

    /// `self + weight * other`.
    pub fn add_scaled(&mut self, other: &Distribution, weight: &Rational) {
        for (k, p) in other.iter() {
            self.add(k, p * weight);
        }
    }

    pub fn map_keys(&self, f: impl Fn(usize) -> usize) -> Distribution {
        Distribution::from_pairs(self.iter().map(|(k, p)| (f(k), p.clone())))
    }

    /// Divides by the total mass.
    pub fn normalized(&self) -> Distribution {
        let m = self.mass();
        Distribution::from_pairs(self.iter().map(|(k, p)| (k, p / &m)))
    }

    pub fn to_f64_pairs(&self) -> Vec<(usize, f64)> {
        self.iter().map(|(k, p)| (k, <f64 as Scalar>::from_rational(p))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Structure,
    MissingTransition,
    DanglingState,
    NonPositive,
    Mass,
    Sink,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// A finite concurrent game. `trans[s][a][b]` is the successor distribution
/// for Max action `a` and Min action `b` at state `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    mode: Mode,
    names: Vec<String>,
    max_labels: Vec<Vec<String>>,
    min_labels: Vec<Vec<String>>,
    trans: Vec<Vec<Vec<Distribution>>>,
    top: StateId,
    bottom: StateId,
}

impl Game {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn n_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn top(&self) -> StateId {
        self.top
    }

    pub fn bottom(&self) -> StateId {
        self.bottom
    }

    pub fn is_sink(&self, s: StateId) -> bool {
        self.trans[s]
            .iter()
            .flatten()
            .all(|d| *d == Distribution::point(s))
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn state_by_name(&self, name: &str) -> Result<StateId> {
        self.state_index(name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn n_max(&self, s: StateId) -> usize {
        self.max_labels[s].len()
    }

    pub fn n_min(&self, s: StateId) -> usize {
        self.min_labels[s].len()
    }

    pub fn max_label(&self, s: StateId, a: usize) -> &str {
        &self.max_labels[s][a]
    }

    pub fn min_label(&self, s: StateId, b: usize) -> &str {
        &self.min_labels[s][b]
    }

    pub fn max_labels(&self, s: StateId) -> &[String] {
        &self.max_labels[s]
    }

    pub fn min_labels(&self, s: StateId) -> &[String] {
        &self.min_labels[s]
    }

    pub fn n_actions(&self, player: Player, s: StateId) -> usize {
        match player {
            Player::Max => self.n_max(s),
            Player::Min => self.n_min(s),
        }
    }

    pub fn action_label(&self, player: Player, s: StateId, i: usize) -> &str {
        match player {
            Player::Max => self.max_label(s, i),
            Player::Min => self.min_label(s, i),
        }
    }

    pub fn action_index(&self, player: Player, s: StateId, label: &str) -> Option<usize> {
        let labels = match player {
            Player::Max => &self.max_labels[s],
            Player::Min => &self.min_labels[s],
        };
        labels.iter().position(|l| l == label)
    }

    pub fn dist(&self, s: StateId, a: usize, b: usize) -> &Distribution {
        &self.trans[s][a][b]
    }

    /// `p(s, alpha, b)` for a mixed Max action `alpha`.
    pub fn mixed_max(&self, s: StateId, alpha: &Distribution, b: usize) -> Distribution {
        let mut d = Distribution::new();
        for (a, w) in alpha.iter() {
            d.add_scaled(&self.trans[s][a][b], w);
        }
        d
    }

    /// `p(s, a, beta)` for a mixed Min action `beta`.
    pub fn mixed_min(&self, s: StateId, a: usize, beta: &Distribution) -> Distribution {
        let mut d = Distribution::new();
        for (b, w) in beta.iter() {
            d.add_scaled(&self.trans[s][a][b], w);
        }
        d
    }

    /// True when every state has a singleton action set on at least one side.
    pub fn is_turn_based(&self) -> bool {
        self.states().all(|s| self.n_max(s) == 1 || self.n_min(s) == 1)
    }

    /// Lossy `f64` copy of the transition table, indexed `[s][a][b]`.
    pub fn float_table(&self) -> FloatTable {
        self.trans
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|cols| cols.iter().map(Distribution::to_f64_pairs).collect())
                    .collect()
            })
            .collect()
    }

    pub(crate) fn from_parts(parts: GameParts) -> Game {
        Game {
            mode: parts.mode,
            names: parts.names,
            max_labels: parts.max_labels,
            min_labels: parts.min_labels,
            trans: parts.trans,
            top: parts.top,
            bottom: parts.bottom,
        }
    }

    pub(crate) fn into_parts(self) -> GameParts {
        GameParts {
            mode: self.mode,
            names: self.names,
            max_labels: self.max_labels,
            min_labels: self.min_labels,
            trans: self.trans,
            top: self.top,
            bottom: self.bottom,
        }
    }

    pub(crate) fn parts(&self) -> GameParts {
        self.clone().into_parts()
    }
}

/// Raw fields of a [`Game`], for crate-internal transformations.
#[derive(Clone, Debug)]
pub(crate) struct GameParts {
    pub mode: Mode,
    pub names: Vec<String>,
    pub max_labels: Vec<Vec<String>>,
    pub min_labels: Vec<Vec<String>>,
    pub trans: Vec<Vec<Vec<Distribution>>>,
    pub top: StateId,
    pub bottom: StateId,
}

impl GameParts {
    pub fn build(self) -> Result<Game> {
        let g = Game::from_parts(self);
        let diags = validate(&g);
        if diags.is_empty() {
            Ok(g)
        } else {
            Err(Error::InvalidGame(diags))
        }
    }
}

/// Incremental construction by state and action labels.
#[derive(Clone, Debug, Default)]
pub struct GameBuilder {
    mode: Mode,
    names: Vec<String>,
    max_labels: Vec<Vec<String>>,
    min_labels: Vec<Vec<String>>,
    trans: Vec<BTreeMap<(usize, usize), Distribution>>,
    top: Option<StateId>,
    bottom: Option<StateId>,
}

impl GameBuilder {
    pub fn new(mode: Mode) -> Self {
        GameBuilder {
            mode,
            ..Default::default()
        }
    }

    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return i;
        }
        self.names.push(name.to_string());
        self.max_labels.push(Vec::new());
        self.min_labels.push(Vec::new());
        self.trans.push(BTreeMap::new());
        self.names.len() - 1
    }

    pub fn actions<S: AsRef<str>>(&mut self, s: StateId, max: &[S], min: &[S]) -> &mut Self {
        self.max_labels[s] = max.iter().map(|l| l.as_ref().to_string()).collect();
        self.min_labels[s] = min.iter().map(|l| l.as_ref().to_string()).collect();
        self
    }

    pub fn max_action(&mut self, s: StateId, label: &str) -> usize {
        push_label(&mut self.max_labels[s], label)
    }

    pub fn min_action(&mut self, s: StateId, label: &str) -> usize {
        push_label(&mut self.min_labels[s], label)
    }

    pub fn transition<I>(&mut self, s: StateId, a: usize, b: usize, succ: I) -> &mut Self
    where
        I: IntoIterator<Item = (StateId, Rational)>,
    {
        self.trans[s].insert((a, b), Distribution::from_pairs(succ));
        self
    }

    pub fn has_transition(&self, s: StateId, a: usize, b: usize) -> bool {
        self.trans[s].contains_key(&(a, b))
    }

    /// Makes `s` a sink with one action per player.
    pub fn sink(&mut self, s: StateId) -> &mut Self {
        self.actions(s, &["stay"], &["stay"]);
        self.trans[s].clear();
        self.trans[s].insert((0, 0), Distribution::point(s));
        self
    }

    pub fn top(&mut self, s: StateId) -> &mut Self {
        self.top = Some(s);
        self
    }

    pub fn bottom(&mut self, s: StateId) -> &mut Self {
        self.bottom = Some(s);
        self
    }

    /// Builds without validation; triples never given become empty
    /// (missing) distributions.
    pub fn build_unchecked(&self) -> Game {
        let trans = (0..self.names.len())
            .map(|s| {
                (0..self.max_labels[s].len())
                    .map(|a| {
                        (0..self.min_labels[s].len())
                            .map(|b| self.trans[s].get(&(a, b)).cloned().unwrap_or_default())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Game {
            mode: self.mode,
            names: self.names.clone(),
            max_labels: self.max_labels.clone(),
            min_labels: self.min_labels.clone(),
            trans,
            top: self.top.unwrap_or(usize::MAX),
            bottom: self.bottom.unwrap_or(usize::MAX),
        }
    }

    pub fn build(&self) -> Result<Game> {
        let g = self.build_unchecked();
        let diags = validate(&g);
        if diags.is_empty() {
            Ok(g)
        } else {
            Err(Error::InvalidGame(diags))
        }
    }
}

fn push_label(labels: &mut Vec<String>, label: &str) -> usize {
    match labels.iter().position(|l| l == label) {
        Some(i) => i,
        None => {
            labels.push(label.to_string());
            labels.len() - 1
        }
    }
}

const FLOAT_MASS_TOL: f64 = 1e-12;

fn fmt_prob(mode: Mode, p: &Rational) -> String {
    match mode {
        Mode::Exact => p.to_string(),
        Mode::Float => <f64 as Scalar>::from_rational(p).to_string(),
    }
}

/// Every invariant violation of `game`; empty iff the game is valid.
pub fn validate(game: &Game) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |kind, message: String| out.push(Diagnostic { kind, message });
    let n = game.n_states();
    if n == 0 {
        push(DiagnosticKind::Structure, "game has no states".into());
        return out;
    }
    let top_ok = game.top < n;
    let bottom_ok = game.bottom < n;
    if !top_ok {
        push(DiagnosticKind::Structure, "top is not a state of the game".into());
    }
    if !bottom_ok {
        push(DiagnosticKind::Structure, "bottom is not a state of the game".into());
    }
    if top_ok && bottom_ok && game.top == game.bottom {
        push(DiagnosticKind::Structure, "top and bottom coincide".into());
    }
    for s in game.states() {
        let name = &game.names[s];
        if game.max_labels[s].is_empty() {
            push(DiagnosticKind::Structure, format!("state {name}: no Max actions"));
        }
        if game.min_labels[s].is_empty() {
            push(DiagnosticKind::Structure, format!("state {name}: no Min actions"));
        }
        if game.trans[s].len() != game.n_max(s)
            || game.trans[s].iter().any(|row| row.len() != game.n_min(s))
        {
            push(
                DiagnosticKind::Structure,
                format!("state {name}: transition table shape does not match action sets"),
            );
            continue;
        }
        for a in 0..game.n_max(s) {
            for b in 0..game.n_min(s) {
                let d = &game.trans[s][a][b];
                let triple = format!(
                    "p({name},{},{})",
                    game.max_labels[s][a], game.min_labels[s][b]
                );
                if d.is_empty() {
                    push(DiagnosticKind::MissingTransition, format!("{triple}: missing"));
                    continue;
                }
                for (t, p) in d.iter() {
                    if t >= n {
                        push(
                            DiagnosticKind::DanglingState,
                            format!("{triple}: successor index {t} out of range"),
                        );
                    }
                    if !p.is_positive() || *p > Rational::one() {
                        push(
                            DiagnosticKind::NonPositive,
                            format!("{triple}: probability {} outside (0,1]", fmt_prob(game.mode, p)),
                        );
                    }
                }
                let mass = d.mass();
                let bad = match game.mode {
                    Mode::Exact => !mass.is_one(),
                    Mode::Float => (<f64 as Scalar>::from_rational(&mass) - 1.0).abs() > FLOAT_MASS_TOL,
                };
                if bad {
                    push(
                        DiagnosticKind::Mass,
                        format!("{triple}: mass {} ≠ 1", fmt_prob(game.mode, &mass)),
                    );
                }
            }
        }
    }
    for (label, s) in [("top", game.top), ("bottom", game.bottom)] {
        if s < n && game.trans[s].len() == game.n_max(s) && !game.is_sink(s) {
            push(
                DiagnosticKind::Sink,
                format!("{label} state {} is not a sink", game.names[s]),
            );
        }
    }
    out
}

/// Successor lists `[s][a][b]` with `f64` probabilities.
pub type FloatTable = Vec<Vec<Vec<Vec<(usize, f64)>>>>;

fn fresh_name(names: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while names.contains(&name) {
        name.push('\'');
    }
    name
}

/// Merges `targets` into one fresh sink `top`. `bottom` is kept when it is not
/// a target; otherwise a fresh, unreachable `bottom` sink is appended.
/// Reachability values of the surviving states are unchanged.
pub fn collapse_targets(game: &Game, targets: &BTreeSet<StateId>) -> Result<Game> {
    if targets.is_empty() {
        return Err(Error::InvalidParams("target set is empty".into()));
    }
    if let Some(&bad) = targets.iter().find(|&&t| t >= game.n_states()) {
        return Err(Error::UnknownState(format!("#{bad}")));
    }
    let first = *targets.iter().next().unwrap();
    let mut index = vec![usize::MAX; game.n_states()];
    let mut kept = Vec::new();
    for s in game.states() {
        if s == first || !targets.contains(&s) {
            index[s] = kept.len();
            kept.push(s);
        }
    }
    let new_top = index[first];
    for &t in targets {
        index[t] = new_top;
    }
    let mut names: Vec<String> = kept.iter().map(|&s| game.names[s].clone()).collect();
    if targets.len() > 1 {
        names[new_top] = String::new();
        names[new_top] = fresh_name(&names, "top");
    }
    let mut max_labels = Vec::new();
    let mut min_labels = Vec::new();
    let mut trans = Vec::new();
    for &s in &kept {
        if s == first {
            max_labels.push(vec!["stay".to_string()]);
            min_labels.push(vec!["stay".to_string()]);
            trans.push(vec![vec![Distribution::point(new_top)]]);
        } else {
            max_labels.push(game.max_labels[s].clone());
            min_labels.push(game.min_labels[s].clone());
            trans.push(
                game.trans[s]
                    .iter()
                    .map(|row| row.iter().map(|d| d.map_keys(|t| index[t])).collect())
                    .collect(),
            );
        }
    }
    let bottom = if targets.contains(&game.bottom) {
        let b = names.len();
        names.push(fresh_name(&names, "bot"));
        max_labels.push(vec!["stay".to_string()]);
        min_labels.push(vec!["stay".to_string()]);
        trans.push(vec![vec![Distribution::point(b)]]);
        b
    } else {
        index[game.bottom]
    };
    GameParts {
        mode: game.mode,
        names,
        max_labels,
        min_labels,
        trans,
        top: new_top,
        bottom,
    }
    .build()
}

pub(crate) fn check_state_set(game: &Game, set: &BTreeSet<StateId>) -> Result<()> {
    match set.iter().find(|&&s| s >= game.n_states()) {
        Some(s) => Err(Error::UnknownState(format!("#{s}"))),
        None => Ok(()),
    }
}
