//! Leaks and the composite games built from them.
//!
//! Making Min action `b` leak `eps` at `s` rescales every `p(s, a, b)` by
//! `1 - eps` and sends the remaining `eps` to ⊥.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bellman::classify_min_actions;
use crate::error::{Error, Result};
use crate::game::{check_state_set, Distribution, Game, StateId};
use crate::num::Rational;
use crate::strategy::{MemorylessStrategy, StageStrategy, Strategy};

/// Leak magnitudes keyed by `(state, min_action)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LeakSpec {
    entries: BTreeMap<(StateId, usize), Rational>,
}

/// One serialized leak.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakRecord {
    pub state: String,
    pub min_action: String,
    pub epsilon: String,
}

impl LeakSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or overwrites the leak on `(s, b)`.
    pub fn insert(&mut self, s: StateId, b: usize, eps: Rational) {
        self.entries.insert((s, b), eps);
    }

    pub fn get(&self, s: StateId, b: usize) -> Option<&Rational> {
        self.entries.get(&(s, b))
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, usize, &Rational)> {
        self.entries.iter().map(|(&(s, b), e)| (s, b, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn check(&self, game: &Game) -> Result<()> {
        for (s, b, eps) in self.iter() {
            if s >= game.n_states() {
                return Err(Error::UnknownState(format!("#{s}")));
            }
            if b >= game.n_min(s) {
                return Err(Error::InvalidParams(format!(
                    "state {} has no Min action #{b}",
                    game.name(s)
                )));
            }
            if s == game.top() {
                return Err(Error::InvalidParams("⊤ cannot leak".into()));
            }
            if !eps.is_positive() || *eps >= Rational::one() {
                return Err(Error::InvalidParams(format!("leak {eps} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

fn leak_distribution(d: &Distribution, eps: &Rational, bottom: StateId) -> Distribution {
    let keep = Rational::one() - eps;
    let mut out = Distribution::from_pairs(d.iter().map(|(t, p)| (t, p * &keep)));
    out.add(bottom, eps.clone());
    out
}

pub fn make_leak(game: &Game, spec: &LeakSpec) -> Result<Game> {
    spec.check(game)?;
    let mut parts = game.parts();
    for (s, b, eps) in spec.iter() {
        for a in 0..game.n_max(s) {
            parts.trans[s][a][b] = leak_distribution(game.dist(s, a, b), eps, game.bottom());
        }
    }
    parts.build()
}

/// Every Min action outside ⊤ leaking `eps`.
pub fn all_leaks(game: &Game, eps: &Rational) -> LeakSpec {
    let mut spec = LeakSpec::new();
    for s in game.states().filter(|&s| s != game.top()) {
        for b in 0..game.n_min(s) {
            spec.insert(s, b, eps.clone());
        }
    }
    spec
}

pub fn leak_all(game: &Game, eps: &Rational) -> Result<Game> {
    make_leak(game, &all_leaks(game, eps))
}

/// Original indices of the Max actions kept at each state.
pub type ActionMap = Vec<Vec<usize>>;

/// Keeps at each state only the Max actions `sigma` can play there.
pub fn restrict_support(game: &Game, sigma: &Strategy) -> Result<(Game, ActionMap)> {
    sigma.check(game)?;
    let kept: ActionMap = game.states().map(|s| sigma.support_at(s)).collect();
    assert!(kept.iter().all(|k| !k.is_empty()), "valid strategies have nonempty supports");
    let mut parts = game.parts();
    for s in game.states() {
        parts.max_labels[s] = kept[s].iter().map(|&a| game.max_labels(s)[a].clone()).collect();
        parts.trans[s] = kept[s].iter().map(|&a| parts.trans[s][a].clone()).collect();
    }
    Ok((parts.build()?, kept))
}

fn reindex(d: &Distribution, kept: &[usize]) -> Distribution {
    d.map_keys(|a| kept.iter().position(|&k| k == a).expect("action kept by restriction"))
}

/// `sigma` expressed in the action indices of a restricted game.
pub fn restrict_strategy(sigma: &Strategy, kept: &ActionMap) -> Strategy {
    let map = |row: &[Distribution]| -> Vec<Distribution> {
        row.iter().enumerate().map(|(s, d)| reindex(d, &kept[s])).collect()
    };
    match sigma {
        Strategy::Memoryless(m) => MemorylessStrategy::new(m.player, map(m.choices())).into(),
        Strategy::Stage(st) => StageStrategy {
            player: st.player,
            stages: st.stages.iter().map(|stage| map(stage)).collect(),
            default: map(&st.default),
        }
        .into(),
    }
}

/// A strategy of the restricted game in the original action indices.
pub fn lift_strategy(sigma: &MemorylessStrategy, kept: &ActionMap) -> MemorylessStrategy {
    MemorylessStrategy::new(
        sigma.player,
        sigma
            .choices()
            .iter()
            .enumerate()
            .map(|(s, d)| d.map_keys(|a| kept[s][a]))
            .collect(),
    )
}

/// Index in the redirected game of each original state, `None` if removed.
pub type StateMap = Vec<Option<StateId>>;

/// Restricts the game to `S \ S0` plus the two sinks. Mass entering a removed
/// state `t` goes to ⊤ with probability `v(t)` and to ⊥ otherwise.
pub fn redirect_outside(game: &Game, s0: &BTreeSet<StateId>, v: &[Rational]) -> Result<(Game, StateMap)> {
    check_state_set(game, s0)?;
    let (top, bottom) = (game.top(), game.bottom());
    let removed = |t: StateId| s0.contains(&t) && t != top && t != bottom;
    let mut map: StateMap = vec![None; game.n_states()];
    let mut kept = Vec::new();
    for s in game.states().filter(|&s| !removed(s)) {
        map[s] = Some(kept.len());
        kept.push(s);
    }
    let (new_top, new_bottom) = (map[top].unwrap(), map[bottom].unwrap());
    let redirect = |d: &Distribution| {
        let mut out = Distribution::new();
        for (t, p) in d.iter() {
            if removed(t) {
                out.add(new_top, p * &v[t]);
                out.add(new_bottom, p * (Rational::one() - &v[t]));
            } else {
                out.add(map[t].unwrap(), p.clone());
            }
        }
        out
    };
    let parts = game.parts();
    let out = crate::game::GameParts {
        mode: parts.mode,
        names: kept.iter().map(|&s| parts.names[s].clone()).collect(),
        max_labels: kept.iter().map(|&s| parts.max_labels[s].clone()).collect(),
        min_labels: kept.iter().map(|&s| parts.min_labels[s].clone()).collect(),
        trans: kept
            .iter()
            .map(|&s| {
                parts.trans[s]
                    .iter()
                    .map(|row| row.iter().map(&redirect).collect())
                    .collect()
            })
            .collect(),
        top: new_top,
        bottom: new_bottom,
    };
    Ok((out.build()?, map))
}

/// Leaks of the combined game: `s1_leaks` as given, plus `eps` on every Min
/// action at a state of `S0` that strictly increases the value `v` against
/// `sigma0`.
pub fn theorem_leaks(
    game: &Game,
    s0: &BTreeSet<StateId>,
    sigma0: &MemorylessStrategy,
    v: &[Rational],
    eps: &Rational,
    s1_leaks: &LeakSpec,
) -> Result<LeakSpec> {
    check_state_set(game, s0)?;
    let mut spec = LeakSpec::new();
    for (s, b, e) in s1_leaks.iter() {
        if s0.contains(&s) {
            return Err(Error::InvalidParams(format!(
                "S1 leak placed on {} in S0",
                game.name(s)
            )));
        }
        spec.insert(s, b, e.clone());
    }
    for &s in s0.iter().filter(|&&s| s != game.top()) {
        let classes = classify_min_actions(game, s, sigma0.get(s), v, &Rational::zero());
        for b in classes.increasing {
            spec.insert(s, b, eps.clone());
        }
    }
    Ok(spec)
}

/// The combined leaky game on the full state space; `S1` rows are not
/// redirected.
pub fn build_theorem_game(
    game: &Game,
    s0: &BTreeSet<StateId>,
    sigma0: &MemorylessStrategy,
    v: &[Rational],
    eps: &Rational,
    s1_leaks: &LeakSpec,
) -> Result<Game> {
    make_leak(game, &theorem_leaks(game, s0, sigma0, v, eps, s1_leaks)?)
}
