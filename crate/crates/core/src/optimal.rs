//! Memoryless strategies that are optimal wherever an optimal strategy
//! exists and ε-optimal elsewhere.
//!
//! `S0` is found as a greatest fixpoint: starting from all states, keep the
//! states that an optimality-preserving witness can push towards ⊤ while
//! staying inside the current candidate set. The rest (`S1`) is solved in the
//! game `G1`, where mass entering `S0` is paid out at its value, by the
//! ε-pipeline; the two halves are combined and certified exactly.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::bellman::{classify_min_actions, fixpoint_violation, reach_values, IterOptions, Objective, ValueVector};
use crate::error::{Error, Result};
use crate::game::{Distribution, Game, GameParts, Player, StateId};
use crate::leaky::{build_theorem_game, leak_all, redirect_outside, LeakSpec, StateMap};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::matrix;
use crate::num::{int, Rational};
use crate::reach_eps::{synthesize_eps_with, EpsOptions};
use crate::strategy::MemorylessStrategy;
use crate::verify::{certify, guarantee, CertReport};

/// Largest Min action set for which equality subsets are enumerated.
pub const MAX_SUBSET_ACTIONS: usize = 10;

/// Merges every state of value at most `theta` into ⊥. Returns the pruned
/// game, the values of its states and the index map from the input game.
pub fn prune_value_zero(game: &Game, v: &[Rational], theta: &Rational) -> Result<(Game, Vec<Rational>, StateMap)> {
    assert!(v[game.top()] > *theta, "⊤ cannot have value 0");
    let bottom = game.bottom();
    let dead = |s: StateId| s != bottom && v[s] <= *theta;
    let mut map: StateMap = vec![None; game.n_states()];
    let mut kept = Vec::new();
    for s in game.states().filter(|&s| !dead(s)) {
        map[s] = Some(kept.len());
        kept.push(s);
    }
    let new_bottom = map[bottom].unwrap();
    let target = |t: StateId| map[t].unwrap_or(new_bottom);
    let parts = game.parts();
    let pruned = GameParts {
        mode: parts.mode,
        names: kept.iter().map(|&s| parts.names[s].clone()).collect(),
        max_labels: kept.iter().map(|&s| parts.max_labels[s].clone()).collect(),
        min_labels: kept.iter().map(|&s| parts.min_labels[s].clone()).collect(),
        trans: kept
            .iter()
            .map(|&s| {
                parts.trans[s]
                    .iter()
                    .map(|row| row.iter().map(|d| d.map_keys(target)).collect())
                    .collect()
            })
            .collect(),
        top: map[game.top()].unwrap(),
        bottom: new_bottom,
    }
    .build()?;
    let values: Vec<Rational> = kept.iter().map(|&s| v[s].clone()).collect();
    if let Some((s, d)) = fixpoint_violation(&pruned, &values) {
        return Err(Error::NotFixpoint {
            state: pruned.name(s).to_string(),
            residual: crate::num::Scalar::to_f64(&d),
        });
    }
    Ok((pruned, values, map))
}

/// Optimality-preserving mixed action of a state in `S0`: it pushes at least
/// `delta` towards `R(rank - 1)` against every value-preserving Min action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub alpha: Distribution,
    pub delta: Rational,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    /// `layers[n]` is `R(n)`; the last layer is the fixpoint.
    pub layers: Vec<BTreeSet<StateId>>,
    pub witnesses: BTreeMap<StateId, Witness>,
}

impl Stratification {
    pub fn fixpoint(&self) -> &BTreeSet<StateId> {
        self.layers.last().expect("R(0) is always present")
    }
}

/// Best witness for `s` given candidate set `c` and layer `r`, over all
/// designated equality sets `E` of Min actions.
fn witness_lp(
    game: &Game,
    s: StateId,
    c: &BTreeSet<StateId>,
    r: &BTreeSet<StateId>,
    v: &[Rational],
) -> Result<Option<(Distribution, Rational)>> {
    let na = game.n_max(s);
    let nb = game.n_min(s);
    if nb > MAX_SUBSET_ACTIONS {
        return Err(Error::InvalidParams(format!(
            "state {} has {nb} Min actions; at most {MAX_SUBSET_ACTIONS} supported",
            game.name(s)
        )));
    }
    let payoff: Vec<Vec<Rational>> = (0..na)
        .map(|a| (0..nb).map(|b| game.dist(s, a, b).expectation(v)).collect())
        .collect();
    let mass: Vec<Vec<Rational>> = (0..na)
        .map(|a| (0..nb).map(|b| game.dist(s, a, b).mass_in(r)).collect())
        .collect();
    let leaves: Vec<Vec<bool>> = (0..na)
        .map(|a| (0..nb).map(|b| game.dist(s, a, b).support().any(|t| !c.contains(&t))).collect())
        .collect();
    let t = na;
    let mut best: Option<(Distribution, Rational)> = None;
    for mask in 1u32..(1 << nb) {
        let in_e = |b: usize| mask & (1 << b) != 0;
        let mut obj = vec![Rational::zero(); na + 1];
        obj[t] = int(1);
        let mut lp = LinearProgram::new(na + 1).maximize(obj);
        let mut simplex = vec![int(1); na + 1];
        simplex[t] = int(0);
        lp.constrain(simplex, Relation::Eq, int(1));
        let mut cap = vec![int(0); na + 1];
        cap[t] = int(1);
        lp.constrain(cap, Relation::Le, int(1));
        for b in 0..nb {
            let mut row: Vec<Rational> = (0..na).map(|a| payoff[a][b].clone()).collect();
            if in_e(b) {
                row.push(int(0));
                lp.constrain(row, Relation::Eq, v[s].clone());
                for a in (0..na).filter(|&a| leaves[a][b]) {
                    let mut zero = vec![int(0); na + 1];
                    zero[a] = int(1);
                    lp.constrain(zero, Relation::Eq, int(0));
                }
                let mut push: Vec<Rational> = (0..na).map(|a| mass[a][b].clone()).collect();
                push.push(-int(1));
                lp.constrain(push, Relation::Ge, int(0));
            } else {
                row.push(-int(1));
                lp.constrain(row, Relation::Ge, v[s].clone());
            }
        }
        if let LpOutcome::Optimal { x, value } = lp.solve() {
            if value.is_positive() && best.as_ref().is_none_or(|(_, d)| value > *d) {
                best = Some((matrix::to_distribution(&x[..na]), value));
            }
        }
    }
    Ok(best)
}

/// `R(0) = {⊤}`; a state joins `R(n + 1)` when some optimality-preserving
/// action (relative to `c`) pushes positive mass into `R(n)` against every
/// value-preserving Min action.
pub fn r_stratification(game: &Game, c: &BTreeSet<StateId>, v: &[Rational]) -> Result<Stratification> {
    let top = game.top();
    let mut layers = vec![BTreeSet::from([top])];
    let mut witnesses = BTreeMap::from([(
        top,
        Witness {
            alpha: Distribution::point(0),
            delta: int(1),
            rank: 0,
        },
    )]);
    loop {
        let current = layers.last().unwrap().clone();
        let rank = layers.len();
        let mut next = current.clone();
        for s in c.iter().copied().filter(|s| !current.contains(s) && *s != game.bottom()) {
            if let Some((alpha, delta)) = witness_lp(game, s, c, &current, v)? {
                next.insert(s);
                witnesses.insert(s, Witness { alpha, delta, rank });
            }
        }
        if next == current {
            return Ok(Stratification { layers, witnesses });
        }
        layers.push(next);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub s0: BTreeSet<StateId>,
    pub s1: BTreeSet<StateId>,
    pub witnesses: BTreeMap<StateId, Witness>,
}

impl Partition {
    /// Least witness mass over `S0`.
    pub fn delta(&self) -> Option<Rational> {
        self.witnesses.values().map(|w| w.delta.clone()).min()
    }
}

/// Greatest fixpoint of `C -> R(C) ∪ {⊥}` from `C = S`.
pub fn compute_s0(game: &Game, v: &[Rational]) -> Result<Partition> {
    let mut c: BTreeSet<StateId> = game.states().collect();
    loop {
        let strat = r_stratification(game, &c, v)?;
        let mut next = strat.fixpoint().clone();
        next.insert(game.bottom());
        if next == c {
            let s1 = game.states().filter(|s| !c.contains(s)).collect();
            return Ok(Partition {
                s0: c,
                s1,
                witnesses: strat.witnesses,
            });
        }
        c = next;
    }
}

/// Witness actions on `S0`, lowest index elsewhere.
pub fn sigma0(game: &Game, part: &Partition) -> MemorylessStrategy {
    MemorylessStrategy::new(
        Player::Max,
        game.states()
            .map(|s| match part.witnesses.get(&s) {
                Some(w) => w.alpha.clone(),
                None => Distribution::point(0),
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapEps {
    pub eps: Rational,
    /// Least value increase of a Min action in `S0`, if any increases.
    pub gap: Option<Rational>,
}

/// `eps = gap / 2`, or `default` when no Min action increases the value.
pub fn choose_gap_epsilon(
    game: &Game,
    part: &Partition,
    sigma0: &MemorylessStrategy,
    v: &[Rational],
    default: &Rational,
) -> Result<GapEps> {
    let mut gap: Option<Rational> = None;
    for &s in &part.s0 {
        let classes = classify_min_actions(game, s, sigma0.get(s), v, &Rational::zero());
        if let Some(&b) = classes.violating.first() {
            return Err(Error::Unsound(format!(
                "witness at {} loses value against Min action {}",
                game.name(s),
                game.action_label(Player::Min, s, b)
            )));
        }
        for b in classes.increasing {
            let inc = game.mixed_max(s, sigma0.get(s), b).expectation(v) - &v[s];
            gap = Some(match gap {
                Some(g) if g <= inc => g,
                _ => inc,
            });
        }
    }
    if let Some(g) = &gap {
        if !g.is_positive() {
            return Err(Error::Unsound("non-positive value increase".into()));
        }
    }
    let eps = match &gap {
        Some(g) => g / int(2),
        None => default.clone(),
    };
    Ok(GapEps { eps, gap })
}

/// Failure of the one-step inequality `<p-(s, sigma(s), b), w> >= w(s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalViolation {
    pub state: StateId,
    pub min_action: usize,
    pub slack: Rational,
}

#[derive(Clone, Debug, Default)]
pub struct OptimalOptions {
    pub iter: IterOptions,
    pub eps: EpsOptions,
}


#[derive(Clone, Debug)]
pub struct OptimalSynthesis {
    /// Strategy on the input game.
    pub strategy: MemorylessStrategy,
    /// Partition of the input game's states.
    pub partition: Partition,
    /// Reach values of the input game.
    pub values: ValueVector,
    /// The ε used for `S1` and for the leaks on value-increasing actions.
    pub eps: Rational,
    pub gap: Option<Rational>,
    /// Combined leaky game over the pruned state space.
    pub leaky: Game,
    /// Pruned-game index of each input state.
    pub pruned: StateMap,
    /// Violations of the one-step certificate in the leaky game.
    pub violations: Vec<LocalViolation>,
    pub report: CertReport,
}

impl OptimalSynthesis {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.report.passed()
    }
}

/// Every one-step failure of `w` as a submartingale under `sigma`.
pub fn local_violations(game: &Game, sigma: &MemorylessStrategy, w: &[Rational]) -> Vec<LocalViolation> {
    let mut out = Vec::new();
    for s in game.states() {
        for b in 0..game.n_min(s) {
            let slack = game.mixed_max(s, sigma.get(s), b).expectation(w) - &w[s];
            if slack.is_negative() {
                out.push(LocalViolation {
                    state: s,
                    min_action: b,
                    slack,
                });
            }
        }
    }
    out
}

pub fn synthesize_optimal(game: &Game, eps_fallback: &Rational, opts: &OptimalOptions) -> Result<OptimalSynthesis> {
    if !eps_fallback.is_positive() || *eps_fallback >= int(1) {
        return Err(Error::InvalidParams(format!("eps = {eps_fallback} outside (0, 1)")));
    }
    let values = reach_values(game, &opts.iter);
    if !values.exact {
        return Err(Error::InexactValues);
    }
    let (g, v, pruned) = prune_value_zero(game, &values.values, &Rational::zero())?;
    let part = compute_s0(&g, &v)?;
    let s0_strategy = sigma0(&g, &part);
    let gap = choose_gap_epsilon(&g, &part, &s0_strategy, &v, eps_fallback)?;
    let eps = if gap.eps < *eps_fallback {
        gap.eps.clone()
    } else {
        eps_fallback.clone()
    };
    log::debug!("S0 = {:?}, S1 = {:?}, eps = {eps}", part.s0, part.s1);

    // w is v on S0 and the exact avoid-⊥ guarantee of sigma1 in G1- on S1.
    let mut choice: Vec<Distribution> = s0_strategy.choices().to_vec();
    let mut w = v.clone();
    let mut s1_leaks = LeakSpec::new();
    if !part.s1.is_empty() {
        let (g1, map1) = redirect_outside(&g, &part.s0, &v)?;
        let back: Vec<StateId> = {
            let mut back = vec![0; g1.n_states()];
            for (s, m) in map1.iter().enumerate() {
                if let Some(i) = m {
                    back[*i] = s;
                }
            }
            back
        };
        let v1: Vec<Rational> = back.iter().map(|&s| v[s].clone()).collect();
        let values1 = ValueVector {
            values: v1,
            ..values.clone()
        };
        let s1_in_g1: BTreeSet<StateId> = part.s1.iter().map(|&s| map1[s].unwrap()).collect();
        let eps1 = synthesize_eps_with(&g1, &eps, Some(&s1_in_g1), None, &opts.eps, values1)?;
        let g1_leaky = leak_all(&g1, &eps1.leak)?;
        let (w1, _) = guarantee(&g1_leaky, &eps1.strategy, Objective::Avoid)?;
        for &s in &part.s1 {
            let i = map1[s].unwrap();
            choice[s] = eps1.strategy.get(i).clone();
            w[s] = w1[i].clone();
            for b in 0..g.n_min(s) {
                s1_leaks.insert(s, b, eps1.leak.clone());
            }
        }
    }
    let sigma_pruned = MemorylessStrategy::new(Player::Max, choice);
    let leaky = build_theorem_game(&g, &part.s0, &s0_strategy, &v, &eps, &s1_leaks)?;
    let violations = local_violations(&leaky, &sigma_pruned, &w);

    // Back to the input game.
    let mut s0 = BTreeSet::new();
    let mut s1 = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    let mut full = Vec::with_capacity(game.n_states());
    for s in game.states() {
        match pruned[s] {
            Some(i) => {
                full.push(sigma_pruned.get(i).clone());
                if part.s0.contains(&i) {
                    s0.insert(s);
                    if let Some(wit) = part.witnesses.get(&i) {
                        witnesses.insert(s, wit.clone());
                    }
                } else {
                    s1.insert(s);
                }
            }
            None => {
                full.push(Distribution::point(0));
                s0.insert(s);
            }
        }
    }
    let strategy = MemorylessStrategy::new(Player::Max, full);
    let targets: BTreeMap<StateId, Rational> = game
        .states()
        .map(|s| {
            let t = if s1.contains(&s) {
                let t = &values.values[s] - &eps;
                if t.is_negative() {
                    Rational::zero()
                } else {
                    t
                }
            } else {
                values.values[s].clone()
            };
            (s, t)
        })
        .collect();
    let report = certify(game, &strategy, &targets)?;
    Ok(OptimalSynthesis {
        strategy,
        partition: Partition { s0, s1, witnesses },
        values,
        eps,
        gap: gap.gap,
        leaky,
        pruned,
        violations,
        report,
    })
}
