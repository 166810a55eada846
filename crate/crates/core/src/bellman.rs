//! The one-step minimax operator and the value vectors built from it.
//!
//! Horizon values are computed in any [`Scalar`]; the unbounded reach and
//! safety values are iterated in `f64` and then, when possible, snapped to an
//! exact rational fixpoint close to the final iterate.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::game::{Distribution, Game, Player, StateId};
use crate::matrix::{self, Matrix};
use crate::mdp::{self, Goal};
use crate::num::{limit_denominator, Rational, Scalar};
use crate::strategy::MemorylessStrategy;
use crate::verify;

/// Sweeps on games at least this large solve states in parallel.
const PAR_STATES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Reach ⊤.
    Reach,
    /// Avoid ⊥.
    Avoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Steps(usize),
    Infinite,
}

/// Per-state values with convergence metadata. Values are always stored as
/// rationals; `exact` tells whether they are an exact fixpoint (or exact
/// finite-horizon values) rather than the binary value of an `f64` iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueVector {
    pub objective: Objective,
    pub horizon: Horizon,
    pub values: Vec<Rational>,
    pub exact: bool,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm change of the last sweep.
    pub residual: f64,
}

impl ValueVector {
    pub fn get(&self, s: StateId) -> &Rational {
        &self.values[s]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Scalar::to_f64).collect()
    }
}

#[derive(Clone, Debug)]
pub struct IterOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Largest denominator tried when snapping; `None` disables snapping.
    pub snap_den: Option<u64>,
    /// Largest distance between a snapped candidate and the final iterate.
    pub snap_window: f64,
}

impl Default for IterOptions {
    fn default() -> Self {
        IterOptions {
            tol: 1e-9,
            max_iter: 1_000_000,
            snap_den: Some(64),
            snap_window: 1e-4,
        }
    }
}

/// Entry `(a, b)` is the expected value of `v` after `(a, b)` at `s`.
pub fn local_matrix<T: Scalar>(game: &Game, s: StateId, v: &[T]) -> Matrix<T> {
    Matrix::from_fn(game.n_max(s), game.n_min(s), |a, b| game.dist(s, a, b).expectation(v))
}

/// One application of the operator.
pub fn sweep<T: Scalar>(game: &Game, v: &[T]) -> Vec<T> {
    game.states()
        .map(|s| matrix::value(&local_matrix(game, s, v)))
        .collect()
}

fn indicator<T: Scalar>(game: &Game, s: StateId) -> Vec<T> {
    game.states()
        .map(|t| if t == s { T::one() } else { T::zero() })
        .collect()
}

/// `val^0 .. val^n` in the scalar type `T`.
pub fn horizon_sequence<T: Scalar>(game: &Game, n: usize) -> Vec<Vec<T>> {
    let mut seq = vec![indicator::<T>(game, game.top())];
    for _ in 0..n {
        let next = sweep(game, seq.last().unwrap());
        seq.push(next);
    }
    seq
}

/// `val^0 .. val^n`, exact for exact-mode games.
pub fn horizon_values(game: &Game, n: usize) -> Vec<ValueVector> {
    let exact = game.mode() == crate::game::Mode::Exact;
    let seq: Vec<Vec<Rational>> = if exact {
        horizon_sequence::<Rational>(game, n)
    } else {
        horizon_sequence::<f64>(game, n)
            .into_iter()
            .map(|v| v.iter().map(Scalar::to_rational).collect())
            .collect()
    };
    seq.into_iter()
        .enumerate()
        .map(|(i, values)| ValueVector {
            objective: Objective::Reach,
            horizon: Horizon::Steps(i),
            values,
            exact,
            tol: 0.0,
            iterations: i,
            converged: true,
            residual: 0.0,
        })
        .collect()
}

struct FloatOperator {
    table: crate::game::FloatTable,
}

impl FloatOperator {
    fn new(game: &Game) -> Self {
        FloatOperator {
            table: game.float_table(),
        }
    }

    fn state_value(&self, s: StateId, v: &[f64]) -> f64 {
        let rows = &self.table[s];
        let m = Matrix::from_fn(rows.len(), rows[0].len(), |a, b| {
            rows[a][b].iter().map(|&(t, p)| p * v[t]).sum()
        });
        matrix::value(&m)
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        if self.table.len() >= PAR_STATES {
            (0..self.table.len())
                .into_par_iter()
                .map(|s| self.state_value(s, v))
                .collect()
        } else {
            (0..self.table.len()).map(|s| self.state_value(s, v)).collect()
        }
    }
}

/// Least fixpoint (reach ⊤), iterated upwards from the indicator of ⊤.
pub fn reach_values(game: &Game, opts: &IterOptions) -> ValueVector {
    iterate(game, opts, Objective::Reach)
}

/// Greatest fixpoint (avoid ⊥), iterated downwards from the complement of ⊥.
pub fn safety_values(game: &Game, opts: &IterOptions) -> ValueVector {
    iterate(game, opts, Objective::Avoid)
}

fn iterate(game: &Game, opts: &IterOptions, objective: Objective) -> ValueVector {
    assert!(opts.tol > 0.0, "tolerance must be positive");
    let op = FloatOperator::new(game);
    let mut v: Vec<f64> = match objective {
        Objective::Reach => indicator(game, game.top()),
        Objective::Avoid => game
            .states()
            .map(|s| if s == game.bottom() { 0.0 } else { 1.0 })
            .collect(),
    };
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iter {
        let mut next = op.apply(&v);
        // The exact iterates are monotone; clamp away solver noise.
        for (x, old) in next.iter_mut().zip(&v) {
            *x = match objective {
                Objective::Reach => x.max(*old).min(1.0),
                Objective::Avoid => x.min(*old).max(0.0),
            };
        }
        residual = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        iterations += 1;
        if residual < opts.tol {
            break;
        }
    }
    let converged = residual < opts.tol;
    log::debug!("{objective:?} iteration: {iterations} sweeps, residual {residual:e}");
    let snapped = opts
        .snap_den
        .and_then(|den| snap(game, &v, objective, den, opts.snap_window));
    let exact = snapped.is_some();
    let values = snapped.unwrap_or_else(|| v.iter().map(Scalar::to_rational).collect());
    ValueVector {
        objective,
        horizon: Horizon::Infinite,
        values,
        exact,
        tol: opts.tol,
        iterations,
        converged,
        residual,
    }
}

/// First state where `v` is not an exact fixpoint of the operator, with the
/// absolute difference.
pub fn fixpoint_violation(game: &Game, v: &[Rational]) -> Option<(StateId, Rational)> {
    game.states().find_map(|s| {
        let d = matrix::value(&local_matrix(game, s, v)) - &v[s];
        (!d.is_zero()).then(|| (s, d.abs()))
    })
}

fn within(candidate: &[Rational], iterate: &[f64], window: f64) -> bool {
    candidate
        .iter()
        .zip(iterate)
        .all(|(c, x)| (c.to_f64() - x).abs() <= window)
}

fn snap_mix(weights: &[f64], den: u64) -> Distribution {
    let snapped = Distribution::from_pairs(
        weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (i, limit_denominator(&w.max(0.0).to_rational(), den))),
    );
    if snapped.is_empty() {
        let best = (0..weights.len())
            .max_by(|&i, &j| weights[i].total_cmp(&weights[j]))
            .unwrap_or(0);
        return Distribution::point(best);
    }
    snapped.normalized()
}

/// Tries, in order: each iterate entry rounded to a nearby small-denominator
/// rational; then the exact value of a strategy for the player iterating
/// "against" the fixpoint (Min for reach, Max for safety), improved for a few
/// rounds. A candidate is kept only when it is an exact fixpoint within
/// `window` of the iterate.
fn snap(game: &Game, iterate: &[f64], objective: Objective, den: u64, window: f64) -> Option<Vec<Rational>> {
    let accept = |c: &[Rational]| within(c, iterate, window) && fixpoint_violation(game, c).is_none();
    let rounded: Vec<Rational> = iterate
        .iter()
        .map(|x| limit_denominator(&x.to_rational(), den))
        .collect();
    if accept(&rounded) {
        return Some(rounded);
    }
    let op = FloatOperator::new(game);
    let player = match objective {
        Objective::Reach => Player::Min,
        Objective::Avoid => Player::Max,
    };
    let mut strategy = MemorylessStrategy::new(
        player,
        game.states()
            .map(|s| {
                let rows = &op.table[s];
                let m = Matrix::from_fn(rows.len(), rows[0].len(), |a, b| {
                    rows[a][b].iter().map(|&(t, p)| p * iterate[t]).sum()
                });
                let mix = match player {
                    Player::Max => matrix::maximin(&m).0,
                    Player::Min => matrix::minimax(&m).0,
                };
                snap_mix(&mix, den)
            })
            .collect(),
    );
    for _ in 0..3 {
        let candidate = strategy_values(game, &strategy, objective);
        if accept(&candidate) {
            return Some(candidate);
        }
        if !within(&candidate, iterate, window) {
            return None;
        }
        for s in game.states() {
            let m = local_matrix(game, s, &candidate);
            let mix = match player {
                Player::Max => matrix::maximin(&m).0,
                Player::Min => matrix::minimax(&m).0,
            };
            strategy.set(s, matrix::to_distribution(&mix));
        }
    }
    None
}

/// Exact value of the objective when one player is fixed to `strategy` and
/// the other best-responds.
fn strategy_values(game: &Game, strategy: &MemorylessStrategy, objective: Objective) -> Vec<Rational> {
    match objective {
        Objective::Reach => {
            let mdp = verify::induce_max_mdp(game, strategy);
            mdp::reach(&mdp, game.top(), Goal::Maximize).values
        }
        Objective::Avoid => {
            let mdp = verify::induce_min_mdp(game, strategy);
            mdp::reach(&mdp, game.bottom(), Goal::Maximize)
                .values
                .into_iter()
                .map(|x| Rational::one() - x)
                .collect()
        }
    }
}

/// Min actions at `s` split by how their payoff against `alpha` compares to
/// `v(s)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MinActionClasses {
    pub preserving: Vec<usize>,
    pub increasing: Vec<usize>,
    pub violating: Vec<usize>,
}

pub fn classify_min_actions(
    game: &Game,
    s: StateId,
    alpha: &Distribution,
    v: &[Rational],
    theta: &Rational,
) -> MinActionClasses {
    let mut out = MinActionClasses::default();
    for b in 0..game.n_min(s) {
        let payoff = game.mixed_max(s, alpha, b).expectation(v);
        let diff = payoff - &v[s];
        if diff.abs() <= *theta {
            out.preserving.push(b);
        } else if diff.is_positive() {
            out.increasing.push(b);
        } else {
            out.violating.push(b);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{leaky_mdp, snowball, value_gift};
    use crate::game::{GameBuilder, Mode};
    use crate::num::{int, rat};

    #[test]
    fn local_matrix_of_snowball() {
        let g = snowball();
        let v = vec![int(0), int(1), int(0)];
        let m = local_matrix(&g, 0, &v);
        assert_eq!(m, Matrix::from_rows(vec![vec![int(0), int(1)], vec![int(1), int(0)]]));
        let top = local_matrix(&g, g.top(), &v);
        assert_eq!(top, Matrix::from_rows(vec![vec![int(1)]]));
    }

    #[test]
    fn local_matrix_of_leaky_mdp() {
        let g = leaky_mdp(2).unwrap();
        let s = g.state_index("s").unwrap();
        let mut v = vec![int(0); g.n_states()];
        v[s] = int(1);
        let m = local_matrix(&g, s, &v);
        assert_eq!(m.rows(), 3);
        assert_eq!(m.cols(), 1);
        for i in 0..3 {
            assert_eq!(*m.get(i, 0), int(1) - rat(1, 1 << i));
        }
    }

    #[test]
    fn snowball_horizon_values() {
        let g = snowball();
        let seq = horizon_values(&g, 3);
        assert_eq!(seq[0].values, vec![int(0), int(1), int(0)]);
        assert_eq!(seq[1].values[0], rat(1, 2));
        assert_eq!(seq[2].values[0], rat(2, 3));
        assert_eq!(seq[3].values[0], rat(3, 4));
    }

    #[test]
    fn one_step_chain_hits_top() {
        let mut b = GameBuilder::new(Mode::Exact);
        let s = b.state("s");
        let top = b.state("top");
        let bot = b.state("bot");
        b.actions(s, &["go"], &["x"]);
        b.transition(s, 0, 0, [(top, int(1))]);
        b.sink(top).sink(bot).top(top).bottom(bot);
        let g = b.build().unwrap();
        assert_eq!(horizon_values(&g, 1)[1].values[s], int(1));
    }

    #[test]
    fn snowball_reach_value_snaps_to_one() {
        let g = snowball();
        let v = reach_values(&g, &IterOptions::default());
        assert!(v.converged);
        assert!(v.exact);
        assert_eq!(v.values, vec![int(1), int(1), int(0)]);
        let raw = reach_values(
            &g,
            &IterOptions {
                snap_den: None,
                ..Default::default()
            },
        );
        assert!(!raw.exact);
        assert!(raw.values[0] < int(1));
        assert!(raw.values[0].to_f64() > 1.0 - 1e-4);
    }

    #[test]
    fn gift_value_is_q() {
        let g = value_gift(&[rat(3, 4)]).unwrap();
        let v = reach_values(&g, &IterOptions::default());
        let s0 = g.state_index("s0").unwrap();
        assert!(v.exact);
        assert_eq!(v.values[s0], rat(3, 4));
    }

    #[test]
    fn safety_values_of_examples() {
        let g = snowball();
        let v = safety_values(&g, &IterOptions::default());
        assert_eq!(v.values[0], int(1));
        for k in [2, 4, 8] {
            let g = leaky_mdp(k).unwrap();
            let v = safety_values(&g, &IterOptions::default());
            let s = g.state_index("s").unwrap();
            assert_eq!(v.values[s], int(0), "k = {k}");
        }
    }

    #[test]
    fn safety_without_bottom_entry_is_one() {
        let mut b = GameBuilder::new(Mode::Exact);
        let s = b.state("s");
        let top = b.state("top");
        let bot = b.state("bot");
        b.actions(s, &["a"], &["x", "y"]);
        b.transition(s, 0, 0, [(s, int(1))]);
        b.transition(s, 0, 1, [(top, int(1))]);
        b.sink(top).sink(bot).top(top).bottom(bot);
        let g = b.build().unwrap();
        let v = safety_values(&g, &IterOptions::default());
        assert_eq!(v.values, vec![int(1), int(1), int(0)]);
    }

    #[test]
    fn classification_examples() {
        let g = snowball();
        let v = vec![int(1), int(1), int(0)];
        let c = classify_min_actions(&g, 0, &Distribution::point(0), &v, &int(0));
        assert_eq!(c.preserving, vec![0, 1]);
        let c = classify_min_actions(&g, g.top(), &Distribution::point(0), &v, &int(0));
        assert_eq!(c.preserving, vec![0]);

        let g = value_gift(&[rat(3, 4), rat(9, 10)]).unwrap();
        let s0 = g.state_index("s0").unwrap();
        let s1 = g.state_index("s1").unwrap();
        let mut v = vec![int(0); g.n_states()];
        v[g.top()] = int(1);
        v[s1] = int(1);
        v[s0] = rat(3, 4);
        let c = classify_min_actions(&g, s0, &Distribution::point(0), &v, &int(0));
        let b34 = g.action_index(Player::Min, s0, "b_3/4").unwrap();
        let b910 = g.action_index(Player::Min, s0, "b_9/10").unwrap();
        assert_eq!(c.preserving, vec![b34]);
        assert_eq!(c.increasing, vec![b910]);
        assert!(c.violating.is_empty());
    }

    #[test]
    fn fixpoint_violation_detects_off_values() {
        let g = snowball();
        assert!(fixpoint_violation(&g, &[int(1), int(1), int(0)]).is_none());
        let (s, d) = fixpoint_violation(&g, &[rat(1, 2), int(1), int(0)]).unwrap();
        assert_eq!((s, d), (0, rat(1, 6)));
    }
}
