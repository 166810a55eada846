//! Memoryless ε-optimal strategies for reaching ⊤.
//!
//! A horizon-`n` stage strategy nearly attains the values; leaking
//! `eps3 / n` on every Min action turns every play that avoids ⊥ into one
//! that reaches ⊤, so a safety-optimal strategy of the leaky game restricted
//! to the stage strategy's supports is ε-optimal for reachability.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::bellman::{horizon_sequence, local_matrix, reach_values, safety_values, IterOptions, ValueVector};
use crate::error::{Error, Result};
use crate::game::{check_state_set, Distribution, Game, Player, StateId};
use crate::leaky::{leak_all, lift_strategy, restrict_support, ActionMap};
use crate::matrix;
use crate::num::{int, Rational, Scalar};
use crate::safety::synthesize_safety;
use crate::strategy::{MemorylessStrategy, StageStrategy};
use crate::verify::{certify, CertReport};

/// Slack for comparing float horizon values against their targets.
const HORIZON_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsSplit {
    pub e1: Rational,
    pub e2: Rational,
    pub e3: Rational,
}

impl EpsSplit {
    pub fn new(e1: Rational, e2: Rational, e3: Rational) -> Result<Self> {
        if !(e1.is_positive() && e2.is_positive() && e3.is_positive()) {
            return Err(Error::InvalidParams("split parts must be positive".into()));
        }
        Ok(EpsSplit { e1, e2, e3 })
    }

    pub fn thirds(eps: &Rational) -> Self {
        let third = eps / int(3);
        EpsSplit {
            e1: third.clone(),
            e2: third.clone(),
            e3: third,
        }
    }

    pub fn total(&self) -> Rational {
        &self.e1 + &self.e2 + &self.e3
    }
}

/// Smallest `n <= cap` with `val^n(s) >= values(s) - e1` on `s0`, together
/// with the float horizon sequence `val^0 .. val^n`.
fn horizon_plan(
    game: &Game,
    s0: &BTreeSet<StateId>,
    e1: &Rational,
    values: &ValueVector,
    cap: usize,
) -> Result<(usize, Vec<Vec<f64>>)> {
    let goal: Vec<(StateId, f64)> = s0
        .iter()
        .map(|&s| (s, (&values.values[s] - e1).to_f64() - HORIZON_SLACK))
        .collect();
    let gap = |v: &[f64]| goal.iter().map(|&(s, g)| g - v[s]).fold(f64::NEG_INFINITY, f64::max);
    let mut seq = horizon_sequence::<f64>(game, 0);
    loop {
        let n = seq.len() - 1;
        let last = seq.last().unwrap();
        if gap(last) <= 0.0 {
            return Ok((n, seq));
        }
        if n >= cap {
            return Err(Error::IterationCap {
                cap,
                residual: gap(last),
            });
        }
        let next = crate::bellman::sweep(game, last);
        seq.push(next);
    }
}

pub fn choose_horizon(
    game: &Game,
    s0: &BTreeSet<StateId>,
    e1: &Rational,
    values: &ValueVector,
    cap: usize,
) -> Result<usize> {
    check_state_set(game, s0)?;
    Ok(horizon_plan(game, s0, e1, values, cap)?.0)
}

/// Stage `j` plays a maximin row of the local matrix at `seq[n - j - 1]`;
/// after `n` steps the lowest-index action is played.
fn stage_strategy<T: Scalar>(game: &Game, seq: &[Vec<T>]) -> StageStrategy {
    let n = seq.len() - 1;
    let stages = (0..n)
        .map(|j| {
            let v = &seq[n - j - 1];
            game.states()
                .map(|s| matrix::to_distribution(&matrix::maximin(&local_matrix(game, s, v)).0))
                .collect()
        })
        .collect();
    StageStrategy {
        player: Player::Max,
        stages,
        default: game.states().map(|_| Distribution::point(0)).collect(),
    }
}

/// Stage strategy for horizon `n`, from float horizon values. Each stage is
/// an exact maximin of its local matrix up to float error, so no slack is
/// spent; `_e2` is kept for callers that budget it.
pub fn horizon_strategy(game: &Game, n: usize, _e2: &Rational) -> StageStrategy {
    stage_strategy(game, &horizon_sequence::<f64>(game, n))
}

/// Like [`horizon_strategy`] with exact arithmetic throughout.
pub fn exact_horizon_strategy(game: &Game, n: usize) -> StageStrategy {
    stage_strategy(game, &horizon_sequence::<Rational>(game, n))
}

#[derive(Clone, Debug)]
pub struct EpsOptions {
    pub iter: IterOptions,
    /// Largest horizon tried.
    pub horizon_cap: usize,
    /// Accepted fixpoint residual for inexact safety values.
    pub theta: f64,
}

impl Default for EpsOptions {
    fn default() -> Self {
        EpsOptions {
            iter: IterOptions::default(),
            horizon_cap: 100_000,
            theta: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpsSynthesis {
    /// The ε-optimal memoryless strategy, in the input game's actions.
    pub strategy: MemorylessStrategy,
    /// The leaky game restricted to the stage strategy's supports.
    pub leaky: Game,
    /// Original action indices kept in `leaky`.
    pub actions: ActionMap,
    pub horizon: usize,
    /// Leak placed on every Min action outside ⊤.
    pub leak: Rational,
    pub values: ValueVector,
    pub report: CertReport,
}

/// States of positive computed reach value.
pub fn positive_states(values: &ValueVector) -> BTreeSet<StateId> {
    (0..values.len()).filter(|&s| values.values[s].is_positive()).collect()
}

/// Runs the whole pipeline and certifies `P(Reach ⊤) >= value(s) - eps` for
/// every `s` in `s0` (default: states of positive value). Certificate
/// failures are reported, not hidden.
pub fn synthesize_eps(
    game: &Game,
    eps: &Rational,
    s0: Option<&BTreeSet<StateId>>,
    split: Option<&EpsSplit>,
    opts: &EpsOptions,
) -> Result<EpsSynthesis> {
    let values = reach_values(game, &opts.iter);
    synthesize_eps_with(game, eps, s0, split, opts, values)
}

/// [`synthesize_eps`] with precomputed reach values.
pub fn synthesize_eps_with(
    game: &Game,
    eps: &Rational,
    s0: Option<&BTreeSet<StateId>>,
    split: Option<&EpsSplit>,
    opts: &EpsOptions,
    values: ValueVector,
) -> Result<EpsSynthesis> {
    if !eps.is_positive() || *eps >= int(1) {
        return Err(Error::InvalidParams(format!("eps = {eps} outside (0, 1)")));
    }
    let split = split.cloned().unwrap_or_else(|| EpsSplit::thirds(eps));
    if split.total() != *eps {
        return Err(Error::InvalidParams(format!(
            "split sums to {}, not {eps}",
            split.total()
        )));
    }
    let s0 = match s0 {
        Some(set) => {
            check_state_set(game, set)?;
            set.clone()
        }
        None => positive_states(&values),
    };
    let (n, seq) = horizon_plan(game, &s0, &split.e1, &values, opts.horizon_cap)?;
    let stage = stage_strategy(game, &seq);
    let leak = &split.e3 / int(n.max(1) as i64);
    log::debug!("horizon {n}, leak {leak}");
    let leaky_full = leak_all(game, &leak)?;
    let (leaky, actions) = restrict_support(&leaky_full, &stage.into())?;
    let safe = safety_values(&leaky, &opts.iter);
    let local = synthesize_safety(&leaky, &safe, opts.theta)?;
    let strategy = lift_strategy(&local, &actions);
    let targets: BTreeMap<StateId, Rational> = s0
        .iter()
        .map(|&s| {
            let t = &values.values[s] - eps;
            (s, if t.is_negative() { Rational::zero() } else { t })
        })
        .collect();
    let report = certify(game, &strategy, &targets)?;
    Ok(EpsSynthesis {
        strategy,
        leaky,
        actions,
        horizon: n,
        leak,
        values,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::horizon_values;
    use crate::builtin::snowball;
    use crate::game::{GameBuilder, Mode};
    use crate::num::rat;
    use crate::verify::stage_guarantee;

    fn snowball_values() -> ValueVector {
        reach_values(&snowball(), &IterOptions::default())
    }

    #[test]
    fn horizons_for_snowball() {
        let g = snowball();
        let v = snowball_values();
        let s = BTreeSet::from([0]);
        assert_eq!(choose_horizon(&g, &s, &rat(1, 3), &v, 100).unwrap(), 2);
        assert_eq!(choose_horizon(&g, &s, &rat(1, 10), &v, 100).unwrap(), 9);
        assert_eq!(choose_horizon(&g, &BTreeSet::from([g.top()]), &rat(1, 10), &v, 100).unwrap(), 0);
        assert!(matches!(
            choose_horizon(&g, &s, &rat(1, 10), &v, 5),
            Err(Error::IterationCap { cap: 5, .. })
        ));
    }

    #[test]
    fn horizon_strategy_stages() {
        let g = snowball();
        let st = exact_horizon_strategy(&g, 2);
        // Stage 0 answers [[1/2, 1], [1, 0]]: hide 2/3, run 1/3.
        assert_eq!(*st.at(0, 0), Distribution::from_pairs([(0, rat(2, 3)), (1, rat(1, 3))]));
        // Stage 1 is the one-step game [[0, 1], [1, 0]].
        assert_eq!(*st.at(1, 0), Distribution::from_pairs([(0, rat(1, 2)), (1, rat(1, 2))]));
        assert_eq!(*st.at(2, 0), Distribution::point(0));
        let one = exact_horizon_strategy(&g, 1);
        assert_eq!(one.stages.len(), 1);
        assert_eq!(stage_guarantee(&g, &st, 2)[0], rat(2, 3));
        let float = horizon_strategy(&g, 2, &rat(1, 30));
        assert!((float.at(0, 0).get(0).to_f64() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn snowball_eps_pipeline() {
        let g = snowball();
        let out = synthesize_eps(&g, &rat(3, 10), None, None, &EpsOptions::default()).unwrap();
        assert!(out.report.passed(), "{:?}", out.report);
        assert!(out.strategy.get(0).get(1).is_positive());
        assert!(out.report.record(0).unwrap().achieved >= rat(7, 10));
        let split = EpsSplit::new(rat(1, 10), rat(1, 10), rat(1, 10)).unwrap();
        let out = synthesize_eps(&g, &rat(3, 10), Some(&BTreeSet::from([0])), Some(&split), &EpsOptions::default())
            .unwrap();
        assert!(out.report.passed());
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = snowball();
        assert!(synthesize_eps(&g, &rat(0, 1), None, None, &EpsOptions::default()).is_err());
        let split = EpsSplit::thirds(&rat(1, 10));
        assert!(synthesize_eps(&g, &rat(1, 5), None, Some(&split), &EpsOptions::default()).is_err());
        assert!(EpsSplit::new(rat(0, 1), rat(1, 2), rat(1, 2)).is_err());
    }

    #[test]
    fn sure_hit_is_certified_one() {
        let mut b = GameBuilder::new(Mode::Exact);
        let s = b.state("s");
        let top = b.state("top");
        let bot = b.state("bot");
        b.actions(s, &["a", "c"], &["x"]);
        b.transition(s, 0, 0, [(top, int(1))]);
        b.transition(s, 1, 0, [(top, int(1))]);
        b.sink(top).sink(bot).top(top).bottom(bot);
        let g = b.build().unwrap();
        let out = synthesize_eps(&g, &rat(1, 10), None, None, &EpsOptions::default()).unwrap();
        assert_eq!(out.report.record(s).unwrap().achieved, int(1));
    }

    #[test]
    fn horizon_values_match_float_sequence() {
        let g = snowball();
        let exact = horizon_values(&g, 5);
        let float = horizon_sequence::<f64>(&g, 5);
        for (e, f) in exact.iter().zip(&float) {
            assert!((e.values[0].to_f64() - f[0]).abs() < 1e-12);
        }
    }
}
