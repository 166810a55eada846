//! Exact reachability in finite MDPs by policy iteration.
//!
//! Both directions start from a policy under which every state outside the
//! qualitatively decided sets is transient, so each evaluation is a
//! nonsingular linear system, and switch actions only on strict improvement.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::game::{Distribution, StateId};
use crate::linalg;
use crate::num::Rational;

/// One-player decision process: `rows[s][k]` is the successor distribution of
/// action `k` at `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mdp {
    pub rows: Vec<Vec<Distribution>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdpSolution {
    pub values: Vec<Rational>,
    /// Optimal pure memoryless policy (action index per state).
    pub policy: Vec<usize>,
}

impl Mdp {
    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    fn stays_within(&self, s: StateId, k: usize, set: &BTreeSet<StateId>) -> bool {
        self.rows[s][k].support().all(|t| set.contains(&t))
    }

    /// Largest set avoiding `target` in which some action keeps every state.
    fn avoiding_set(&self, target: StateId) -> BTreeSet<StateId> {
        let mut set: BTreeSet<StateId> = (0..self.n_states()).filter(|&s| s != target).collect();
        loop {
            let drop: Vec<StateId> = set
                .iter()
                .copied()
                .filter(|&s| !(0..self.rows[s].len()).any(|k| self.stays_within(s, k, &set)))
                .collect();
            if drop.is_empty() {
                return set;
            }
            for s in drop {
                set.remove(&s);
            }
        }
    }

    /// Graph distance to `target` (`None` when unreachable) and, per state, an
    /// action that makes progress along a shortest path.
    fn distances(&self, target: StateId) -> (Vec<Option<usize>>, Vec<usize>) {
        let n = self.n_states();
        let mut dist = vec![None; n];
        let mut step = vec![0; n];
        dist[target] = Some(0);
        let mut frontier = vec![target];
        let mut d = 0;
        while !frontier.is_empty() {
            let layer: BTreeSet<StateId> = frontier.iter().copied().collect();
            let mut next = Vec::new();
            for s in 0..n {
                if dist[s].is_some() {
                    continue;
                }
                if let Some(k) = (0..self.rows[s].len())
                    .find(|&k| self.rows[s][k].support().any(|t| layer.contains(&t)))
                {
                    dist[s] = Some(d + 1);
                    step[s] = k;
                    next.push(s);
                }
            }
            frontier = next;
            d += 1;
        }
        (dist, step)
    }

    fn q_value(&self, s: StateId, k: usize, x: &[Rational]) -> Rational {
        self.rows[s][k]
            .iter()
            .fold(Rational::zero(), |acc, (t, p)| acc + p * &x[t])
    }

    /// Reach probability of `target` under `policy`, with `fixed` states
    /// pinned to the given values.
    fn evaluate(
        &self,
        target: StateId,
        policy: &[usize],
        unknown: &[StateId],
        base: &[Rational],
    ) -> Vec<Rational> {
        let n = self.n_states();
        let mut pos = vec![usize::MAX; n];
        for (i, &s) in unknown.iter().enumerate() {
            pos[s] = i;
        }
        let m = unknown.len();
        let mut a = vec![vec![Rational::zero(); m]; m];
        let mut b = vec![Rational::zero(); m];
        for (i, &s) in unknown.iter().enumerate() {
            a[i][i] += Rational::one();
            for (t, p) in self.rows[s][policy[s]].iter() {
                if pos[t] != usize::MAX {
                    a[i][pos[t]] -= p;
                } else if t == target {
                    b[i] += p;
                } else {
                    b[i] += p * &base[t];
                }
            }
        }
        let sol = linalg::solve(a, b).expect("policy evaluation on transient states is nonsingular");
        let mut x = base.to_vec();
        for (i, &s) in unknown.iter().enumerate() {
            x[s] = sol[i].clone();
        }
        x
    }
}

/// Optimal probability of reaching `target` (a sink) and a pure memoryless
/// policy attaining it.
pub fn reach(mdp: &Mdp, target: StateId, goal: Goal) -> MdpSolution {
    let n = mdp.n_states();
    let mut base = vec![Rational::zero(); n];
    base[target] = Rational::one();
    let mut policy = vec![0usize; n];
    let unknown: Vec<StateId> = match goal {
        Goal::Minimize => {
            let zero = mdp.avoiding_set(target);
            for &s in &zero {
                policy[s] = (0..mdp.rows[s].len())
                    .find(|&k| mdp.stays_within(s, k, &zero))
                    .expect("avoiding set has a staying action");
            }
            (0..n).filter(|s| *s != target && !zero.contains(s)).collect()
        }
        Goal::Maximize => {
            let (dist, step) = mdp.distances(target);
            for s in 0..n {
                if dist[s].is_some() {
                    policy[s] = step[s];
                }
            }
            (0..n).filter(|&s| s != target && dist[s].is_some()).collect()
        }
    };
    loop {
        let x = mdp.evaluate(target, &policy, &unknown, &base);
        let mut changed = false;
        for &s in &unknown {
            let current = x[s].clone();
            let mut best: Option<(usize, Rational)> = None;
            for k in 0..mdp.rows[s].len() {
                let q = mdp.q_value(s, k, &x);
                let better = match (&best, goal) {
                    (None, _) => true,
                    (Some((_, bq)), Goal::Minimize) => q < *bq,
                    (Some((_, bq)), Goal::Maximize) => q > *bq,
                };
                if better {
                    best = Some((k, q));
                }
            }
            let (k, q) = best.expect("every state has an action");
            let strict = match goal {
                Goal::Minimize => q < current,
                Goal::Maximize => q > current,
            };
            if strict {
                policy[s] = k;
                changed = true;
            }
        }
        if !changed {
            return MdpSolution { values: x, policy };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn d(pairs: &[(usize, Rational)]) -> Distribution {
        Distribution::from_pairs(pairs.iter().cloned())
    }

    #[test]
    fn min_prefers_staying_forever() {
        // s: stay (k=0) or go to target (k=1); target = 1, sink 2.
        let mdp = Mdp {
            rows: vec![
                vec![d(&[(1, int(1))]), d(&[(0, int(1))])],
                vec![d(&[(1, int(1))])],
                vec![d(&[(2, int(1))])],
            ],
        };
        let sol = reach(&mdp, 1, Goal::Minimize);
        assert_eq!(sol.values, vec![int(0), int(1), int(0)]);
        assert_eq!(sol.policy[0], 1);
        let sol = reach(&mdp, 1, Goal::Maximize);
        assert_eq!(sol.values[0], int(1));
        assert_eq!(sol.policy[0], 0);
    }

    #[test]
    fn max_escapes_end_component_through_best_exit() {
        // s0 <-> s1 loop; s0 exits to target w.p. 1/2, s1 exits w.p. 3/4.
        let mdp = Mdp {
            rows: vec![
                vec![d(&[(1, int(1))]), d(&[(2, rat(1, 2)), (3, rat(1, 2))])],
                vec![d(&[(0, int(1))]), d(&[(2, rat(3, 4)), (3, rat(1, 4))])],
                vec![d(&[(2, int(1))])],
                vec![d(&[(3, int(1))])],
            ],
        };
        let sol = reach(&mdp, 2, Goal::Maximize);
        assert_eq!(sol.values[0], rat(3, 4));
        assert_eq!(sol.values[1], rat(3, 4));
        let sol = reach(&mdp, 2, Goal::Minimize);
        assert_eq!(sol.values[0], int(0));
    }

    #[test]
    fn geometric_loop() {
        // s: loop w.p. 1/2, target 1/4, sink 1/4 -> reach 1/2.
        let mdp = Mdp {
            rows: vec![
                vec![d(&[(0, rat(1, 2)), (1, rat(1, 4)), (2, rat(1, 4))])],
                vec![d(&[(1, int(1))])],
                vec![d(&[(2, int(1))])],
            ],
        };
        assert_eq!(reach(&mdp, 1, Goal::Minimize).values[0], rat(1, 2));
        assert_eq!(reach(&mdp, 1, Goal::Maximize).values[0], rat(1, 2));
    }
}
