//! Certification of fixed strategies: exact best responses in the induced
//! MDPs, exact absorption analysis of induced Markov chains, and Monte Carlo
//! playouts.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bellman::Objective;
use crate::error::{Error, Result};
use crate::game::{Distribution, Game, Player, StateId};
use crate::linalg;
use crate::mdp::{self, Goal, Mdp, MdpSolution};
use crate::num::{Rational, Scalar};
use crate::strategy::{MemorylessStrategy, StageStrategy, Strategy};

/// Min's decision process once Max is fixed: actions are `B(s)`.
pub type MinMdp = Mdp;

/// Max's decision process once Min is fixed: actions are `A(s)`.
pub type MaxMdp = Mdp;

fn expect_player(strategy: &MemorylessStrategy, player: Player) -> Result<()> {
    if strategy.player != player {
        return Err(Error::InvalidStrategy(format!(
            "expected a {player:?} strategy, got {:?}",
            strategy.player
        )));
    }
    Ok(())
}

/// `rows[s][b] = sum_a sigma(s)(a) p(s, a, b)`.
pub fn induce_min_mdp(game: &Game, sigma: &MemorylessStrategy) -> MinMdp {
    Mdp {
        rows: game
            .states()
            .map(|s| (0..game.n_min(s)).map(|b| game.mixed_max(s, sigma.get(s), b)).collect())
            .collect(),
    }
}

/// `rows[s][a] = sum_b pi(s)(b) p(s, a, b)`.
pub fn induce_max_mdp(game: &Game, pi: &MemorylessStrategy) -> MaxMdp {
    Mdp {
        rows: game
            .states()
            .map(|s| (0..game.n_max(s)).map(|a| game.mixed_min(s, a, pi.get(s))).collect())
            .collect(),
    }
}

/// Least probability of reaching `target` over all Min strategies, with a
/// pure memoryless witness attaining it.
pub fn min_reach_value(mdp: &MinMdp, target: StateId) -> MdpSolution {
    mdp::reach(mdp, target, Goal::Minimize)
}

/// Greatest probability of reaching `target` over all Min strategies.
pub fn max_reach_value(mdp: &MinMdp, target: StateId) -> MdpSolution {
    mdp::reach(mdp, target, Goal::Maximize)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertRecord {
    pub state: StateId,
    pub target: Rational,
    pub achieved: Rational,
    pub pass: bool,
}

/// Certified guarantees of a fixed Max strategy. `witness` is one pure
/// memoryless Min policy that is simultaneously a best response from every
/// state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertReport {
    pub objective: Objective,
    pub records: Vec<CertRecord>,
    pub witness: Vec<usize>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CertRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn record(&self, s: StateId) -> Option<&CertRecord> {
        self.records.iter().find(|r| r.state == s)
    }
}

/// Exact guaranteed probability of the objective for `sigma` at every state,
/// with Min's best response.
pub fn guarantee(game: &Game, sigma: &MemorylessStrategy, objective: Objective) -> Result<(Vec<Rational>, Vec<usize>)> {
    expect_player(sigma, Player::Max)?;
    sigma.check(game)?;
    let mdp = induce_min_mdp(game, sigma);
    Ok(match objective {
        Objective::Reach => {
            let sol = min_reach_value(&mdp, game.top());
            (sol.values, sol.policy)
        }
        Objective::Avoid => {
            let sol = max_reach_value(&mdp, game.bottom());
            (sol.values.into_iter().map(|x| Rational::one() - x).collect(), sol.policy)
        }
    })
}

/// Checks `P(Reach ⊤) >= target(s)` against every Min strategy.
pub fn certify(game: &Game, sigma: &MemorylessStrategy, targets: &BTreeMap<StateId, Rational>) -> Result<CertReport> {
    certify_objective(game, sigma, targets, Objective::Reach)
}

pub fn certify_objective(
    game: &Game,
    sigma: &MemorylessStrategy,
    targets: &BTreeMap<StateId, Rational>,
    objective: Objective,
) -> Result<CertReport> {
    if let Some(&s) = targets.keys().find(|&&s| s >= game.n_states()) {
        return Err(Error::UnknownState(format!("#{s}")));
    }
    let (values, witness) = guarantee(game, sigma, objective)?;
    let records = targets
        .iter()
        .map(|(&s, t)| CertRecord {
            state: s,
            target: t.clone(),
            achieved: values[s].clone(),
            pass: values[s] >= *t,
        })
        .collect();
    Ok(CertReport {
        objective,
        records,
        witness,
    })
}

/// The Markov chain of a memoryless pair.
pub fn induced_chain(game: &Game, sigma: &MemorylessStrategy, pi: &MemorylessStrategy) -> Vec<Distribution> {
    game.states()
        .map(|s| {
            let mut d = Distribution::new();
            for (b, pb) in pi.get(s).iter() {
                d.add_scaled(&game.mixed_max(s, sigma.get(s), b), pb);
            }
            d
        })
        .collect()
}

/// Absorption probabilities of an induced chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Absorption {
    pub top: Vec<Rational>,
    pub bottom: Vec<Rational>,
    /// Mass absorbed by recurrent classes other than `{⊤}` and `{⊥}`.
    pub other: Vec<Rational>,
    /// Recurrent classes other than `{⊤}` and `{⊥}`, each sorted.
    pub recurrent: Vec<Vec<StateId>>,
}

impl Absorption {
    pub fn avoid_bottom(&self, s: StateId) -> Rational {
        Rational::one() - &self.bottom[s]
    }
}

/// Closed strongly connected components of a finite chain.
pub fn recurrent_classes(chain: &[Distribution]) -> Vec<Vec<StateId>> {
    let mut graph = DiGraph::<(), ()>::with_capacity(chain.len(), 0);
    let nodes: Vec<_> = (0..chain.len()).map(|_| graph.add_node(())).collect();
    for (s, d) in chain.iter().enumerate() {
        for t in d.support() {
            graph.add_edge(nodes[s], nodes[t], ());
        }
    }
    let mut classes: Vec<Vec<StateId>> = tarjan_scc(&graph)
        .into_iter()
        .map(|comp| {
            let mut c: Vec<StateId> = comp.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .filter(|c| {
            let set: BTreeSet<StateId> = c.iter().copied().collect();
            c.iter().all(|&s| chain[s].support().all(|t| set.contains(&t)))
        })
        .collect();
    classes.sort();
    classes
}

/// Probability of eventually entering `target` (a union of closed classes)
/// from each state of the chain.
fn absorb_into(chain: &[Distribution], target: &BTreeSet<StateId>, closed: &BTreeSet<StateId>) -> Vec<Rational> {
    let n = chain.len();
    let transient: Vec<StateId> = (0..n).filter(|s| !closed.contains(s)).collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &s) in transient.iter().enumerate() {
        pos[s] = i;
    }
    let m = transient.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    let mut b = vec![Rational::zero(); m];
    for (i, &s) in transient.iter().enumerate() {
        a[i][i] += Rational::one();
        for (t, p) in chain[s].iter() {
            if pos[t] != usize::MAX {
                a[i][pos[t]] -= p;
            } else if target.contains(&t) {
                b[i] += p;
            }
        }
    }
    let x = linalg::solve(a, b).expect("transient part of a finite chain is nonsingular");
    (0..n)
        .map(|s| {
            if pos[s] != usize::MAX {
                x[pos[s]].clone()
            } else if target.contains(&s) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

/// Exact absorption probabilities for the pair `(sigma, pi)`.
pub fn chain_absorption(game: &Game, sigma: &MemorylessStrategy, pi: &MemorylessStrategy) -> Result<Absorption> {
    expect_player(sigma, Player::Max)?;
    expect_player(pi, Player::Min)?;
    sigma.check(game)?;
    pi.check(game)?;
    Ok(absorption_of_chain(&induced_chain(game, sigma, pi), game.top(), game.bottom()))
}

pub fn absorption_of_chain(chain: &[Distribution], top: StateId, bottom: StateId) -> Absorption {
    let classes = recurrent_classes(chain);
    let closed: BTreeSet<StateId> = classes.iter().flatten().copied().collect();
    let recurrent: Vec<Vec<StateId>> = classes
        .into_iter()
        .filter(|c| *c != [top] && *c != [bottom])
        .collect();
    let others: BTreeSet<StateId> = recurrent.iter().flatten().copied().collect();
    Absorption {
        top: absorb_into(chain, &BTreeSet::from([top]), &closed),
        bottom: absorb_into(chain, &BTreeSet::from([bottom]), &closed),
        other: absorb_into(chain, &others, &closed),
        recurrent,
    }
}

/// Worst-case probability of reaching ⊤ within `horizon` steps when Max
/// plays `strategy` from step 0, by exact backward induction.
pub fn stage_guarantee(game: &Game, strategy: &StageStrategy, horizon: usize) -> Vec<Rational> {
    let mut w: Vec<Rational> = game
        .states()
        .map(|s| if s == game.top() { Rational::one() } else { Rational::zero() })
        .collect();
    for step in (0..horizon).rev() {
        w = game
            .states()
            .map(|s| {
                let alpha = strategy.at(step, s);
                (0..game.n_min(s))
                    .map(|b| game.mixed_max(s, alpha, b).expectation(&w))
                    .min()
                    .expect("nonempty Min action set")
            })
            .collect();
    }
    w
}

/// Worst-case value of a stage strategy over the infinite horizon: its
/// default row is evaluated as a memoryless strategy, then the stages are
/// folded in by backward induction.
pub fn stage_strategy_guarantee(game: &Game, strategy: &StageStrategy, objective: Objective) -> Result<Vec<Rational>> {
    if strategy.player != Player::Max {
        return Err(Error::InvalidStrategy("expected a Max strategy".into()));
    }
    strategy.check(game)?;
    let tail = MemorylessStrategy::new(Player::Max, strategy.default.clone());
    let (mut w, _) = guarantee(game, &tail, objective)?;
    for step in (0..strategy.stages.len()).rev() {
        w = game
            .states()
            .map(|s| {
                let alpha = strategy.at(step, s);
                (0..game.n_min(s))
                    .map(|b| game.mixed_max(s, alpha, b).expectation(&w))
                    .min()
                    .expect("nonempty Min action set")
            })
            .collect();
    }
    Ok(w)
}

/// Frequency with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub frequency: f64,
    pub low: f64,
    pub high: f64,
}

impl Estimate {
    pub fn wilson(successes: u64, runs: u64) -> Self {
        const Z: f64 = 1.959_963_984_540_054;
        if runs == 0 {
            return Estimate {
                frequency: 0.0,
                low: 0.0,
                high: 1.0,
            };
        }
        let n = runs as f64;
        let p = successes as f64 / n;
        let z2 = Z * Z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Estimate {
            frequency: p,
            low: (center - half).max(0.0),
            high: (center + half).min(1.0),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub start: StateId,
    pub runs: u64,
    pub horizon: usize,
    pub seed: u64,
    pub reached_top: u64,
    pub hit_bottom: u64,
    pub reach: Estimate,
    pub avoid: Estimate,
}

type FloatMix = Vec<(usize, f64)>;

struct FloatStrategy {
    stages: Vec<Vec<FloatMix>>,
    default: Vec<FloatMix>,
}

impl FloatStrategy {
    fn new(strategy: &Strategy) -> Self {
        let conv = |row: &[Distribution]| row.iter().map(Distribution::to_f64_pairs).collect::<Vec<_>>();
        match strategy {
            Strategy::Memoryless(m) => FloatStrategy {
                stages: Vec::new(),
                default: conv(m.choices()),
            },
            Strategy::Stage(st) => FloatStrategy {
                stages: st.stages.iter().map(|stage| conv(stage)).collect(),
                default: conv(&st.default),
            },
        }
    }

    fn at(&self, step: usize, s: StateId) -> &FloatMix {
        match self.stages.get(step) {
            Some(stage) => &stage[s],
            None => &self.default[s],
        }
    }
}

fn sample(rng: &mut ChaCha8Rng, mix: &FloatMix) -> usize {
    let total: f64 = mix.iter().map(|&(_, p)| p).sum();
    let mut u = rng.gen::<f64>() * total;
    for &(k, p) in mix {
        if u < p {
            return k;
        }
        u -= p;
    }
    mix.last().expect("nonempty distribution").0
}

/// Plays `runs` independent games of at most `horizon` steps from `start`.
/// Run `i` draws from stream `i` of a generator seeded with `seed`, so the
/// result does not depend on the thread count.
pub fn simulate(
    game: &Game,
    sigma: &Strategy,
    pi: &Strategy,
    start: StateId,
    runs: u64,
    horizon: usize,
    seed: u64,
) -> Result<SimulationReport> {
    if sigma.player() != Player::Max || pi.player() != Player::Min {
        return Err(Error::InvalidStrategy("simulate expects a Max and a Min strategy".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidParams("horizon must be at least 1".into()));
    }
    if start >= game.n_states() {
        return Err(Error::UnknownState(format!("#{start}")));
    }
    sigma.check(game)?;
    pi.check(game)?;
    let table = game.float_table();
    let fs = FloatStrategy::new(sigma);
    let fp = FloatStrategy::new(pi);
    let (top, bottom) = (game.top(), game.bottom());
    let (reached_top, hit_bottom) = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run);
            let mut s = start;
            for step in 0..horizon {
                if s == top || s == bottom {
                    break;
                }
                let a = sample(&mut rng, fs.at(step, s));
                let b = sample(&mut rng, fp.at(step, s));
                s = sample(&mut rng, &table[s][a][b]);
            }
            ((s == top) as u64, (s == bottom) as u64)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok(SimulationReport {
        start,
        runs,
        horizon,
        seed,
        reached_top,
        hit_bottom,
        reach: Estimate::wilson(reached_top, runs),
        avoid: Estimate::wilson(runs - hit_bottom, runs),
    })
}

/// Float view of an exact value, for reports.
pub fn approx(x: &Rational) -> f64 {
    x.to_f64()
}
