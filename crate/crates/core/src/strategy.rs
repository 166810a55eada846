use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::game::{Distribution, Game, Mode, Player, StateId};
use crate::num::Scalar;

/// Per-state mixed action for one player.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorylessStrategy {
    pub player: Player,
    choice: Vec<Distribution>,
}

impl MemorylessStrategy {
    pub fn new(player: Player, choice: Vec<Distribution>) -> Self {
        MemorylessStrategy { player, choice }
    }

    /// Plays the lowest-index action everywhere.
    pub fn lowest_index(game: &Game, player: Player) -> Self {
        Self::new(player, game.states().map(|_| Distribution::point(0)).collect())
    }

    pub fn uniform(game: &Game, player: Player) -> Self {
        Self::new(
            player,
            game.states()
                .map(|s| Distribution::uniform(0..game.n_actions(player, s)))
                .collect(),
        )
    }

    pub fn get(&self, s: StateId) -> &Distribution {
        &self.choice[s]
    }

    pub fn set(&mut self, s: StateId, d: Distribution) {
        self.choice[s] = d;
    }

    pub fn choices(&self) -> &[Distribution] {
        &self.choice
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    pub fn check(&self, game: &Game) -> Result<()> {
        if self.choice.len() != game.n_states() {
            return Err(Error::InvalidStrategy(format!(
                "strategy covers {} states, game has {}",
                self.choice.len(),
                game.n_states()
            )));
        }
        for s in game.states() {
            check_mixed(game, self.player, s, &self.choice[s])?;
        }
        Ok(())
    }
}

pub(crate) fn check_mixed(game: &Game, player: Player, s: StateId, d: &Distribution) -> Result<()> {
    let n = game.n_actions(player, s);
    if let Some(a) = d.support().find(|&a| a >= n) {
        return Err(Error::InvalidStrategy(format!(
            "state {}: action index {a} out of range",
            game.name(s)
        )));
    }
    if d.iter().any(|(_, p)| !p.is_positive()) {
        return Err(Error::InvalidStrategy(format!(
            "state {}: non-positive probability",
            game.name(s)
        )));
    }
    let mass = d.mass();
    let ok = match game.mode() {
        Mode::Exact => mass.is_one(),
        Mode::Float => (<f64 as Scalar>::from_rational(&mass) - 1.0).abs() <= 1e-12,
    };
    if !ok {
        return Err(Error::InvalidStrategy(format!(
            "state {}: mixed action has mass {mass}",
            game.name(s)
        )));
    }
    Ok(())
}

/// Step-indexed strategy: `stages[j]` is played at step `j`, `default` after
/// the last stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageStrategy {
    pub player: Player,
    pub stages: Vec<Vec<Distribution>>,
    pub default: Vec<Distribution>,
}

impl StageStrategy {
    pub fn at(&self, step: usize, s: StateId) -> &Distribution {
        match self.stages.get(step) {
            Some(stage) => &stage[s],
            None => &self.default[s],
        }
    }

    pub fn check(&self, game: &Game) -> Result<()> {
        for stage in self.stages.iter().chain(std::iter::once(&self.default)) {
            if stage.len() != game.n_states() {
                return Err(Error::InvalidStrategy("stage does not cover every state".into()));
            }
            for s in game.states() {
                check_mixed(game, self.player, s, &stage[s])?;
            }
        }
        Ok(())
    }

    /// Actions used at `s` by any stage or the default.
    pub fn support_at(&self, s: StateId) -> Vec<usize> {
        let mut used: Vec<usize> = self
            .stages
            .iter()
            .chain(std::iter::once(&self.default))
            .flat_map(|stage| stage[s].support().collect::<Vec<_>>())
            .collect();
        used.sort_unstable();
        used.dedup();
        used
    }
}

/// Either kind of strategy, for simulation and support restriction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Memoryless(MemorylessStrategy),
    Stage(StageStrategy),
}

impl Strategy {
    pub fn player(&self) -> Player {
        match self {
            Strategy::Memoryless(m) => m.player,
            Strategy::Stage(st) => st.player,
        }
    }

    pub fn at(&self, step: usize, s: StateId) -> &Distribution {
        match self {
            Strategy::Memoryless(m) => m.get(s),
            Strategy::Stage(st) => st.at(step, s),
        }
    }

    pub fn support_at(&self, s: StateId) -> Vec<usize> {
        match self {
            Strategy::Memoryless(m) => m.get(s).support().collect(),
            Strategy::Stage(st) => st.support_at(s),
        }
    }

    pub fn check(&self, game: &Game) -> Result<()> {
        match self {
            Strategy::Memoryless(m) => m.check(game),
            Strategy::Stage(st) => st.check(game),
        }
    }
}

impl From<MemorylessStrategy> for Strategy {
    fn from(m: MemorylessStrategy) -> Self {
        Strategy::Memoryless(m)
    }
}

impl From<StageStrategy> for Strategy {
    fn from(s: StageStrategy) -> Self {
        Strategy::Stage(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::snowball;
    use crate::num::rat;

    #[test]
    fn check_rejects_bad_supports() {
        let g = snowball();
        let ok = MemorylessStrategy::uniform(&g, Player::Max);
        assert!(ok.check(&g).is_ok());
        let mut bad = ok.clone();
        bad.set(0, Distribution::point(5));
        assert!(bad.check(&g).is_err());
        let mut short = ok.clone();
        short.set(0, Distribution::from_pairs([(0, rat(1, 2))]));
        assert!(short.check(&g).is_err());
    }

    #[test]
    fn stage_lookup_falls_back_to_default() {
        let g = snowball();
        let st = StageStrategy {
            player: Player::Max,
            stages: vec![vec![Distribution::point(1), Distribution::point(0), Distribution::point(0)]],
            default: vec![Distribution::point(0); 3],
        };
        assert!(st.check(&g).is_ok());
        assert_eq!(*st.at(0, 0), Distribution::point(1));
        assert_eq!(*st.at(5, 0), Distribution::point(0));
        assert_eq!(st.support_at(0), vec![0, 1]);
    }
}
