//! Reproducible random game instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder, Mode};
use crate::num::rat;

#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub seed: u64,
    pub n_states: usize,
    pub max_a: usize,
    pub max_b: usize,
    /// Chance that a given state appears in a successor support.
    pub density: f64,
    pub turn_based: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            seed: 0,
            n_states: 6,
            max_a: 3,
            max_b: 3,
            density: 0.4,
            turn_based: false,
        }
    }
}

/// States `s0..` come first; `top` and `bot` are the last two. Probabilities
/// are integer weights in `1..=4`, normalized exactly.
pub fn random_game(spec: &RandomSpec) -> Result<Game> {
    if spec.n_states < 3 {
        return Err(Error::InvalidParams("random games need at least 3 states".into()));
    }
    if spec.max_a == 0 || spec.max_b == 0 {
        return Err(Error::InvalidParams("action bounds must be positive".into()));
    }
    if !(0.0..=1.0).contains(&spec.density) {
        return Err(Error::InvalidParams("density must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_states;
    let mut b = GameBuilder::new(Mode::Exact);
    for i in 0..n - 2 {
        b.state(&format!("s{i}"));
    }
    let top = b.state("top");
    let bot = b.state("bot");
    for s in 0..n - 2 {
        let (na, nb) = if spec.turn_based {
            let k = rng.gen_range(1..=spec.max_a.max(spec.max_b));
            if rng.gen_bool(0.5) {
                (k.min(spec.max_a), 1)
            } else {
                (1, k.min(spec.max_b))
            }
        } else {
            (rng.gen_range(1..=spec.max_a), rng.gen_range(1..=spec.max_b))
        };
        let max: Vec<String> = (0..na).map(|a| format!("a{a}")).collect();
        let min: Vec<String> = (0..nb).map(|j| format!("b{j}")).collect();
        b.actions(s, &max, &min);
        for a in 0..na {
            for j in 0..nb {
                let mut support: Vec<usize> = (0..n).filter(|_| rng.gen_bool(spec.density)).collect();
                if support.is_empty() {
                    support.push(rng.gen_range(0..n));
                }
                let weights: Vec<i64> = support.iter().map(|_| rng.gen_range(1..=4)).collect();
                let total: i64 = weights.iter().sum();
                b.transition(
                    s,
                    a,
                    j,
                    support.into_iter().zip(weights).map(|(t, w)| (t, rat(w, total))),
                );
            }
        }
    }
    b.sink(top).sink(bot).top(top).bottom(bot);
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::validate;

    #[test]
    fn deterministic_for_fixed_seed() {
        let spec = RandomSpec {
            seed: 1,
            ..Default::default()
        };
        assert_eq!(random_game(&spec).unwrap(), random_game(&spec).unwrap());
        let other = RandomSpec {
            seed: 2,
            ..Default::default()
        };
        assert_ne!(random_game(&spec).unwrap(), random_game(&other).unwrap());
    }

    #[test]
    fn turn_based_has_singleton_side() {
        for seed in 0..20 {
            let g = random_game(&RandomSpec {
                seed,
                turn_based: true,
                ..Default::default()
            })
            .unwrap();
            assert!(g.is_turn_based());
        }
    }

    #[test]
    fn outputs_validate() {
        for seed in 0..50 {
            let g = random_game(&RandomSpec {
                seed,
                n_states: 3 + (seed as usize % 6),
                density: 0.1 + (seed % 9) as f64 / 10.0,
                ..Default::default()
            })
            .unwrap();
            assert!(validate(&g).is_empty());
        }
    }

    #[test]
    fn rejects_tiny_state_spaces() {
        assert!(random_game(&RandomSpec {
            n_states: 2,
            ..Default::default()
        })
        .is_err());
    }
}
