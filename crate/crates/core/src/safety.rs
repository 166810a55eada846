//! Memoryless optimal strategies for avoiding ⊥: play a maximin row of the
//! local matrix at the safety values in every state.

use crate::bellman::{fixpoint_violation, local_matrix, Objective, ValueVector};
use crate::error::{Error, Result};
use crate::game::{Game, Player};
use crate::matrix;
use crate::num::Scalar;
use crate::strategy::MemorylessStrategy;

/// `theta` bounds the per-state fixpoint residual accepted for inexact
/// values; exact values must be an exact fixpoint.
pub fn synthesize_safety(game: &Game, v_safe: &ValueVector, theta: f64) -> Result<MemorylessStrategy> {
    if v_safe.objective != Objective::Avoid {
        return Err(Error::InvalidParams("safety synthesis needs avoid-⊥ values".into()));
    }
    if v_safe.len() != game.n_states() {
        return Err(Error::InvalidParams("value vector does not match the game".into()));
    }
    if v_safe.exact {
        if let Some((s, d)) = fixpoint_violation(game, &v_safe.values) {
            return Err(Error::NotFixpoint {
                state: game.name(s).to_string(),
                residual: d.to_f64(),
            });
        }
        let choice = game
            .states()
            .map(|s| matrix::to_distribution(&matrix::maximin(&local_matrix(game, s, &v_safe.values)).0))
            .collect();
        return Ok(MemorylessStrategy::new(Player::Max, choice));
    }
    let v = v_safe.to_f64();
    let mut choice = Vec::with_capacity(game.n_states());
    for s in game.states() {
        let (row, value) = matrix::maximin(&local_matrix(game, s, &v));
        if (value - v[s]).abs() > theta {
            return Err(Error::NotFixpoint {
                state: game.name(s).to_string(),
                residual: (value - v[s]).abs(),
            });
        }
        choice.push(matrix::to_distribution(&row));
    }
    Ok(MemorylessStrategy::new(Player::Max, choice))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::{safety_values, IterOptions};
    use crate::builtin::{leaky_mdp, snowball};
    use crate::game::Distribution;
    use crate::num::{int, rat};
    use crate::verify::guarantee;

    #[test]
    fn snowball_hides() {
        let g = snowball();
        let v = safety_values(&g, &IterOptions::default());
        let sigma = synthesize_safety(&g, &v, 1e-6).unwrap();
        assert_eq!(*sigma.get(0), Distribution::point(0));
        let (achieved, _) = guarantee(&g, &sigma, Objective::Avoid).unwrap();
        assert_eq!(achieved[0], int(1));
    }

    #[test]
    fn leaky_mdp_is_lost_anyway() {
        let g = leaky_mdp(4).unwrap();
        let v = safety_values(&g, &IterOptions::default());
        let sigma = synthesize_safety(&g, &v, 1e-6).unwrap();
        let (achieved, _) = guarantee(&g, &sigma, Objective::Avoid).unwrap();
        assert!(achieved.iter().zip(&v.values).all(|(a, b)| a >= b));
    }

    #[test]
    fn refuses_non_fixpoints() {
        let g = snowball();
        let mut v = safety_values(&g, &IterOptions::default());
        v.values[0] = rat(1, 2);
        assert!(matches!(synthesize_safety(&g, &v, 1e-6), Err(Error::NotFixpoint { .. })));
        v.exact = false;
        assert!(matches!(synthesize_safety(&g, &v, 1e-6), Err(Error::NotFixpoint { .. })));
    }
}
