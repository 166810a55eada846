#![allow(dead_code)]

use csg_core::builtin::snowball;
use csg_core::num::{int, rat};
use csg_core::random::{random_game, RandomSpec};
use csg_core::{Distribution, Game, GameBuilder, MemorylessStrategy, Mode, Player, Rational};
use rand::Rng;

/// 100 exact concurrent games with 3 to 6 states and up to 3 actions a side.
pub fn corpus() -> Vec<Game> {
    (0..100u64)
        .map(|seed| {
            random_game(&RandomSpec {
                seed,
                n_states: 3 + (seed % 4) as usize,
                ..Default::default()
            })
            .unwrap()
        })
        .collect()
}

pub fn turn_based_corpus() -> Vec<Game> {
    (0..100u64)
        .map(|seed| {
            random_game(&RandomSpec {
                seed: 1000 + seed,
                n_states: 3 + (seed % 4) as usize,
                turn_based: true,
                ..Default::default()
            })
            .unwrap()
        })
        .collect()
}

/// Every pure memoryless strategy of `player`, in odometer order.
pub fn pure_strategies(game: &Game, player: Player) -> Vec<MemorylessStrategy> {
    let sizes: Vec<usize> = game.states().map(|s| game.n_actions(player, s)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; sizes.len()];
    loop {
        out.push(MemorylessStrategy::new(
            player,
            idx.iter().map(|&a| Distribution::point(a)).collect(),
        ));
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// A random mixed strategy with small integer weights; some actions get
/// weight zero.
pub fn random_strategy(game: &Game, player: Player, rng: &mut impl Rng) -> MemorylessStrategy {
    let choice = game
        .states()
        .map(|s| {
            let n = game.n_actions(player, s);
            let mut w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
            if w.iter().all(|&x| x == 0) {
                w[rng.gen_range(0..n)] = 1;
            }
            let total: i64 = w.iter().sum();
            Distribution::from_pairs(
                w.iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0)
                    .map(|(a, &x)| (a, rat(x, total))),
            )
        })
        .collect();
    MemorylessStrategy::new(player, choice)
}

/// Two states with optimal strategies and two without.
///
/// `z` can go straight to ⊤ or into the snowball state `s`; `r` is a plain
/// lottery; `w` splits between `s` and `r`.
pub fn mixed_fixture() -> Game {
    let mut b = GameBuilder::new(Mode::Exact);
    let z = b.state("z");
    let s = b.state("s");
    let r = b.state("r");
    let w = b.state("w");
    let top = b.state("top");
    let bot = b.state("bot");
    b.actions(z, &["direct", "detour"], &["x"]);
    b.transition(z, 0, 0, [(top, int(1))]);
    b.transition(z, 1, 0, [(s, int(1))]);
    b.actions(s, &["hide", "run"], &["wait", "throw"]);
    b.transition(s, 0, 0, [(s, int(1))]);
    b.transition(s, 0, 1, [(top, int(1))]);
    b.transition(s, 1, 0, [(top, int(1))]);
    b.transition(s, 1, 1, [(bot, int(1))]);
    b.actions(r, &["play"], &["x"]);
    b.transition(r, 0, 0, [(top, rat(1, 3)), (bot, rat(2, 3))]);
    b.actions(w, &["split"], &["x"]);
    b.transition(w, 0, 0, [(s, rat(1, 2)), (r, rat(1, 2))]);
    b.sink(top).sink(bot).top(top).bottom(bot);
    b.build().unwrap()
}

/// A turn-based fixture where Min picks between two lotteries and Max
/// can fall back on a sure but slow route.
pub fn turn_based_fixture() -> Game {
    let mut b = GameBuilder::new(Mode::Exact);
    let m = b.state("m");
    let q = b.state("q");
    let top = b.state("top");
    let bot = b.state("bot");
    b.actions(m, &["x"], &["left", "right"]);
    b.transition(m, 0, 0, [(top, rat(2, 5)), (q, rat(3, 5))]);
    b.transition(m, 0, 1, [(top, rat(1, 5)), (bot, rat(1, 5)), (m, rat(3, 5))]);
    b.actions(q, &["safe", "gamble"], &["x"]);
    b.transition(q, 0, 0, [(top, rat(1, 2)), (bot, rat(1, 2))]);
    b.transition(q, 1, 0, [(m, rat(1, 4)), (bot, rat(3, 4))]);
    b.sink(top).sink(bot).top(top).bottom(bot);
    b.build().unwrap()
}

pub fn fixtures() -> Vec<(&'static str, Game)> {
    let q = [rat(3, 4)];
    vec![
        ("snowball", snowball()),
        ("leaky_mdp(2)", csg_core::builtin::leaky_mdp(2).unwrap()),
        ("leaky_mdp(4)", csg_core::builtin::leaky_mdp(4).unwrap()),
        ("value_gift", csg_core::builtin::value_gift(&q).unwrap()),
        ("mixed", mixed_fixture()),
        ("turn_based", turn_based_fixture()),
    ]
}

pub fn one() -> Rational {
    int(1)
}
