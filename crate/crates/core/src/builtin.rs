//! Named example games.
//!
//! * `snowball`: hide-or-run. Max hides or runs, Min waits or throws.
//! * `leaky_mdp(k)`: one-player safety game truncated to actions `a_0..a_k`,
//!   where `a_i` drops to bottom with probability `2^-i`.
//! * `value_gift(Q)`: Min picks `b_q` at `s0`, moving to a snowball copy `s1`
//!   with probability `q` and to bottom otherwise.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder, Mode};
use crate::num::{int, parse_rational, rat, Rational};

pub fn snowball() -> Game {
    let mut b = GameBuilder::new(Mode::Exact);
    let s = b.state("s");
    let top = b.state("top");
    let bot = b.state("bot");
    add_snowball_rows(&mut b, s, top, bot);
    b.sink(top).sink(bot).top(top).bottom(bot);
    b.build().expect("snowball is valid")
}

fn add_snowball_rows(b: &mut GameBuilder, s: usize, top: usize, bot: usize) {
    b.actions(s, &["hide", "run"], &["wait", "throw"]);
    b.transition(s, 0, 0, [(s, int(1))]);
    b.transition(s, 0, 1, [(top, int(1))]);
    b.transition(s, 1, 0, [(top, int(1))]);
    b.transition(s, 1, 1, [(bot, int(1))]);
}

pub fn leaky_mdp(k: usize) -> Result<Game> {
    if k < 1 {
        return Err(Error::InvalidParams("leaky_mdp needs k >= 1".into()));
    }
    let mut b = GameBuilder::new(Mode::Exact);
    let s = b.state("s");
    let top = b.state("top");
    let bot = b.state("bot");
    let labels: Vec<String> = (0..=k).map(|i| format!("a_{i}")).collect();
    b.actions(s, &labels, &["b".to_string()]);
    for i in 0..=k {
        let escape = Rational::new(BigInt::one(), BigInt::one() << i);
        b.transition(s, i, 0, [(s, Rational::one() - &escape), (bot, escape)]);
    }
    b.sink(top).sink(bot).top(top).bottom(bot);
    b.build()
}

pub fn value_gift(qs: &[Rational]) -> Result<Game> {
    if qs.is_empty() {
        return Err(Error::InvalidParams("value_gift needs a nonempty Q".into()));
    }
    let half = rat(1, 2);
    let mut sorted = qs.to_vec();
    sorted.sort();
    sorted.dedup();
    if let Some(q) = sorted.iter().find(|q| **q <= half || **q >= Rational::one()) {
        return Err(Error::InvalidParams(format!("q = {q} outside (1/2, 1)")));
    }
    let mut b = GameBuilder::new(Mode::Exact);
    let s0 = b.state("s0");
    let s1 = b.state("s1");
    let top = b.state("top");
    let bot = b.state("bot");
    let labels: Vec<String> = sorted.iter().map(|q| format!("b_{q}")).collect();
    b.actions(s0, &["a".to_string()], &labels);
    for (j, q) in sorted.iter().enumerate() {
        b.transition(s0, 0, j, [(s1, q.clone()), (bot, Rational::one() - q)]);
    }
    add_snowball_rows(&mut b, s1, top, bot);
    b.sink(top).sink(bot).top(top).bottom(bot);
    b.build()
}

/// Looks up a builtin by name. Parameters: `k` for `leaky_mdp`, and `q` (a
/// comma-separated list of rationals) for `value_gift`.
pub fn builtin(name: &str, params: &BTreeMap<String, String>) -> Result<Game> {
    let allowed: &[&str] = match name {
        "snowball" => &[],
        "leaky_mdp" => &["k"],
        "value_gift" => &["q"],
        _ => return Err(Error::InvalidParams(format!("unknown builtin game {name:?}"))),
    };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParams(format!("{name} takes no parameter {extra:?}")));
    }
    match name {
        "snowball" => Ok(snowball()),
        "leaky_mdp" => {
            let k = params
                .get("k")
                .ok_or_else(|| Error::InvalidParams("leaky_mdp needs k".into()))?;
            let k: usize = k
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad k {k:?}")))?;
            leaky_mdp(k)
        }
        _ => {
            let q = params
                .get("q")
                .ok_or_else(|| Error::InvalidParams("value_gift needs q".into()))?;
            let qs = q
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()?;
            value_gift(&qs)
        }
    }
}
