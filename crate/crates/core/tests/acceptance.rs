mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use csg_core::bellman::{horizon_values, reach_values, safety_values, IterOptions, Objective};
use csg_core::builtin::{leaky_mdp, snowball, value_gift};
use csg_core::leaky::leak_all;
use csg_core::matrix::{self, Matrix};
use csg_core::num::{int, rat};
use csg_core::optimal::{synthesize_optimal, OptimalOptions};
use csg_core::reach_eps::{positive_states, synthesize_eps, EpsOptions};
use csg_core::safety::synthesize_safety;
use csg_core::verify::{
    absorption_of_chain, certify, chain_absorption, guarantee, induce_min_mdp, induced_chain, min_reach_value,
    recurrent_classes,
};
use csg_core::{Distribution, Game, MemorylessStrategy, Player, Rational};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    if ok {
        Ok(detail.into())
    } else {
        Err(detail.into())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let v = reach_values(&snowball(), &IterOptions::default());
    let elapsed = start.elapsed();
    let value = v.values[0].clone();
    check(
        value >= int(1) - Rational::new(1.into(), 1_000_000.into()) && elapsed < Duration::from_secs(5),
        format!("val(s) = {value}, {:.2?}", elapsed),
    )
}

fn snowball_hand(eps: Option<Rational>) -> MemorylessStrategy {
    let s = match eps {
        Some(e) => Distribution::from_pairs([(0, int(1) - &e), (1, e)]),
        None => Distribution::point(0),
    };
    MemorylessStrategy::new(Player::Max, vec![s, Distribution::point(0), Distribution::point(0)])
}

fn criterion_2() -> Outcome {
    let g = snowball();
    let mut notes = Vec::new();
    let mut ok = true;
    for e in [rat(1, 10), rat(1, 100)] {
        let target = int(1) - &e;
        let report = certify(&g, &snowball_hand(Some(e.clone())), &BTreeMap::from([(0, target.clone())])).unwrap();
        let rec = report.record(0).unwrap();
        let witness = g.min_label(0, report.witness[0]);
        ok &= rec.achieved == target && witness == "throw" && report.passed();
        notes.push(format!("eps {e}: {} vs {witness}", rec.achieved));
    }
    let report = certify(&g, &snowball_hand(None), &BTreeMap::from([(0, int(0))])).unwrap();
    let witness = g.min_label(0, report.witness[0]);
    ok &= report.record(0).unwrap().achieved.is_zero() && witness == "wait";
    notes.push(format!("hide: {} vs {witness}", report.record(0).unwrap().achieved));
    check(ok, notes.join("; "))
}

fn criterion_3() -> Outcome {
    let slack = Rational::new(1.into(), 1_000_000.into());
    let mut failures = Vec::new();
    for (i, g) in corpus().iter().enumerate() {
        let v = safety_values(g, &IterOptions::default());
        let sigma = match synthesize_safety(g, &v, 1e-6) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("game {i}: {e}"));
                continue;
            }
        };
        let (achieved, _) = guarantee(g, &sigma, Objective::Avoid).unwrap();
        if let Some(s) = g.states().find(|&s| achieved[s] < &v.values[s] - &slack) {
            failures.push(format!("game {i} state {s}"));
        }
    }
    let mut leaky = Vec::new();
    for k in [2, 4, 8] {
        let v = safety_values(&leaky_mdp(k).unwrap(), &IterOptions::default());
        if !v.values[0].is_zero() {
            failures.push(format!("leaky_mdp({k}) safety value {}", v.values[0]));
        }
        leaky.push(format!("k={k}: {}", v.values[0]));
    }
    check(
        failures.is_empty(),
        format!("100 games, {} failures {:?}; leaky_mdp {}", failures.len(), failures, leaky.join(", ")),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let eps = rat(1, 10);
    let mut games = corpus();
    games.push(snowball());
    let mut failures = Vec::new();
    for (i, g) in games.iter().enumerate() {
        let out = match synthesize_eps(g, &eps, None, None, &EpsOptions::default()) {
            Ok(out) => out,
            Err(e) => {
                failures.push(format!("game {i}: {e}"));
                continue;
            }
        };
        let (achieved, _) = guarantee(g, &out.strategy, Objective::Reach).unwrap();
        for s in positive_states(&out.values) {
            if achieved[s] < &out.values.values[s] - &eps {
                failures.push(format!("game {i} state {s}: {} < {} - {eps}", achieved[s], out.values.values[s]));
            }
        }
        if !out.report.passed() {
            failures.push(format!("game {i}: certificate failed"));
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(120),
        format!("{} games, {} failures {:?}, {:.2?}", games.len(), failures.len(), failures, elapsed),
    )
}

/// Turn-based values by brute force over pure memoryless Max strategies.
fn turn_based_value(g: &Game) -> Vec<Rational> {
    let mut best = vec![int(0); g.n_states()];
    for sigma in pure_strategies(g, Player::Max) {
        let v = min_reach_value(&induce_min_mdp(g, &sigma), g.top()).values;
        for s in g.states() {
            if v[s] > best[s] {
                best[s] = v[s].clone();
            }
        }
    }
    best
}

fn check_optimal(g: &Game, eps: &Rational, oracle: Option<&[Rational]>) -> Result<(BTreeSet<usize>, BTreeSet<usize>), String> {
    let out = synthesize_optimal(g, eps, &OptimalOptions::default()).map_err(|e| e.to_string())?;
    if !out.passed() {
        return Err(format!("certificate failed: {} local violations", out.violations.len()));
    }
    let (achieved, _) = guarantee(g, &out.strategy, Objective::Reach).unwrap();
    let v = &out.values.values;
    if let Some(o) = oracle {
        if o != v.as_slice() {
            return Err(format!("values {v:?} disagree with oracle {o:?}"));
        }
    }
    for s in g.states() {
        let ok = if out.partition.s0.contains(&s) {
            achieved[s] == v[s]
        } else {
            achieved[s] >= &v[s] - &out.eps
        };
        if !ok {
            return Err(format!("state {}: achieved {} value {}", g.name(s), achieved[s], v[s]));
        }
    }
    Ok((out.partition.s0, out.partition.s1))
}

fn criterion_5() -> Outcome {
    let eps = rat(1, 10);
    let mut failures = Vec::new();
    for (i, g) in turn_based_corpus().iter().enumerate() {
        let oracle = turn_based_value(g);
        match check_optimal(g, &eps, Some(&oracle)) {
            Ok((s0, _)) if s0.len() == g.n_states() => {}
            Ok((_, s1)) => failures.push(format!("a: game {i} S1 = {s1:?}")),
            Err(e) => failures.push(format!("a: game {i}: {e}")),
        }
    }
    for (name, g) in [("snowball", snowball()), ("value_gift", value_gift(&[rat(3, 4)]).unwrap())] {
        let inner: BTreeSet<usize> = g.states().filter(|&s| !g.is_sink(s)).collect();
        match check_optimal(&g, &eps, None) {
            Ok((_, s1)) if s1 == inner => {}
            Ok((_, s1)) => failures.push(format!("b: {name} S1 = {s1:?}")),
            Err(e) => failures.push(format!("b: {name}: {e}")),
        }
    }
    let g = mixed_fixture();
    let expect: BTreeSet<usize> = ["s", "w"].iter().map(|n| g.state_index(n).unwrap()).collect();
    match check_optimal(&g, &eps, None) {
        Ok((_, s1)) if s1 == expect => {}
        Ok((_, s1)) => failures.push(format!("c: mixed S1 = {s1:?}")),
        Err(e) => failures.push(format!("c: mixed: {e}")),
    }
    let g = turn_based_fixture();
    match check_optimal(&g, &eps, Some(&turn_based_value(&g))) {
        Ok((s0, _)) if s0.len() == g.n_states() => {}
        Ok((_, s1)) => failures.push(format!("c: turn_based S1 = {s1:?}")),
        Err(e) => failures.push(format!("c: turn_based: {e}")),
    }
    check(failures.is_empty(), format!("{} failures {:?}", failures.len(), failures))
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> Matrix<Rational> {
    Matrix::from_rows(
        (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        let d = rng.gen_range(1..=7);
                        rat(rng.gen_range(lo * d..=hi * d), d)
                    })
                    .collect()
            })
            .collect(),
    )
}

/// Best pure-column payoff of the row player's best grid mix, step 1/n.
fn grid_maximin(m: &Matrix<Rational>, n: usize) -> f64 {
    let e: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| csg_core::verify::approx(m.get(i, j))).collect()).collect();
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        for j in 0..=n - i {
            let x = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
            let worst = (0..3)
                .map(|c| (0..3).map(|r| x[r] * e[r][c]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            best = best.max(worst);
        }
    }
    best
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = 0;
    for _ in 0..1000 {
        let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let m = random_matrix(&mut rng, r, c, -5, 5);
        let sol = matrix::solve(&m);
        let is_dist = |x: &[Rational]| x.iter().all(|p| !p.is_negative()) && x.iter().sum::<Rational>() == int(1);
        let lower = (0..c).map(|j| m.column_payoff(&sol.row, j)).min().unwrap();
        let upper = (0..r).map(|i| m.row_payoff(i, &sol.col)).max().unwrap();
        if !(is_dist(&sol.row) && is_dist(&sol.col) && lower == sol.value && upper == sol.value) {
            failures += 1;
        }
    }
    let mut oracle_failures = 0;
    for _ in 0..200 {
        let m = random_matrix(&mut rng, 3, 3, 0, 1);
        let v = csg_core::verify::approx(&matrix::value(&m));
        let g = grid_maximin(&m, 200);
        if (v - g).abs() > 0.01 || g > v + 1e-12 {
            oracle_failures += 1;
        }
    }
    check(
        failures == 0 && oracle_failures == 0,
        format!("1000 matrices, {failures} duality failures; 200 grid checks, {oracle_failures} disagreements"),
    )
}

fn submartingale(chain: &[Distribution], v: &[Rational]) -> bool {
    chain.iter().enumerate().all(|(s, d)| d.expectation(v) >= v[s])
}

fn lemma_one_holds(g: &Game, chain: &[Distribution], v: &[Rational]) -> bool {
    let abs = absorption_of_chain(chain, g.top(), g.bottom());
    g.states().all(|s| abs.avoid_bottom(s) >= v[s])
}

fn criterion_7() -> Outcome {
    let mut checked = 0;
    let mut counterexamples = Vec::new();
    for (name, g) in fixtures() {
        let v = safety_values(&g, &IterOptions::default());
        let sigma = synthesize_safety(&g, &v, 1e-6).unwrap();
        for pi in pure_strategies(&g, Player::Min) {
            let chain = induced_chain(&g, &sigma, &pi);
            if submartingale(&chain, &v.values) {
                checked += 1;
                if !lemma_one_holds(&g, &chain, &v.values) {
                    counterexamples.push(name.to_string());
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let games = corpus();
    let mut random_checked = 0;
    let mut attempts = 0;
    while random_checked < 100 && attempts < 100_000 {
        attempts += 1;
        let g = &games[rng.gen_range(0..games.len())];
        let sigma = random_strategy(g, Player::Max, &mut rng);
        let pi = random_strategy(g, Player::Min, &mut rng);
        let chain = induced_chain(g, &sigma, &pi);
        let abs = absorption_of_chain(&chain, g.top(), g.bottom());
        let lambda = rat(rng.gen_range(0..=8), 8);
        let mu = rat(rng.gen_range(0..=8), 8);
        // Either a random vector, or the max of two scaled harmonic vectors.
        let v: Vec<Rational> = if rng.gen_bool(0.5) {
            g.states()
                .map(|s| if s == g.bottom() { int(0) } else { rat(rng.gen_range(0..=4), 4) })
                .collect()
        } else {
            g.states()
                .map(|s| {
                    let a = &lambda * abs.avoid_bottom(s);
                    let b = &mu * &abs.top[s];
                    a.max(b)
                })
                .collect()
        };
        if !submartingale(&chain, &v) {
            continue;
        }
        random_checked += 1;
        if !lemma_one_holds(g, &chain, &v) {
            counterexamples.push(format!("random attempt {attempts}"));
        }
    }
    check(
        counterexamples.is_empty() && random_checked == 100,
        format!(
            "{checked} fixture pairs, {random_checked} random instances, {} counterexamples {:?}",
            counterexamples.len(),
            counterexamples
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut pairs = 0usize;
    let mut violations = Vec::new();
    for eps in [rat(1, 10), rat(1, 100)] {
        for (i, g) in corpus().iter().enumerate() {
            let leaky = leak_all(g, &eps).unwrap();
            let sinks = BTreeSet::from([leaky.top(), leaky.bottom()]);
            let maxes = pure_strategies(&leaky, Player::Max);
            let mins = pure_strategies(&leaky, Player::Min);
            for sigma in &maxes {
                for pi in &mins {
                    pairs += 1;
                    let chain = induced_chain(&leaky, sigma, pi);
                    for class in recurrent_classes(&chain) {
                        if class.iter().any(|s| !sinks.contains(s)) {
                            violations.push(format!("eps {eps} game {i} class {class:?}"));
                        }
                    }
                }
            }
            let abs = chain_absorption(
                &leaky,
                &MemorylessStrategy::uniform(&leaky, Player::Max),
                &MemorylessStrategy::uniform(&leaky, Player::Min),
            )
            .unwrap();
            if abs.recurrent.iter().any(|c| c.iter().any(|s| !sinks.contains(s))) {
                violations.push(format!("eps {eps} game {i} uniform pair"));
            }
        }
    }
    check(
        violations.is_empty(),
        format!("{pairs} pure pairs, {} violations {:?}", violations.len(), violations.iter().take(5).collect::<Vec<_>>()),
    )
}

fn criterion_9() -> Outcome {
    let seq = horizon_values(&snowball(), 20);
    let bad: Vec<usize> = (0..=20)
        .filter(|&n| seq.get(n).map(|v| v.values[0] != rat(n as i64, n as i64 + 1)) != Some(false))
        .collect();
    check(
        bad.is_empty() && seq.iter().all(|v| v.exact),
        format!("n = 0..=20, mismatches at {bad:?}; val^20(s) = {}", seq[20].values[0]),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("snowball value", criterion_1),
        ("snowball hand strategies", criterion_2),
        ("safety synthesis", criterion_3),
        ("eps-optimal reach synthesis", criterion_4),
        ("optimal synthesis", criterion_5),
        ("matrix-game duality", criterion_6),
        ("submartingale oracle", criterion_7),
        ("leak soundness", criterion_8),
        ("horizon closed form", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
