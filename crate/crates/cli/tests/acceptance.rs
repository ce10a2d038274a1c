//! End-to-end acceptance gate: one pass/fail line per criterion.
//!
//! Each criterion is independent; all are run even if an earlier one
//! fails, and the test panics at the end listing every failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use energygames::arena::{fixtures, serialize_arena};
use energygames::evaluation::{
    avg_energy_of_lasso, mean_payoff_of_lasso, rat, AvgEnergyMode, Lasso, ObjectiveValue,
};
use energygames::oracle::{
    exists_cap_by_search, generate_arena, generate_countdown, mp_value_by_enumeration, CapSearch,
    GenParams,
};
use energygames::reductions::{
    boundify_strategy, build_fig4_gadget, exists_cap_recharge, exists_threshold_avg_energy_l,
    extend_lasso, reduce_avg_recharge, reduce_countdown_to_avg_recharge, solve_avg_recharge,
    EnergyMemory, ExistsCapResult, ThresholdSearchResult,
};
use energygames::solvers::{
    mean_payoff_value, solve_countdown, solve_mean_payoff_threshold, CountdownBudget,
};
use energygames::strategies::{verify_strategy, Objective};
use energygames::{
    FiniteStateStrategy, MemoryStructure, Player, Rational, WeightLabel, WeightedArena,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_energygames")
}

fn run_bin(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_fixture(dir: &Path, name: &str, a: &WeightedArena) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serialize_arena(a)).unwrap();
    path
}

type Criterion = Result<(), String>;

fn check(cond: bool, msg: &str) -> Criterion {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

/// Worked intro example through the binary: lasso average 4, the
/// zero-to-five energy bound holds, and a finite threshold exists.
fn criterion_1(dir: &Path) -> Criterion {
    let intro = write_fixture(dir, "intro.arena", &fixtures::intro());
    let intro = intro.to_str().unwrap();

    let out = run_bin(&[
        "eval-lasso",
        "--objective",
        "avg-energy-l",
        "--lasso",
        "prefix: v0 ; cycle: v2 v0 v1",
        intro,
    ]);
    check(stdout_of(&out).contains("value=4/1"), "lasso average is not 4")?;

    let out = run_bin(&["solve", "--objective", "energy-lu", "--cap", "5", intro]);
    check(
        out.status.code() == Some(0) && stdout_of(&out).contains("winner=Player0"),
        "energy-lu cap 5 is not won by Player 0",
    )?;

    let out = run_bin(&["exists-threshold", intro]);
    check(
        out.status.code() == Some(0) && stdout_of(&out).contains("result=YES"),
        "exists-threshold is not YES",
    )
}

/// Capacity sweep reproduces the published tradeoff curve byte-exactly,
/// including its non-monotonicity.
fn criterion_2(dir: &Path) -> Criterion {
    let arena = write_fixture(dir, "tradeoff.arena", &fixtures::tradeoff());
    let out = run_bin(&["sweep-cap", "--from", "1", "--to", "7", arena.to_str().unwrap()]);
    let expect = "cap,numerator,denominator,status\n\
                  1,3,4,OK\n2,9,7,OK\n3,3,5,OK\n4,5,4,OK\n5,20,11,OK\n6,2,1,OK\n7,29,12,OK\n";
    check(stdout_of(&out) == expect, "sweep CSV differs from the published curve")?;
    let v = [rat(3, 4), rat(9, 7), rat(3, 5), rat(5, 4)];
    let one = rat(1, 1);
    check(
        v[1] > one && v[3] > one && v[0] <= one && v[2] <= one,
        "threshold-1 winnability pattern broken",
    )?;
    check(v[1] > v[0] && v[1] > v[2], "capacity sweep unexpectedly monotone")
}

/// Memory sweep reproduces best averages 7/2, 3, 5/2, 2 and the plateau.
fn criterion_3(dir: &Path) -> Criterion {
    let arena = write_fixture(dir, "memlb.arena", &fixtures::memlb());
    let out = run_bin(&[
        "sweep-memory",
        "--cap",
        "4",
        "--from",
        "1",
        "--to",
        "6",
        arena.to_str().unwrap(),
    ]);
    let expect = "n,numerator,denominator,status\n\
                  1,7,2,OK\n2,3,1,OK\n3,5,2,OK\n4,2,1,OK\n5,2,1,OK\n6,2,1,OK\n";
    check(stdout_of(&out) == expect, "memory sweep differs from the published curve")
}

/// Strategies pulled back through the counter reduction use at most
/// cap + 2 reachable memory states and verify, on 100 winnable instances.
fn criterion_4() -> Criterion {
    let mut wins = 0usize;
    for seed in 0..2_000u64 {
        if wins >= 100 {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=5usize);
        let cap = rng.gen_range(0..=4u64);
        let a = generate_arena(&GenParams::recharge_default(n, 3), rng.gen());
        let t = Rational::new(rng.gen_range(0..=(cap as i128) * 2), 2);
        let res = solve_avg_recharge(&a, cap, t).map_err(|e| e.to_string())?;
        if res.winner != Player::P0 {
            continue;
        }
        let sigma = res.strategy.unwrap();
        check(
            sigma.memory.num_states() <= cap as usize + 2,
            &format!("seed {}: strategy exceeds cap+2 states", seed),
        )?;
        let verdict = verify_strategy(&a, &sigma, &Objective::AvgRecharge { cap, t })
            .map_err(|e| e.to_string())?;
        check(verdict.accepted, &format!("seed {}: extracted strategy rejected", seed))?;
        wins += 1;
    }
    check(wins >= 100, &format!("only {} winnable instances found", wins))
}

/// Counter-product bookkeeping: tracked state equals EL_cap until the
/// first violation, the overflow state absorbs, and lasso membership
/// transfers through the reduction; 10^4 random lassos.
fn criterion_5() -> Criterion {
    let mut walks = 0usize;
    for seed in 0..2_500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=5usize);
        let a = generate_arena(&GenParams::recharge_default(n, 3), rng.gen());
        let cap = rng.gen_range(0..=4u64);
        let mem = EnergyMemory::recharge(&a, cap).map_err(|e| e.to_string())?;
        let mut state = cap as usize;
        let mut level = cap as i128;
        let mut dead = false;
        let mut v = a.initial();
        for _ in 0..30 {
            let outs = a.out_edges(v);
            let e = outs[rng.gen_range(0..outs.len())];
            state = mem.memory.update(state, e);
            level = match a.edge(e).label {
                WeightLabel::Recharge => cap as i128,
                WeightLabel::Int(x) => level + x as i128,
            };
            v = a.edge(e).dst;
            dead = dead || level < 0;
            if dead {
                check(state == mem.bot_state(), &format!("seed {}: overflow not absorbing", seed))?;
            } else {
                check(state as i128 == level, &format!("seed {}: state differs from EL", seed))?;
            }
        }
        walks += 1;
    }
    check(walks == 2_500, "walk count")?;

    let mut lassos = 0usize;
    for seed in 0..10_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
        let n = rng.gen_range(1..=5usize);
        let a = generate_arena(&GenParams::recharge_default(n, 3), rng.gen());
        let cap = rng.gen_range(0..=4u64);
        let q = rng.gen_range(1..=4i128);
        let t = Rational::new(rng.gen_range(-q..=(cap as i128 + 1) * q), q);
        let out = reduce_avg_recharge(&a, cap, t).map_err(|e| e.to_string())?;
        let mut walk = vec![a.initial()];
        let lasso = loop {
            let v = *walk.last().unwrap();
            let outs = a.out_edges(v);
            let next = a.edge(outs[rng.gen_range(0..outs.len())]).dst;
            if let Some(i) = walk.iter().position(|&u| u == next) {
                break Lasso::new(walk[..i].to_vec(), walk[i..].to_vec());
            }
            walk.push(next);
        };
        let value =
            avg_energy_of_lasso(&a, &lasso, AvgEnergyMode::RechargeWith(cap)).map_err(|e| e.to_string())?;
        let in_avg = matches!(value, ObjectiveValue::Finite(m) if m <= t);
        let ext = extend_lasso(&out, &a, &lasso).ok_or("play does not extend")?;
        let mp = mean_payoff_of_lasso(&out.arena, &ext).map_err(|e| e.to_string())?;
        let in_mp = mp <= out.mp_threshold.unwrap();
        check(in_avg == in_mp, &format!("seed {}: membership does not transfer", seed))?;
        lassos += 1;
    }
    check(lassos == 10_000, "lasso count")
}

/// Existential capacity via parity tripling agrees with direct search on
/// fixtures and 200 random arenas; cycle family minima are (n-1)W and the
/// pulled-back witnesses are 3-state and sound.
fn criterion_6() -> Criterion {
    let mut arenas: Vec<WeightedArena> = vec![fixtures::memlb(), fixtures::tradeoff()];
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xcab);
        let n = rng.gen_range(1..=5usize);
        arenas.push(generate_arena(&GenParams::recharge_default(n, 3), rng.gen()));
    }
    for (i, a) in arenas.iter().enumerate() {
        let cap_max = 3 * (a.num_vertices() as u64) * a.max_abs_weight().max(1);
        let search = exists_cap_by_search(a, cap_max).map_err(|e| e.to_string())?;
        match exists_cap_recharge(a).map_err(|e| e.to_string())? {
            ExistsCapResult::No => {
                check(
                    matches!(search, CapSearch::NoUpTo(_)),
                    &format!("instance {}: parity NO but search YES", i),
                )?;
            }
            ExistsCapResult::Yes { witness_cap, strategy } => {
                check(
                    matches!(search, CapSearch::Yes { .. }),
                    &format!("instance {}: parity YES but search NO", i),
                )?;
                check(strategy.memory.num_states() <= 3, "witness exceeds 3 states")?;
                let verdict =
                    verify_strategy(a, &strategy, &Objective::Recharge { cap: witness_cap })
                        .map_err(|e| e.to_string())?;
                check(verdict.accepted, &format!("instance {}: witness rejected", i))?;
            }
        }
    }
    for n in 2..=5usize {
        for w in 1..=4u64 {
            let a = fixtures::cycle(n, w);
            let need = (n as u64 - 1) * w;
            match exists_cap_by_search(&a, need + 4).map_err(|e| e.to_string())? {
                CapSearch::Yes { min_cap } => {
                    check(min_cap == need, &format!("cycle({},{}) min cap {}", n, w, min_cap))?
                }
                _ => return Err(format!("cycle({},{}) not winnable", n, w)),
            }
        }
    }
    Ok(())
}

/// Countdown winners agree across the direct solver, the recharge
/// reduction, and the capacity sweep over the charge/commit/drain gadget.
fn criterion_7() -> Criterion {
    for seed in 0..50u64 {
        let (a, budget) = generate_countdown(seed, 12);
        let direct = solve_countdown(&a, CountdownBudget(budget)).map_err(|e| e.to_string())?.winner;
        let red = reduce_countdown_to_avg_recharge(&a, budget).map_err(|e| e.to_string())?;
        let via = solve_avg_recharge(&red.arena, budget, rat(0, 1)).map_err(|e| e.to_string())?.winner;
        check(direct == via, &format!("seed {}: reduction disagrees", seed))?;
        let g = build_fig4_gadget(&a, budget).map_err(|e| e.to_string())?;
        let mut gadget_won = false;
        for cap in 0..=budget + 2 {
            if solve_avg_recharge(&g, cap, rat(0, 1)).map_err(|e| e.to_string())?.winner == Player::P0 {
                gadget_won = true;
                break;
            }
        }
        check(
            gadget_won == (direct == Player::P0),
            &format!("seed {}: gadget sweep disagrees", seed),
        )?;
    }
    Ok(())
}

/// Exact mean-payoff values match positional enumeration on 200 random
/// arenas, and the threshold decision is monotone around the value.
fn criterion_8() -> Criterion {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x8e8e);
        let n = rng.gen_range(1..=6usize);
        let a = generate_arena(&GenParams::general_default(n, 4), rng.gen());
        let oracle = mp_value_by_enumeration(&a).map_err(|e| e.to_string())?;
        for v in 0..a.num_vertices() {
            let got = mean_payoff_value(&a, v).map_err(|e| e.to_string())?;
            check(got == oracle[v], &format!("seed {} vertex {}: value mismatch", seed, v))?;
        }
        let value = oracle[a.initial()];
        let eps = Rational::new(1, 9);
        let at = |t: Rational| {
            solve_mean_payoff_threshold(&a, t).map(|r| r.winner).map_err(|e| e.to_string())
        };
        check(at(value)? == Player::P0, "losing at own value")?;
        check(at(value + eps)? == Player::P0, "monotonicity up broken")?;
        check(at(value - eps)? == Player::P1, "monotonicity down broken")?;
    }
    Ok(())
}

/// Detour memory: same behaviour, redundantly larger machine.
fn degrade(a: &WeightedArena, sigma: &FiniteStateStrategy, rng: &mut ChaCha8Rng) -> FiniteStateStrategy {
    let k = sigma.memory.num_states();
    let d = rng.gen_range(2..=3usize);
    let m = a.num_edges();
    let mut update = vec![0usize; k * d * m];
    for s in 0..k {
        for dd in 0..d {
            for e in 0..m {
                let s2 = sigma.memory.update(s, e);
                let d2 = rng.gen_range(0..d);
                update[(s * d + dd) * m + e] = s2 * d + d2;
            }
        }
    }
    let memory = MemoryStructure::new(k * d, sigma.memory.initial_state() * d, m, update);
    let mut moves = vec![None; a.num_vertices() * k * d];
    for v in 0..a.num_vertices() {
        for s in 0..k {
            for dd in 0..d {
                moves[v * k * d + s * d + dd] = sigma.next_move(v, s);
            }
        }
    }
    FiniteStateStrategy::new(a, sigma.player, memory, moves)
}

/// The bounding transform: exact on the worked example, and sound on 50
/// synthesized-then-degraded winning strategies.
fn criterion_9() -> Criterion {
    let a = fixtures::intro();
    match exists_threshold_avg_energy_l(&a, 64).map_err(|e| e.to_string())? {
        ThresholdSearchResult::Yes { threshold_witness, strategy, .. } => {
            let (sigma2, cap) =
                boundify_strategy(&a, &strategy, threshold_witness as i64).map_err(|e| e.to_string())?;
            check(cap <= 5, &format!("intro certified cap {} > 5", cap))?;
            let verdict = verify_strategy(&a, &sigma2, &Objective::EnergyLU { cap })
                .map_err(|e| e.to_string())?;
            check(verdict.accepted, "intro bounded strategy rejected")?;
        }
        _ => return Err("intro has no threshold".into()),
    }

    let mut done = 0usize;
    for seed in 0..2_000u64 {
        if done >= 50 {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb0);
        let n = rng.gen_range(1..=4usize);
        let a = generate_arena(&GenParams::general_default(n, 2), rng.gen());
        let found = match exists_threshold_avg_energy_l(&a, 64).map_err(|e| e.to_string())? {
            ThresholdSearchResult::Yes { threshold_witness, strategy, .. } => {
                Some((threshold_witness, strategy))
            }
            _ => None,
        };
        let Some((t, sigma)) = found else { continue };
        let degraded = degrade(&a, &sigma, &mut rng);
        let (sigma2, cap) =
            boundify_strategy(&a, &degraded, t as i64).map_err(|e| e.to_string())?;
        let verdict = verify_strategy(&a, &sigma2, &Objective::EnergyLU { cap })
            .map_err(|e| e.to_string())?;
        check(verdict.accepted, &format!("seed {}: bounded strategy rejected", seed))?;
        // EnergyLU includes the lower bound; also check it explicitly
        let lower = verify_strategy(&a, &sigma2, &Objective::EnergyL).map_err(|e| e.to_string())?;
        check(lower.accepted, &format!("seed {}: lower bound violated", seed))?;
        done += 1;
    }
    check(done >= 50, &format!("only {} winnable instances found", done))
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Criterion>)> = vec![
        ("1 intro example", Box::new(|| criterion_1(dir.path()))),
        ("2 capacity tradeoff curve", Box::new(|| criterion_2(dir.path()))),
        ("3 memory tradeoff curve", Box::new(|| criterion_3(dir.path()))),
        ("4 counter-strategy memory bound", Box::new(criterion_4)),
        ("5 counter-product properties", Box::new(criterion_5)),
        ("6 existential capacity equivalence", Box::new(criterion_6)),
        ("7 countdown cross-checks", Box::new(criterion_7)),
        ("8 mean-payoff oracle equivalence", Box::new(criterion_8)),
        ("9 energy-bounding transform", Box::new(criterion_9)),
    ];
    let mut failures = String::new();
    for (name, f) in &criteria {
        match f() {
            Ok(()) => println!("criterion {}: PASS", name),
            Err(e) => {
                println!("criterion {}: FAIL ({})", name, e);
                writeln!(failures, "criterion {}: {}", name, e).unwrap();
            }
        }
    }
    assert!(failures.is_empty(), "\n{}", failures);
}
