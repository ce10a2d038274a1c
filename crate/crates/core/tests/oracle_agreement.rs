//! The polynomial solvers against brute-force references on random
//! instances, plus monotonicity and soundness checks.

use energygames::arena::fixtures;
use energygames::oracle::{
    exists_cap_by_search, generate_arena, mp_value_by_enumeration, CapSearch, GenParams,
};
use energygames::reductions::{exists_cap_recharge, ExistsCapResult};
use energygames::solvers::{
    attractor, mean_payoff_value, solve_energy_lu, solve_mean_payoff_threshold, solve_recharge,
};
use energygames::strategies::{verify_strategy, Objective};
use energygames::{Player, Rational, WeightedArena};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn mean_payoff_value_matches_enumeration() {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6usize);
        let a = generate_arena(&GenParams::general_default(n, 4), rng.gen());
        let oracle = mp_value_by_enumeration(&a).unwrap();
        for v in 0..a.num_vertices() {
            assert_eq!(mean_payoff_value(&a, v).unwrap(), oracle[v], "seed {} vertex {}", seed, v);
        }
    }
}

#[test]
fn mean_payoff_threshold_agrees_with_value_and_is_monotone() {
    for seed in 0..120u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6usize);
        let a = generate_arena(&GenParams::general_default(n, 4), rng.gen());
        let value = mean_payoff_value(&a, a.initial()).unwrap();
        let below = value - Rational::new(1, 7);
        let above = value + Rational::new(1, 7);
        assert_eq!(solve_mean_payoff_threshold(&a, value).unwrap().winner, Player::P0);
        assert_eq!(solve_mean_payoff_threshold(&a, above).unwrap().winner, Player::P0);
        assert_eq!(solve_mean_payoff_threshold(&a, below).unwrap().winner, Player::P1);
    }
}

#[test]
fn exists_cap_matches_bounded_search() {
    let mut yes = 0usize;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=5usize);
        let a = generate_arena(&GenParams::recharge_default(n, 3), rng.gen());
        // a winning capacity exists iff one at most 3(n-1)W works
        let cap_max = 3 * (a.num_vertices() as u64 - 1) * a.max_abs_weight().max(1) + 1;
        let search = exists_cap_by_search(&a, cap_max).unwrap();
        match exists_cap_recharge(&a).unwrap() {
            ExistsCapResult::No => {
                assert_eq!(search, CapSearch::NoUpTo(cap_max), "seed {}", seed);
            }
            ExistsCapResult::Yes { witness_cap, strategy } => {
                assert!(matches!(search, CapSearch::Yes { .. }), "seed {}", seed);
                assert!(strategy.memory.num_states() <= 3, "seed {}", seed);
                let verdict =
                    verify_strategy(&a, &strategy, &Objective::Recharge { cap: witness_cap })
                        .unwrap();
                assert!(verdict.accepted, "seed {} cap {}", seed, witness_cap);
                yes += 1;
            }
        }
    }
    assert!(yes > 20, "generator produced too few winnable instances: {}", yes);
}

#[test]
fn solver_strategies_verify_on_random_instances() {
    for seed in 0..150u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=5usize);
        let cap = rng.gen_range(0..=6u64);
        let a = generate_arena(&GenParams::recharge_default(n, 3), rng.gen());
        let res = solve_recharge(&a, cap).unwrap();
        if res.winner == Player::P0 {
            let sigma = res.strategy.unwrap();
            let verdict = verify_strategy(&a, &sigma, &Objective::Recharge { cap }).unwrap();
            assert!(verdict.accepted, "recharge seed {} cap {}", seed, cap);
        }
        let b = generate_arena(&GenParams::general_default(n, 3), rng.gen());
        let res = solve_energy_lu(&b, cap).unwrap();
        if res.winner == Player::P0 {
            let sigma = res.strategy.unwrap();
            let verdict = verify_strategy(&b, &sigma, &Objective::EnergyLU { cap }).unwrap();
            assert!(verdict.accepted, "energy-lu seed {} cap {}", seed, cap);
        }
        let res = solve_mean_payoff_threshold(&b, Rational::new(0, 1)).unwrap();
        if res.winner == Player::P0 {
            let sigma = res.strategy.unwrap();
            let verdict =
                verify_strategy(&b, &sigma, &Objective::MeanPayoff { t: Rational::new(0, 1) })
                    .unwrap();
            assert!(verdict.accepted, "mp seed {}", seed);
        }
    }
}

#[test]
fn energy_lu_is_monotone_in_capacity() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=5usize);
        let a = generate_arena(&GenParams::general_default(n, 2), rng.gen());
        let mut won = false;
        for cap in 0..=8u64 {
            let now = solve_energy_lu(&a, cap).unwrap().winner == Player::P0;
            assert!(!won || now, "seed {} cap {}: winning is not monotone", seed, cap);
            won = now;
        }
    }
}

#[test]
fn attractor_is_monotone_and_idempotent() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6usize);
        let a = generate_arena(&GenParams::general_default(n, 1), rng.gen());
        let t1: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        let mut t2 = t1.clone();
        for x in t2.iter_mut() {
            *x = *x || rng.gen_bool(0.2);
        }
        for player in [Player::P0, Player::P1] {
            let a1 = attractor(&a, player, &t1);
            let a2 = attractor(&a, player, &t2);
            for v in 0..n {
                assert!(t1[v] <= a1[v], "attractor contains its target");
                assert!(a1[v] <= a2[v], "attractor is monotone in the target");
            }
            assert_eq!(attractor(&a, player, &a1), a1, "attractor is idempotent");
        }
    }
}

#[test]
fn fixture_values_cross_checked() {
    let a = fixtures::intro();
    let oracle = mp_value_by_enumeration(&a).unwrap();
    assert_eq!(oracle[a.initial()], mean_payoff_value(&a, a.initial()).unwrap());
    let c = WeightedArena::build(
        &[("u", Player::P0)],
        "u",
        &[("u", "u", energygames::WeightLabel::Int(5))],
    )
    .unwrap();
    assert_eq!(mp_value_by_enumeration(&c).unwrap()[0], Rational::new(5, 1));
}

#[test]
fn energy_l_winner_and_strategy() {
    let up = WeightedArena::build(
        &[("u", Player::P0)],
        "u",
        &[("u", "u", energygames::WeightLabel::Int(1))],
    )
    .unwrap();
    let res = energygames::solvers::solve_energy_l(&up).unwrap();
    assert_eq!(res.winner, Player::P0);
    let verdict =
        verify_strategy(&up, &res.strategy.unwrap(), &Objective::EnergyL).unwrap();
    assert!(verdict.accepted);

    let down = WeightedArena::build(
        &[("u", Player::P0)],
        "u",
        &[("u", "u", energygames::WeightLabel::Int(-1))],
    )
    .unwrap();
    assert_eq!(energygames::solvers::solve_energy_l(&down).unwrap().winner, Player::P1);

    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=5usize);
        let a = generate_arena(&GenParams::general_default(n, 3), rng.gen());
        let res = energygames::solvers::solve_energy_l(&a).unwrap();
        if res.winner == Player::P0 {
            let verdict =
                verify_strategy(&a, &res.strategy.unwrap(), &Objective::EnergyL).unwrap();
            assert!(verdict.accepted, "seed {}", seed);
        }
    }
}

/// Strategies synthesized through the level-product reduction stay within
/// cap + 2 reachable memory states and verify.
#[test]
fn avg_recharge_synthesis_is_small_and_sound() {
    use energygames::reductions::solve_avg_recharge;
    let mut wins = 0usize;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=5usize);
        let cap = rng.gen_range(0..=4u64);
        let a = generate_arena(&GenParams::recharge_default(n, 3), rng.gen());
        let q = rng.gen_range(1..=3i128);
        let p = rng.gen_range(0..=(cap as i128) * q);
        let t = Rational::new(p, q);
        let res = solve_avg_recharge(&a, cap, t).unwrap();
        if res.winner == Player::P0 {
            let sigma = res.strategy.unwrap();
            assert!(
                sigma.memory.num_states() <= cap as usize + 2,
                "seed {}: {} states for cap {}",
                seed,
                sigma.memory.num_states(),
                cap
            );
            let verdict =
                verify_strategy(&a, &sigma, &Objective::AvgRecharge { cap, t }).unwrap();
            assert!(verdict.accepted, "seed {} cap {} t {}", seed, cap, t);
            wins += 1;
        }
    }
    assert!(wins > 10, "too few winnable instances: {}", wins);
}
