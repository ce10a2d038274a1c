//! Properties of the recharge-counter reduction to mean-payoff games,
//! checked on random recharge arenas: the tracked memory state equals the
//! recharge energy level until the first violation, the overflow state is
//! absorbing, and a lasso meets the average threshold exactly when its
//! extension through the product meets the mean-payoff threshold.

use energygames::evaluation::{
    avg_energy_of_lasso, mean_payoff_of_lasso, rat, AvgEnergyMode, Lasso, ObjectiveValue,
};
use energygames::oracle::{generate_arena, GenParams};
use energygames::reductions::{extend_lasso, reduce_avg_recharge, EnergyMemory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(seed: u64) -> (energygames::WeightedArena, u64, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=5usize);
    let w = rng.gen_range(0..=3u64);
    let a = generate_arena(&GenParams::recharge_default(n, w), rng.gen());
    let cap = rng.gen_range(0..=4u64);
    (a, cap, rng)
}

fn random_lasso(a: &energygames::WeightedArena, rng: &mut ChaCha8Rng) -> Lasso {
    let mut walk = vec![a.initial()];
    loop {
        let v = *walk.last().unwrap();
        let outs = a.out_edges(v);
        let next = a.edge(outs[rng.gen_range(0..outs.len())]).dst;
        if let Some(i) = walk.iter().position(|&u| u == next) {
            return Lasso::new(walk[..i].to_vec(), walk[i..].to_vec());
        }
        walk.push(next);
    }
}

/// The memory state tracks EL_cap exactly while the play is alive, and
/// the overflow state is absorbing afterwards.
#[test]
fn counter_state_tracks_energy_level_until_absorption() {
    let mut checked = 0usize;
    for seed in 0..2_500u64 {
        let (a, cap, mut rng) = random_instance(seed);
        let mem = EnergyMemory::recharge(&a, cap).unwrap();
        let bot = mem.bot_state();
        let mut state = cap as usize;
        let mut level = cap as i128;
        let mut dead = false;
        let mut v = a.initial();
        for _ in 0..40 {
            let outs = a.out_edges(v);
            let e = outs[rng.gen_range(0..outs.len())];
            state = mem.memory.update(state, e);
            level = match a.edge(e).label {
                energygames::WeightLabel::Recharge => cap as i128,
                energygames::WeightLabel::Int(x) => level + x as i128,
            };
            v = a.edge(e).dst;
            if level < 0 {
                dead = true;
            }
            if dead {
                assert_eq!(state, bot, "seed {}", seed);
            } else {
                assert_eq!(state as i128, level, "seed {}", seed);
            }
            checked += 1;
        }
    }
    assert!(checked >= 10_000);
}

/// A lasso satisfies the capped average objective iff its extension into
/// the product satisfies the integerized mean-payoff threshold.
#[test]
fn lasso_objective_transfers_through_reduction() {
    let mut checked = 0usize;
    for seed in 0..10_000u64 {
        let (a, cap, mut rng) = random_instance(seed);
        let q = rng.gen_range(1..=4i128);
        let p = rng.gen_range(-2 * q..=(cap as i128 + 1) * q);
        let t = rat(p, q);
        let out = reduce_avg_recharge(&a, cap, t).unwrap();
        let lasso = random_lasso(&a, &mut rng);
        let value = avg_energy_of_lasso(&a, &lasso, AvgEnergyMode::RechargeWith(cap)).unwrap();
        let in_avg = matches!(value, ObjectiveValue::Finite(m) if m <= t);
        let ext = extend_lasso(&out, &a, &lasso).expect("every play extends");
        let mp = mean_payoff_of_lasso(&out.arena, &ext).unwrap();
        let in_mp = mp <= out.mp_threshold.unwrap();
        assert_eq!(in_avg, in_mp, "seed {} t {} value {:?} mp {}", seed, t, value, mp);
        checked += 1;
    }
    assert_eq!(checked, 10_000);
}
