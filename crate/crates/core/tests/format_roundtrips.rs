//! Text formats must round-trip exactly: parse(serialize(x)) == x.

use energygames::arena::{parse_arena, serialize_arena};
use energygames::evaluation::{parse_lasso, serialize_lasso, Lasso};
use energygames::oracle::{generate_arena, GenParams};
use energygames::strategies::{enumerate_strategies, parse_strategy, serialize_strategy};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn arena_roundtrip_general(seed in 0u64..10_000, n in 1usize..8, w in 0u64..20) {
        let a = generate_arena(&GenParams::general_default(n, w), seed);
        let text = serialize_arena(&a);
        prop_assert_eq!(parse_arena(&text).unwrap(), a);
    }

    #[test]
    fn arena_roundtrip_recharge(seed in 0u64..10_000, n in 1usize..8, w in 0u64..20) {
        let a = generate_arena(&GenParams::recharge_default(n, w), seed);
        let text = serialize_arena(&a);
        prop_assert_eq!(parse_arena(&text).unwrap(), a);
    }

    #[test]
    fn lasso_roundtrip(seed in 0u64..10_000, n in 1usize..6) {
        let a = generate_arena(&GenParams::general_default(n, 3), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1ab1e);
        // random walk until a vertex repeats
        let mut walk = vec![a.initial()];
        let l = loop {
            let v = *walk.last().unwrap();
            let outs = a.out_edges(v);
            let next = a.edge(outs[rng.gen_range(0..outs.len())]).dst;
            if let Some(i) = walk.iter().position(|&u| u == next) {
                break Lasso::new(walk[..i].to_vec(), walk[i..].to_vec());
            }
            walk.push(next);
        };
        prop_assert!(l.validate(&a).is_ok());
        let text = serialize_lasso(&a, &l);
        prop_assert_eq!(parse_lasso(&a, &text).unwrap(), l);
    }
}

#[test]
fn strategy_roundtrip_over_enumeration() {
    let a = energygames::arena::fixtures::memlb();
    for sigma in enumerate_strategies(&a, 2).unwrap() {
        let text = serialize_strategy(&a, &sigma);
        assert_eq!(parse_strategy(&a, &text).unwrap(), sigma);
    }
}
