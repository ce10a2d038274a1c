//! Capacity/memory tradeoff sweeps: the optimal long-run average as a
//! function of the battery capacity, and as a function of the number of
//! controller memory states at a fixed capacity.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::arena::{product, Player, WeightLabel, WeightedArena};
use crate::evaluation::{rat, ObjectiveValue, ViolationReason};
use crate::reductions::EnergyMemory;
use crate::solvers::{mean_payoff_value, SolveError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TradeoffError {
    #[error(transparent)]
    Arena(#[from] crate::arena::ArenaError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("vertex {0} is a branching opponent vertex; memory sweeps need a solitaire arena")]
    NotSolitaire(String),
    #[error("memory sweep explored {steps} partial machines, limit is {limit}")]
    SearchSpaceExceeded { steps: u64, limit: u64 },
}

/// Optimal average recharge level for every capacity in the range. The
/// value of a capacity is the mean-payoff value of the recharge-counter
/// product with level weights; the absorbing overflow state weighs
/// `cap + 1`, strictly above any level, so an unavoidable violation shows
/// up as a value above `cap` and is reported as `PlusInfinity`.
pub fn sweep_capacity(
    a: &WeightedArena,
    cap_from: u64,
    cap_to: u64,
) -> Result<Vec<(u64, ObjectiveValue)>, TradeoffError> {
    a.check_recharge_mode()?;
    let mut out = Vec::new();
    for cap in cap_from..=cap_to {
        let mem = EnergyMemory::recharge(a, cap)?;
        let bot = mem.bot_state();
        let over: i64 = (cap + 1).try_into().expect("capacity fits i64");
        let prod = product(a, &mem.memory, |_, s| {
            WeightLabel::Int(if s == bot { over } else { s as i64 })
        });
        let v = mean_payoff_value(&prod.arena, prod.arena.initial())?;
        let value = if v > rat(cap as i128, 1) {
            // only the absorbing cycle weighs more than cap
            debug_assert_eq!(v, rat(over as i128, 1));
            ObjectiveValue::PlusInfinity
        } else {
            ObjectiveValue::Finite(v)
        };
        out.push((cap, value));
    }
    Ok(out)
}

pub const DEFAULT_SWEEP_LIMIT: u64 = 10_000_000;

/// Best average recharge level achievable with at most `n` memory states,
/// for every `n` in the range, on a solitaire arena (every opponent vertex
/// has a single move). Enumerates partial controllers lazily along their
/// unique play: moves and memory updates are branched over only when the
/// play first needs them, with fresh states introduced in first-use order.
pub fn sweep_memory(
    a: &WeightedArena,
    cap: u64,
    n_from: usize,
    n_to: usize,
) -> Result<Vec<(usize, ObjectiveValue)>, TradeoffError> {
    sweep_memory_with_limit(a, cap, n_from, n_to, DEFAULT_SWEEP_LIMIT)
}

pub fn sweep_memory_with_limit(
    a: &WeightedArena,
    cap: u64,
    n_from: usize,
    n_to: usize,
    limit: u64,
) -> Result<Vec<(usize, ObjectiveValue)>, TradeoffError> {
    assert!(n_from >= 1 && n_from <= n_to);
    a.check_recharge_mode()?;
    for v in 0..a.num_vertices() {
        if a.owner(v) == Player::P1 && a.out_edges(v).len() > 1 {
            return Err(TradeoffError::NotSolitaire(a.vertex_name(v).into()));
        }
    }
    let mut out = Vec::new();
    for n in n_from..=n_to {
        let mut walk = Walk {
            a,
            cap: cap as i128,
            k: n,
            moves: vec![usize::MAX; a.num_vertices() * n],
            upd: vec![usize::MAX; a.num_edges() * n],
            used: 1,
            trajectory: Vec::new(),
            best: None,
            steps: 0,
            limit,
        };
        walk.step(a.initial(), 0, cap as i128);
        if walk.steps > walk.limit {
            return Err(TradeoffError::SearchSpaceExceeded { steps: walk.steps, limit });
        }
        out.push((n, walk.best.expect("every machine closes a lasso")));
    }
    Ok(out)
}

struct Walk<'a> {
    a: &'a WeightedArena,
    cap: i128,
    k: usize,
    /// `moves[v * k + s]`: chosen out-edge, `usize::MAX` when undefined.
    moves: Vec<usize>,
    /// `upd[e * k + s]`: next memory state, `usize::MAX` when undefined.
    upd: Vec<usize>,
    used: usize,
    /// Configurations `(vertex, state, level)` along the current play.
    trajectory: Vec<(usize, usize, i128)>,
    best: Option<ObjectiveValue>,
    steps: u64,
    limit: u64,
}

impl Walk<'_> {
    fn offer(&mut self, value: ObjectiveValue) {
        if self.best.map_or(true, |b| value < b) {
            self.best = Some(value);
        }
    }

    /// The play revisited configuration `(v, s)` at trajectory position
    /// `i`; the suffix from there is the periodic part. The level at the
    /// revisit may be below the level at `i`, so replay periods until the
    /// entry level stabilizes or the counter runs out.
    fn close(&mut self, i: usize, mut lvl: i128) {
        let period: Vec<(usize, usize, i128)> = self.trajectory[i..].to_vec();
        let mut pos = self.trajectory.len();
        loop {
            let entry = lvl;
            let mut sum = 0i128;
            for w in 0..period.len() {
                let (v, s, _) = period[w];
                let e = self.a.edge(self.edge_at(v, s));
                lvl = match e.label {
                    WeightLabel::Recharge => self.cap,
                    WeightLabel::Int(x) => lvl + x as i128,
                };
                pos += 1;
                if lvl < 0 {
                    self.offer(ObjectiveValue::Violated {
                        reason: ViolationReason::NegativeRecharge,
                        at: pos,
                    });
                    return;
                }
                sum += lvl;
            }
            if lvl == entry {
                self.offer(ObjectiveValue::Finite(rat(sum, period.len() as i128)));
                return;
            }
            // without a reset the entry level strictly drops towards a
            // violation; with one it stabilizes after a single replay
        }
    }

    fn edge_at(&self, v: usize, s: usize) -> usize {
        if self.a.owner(v) == Player::P1 {
            self.a.out_edges(v)[0]
        } else {
            self.moves[v * self.k + s]
        }
    }

    fn step(&mut self, v: usize, s: usize, lvl: i128) {
        self.steps += 1;
        if self.steps > self.limit {
            return;
        }
        if let Some(i) = self.trajectory.iter().position(|&(tv, ts, _)| (tv, ts) == (v, s)) {
            self.close(i, lvl);
            return;
        }
        self.trajectory.push((v, s, lvl));
        let candidates: Vec<(usize, bool)> = if self.a.owner(v) == Player::P1 {
            vec![(self.a.out_edges(v)[0], false)]
        } else if self.moves[v * self.k + s] != usize::MAX {
            vec![(self.moves[v * self.k + s], false)]
        } else {
            self.a.out_edges(v).iter().map(|&e| (e, true)).collect()
        };
        for (e, fresh_move) in candidates {
            if fresh_move {
                self.moves[v * self.k + s] = e;
            }
            let edge = self.a.edge(e);
            let lvl2 = match edge.label {
                WeightLabel::Recharge => self.cap,
                WeightLabel::Int(x) => lvl + x as i128,
            };
            if lvl2 < 0 {
                // the play violates no matter how the machine continues
                self.offer(ObjectiveValue::Violated {
                    reason: ViolationReason::NegativeRecharge,
                    at: self.trajectory.len(),
                });
            } else if self.upd[e * self.k + s] != usize::MAX {
                self.step(edge.dst, self.upd[e * self.k + s], lvl2);
            } else {
                let ceiling = if self.used < self.k { self.used + 1 } else { self.used };
                for s2 in 0..ceiling {
                    self.upd[e * self.k + s] = s2;
                    let grew = s2 == self.used;
                    if grew {
                        self.used += 1;
                    }
                    self.step(edge.dst, s2, lvl2);
                    if grew {
                        self.used -= 1;
                    }
                    self.upd[e * self.k + s] = usize::MAX;
                }
            }
            if fresh_move {
                self.moves[v * self.k + s] = usize::MAX;
            }
        }
        self.trajectory.pop();
    }
}
