//! Weighted two-player graph games.
//!
//! Models finite weighted arenas and decides energy, average-energy,
//! recharge, average-bounded recharge, mean-payoff, three-color parity and
//! countdown objectives, together with the reductions between them and
//! finite-state strategy synthesis and verification. All long-run values
//! are exact rationals; no floating point anywhere.
//!
//! The crate is `no_std` (with `alloc`); IO, file handling and the CLI live
//! in the companion `energygames-cli` crate.

#![no_std]

extern crate alloc;

pub mod arena;
pub mod evaluation;
pub mod solvers;
pub mod reductions;
pub mod strategies;
pub mod oracle;
pub mod tradeoff;

mod cyclemean;

pub use arena::{
    FiniteStateStrategy, MemoryStructure, Player, WeightLabel, WeightedArena,
};
pub use evaluation::{Lasso, ObjectiveValue, Rational, ViolationReason};
pub use solvers::{Coloring, SolveResult};
pub use strategies::{Objective, ObjectiveFamily, Verdict};
