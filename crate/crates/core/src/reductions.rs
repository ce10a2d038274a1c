//! Objective-to-objective reductions: average-bounded recharge and bounded
//! average-energy to mean-payoff, existential-capacity recharge to
//! three-color parity (with strategy pullback), countdown to
//! average-bounded recharge, and the energy-bounding strategy transform.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::arena::{
    product, serialize_arena, ArenaError, FiniteStateStrategy, MemoryStructure, Player,
    WeightLabel, WeightedArena,
};
use crate::evaluation::{rat, Lasso, Rational};
use crate::solvers::{
    solve_energy_lu, solve_mean_payoff_threshold, solve_parity3, validate_countdown, Coloring,
    SolveError, SolveResult,
};
use crate::strategies::{
    canonicalize_strategy, strategy_product, verify_strategy, Objective, StrategyError,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("strategy does not win the required objective")]
    NotWinning { witness: Lasso },
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

/// Energy-counter memory: states are the levels `0..=cap` plus an
/// absorbing overflow/underflow state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyMemory {
    pub memory: MemoryStructure,
    cap: u64,
}

impl EnergyMemory {
    /// Recharge counter: starts at `cap`, R-edges reset to `cap`, dropping
    /// below zero is absorbing. Weights must be non-positive.
    pub fn recharge(a: &WeightedArena, cap: u64) -> Result<EnergyMemory, ArenaError> {
        a.check_recharge_mode()?;
        Ok(Self::build(a, cap, cap, true))
    }

    /// Bounded energy counter: starts at 0, leaving `[0, cap]` in either
    /// direction is absorbing. No R-edges allowed.
    pub fn bounded_lu(a: &WeightedArena, cap: u64) -> Result<EnergyMemory, ArenaError> {
        a.check_no_recharge()?;
        Ok(Self::build(a, cap, 0, false))
    }

    fn build(a: &WeightedArena, cap: u64, init: u64, reset: bool) -> EnergyMemory {
        let m = a.num_edges();
        let k = cap as usize + 2;
        let bot = k - 1;
        let mut update = vec![bot; k * m];
        for c in 0..=cap as i128 {
            for (ei, e) in a.edges().iter().enumerate() {
                let next = match e.label {
                    WeightLabel::Recharge => {
                        debug_assert!(reset, "R-edge in bounded mode");
                        cap as i128
                    }
                    WeightLabel::Int(w) => c + w as i128,
                };
                update[c as usize * m + ei] =
                    if (0..=cap as i128).contains(&next) { next as usize } else { bot };
            }
        }
        EnergyMemory { memory: MemoryStructure::new(k, init as usize, m, update), cap }
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn bot_state(&self) -> usize {
        self.cap as usize + 1
    }

    /// Level tracked by a state; `None` for the absorbing state.
    pub fn level_of_state(&self, s: usize) -> Option<u64> {
        if s <= self.cap as usize {
            Some(s as u64)
        } else {
            None
        }
    }
}

/// A product arena carrying the target objective of a reduction and the
/// origin of each product vertex.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub arena: WeightedArena,
    /// product vertex -> (original vertex, memory state)
    pub back_map: Vec<(usize, usize)>,
    pub objective_note: String,
    /// Mean-payoff threshold of the target game, when the target is MP.
    pub mp_threshold: Option<Rational>,
}

impl ReductionOutput {
    /// Arena text plus a backmap section; `parse_arena` accepts the whole
    /// file and ignores the annotations.
    pub fn serialize(&self, original: &WeightedArena) -> String {
        let mut out = format!("# objective: {}\n", self.objective_note);
        out.push_str(&serialize_arena(&self.arena));
        for (pi, &(v, s)) in self.back_map.iter().enumerate() {
            out.push_str(&format!(
                "map {} {} {}\n",
                self.arena.vertex_name(pi),
                original.vertex_name(v),
                s
            ));
        }
        out
    }
}

/// Integerized mean-payoff view of a threshold `t = p/q`: level weights
/// scale by `q`, the absorbing state weighs `p + 1`, the MP threshold
/// becomes `p`.
fn level_product(
    a: &WeightedArena,
    mem: &EnergyMemory,
    t: Rational,
    note: String,
) -> ReductionOutput {
    let p = *t.numer();
    let q = *t.denom();
    let bot = mem.bot_state();
    let to_i64 = |x: i128| -> i64 { x.try_into().expect("scaled weight fits i64") };
    let prod = product(a, &mem.memory, |_, s| {
        if s == bot {
            WeightLabel::Int(to_i64(p + 1))
        } else {
            WeightLabel::Int(to_i64(q * s as i128))
        }
    });
    ReductionOutput {
        arena: prod.arena,
        back_map: prod.back_map,
        objective_note: note,
        mp_threshold: Some(rat(p, 1)),
    }
}

/// Average-bounded recharge to mean-payoff: Player 0 wins
/// `MP(threshold)` on the output iff she wins `AvgRecharge(cap, t)` on the
/// input.
pub fn reduce_avg_recharge(
    a: &WeightedArena,
    cap: u64,
    t: Rational,
) -> Result<ReductionOutput, ReduceError> {
    let mem = EnergyMemory::recharge(a, cap)?;
    let note = format!("mean-payoff threshold {} (from avg-recharge cap={} t={})", t.numer(), cap, t);
    Ok(level_product(a, &mem, t, note))
}

/// Bounded average-energy to mean-payoff: same construction with the
/// energy counter started at 0 and overflow also absorbing.
pub fn reduce_avg_energy_lu(
    a: &WeightedArena,
    cap: u64,
    t: Rational,
) -> Result<ReductionOutput, ReduceError> {
    let mem = EnergyMemory::bounded_lu(a, cap)?;
    let note =
        format!("mean-payoff threshold {} (from avg-energy-lu cap={} t={})", t.numer(), cap, t);
    Ok(level_product(a, &mem, t, note))
}

/// Solves the integerized mean-payoff game on a level product and pulls
/// the winner's positional strategy back through the counter memory; the
/// canonical result has at most `cap + 2` reachable states.
fn solve_on_level_product(
    a: &WeightedArena,
    mem: &EnergyMemory,
    out: &ReductionOutput,
) -> Result<SolveResult, ReduceError> {
    let t = out.mp_threshold.expect("level products carry a threshold");
    let res = solve_mean_payoff_threshold(&out.arena, t)?;
    let prod_strat = res.strategy.expect("mean-payoff solver returns a strategy");
    let k = mem.memory.num_states();
    let mut moves = vec![None; a.num_vertices() * k];
    for v in 0..a.num_vertices() {
        if a.owner(v) != res.winner {
            continue;
        }
        for s in 0..k {
            let pick = out
                .back_map
                .iter()
                .position(|&p| p == (v, s))
                .and_then(|pi| prod_strat.next_move(pi, 0))
                .map(|pdst| out.back_map[pdst].0);
            moves[v * k + s] = Some(pick.unwrap_or_else(|| a.successors(v).next().unwrap()));
        }
    }
    let sigma = canonicalize_strategy(
        a,
        &FiniteStateStrategy::new(a, res.winner, mem.memory.clone(), moves),
    );
    Ok(SolveResult { winner: res.winner, strategy: Some(sigma), certificate: res.certificate })
}

/// Winner and pulled-back strategy for the average-bounded recharge
/// objective, via the mean-payoff reduction.
pub fn solve_avg_recharge(
    a: &WeightedArena,
    cap: u64,
    t: Rational,
) -> Result<SolveResult, ReduceError> {
    let mem = EnergyMemory::recharge(a, cap)?;
    let out = reduce_avg_recharge(a, cap, t)?;
    solve_on_level_product(a, &mem, &out)
}

/// Winner and pulled-back strategy for the bounded average-energy
/// objective, via the mean-payoff reduction.
pub fn solve_avg_energy_lu(
    a: &WeightedArena,
    cap: u64,
    t: Rational,
) -> Result<SolveResult, ReduceError> {
    let mem = EnergyMemory::bounded_lu(a, cap)?;
    let out = reduce_avg_energy_lu(a, cap, t)?;
    solve_on_level_product(a, &mem, &out)
}

/// Kind of the last edge taken: 0 for zero-weight, 1 for negative, 2 for
/// recharge. The memory behind the vertex-tripling construction.
pub fn edge_kind_memory(a: &WeightedArena) -> MemoryStructure {
    let m = a.num_edges();
    let mut update = vec![0usize; 3 * m];
    for s in 0..3 {
        for (ei, e) in a.edges().iter().enumerate() {
            update[s * m + ei] = match e.label {
                WeightLabel::Recharge => 2,
                WeightLabel::Int(w) if w < 0 => 1,
                WeightLabel::Int(_) => 0,
            };
        }
    }
    MemoryStructure::new(3, 0, m, update)
}

/// Existential-capacity recharge to three-color max-parity: vertices are
/// split by the kind of their incoming edge, colored 2 for recharge, 1 for
/// decrement, 0 for zero; the initial vertex is its zero copy. Player 0
/// wins the parity game iff some capacity makes her win the recharge game.
pub fn reduce_exists_cap_to_parity(
    a: &WeightedArena,
) -> Result<(WeightedArena, Coloring, Vec<(usize, usize)>), ReduceError> {
    a.check_recharge_mode().map_err(ReduceError::Arena)?;
    let mem = edge_kind_memory(a);
    let labels: Vec<WeightLabel> = a.edges().iter().map(|e| e.label).collect();
    let prod = product(a, &mem, |e, _| labels[e]);
    let colors: Vec<u8> = prod.back_map.iter().map(|&(_, s)| s as u8).collect();
    let coloring = Coloring::new(colors)?;
    Ok((prod.arena, coloring, prod.back_map))
}

#[derive(Debug, Clone)]
pub enum ExistsCapResult {
    No,
    Yes { witness_cap: u64, strategy: FiniteStateStrategy },
}

/// Decides whether any capacity lets Player 0 win the recharge game. On
/// yes, returns a verified witness capacity and the parity strategy pulled
/// back through the tripling (at most 3 memory states).
pub fn exists_cap_recharge(a: &WeightedArena) -> Result<ExistsCapResult, ReduceError> {
    let (tripled, coloring, back_map) = reduce_exists_cap_to_parity(a)?;
    let res = solve_parity3(&tripled, &coloring)?;
    if res.winner == Player::P1 {
        return Ok(ExistsCapResult::No);
    }
    let parity_strat = res.strategy.expect("parity solver returns a strategy");
    // pullback: kind-tracking memory over the original arena, moves read
    // off the positional parity strategy on the matching copy
    let mem = edge_kind_memory(a);
    let k = 3;
    let mut moves = vec![None; a.num_vertices() * k];
    for v in 0..a.num_vertices() {
        if a.owner(v) != Player::P0 {
            continue;
        }
        for s in 0..k {
            let pick = back_map
                .iter()
                .position(|&p| p == (v, s))
                .and_then(|pi| parity_strat.next_move(pi, 0))
                .map(|pdst| back_map[pdst].0);
            moves[v * k + s] = Some(pick.unwrap_or_else(|| a.successors(v).next().unwrap()));
        }
    }
    let sigma = canonicalize_strategy(a, &FiniteStateStrategy::new(a, Player::P0, mem, moves));

    let w = a.max_abs_weight();
    let decrements = back_map.iter().filter(|&&(_, s)| s == 1).count() as u64;
    let finer = decrements * w;
    let fallback = (tripled.num_vertices() as u64 - 1) * w;
    for cap in [finer, fallback.max(finer)] {
        let verdict = verify_strategy(a, &sigma, &Objective::Recharge { cap })?;
        if verdict.accepted {
            return Ok(ExistsCapResult::Yes { witness_cap: cap, strategy: sigma });
        }
    }
    Err(ReduceError::Inconsistency(
        "parity winner's pullback fails both witness capacities".to_string(),
    ))
}

#[derive(Debug, Clone)]
pub enum CapSearchResult {
    NoUpTo(u64),
    Yes { min_cap: u64, strategy: FiniteStateStrategy },
}

/// Default search ceiling for the bounded existential-capacity search.
pub fn default_cap_max(a: &WeightedArena) -> u64 {
    (a.num_vertices() as u64) * a.max_abs_weight().max(1) * 256
}

/// Smallest capacity up to `cap_max` for which Player 0 wins the bounded
/// energy objective. Sound but complete only up to the ceiling; winning is
/// monotone in the capacity, so binary search finds the minimum.
pub fn exists_cap_energy_lu(
    a: &WeightedArena,
    cap_max: u64,
) -> Result<CapSearchResult, ReduceError> {
    a.check_no_recharge().map_err(ReduceError::Arena)?;
    let wins = |cap: u64| -> Result<bool, ReduceError> {
        Ok(solve_energy_lu(a, cap)?.winner == Player::P0)
    };
    if !wins(cap_max)? {
        return Ok(CapSearchResult::NoUpTo(cap_max));
    }
    let (mut lo, mut hi) = (0u64, cap_max); // hi always winning
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if wins(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let strategy = solve_energy_lu(a, hi)?.strategy.expect("winner strategy");
    Ok(CapSearchResult::Yes { min_cap: hi, strategy })
}

#[derive(Debug, Clone)]
pub enum ThresholdSearchResult {
    NoUpTo(u64),
    Yes { threshold_witness: u64, min_cap: u64, strategy: FiniteStateStrategy },
}

/// Existential-threshold average-energy, decided through the equivalence
/// with existential-capacity bounded energy: a play whose energy stays
/// within `[0, cap]` has average at most `cap`.
pub fn exists_threshold_avg_energy_l(
    a: &WeightedArena,
    cap_max: u64,
) -> Result<ThresholdSearchResult, ReduceError> {
    Ok(match exists_cap_energy_lu(a, cap_max)? {
        CapSearchResult::NoUpTo(c) => ThresholdSearchResult::NoUpTo(c),
        CapSearchResult::Yes { min_cap, strategy } => {
            ThresholdSearchResult::Yes { threshold_witness: min_cap, min_cap, strategy }
        }
    })
}

fn fresh_name(taken: impl Fn(&str) -> bool, base: &str) -> String {
    let mut name = base.to_string();
    while taken(&name) {
        name.push('_');
    }
    name
}

/// Countdown to average-bounded recharge: a fresh Player 1 initial vertex
/// with a single R-edge to the old initial; Player 0 wins
/// `AvgRecharge(budget, 0)` on the output iff she wins the countdown game.
pub fn reduce_countdown_to_avg_recharge(
    a: &WeightedArena,
    budget: u64,
) -> Result<ReductionOutput, ReduceError> {
    validate_countdown(a)?;
    let fresh = fresh_name(|n| a.vertex_index(n).is_some(), "vI");
    let mut vertices: Vec<(&str, Player)> =
        (0..a.num_vertices()).map(|v| (a.vertex_name(v), a.owner(v))).collect();
    vertices.push((fresh.as_str(), Player::P1));
    let mut edges: Vec<(&str, &str, WeightLabel)> = a
        .edges()
        .iter()
        .map(|e| (a.vertex_name(e.src), a.vertex_name(e.dst), e.label))
        .collect();
    edges.push((fresh.as_str(), a.vertex_name(a.initial()), WeightLabel::Recharge));
    let arena = WeightedArena::build(&vertices, &fresh, &edges)?;
    let mut back_map: Vec<(usize, usize)> = (0..a.num_vertices()).map(|v| (v, 0)).collect();
    back_map.push((a.initial(), 0)); // fresh initial stands in for the old one
    Ok(ReductionOutput {
        arena,
        back_map,
        objective_note: format!("avg-recharge cap={} t=0 (from countdown budget {})", budget, budget),
        mp_threshold: None,
    })
}

/// Prepends the charge-then-commit gadget to a countdown arena: a Player 0
/// vertex with a -1 self-loop feeding a Player 1 vertex that may drain
/// `budget` into an absorbing sink or enter the countdown arena. Used to
/// generate existential-capacity instances: some capacity wins
/// `AvgRecharge(cap, 0)` on the output iff Player 0 wins the countdown.
pub fn build_fig4_gadget(a: &WeightedArena, budget: u64) -> Result<WeightedArena, ReduceError> {
    validate_countdown(a)?;
    let drain: i64 = budget.try_into().map_err(|_| ReduceError::Arena(ArenaError::WeightTooLarge))?;
    let taken = |n: &str| a.vertex_index(n).is_some();
    let g_charge = fresh_name(taken, "charge");
    let g_commit = fresh_name(taken, "commit");
    let g_drain = fresh_name(taken, "drain");
    let mut vertices: Vec<(&str, Player)> = vec![
        (g_charge.as_str(), Player::P0),
        (g_commit.as_str(), Player::P1),
        (g_drain.as_str(), Player::P1),
    ];
    vertices.extend((0..a.num_vertices()).map(|v| (a.vertex_name(v), a.owner(v))));
    let mut edges: Vec<(&str, &str, WeightLabel)> = vec![
        (g_charge.as_str(), g_charge.as_str(), WeightLabel::Int(-1)),
        (g_charge.as_str(), g_commit.as_str(), WeightLabel::Int(0)),
        (g_commit.as_str(), g_drain.as_str(), WeightLabel::Int(-drain)),
        (g_drain.as_str(), g_drain.as_str(), WeightLabel::Int(0)),
        (g_commit.as_str(), a.vertex_name(a.initial()), WeightLabel::Int(0)),
    ];
    edges.extend(
        a.edges().iter().map(|e| (a.vertex_name(e.src), a.vertex_name(e.dst), e.label)),
    );
    Ok(WeightedArena::build(&vertices, &g_charge, &edges)?)
}

/// Threads a lasso of the original arena through a reduction's product,
/// unrolling the cycle until the memory state re-synchronizes. Returns the
/// corresponding lasso of the product arena.
pub fn extend_lasso(
    out: &ReductionOutput,
    a: &WeightedArena,
    l: &Lasso,
) -> Option<Lasso> {
    l.validate(a).ok()?;
    let find = |v: usize, s: usize| out.back_map.iter().position(|&p| p == (v, s));
    let mut state_of = BTreeMap::new(); // product vertex index by play position key
    let mut seq: Vec<usize> = Vec::new();
    let mut pos = 0usize;
    let p = l.prefix.len();
    let c = l.cycle.len();
    let mut cur = find(l.vertex_at(0), initial_state_of(out))?;
    loop {
        if pos >= p {
            let key = ((pos - p) % c, cur);
            if let Some(&start) = state_of.get(&key) {
                let prefix = seq[..start].to_vec();
                let cycle = seq[start..].to_vec();
                let ext = Lasso::new(prefix, cycle);
                debug_assert!(ext.validate(&out.arena).is_ok());
                return Some(ext);
            }
            state_of.insert(key, seq.len());
        }
        seq.push(cur);
        // step: the product edge matching this play step
        let v2 = l.vertex_at(pos + 1);
        let next = out
            .arena
            .successors(cur)
            .find(|&u| out.back_map[u].0 == v2)?;
        cur = next;
        pos += 1;
    }
}

fn initial_state_of(out: &ReductionOutput) -> usize {
    out.back_map[out.arena.initial()].1
}

/// Rewrites a finite-state strategy that wins the lower-bounded
/// average-energy objective for threshold `t` into one that also respects
/// an upper energy bound, returning that verified bound.
///
/// Above the threshold the strategy's reachable configuration graph is
/// acyclic, so each configuration has a well-defined peak; every upward
/// threshold crossing re-routes to a minimal-peak representative of the
/// same vertex and entry level.
pub fn boundify_strategy(
    a: &WeightedArena,
    sigma: &FiniteStateStrategy,
    t: i64,
) -> Result<(FiniteStateStrategy, u64), ReduceError> {
    let verdict = verify_strategy(a, sigma, &Objective::AvgEnergyL { t: rat(t as i128, 1) })?;
    if !verdict.accepted {
        return Err(ReduceError::NotWinning {
            witness: verdict.witness.expect("rejection carries a witness"),
        });
    }
    let sp = strategy_product(a, sigma);
    let t = t as i128;
    let w_max = a.max_abs_weight() as i128;

    // reachable (node, level) configurations under sigma
    let mut cfgs: Vec<(usize, i128)> = vec![(0, 0)];
    let mut index: BTreeMap<(usize, i128), usize> = BTreeMap::from([((0, 0), 0)]);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
    let mut qi = 0;
    while qi < cfgs.len() {
        let (node, lvl) = cfgs[qi];
        for &(tn, e) in &sp.succ[node] {
            let w = a.edge(e).label.as_int().expect("integer weights") as i128;
            let key = (tn, lvl + w);
            let ti = *index.entry(key).or_insert_with(|| {
                cfgs.push(key);
                succ.push(Vec::new());
                cfgs.len() - 1
            });
            succ[qi].push(ti);
        }
        qi += 1;
    }

    // peak over the above-threshold subgraph (acyclic since sigma wins)
    let n = cfgs.len();
    let mut peak: Vec<Option<i128>> = vec![None; n];
    for start in 0..n {
        if cfgs[start].1 <= t || peak[start].is_some() {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        while let Some(&mut (c, ref mut i)) = stack.last_mut() {
            let above: Vec<usize> =
                succ[c].iter().copied().filter(|&s| cfgs[s].1 > t).collect();
            if *i < above.len() {
                let s = above[*i];
                *i += 1;
                if peak[s].is_none() {
                    stack.push((s, 0));
                }
            } else {
                let best = above.iter().filter_map(|&s| peak[s]).max();
                peak[c] = Some(best.map_or(cfgs[c].1, |b| b.max(cfgs[c].1)));
                stack.pop();
            }
        }
    }

    // minimal-peak representative per (vertex, entry level in (t, t+W])
    let mut rep: BTreeMap<(usize, i128), usize> = BTreeMap::new();
    for (ci, &(node, lvl)) in cfgs.iter().enumerate() {
        if lvl > t && lvl <= t + w_max {
            let key = (sp.nodes[node].0, lvl);
            let better = match rep.get(&key) {
                None => true,
                Some(&old) => peak[ci] < peak[old],
            };
            if better {
                rep.insert(key, ci);
            }
        }
    }

    // configurations reachable under the re-routing dynamics
    let step = |node: usize, lvl: i128, e: usize| -> (usize, i128) {
        let (tn, _) = *sp.succ[node].iter().find(|&&(_, ee)| ee == e).expect("sp edge");
        let w = a.edge(e).label.as_int().unwrap() as i128;
        let lvl2 = lvl + w;
        if lvl <= t && lvl2 > t {
            let rc = rep[&(sp.nodes[tn].0, lvl2)];
            (cfgs[rc].0, lvl2)
        } else {
            (tn, lvl2)
        }
    };
    let mut states: Vec<(usize, i128)> = vec![(0, 0)];
    let mut sindex: BTreeMap<(usize, i128), usize> = BTreeMap::from([((0, 0), 0)]);
    let mut qi = 0;
    while qi < states.len() {
        let (node, lvl) = states[qi];
        for &(_, e) in &sp.succ[node] {
            let key = step(node, lvl, e);
            sindex.entry(key).or_insert_with(|| {
                states.push(key);
                states.len() - 1
            });
        }
        qi += 1;
    }
    let certified_cap: i128 = states.iter().map(|&(_, l)| l).max().unwrap();

    // assemble the strategy: states plus one dead state for impossible pairs
    let k = states.len() + 1;
    let dead = k - 1;
    let m = a.num_edges();
    let mut update = vec![dead; k * m];
    for (si, &(node, lvl)) in states.iter().enumerate() {
        for &(_, e) in &sp.succ[node] {
            update[si * m + e] = sindex[&step(node, lvl, e)];
        }
    }
    let memory = MemoryStructure::new(k, 0, m, update);
    let mut moves = vec![None; a.num_vertices() * k];
    for v in 0..a.num_vertices() {
        if a.owner(v) != Player::P0 {
            continue;
        }
        let fallback = a.successors(v).next().unwrap();
        for s in 0..k {
            let pick = if s == dead {
                None
            } else {
                let (node, _) = states[s];
                let (nv, nm) = sp.nodes[node];
                if nv == v {
                    sigma.next_move(v, nm)
                } else {
                    None
                }
            };
            moves[v * k + s] = Some(pick.unwrap_or(fallback));
        }
    }
    let sigma2 = FiniteStateStrategy::new(a, Player::P0, memory, moves);
    let cap = u64::try_from(certified_cap)
        .map_err(|_| ReduceError::Inconsistency("negative certified capacity".to_string()))?;
    let check = verify_strategy(a, &sigma2, &Objective::EnergyLU { cap })?;
    if !check.accepted {
        return Err(ReduceError::Inconsistency(
            "re-routed strategy fails its own certified bound".to_string(),
        ));
    }
    Ok((sigma2, cap))
}
