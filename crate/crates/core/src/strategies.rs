//! Finite-state strategy execution and verification: the strategy product,
//! exact worst-case value measurement via maximum cycle means, brute-force
//! strategy enumeration, and the strategy text format.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::arena::{
    ArenaError, FiniteStateStrategy, MemoryStructure, Player, WeightLabel, WeightedArena,
};
use crate::cyclemean::max_cycle_mean;
use crate::evaluation::{rat, Lasso, ObjectiveValue, Rational, ViolationReason};
use crate::solvers::{validate_countdown, Coloring, SolveError};

/// Winning condition with its numeric parameters. Player 0's goal
/// throughout; Player 1 wins iff the condition fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    /// Energy level always >= 0.
    EnergyL,
    /// Energy level always within [0, cap].
    EnergyLU { cap: u64 },
    /// Energy level always >= 0 and limsup average energy <= t.
    AvgEnergyL { t: Rational },
    /// Energy within [0, cap] and limsup average energy <= t.
    AvgEnergyLU { cap: u64, t: Rational },
    /// Recharge energy level EL_cap always >= 0.
    Recharge { cap: u64 },
    /// EL_cap >= 0 and limsup average of EL_cap <= t.
    AvgRecharge { cap: u64, t: Rational },
    /// limsup of (weight sum / steps) <= t.
    MeanPayoff { t: Rational },
    /// Highest color seen infinitely often is even.
    Parity(Coloring),
    /// Reach the sink with the budget spent to exactly zero.
    Countdown { budget: u64 },
}

/// Objective with the threshold abstracted away, for value measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveFamily {
    AvgEnergyL,
    AvgEnergyLU { cap: u64 },
    AvgRecharge { cap: u64 },
    MeanPayoff,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("objective does not match the arena's labeling mode")]
    ModeMismatch,
    #[error("search space of about {estimated} strategies exceeds the limit {limit}")]
    SearchSpaceExceeded { estimated: u128, limit: u128 },
    #[error("strategy file line {line}: {detail}")]
    Syntax { line: usize, detail: String },
    #[error("strategy file is incomplete: {0}")]
    Incomplete(String),
}

/// Verification outcome. A rejection always carries a consistent lasso
/// that violates the objective; average objectives also report the worst
/// consistent value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub witness: Option<Lasso>,
    pub worst_value: Option<ObjectiveValue>,
}

/// Restriction of the arena to plays consistent with a strategy: the
/// owner's vertices keep only the chosen edge, opponent vertices keep all.
/// Nodes are reachable (vertex, memory state) pairs.
#[derive(Debug, Clone)]
pub struct StrategyProduct {
    /// node -> (vertex, memory state)
    pub nodes: Vec<(usize, usize)>,
    /// node -> (successor node, original edge index)
    pub succ: Vec<Vec<(usize, usize)>>,
}

pub fn strategy_product(a: &WeightedArena, sigma: &FiniteStateStrategy) -> StrategyProduct {
    let start = (a.initial(), sigma.memory.initial_state());
    let mut nodes = vec![start];
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    let mut queue = vec![0usize];
    while let Some(ni) = queue.pop() {
        let (v, m) = nodes[ni];
        let edges: Vec<usize> = if a.owner(v) == sigma.player {
            let dst = sigma.next_move(v, m).expect("move defined on own vertex");
            vec![a.edge_index(v, dst).expect("move follows an edge")]
        } else {
            a.out_edges(v).to_vec()
        };
        for e in edges {
            let key = (a.edge(e).dst, sigma.memory.update(m, e));
            let ti = match nodes.iter().position(|&p| p == key) {
                Some(t) => t,
                None => {
                    nodes.push(key);
                    succ.push(Vec::new());
                    queue.push(nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            succ[ni].push((ti, e));
        }
    }
    StrategyProduct { nodes, succ }
}

impl StrategyProduct {
    fn vertex(&self, node: usize) -> usize {
        self.nodes[node].0
    }

    /// BFS parent tree from the initial node.
    fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        let mut queue = alloc::collections::VecDeque::from([0usize]);
        while let Some(n) = queue.pop_front() {
            for &(t, _) in &self.succ[n] {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some(n);
                    queue.push_back(t);
                }
            }
        }
        parent
    }

    fn path_to(&self, parent: &[Option<usize>], node: usize) -> Vec<usize> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Lasso continuing from `path` (node sequence from the initial node)
    /// by first-successor steps until a node repeats.
    fn lasso_closing(&self, a: &WeightedArena, path: &[usize]) -> Lasso {
        let mut seq = path.to_vec();
        loop {
            let last = *seq.last().unwrap();
            let next = self.succ[last][0].0;
            if let Some(i) = seq.iter().position(|&n| n == next) {
                let prefix = seq[..i].iter().map(|&n| self.vertex(n)).collect();
                let cycle = seq[i..].iter().map(|&n| self.vertex(n)).collect();
                let l = Lasso::new(prefix, cycle);
                debug_assert!(l.validate(a).is_ok());
                return l;
            }
            seq.push(next);
        }
    }

    /// Lasso whose cycle part is the given node cycle, with a BFS path as
    /// prefix.
    fn lasso_through_cycle(
        &self,
        a: &WeightedArena,
        parent: &[Option<usize>],
        cycle: &[usize],
    ) -> Lasso {
        let path = self.path_to(parent, cycle[0]);
        let prefix = path[..path.len() - 1].iter().map(|&n| self.vertex(n)).collect();
        let cyc = cycle.iter().map(|&n| self.vertex(n)).collect();
        let l = Lasso::new(prefix, cyc);
        debug_assert!(l.validate(a).is_ok());
        l
    }
}

/// Energy-annotated configuration graph over a strategy product.
struct LevelGraph {
    /// config -> (product node, level)
    cfgs: Vec<(usize, i128)>,
    succ: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    /// first violating step found: (source config, offending edge, reason)
    violation: Option<(usize, usize, ViolationReason)>,
}

/// Explores (node, level) configurations breadth-first. `reset` is the
/// recharge level for R-edges; `upper` of `None` means the caller
/// guarantees boundedness (checked against a hard cap).
fn explore_levels(
    sp: &StrategyProduct,
    a: &WeightedArena,
    start_level: i128,
    upper: Option<i128>,
    reset: Option<i128>,
    lower_reason: ViolationReason,
) -> LevelGraph {
    let hard_cap = upper
        .unwrap_or_else(|| (sp.nodes.len() as i128 + 1) * (a.max_abs_weight() as i128));
    let mut cfgs = vec![(0usize, start_level)];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut queue = alloc::collections::VecDeque::from([0usize]);
    let mut violation = None;
    'bfs: while let Some(ci) = queue.pop_front() {
        let (node, lvl) = cfgs[ci];
        for &(t, e) in &sp.succ[node] {
            let lvl2 = match a.edge(e).label {
                WeightLabel::Int(w) => lvl + w as i128,
                WeightLabel::Recharge => reset.expect("R-edge in integer mode"),
            };
            if lvl2 < 0 {
                violation = Some((ci, e, lower_reason));
                break 'bfs;
            }
            if let Some(u) = upper {
                if lvl2 > u {
                    violation = Some((ci, e, ViolationReason::UpperBound));
                    break 'bfs;
                }
            } else {
                assert!(lvl2 <= hard_cap, "unbounded energy without a positive cycle");
            }
            let key = (t, lvl2);
            let ti = match cfgs.iter().position(|&c| c == key) {
                Some(i) => i,
                None => {
                    cfgs.push(key);
                    succ.push(Vec::new());
                    parent.push(Some(ci));
                    queue.push_back(cfgs.len() - 1);
                    cfgs.len() - 1
                }
            };
            succ[ci].push(ti);
        }
    }
    LevelGraph { cfgs, succ, parent, violation }
}

impl LevelGraph {
    fn path_to(&self, cfg: usize) -> Vec<usize> {
        let mut path = vec![cfg];
        let mut cur = cfg;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}

/// Witness for a violating step: the configuration path to the bad edge,
/// then any continuation closed into a cycle.
fn violation_lasso(
    sp: &StrategyProduct,
    a: &WeightedArena,
    lg: &LevelGraph,
    cfg: usize,
    edge: usize,
) -> Lasso {
    let mut nodes: Vec<usize> = lg.path_to(cfg).iter().map(|&c| lg.cfgs[c].0).collect();
    let src = *nodes.last().unwrap();
    let &(t, _) = sp.succ[src]
        .iter()
        .find(|&&(_, e)| e == edge)
        .expect("violating edge leaves the config's node");
    nodes.push(t);
    sp.lasso_closing(a, &nodes)
}

enum AvgMode {
    /// Plain energy from level 0; lower bound 0, no upper bound.
    Plain,
    /// Energy from 0 confined to [0, cap].
    BoundedLu { cap: u64 },
    /// EL_cap from cap; R resets; lower bound 0.
    Recharge { cap: u64 },
}

/// Supremum over consistent plays of the long-run average level, with a
/// lasso attaining it (or violating the bounds).
fn worst_avg(
    a: &WeightedArena,
    sp: &StrategyProduct,
    mode: AvgMode,
) -> Result<(ObjectiveValue, Lasso), StrategyError> {
    let (start, upper, reset, reason) = match mode {
        AvgMode::Plain => {
            a.check_no_recharge().map_err(|_| StrategyError::ModeMismatch)?;
            // unbounded drift: a reachable positive-mean cycle lets the
            // opponent push the average past every bound
            let edges = product_int_edges(a, sp);
            if let Some((mu, cyc)) = max_cycle_mean(sp.nodes.len(), &edges) {
                if mu > rat(0, 1) {
                    let l = sp.lasso_through_cycle(a, &sp.parents(), &cyc);
                    return Ok((ObjectiveValue::PlusInfinity, l));
                }
            }
            (0, None, None, ViolationReason::LowerBound)
        }
        AvgMode::BoundedLu { cap } => {
            a.check_no_recharge().map_err(|_| StrategyError::ModeMismatch)?;
            (0, Some(cap as i128), None, ViolationReason::LowerBound)
        }
        AvgMode::Recharge { cap } => {
            a.check_recharge_mode().map_err(|_| StrategyError::ModeMismatch)?;
            (cap as i128, Some(cap as i128), Some(cap as i128), ViolationReason::NegativeRecharge)
        }
    };
    let lg = explore_levels(sp, a, start, upper, reset, reason);
    if let Some((cfg, edge, _)) = lg.violation {
        let l = violation_lasso(sp, a, &lg, cfg, edge);
        let value = lasso_violation_value(a, &l, matches!(mode, AvgMode::Recharge { .. }), upper, start, reset);
        return Ok((value, l));
    }
    // average energy of a cycle = mean of the source levels of its edges
    let edges: Vec<(usize, usize, i128)> = lg
        .succ
        .iter()
        .enumerate()
        .flat_map(|(c, ts)| {
            let lvl = lg.cfgs[c].1;
            ts.iter().map(move |&t| (c, t, lvl))
        })
        .collect();
    let (mu, cyc) = max_cycle_mean(lg.cfgs.len(), &edges).expect("no terminal configurations");
    // prefix: configuration path to the cycle
    let path = lg.path_to(cyc[0]);
    let prefix = path[..path.len() - 1].iter().map(|&c| sp.vertex(lg.cfgs[c].0)).collect();
    let cycle = cyc.iter().map(|&c| sp.vertex(lg.cfgs[c].0)).collect();
    let l = Lasso::new(prefix, cycle);
    debug_assert!(l.validate(a).is_ok());
    Ok((ObjectiveValue::Finite(mu), l))
}

/// Earliest-violation value of a witness lasso, recomputed the same way
/// the evaluation module scores plays.
fn lasso_violation_value(
    a: &WeightedArena,
    l: &Lasso,
    recharge: bool,
    upper: Option<i128>,
    start: i128,
    reset: Option<i128>,
) -> ObjectiveValue {
    let mut lvl = start;
    let horizon = l.prefix.len() + 2 * l.cycle.len();
    for i in 0..horizon {
        match l.label_at(a, i) {
            WeightLabel::Int(w) => lvl += w as i128,
            WeightLabel::Recharge => lvl = reset.expect("R-edge in integer mode"),
        }
        if lvl < 0 {
            let reason = if recharge {
                ViolationReason::NegativeRecharge
            } else {
                ViolationReason::LowerBound
            };
            return ObjectiveValue::Violated { reason, at: i + 1 };
        }
        if upper.map_or(false, |u| lvl > u) {
            return ObjectiveValue::Violated { reason: ViolationReason::UpperBound, at: i + 1 };
        }
    }
    unreachable!("witness lasso must violate within the scanned horizon")
}

fn product_int_edges(a: &WeightedArena, sp: &StrategyProduct) -> Vec<(usize, usize, i128)> {
    sp.succ
        .iter()
        .enumerate()
        .flat_map(|(n, ts)| {
            ts.iter().map(move |&(t, e)| {
                let w = a.edge(e).label.as_int().expect("integer weights") as i128;
                (n, t, w)
            })
        })
        .collect()
}

/// Supremum over plays consistent with `sigma` of the family's long-run
/// quantity; `Violated` if the strategy lets a bound break.
pub fn worst_consistent_value(
    a: &WeightedArena,
    sigma: &FiniteStateStrategy,
    family: ObjectiveFamily,
) -> Result<ObjectiveValue, StrategyError> {
    let sp = strategy_product(a, sigma);
    let mode = match family {
        ObjectiveFamily::AvgEnergyL => AvgMode::Plain,
        ObjectiveFamily::AvgEnergyLU { cap } => AvgMode::BoundedLu { cap },
        ObjectiveFamily::AvgRecharge { cap } => AvgMode::Recharge { cap },
        ObjectiveFamily::MeanPayoff => {
            a.check_no_recharge().map_err(|_| StrategyError::ModeMismatch)?;
            let edges = product_int_edges(a, &sp);
            let (mu, _) = max_cycle_mean(sp.nodes.len(), &edges).expect("no terminal nodes");
            return Ok(ObjectiveValue::Finite(mu));
        }
    };
    worst_avg(a, &sp, mode).map(|(v, _)| v)
}

/// Checks that every play consistent with `sigma` satisfies `obj`.
pub fn verify_strategy(
    a: &WeightedArena,
    sigma: &FiniteStateStrategy,
    obj: &Objective,
) -> Result<Verdict, StrategyError> {
    let sp = strategy_product(a, sigma);
    let accepted = |worst: Option<ObjectiveValue>| Verdict { accepted: true, witness: None, worst_value: worst };
    let rejected = |l: Lasso, worst: Option<ObjectiveValue>| Verdict { accepted: false, witness: Some(l), worst_value: worst };
    match obj {
        Objective::EnergyL => {
            a.check_no_recharge().map_err(|_| StrategyError::ModeMismatch)?;
            Ok(match energy_l_violation(a, &sp) {
                Some(l) => rejected(l, None),
                None => accepted(None),
            })
        }
        Objective::EnergyLU { cap } => {
            a.check_no_recharge().map_err(|_| StrategyError::ModeMismatch)?;
            let lg = explore_levels(&sp, a, 0, Some(*cap as i128), None, ViolationReason::LowerBound);
            Ok(match lg.violation {
                Some((cfg, e, _)) => rejected(violation_lasso(&sp, a, &lg, cfg, e), None),
                None => accepted(None),
            })
        }
        Objective::Recharge { cap } => {
            a.check_recharge_mode().map_err(|_| StrategyError::ModeMismatch)?;
            let c = *cap as i128;
            let lg = explore_levels(&sp, a, c, Some(c), Some(c), ViolationReason::NegativeRecharge);
            Ok(match lg.violation {
                Some((cfg, e, _)) => rejected(violation_lasso(&sp, a, &lg, cfg, e), None),
                None => accepted(None),
            })
        }
        Objective::AvgEnergyL { t } => avg_verdict(a, &sp, AvgMode::Plain, *t),
        Objective::AvgEnergyLU { cap, t } => avg_verdict(a, &sp, AvgMode::BoundedLu { cap: *cap }, *t),
        Objective::AvgRecharge { cap, t } => avg_verdict(a, &sp, AvgMode::Recharge { cap: *cap }, *t),
        Objective::MeanPayoff { t } => {
            a.check_no_recharge().map_err(|_| StrategyError::ModeMismatch)?;
            let edges = product_int_edges(a, &sp);
            let (mu, cyc) = max_cycle_mean(sp.nodes.len(), &edges).expect("no terminal nodes");
            let worst = Some(ObjectiveValue::Finite(mu));
            if mu <= *t {
                Ok(accepted(worst))
            } else {
                Ok(rejected(sp.lasso_through_cycle(a, &sp.parents(), &cyc), worst))
            }
        }
        Objective::Parity(coloring) => {
            if coloring.len() != a.num_vertices() {
                return Err(StrategyError::Solve(SolveError::IncompleteColoring));
            }
            Ok(match parity_violation(a, &sp, coloring) {
                Some(l) => rejected(l, None),
                None => accepted(None),
            })
        }
        Objective::Countdown { budget } => {
            Ok(match countdown_violation(a, &sp, *budget)? {
                Some(l) => rejected(l, None),
                None => accepted(None),
            })
        }
    }
}

fn avg_verdict(
    a: &WeightedArena,
    sp: &StrategyProduct,
    mode: AvgMode,
    t: Rational,
) -> Result<Verdict, StrategyError> {
    let (value, witness) = worst_avg(a, sp, mode)?;
    let ok = matches!(value, ObjectiveValue::Finite(m) if m <= t);
    Ok(Verdict {
        accepted: ok,
        witness: if ok { None } else { Some(witness) },
        worst_value: Some(value),
    })
}

/// A consistent play driving the plain energy level below zero, if any:
/// shortest-distance relaxation finds a negative-sum walk or a reachable
/// negative cycle.
fn energy_l_violation(a: &WeightedArena, sp: &StrategyProduct) -> Option<Lasso> {
    let n = sp.nodes.len();
    let mut dist = vec![i128::MAX; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    dist[0] = 0;
    let mut cycle_node = None;
    for round in 0..n {
        let mut changed = false;
        for u in 0..n {
            if dist[u] == i128::MAX {
                continue;
            }
            for &(v, e) in &sp.succ[u] {
                let w = a.edge(e).label.as_int().expect("integer weights") as i128;
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                    parent[v] = Some(u);
                    changed = true;
                    if round == n - 1 {
                        cycle_node = Some(v);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(mut x) = cycle_node {
        // land on the negative cycle, then read it off the parent chain
        for _ in 0..n {
            x = parent[x].unwrap();
        }
        let mut cyc = vec![x];
        let mut cur = parent[x].unwrap();
        while cur != x {
            cyc.push(cur);
            cur = parent[cur].unwrap();
        }
        cyc.reverse();
        return Some(sp.lasso_through_cycle(a, &sp.parents(), &cyc));
    }
    let bad = (0..n).filter(|&v| dist[v] != i128::MAX && dist[v] < 0).min_by_key(|&v| dist[v])?;
    // parent chains are acyclic once relaxation has converged
    let mut path = vec![bad];
    let mut cur = bad;
    while let Some(p) = parent[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    Some(sp.lasso_closing(a, &path))
}

/// A reachable cycle whose maximal color is odd, if any.
fn parity_violation(a: &WeightedArena, sp: &StrategyProduct, coloring: &Coloring) -> Option<Lasso> {
    let n = sp.nodes.len();
    let low = |node: usize| coloring.color(sp.vertex(node)) <= 1;
    for start in (0..n).filter(|&x| coloring.color(sp.vertex(x)) == 1) {
        // cycle through `start` inside the color <= 1 subgraph
        let mut from: Vec<Option<usize>> = vec![None; n];
        let mut queue = alloc::collections::VecDeque::from([start]);
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut found = false;
        'search: while let Some(u) = queue.pop_front() {
            for &(v, _) in &sp.succ[u] {
                if !low(v) {
                    continue;
                }
                if v == start {
                    from[start] = Some(u);
                    found = true;
                    break 'search;
                }
                if !seen[v] {
                    seen[v] = true;
                    from[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        if found {
            let mut cyc = vec![start];
            let mut cur = from[start].unwrap();
            while cur != start {
                cyc.push(cur);
                cur = from[cur].unwrap();
            }
            cyc.reverse();
            return Some(sp.lasso_through_cycle(a, &sp.parents(), &cyc));
        }
    }
    None
}

/// A consistent play missing the exact-zero sink, if any. The countdown
/// shape makes every non-sink cycle strictly decrease the budget, so the
/// (node, remaining) space is finite.
fn countdown_violation(
    a: &WeightedArena,
    sp: &StrategyProduct,
    budget: u64,
) -> Result<Option<Lasso>, StrategyError> {
    let sink = validate_countdown(a)?.sink;
    let mut cfgs: Vec<(usize, i128)> = vec![(0, budget as i128)];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut queue = alloc::collections::VecDeque::from([0usize]);
    let path_nodes = |parent: &[Option<usize>], cfgs: &[(usize, i128)], cfg: usize| {
        let mut path = vec![cfg];
        let mut cur = cfg;
        while let Some(p) = parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path.iter().map(|&c| cfgs[c].0).collect::<Vec<usize>>()
    };
    while let Some(ci) = queue.pop_front() {
        let (node, r) = cfgs[ci];
        if sp.vertex(node) == sink {
            if r == 0 {
                continue; // winning absorbing configuration
            }
            let nodes = path_nodes(&parent, &cfgs, ci);
            return Ok(Some(sp.lasso_closing(a, &nodes)));
        }
        for &(t, e) in &sp.succ[node] {
            let r2 = r + a.edge(e).label.as_int().expect("countdown weights") as i128;
            if r2 < 0 {
                // budget overspent: the play can never hit exactly zero
                let mut nodes = path_nodes(&parent, &cfgs, ci);
                nodes.push(t);
                return Ok(Some(sp.lasso_closing(a, &nodes)));
            }
            let key = (t, r2);
            if !cfgs.contains(&key) {
                cfgs.push(key);
                parent.push(Some(ci));
                queue.push_back(cfgs.len() - 1);
            }
        }
    }
    Ok(None)
}

/// Drops unreachable memory states and renumbers the rest in BFS discovery
/// order from the initial state (edges scanned in declaration order).
pub fn canonicalize_strategy(a: &WeightedArena, sigma: &FiniteStateStrategy) -> FiniteStateStrategy {
    let k = sigma.memory.num_states();
    let m = a.num_edges();
    let mut order: Vec<usize> = vec![sigma.memory.initial_state()];
    let mut rank: Vec<Option<usize>> = vec![None; k];
    rank[sigma.memory.initial_state()] = Some(0);
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        for e in 0..m {
            let t = sigma.memory.update(s, e);
            if rank[t].is_none() {
                rank[t] = Some(order.len());
                order.push(t);
            }
        }
        i += 1;
    }
    let k2 = order.len();
    let mut update = vec![0usize; k2 * m];
    for (new_s, &old_s) in order.iter().enumerate() {
        for e in 0..m {
            update[new_s * m + e] = rank[sigma.memory.update(old_s, e)].unwrap();
        }
    }
    let memory = MemoryStructure::new(k2, 0, m, update);
    let mut moves = vec![None; a.num_vertices() * k2];
    for v in 0..a.num_vertices() {
        for (new_s, &old_s) in order.iter().enumerate() {
            moves[v * k2 + new_s] = sigma.next_move(v, old_s);
        }
    }
    FiniteStateStrategy::new(a, sigma.player, memory, moves)
}

pub const DEFAULT_ENUMERATION_LIMIT: u128 = 10_000_000;

/// All Player 0 strategies with exactly `memory_size` reachable states, up
/// to memory-state relabeling. Guarded by a search-space estimate.
pub fn enumerate_strategies(
    a: &WeightedArena,
    memory_size: usize,
) -> Result<Vec<FiniteStateStrategy>, StrategyError> {
    enumerate_strategies_with_limit(a, memory_size, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_strategies_with_limit(
    a: &WeightedArena,
    memory_size: usize,
    limit: u128,
) -> Result<Vec<FiniteStateStrategy>, StrategyError> {
    assert!(memory_size >= 1);
    let k = memory_size;
    let m = a.num_edges();
    let p0_vertices: Vec<usize> =
        (0..a.num_vertices()).filter(|&v| a.owner(v) == Player::P0).collect();
    let mut estimated: u128 = 1;
    for _ in 0..k * m {
        estimated = estimated.saturating_mul(k as u128);
    }
    for &v in &p0_vertices {
        for _ in 0..k {
            estimated = estimated.saturating_mul(a.out_edges(v).len() as u128);
        }
    }
    if estimated > limit {
        return Err(StrategyError::SearchSpaceExceeded { estimated, limit });
    }

    let mut out = Vec::new();
    let mut update = vec![0usize; k * m];
    loop {
        if update_table_is_canonical(&update, k, m) {
            let memory = MemoryStructure::new(k, 0, m, update.clone());
            emit_move_tables(a, &p0_vertices, memory, &mut out);
        }
        // odometer over the update table
        let mut pos = 0;
        loop {
            if pos == k * m {
                return Ok(out);
            }
            update[pos] += 1;
            if update[pos] < k {
                break;
            }
            update[pos] = 0;
            pos += 1;
        }
    }
}

/// True when all `k` states are reachable from state 0 and BFS discovery
/// order (edges in declaration order) is the identity: exactly one table
/// per relabeling class passes.
fn update_table_is_canonical(update: &[usize], k: usize, m: usize) -> bool {
    let mut order = vec![0usize];
    let mut seen = vec![false; k];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        for e in 0..m {
            let t = update[s * m + e];
            if !seen[t] {
                if t != order.len() {
                    return false; // discovered out of order
                }
                seen[t] = true;
                order.push(t);
            }
        }
        i += 1;
    }
    order.len() == k
}

fn emit_move_tables(
    a: &WeightedArena,
    p0_vertices: &[usize],
    memory: MemoryStructure,
    out: &mut Vec<FiniteStateStrategy>,
) {
    let k = memory.num_states();
    let slots: Vec<(usize, usize)> = p0_vertices
        .iter()
        .flat_map(|&v| (0..k).map(move |s| (v, s)))
        .collect();
    let mut choice = vec![0usize; slots.len()];
    loop {
        let mut moves = vec![None; a.num_vertices() * k];
        for (i, &(v, s)) in slots.iter().enumerate() {
            let dst = a.edge(a.out_edges(v)[choice[i]]).dst;
            moves[v * k + s] = Some(dst);
        }
        out.push(FiniteStateStrategy::new(a, Player::P0, memory.clone(), moves));
        let mut pos = 0;
        loop {
            if pos == slots.len() {
                return;
            }
            choice[pos] += 1;
            if choice[pos] < a.out_edges(slots[pos].0).len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Parses the strategy text format: `strategy` header, `memory <k>`,
/// `initmem <s>`, one `upd <s> <src> <dst> <s'>` line per (state, edge),
/// and `move <vertex> <s> <dst>` lines for the owner's vertices.
pub fn parse_strategy(a: &WeightedArena, text: &str) -> Result<FiniteStateStrategy, StrategyError> {
    let mut header = false;
    let mut k: Option<usize> = None;
    let mut initmem: Option<usize> = None;
    let mut upd: Vec<(usize, usize, usize)> = Vec::new(); // (state, edge, next)
    let mut mv: Vec<(usize, usize, usize)> = Vec::new(); // (vertex, state, dst)
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let mut tok = line.split_whitespace();
        let Some(head) = tok.next() else { continue };
        let bad = |detail: &str| StrategyError::Syntax { line: line_no, detail: detail.to_string() };
        if !header {
            if head != "strategy" {
                return Err(bad("missing `strategy` header"));
            }
            header = true;
            continue;
        }
        match head {
            "memory" => {
                k = Some(
                    tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad state count"))?,
                );
            }
            "initmem" => {
                initmem = Some(
                    tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad initial state"))?,
                );
            }
            "upd" => {
                let s: usize =
                    tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad state"))?;
                let src = tok.next().ok_or_else(|| bad("missing source"))?;
                let dst = tok.next().ok_or_else(|| bad("missing target"))?;
                let s2: usize =
                    tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad next state"))?;
                let sv = a.vertex_index(src).ok_or_else(|| bad("unknown source vertex"))?;
                let dv = a.vertex_index(dst).ok_or_else(|| bad("unknown target vertex"))?;
                let e = a.edge_index(sv, dv).ok_or_else(|| bad("no such edge"))?;
                upd.push((s, e, s2));
            }
            "move" => {
                let v = tok.next().ok_or_else(|| bad("missing vertex"))?;
                let s: usize =
                    tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad state"))?;
                let d = tok.next().ok_or_else(|| bad("missing target"))?;
                let vi = a.vertex_index(v).ok_or_else(|| bad("unknown vertex"))?;
                let di = a.vertex_index(d).ok_or_else(|| bad("unknown target"))?;
                if a.edge_index(vi, di).is_none() {
                    return Err(bad("move target is not a successor"));
                }
                mv.push((vi, s, di));
            }
            _ => return Err(bad("unknown directive")),
        }
        if tok.next().is_some() {
            return Err(StrategyError::Syntax { line: line_no, detail: "trailing tokens".into() });
        }
    }
    if !header {
        return Err(StrategyError::Incomplete("missing `strategy` header".into()));
    }
    let k = k.ok_or_else(|| StrategyError::Incomplete("missing `memory`".into()))?;
    let initmem = initmem.ok_or_else(|| StrategyError::Incomplete("missing `initmem`".into()))?;
    if k == 0 || initmem >= k {
        return Err(StrategyError::Incomplete("initial state out of range".into()));
    }
    let m = a.num_edges();
    let mut update = vec![usize::MAX; k * m];
    for (s, e, s2) in upd {
        if s >= k || s2 >= k {
            return Err(StrategyError::Incomplete("upd state out of range".into()));
        }
        update[s * m + e] = s2;
    }
    if update.iter().any(|&s| s == usize::MAX) {
        return Err(StrategyError::Incomplete("update table not total".into()));
    }
    let memory = MemoryStructure::new(k, initmem, m, update);
    // infer the owner from the move lines; default Player 0
    let player = mv.first().map(|&(v, _, _)| a.owner(v)).unwrap_or(Player::P0);
    let mut moves = vec![None; a.num_vertices() * k];
    for (v, s, d) in mv {
        if a.owner(v) != player {
            return Err(StrategyError::Incomplete("moves span both players".into()));
        }
        if s >= k {
            return Err(StrategyError::Incomplete("move state out of range".into()));
        }
        moves[v * k + s] = Some(d);
    }
    for v in 0..a.num_vertices() {
        if a.owner(v) == player {
            for s in 0..k {
                if moves[v * k + s].is_none() {
                    return Err(StrategyError::Incomplete(format!(
                        "no move for vertex {} in state {}",
                        a.vertex_name(v),
                        s
                    )));
                }
            }
        }
    }
    Ok(FiniteStateStrategy::new(a, player, memory, moves))
}

pub fn serialize_strategy(a: &WeightedArena, sigma: &FiniteStateStrategy) -> String {
    let k = sigma.memory.num_states();
    let mut out = String::from("strategy\n");
    out.push_str(&format!("memory {}\n", k));
    out.push_str(&format!("initmem {}\n", sigma.memory.initial_state()));
    for s in 0..k {
        for (ei, e) in a.edges().iter().enumerate() {
            out.push_str(&format!(
                "upd {} {} {} {}\n",
                s,
                a.vertex_name(e.src),
                a.vertex_name(e.dst),
                sigma.memory.update(s, ei)
            ));
        }
    }
    for v in 0..a.num_vertices() {
        for s in 0..k {
            if let Some(d) = sigma.next_move(v, s) {
                out.push_str(&format!("move {} {} {}\n", a.vertex_name(v), s, a.vertex_name(d)));
            }
        }
    }
    out
}

/// Best (minimal) worst-case value achievable by any enumerated strategy,
/// used by memory sweeps and as a cross-check oracle.
pub fn best_enumerated_value(
    a: &WeightedArena,
    memory_size: usize,
    family: ObjectiveFamily,
    limit: u128,
) -> Result<ObjectiveValue, StrategyError> {
    let mut best: Option<ObjectiveValue> = None;
    let mut seen = BTreeSet::new();
    for sigma in enumerate_strategies_with_limit(a, memory_size, limit)? {
        if !seen.insert(strategy_fingerprint(a, &sigma)) {
            continue;
        }
        let v = worst_consistent_value(a, &sigma, family)?;
        if best.map_or(true, |b| v < b) {
            best = Some(v);
        }
    }
    best.ok_or_else(|| StrategyError::Incomplete("no strategy enumerated".into()))
}

fn strategy_fingerprint(a: &WeightedArena, sigma: &FiniteStateStrategy) -> Vec<usize> {
    let k = sigma.memory.num_states();
    let mut fp = Vec::new();
    for s in 0..k {
        for e in 0..a.num_edges() {
            fp.push(sigma.memory.update(s, e));
        }
    }
    for v in 0..a.num_vertices() {
        for s in 0..k {
            fp.push(sigma.next_move(v, s).map(|d| d + 1).unwrap_or(0));
        }
    }
    fp
}
