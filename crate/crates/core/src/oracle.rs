//! Brute-force reference implementations for cross-checking the solvers
//! on small instances, plus the seeded random instance generator.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arena::{ArenaError, Player, WeightLabel, WeightedArena};
use crate::evaluation::{rat, Lasso, ObjectiveValue, Rational};
use crate::solvers::{solve_recharge, SolveError};
use crate::strategies::ObjectiveFamily;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("arena has {n} vertices, oracle limit is {limit}")]
    SizeLimit { n: usize, limit: usize },
    #[error("vertex {0} is a branching opponent vertex; not a solitaire arena")]
    NotSolitaire(String),
    #[error("length bound {0} closes no lasso")]
    BoundTooSmall(usize),
}

pub const DEFAULT_MP_ORACLE_LIMIT: usize = 8;

/// Mean-payoff value of every vertex by literal min-max over positional
/// strategy pairs: each pair induces a functional graph whose unique
/// reachable cycle determines the value.
pub fn mp_value_by_enumeration(a: &WeightedArena) -> Result<Vec<Rational>, OracleError> {
    mp_value_by_enumeration_with_limit(a, DEFAULT_MP_ORACLE_LIMIT)
}

pub fn mp_value_by_enumeration_with_limit(
    a: &WeightedArena,
    limit: usize,
) -> Result<Vec<Rational>, OracleError> {
    a.check_no_recharge()?;
    let n = a.num_vertices();
    if n > limit {
        return Err(OracleError::SizeLimit { n, limit });
    }
    let side = |p: Player| -> Vec<usize> { (0..n).filter(|&v| a.owner(v) == p).collect() };
    let v0 = side(Player::P0);
    let v1 = side(Player::P1);

    let mut best: Vec<Option<Rational>> = vec![None; n];
    let mut c0 = vec![0usize; v0.len()];
    loop {
        let mut worst: Vec<Option<Rational>> = vec![None; n];
        let mut c1 = vec![0usize; v1.len()];
        loop {
            // functional graph of the strategy pair
            let mut next = vec![0usize; n];
            let mut wt = vec![0i128; n];
            for (i, &v) in v0.iter().enumerate() {
                let e = a.edge(a.out_edges(v)[c0[i]]);
                next[v] = e.dst;
                wt[v] = e.label.as_int().unwrap() as i128;
            }
            for (i, &v) in v1.iter().enumerate() {
                let e = a.edge(a.out_edges(v)[c1[i]]);
                next[v] = e.dst;
                wt[v] = e.label.as_int().unwrap() as i128;
            }
            for start in 0..n {
                let mean = functional_cycle_mean(&next, &wt, start);
                if worst[start].map_or(true, |x| mean > x) {
                    worst[start] = Some(mean);
                }
            }
            if !bump(&mut c1, |i| a.out_edges(v1[i]).len()) {
                break;
            }
        }
        for v in 0..n {
            let w = worst[v].unwrap();
            if best[v].map_or(true, |x| w < x) {
                best[v] = Some(w);
            }
        }
        if !bump(&mut c0, |i| a.out_edges(v0[i]).len()) {
            break;
        }
    }
    Ok(best.into_iter().map(|x| x.unwrap()).collect())
}

/// Odometer increment; false when the counter wraps to all zeros.
fn bump(counter: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in 0..counter.len() {
        counter[i] += 1;
        if counter[i] < radix(i) {
            return true;
        }
        counter[i] = 0;
    }
    false
}

/// Mean of the unique cycle reached from `start` in a functional graph.
fn functional_cycle_mean(next: &[usize], wt: &[i128], start: usize) -> Rational {
    let n = next.len();
    let mut seen = vec![usize::MAX; n];
    let mut cur = start;
    let mut step = 0usize;
    while seen[cur] == usize::MAX {
        seen[cur] = step;
        cur = next[cur];
        step += 1;
    }
    let mut sum = 0i128;
    let mut len = 0i128;
    let mut v = cur;
    loop {
        sum += wt[v];
        len += 1;
        v = next[v];
        if v == cur {
            break;
        }
    }
    rat(sum, len)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapSearch {
    NoUpTo(u64),
    Yes { min_cap: u64 },
}

/// Increasing-capacity loop, each capacity decided as a safety game on
/// the recharge-counter product. Sound by monotonicity of the recharge
/// objective in the capacity.
pub fn exists_cap_by_search(a: &WeightedArena, cap_max: u64) -> Result<CapSearch, OracleError> {
    a.check_recharge_mode()?;
    for cap in 0..=cap_max {
        if solve_recharge(a, cap)?.winner == Player::P0 {
            return Ok(CapSearch::Yes { min_cap: cap });
        }
    }
    Ok(CapSearch::NoUpTo(cap_max))
}

fn check_solitaire(a: &WeightedArena) -> Result<(), OracleError> {
    for v in 0..a.num_vertices() {
        if a.owner(v) == Player::P1 && a.out_edges(v).len() > 1 {
            return Err(OracleError::NotSolitaire(a.vertex_name(v).into()));
        }
    }
    Ok(())
}

/// Best (minimal) objective value over the lassos of a solitaire arena,
/// by exhaustive search over level-annotated simple lassos: prefixes never
/// repeat a (vertex, level) configuration, which loses no optimum because
/// a long-run average only depends on one simple configuration cycle.
pub fn solitaire_best_lasso(
    a: &WeightedArena,
    family: ObjectiveFamily,
    length_bound: usize,
) -> Result<(Lasso, ObjectiveValue), OracleError> {
    check_solitaire(a)?;
    let (start_level, upper, reset, mp) = match family {
        ObjectiveFamily::AvgEnergyL => {
            a.check_no_recharge()?;
            (0i128, None, None, false)
        }
        ObjectiveFamily::AvgEnergyLU { cap } => {
            a.check_no_recharge()?;
            (0, Some(cap as i128), None, false)
        }
        ObjectiveFamily::AvgRecharge { cap } => {
            a.check_recharge_mode()?;
            (cap as i128, Some(cap as i128), Some(cap as i128), false)
        }
        ObjectiveFamily::MeanPayoff => {
            a.check_no_recharge()?;
            (0, None, None, true)
        }
    };

    struct Search<'a> {
        a: &'a WeightedArena,
        upper: Option<i128>,
        reset: Option<i128>,
        mp: bool,
        bound: usize,
        // path of (vertex, level) with the weight taken to reach each entry
        path: Vec<(usize, i128)>,
        wsum: Vec<i128>, // prefix sums of integer weights along the path
        best: Option<(Lasso, ObjectiveValue)>,
    }
    impl Search<'_> {
        fn offer(&mut self, lasso: Lasso, value: ObjectiveValue) {
            if self.best.as_ref().map_or(true, |(_, b)| value < *b) {
                self.best = Some((lasso, value));
            }
        }
        fn violate(&mut self, dst: usize) {
            // a play forced out of bounds: close it into any lasso and let
            // the evaluator report the violation
            let mut verts: Vec<usize> = self.path.iter().map(|&(v, _)| v).collect();
            verts.push(dst);
            loop {
                let last = *verts.last().unwrap();
                let next = self.a.edge(self.a.out_edges(last)[0]).dst;
                if let Some(i) = verts.iter().position(|&v| v == next) {
                    let lasso = Lasso::new(verts[..i].to_vec(), verts[i..].to_vec());
                    let mode = match self.reset {
                        Some(c) => crate::evaluation::AvgEnergyMode::RechargeWith(c as u64),
                        None => crate::evaluation::AvgEnergyMode::Plain,
                    };
                    let value = crate::evaluation::avg_energy_of_lasso(self.a, &lasso, mode)
                        .expect("witness lasso evaluates");
                    debug_assert!(matches!(value, ObjectiveValue::Violated { .. }));
                    self.offer(lasso, value);
                    return;
                }
                verts.push(next);
            }
        }
        fn dfs(&mut self, v: usize, lvl: i128) {
            for &ei in self.a.out_edges(v) {
                let e = self.a.edge(ei);
                let (lvl2, w) = match e.label {
                    WeightLabel::Int(x) => (lvl + x as i128, x as i128),
                    WeightLabel::Recharge => (self.reset.expect("R-edge in integer mode"), 0),
                };
                if !self.mp {
                    if lvl2 < 0 {
                        self.violate(e.dst);
                        continue;
                    }
                    if self.upper.map_or(false, |u| lvl2 > u) {
                        self.violate(e.dst);
                        continue;
                    }
                }
                let key = (e.dst, lvl2);
                if let Some(i) = self.path.iter().position(|&c| c == key) {
                    self.close_cycle(i, w);
                    continue;
                }
                if self.path.len() < self.bound {
                    self.path.push(key);
                    self.wsum.push(self.wsum.last().unwrap() + w);
                    self.dfs(e.dst, lvl2);
                    self.path.pop();
                    self.wsum.pop();
                }
            }
        }
        // close the path back to position `at` with an edge of weight `w`
        fn close_cycle(&mut self, at: usize, w: i128) {
            let total = self.wsum.last().unwrap() + w;
            let net = total - self.wsum[at];
            let prefix: Vec<usize> = self.path[..at].iter().map(|&(v, _)| v).collect();
            let cycle: Vec<usize> = self.path[at..].iter().map(|&(v, _)| v).collect();
            let lasso = Lasso::new(prefix, cycle);
            let value = if self.mp {
                ObjectiveValue::Finite(rat(net, (self.path.len() - at) as i128))
            } else {
                let sum: i128 = self.path[at..].iter().map(|&(_, l)| l).sum();
                ObjectiveValue::Finite(rat(sum, (self.path.len() - at) as i128))
            };
            self.offer(lasso, value);
        }
    }

    let mut search = Search {
        a,
        upper,
        reset,
        mp,
        bound: length_bound,
        // wsum[i] = weight sum up to path position i; position 0 has sum 0
        path: vec![(a.initial(), start_level)],
        wsum: vec![0],
        best: None,
    };
    search.dfs(a.initial(), start_level);
    let best = search.best.ok_or(OracleError::BoundTooSmall(length_bound))?;
    debug_assert!(best.0.validate(a).is_ok());
    Ok(best)
}

/// Parameters for the seeded random arena generator. Percentages are in
/// 0..=100; every vertex gets one guaranteed outgoing edge, further edges
/// are added with probability `extra_edge_pct`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub vertices: usize,
    pub extra_edge_pct: u32,
    pub max_weight: u64,
    /// Probability of an R label per edge; forces recharge mode when > 0.
    pub recharge_pct: u32,
    /// Share of vertices owned by Player 1.
    pub p1_pct: u32,
    /// Non-positive weights only (with optional R labels) when set.
    pub recharge_mode: bool,
}

impl GenParams {
    pub fn recharge_default(vertices: usize, max_weight: u64) -> GenParams {
        GenParams {
            vertices,
            extra_edge_pct: 40,
            max_weight,
            recharge_pct: 25,
            p1_pct: 40,
            recharge_mode: true,
        }
    }

    pub fn general_default(vertices: usize, max_weight: u64) -> GenParams {
        GenParams {
            vertices,
            extra_edge_pct: 40,
            max_weight,
            recharge_pct: 0,
            p1_pct: 50,
            recharge_mode: false,
        }
    }
}

/// Deterministic random arena for the given seed; always a valid arena
/// (no terminal vertices, no duplicate edges).
pub fn generate_arena(params: &GenParams, seed: u64) -> WeightedArena {
    assert!(params.vertices >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.vertices;
    let names: Vec<String> = (0..n).map(|i| format!("n{}", i)).collect();
    let owners: Vec<Player> = (0..n)
        .map(|_| if rng.gen_range(0..100) < params.p1_pct { Player::P1 } else { Player::P0 })
        .collect();
    let label = |rng: &mut ChaCha8Rng| -> WeightLabel {
        if params.recharge_mode && rng.gen_range(0..100) < params.recharge_pct {
            WeightLabel::Recharge
        } else if params.recharge_mode {
            WeightLabel::Int(-(rng.gen_range(0..=params.max_weight) as i64))
        } else {
            let w = params.max_weight as i64;
            WeightLabel::Int(rng.gen_range(-w..=w))
        }
    };
    let mut edges: Vec<(usize, usize, WeightLabel)> = Vec::new();
    for v in 0..n {
        let dst = rng.gen_range(0..n);
        let l = label(&mut rng);
        edges.push((v, dst, l));
    }
    for src in 0..n {
        for dst in 0..n {
            if edges.iter().any(|&(s, d, _)| s == src && d == dst) {
                continue;
            }
            if rng.gen_range(0..100) < params.extra_edge_pct {
                let l = label(&mut rng);
                edges.push((src, dst, l));
            }
        }
    }
    let vertices: Vec<(&str, Player)> =
        names.iter().zip(&owners).map(|(n, &o)| (n.as_str(), o)).collect();
    let edge_refs: Vec<(&str, &str, WeightLabel)> =
        edges.iter().map(|&(s, d, l)| (names[s].as_str(), names[d].as_str(), l)).collect();
    WeightedArena::build(&vertices, &names[0], &edge_refs).expect("generator emits valid arenas")
}

/// Deterministic countdown-shaped instance: alternating Player 0 and
/// Player 1 layers over a designated sink, distinct negative weights per
/// Player 0 vertex. Returns the arena and a budget below `max_budget`.
pub fn generate_countdown(seed: u64, max_budget: u64) -> (WeightedArena, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n0 = rng.gen_range(1..=3usize);
    let n1 = rng.gen_range(1..=3usize);
    let p0: Vec<String> = (0..n0).map(|i| format!("a{}", i)).collect();
    let p1: Vec<String> = (0..n1).map(|i| format!("b{}", i)).collect();
    let mut vertices: Vec<(&str, Player)> = Vec::new();
    for s in &p0 {
        vertices.push((s.as_str(), Player::P0));
    }
    for s in &p1 {
        vertices.push((s.as_str(), Player::P1));
    }
    vertices.push(("end", Player::P1));
    let mut edges: Vec<(String, String, WeightLabel)> = Vec::new();
    edges.push(("end".into(), "end".into(), WeightLabel::Int(0)));
    for (i, s) in p0.iter().enumerate() {
        edges.push((s.clone(), "end".into(), WeightLabel::Int(0)));
        // distinct negative weights among this vertex's edges
        let mut used = vec![0i64];
        let count = rng.gen_range(1..=n1);
        let mut targets: Vec<usize> = (0..n1).collect();
        for _ in 0..count {
            let j = rng.gen_range(0..targets.len());
            let t = targets.swap_remove(j);
            let mut w;
            loop {
                w = -(rng.gen_range(1..=4i64));
                if !used.contains(&w) {
                    break;
                }
            }
            used.push(w);
            edges.push((s.clone(), p1[t].clone(), WeightLabel::Int(w)));
        }
        let _ = i;
    }
    for s in &p1 {
        let count = rng.gen_range(1..=n0);
        let mut targets: Vec<usize> = (0..n0).collect();
        for _ in 0..count {
            let j = rng.gen_range(0..targets.len());
            let t = targets.swap_remove(j);
            edges.push((s.clone(), p0[t].clone(), WeightLabel::Int(0)));
        }
    }
    let edge_refs: Vec<(&str, &str, WeightLabel)> =
        edges.iter().map(|(s, d, l)| (s.as_str(), d.as_str(), *l)).collect();
    let arena = WeightedArena::build(&vertices, p0[0].as_str(), &edge_refs)
        .expect("generator emits valid countdown arenas");
    let budget = rng.gen_range(0..=max_budget);
    (arena, budget)
}
