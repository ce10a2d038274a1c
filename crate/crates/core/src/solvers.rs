//! Core decision procedures: safety attractors, three-color max-parity
//! (Zielonka), mean-payoff threshold and value, lower/upper-bounded energy
//! safety, and countdown games.
//!
//! Each solver returns the winner from the initial vertex and, where the
//! algorithm yields one, a positional (product-level) winning strategy.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::arena::{
    ArenaError, FiniteStateStrategy, MemoryStructure, Player, WeightedArena,
};
use crate::evaluation::{rat, Rational};
use crate::reductions::EnergyMemory;

/// Vertex coloring with colors in {0, 1, 2} for max-parity objectives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring(Vec<u8>);

impl Coloring {
    pub fn new(colors: Vec<u8>) -> Result<Self, SolveError> {
        if colors.iter().any(|&c| c > 2) {
            return Err(SolveError::BadColor);
        }
        Ok(Coloring(colors))
    }

    pub fn color(&self, v: usize) -> u8 {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses `color <vertex> <0|1|2>` lines; every vertex must be covered.
    pub fn parse(a: &WeightedArena, text: &str) -> Result<Self, SolveError> {
        let mut colors: Vec<Option<u8>> = vec![None; a.num_vertices()];
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let mut tok = line.split_whitespace();
            let Some(head) = tok.next() else { continue };
            let bad = || SolveError::ColoringSyntax { line: i + 1 };
            if head != "color" {
                return Err(bad());
            }
            let id = tok.next().ok_or_else(bad)?;
            let v = a.vertex_index(id).ok_or_else(bad)?;
            let c: u8 = tok.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if c > 2 || tok.next().is_some() {
                return Err(bad());
            }
            colors[v] = Some(c);
        }
        let colors: Option<Vec<u8>> = colors.into_iter().collect();
        colors.map(Coloring).ok_or(SolveError::IncompleteColoring)
    }

    pub fn serialize(&self, a: &WeightedArena) -> String {
        let mut out = String::new();
        for v in 0..self.0.len() {
            out.push_str(&format!("color {} {}\n", a.vertex_name(v), self.0[v]));
        }
        out
    }
}

/// Initial energy for a countdown game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountdownBudget(pub u64);

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error("color out of range (only 0, 1, 2 allowed)")]
    BadColor,
    #[error("coloring syntax error at line {line}")]
    ColoringSyntax { line: usize },
    #[error("coloring does not cover every vertex")]
    IncompleteColoring,
    #[error("countdown shape rule {rule} violated: {detail}")]
    CountdownShape { rule: u8, detail: String },
}

/// Solver-specific winning witness, exportable as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Winning regions of both players (vertex names).
    WinningRegions { p0: Vec<String>, p1: Vec<String> },
    /// Energy progress measure of the winner's side; `None` is top.
    ProgressMeasure(Vec<(String, Option<i128>)>),
    /// Reachable countdown table entries `(vertex, remaining, player0 wins)`.
    CountdownTable(Vec<(String, u64, bool)>),
}

impl Certificate {
    pub fn render(&self) -> String {
        let mut out = String::new();
        match self {
            Certificate::WinningRegions { p0, p1 } => {
                for v in p0 {
                    out.push_str(&format!("win p0 {}\n", v));
                }
                for v in p1 {
                    out.push_str(&format!("win p1 {}\n", v));
                }
            }
            Certificate::ProgressMeasure(m) => {
                for (v, f) in m {
                    match f {
                        Some(x) => out.push_str(&format!("measure {} {}\n", v, x)),
                        None => out.push_str(&format!("measure {} top\n", v)),
                    }
                }
            }
            Certificate::CountdownTable(t) => {
                for (v, r, w) in t {
                    let who = if *w { "p0" } else { "p1" };
                    out.push_str(&format!("table {} {} {}\n", v, r, who));
                }
            }
        }
        out
    }
}

/// Winner from the initial vertex plus an optional winning strategy over
/// the solved arena.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub winner: Player,
    pub strategy: Option<FiniteStateStrategy>,
    pub certificate: Certificate,
}

fn predecessors(a: &WeightedArena) -> Vec<Vec<usize>> {
    let mut preds = vec![Vec::new(); a.num_vertices()];
    for (ei, e) in a.edges().iter().enumerate() {
        preds[e.dst].push(ei);
    }
    preds
}

/// Least set containing `target` from which `player` can force reaching
/// `target` (restricted to `mask` when given).
pub fn attractor(a: &WeightedArena, player: Player, target: &[bool]) -> Vec<bool> {
    let mask = vec![true; a.num_vertices()];
    attractor_in(a, &predecessors(a), &mask, player, target).0
}

/// Attractor within a subgame, with the forcing edge choice for `player`
/// on attracted vertices outside the target.
fn attractor_in(
    a: &WeightedArena,
    preds: &[Vec<usize>],
    mask: &[bool],
    player: Player,
    target: &[bool],
) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = a.num_vertices();
    let mut attr = vec![false; n];
    let mut choice: Vec<Option<usize>> = vec![None; n];
    let mut out_count = vec![0usize; n];
    for v in 0..n {
        if mask[v] {
            out_count[v] = a.out_edges(v).iter().filter(|&&e| mask[a.edge(e).dst]).count();
        }
    }
    let mut queue: Vec<usize> = Vec::new();
    for v in 0..n {
        if mask[v] && target[v] {
            attr[v] = true;
            queue.push(v);
        }
    }
    while let Some(v) = queue.pop() {
        for &ei in &preds[v] {
            let u = a.edge(ei).src;
            if !mask[u] || attr[u] {
                continue;
            }
            if a.owner(u) == player {
                attr[u] = true;
                choice[u] = Some(a.edge(ei).dst);
                queue.push(u);
            } else {
                out_count[u] -= 1;
                if out_count[u] == 0 {
                    attr[u] = true;
                    queue.push(u);
                }
            }
        }
    }
    (attr, choice)
}

struct ZlkResult {
    win: [Vec<bool>; 2],
    strat: [Vec<Option<usize>>; 2],
}

fn player_of(i: usize) -> Player {
    if i == 0 {
        Player::P0
    } else {
        Player::P1
    }
}

fn zielonka(
    a: &WeightedArena,
    preds: &[Vec<usize>],
    coloring: &Coloring,
    mask: &[bool],
) -> ZlkResult {
    let n = a.num_vertices();
    let empty = ZlkResult {
        win: [vec![false; n], vec![false; n]],
        strat: [vec![None; n], vec![None; n]],
    };
    let Some(d) = (0..n).filter(|&v| mask[v]).map(|v| coloring.color(v)).max() else {
        return empty;
    };
    let i = (d % 2) as usize; // player favored by the top color
    let target: Vec<bool> = (0..n).map(|v| mask[v] && coloring.color(v) == d).collect();
    let (attr_a, astrat) = attractor_in(a, preds, mask, player_of(i), &target);
    let sub: Vec<bool> = (0..n).map(|v| mask[v] && !attr_a[v]).collect();
    let rec1 = zielonka(a, preds, coloring, &sub);
    if rec1.win[1 - i].iter().all(|&b| !b) {
        // player i wins the whole subgame
        let mut res = empty;
        res.win[i] = mask.to_vec();
        res.strat[i] = rec1.strat[i].clone();
        for v in 0..n {
            if mask[v] && attr_a[v] && a.owner(v) == player_of(i) {
                res.strat[i][v] = if target[v] {
                    // top-color vertex: any successor inside the subgame
                    a.successors(v).find(|&u| mask[u])
                } else {
                    astrat[v]
                };
            }
        }
        return res;
    }
    let (attr_b, bstrat) = attractor_in(a, preds, mask, player_of(1 - i), &rec1.win[1 - i]);
    let sub2: Vec<bool> = (0..n).map(|v| mask[v] && !attr_b[v]).collect();
    let rec2 = zielonka(a, preds, coloring, &sub2);
    let mut res = empty;
    res.win[i] = rec2.win[i].clone();
    res.strat[i] = rec2.strat[i].clone();
    for v in 0..n {
        if mask[v] && attr_b[v] {
            res.win[1 - i][v] = true;
        } else if rec2.win[1 - i][v] {
            res.win[1 - i][v] = true;
        }
    }
    res.strat[1 - i] = rec2.strat[1 - i].clone();
    for v in 0..n {
        if mask[v] && attr_b[v] && a.owner(v) == player_of(1 - i) {
            res.strat[1 - i][v] = if rec1.win[1 - i][v] {
                rec1.strat[1 - i][v]
            } else {
                bstrat[v]
            };
        }
    }
    res
}

/// Winner of the max-parity objective with colors in {0,1,2}; the returned
/// strategy is positional.
pub fn solve_parity3(a: &WeightedArena, coloring: &Coloring) -> Result<SolveResult, SolveError> {
    if coloring.len() != a.num_vertices() {
        return Err(SolveError::IncompleteColoring);
    }
    let preds = predecessors(a);
    let mask = vec![true; a.num_vertices()];
    let res = zielonka(a, &preds, coloring, &mask);
    debug_assert!((0..a.num_vertices()).all(|v| res.win[0][v] != res.win[1][v]));
    let winner = if res.win[0][a.initial()] { Player::P0 } else { Player::P1 };
    let wi = if winner == Player::P0 { 0 } else { 1 };
    let strategy = positional_with_fallback(a, winner, &res.strat[wi]);
    let names = |side: &[bool]| {
        (0..a.num_vertices())
            .filter(|&v| side[v])
            .map(|v| a.vertex_name(v).to_string())
            .collect()
    };
    Ok(SolveResult {
        winner,
        strategy: Some(strategy),
        certificate: Certificate::WinningRegions { p0: names(&res.win[0]), p1: names(&res.win[1]) },
    })
}

/// Positional strategy from a partial choice map; vertices without a
/// recorded choice fall back to their first successor.
fn positional_with_fallback(
    a: &WeightedArena,
    player: Player,
    choice: &[Option<usize>],
) -> FiniteStateStrategy {
    let moves: Vec<Option<usize>> = (0..a.num_vertices())
        .map(|v| {
            if a.owner(v) == player {
                Some(choice[v].unwrap_or_else(|| a.successors(v).next().unwrap()))
            } else {
                None
            }
        })
        .collect();
    FiniteStateStrategy::positional(a, player, &moves)
}

/// Integer-weighted view of an arena for the energy lifting.
struct IntGame {
    owners: Vec<Player>,
    succ: Vec<Vec<(usize, i128)>>,
}

impl IntGame {
    fn from_arena(a: &WeightedArena, mut weight: impl FnMut(i64) -> i128) -> IntGame {
        let succ = (0..a.num_vertices())
            .map(|v| {
                a.out_edges(v)
                    .iter()
                    .map(|&e| {
                        let edge = a.edge(e);
                        let w = edge.label.as_int().expect("integer-weighted arena");
                        (edge.dst, weight(w))
                    })
                    .collect()
            })
            .collect();
        IntGame { owners: (0..a.num_vertices()).map(|v| a.owner(v)).collect(), succ }
    }
}

/// Least energy progress measure: `f[v]` is the minimal initial credit with
/// which `max_player` keeps the running sum non-negative from `v`; `None`
/// is top (max_player loses the energy game from there).
///
/// Also returns, per max_player vertex with finite measure, the successor
/// realizing it (smallest vertex index among optima).
fn energy_progress(g: &IntGame, max_player: Player) -> (Vec<Option<i128>>, Vec<Option<usize>>) {
    let n = g.owners.len();
    let w_max: i128 = g
        .succ
        .iter()
        .flat_map(|s| s.iter().map(|&(_, w)| w.abs()))
        .max()
        .unwrap_or(0);
    let top_bound = (n as i128).checked_mul(w_max).expect("energy bound overflow");
    let load = |fu: Option<i128>, w: i128| -> Option<i128> {
        let fu = fu?;
        let x = fu.checked_sub(w).expect("energy arithmetic overflow").max(0);
        if x > top_bound {
            None
        } else {
            Some(x)
        }
    };
    // None = top; ordering: Some(x) < None
    let lt = |a: Option<i128>, b: Option<i128>| match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        (None, _) => false,
    };
    let mut f: Vec<Option<i128>> = vec![Some(0); n];
    let needed = |f: &[Option<i128>], v: usize| -> Option<i128> {
        let mut it = g.succ[v].iter().map(|&(u, w)| load(f[u], w));
        let first = it.next().expect("no terminal vertices");
        if g.owners[v] == max_player {
            it.fold(first, |acc, x| if lt(x, acc) { x } else { acc })
        } else {
            it.fold(first, |acc, x| if lt(acc, x) { x } else { acc })
        }
    };
    // predecessor lists over the int game
    let mut preds = vec![Vec::new(); n];
    for (v, out) in g.succ.iter().enumerate() {
        for &(u, _) in out {
            preds[u].push(v);
        }
    }
    let mut in_queue = vec![true; n];
    let mut queue: Vec<usize> = (0..n).collect();
    while let Some(v) = queue.pop() {
        in_queue[v] = false;
        let want = needed(&f, v);
        if lt(f[v], want) {
            f[v] = want;
            for &u in &preds[v] {
                if !in_queue[u] {
                    in_queue[u] = true;
                    queue.push(u);
                }
            }
        }
    }
    let mut choice = vec![None; n];
    for v in 0..n {
        if g.owners[v] == max_player && f[v].is_some() {
            let mut best: Option<(Option<i128>, usize)> = None;
            for &(u, w) in &g.succ[v] {
                let x = load(f[u], w);
                let better = match &best {
                    None => true,
                    Some((bx, bu)) => lt(x, *bx) || (x == *bx && u < *bu),
                };
                if better {
                    best = Some((x, u));
                }
            }
            choice[v] = best.map(|(_, u)| u);
        }
    }
    (f, choice)
}

/// Does Player 0 (the minimizer) win `limsup average <= t` from `from`?
/// Returns the winner's positional choice map alongside.
fn mp_threshold_solve(
    a: &WeightedArena,
    from: usize,
    t: Rational,
) -> (Player, Vec<Option<usize>>, Vec<Option<i128>>) {
    let p = *t.numer();
    let q = *t.denom();
    let n = a.num_vertices() as i128;
    let scaled = |w: i64| {
        (w as i128)
            .checked_mul(q)
            .and_then(|x| x.checked_sub(p))
            .expect("threshold scaling overflow")
    };
    // Player 1 wins strictly (value > t) iff she wins the energy game with
    // weights n*(q*w - p) - 1; Player 0 wins (value <= t) iff she wins the
    // energy game with weights -(q*w - p). Exactly one side holds.
    let g1 = IntGame::from_arena(a, |w| {
        scaled(w).checked_mul(n).and_then(|x| x.checked_sub(1)).expect("scaling overflow")
    });
    let (f1, c1) = energy_progress(&g1, Player::P1);
    let g0 = IntGame::from_arena(a, |w| -scaled(w));
    let (f0, c0) = energy_progress(&g0, Player::P0);
    let p1_wins = f1[from].is_some();
    let p0_wins = f0[from].is_some();
    debug_assert!(p0_wins != p1_wins, "mean-payoff determinacy broken");
    if p0_wins {
        (Player::P0, c0, f0)
    } else {
        (Player::P1, c1, f1)
    }
}

/// Winner of the lower-bounded energy objective with initial energy 0:
/// Player 0 wins iff her minimal initial credit is zero. The loser side
/// gets the positional spoiler strategy read off the same measure.
pub fn solve_energy_l(a: &WeightedArena) -> Result<SolveResult, SolveError> {
    a.check_no_recharge()?;
    let g = IntGame::from_arena(a, |w| w as i128);
    let (f, choice) = energy_progress(&g, Player::P0);
    let winner = if f[a.initial()] == Some(0) { Player::P0 } else { Player::P1 };
    let strategy = if winner == Player::P0 {
        positional_with_fallback(a, Player::P0, &choice)
    } else {
        // spoiler: maximize the credit the opponent still needs
        let lt = |x: Option<i128>, y: Option<i128>| match (x, y) {
            (Some(p), Some(q)) => p < q,
            (Some(_), None) => true,
            (None, _) => false,
        };
        let mut spoil = vec![None; a.num_vertices()];
        for v in 0..a.num_vertices() {
            if a.owner(v) != Player::P1 {
                continue;
            }
            let mut best: Option<(Option<i128>, usize)> = None;
            for &(u, w) in &g.succ[v] {
                let x = f[u].map(|fu| (fu - w).max(0));
                if best.as_ref().map_or(true, |&(bx, _)| lt(bx, x)) {
                    best = Some((x, u));
                }
            }
            spoil[v] = best.map(|(_, u)| u);
        }
        positional_with_fallback(a, Player::P1, &spoil)
    };
    let cert = Certificate::ProgressMeasure(
        (0..a.num_vertices()).map(|v| (a.vertex_name(v).to_string(), f[v])).collect(),
    );
    Ok(SolveResult { winner, strategy: Some(strategy), certificate: cert })
}

/// Winner of the mean-payoff threshold objective: Player 0 (minimizer)
/// wins iff she can force `limsup average <= t`.
pub fn solve_mean_payoff_threshold(
    a: &WeightedArena,
    t: Rational,
) -> Result<SolveResult, SolveError> {
    a.check_no_recharge()?;
    let (winner, choice, f) = mp_threshold_solve(a, a.initial(), t);
    let strategy = positional_with_fallback(a, winner, &choice);
    let cert = Certificate::ProgressMeasure(
        (0..a.num_vertices()).map(|v| (a.vertex_name(v).to_string(), f[v])).collect(),
    );
    Ok(SolveResult { winner, strategy: Some(strategy), certificate: cert })
}

fn floor_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    let d = a / b;
    if a % b != 0 && a < 0 {
        d - 1
    } else {
        d
    }
}

/// The unique value `v` such that Player 0 wins the mean-payoff threshold
/// game for `t` iff `t >= v`. Exact: binary search narrows the window below
/// `1/|V|^2`, then the unique denominator-bounded rational in it is read
/// off directly.
pub fn mean_payoff_value(a: &WeightedArena, vertex: usize) -> Result<Rational, SolveError> {
    a.check_no_recharge()?;
    let n = a.num_vertices() as i128;
    let w = a.max_abs_weight() as i128;
    let mut lo = rat(-w - 1, 1); // Player 0 loses at lo
    let mut hi = rat(w, 1); // Player 0 wins at hi
    let gap = rat(1, n * n);
    while hi - lo >= gap {
        let mid = (lo + hi) / rat(2, 1);
        let (winner, _, _) = mp_threshold_solve(a, vertex, mid);
        if winner == Player::P0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // value lies in (lo, hi] and is the only rational there with
    // denominator <= n
    for q in 1..=n {
        let p = floor_div(*hi.numer() * q, *hi.denom());
        let cand = rat(p, q);
        if cand > lo {
            return Ok(cand);
        }
    }
    unreachable!("window always contains a denominator-bounded rational");
}

/// Winner of the lower- and upper-bounded energy objective with initial
/// energy 0, as a safety game on the energy-counter product. The winner's
/// strategy has at most `cap + 2` memory states.
pub fn solve_energy_lu(a: &WeightedArena, cap: u64) -> Result<SolveResult, SolveError> {
    a.check_no_recharge()?;
    let mem = EnergyMemory::bounded_lu(a, cap)?;
    solve_energy_safety(a, mem)
}

/// Winner of the recharge objective (keep `EL_cap >= 0`), as a safety game
/// on the recharge-counter product.
pub fn solve_recharge(a: &WeightedArena, cap: u64) -> Result<SolveResult, SolveError> {
    a.check_recharge_mode()?;
    let mem = EnergyMemory::recharge(a, cap)?;
    solve_energy_safety(a, mem)
}

fn solve_energy_safety(a: &WeightedArena, mem: EnergyMemory) -> Result<SolveResult, SolveError> {
    let prod = crate::arena::product_same_weights(a, &mem.memory);
    let pa = &prod.arena;
    let bot: Vec<bool> = prod.back_map.iter().map(|&(_, s)| s == mem.bot_state()).collect();
    let preds = predecessors(pa);
    let mask = vec![true; pa.num_vertices()];
    let (attr, p1_choice) = attractor_in(pa, &preds, &mask, Player::P1, &bot);
    let p0_wins = !attr[pa.initial()];
    let winner = if p0_wins { Player::P0 } else { Player::P1 };

    let k = mem.memory.num_states();
    let mut moves: Vec<Option<usize>> = vec![None; a.num_vertices() * k];
    for v in 0..a.num_vertices() {
        if a.owner(v) != winner {
            continue;
        }
        for s in 0..k {
            moves[v * k + s] = Some(a.successors(v).next().unwrap());
        }
    }
    for (pi, &(v, s)) in prod.back_map.iter().enumerate() {
        if a.owner(v) != winner {
            continue;
        }
        let dst = if p0_wins {
            if attr[pi] {
                continue;
            }
            // stay inside the safe region
            pa.successors(pi).find(|&u| !attr[u])
        } else {
            p1_choice[pi]
        };
        if let Some(u) = dst {
            moves[v * k + s] = Some(prod.back_map[u].0);
        }
    }
    let strategy = FiniteStateStrategy::new(a, winner, mem.memory.clone(), moves);
    let names = |f: &dyn Fn(usize) -> bool| {
        (0..pa.num_vertices())
            .filter(|&p| f(p))
            .map(|p| pa.vertex_name(p).to_string())
            .collect::<Vec<_>>()
    };
    Ok(SolveResult {
        winner,
        strategy: Some(strategy),
        certificate: Certificate::WinningRegions {
            p0: names(&|p| !attr[p]),
            p1: names(&|p| attr[p]),
        },
    })
}

pub(crate) struct CountdownShape {
    pub(crate) sink: usize,
}

pub(crate) fn validate_countdown(a: &WeightedArena) -> Result<CountdownShape, SolveError> {
    let shape_err = |rule: u8, detail: String| SolveError::CountdownShape { rule, detail };
    a.check_no_recharge()
        .map_err(|_| shape_err(4, "recharge labels are not allowed".into()))?;
    if a.owner(a.initial()) != Player::P0 {
        return Err(shape_err(1, "initial vertex must belong to Player 0".into()));
    }
    let sinks: Vec<usize> = (0..a.num_vertices())
        .filter(|&v| a.owner(v) == Player::P1 && a.edge_index(v, v).is_some())
        .collect();
    let [sink] = sinks[..] else {
        return Err(shape_err(1, "need exactly one Player 1 vertex with a self loop".into()));
    };
    for e in a.edges() {
        let w = e.label.as_int().unwrap();
        let edge_name =
            || format!("{} -> {}", a.vertex_name(e.src), a.vertex_name(e.dst));
        if e.src == sink {
            if e.dst != sink || w != 0 {
                return Err(shape_err(2, format!("sink edge {} must be its zero self loop", edge_name())));
            }
        } else if a.owner(e.src) == Player::P0 {
            if e.dst == sink {
                if w != 0 {
                    return Err(shape_err(4, format!("edge {} to the sink must weigh 0", edge_name())));
                }
            } else if a.owner(e.dst) != Player::P1 {
                return Err(shape_err(2, format!("edge {} must enter a Player 1 vertex", edge_name())));
            } else if w >= 0 {
                return Err(shape_err(3, format!("edge {} must have negative weight", edge_name())));
            }
        } else {
            // Player 1 non-sink vertex
            if a.owner(e.dst) != Player::P0 {
                return Err(shape_err(2, format!("edge {} must return to a Player 0 vertex", edge_name())));
            }
            if w != 0 {
                return Err(shape_err(4, format!("edge {} must weigh 0", edge_name())));
            }
        }
    }
    for v in 0..a.num_vertices() {
        if a.owner(v) == Player::P0 && a.edge_index(v, sink).is_none() {
            return Err(shape_err(2, format!("vertex {} has no edge to the sink", a.vertex_name(v))));
        }
        if a.owner(v) == Player::P0 {
            let mut ws: Vec<i64> =
                a.out_edges(v).iter().map(|&e| a.edge(e).label.as_int().unwrap()).collect();
            ws.sort_unstable();
            if ws.windows(2).any(|p| p[0] == p[1]) {
                return Err(shape_err(3, format!("vertex {} has two outgoing edges with the same weight", a.vertex_name(v))));
            }
        }
    }
    Ok(CountdownShape { sink })
}

fn countdown_win(
    a: &WeightedArena,
    sink: usize,
    memo: &mut BTreeMap<(usize, i64), bool>,
    v: usize,
    r: i64,
) -> bool {
    if let Some(&w) = memo.get(&(v, r)) {
        return w;
    }
    let res = if v == sink {
        r == 0
    } else if a.owner(v) == Player::P0 {
        a.out_edges(v).iter().any(|&e| {
            let edge = a.edge(e);
            let r2 = r + edge.label.as_int().unwrap();
            r2 >= 0 && countdown_win(a, sink, memo, edge.dst, r2)
        })
    } else {
        a.out_edges(v).iter().all(|&e| countdown_win(a, sink, memo, a.edge(e).dst, r))
    };
    memo.insert((v, r), res);
    res
}

/// Countdown game: Player 0 wins iff she can reach the sink with the
/// budget spent to exactly zero. The arena must satisfy the countdown
/// shape rules, which are validated first.
pub fn solve_countdown(
    a: &WeightedArena,
    budget: CountdownBudget,
) -> Result<SolveResult, SolveError> {
    let shape = validate_countdown(a)?;
    let c = budget.0 as i64;
    let mut memo = BTreeMap::new();
    let p0_wins = countdown_win(a, shape.sink, &mut memo, a.initial(), c);
    let winner = if p0_wins { Player::P0 } else { Player::P1 };

    // budget-tracking strategy; only materialized for desk-scale budgets
    let strategy = if c <= (1 << 20) {
        let k = (c as usize) + 2; // remaining budgets 0..=c plus a dead state
        let dead = k - 1;
        let ne = a.num_edges();
        let mut update = vec![dead; k * ne];
        for s in 0..=c as usize {
            for (ei, e) in a.edges().iter().enumerate() {
                let r2 = s as i64 + e.label.as_int().unwrap();
                update[s * ne + ei] =
                    if (0..=c).contains(&r2) { r2 as usize } else { dead };
            }
        }
        let memory = MemoryStructure::new(k, c as usize, ne, update);
        let mut moves: Vec<Option<usize>> = vec![None; a.num_vertices() * k];
        for v in 0..a.num_vertices() {
            if a.owner(v) != winner {
                continue;
            }
            for s in 0..k {
                let pick = if s == dead {
                    None
                } else {
                    let r = s as i64;
                    a.out_edges(v)
                        .iter()
                        .map(|&e| a.edge(e))
                        .find(|edge| {
                            let r2 = r + edge.label.as_int().unwrap();
                            r2 >= 0
                                && countdown_win(a, shape.sink, &mut memo, edge.dst, r2)
                                    == p0_wins
                        })
                        .map(|edge| edge.dst)
                };
                moves[v * k + s] =
                    Some(pick.unwrap_or_else(|| a.successors(v).next().unwrap()));
            }
        }
        Some(FiniteStateStrategy::new(a, winner, memory, moves))
    } else {
        None
    };
    let table = memo
        .iter()
        .map(|(&(v, r), &w)| (a.vertex_name(v).to_string(), r as u64, w))
        .collect();
    Ok(SolveResult { winner, strategy, certificate: Certificate::CountdownTable(table) })
}
