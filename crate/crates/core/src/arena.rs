//! Arenas, weight labels, memory structures, finite-state strategies and
//! the product construction, plus the line-oriented text format.
//!
//! Vertex ids are strings in files and interned to dense indices here; all
//! solver data is keyed by index.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

/// Weight magnitudes above this are rejected at construction time so that
/// all downstream energy arithmetic fits in checked i128 operations.
pub const MAX_WEIGHT: i64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    P0,
    P1,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::P0 => Player::P1,
            Player::P1 => Player::P0,
        }
    }
}

/// Edge annotation: an integer weight or the recharge action `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightLabel {
    Int(i64),
    Recharge,
}

impl WeightLabel {
    pub fn as_int(self) -> Option<i64> {
        match self {
            WeightLabel::Int(w) => Some(w),
            WeightLabel::Recharge => None,
        }
    }

    pub fn is_recharge(self) -> bool {
        matches!(self, WeightLabel::Recharge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: WeightLabel,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ArenaError {
    #[error("line {line}: {detail}")]
    Syntax { line: usize, detail: String },
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}` in edge")]
    UnknownVertex(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("missing initial declaration")]
    MissingInitial,
    #[error("missing `arena` header")]
    MissingHeader,
    #[error("terminal vertex `{0}`")]
    TerminalVertex(String),
    #[error("arena has no vertices")]
    NoVertices,
    #[error("weight magnitude exceeds 2^62")]
    WeightTooLarge,
    #[error("recharge label forbidden in this mode")]
    RechargeForbidden,
    #[error("positive weight {0} forbidden in recharge mode")]
    PositiveWeightInRechargeMode(i64),
}

/// A finite directed game graph with vertex ownership, an initial vertex
/// and one weight label per edge. No vertex may be terminal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedArena {
    names: Vec<String>,
    owners: Vec<Player>,
    initial: usize,
    edges: Vec<Edge>,
    /// Outgoing edge indices per vertex, in declaration order.
    succ: Vec<Vec<usize>>,
}

impl WeightedArena {
    /// Builds an arena from named parts, validating all invariants.
    pub fn build(
        vertices: &[(&str, Player)],
        initial: &str,
        edges: &[(&str, &str, WeightLabel)],
    ) -> Result<WeightedArena, ArenaError> {
        let mut names = Vec::new();
        let mut owners = Vec::new();
        for (name, owner) in vertices {
            if names.iter().any(|n: &String| n == name) {
                return Err(ArenaError::DuplicateVertex(name.to_string()));
            }
            names.push(name.to_string());
            owners.push(*owner);
        }
        if names.is_empty() {
            return Err(ArenaError::NoVertices);
        }
        let find = |id: &str| names.iter().position(|n| n == id);
        let initial = find(initial).ok_or_else(|| ArenaError::UnknownVertex(initial.to_string()))?;

        let mut edge_list = Vec::new();
        let mut succ = vec![Vec::new(); names.len()];
        for (src, dst, label) in edges {
            let s = find(src).ok_or_else(|| ArenaError::UnknownVertex(src.to_string()))?;
            let d = find(dst).ok_or_else(|| ArenaError::UnknownVertex(dst.to_string()))?;
            if let WeightLabel::Int(w) = label {
                if w.unsigned_abs() > MAX_WEIGHT as u64 {
                    return Err(ArenaError::WeightTooLarge);
                }
            }
            if edge_list.iter().any(|e: &Edge| e.src == s && e.dst == d) {
                return Err(ArenaError::DuplicateEdge(src.to_string(), dst.to_string()));
            }
            succ[s].push(edge_list.len());
            edge_list.push(Edge { src: s, dst: d, label: *label });
        }
        for (v, out) in succ.iter().enumerate() {
            if out.is_empty() {
                return Err(ArenaError::TerminalVertex(names[v].clone()));
            }
        }
        Ok(WeightedArena { names, owners, initial, edges: edge_list, succ })
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owners[v]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> Edge {
        self.edges[idx]
    }

    /// Outgoing edge indices of `v` in declaration order.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[v].iter().map(move |&e| self.edges[e].dst)
    }

    pub fn edge_index(&self, src: usize, dst: usize) -> Option<usize> {
        self.succ[src].iter().copied().find(|&e| self.edges[e].dst == dst)
    }

    pub fn weight(&self, src: usize, dst: usize) -> Option<WeightLabel> {
        self.edge_index(src, dst).map(|e| self.edges[e].label)
    }

    /// Largest absolute value among `Int` labels; 0 if there are none.
    pub fn max_abs_weight(&self) -> u64 {
        self.edges
            .iter()
            .filter_map(|e| e.label.as_int())
            .map(|w| w.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// True if some edge carries the recharge label.
    pub fn has_recharge_labels(&self) -> bool {
        self.edges.iter().any(|e| e.label.is_recharge())
    }

    /// Validates recharge mode: every integer label is non-positive.
    pub fn check_recharge_mode(&self) -> Result<(), ArenaError> {
        for e in &self.edges {
            if let WeightLabel::Int(w) = e.label {
                if w > 0 {
                    return Err(ArenaError::PositiveWeightInRechargeMode(w));
                }
            }
        }
        Ok(())
    }

    /// Validates general mode: no recharge labels anywhere.
    pub fn check_no_recharge(&self) -> Result<(), ArenaError> {
        if self.has_recharge_labels() {
            return Err(ArenaError::RechargeForbidden);
        }
        Ok(())
    }

    /// Same arena re-rooted at `v`.
    pub fn with_initial(&self, v: usize) -> WeightedArena {
        let mut a = self.clone();
        a.initial = v;
        a
    }
}

/// Parses the line-oriented arena text format.
///
/// Format: an `arena` header line, then `init <id>`, `vertex <id> p0|p1` and
/// `edge <src> <dst> <int|R>` lines in any order. `#` starts a comment.
pub fn parse_arena(text: &str) -> Result<WeightedArena, ArenaError> {
    let mut header_seen = false;
    let mut init: Option<String> = None;
    let mut vertices: Vec<(String, Player)> = Vec::new();
    let mut edges: Vec<(String, String, WeightLabel)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let mut tok = line.split_whitespace();
        let Some(head) = tok.next() else { continue };
        let syntax = |detail: String| ArenaError::Syntax { line: line_no, detail };
        if !header_seen {
            if head != "arena" {
                return Err(ArenaError::MissingHeader);
            }
            header_seen = true;
            continue;
        }
        match head {
            "init" => {
                let id = tok.next().ok_or_else(|| syntax("init needs a vertex id".into()))?;
                init = Some(id.to_string());
            }
            "vertex" => {
                let id = tok.next().ok_or_else(|| syntax("vertex needs an id".into()))?;
                let owner = match tok.next() {
                    Some("p0") => Player::P0,
                    Some("p1") => Player::P1,
                    other => {
                        return Err(syntax(format!("expected p0|p1, got {:?}", other)));
                    }
                };
                if vertices.iter().any(|(n, _)| n == id) {
                    return Err(ArenaError::DuplicateVertex(id.to_string()));
                }
                vertices.push((id.to_string(), owner));
            }
            "edge" => {
                let src = tok.next().ok_or_else(|| syntax("edge needs a source".into()))?;
                let dst = tok.next().ok_or_else(|| syntax("edge needs a target".into()))?;
                let wtok = tok.next().ok_or_else(|| syntax("edge needs a weight".into()))?;
                let label = if wtok == "R" {
                    WeightLabel::Recharge
                } else {
                    let w: i64 = wtok
                        .parse()
                        .map_err(|_| syntax(format!("bad weight token `{}`", wtok)))?;
                    if w.unsigned_abs() > MAX_WEIGHT as u64 {
                        return Err(ArenaError::WeightTooLarge);
                    }
                    WeightLabel::Int(w)
                };
                edges.push((src.to_string(), dst.to_string(), label));
            }
            // backmap annotations appended by reduction outputs; ignored
            // when the product arena is re-parsed as a plain arena
            "map" => {
                tok.by_ref().for_each(|_| {});
            }
            other => {
                return Err(syntax(format!("unknown directive `{}`", other)));
            }
        }
        if tok.next().is_some() {
            return Err(ArenaError::Syntax { line: line_no, detail: "trailing tokens".into() });
        }
    }
    if !header_seen {
        return Err(ArenaError::MissingHeader);
    }
    let init = init.ok_or(ArenaError::MissingInitial)?;
    let vs: Vec<(&str, Player)> = vertices.iter().map(|(n, p)| (n.as_str(), *p)).collect();
    let es: Vec<(&str, &str, WeightLabel)> =
        edges.iter().map(|(s, d, l)| (s.as_str(), d.as_str(), *l)).collect();
    WeightedArena::build(&vs, &init, &es)
}

/// Renders an arena in the text format; `parse_arena` round-trips it.
pub fn serialize_arena(a: &WeightedArena) -> String {
    let mut out = String::from("arena\n");
    out.push_str(&format!("init {}\n", a.vertex_name(a.initial)));
    for v in 0..a.num_vertices() {
        let p = match a.owner(v) {
            Player::P0 => "p0",
            Player::P1 => "p1",
        };
        out.push_str(&format!("vertex {} {}\n", a.vertex_name(v), p));
    }
    for e in a.edges() {
        let w = match e.label {
            WeightLabel::Int(w) => w.to_string(),
            WeightLabel::Recharge => "R".to_string(),
        };
        out.push_str(&format!(
            "edge {} {} {}\n",
            a.vertex_name(e.src),
            a.vertex_name(e.dst),
            w
        ));
    }
    out
}

/// A finite automaton over arena edges: memory for strategies and for
/// product-arena reductions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryStructure {
    num_states: usize,
    initial: usize,
    /// Flattened `[state * num_edges + edge] -> state`.
    update: Vec<usize>,
    num_edges: usize,
}

impl MemoryStructure {
    /// `update[s * num_edges + e]` must be a valid state for every pair.
    pub fn new(num_states: usize, initial: usize, num_edges: usize, update: Vec<usize>) -> Self {
        assert!(initial < num_states);
        assert_eq!(update.len(), num_states * num_edges);
        assert!(update.iter().all(|&s| s < num_states));
        MemoryStructure { num_states, initial, update, num_edges }
    }

    /// One-state memory for `a` (implements positional strategies).
    pub fn trivial(a: &WeightedArena) -> Self {
        MemoryStructure::new(1, 0, a.num_edges(), vec![0; a.num_edges()])
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial_state(&self) -> usize {
        self.initial
    }

    pub fn update(&self, state: usize, edge_idx: usize) -> usize {
        self.update[state * self.num_edges + edge_idx]
    }

    /// Extended update over a vertex sequence (a path in the arena).
    pub fn run(&self, a: &WeightedArena, path: &[usize]) -> Option<usize> {
        let mut m = self.initial;
        for pair in path.windows(2) {
            let e = a.edge_index(pair[0], pair[1])?;
            m = self.update(m, e);
        }
        Some(m)
    }
}

/// A memory structure plus a next-move function for one player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStateStrategy {
    pub player: Player,
    pub memory: MemoryStructure,
    /// Flattened `[vertex * num_states + state] -> target vertex`, defined
    /// exactly on the owning player's vertices.
    moves: Vec<Option<usize>>,
    num_states: usize,
}

impl FiniteStateStrategy {
    pub fn new(
        a: &WeightedArena,
        player: Player,
        memory: MemoryStructure,
        moves: Vec<Option<usize>>,
    ) -> Self {
        let k = memory.num_states();
        assert_eq!(moves.len(), a.num_vertices() * k);
        for v in 0..a.num_vertices() {
            for m in 0..k {
                match moves[v * k + m] {
                    Some(d) => {
                        assert_eq!(a.owner(v), player, "move on opponent vertex");
                        assert!(a.edge_index(v, d).is_some(), "next_move target is not an edge");
                    }
                    None => assert_ne!(a.owner(v), player, "missing move on own vertex"),
                }
            }
        }
        FiniteStateStrategy { player, memory, moves, num_states: k }
    }

    pub fn next_move(&self, v: usize, state: usize) -> Option<usize> {
        self.moves[v * self.num_states + state]
    }

    /// Positional strategy from a per-vertex choice table.
    pub fn positional(a: &WeightedArena, player: Player, choice: &[Option<usize>]) -> Self {
        FiniteStateStrategy::new(a, player, MemoryStructure::trivial(a), choice.to_vec())
    }
}

/// Result of [`product`]: the expanded arena plus the origin of each
/// product vertex.
#[derive(Debug, Clone)]
pub struct Product {
    pub arena: WeightedArena,
    /// `product vertex -> (original vertex, memory state)`.
    pub back_map: Vec<(usize, usize)>,
}

impl Product {
    /// Product vertex index for `(v, m)` if that pair is reachable.
    pub fn forward(&self, v: usize, m: usize) -> Option<usize> {
        self.back_map.iter().position(|&p| p == (v, m))
    }
}

/// Expanded arena `A x M`, restricted to the pairs reachable from the
/// product initial vertex. Weights come from `relabel(edge, state)` where
/// `state` is the memory state at the edge's source.
pub fn product(
    a: &WeightedArena,
    m: &MemoryStructure,
    mut relabel: impl FnMut(usize, usize) -> WeightLabel,
) -> Product {
    let start = (a.initial(), m.initial_state());
    let mut index: Vec<(usize, usize)> = vec![start];
    let mut queue = vec![0usize];
    let mut edges: Vec<(usize, usize, WeightLabel)> = Vec::new();
    let find = |index: &Vec<(usize, usize)>, key: (usize, usize)| {
        index.iter().position(|&p| p == key)
    };
    while let Some(pi) = queue.pop() {
        let (v, s) = index[pi];
        for &e in a.out_edges(v) {
            let s2 = m.update(s, e);
            let key = (a.edge(e).dst, s2);
            let ti = match find(&index, key) {
                Some(t) => t,
                None => {
                    index.push(key);
                    queue.push(index.len() - 1);
                    index.len() - 1
                }
            };
            edges.push((pi, ti, relabel(e, s)));
        }
    }
    let names: Vec<String> = index
        .iter()
        .map(|&(v, s)| format!("{}@{}", a.vertex_name(v), s))
        .collect();
    let vertices: Vec<(&str, Player)> =
        index.iter().zip(&names).map(|(&(v, _), n)| (n.as_str(), a.owner(v))).collect();
    let edge_refs: Vec<(&str, &str, WeightLabel)> = edges
        .iter()
        .map(|&(s, d, l)| (names[s].as_str(), names[d].as_str(), l))
        .collect();
    let arena = WeightedArena::build(&vertices, &names[0], &edge_refs)
        .expect("product of a valid arena is valid");
    Product { arena, back_map: index }
}

/// Product keeping the original labels.
pub fn product_same_weights(a: &WeightedArena, m: &MemoryStructure) -> Product {
    let labels: Vec<WeightLabel> = a.edges().iter().map(|e| e.label).collect();
    product(a, m, |e, _| labels[e])
}

/// The worked example games; their exact shape is normative for tests.
pub mod fixtures {
    use super::*;

    /// Three-vertex game: keep the energy between zero and five.
    pub fn intro() -> WeightedArena {
        WeightedArena::build(
            &[("v0", Player::P0), ("v1", Player::P0), ("v2", Player::P1)],
            "v0",
            &[
                ("v0", "v1", WeightLabel::Int(-1)),
                ("v1", "v0", WeightLabel::Int(0)),
                ("v0", "v2", WeightLabel::Int(3)),
                ("v2", "v0", WeightLabel::Int(2)),
                ("v1", "v2", WeightLabel::Int(-1)),
                ("v2", "v1", WeightLabel::Int(-3)),
            ],
        )
        .unwrap()
    }

    /// Two-vertex recharge game: the memory lower-bound arena.
    pub fn memlb() -> WeightedArena {
        WeightedArena::build(
            &[("v0", Player::P1), ("v1", Player::P0)],
            "v0",
            &[
                ("v0", "v1", WeightLabel::Int(-1)),
                ("v1", "v1", WeightLabel::Int(-1)),
                ("v1", "v0", WeightLabel::Recharge),
            ],
        )
        .unwrap()
    }

    /// Six-vertex solitaire recharge game with a non-monotone
    /// capacity/average tradeoff.
    pub fn tradeoff() -> WeightedArena {
        WeightedArena::build(
            &[
                ("v0", Player::P0),
                ("v1", Player::P0),
                ("v2", Player::P0),
                ("v3", Player::P0),
                ("v4", Player::P0),
                ("v5", Player::P0),
            ],
            "v0",
            &[
                ("v0", "v0", WeightLabel::Recharge),
                ("v0", "v3", WeightLabel::Int(-3)),
                ("v3", "v4", WeightLabel::Int(0)),
                ("v4", "v5", WeightLabel::Int(0)),
                ("v5", "v0", WeightLabel::Int(0)),
                ("v0", "v1", WeightLabel::Int(0)),
                ("v1", "v2", WeightLabel::Int(0)),
                ("v2", "v0", WeightLabel::Int(-1)),
            ],
        )
        .unwrap()
    }

    /// Directed n-cycle: one recharge edge, the other n-1 edges weigh -W.
    /// The minimal sufficient capacity for this family is (n-1)*W.
    pub fn cycle(n: usize, w: u64) -> WeightedArena {
        assert!(n >= 1);
        let names: Vec<String> = (0..n).map(|i| format!("c{}", i)).collect();
        let vertices: Vec<(&str, Player)> =
            names.iter().map(|n| (n.as_str(), Player::P0)).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            let label = if i == n - 1 {
                WeightLabel::Recharge
            } else {
                WeightLabel::Int(-(w as i64))
            };
            edges.push((names[i].as_str(), names[(i + 1) % n].as_str(), label));
        }
        WeightedArena::build(&vertices, &names[0], &edges).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intro_parses_and_counts() {
        let a = fixtures::intro();
        assert_eq!(a.num_vertices(), 3);
        assert_eq!(a.num_edges(), 6);
        assert_eq!(a.initial(), a.vertex_index("v0").unwrap());
        assert_eq!(a.max_abs_weight(), 3);
    }

    #[test]
    fn smallest_legal_arena() {
        let a = WeightedArena::build(
            &[("v", Player::P0)],
            "v",
            &[("v", "v", WeightLabel::Int(0))],
        )
        .unwrap();
        assert_eq!(a.num_vertices(), 1);
    }

    #[test]
    fn terminal_vertex_rejected() {
        let text = "arena\ninit a\nvertex a p0\nvertex b p1\nedge a b 1\n";
        assert_eq!(
            parse_arena(text).unwrap_err(),
            ArenaError::TerminalVertex("b".into())
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "arena\nvertex a p0\nedge a a x\n";
        match parse_arena(text) {
            Err(ArenaError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected syntax error, got {:?}", other),
        }
    }

    #[test]
    fn missing_initial_rejected() {
        let text = "arena\nvertex a p0\nedge a a 0\n";
        assert_eq!(parse_arena(text).unwrap_err(), ArenaError::MissingInitial);
    }

    #[test]
    fn round_trip_fixtures() {
        for a in [fixtures::intro(), fixtures::memlb(), fixtures::tradeoff(), fixtures::cycle(4, 7)]
        {
            let text = serialize_arena(&a);
            let b = parse_arena(&text).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn recharge_label_renders_as_r_token() {
        let a = fixtures::memlb();
        let text = serialize_arena(&a);
        assert!(text.contains("edge v1 v0 R"));
    }

    #[test]
    fn max_abs_weight_examples() {
        assert_eq!(fixtures::intro().max_abs_weight(), 3);
        assert_eq!(fixtures::cycle(4, 7).max_abs_weight(), 7);
        let a = WeightedArena::build(
            &[("v", Player::P0)],
            "v",
            &[("v", "v", WeightLabel::Recharge)],
        )
        .unwrap();
        assert_eq!(a.max_abs_weight(), 0);
    }

    #[test]
    fn trivial_product_is_isomorphic() {
        let a = fixtures::intro();
        let p = product_same_weights(&a, &MemoryStructure::trivial(&a));
        assert_eq!(p.arena.num_vertices(), a.num_vertices());
        assert_eq!(p.arena.num_edges(), a.num_edges());
        for (pi, &(v, s)) in p.back_map.iter().enumerate() {
            assert_eq!(s, 0);
            assert_eq!(p.arena.owner(pi), a.owner(v));
        }
    }

    #[test]
    fn product_prunes_unreachable_pairs() {
        let a = fixtures::memlb();
        // two-state memory that never leaves state 0
        let m = MemoryStructure::new(2, 0, a.num_edges(), vec![0, 0, 0, 1, 1, 1]);
        let p = product_same_weights(&a, &m);
        assert!(p.back_map.iter().all(|&(_, s)| s == 0));
        assert_eq!(p.arena.num_vertices(), 2);
    }
}
