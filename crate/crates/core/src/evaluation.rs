//! Exact evaluation of energy levels and long-run objective values on play
//! prefixes and lassos. Everything is computed symbolically from the cycle
//! structure; no floating point, no truncation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_rational::Ratio;
use thiserror::Error;

use crate::arena::{WeightLabel, WeightedArena};

/// Exact fraction used for all averages, thresholds and game values.
pub type Rational = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rational {
    Ratio::new(n, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationReason {
    LowerBound,
    UpperBound,
    NegativeRecharge,
}

/// Value of a long-run objective on a play: a finite rational, divergence,
/// or a bound violation at the earliest offending prefix length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveValue {
    Finite(Rational),
    PlusInfinity,
    Violated { reason: ViolationReason, at: usize },
}

impl ObjectiveValue {
    pub fn finite(self) -> Option<Rational> {
        match self {
            ObjectiveValue::Finite(q) => Some(q),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ObjectiveValue::Finite(_) => 0,
            ObjectiveValue::PlusInfinity => 1,
            ObjectiveValue::Violated { .. } => 2,
        }
    }
}

/// Total order with Finite < PlusInfinity < Violated; smaller is better
/// for Player 0.
impl Ord for ObjectiveValue {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        use ObjectiveValue::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Violated { reason: r1, at: a1 }, Violated { reason: r2, at: a2 }) => {
                (*r1 as u8, a1).cmp(&(*r2 as u8, a2))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for ObjectiveValue {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("vertex sequence is not a path: no edge at position {0}")]
    NotAPath(usize),
    #[error("recharge edge at position {0}; use recharge_energy_level")]
    RechargeEdge(usize),
    #[error("objective mode does not match the arena labels")]
    ModeMismatch,
    #[error("lasso cycle is empty")]
    EmptyCycle,
    #[error("lasso does not start at the initial vertex")]
    NotAtInitial,
    #[error("empty vertex sequence")]
    EmptyPath,
    #[error("bad lasso syntax: {0}")]
    BadSyntax(String),
    #[error("unknown vertex `{0}` in lasso")]
    UnknownVertex(String),
}

/// Ultimately periodic play as prefix plus non-empty cycle. The prefix may
/// be empty, in which case the cycle starts at the arena's initial vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Lasso {
    pub fn new(prefix: Vec<usize>, cycle: Vec<usize>) -> Self {
        Lasso { prefix, cycle }
    }

    /// Checks that all seams (inside the prefix, prefix to cycle, and
    /// cycle end back to cycle start) are arena edges.
    pub fn validate(&self, a: &WeightedArena) -> Result<(), EvalError> {
        if self.cycle.is_empty() {
            return Err(EvalError::EmptyCycle);
        }
        let first = *self.prefix.first().unwrap_or(&self.cycle[0]);
        if first != a.initial() {
            return Err(EvalError::NotAtInitial);
        }
        let mut pos = 0;
        let mut check = |u: usize, v: usize| -> Result<(), EvalError> {
            if a.edge_index(u, v).is_none() {
                return Err(EvalError::NotAPath(pos));
            }
            pos += 1;
            Ok(())
        };
        for w in self.prefix.windows(2) {
            check(w[0], w[1])?;
        }
        if let Some(&last) = self.prefix.last() {
            check(last, self.cycle[0])?;
        }
        for w in self.cycle.windows(2) {
            check(w[0], w[1])?;
        }
        check(*self.cycle.last().unwrap(), self.cycle[0])?;
        Ok(())
    }

    /// Vertex at play position `i`.
    pub fn vertex_at(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Edge label taken between positions `i` and `i+1`.
    pub fn label_at(&self, a: &WeightedArena, i: usize) -> WeightLabel {
        let e = a
            .edge_index(self.vertex_at(i), self.vertex_at(i + 1))
            .expect("validated lasso");
        a.edge(e).label
    }

    /// True if some edge of the cycle part (including the closing seam)
    /// carries the recharge label.
    pub fn cycle_has_recharge(&self, a: &WeightedArena) -> bool {
        let p = self.prefix.len();
        (p..p + self.cycle.len()).any(|i| self.label_at(a, i).is_recharge())
    }

    /// Net integer weight of one cycle traversal; `None` if it has an
    /// R-edge.
    pub fn cycle_net_weight(&self, a: &WeightedArena) -> Option<i128> {
        let p = self.prefix.len();
        let mut sum: i128 = 0;
        for i in p..p + self.cycle.len() {
            sum += self.label_at(a, i).as_int()? as i128;
        }
        Some(sum)
    }
}

/// Accumulated weight of a path's edges; a single vertex has level 0.
pub fn energy_level(a: &WeightedArena, prefix: &[usize]) -> Result<i128, EvalError> {
    if prefix.is_empty() {
        return Err(EvalError::EmptyPath);
    }
    let mut sum: i128 = 0;
    for (i, w) in prefix.windows(2).enumerate() {
        let e = a.edge_index(w[0], w[1]).ok_or(EvalError::NotAPath(i))?;
        match a.edge(e).label {
            WeightLabel::Int(x) => sum += x as i128,
            WeightLabel::Recharge => return Err(EvalError::RechargeEdge(i)),
        }
    }
    Ok(sum)
}

/// `cap` plus the energy of the longest R-free suffix; a play starts with
/// energy level `cap` and every R-edge resets to it.
pub fn recharge_energy_level(
    a: &WeightedArena,
    cap: u64,
    prefix: &[usize],
) -> Result<i128, EvalError> {
    if prefix.is_empty() {
        return Err(EvalError::EmptyPath);
    }
    a.check_recharge_mode().map_err(|_| EvalError::ModeMismatch)?;
    let mut lvl: i128 = cap as i128;
    for (i, w) in prefix.windows(2).enumerate() {
        let e = a.edge_index(w[0], w[1]).ok_or(EvalError::NotAPath(i))?;
        match a.edge(e).label {
            WeightLabel::Int(x) => lvl += x as i128,
            WeightLabel::Recharge => lvl = cap as i128,
        }
    }
    Ok(lvl)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AvgEnergyMode {
    Plain,
    RechargeWith(u64),
}

/// Long-run average of the (recharge) energy levels of a lasso.
///
/// Plain mode tracks the lower bound of the plain energy level; recharge
/// mode tracks `EL_cap >= 0`. Violations carry the earliest offending
/// prefix length, found symbolically even when the drift only goes
/// negative far beyond the scanned window.
pub fn avg_energy_of_lasso(
    a: &WeightedArena,
    l: &Lasso,
    mode: AvgEnergyMode,
) -> Result<ObjectiveValue, EvalError> {
    l.validate(a)?;
    let p = l.prefix.len();
    let c = l.cycle.len();
    let scan = p + 2 * c;
    match mode {
        AvgEnergyMode::Plain => {
            // reject recharge labels anywhere on the lasso
            for i in 0..scan {
                if l.label_at(a, i).is_recharge() {
                    return Err(EvalError::ModeMismatch);
                }
            }
            let levels = level_sequence(a, l, scan, None);
            if let Some(v) =
                earliest_negative(&levels, p, c, l.cycle_net_weight(a).unwrap())
            {
                return Ok(ObjectiveValue::Violated {
                    reason: ViolationReason::LowerBound,
                    at: v,
                });
            }
            let net = l.cycle_net_weight(a).unwrap();
            if net > 0 {
                Ok(ObjectiveValue::PlusInfinity)
            } else {
                // net < 0 always yields a violation above, so net == 0 here
                debug_assert_eq!(net, 0);
                Ok(ObjectiveValue::Finite(mean_of(&levels[p..p + c])))
            }
        }
        AvgEnergyMode::RechargeWith(cap) => {
            a.check_recharge_mode().map_err(|_| EvalError::ModeMismatch)?;
            let levels = level_sequence(a, l, scan, Some(cap));
            let net = l.cycle_net_weight(a);
            let drift = match net {
                Some(d) => d, // no R-edge in the cycle; d <= 0 in recharge mode
                None => 0,    // R-edge resets, levels are eventually periodic
            };
            if let Some(v) = earliest_negative(&levels, p, c, drift) {
                return Ok(ObjectiveValue::Violated {
                    reason: ViolationReason::NegativeRecharge,
                    at: v,
                });
            }
            if net.is_none() {
                // periodic after one unrolled period past the first R-edge
                Ok(ObjectiveValue::Finite(mean_of(&levels[p + c..p + 2 * c])))
            } else {
                debug_assert_eq!(drift, 0);
                Ok(ObjectiveValue::Finite(mean_of(&levels[p..p + c])))
            }
        }
    }
}

/// Cycle weight sum divided by cycle length: the limsup per-step average
/// of an ultimately periodic play.
pub fn mean_payoff_of_lasso(a: &WeightedArena, l: &Lasso) -> Result<Rational, EvalError> {
    l.validate(a)?;
    let net = l.cycle_net_weight(a).ok_or(EvalError::ModeMismatch)?;
    // the prefix must be R-free too
    for i in 0..l.prefix.len() {
        if l.label_at(a, i).is_recharge() {
            return Err(EvalError::ModeMismatch);
        }
    }
    Ok(rat(net, l.cycle.len() as i128))
}

/// Levels at positions `0..=n`: plain energy or `EL_cap`.
fn level_sequence(a: &WeightedArena, l: &Lasso, n: usize, cap: Option<u64>) -> Vec<i128> {
    let mut levels = Vec::with_capacity(n + 1);
    let mut lvl: i128 = cap.map(|c| c as i128).unwrap_or(0);
    levels.push(lvl);
    for i in 0..n {
        match l.label_at(a, i) {
            WeightLabel::Int(w) => lvl += w as i128,
            WeightLabel::Recharge => lvl = cap.expect("R-edge in plain mode") as i128,
        }
        levels.push(lvl);
    }
    levels
}

/// Earliest position with a negative level, taking periodic drift into
/// account. `levels` must cover positions `0..=p+2c` and `drift` is the
/// per-period net weight of the cycle (0 when an R-edge resets it).
fn earliest_negative(levels: &[i128], p: usize, c: usize, drift: i128) -> Option<usize> {
    if let Some(i) = levels.iter().position(|&x| x < 0) {
        return Some(i);
    }
    if drift >= 0 {
        return None;
    }
    // levels[p+c+k] + j*drift for k in 0..c, j >= 0; find the smallest index
    let mut best: Option<usize> = None;
    for k in 0..c {
        let base = levels[p + c + k];
        // smallest j with base + j*drift < 0
        let j = base / (-drift) + 1;
        let idx = p + c + k + (j as usize) * c;
        if best.map_or(true, |b| idx < b) {
            best = Some(idx);
        }
    }
    best
}

fn mean_of(levels: &[i128]) -> Rational {
    let sum: i128 = levels.iter().sum();
    rat(sum, levels.len() as i128)
}

/// Parses the CLI lasso syntax `prefix: v0 v2 ; cycle: v0 v1`.
pub fn parse_lasso(a: &WeightedArena, text: &str) -> Result<Lasso, EvalError> {
    let (pre, cyc) = text
        .split_once(';')
        .ok_or_else(|| EvalError::BadSyntax("expected `prefix: ... ; cycle: ...`".into()))?;
    let pre = pre
        .trim()
        .strip_prefix("prefix:")
        .ok_or_else(|| EvalError::BadSyntax("missing `prefix:`".into()))?;
    let cyc = cyc
        .trim()
        .strip_prefix("cycle:")
        .ok_or_else(|| EvalError::BadSyntax("missing `cycle:`".into()))?;
    let resolve = |part: &str| -> Result<Vec<usize>, EvalError> {
        part.split_whitespace()
            .map(|id| {
                a.vertex_index(id).ok_or_else(|| EvalError::UnknownVertex(id.to_string()))
            })
            .collect()
    };
    let lasso = Lasso::new(resolve(pre)?, resolve(cyc)?);
    lasso.validate(a)?;
    Ok(lasso)
}

/// Renders a lasso in the CLI syntax.
pub fn serialize_lasso(a: &WeightedArena, l: &Lasso) -> String {
    let names = |seq: &[usize]| -> String {
        seq.iter().map(|&v| a.vertex_name(v)).collect::<Vec<_>>().join(" ")
    };
    format!("prefix: {} ; cycle: {}", names(&l.prefix), names(&l.cycle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{fixtures, Player, WeightedArena};

    fn idx(a: &WeightedArena, names: &[&str]) -> Vec<usize> {
        names.iter().map(|n| a.vertex_index(n).unwrap()).collect()
    }

    #[test]
    fn intro_energy_levels() {
        let a = fixtures::intro();
        assert_eq!(energy_level(&a, &idx(&a, &["v0", "v2"])).unwrap(), 3);
        assert_eq!(energy_level(&a, &idx(&a, &["v0", "v2", "v0"])).unwrap(), 5);
        assert_eq!(energy_level(&a, &idx(&a, &["v0", "v2", "v0", "v1"])).unwrap(), 4);
        assert_eq!(energy_level(&a, &idx(&a, &["v0", "v1", "v2"])).unwrap(), -2);
        assert_eq!(energy_level(&a, &idx(&a, &["v0"])).unwrap(), 0);
    }

    #[test]
    fn recharge_levels_on_memlb() {
        let a = fixtures::memlb();
        assert_eq!(recharge_energy_level(&a, 4, &idx(&a, &["v0", "v1", "v1"])).unwrap(), 2);
        assert_eq!(
            recharge_energy_level(&a, 4, &idx(&a, &["v0", "v1", "v1", "v1", "v1", "v0"]))
                .unwrap(),
            4
        );
        assert_eq!(recharge_energy_level(&a, 7, &idx(&a, &["v0"])).unwrap(), 7);
    }

    #[test]
    fn intro_average_is_four() {
        let a = fixtures::intro();
        let l = Lasso::new(idx(&a, &["v0"]), idx(&a, &["v2", "v0", "v1"]));
        assert_eq!(
            avg_energy_of_lasso(&a, &l, AvgEnergyMode::Plain).unwrap(),
            ObjectiveValue::Finite(rat(4, 1))
        );
    }

    #[test]
    fn tradeoff_cap1_average() {
        let a = fixtures::tradeoff();
        let l = Lasso::new(Vec::new(), idx(&a, &["v0", "v1", "v2", "v0"]));
        assert_eq!(
            avg_energy_of_lasso(&a, &l, AvgEnergyMode::RechargeWith(1)).unwrap(),
            ObjectiveValue::Finite(rat(3, 4))
        );
    }

    #[test]
    fn zero_self_loop_average_zero() {
        let a = WeightedArena::build(
            &[("v", Player::P0)],
            "v",
            &[("v", "v", WeightLabel::Int(0))],
        )
        .unwrap();
        let l = Lasso::new(alloc::vec![0], alloc::vec![0]);
        assert_eq!(
            avg_energy_of_lasso(&a, &l, AvgEnergyMode::Plain).unwrap(),
            ObjectiveValue::Finite(rat(0, 1))
        );
    }

    #[test]
    fn mean_payoff_examples() {
        let a = WeightedArena::build(
            &[("v", Player::P0)],
            "v",
            &[("v", "v", WeightLabel::Int(-1))],
        )
        .unwrap();
        let l = Lasso::new(alloc::vec![0], alloc::vec![0]);
        assert_eq!(mean_payoff_of_lasso(&a, &l).unwrap(), rat(-1, 1));

        let b = WeightedArena::build(
            &[("u", Player::P0), ("w", Player::P0)],
            "u",
            &[("u", "w", WeightLabel::Int(3)), ("w", "u", WeightLabel::Int(-1))],
        )
        .unwrap();
        let l = Lasso::new(Vec::new(), alloc::vec![0, 1]);
        assert_eq!(mean_payoff_of_lasso(&b, &l).unwrap(), rat(1, 1));
    }

    #[test]
    fn negative_drift_violation_index() {
        // single -1 self-loop: plain levels 0,-1,...; violation at length 1
        let a = WeightedArena::build(
            &[("v", Player::P0)],
            "v",
            &[("v", "v", WeightLabel::Int(-1))],
        )
        .unwrap();
        let l = Lasso::new(alloc::vec![0], alloc::vec![0]);
        assert_eq!(
            avg_energy_of_lasso(&a, &l, AvgEnergyMode::Plain).unwrap(),
            ObjectiveValue::Violated { reason: ViolationReason::LowerBound, at: 1 }
        );
    }

    #[test]
    fn recharge_drift_violation_far_out() {
        // cap 10, -1 loop with no recharge: violated at position 11
        let a = WeightedArena::build(
            &[("v", Player::P0)],
            "v",
            &[("v", "v", WeightLabel::Int(-1))],
        )
        .unwrap();
        let l = Lasso::new(alloc::vec![0], alloc::vec![0]);
        assert_eq!(
            avg_energy_of_lasso(&a, &l, AvgEnergyMode::RechargeWith(10)).unwrap(),
            ObjectiveValue::Violated { reason: ViolationReason::NegativeRecharge, at: 11 }
        );
    }

    #[test]
    fn lasso_text_round_trip() {
        let a = fixtures::intro();
        let l = parse_lasso(&a, "prefix: v0 ; cycle: v2 v0 v1").unwrap();
        assert_eq!(l.prefix, idx(&a, &["v0"]));
        assert_eq!(l.cycle, idx(&a, &["v2", "v0", "v1"]));
        let text = serialize_lasso(&a, &l);
        assert_eq!(parse_lasso(&a, &text).unwrap(), l);
    }

    #[test]
    fn value_ordering() {
        let fin = ObjectiveValue::Finite(rat(7, 2));
        let inf = ObjectiveValue::PlusInfinity;
        let bad = ObjectiveValue::Violated { reason: ViolationReason::LowerBound, at: 3 };
        assert!(fin < inf);
        assert!(inf < bad);
    }
}
