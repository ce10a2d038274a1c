//! Maximum cycle mean of an integer-weighted digraph (Karp's dynamic
//! program) together with a witness cycle attaining it. Used to evaluate
//! long-run averages on strategy products exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::evaluation::{rat, Rational};

const NEG_INF: i128 = i128::MIN;

/// Maximum mean weight over all cycles of the graph, with one cycle
/// attaining it (vertex list, closed back to its first entry).
/// `None` when the graph is acyclic.
///
/// Every vertex of the graph is considered; callers restrict to a
/// reachable subgraph first when that is the intended scope.
pub(crate) fn max_cycle_mean(
    n: usize,
    edges: &[(usize, usize, i128)],
) -> Option<(Rational, Vec<usize>)> {
    if n == 0 {
        return None;
    }
    // D[k][v]: max weight of a walk with exactly k edges ending in v,
    // starting anywhere (a virtual zero-weight source to all vertices).
    let mut d = vec![vec![NEG_INF; n]; n + 1];
    for v in 0..n {
        d[0][v] = 0;
    }
    for k in 1..=n {
        for &(u, v, w) in edges {
            if d[k - 1][u] != NEG_INF {
                let cand = d[k - 1][u] + w;
                if cand > d[k][v] {
                    d[k][v] = cand;
                }
            }
        }
    }
    let mut best: Option<Rational> = None;
    for v in 0..n {
        if d[n][v] == NEG_INF {
            continue;
        }
        let mut worst: Option<Rational> = None;
        for k in 0..n {
            if d[k][v] == NEG_INF {
                continue;
            }
            let m = rat(d[n][v] - d[k][v], (n - k) as i128);
            if worst.map_or(true, |x| m < x) {
                worst = Some(m);
            }
        }
        let worst = worst.expect("k = 0 row is always finite");
        if best.map_or(true, |x| worst > x) {
            best = Some(worst);
        }
    }
    let mu = best?;
    Some((mu, critical_cycle(n, edges, mu)))
}

/// A cycle of mean exactly `mu`. Reweights by `q*w - p` (max cycle mean 0),
/// takes longest-walk potentials, and finds a cycle among the tight edges;
/// every cycle there is critical.
fn critical_cycle(n: usize, edges: &[(usize, usize, i128)], mu: Rational) -> Vec<usize> {
    let p = *mu.numer();
    let q = *mu.denom();
    let rw = |w: i128| q * w - p;
    // longest-walk weights: converge because no reweighted cycle is positive
    let mut dist = vec![0i128; n];
    for _ in 0..n {
        let mut changed = false;
        for &(u, v, w) in edges {
            let cand = dist[u] + rw(w);
            if cand > dist[v] {
                dist[v] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut tight_succ = vec![Vec::new(); n];
    for &(u, v, w) in edges {
        if dist[u] + rw(w) == dist[v] {
            tight_succ[u].push(v);
        }
    }
    // any cycle of the tight subgraph: DFS with an explicit stack
    let mut color = vec![0u8; n]; // 0 new, 1 on stack, 2 done
    let mut on_path: Vec<usize> = Vec::new();
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = 1;
        on_path.push(root);
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < tight_succ[v].len() {
                let u = tight_succ[v][*i];
                *i += 1;
                match color[u] {
                    0 => {
                        color[u] = 1;
                        on_path.push(u);
                        stack.push((u, 0));
                    }
                    1 => {
                        let start = on_path.iter().position(|&x| x == u).unwrap();
                        return on_path[start..].to_vec();
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
                on_path.pop();
                stack.pop();
            }
        }
    }
    unreachable!("a cycle of mean mu exists by construction");
}

/// Minimum mean weight over all cycles, with a witness cycle.
#[cfg(test)]
pub(crate) fn min_cycle_mean(
    n: usize,
    edges: &[(usize, usize, i128)],
) -> Option<(Rational, Vec<usize>)> {
    let neg: Vec<(usize, usize, i128)> = edges.iter().map(|&(u, v, w)| (u, v, -w)).collect();
    max_cycle_mean(n, &neg).map(|(mu, cyc)| (-mu, cyc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle_mean(edges: &[(usize, usize, i128)], cyc: &[usize]) -> Rational {
        let mut sum = 0i128;
        for i in 0..cyc.len() {
            let (u, v) = (cyc[i], cyc[(i + 1) % cyc.len()]);
            let w = edges
                .iter()
                .filter(|&&(a, b, _)| a == u && b == v)
                .map(|&(_, _, w)| w)
                .max()
                .expect("witness must follow edges");
            sum += w;
        }
        rat(sum, cyc.len() as i128)
    }

    #[test]
    fn self_loop() {
        let edges = [(0, 0, 5)];
        let (mu, cyc) = max_cycle_mean(1, &edges).unwrap();
        assert_eq!(mu, rat(5, 1));
        assert_eq!(cyc, alloc::vec![0]);
    }

    #[test]
    fn acyclic_graph() {
        let edges = [(0, 1, 3)];
        assert_eq!(max_cycle_mean(2, &edges), None);
    }

    #[test]
    fn picks_the_better_cycle() {
        // loop at 0 of mean 1, two-cycle 1<->2 of mean 2
        let edges = [(0, 0, 1), (0, 1, 100), (1, 2, 7), (2, 1, -3)];
        let (mu, cyc) = max_cycle_mean(3, &edges).unwrap();
        assert_eq!(mu, rat(2, 1));
        assert_eq!(cycle_mean(&edges, &cyc), mu);
    }

    #[test]
    fn negative_means() {
        let edges = [(0, 1, -1), (1, 0, -2), (0, 0, -5)];
        let (mu, cyc) = max_cycle_mean(2, &edges).unwrap();
        assert_eq!(mu, rat(-3, 2));
        assert_eq!(cycle_mean(&edges, &cyc), mu);
    }

    #[test]
    fn min_is_negated_max() {
        let edges = [(0, 1, -1), (1, 0, -2), (0, 0, -5)];
        let (mu, cyc) = min_cycle_mean(2, &edges).unwrap();
        assert_eq!(mu, rat(-5, 1));
        assert_eq!(cycle_mean(&edges, &cyc), mu);
    }

    #[test]
    fn fractional_mean() {
        // 3-cycle with weights 1, 0, 0
        let edges = [(0, 1, 1), (1, 2, 0), (2, 0, 0)];
        let (mu, cyc) = max_cycle_mean(3, &edges).unwrap();
        assert_eq!(mu, rat(1, 3));
        assert_eq!(cyc.len(), 3);
    }
}
