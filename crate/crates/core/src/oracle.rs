//! Brute-force reference solvers and random instance generators, used to
//! cross-check the production algorithms on small inputs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::routing::{Cost, EdgeWeighting, RoutingSolution};
use crate::topology::{EdgeId, NetworkGraph, NodeId, UserSet};

/// Largest edge count accepted by the exhaustive solvers.
pub const MAX_BRUTE_EDGES: usize = 20;

fn check_size(g: &NetworkGraph) -> Result<()> {
    if g.edge_count() > MAX_BRUTE_EDGES {
        return Err(Error::UnsupportedSize(format!(
            "{} edges exceeds the exhaustive limit of {MAX_BRUTE_EDGES}",
            g.edge_count()
        )));
    }
    Ok(())
}

/// Minimum total primary cost over all edge subsets connecting `users`,
/// or `None` if no subset does.
pub fn brute_force_steiner_cost(g: &NetworkGraph, w: &EdgeWeighting, users: &UserSet) -> Result<Option<f64>> {
    check_size(g)?;
    let m = g.edge_count();
    let avail: Vec<EdgeId> = (0..m).filter(|&e| w.is_available(e)).collect();
    let mut best: Option<f64> = None;
    for mask in 1u32..(1u32 << avail.len()) {
        let edges: Vec<EdgeId> = (0..avail.len()).filter(|&i| mask >> i & 1 == 1).map(|i| avail[i]).collect();
        let cost: f64 = edges.iter().map(|&e| w.cost(e).unwrap().primary).sum();
        if best.is_some_and(|b| cost >= b) {
            continue;
        }
        if connects(g, &edges, users.as_slice()) {
            best = Some(cost);
        }
    }
    Ok(best)
}

fn connects(g: &NetworkGraph, edges: &[EdgeId], nodes: &[NodeId]) -> bool {
    let mut comp: Vec<usize> = (0..g.node_count()).collect();
    fn find(c: &mut [usize], mut x: usize) -> usize {
        while c[x] != x {
            x = c[x];
        }
        x
    }
    for &e in edges {
        let (a, b) = (find(&mut comp, g.edge(e).u), find(&mut comp, g.edge(e).v));
        comp[a] = b;
    }
    let r = find(&mut comp, nodes[0]);
    nodes.iter().all(|&x| find(&mut comp, x) == r)
}

/// All simple paths from `from` to `to` over available edges, as edge lists.
pub fn simple_paths(g: &NetworkGraph, w: &EdgeWeighting, from: NodeId, to: NodeId) -> Vec<Vec<EdgeId>> {
    fn go(
        g: &NetworkGraph,
        w: &EdgeWeighting,
        x: NodeId,
        to: NodeId,
        seen: &mut Vec<bool>,
        stack: &mut Vec<EdgeId>,
        out: &mut Vec<Vec<EdgeId>>,
    ) {
        if x == to {
            out.push(stack.clone());
            return;
        }
        for &(y, e) in g.neighbors(x) {
            if !seen[y] && w.is_available(e) {
                seen[y] = true;
                stack.push(e);
                go(g, w, y, to, seen, stack, out);
                stack.pop();
                seen[y] = false;
            }
        }
    }
    let mut seen = vec![false; g.node_count()];
    seen[from] = true;
    let mut out = Vec::new();
    go(g, w, from, to, &mut seen, &mut Vec::new(), &mut out);
    out
}

/// Minimum total primary cost of pairwise edge-disjoint simple paths from
/// `center` to every user, or `None` if none exist.
pub fn brute_force_star_cost(
    g: &NetworkGraph,
    w: &EdgeWeighting,
    users: &UserSet,
    center: NodeId,
) -> Result<Option<f64>> {
    check_size(g)?;
    let options: Vec<Vec<(f64, Vec<EdgeId>)>> = users
        .as_slice()
        .iter()
        .map(|&u| {
            simple_paths(g, w, center, u)
                .into_iter()
                .map(|p| (p.iter().map(|&e| w.cost(e).unwrap().primary).sum(), p))
                .collect()
        })
        .collect();
    fn go(options: &[Vec<(f64, Vec<EdgeId>)>], used: &mut Vec<bool>, acc: f64, best: &mut Option<f64>) {
        let Some((first, rest)) = options.split_first() else {
            if best.is_none_or(|b| acc < b) {
                *best = Some(acc);
            }
            return;
        };
        for (c, p) in first {
            if p.iter().any(|&e| used[e]) {
                continue;
            }
            p.iter().for_each(|&e| used[e] = true);
            go(rest, used, acc + c, best);
            p.iter().for_each(|&e| used[e] = false);
        }
    }
    let mut best = None;
    go(&options, &mut vec![false; g.edge_count()], 0.0, &mut best);
    Ok(best)
}

/// Primary cost of a routing solution's edges.
pub fn solution_cost(w: &EdgeWeighting, sol: &RoutingSolution) -> Cost {
    w.total(&sol.edges)
}

/// Random instance for the state-simulator cross-check: a tree on at most
/// `max_edges + 1` nodes whose leaves are all users, at most `max_users`
/// users, and per-edge Werner parameters drawn from `[w_lo, 1]`.
#[derive(Debug, Clone)]
pub struct RandomTree {
    pub graph: NetworkGraph,
    pub users: UserSet,
    pub solution: RoutingSolution,
    pub werner: Vec<f64>,
}

pub fn random_tree<R: Rng>(rng: &mut R, max_edges: usize, max_users: usize, w_lo: f64) -> RandomTree {
    loop {
        let n_edges = rng.random_range(1..=max_edges);
        let n = n_edges + 1;
        let mut raw = Vec::with_capacity(n_edges);
        for v in 1..n {
            raw.push((rng.random_range(0..v), v, 0.5, 1.0));
        }
        let graph = NetworkGraph::new(n, &raw).expect("random tree is valid");
        let leaves: Vec<NodeId> = (0..n).filter(|&v| graph.degree(v) == 1).collect();
        if leaves.len() > max_users {
            continue;
        }
        let mut users = leaves;
        let mut others: Vec<NodeId> = (0..n).filter(|v| !users.contains(v)).collect();
        others.shuffle(rng);
        let extra = rng.random_range(0..=(max_users - users.len()).min(others.len()));
        users.extend(others.into_iter().take(extra));
        users.shuffle(rng);
        let users = UserSet::new(&graph, users).expect("users are valid");
        let solution = RoutingSolution::tree(&graph, (0..n_edges).collect(), &users).expect("tree is valid");
        let werner = (0..n_edges).map(|_| rng.random_range(w_lo..=1.0)).collect();
        return RandomTree { graph, users, solution, werner };
    }
}

/// Random connected graph with `n` nodes and `m` edges (`n - 1 <= m`).
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, m: usize) -> NetworkGraph {
    let max_m = n * (n - 1) / 2;
    let m = m.clamp(n - 1, max_m);
    let mut edges = Vec::with_capacity(m);
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    let mut rest: Vec<(NodeId, NodeId)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|e| !edges.contains(e)).collect();
    rest.shuffle(rng);
    edges.extend(rest.into_iter().take(m - (n - 1)));
    let raw: Vec<_> = edges.into_iter().map(|(a, b)| (a, b, rng.random_range(0.05..=1.0), 1.0)).collect();
    NetworkGraph::new(n, &raw).expect("random graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::make_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn brute_steiner_on_grid_corners() {
        let g = make_grid(3, 0.5, 1.0).unwrap();
        let users = UserSet::new(&g, vec![0, 2, 6, 8]).unwrap();
        let c = brute_force_steiner_cost(&g, &EdgeWeighting::unit(&g), &users).unwrap();
        assert_eq!(c, Some(6.0));
    }

    #[test]
    fn brute_star_on_grid_centre() {
        let g = make_grid(3, 0.5, 1.0).unwrap();
        let users = UserSet::new(&g, vec![0, 2, 6, 8]).unwrap();
        let c = brute_force_star_cost(&g, &EdgeWeighting::unit(&g), &users, 4).unwrap();
        assert_eq!(c, Some(8.0));
        let none = brute_force_star_cost(&g, &EdgeWeighting::unit(&g), &users, 1).unwrap();
        assert_eq!(none, None);
    }

    #[test]
    fn random_trees_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t = random_tree(&mut rng, 7, 4, 0.5);
            assert!(t.solution.size() <= 7);
            assert!(t.users.len() <= 4 && t.users.len() >= 2);
            assert!(t.werner.iter().all(|&w| (0.5..=1.0).contains(&w)));
        }
    }

    #[test]
    fn random_graph_is_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let g = random_connected_graph(&mut rng, 6, 9);
            assert!(g.is_connected());
            assert_eq!(g.edge_count(), 9);
        }
    }
}
