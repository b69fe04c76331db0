use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{dijkstra, Cost, EdgeWeighting, RoutingSolution};
use crate::error::{Error, Result};
use crate::topology::{EdgeId, NetworkGraph, NodeId, UserSet};

/// Largest terminal count solved exactly; beyond it the 2-approximation runs.
pub const MAX_EXACT_TERMINALS: usize = 6;

#[derive(Debug, Clone, Copy)]
enum Back {
    None,
    Terminal,
    Merge(usize),
    Edge(NodeId, EdgeId),
}

/// Minimum-cost Steiner tree by dynamic programming over terminal subsets.
pub fn exact_steiner_tree(g: &NetworkGraph, w: &EdgeWeighting, users: &UserSet) -> Result<RoutingSolution> {
    let terms = users.sorted();
    let k = terms.len();
    if k > MAX_EXACT_TERMINALS {
        return Err(Error::UnsupportedSize(format!(
            "exact Steiner tree supports at most {MAX_EXACT_TERMINALS} terminals, got {k}"
        )));
    }
    let n = g.node_count();
    let full = (1usize << k) - 1;
    let mut dp = vec![vec![Cost::INFINITY; n]; full + 1];
    let mut back = vec![vec![Back::None; n]; full + 1];

    for mask in 1..=full {
        if mask.is_power_of_two() {
            let t = terms[mask.trailing_zeros() as usize];
            dp[mask][t] = Cost::ZERO;
            back[mask][t] = Back::Terminal;
        } else {
            let low = mask & mask.wrapping_neg();
            for v in 0..n {
                let mut sub = (mask - 1) & mask;
                while sub > 0 {
                    if sub & low != 0 {
                        let c = dp[sub][v] + dp[mask ^ sub][v];
                        if c.is_finite() && c.less(&dp[mask][v]) {
                            dp[mask][v] = c;
                            back[mask][v] = Back::Merge(sub);
                        }
                    }
                    sub = (sub - 1) & mask;
                }
            }
        }
        relax(g, w, &mut dp[mask], &mut back[mask]);
    }

    let root = terms[0];
    if !dp[full][root].is_finite() {
        return Err(Error::NoRoute("terminals are not connected".into()));
    }
    let mut edges = Vec::new();
    let mut stack = vec![(full, root)];
    while let Some((mask, v)) = stack.pop() {
        match back[mask][v] {
            Back::Terminal => {}
            Back::Merge(sub) => {
                stack.push((sub, v));
                stack.push((mask ^ sub, v));
            }
            Back::Edge(x, e) => {
                edges.push(e);
                stack.push((mask, x));
            }
            Back::None => return Err(Error::Internal("broken Steiner backpointer".into())),
        }
    }
    finalize(g, w, edges, users)
}

/// Multi-source Dijkstra pass extending `dist` along available edges.
fn relax(g: &NetworkGraph, w: &EdgeWeighting, dist: &mut [Cost], back: &mut [Back]) {
    let mut heap: BinaryHeap<_> =
        (0..dist.len()).filter(|&v| dist[v].is_finite()).map(|v| Reverse((dist[v].key(), v))).collect();
    let mut done = vec![false; dist.len()];
    while let Some(Reverse((_, x))) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &(y, e) in g.neighbors(x) {
            let Some(c) = w.cost(e) else { continue };
            let cand = dist[x] + c;
            if !done[y] && cand.less(&dist[y]) {
                dist[y] = cand;
                back[y] = Back::Edge(x, e);
                heap.push(Reverse((cand.key(), y)));
            }
        }
    }
}

/// Metric-closure MST heuristic, within a factor 2 of optimal.
pub fn approx_steiner_tree(g: &NetworkGraph, w: &EdgeWeighting, users: &UserSet) -> Result<RoutingSolution> {
    let terms = users.sorted();
    let k = terms.len();
    let sp: Vec<_> = terms.iter().map(|&t| dijkstra(g, w, &[(t, Cost::ZERO)])).collect();

    // Prim over the terminal metric closure.
    let mut in_tree = vec![false; k];
    let mut best: Vec<(Cost, usize)> = vec![(Cost::INFINITY, 0); k];
    in_tree[0] = true;
    for j in 1..k {
        best[j] = (sp[0].0[terms[j]], 0);
    }
    let mut edges = Vec::new();
    for _ in 1..k {
        let mut pick: Option<usize> = None;
        for j in (0..k).filter(|&j| !in_tree[j]) {
            if pick.is_none_or(|p| best[j].0.less(&best[p].0)) {
                pick = Some(j);
            }
        }
        let j = pick.expect("terminal left");
        let (cost, from) = best[j];
        if !cost.is_finite() {
            return Err(Error::NoRoute("terminals are not connected".into()));
        }
        let parent = &sp[from].1;
        let mut x = terms[j];
        while let Some((p, e)) = parent[x] {
            edges.push(e);
            x = p;
        }
        in_tree[j] = true;
        for i in (0..k).filter(|&i| !in_tree[i]) {
            let c = sp[j].0[terms[i]];
            if c.less(&best[i].0) {
                best[i] = (c, j);
            }
        }
    }
    finalize(g, w, edges, users)
}

/// Exact for up to [`MAX_EXACT_TERMINALS`] terminals, approximate beyond.
pub fn steiner_tree(g: &NetworkGraph, w: &EdgeWeighting, users: &UserSet) -> Result<RoutingSolution> {
    if users.len() <= MAX_EXACT_TERMINALS {
        exact_steiner_tree(g, w, users)
    } else {
        approx_steiner_tree(g, w, users)
    }
}

/// Spanning tree of the edge union, minus non-terminal leaves.
fn finalize(g: &NetworkGraph, w: &EdgeWeighting, mut edges: Vec<EdgeId>, users: &UserSet) -> Result<RoutingSolution> {
    edges.sort_unstable();
    edges.dedup();
    edges.sort_by(|&a, &b| {
        let (ca, cb) = (w.cost(a).unwrap_or(Cost::INFINITY), w.cost(b).unwrap_or(Cost::INFINITY));
        ca.primary.total_cmp(&cb.primary).then(ca.secondary.total_cmp(&cb.secondary)).then(a.cmp(&b))
    });
    let mut parent: Vec<usize> = (0..g.node_count()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut tree = Vec::new();
    for e in edges {
        let ed = g.edge(e);
        let (a, b) = (find(&mut parent, ed.u), find(&mut parent, ed.v));
        if a != b {
            parent[a] = b;
            tree.push(e);
        }
    }

    let mut degree = vec![0usize; g.node_count()];
    for &e in &tree {
        degree[g.edge(e).u] += 1;
        degree[g.edge(e).v] += 1;
    }
    loop {
        let before = tree.len();
        tree.retain(|&e| {
            let ed = g.edge(e);
            let leaf = [ed.u, ed.v].into_iter().find(|&x| degree[x] == 1 && !users.contains(x));
            match leaf {
                Some(_) => {
                    degree[ed.u] -= 1;
                    degree[ed.v] -= 1;
                    false
                }
                None => true,
            }
        });
        if tree.len() == before {
            break;
        }
    }
    RoutingSolution::tree(g, tree, users)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::RouteKind;
    use crate::topology::{grid_corners, make_grid};

    #[test]
    fn corners_of_grid() {
        for m in 3..=6 {
            let g = make_grid(m, 0.1, 1.0).unwrap();
            let users = UserSet::new(&g, grid_corners(m)).unwrap();
            let w = EdgeWeighting::unit(&g);
            let t = exact_steiner_tree(&g, &w, &users).unwrap();
            assert_eq!(t.kind, RouteKind::Tree);
            assert_eq!(t.size(), 3 * (m - 1));
            let a = approx_steiner_tree(&g, &w, &users).unwrap();
            assert!(a.size() <= 2 * t.size());
        }
    }

    #[test]
    fn steiner_point_used() {
        // Star K_{1,3} plus a triangle on the leaves with costly edges.
        let g = NetworkGraph::new(
            4,
            &[(0, 1, 0.9, 1.0), (0, 2, 0.9, 1.0), (0, 3, 0.9, 1.0), (1, 2, 0.5, 1.0), (2, 3, 0.5, 1.0)],
        )
        .unwrap();
        let users = UserSet::new(&g, vec![1, 2, 3]).unwrap();
        let t = exact_steiner_tree(&g, &EdgeWeighting::generation(&g), &users).unwrap();
        assert_eq!(t.edges, vec![0, 1, 2]);
    }

    #[test]
    fn too_many_terminals_for_exact() {
        let g = make_grid(4, 0.1, 1.0).unwrap();
        let users = UserSet::new(&g, (0..7).collect()).unwrap();
        let w = EdgeWeighting::unit(&g);
        assert!(matches!(exact_steiner_tree(&g, &w, &users), Err(Error::UnsupportedSize(_))));
        let t = steiner_tree(&g, &w, &users).unwrap();
        assert!(t.check_spans(&users).is_ok());
    }

    #[test]
    fn disconnected_terminals() {
        let g = make_grid(3, 0.1, 1.0).unwrap();
        let users = UserSet::new(&g, vec![0, 8]).unwrap();
        let mut vals = vec![Some(0.9); g.edge_count()];
        vals[g.edge_between(0, 1).unwrap()] = None;
        vals[g.edge_between(0, 3).unwrap()] = None;
        let w = EdgeWeighting::werner(&vals);
        assert!(matches!(exact_steiner_tree(&g, &w, &users), Err(Error::NoRoute(_))));
        assert!(matches!(approx_steiner_tree(&g, &w, &users), Err(Error::NoRoute(_))));
    }
}
