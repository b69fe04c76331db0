use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::topology::{EdgeId, NetworkGraph, NodeId, UserSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteKind {
    Star,
    Tree,
}

/// A path segment: `nodes.len() == edges.len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Branch {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

impl Branch {
    pub fn ends(&self) -> (NodeId, NodeId) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }
}

/// Edge set that must be fully live before a GHZ state can be produced,
/// with its branch/fork structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoutingSolution {
    pub kind: RouteKind,
    /// Sorted edge ids.
    pub edges: Vec<EdgeId>,
    pub center: Option<NodeId>,
    pub branches: Vec<Branch>,
    /// Sorted fork node ids.
    pub forks: Vec<NodeId>,
}

impl RoutingSolution {
    /// Validates `edges` as a tree spanning `users` whose leaves are all
    /// users, and decomposes it into branches.
    pub fn tree(g: &NetworkGraph, edges: Vec<EdgeId>, users: &UserSet) -> Result<Self> {
        let mut edges = edges;
        edges.sort_unstable();
        edges.dedup();
        if edges.is_empty() {
            return invalid("tree has no edges");
        }
        let nodes: BTreeSet<NodeId> = edges.iter().flat_map(|&e| [g.edge(e).u, g.edge(e).v]).collect();
        if edges.len() + 1 != nodes.len() {
            return invalid("edge set is not a tree");
        }
        if let Some(u) = users.as_slice().iter().find(|u| !nodes.contains(u)) {
            return invalid(format!("user {u} is not spanned"));
        }
        let adj = adjacency(g, &edges);
        if !connected(&adj, &nodes) {
            return invalid("edge set is not connected");
        }
        if let Some((&v, _)) = adj.iter().find(|(v, n)| n.len() == 1 && !users.contains(**v)) {
            return invalid(format!("leaf {v} is not a user"));
        }
        let (branches, forks) = decompose(g, &edges, users);
        Ok(Self { kind: RouteKind::Tree, edges, center: None, branches, forks })
    }

    /// Star of pairwise edge-disjoint paths, each given as a node sequence
    /// from `center` to one user.
    pub fn star(g: &NetworkGraph, center: NodeId, paths: Vec<Vec<NodeId>>, users: &UserSet) -> Result<Self> {
        if users.contains(center) {
            return invalid(format!("centre {center} is a user"));
        }
        if paths.len() != users.len() {
            return invalid(format!("{} paths for {} users", paths.len(), users.len()));
        }
        let mut used = BTreeSet::new();
        let mut reached = BTreeSet::new();
        let mut branches = Vec::with_capacity(paths.len());
        for nodes in paths {
            if nodes.len() < 2 || nodes[0] != center {
                return invalid("star path must start at the centre and have at least one edge");
            }
            let mut edges = Vec::with_capacity(nodes.len() - 1);
            for pair in nodes.windows(2) {
                let e = g
                    .edge_between(pair[0], pair[1])
                    .ok_or_else(|| crate::Error::InvalidArgument(format!("no edge ({},{})", pair[0], pair[1])))?;
                if !used.insert(e) {
                    return invalid(format!("edge {e} used by two branches"));
                }
                edges.push(e);
            }
            let end = *nodes.last().unwrap();
            if !users.contains(end) || !reached.insert(end) {
                return invalid(format!("star path ends at {end}, which is not an unreached user"));
            }
            branches.push(Branch { nodes, edges });
        }
        branches.sort_by_key(|b| *b.nodes.last().unwrap());
        Ok(Self {
            kind: RouteKind::Star,
            edges: used.into_iter().collect(),
            center: Some(center),
            branches,
            forks: vec![center],
        })
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    /// Errors unless every user is a branch endpoint.
    pub fn check_spans(&self, users: &UserSet) -> Result<()> {
        for &u in users.as_slice() {
            if !self.branches.iter().any(|b| b.nodes[0] == u || *b.nodes.last().unwrap() == u) {
                return invalid(format!("user {u} is not spanned by the route"));
            }
        }
        Ok(())
    }
}

/// Splits a tree into branches between user/fork endpoints.
///
/// Forks are nodes of degree ≥ 3. Each branch runs from an endpoint to the
/// next endpoint; interiors contain neither users nor forks. Endpoints are
/// visited in ascending id and incident edges in ascending neighbour id.
pub fn decompose_branches(g: &NetworkGraph, r: &RoutingSolution, users: &UserSet) -> (Vec<Branch>, Vec<NodeId>) {
    match r.kind {
        RouteKind::Star => (r.branches.clone(), r.forks.clone()),
        RouteKind::Tree => decompose(g, &r.edges, users),
    }
}

fn decompose(g: &NetworkGraph, edges: &[EdgeId], users: &UserSet) -> (Vec<Branch>, Vec<NodeId>) {
    let adj = adjacency(g, edges);
    let forks: Vec<NodeId> = adj.iter().filter(|(_, n)| n.len() >= 3).map(|(&v, _)| v).collect();
    let is_end = |v: NodeId| users.contains(v) || adj.get(&v).is_some_and(|n| n.len() >= 3);
    let mut done = BTreeSet::new();
    let mut branches = Vec::new();
    for (&start, nbrs) in &adj {
        if !is_end(start) {
            continue;
        }
        for &(first, e0) in nbrs {
            if done.contains(&e0) {
                continue;
            }
            let mut nodes = vec![start, first];
            let mut bedges = vec![e0];
            done.insert(e0);
            let mut cur = first;
            while !is_end(cur) {
                // Interior nodes have degree exactly 2.
                let &(next, e) = adj[&cur].iter().find(|&&(_, e)| !done.contains(&e)).expect("interior continues");
                done.insert(e);
                nodes.push(next);
                bedges.push(e);
                cur = next;
            }
            branches.push(Branch { nodes, edges: bedges });
        }
    }
    (branches, forks)
}

fn adjacency(g: &NetworkGraph, edges: &[EdgeId]) -> BTreeMap<NodeId, Vec<(NodeId, EdgeId)>> {
    let mut adj: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>> = BTreeMap::new();
    for &e in edges {
        let edge = g.edge(e);
        adj.entry(edge.u).or_default().push((edge.v, e));
        adj.entry(edge.v).or_default().push((edge.u, e));
    }
    for list in adj.values_mut() {
        list.sort_unstable();
    }
    adj
}

fn connected(adj: &BTreeMap<NodeId, Vec<(NodeId, EdgeId)>>, nodes: &BTreeSet<NodeId>) -> bool {
    let Some(&start) = nodes.iter().next() else { return true };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &(y, _) in &adj[&x] {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len() == nodes.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::make_grid;

    fn edges_of(g: &NetworkGraph, pairs: &[(NodeId, NodeId)]) -> Vec<EdgeId> {
        pairs.iter().map(|&(a, b)| g.edge_between(a, b).unwrap()).collect()
    }

    #[test]
    fn path_is_one_branch() {
        let g = make_grid(3, 0.5, 1.0).unwrap();
        let users = UserSet::new(&g, vec![0, 2]).unwrap();
        let r = RoutingSolution::tree(&g, edges_of(&g, &[(0, 1), (1, 2)]), &users).unwrap();
        assert_eq!(r.branches.len(), 1);
        assert_eq!(r.branches[0].nodes, vec![0, 1, 2]);
        assert!(r.forks.is_empty());
    }

    #[test]
    fn single_edge_star() {
        let g = make_grid(3, 0.5, 1.0).unwrap();
        let users = UserSet::new(&g, vec![1, 3, 5, 7]).unwrap();
        let r = RoutingSolution::tree(&g, edges_of(&g, &[(4, 1), (4, 3), (4, 5), (4, 7)]), &users).unwrap();
        assert_eq!(r.forks, vec![4]);
        assert_eq!(r.branches.len(), 4);
        let s = RoutingSolution::star(&g, 4, vec![vec![4, 1], vec![4, 3], vec![4, 5], vec![4, 7]], &users).unwrap();
        let (b, f) = decompose_branches(&g, &s, &users);
        assert_eq!((b.len(), f), (4, vec![4]));
    }

    #[test]
    fn h_shaped_tree() {
        // 4x4 grid: users 0, 8 hang off fork 4; users 3, 15 hang off fork 7.
        let g = make_grid(4, 0.5, 1.0).unwrap();
        let users = UserSet::new(&g, vec![0, 8, 3, 15]).unwrap();
        let tree = [(0, 4), (8, 4), (4, 5), (5, 6), (6, 7), (7, 3), (7, 11), (11, 15)];
        let r = RoutingSolution::tree(&g, edges_of(&g, &tree), &users).unwrap();
        assert_eq!(r.size(), 8);
        assert_eq!(r.forks, vec![4, 7]);
        assert_eq!(r.branches.len(), 5);

        // Fig.-4-like layout with 7 links: one branch shorter.
        let tree7 = [(0, 4), (8, 4), (4, 5), (5, 6), (6, 7), (7, 3), (7, 11)];
        let users7 = UserSet::new(&g, vec![0, 8, 3, 11]).unwrap();
        let r = RoutingSolution::tree(&g, edges_of(&g, &tree7), &users7).unwrap();
        assert_eq!((r.size(), r.forks.len(), r.branches.len()), (7, 2, 5));
        let covered: BTreeSet<_> = r.branches.iter().flat_map(|b| b.edges.clone()).collect();
        assert_eq!(covered.into_iter().collect::<Vec<_>>(), r.edges);
    }

    #[test]
    fn user_interior_splits_branch() {
        let g = make_grid(3, 0.5, 1.0).unwrap();
        let users = UserSet::new(&g, vec![0, 1, 2]).unwrap();
        let r = RoutingSolution::tree(&g, edges_of(&g, &[(0, 1), (1, 2)]), &users).unwrap();
        assert_eq!(r.branches.len(), 2);
    }

    #[test]
    fn rejects_invalid_trees() {
        let g = make_grid(3, 0.5, 1.0).unwrap();
        let users = UserSet::new(&g, vec![0, 4]).unwrap();
        let cycle = edges_of(&g, &[(0, 1), (1, 4), (4, 3), (3, 0)]);
        assert!(RoutingSolution::tree(&g, cycle, &users).is_err());
        let dangling = edges_of(&g, &[(0, 1), (1, 4), (1, 2)]);
        assert!(RoutingSolution::tree(&g, dangling, &users).is_err());
        let short = edges_of(&g, &[(0, 1)]);
        assert!(RoutingSolution::tree(&g, short, &users).is_err());
        let split = edges_of(&g, &[(0, 1), (4, 5), (5, 8)]);
        assert!(RoutingSolution::tree(&g, split, &UserSet::new(&g, vec![0, 1, 4, 8]).unwrap()).is_err());
    }

    #[test]
    fn rejects_invalid_stars() {
        let g = make_grid(3, 0.5, 1.0).unwrap();
        let users = UserSet::new(&g, vec![0, 2]).unwrap();
        assert!(RoutingSolution::star(&g, 1, vec![vec![1, 0], vec![1, 0]], &users).is_err());
        assert!(RoutingSolution::star(&g, 0, vec![vec![0, 1, 2]], &users).is_err());
        assert!(RoutingSolution::star(&g, 4, vec![vec![4, 1, 0], vec![4, 1, 2]], &users).is_err());
        assert!(RoutingSolution::star(&g, 4, vec![vec![4, 1, 0], vec![4, 5, 2]], &users).is_ok());
    }
}
