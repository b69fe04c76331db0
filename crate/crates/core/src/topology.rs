//! Static network topologies and user sets.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::routing::{self, EdgeWeighting};

/// Dense node identifier, `0..node_count`.
pub type NodeId = usize;
/// Dense edge identifier, `0..edge_count`.
pub type EdgeId = usize;

/// One undirected channel. Endpoints are stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    /// Per-timeslot link generation probability.
    pub gen_prob: f64,
    /// Werner parameter of a freshly generated link.
    pub w0: f64,
}

impl Edge {
    pub fn other(&self, x: NodeId) -> NodeId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Simple undirected graph with per-edge generation probability and initial
/// Werner parameter. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    node_count: usize,
    edges: Vec<Edge>,
    /// `adj[x]` = `(neighbor, edge)` sorted by neighbor id.
    adj: Vec<Vec<(NodeId, EdgeId)>>,
    /// Side length when built by [`make_grid`].
    grid_side: Option<usize>,
}

impl NetworkGraph {
    /// Builds a graph from `(u, v, gen_prob, w0)` tuples.
    pub fn new(node_count: usize, edges: &[(NodeId, NodeId, f64, f64)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for &(a, b, p, w0) in edges {
            if a >= node_count || b >= node_count {
                return invalid(format!("edge ({a},{b}) references a node outside 0..{node_count}"));
            }
            if a == b {
                return invalid(format!("self-loop at node {a}"));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return invalid(format!("parallel edge ({u},{v})"));
            }
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("gen_prob {p} of edge ({u},{v}) outside [0,1]"));
            }
            if !(0.0..=1.0).contains(&w0) {
                return invalid(format!("w0 {w0} of edge ({u},{v}) outside [0,1]"));
            }
            out.push(Edge { u, v, gen_prob: p, w0 });
        }
        let mut adj = vec![Vec::new(); node_count];
        for (id, e) in out.iter().enumerate() {
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { node_count, edges: out, adj, grid_side: None })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, x: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adj[x]
    }

    pub fn degree(&self, x: NodeId) -> usize {
        self.adj[x].len()
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.adj
            .get(a)?
            .binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|i| self.adj[a][i].1)
    }

    /// Side length `M` if this graph came from [`make_grid`].
    pub fn grid_side(&self) -> Option<usize> {
        self.grid_side
    }

    /// Returns a copy with every edge's generation probability and Werner
    /// parameter replaced.
    pub fn with_uniform(&self, gen_prob: f64, w0: f64) -> Result<Self> {
        let tuples: Vec<_> = self.edges.iter().map(|e| (e.u, e.v, gen_prob, w0)).collect();
        let mut g = Self::new(self.node_count, &tuples)?;
        g.grid_side = self.grid_side;
        Ok(g)
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        self.hop_distances(0).iter().all(Option::is_some)
    }

    /// Errors unless the graph is connected.
    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            invalid("graph is not connected")
        }
    }

    /// Unweighted BFS distances from `src`.
    pub fn hop_distances(&self, src: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap();
            for &(y, _) in &self.adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            nodes: self.node_count,
            edges: self.edges.iter().map(|e| (e.u, e.v, e.gen_prob, e.w0)).collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        Self::new(json.nodes, &json.edges)
    }
}

/// On-disk graph format: `{"nodes": n, "edges": [[u, v, p, w0], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: usize,
    pub edges: Vec<(NodeId, NodeId, f64, f64)>,
}

/// `M`×`M` square lattice, nodes numbered row-major.
pub fn make_grid(m: usize, gen_prob: f64, w0: f64) -> Result<NetworkGraph> {
    if m < 2 {
        return invalid(format!("grid side must be at least 2, got {m}"));
    }
    let mut edges = Vec::with_capacity(2 * m * (m - 1));
    for r in 0..m {
        for c in 0..m {
            let x = r * m + c;
            if c + 1 < m {
                edges.push((x, x + 1, gen_prob, w0));
            }
            if r + 1 < m {
                edges.push((x, x + m, gen_prob, w0));
            }
        }
    }
    let mut g = NetworkGraph::new(m * m, &edges)?;
    g.grid_side = Some(m);
    Ok(g)
}

/// The four corner nodes of an `M`×`M` grid in ascending id order.
pub fn grid_corners(m: usize) -> Vec<NodeId> {
    vec![0, m - 1, m * (m - 1), m * m - 1]
}

/// Distinct users, kept in the order given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserSet(Vec<NodeId>);

impl UserSet {
    pub fn new(g: &NetworkGraph, users: Vec<NodeId>) -> Result<Self> {
        if users.len() < 2 {
            return invalid(format!("need at least 2 users, got {}", users.len()));
        }
        Self::new_unchecked_size(g, users)
    }

    /// Like [`UserSet::new`] but accepts a single user (used by centroid queries).
    pub fn new_unchecked_size(g: &NetworkGraph, users: Vec<NodeId>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &u in &users {
            if u >= g.node_count() {
                return invalid(format!("user {u} is not a node of the graph"));
            }
            if !seen.insert(u) {
                return invalid(format!("duplicate user {u}"));
            }
        }
        Ok(Self(users))
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: NodeId) -> bool {
        self.0.contains(&x)
    }

    pub fn sorted(&self) -> Vec<NodeId> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }
}

/// Edge count of a minimum Steiner tree spanning `users` (unit edge weights).
pub fn steiner_distance(g: &NetworkGraph, users: &UserSet) -> Result<usize> {
    g.require_connected()?;
    let weights = EdgeWeighting::unit(g);
    let tree = routing::exact_steiner_tree(g, &weights, users)?;
    Ok(tree.edges.len())
}

/// Nodes ranked by total hop distance to the users, ties by id.
pub fn centroid_ranking(g: &NetworkGraph, users: &UserSet) -> Vec<(usize, NodeId)> {
    let per_user: Vec<_> = users.as_slice().iter().map(|&u| g.hop_distances(u)).collect();
    let mut ranked: Vec<(usize, NodeId)> = (0..g.node_count())
        .filter_map(|v| {
            per_user
                .iter()
                .map(|d| d[v])
                .sum::<Option<usize>>()
                .map(|s| (s, v))
        })
        .collect();
    ranked.sort_unstable();
    ranked
}

/// Node minimizing the summed hop distance to all users; ties by smallest id.
pub fn centroid_node(g: &NetworkGraph, users: &UserSet) -> Result<NodeId> {
    centroid_ranking(g, users)
        .first()
        .map(|&(_, v)| v)
        .ok_or_else(|| Error::InvalidArgument("no node reaches every user".into()))
}
