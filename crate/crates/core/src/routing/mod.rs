//! Route selection over log-weighted graphs.
//!
//! Maximizing a product of per-edge values in `(0, 1]` is minimizing the sum
//! of `c_e = -ln(value)`. Costs are lexicographic pairs so the single-path
//! two-step rule (maximize `p_R`, then `w_R`) is one optimization; every
//! other use leaves the secondary component at zero.

mod flow;
mod solution;
mod steiner;

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::ops::{Add, Neg, Sub};

pub use flow::{edge_disjoint_path_count, star_route, star_route_with_cost};
pub use solution::{decompose_branches, Branch, RouteKind, RoutingSolution};
pub use steiner::{approx_steiner_tree, exact_steiner_tree, steiner_tree, MAX_EXACT_TERMINALS};

use crate::error::{Error, Result};
use crate::topology::{EdgeId, NetworkGraph, NodeId, UserSet};

/// Absolute tolerance under which two cost components compare equal.
pub const COST_TOL: f64 = 1e-9;

/// Lexicographic path cost.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cost {
    pub primary: f64,
    pub secondary: f64,
}

impl Cost {
    pub const ZERO: Cost = Cost { primary: 0.0, secondary: 0.0 };
    pub const INFINITY: Cost = Cost { primary: f64::INFINITY, secondary: f64::INFINITY };

    pub fn new(primary: f64, secondary: f64) -> Self {
        Self { primary, secondary }
    }

    pub fn is_finite(&self) -> bool {
        self.primary.is_finite()
    }

    /// Tolerant lexicographic comparison.
    pub fn cmp_tol(&self, other: &Self) -> Ordering {
        fn one(a: f64, b: f64) -> Ordering {
            if a == b || (a - b).abs() <= COST_TOL {
                Ordering::Equal
            } else {
                a.total_cmp(&b)
            }
        }
        one(self.primary, other.primary).then_with(|| one(self.secondary, other.secondary))
    }

    pub fn less(&self, other: &Self) -> bool {
        self.cmp_tol(other) == Ordering::Less
    }

    fn key(&self) -> (OrdF64, OrdF64) {
        (OrdF64(self.primary), OrdF64(self.secondary))
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost::new(self.primary + o.primary, self.secondary + o.secondary)
    }
}

impl Sub for Cost {
    type Output = Cost;
    fn sub(self, o: Cost) -> Cost {
        Cost::new(self.primary - o.primary, self.secondary - o.secondary)
    }
}

impl Neg for Cost {
    type Output = Cost;
    fn neg(self) -> Cost {
        Cost::new(-self.primary, -self.secondary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// What the per-edge costs were derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// `c_e = -ln p_e`, ties broken by `-ln w0_e`.
    GenerationProbability,
    /// `c_e = -ln w_e`.
    Werner,
    Unit,
}

/// Per-edge costs; `None` marks an edge unavailable for routing.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeighting {
    pub mode: WeightMode,
    costs: Vec<Option<Cost>>,
}

fn log_cost(value: f64) -> Option<f64> {
    (value > 0.0 && value <= 1.0).then(|| -value.ln())
}

impl EdgeWeighting {
    /// Every edge costs one hop.
    pub fn unit(g: &NetworkGraph) -> Self {
        Self { mode: WeightMode::Unit, costs: vec![Some(Cost::new(1.0, 0.0)); g.edge_count()] }
    }

    /// Static two-step weighting: generation probability first, fresh-link
    /// Werner parameter second.
    pub fn generation(g: &NetworkGraph) -> Self {
        let costs = g
            .edges()
            .iter()
            .map(|e| log_cost(e.gen_prob).map(|c| Cost::new(c, -e.w0.max(1e-300).ln())))
            .collect();
        Self { mode: WeightMode::GenerationProbability, costs }
    }

    /// Werner weighting from per-edge values; `None` or zero means no link.
    pub fn werner(values: &[Option<f64>]) -> Self {
        let costs = values.iter().map(|v| v.and_then(log_cost).map(|c| Cost::new(c, 0.0))).collect();
        Self { mode: WeightMode::Werner, costs }
    }

    /// Arbitrary per-edge values in `(0, 1]`.
    pub fn from_values(mode: WeightMode, values: &[Option<f64>]) -> Self {
        Self { mode, ..Self::werner(values) }
    }

    pub fn cost(&self, e: EdgeId) -> Option<Cost> {
        self.costs[e]
    }

    pub fn is_available(&self, e: EdgeId) -> bool {
        self.costs[e].is_some()
    }

    pub fn total(&self, edges: &[EdgeId]) -> Cost {
        edges.iter().fold(Cost::ZERO, |acc, &e| acc + self.costs[e].unwrap_or(Cost::INFINITY))
    }
}

/// Shortest-path tree from a set of seeded sources.
pub(crate) fn dijkstra(
    g: &NetworkGraph,
    w: &EdgeWeighting,
    seeds: &[(NodeId, Cost)],
) -> (Vec<Cost>, Vec<Option<(NodeId, EdgeId)>>) {
    let n = g.node_count();
    let mut dist = vec![Cost::INFINITY; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &(s, c) in seeds {
        if c.less(&dist[s]) {
            dist[s] = c;
            heap.push(Reverse((c.key(), s)));
        }
    }
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
                parent[y] = Some((x, e));
                heap.push(Reverse((cand.key(), y)));
            }
        }
    }
    (dist, parent)
}

/// Node and edge sequence of a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

/// Path from `u` to `v` maximizing the product of edge values; among equal
/// products the lexicographically smallest node sequence.
pub fn max_product_path(g: &NetworkGraph, w: &EdgeWeighting, u: NodeId, v: NodeId) -> Result<Path> {
    if u >= g.node_count() || v >= g.node_count() {
        return Err(Error::InvalidArgument(format!("nodes ({u},{v}) not in graph")));
    }
    if u == v {
        return Ok(Path { nodes: vec![u], edges: vec![] });
    }
    let (to_v, parent) = dijkstra(g, w, &[(v, Cost::ZERO)]);
    if !to_v[u].is_finite() {
        return Err(Error::NoRoute(format!("no path between {u} and {v}")));
    }
    let mut nodes = vec![u];
    let mut edges = vec![];
    let mut visited = vec![false; g.node_count()];
    visited[u] = true;
    let mut x = u;
    while x != v {
        let step = g.neighbors(x).iter().find(|&&(y, e)| {
            !visited[y] && w.cost(e).is_some_and(|c| (c + to_v[y]).cmp_tol(&to_v[x]) == Ordering::Equal)
        });
        match step {
            Some(&(y, e)) => {
                visited[y] = true;
                nodes.push(y);
                edges.push(e);
                x = y;
            }
            None => return Ok(parent_path(&parent, u)),
        }
    }
    Ok(Path { nodes, edges })
}

/// Path from `u` back to the Dijkstra root along parent pointers.
fn parent_path(parent: &[Option<(NodeId, EdgeId)>], u: NodeId) -> Path {
    let mut nodes = vec![u];
    let mut edges = vec![];
    let mut x = u;
    while let Some((p, e)) = parent[x] {
        nodes.push(p);
        edges.push(e);
        x = p;
    }
    Path { nodes, edges }
}

/// Single-path route selection: maximize `p_R`, break ties by `w_R` of fresh
/// links, then by smallest centre id. Star centres range over non-users.
pub fn select_single_path(
    g: &NetworkGraph,
    users: &UserSet,
    kind: RouteKind,
) -> Result<(Option<NodeId>, RoutingSolution)> {
    g.require_connected()?;
    let w = EdgeWeighting::generation(g);
    match kind {
        RouteKind::Tree => Ok((None, steiner_tree(g, &w, users)?)),
        RouteKind::Star => {
            let mut best: Option<(Cost, RoutingSolution)> = None;
            for v in (0..g.node_count()).filter(|&v| !users.contains(v)) {
                if g.degree(v) < users.len() {
                    continue;
                }
                if let Ok((sol, cost)) = star_route_with_cost(g, &w, users, v) {
                    if best.as_ref().is_none_or(|(b, _)| cost.less(b)) {
                        best = Some((cost, sol));
                    }
                }
            }
            let (_, sol) = best.ok_or_else(|| Error::NoRoute("no centre admits an edge-disjoint star".into()))?;
            Ok((sol.center, sol))
        }
    }
}

/// Multi-path route selection over live links: the feasible solution
/// maximizing `w_R`, or `None` if the link-state graph admits none.
///
/// `live_werner[e]` is the current Werner parameter of the link on `e`.
pub fn select_multipath(
    g: &NetworkGraph,
    live_werner: &[Option<f64>],
    users: &UserSet,
    kind: RouteKind,
    center: Option<NodeId>,
) -> Option<RoutingSolution> {
    let w = EdgeWeighting::werner(live_werner);
    match kind {
        RouteKind::Tree => {
            if !users_connected(g, &w, users.as_slice()) {
                return None;
            }
            steiner_tree(g, &w, users).ok()
        }
        RouteKind::Star => {
            let c = center?;
            if edge_disjoint_path_count(g, |e| w.is_available(e), c, users) < users.len() {
                return None;
            }
            star_route(g, &w, users, c).ok()
        }
    }
}

/// Whether all `nodes` lie in one component of the available edges.
pub fn users_connected(g: &NetworkGraph, w: &EdgeWeighting, nodes: &[NodeId]) -> bool {
    let mut parent: Vec<usize> = (0..g.node_count()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (id, e) in g.edges().iter().enumerate() {
        if w.is_available(id) {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let root = find(&mut parent, nodes[0]);
    nodes[1..].iter().all(|&x| find(&mut parent, x) == root)
}
