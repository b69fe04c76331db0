use std::collections::VecDeque;

use super::{Cost, EdgeWeighting, RoutingSolution};
use crate::error::{Error, Result};
use crate::topology::{EdgeId, NetworkGraph, NodeId, UserSet};

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: u32,
    cost: Cost,
    rev: usize,
}

/// Residual network: every usable undirected edge becomes two opposing unit
/// arcs, every user gets a unit arc into a super-sink.
struct FlowNet {
    adj: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
    /// Arc ids of the two directions (u->v, v->u) per graph edge.
    edge_arcs: Vec<Option<(usize, usize)>>,
    sink_arcs: Vec<(NodeId, usize)>,
    sink: usize,
}

impl FlowNet {
    fn build(g: &NetworkGraph, cost_of: impl Fn(EdgeId) -> Option<Cost>, users: &UserSet) -> Self {
        let sink = g.node_count();
        let mut net = Self {
            adj: vec![Vec::new(); sink + 1],
            arcs: Vec::new(),
            edge_arcs: vec![None; g.edge_count()],
            sink_arcs: Vec::new(),
            sink,
        };
        for (id, e) in g.edges().iter().enumerate() {
            if let Some(c) = cost_of(id) {
                let a = net.add_arc(e.u, e.v, c);
                let b = net.add_arc(e.v, e.u, c);
                net.edge_arcs[id] = Some((a, b));
            }
        }
        for &u in users.sorted().iter() {
            let a = net.add_arc(u, sink, Cost::ZERO);
            net.sink_arcs.push((u, a));
        }
        net
    }

    fn add_arc(&mut self, from: usize, to: usize, cost: Cost) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap: 1, cost, rev: id + 1 });
        self.arcs.push(Arc { to: from, cap: 0, cost: -cost, rev: id });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    fn push(&mut self, arc: usize) {
        self.arcs[arc].cap -= 1;
        let r = self.arcs[arc].rev;
        self.arcs[r].cap += 1;
    }

    fn flow(&self, arc: usize) -> bool {
        self.arcs[arc].cap == 0
    }

    /// Cheapest residual path by Bellman-Ford (queue based); returns the arcs
    /// used, source side first.
    fn cheapest_path(&self, source: usize) -> Option<Vec<usize>> {
        let n = self.adj.len();
        let mut dist = vec![Cost::INFINITY; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut queued = vec![false; n];
        let mut queue = VecDeque::from([source]);
        dist[source] = Cost::ZERO;
        queued[source] = true;
        let mut pops = 0usize;
        while let Some(x) = queue.pop_front() {
            queued[x] = false;
            pops += 1;
            if pops > n * self.arcs.len() + n {
                return None;
            }
            for &a in &self.adj[x] {
                let arc = &self.arcs[a];
                if arc.cap == 0 {
                    continue;
                }
                let cand = dist[x] + arc.cost;
                if cand.less(&dist[arc.to]) {
                    dist[arc.to] = cand;
                    via[arc.to] = Some(a);
                    if !queued[arc.to] {
                        queued[arc.to] = true;
                        queue.push_back(arc.to);
                    }
                }
            }
        }
        let mut path = Vec::new();
        let mut x = self.sink;
        while x != source {
            let a = via[x]?;
            path.push(a);
            x = self.arcs[self.arcs[a].rev].to;
            if path.len() > n {
                return None;
            }
        }
        path.reverse();
        Some(path)
    }

    /// Any augmenting path by BFS.
    fn any_path(&self, source: usize) -> Option<Vec<usize>> {
        let n = self.adj.len();
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            if x == self.sink {
                break;
            }
            for &a in &self.adj[x] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    via[arc.to] = Some(a);
                    queue.push_back(arc.to);
                }
            }
        }
        let mut path = Vec::new();
        let mut x = self.sink;
        while x != source {
            let a = via[x]?;
            path.push(a);
            x = self.arcs[self.arcs[a].rev].to;
        }
        Some(path)
    }
}

/// Maximum number of edge-disjoint paths from `center` to distinct users,
/// counting only edges for which `available` holds.
pub fn edge_disjoint_path_count(
    g: &NetworkGraph,
    available: impl Fn(EdgeId) -> bool,
    center: NodeId,
    users: &UserSet,
) -> usize {
    if center >= g.node_count() || users.contains(center) {
        return 0;
    }
    let mut net = FlowNet::build(g, |e| available(e).then_some(Cost::ZERO), users);
    let mut flow = 0;
    while flow < users.len() {
        let Some(path) = net.any_path(center) else { break };
        for a in path {
            net.push(a);
        }
        flow += 1;
    }
    flow
}

/// Minimum-cost set of edge-disjoint paths from `center` to every user.
pub fn star_route(g: &NetworkGraph, w: &EdgeWeighting, users: &UserSet, center: NodeId) -> Result<RoutingSolution> {
    star_route_with_cost(g, w, users, center).map(|(s, _)| s)
}

/// [`star_route`] together with the total cost of its edges.
pub fn star_route_with_cost(
    g: &NetworkGraph,
    w: &EdgeWeighting,
    users: &UserSet,
    center: NodeId,
) -> Result<(RoutingSolution, Cost)> {
    if center >= g.node_count() {
        return Err(Error::InvalidArgument(format!("centre {center} not in graph")));
    }
    if users.contains(center) {
        return Err(Error::InvalidArgument(format!("centre {center} is a user")));
    }
    let mut net = FlowNet::build(g, |e| w.cost(e), users);
    for k in 0..users.len() {
        let path = net.cheapest_path(center).ok_or_else(|| {
            Error::NoRoute(format!("centre {center} reaches only {k} of {} users edge-disjointly", users.len()))
        })?;
        for a in path {
            net.push(a);
        }
    }

    // Net flow per edge; opposite unit flows cancel.
    let mut out: Vec<Vec<(NodeId, EdgeId)>> = vec![Vec::new(); g.node_count()];
    for (id, arcs) in net.edge_arcs.iter().enumerate() {
        let Some((a, b)) = *arcs else { continue };
        let e = g.edge(id);
        match (net.flow(a), net.flow(b)) {
            (true, false) => out[e.u].push((e.v, id)),
            (false, true) => out[e.v].push((e.u, id)),
            _ => {}
        }
    }
    for o in &mut out {
        o.sort_unstable();
    }
    let mut pending: Vec<bool> = vec![false; g.node_count()];
    for &(u, a) in &net.sink_arcs {
        pending[u] = net.flow(a);
    }

    let mut paths = Vec::with_capacity(users.len());
    for _ in 0..users.len() {
        let mut nodes = vec![center];
        let mut x = center;
        loop {
            if x != center && pending[x] {
                pending[x] = false;
                break;
            }
            if out[x].is_empty() {
                return Err(Error::Internal(format!("flow decomposition stuck at node {x}")));
            }
            let (y, _) = out[x].remove(0);
            if let Some(pos) = nodes.iter().position(|&v| v == y) {
                nodes.truncate(pos + 1);
            } else {
                nodes.push(y);
            }
            x = y;
        }
        paths.push(nodes);
    }
    let sol = RoutingSolution::star(g, center, paths, users)?;
    let cost = w.total(&sol.edges);
    Ok((sol, cost))
}
