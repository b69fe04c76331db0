//! The four distribution protocols: single-path (sp) plans one route up
//! front and waits for it; multi-path (mp) routes over whatever links are
//! live. Each comes in a star and a tree flavour.

use std::fmt;
use std::str::FromStr;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::engine::LinkStateGraph;
use crate::error::{Error, Result};
use crate::noise::{ghz_fidelity_floor, DecoherenceModel, WernerParam};
use crate::routing::{
    edge_disjoint_path_count, select_multipath, select_single_path, RouteKind, RoutingSolution,
};
use crate::statesim::tree_ghz_fidelity;
use crate::topology::{centroid_ranking, EdgeId, NetworkGraph, NodeId, UserSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProtocolKind {
    #[serde(rename = "sp-s")]
    SpS,
    #[serde(rename = "sp-t")]
    SpT,
    #[serde(rename = "mp-s")]
    MpS,
    #[serde(rename = "mp-t")]
    MpT,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [ProtocolKind::SpS, ProtocolKind::SpT, ProtocolKind::MpS, ProtocolKind::MpT];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::SpS => "sp-s",
            ProtocolKind::SpT => "sp-t",
            ProtocolKind::MpS => "mp-s",
            ProtocolKind::MpT => "mp-t",
        }
    }

    pub fn is_multipath(self) -> bool {
        matches!(self, ProtocolKind::MpS | ProtocolKind::MpT)
    }

    pub fn route_kind(self) -> RouteKind {
        match self {
            ProtocolKind::SpS | ProtocolKind::MpS => RouteKind::Star,
            ProtocolKind::SpT | ProtocolKind::MpT => RouteKind::Tree,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sp-s" => Ok(ProtocolKind::SpS),
            "sp-t" => Ok(ProtocolKind::SpT),
            "mp-s" => Ok(ProtocolKind::MpS),
            "mp-t" => Ok(ProtocolKind::MpT),
            other => Err(Error::InvalidArgument(format!("unknown protocol '{other}'"))),
        }
    }
}

/// Per-trial protocol state.
#[derive(Debug, Clone)]
pub struct ProtocolState {
    pub kind: ProtocolKind,
    pub users: UserSet,
    /// Fixed route of the single-path protocols.
    pub planned_route: Option<RoutingSolution>,
    /// Star centre (sp-s from route selection, mp-s from the centroid).
    pub center: Option<NodeId>,
    /// Edges on which generation is attempted, ascending.
    pub tracked_edges: Vec<EdgeId>,
}

impl ProtocolState {
    pub fn initialize(kind: ProtocolKind, g: &NetworkGraph, users: &UserSet) -> Result<Self> {
        g.require_connected()?;
        let all_edges: Vec<EdgeId> = (0..g.edge_count()).collect();
        let (planned_route, center, tracked_edges) = match kind {
            ProtocolKind::SpS | ProtocolKind::SpT => {
                let (center, route) = select_single_path(g, users, kind.route_kind())?;
                let tracked = route.edges.clone();
                (Some(route), center, tracked)
            }
            ProtocolKind::MpT => (None, None, all_edges),
            ProtocolKind::MpS => (None, Some(multipath_star_center(g, users)?), all_edges),
        };
        Ok(Self { kind, users: users.clone(), planned_route, center, tracked_edges })
    }

    /// Route to realize this timeslot, if the live links admit one.
    pub fn try_complete(&self, g: &NetworkGraph, links: &LinkStateGraph, model: &DecoherenceModel<f64>) -> Option<RoutingSolution> {
        if let Some(route) = &self.planned_route {
            return route.edges.iter().all(|&e| links.is_live(e)).then(|| route.clone());
        }
        if self.kind == ProtocolKind::MpS {
            let c = self.center?;
            if links.live_degree(g, c) < self.users.len()
                || self.users.as_slice().iter().any(|&u| links.live_degree(g, u) == 0)
            {
                return None;
            }
        }
        let live = links.werner_values(g, model);
        select_multipath(g, &live, &self.users, self.kind.route_kind(), self.center)
    }
}

/// Centre for mp-s: the node with the smallest summed hop distance to the
/// users among non-users that admit an edge-disjoint star on the full graph;
/// ties by id.
pub fn multipath_star_center(g: &NetworkGraph, users: &UserSet) -> Result<NodeId> {
    let ranking = centroid_ranking(g, users);
    let best = ranking.first().map(|&(_, v)| v);
    let chosen = ranking
        .into_iter()
        .map(|(_, v)| v)
        .find(|&v| !users.contains(v) && edge_disjoint_path_count(g, |_| true, v, users) >= users.len())
        .ok_or_else(|| Error::NoRoute("no node admits an edge-disjoint star to every user".into()))?;
    if best != Some(chosen) {
        debug!("mp-s centre moved from centroid {:?} to {chosen}", best);
    }
    Ok(chosen)
}

/// Outcome of consuming a route's links into a GHZ state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Realized {
    /// Exact GHZ fidelity.
    pub fidelity: f64,
    /// Product of per-branch Bell fidelities.
    pub branch_fidelity_product: f64,
    /// Product of per-link Werner parameters.
    pub werner_product: f64,
    /// `w0^|R| Δ^(τ̄|R|)` with the smallest `w0` on the route.
    pub floor: f64,
    pub consumed: Vec<EdgeId>,
    pub r_size: usize,
    pub mean_age: f64,
}

/// Fidelity and statistics of the GHZ state produced from `solution`'s live
/// links. The caller removes the consumed links.
pub fn realize_ghz(
    g: &NetworkGraph,
    links: &LinkStateGraph,
    solution: &RoutingSolution,
    users: &UserSet,
    model: &DecoherenceModel<f64>,
) -> Result<Realized> {
    let mut w = vec![0.0; g.edge_count()];
    let mut age_sum = 0u64;
    for &e in &solution.edges {
        let age = links.age(e).ok_or_else(|| Error::Internal(format!("edge {e} has no live link")))?;
        age_sum += u64::from(age);
        w[e] = g.edge(e).w0 * model.delta().powi(age as i32);
    }
    let fidelity = tree_ghz_fidelity(solution, |e| WernerParam::new(w[e]).expect("decohered w in [0,1]"), users)?;
    let branch_fidelity_product = solution
        .branches
        .iter()
        .map(|b| (3.0 * b.edges.iter().map(|&e| w[e]).product::<f64>() + 1.0) / 4.0)
        .product();
    let werner_product = solution.edges.iter().map(|&e| w[e]).product();
    let r_size = solution.size();
    let mean_age = age_sum as f64 / r_size as f64;
    let w0_min = solution.edges.iter().map(|&e| g.edge(e).w0).fold(1.0, f64::min);
    let floor = ghz_fidelity_floor(r_size, mean_age, WernerParam::new(w0_min)?, model.delta())?;
    Ok(Realized {
        fidelity: fidelity.value(),
        branch_fidelity_product,
        werner_product,
        floor,
        consumed: solution.edges.clone(),
        r_size,
        mean_age,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{star_ghz_fidelity, Fidelity};
    use crate::topology::{make_grid, steiner_distance};

    fn model() -> DecoherenceModel<f64> {
        DecoherenceModel::new(0.99).unwrap()
    }

    #[test]
    fn kind_round_trip() {
        for k in ProtocolKind::ALL {
            assert_eq!(k.as_str().parse::<ProtocolKind>().unwrap(), k);
        }
        assert!("sp-x".parse::<ProtocolKind>().is_err());
    }

    #[test]
    fn initial_states() {
        let g = make_grid(6, 0.1, 0.987).unwrap();
        let users = UserSet::new(&g, vec![1, 9, 26, 34]).unwrap();
        let spt = ProtocolState::initialize(ProtocolKind::SpT, &g, &users).unwrap();
        let r = spt.planned_route.as_ref().unwrap();
        assert_eq!(r.size(), steiner_distance(&g, &users).unwrap());
        assert_eq!(spt.tracked_edges, r.edges);
        let mpt = ProtocolState::initialize(ProtocolKind::MpT, &g, &users).unwrap();
        assert!(mpt.planned_route.is_none());
        assert_eq!(mpt.tracked_edges.len(), 60);
        let mps = ProtocolState::initialize(ProtocolKind::MpS, &g, &users).unwrap();
        let c = mps.center.unwrap();
        assert!(!users.contains(c));
        assert_eq!(c, centroid_ranking(&g, &users).iter().find(|(_, v)| !users.contains(*v)).unwrap().1);
    }

    #[test]
    fn single_path_waits_for_its_route() {
        let g = make_grid(3, 0.1, 0.987).unwrap();
        let users = UserSet::new(&g, vec![0, 2]).unwrap();
        let st = ProtocolState::initialize(ProtocolKind::SpT, &g, &users).unwrap();
        let mut links = LinkStateGraph::new(g.edge_count());
        // Detour 0-3-4-5-2 is live but the planned route 0-1-2 is not.
        for (a, b) in [(0, 3), (3, 4), (4, 5), (5, 2)] {
            links.create(g.edge_between(a, b).unwrap());
        }
        assert!(st.try_complete(&g, &links, &model()).is_none());
        let mt = ProtocolState::initialize(ProtocolKind::MpT, &g, &users).unwrap();
        assert_eq!(mt.try_complete(&g, &links, &model()).unwrap().size(), 4);
        links.create(g.edge_between(0, 1).unwrap());
        links.create(g.edge_between(1, 2).unwrap());
        assert_eq!(st.try_complete(&g, &links, &model()), st.planned_route);
    }

    #[test]
    fn realize_star_matches_closed_form() {
        let g = make_grid(3, 0.1, 0.987).unwrap();
        let users = UserSet::new(&g, vec![1, 3, 5, 7]).unwrap();
        let st = ProtocolState::initialize(ProtocolKind::SpS, &g, &users).unwrap();
        assert_eq!(st.center, Some(4));
        let mut links = LinkStateGraph::new(g.edge_count());
        for &e in &st.tracked_edges {
            links.create(e);
        }
        links.advance(20);
        let r = realize_ghz(&g, &links, st.planned_route.as_ref().unwrap(), &users, &model()).unwrap();
        let fb = Fidelity::new((3.0 * 0.987 * 0.99 + 1.0) / 4.0).unwrap();
        let want = star_ghz_fidelity(&[fb; 4]).unwrap().value();
        assert!((r.fidelity - want).abs() < 1e-12);
        assert_eq!(r.mean_age, 1.0);
        assert!(r.fidelity >= r.branch_fidelity_product && r.branch_fidelity_product >= r.werner_product);
        assert!(r.fidelity >= r.floor);
    }

    #[test]
    fn noiseless_realization_is_perfect() {
        let g = make_grid(4, 1.0, 1.0).unwrap();
        let users = UserSet::new(&g, vec![0, 15, 6]).unwrap();
        let st = ProtocolState::initialize(ProtocolKind::SpT, &g, &users).unwrap();
        let mut links = LinkStateGraph::new(g.edge_count());
        for &e in &st.tracked_edges {
            links.create(e);
        }
        let route = st.try_complete(&g, &links, &DecoherenceModel::new(1.0).unwrap()).unwrap();
        let r = realize_ghz(&g, &links, &route, &users, &DecoherenceModel::new(1.0).unwrap()).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_link_is_internal_error() {
        let g = make_grid(3, 0.1, 0.987).unwrap();
        let users = UserSet::new(&g, vec![0, 2]).unwrap();
        let st = ProtocolState::initialize(ProtocolKind::SpT, &g, &users).unwrap();
        let links = LinkStateGraph::new(g.edge_count());
        assert!(matches!(
            realize_ghz(&g, &links, st.planned_route.as_ref().unwrap(), &users, &model()),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn tree_beats_star_on_same_snapshot() {
        let g = make_grid(4, 0.1, 0.987).unwrap();
        let users = UserSet::new(&g, vec![0, 3, 12, 15]).unwrap();
        let mut links = LinkStateGraph::new(g.edge_count());
        for e in 0..g.edge_count() {
            links.create(e);
            if e % 3 == 0 {
                links.advance(30);
            }
        }
        let mps = ProtocolState::initialize(ProtocolKind::MpS, &g, &users).unwrap();
        let mpt = ProtocolState::initialize(ProtocolKind::MpT, &g, &users).unwrap();
        let live = links.werner_values(&g, &model());
        let wr = |s: &RoutingSolution| s.edges.iter().map(|&e| live[e].unwrap()).product::<f64>();
        let (s, t) = (
            mps.try_complete(&g, &links, &model()).unwrap(),
            mpt.try_complete(&g, &links, &model()).unwrap(),
        );
        assert!(wr(&t) >= wr(&s) - 1e-12);
    }
}
