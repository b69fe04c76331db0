use crate::error::{invalid, Result};
use crate::noise::{Fidelity, WernerParam};
use crate::routing::RoutingSolution;
use crate::scalar::Scalar;
use crate::topology::{EdgeId, NodeId, UserSet};

use super::{fuse, remove_qubit, swap, werner_state, GhzDiagonalState};

/// One branch of a route: its two endpoint nodes and the Werner parameters
/// of its links in path order.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchLinks<T> {
    pub ends: (NodeId, NodeId),
    pub links: Vec<WernerParam<T>>,
}

struct Fragment<T> {
    state: GhzDiagonalState<T>,
    holders: Vec<NodeId>,
}

/// GHZ fidelity produced from a set of branches: swap along each branch,
/// fuse at every node holding several qubits (ascending node id), then
/// X-measure every qubit not held by a user.
pub fn ghz_fidelity_from_branches<T: Scalar>(branches: &[BranchLinks<T>], users: &[NodeId]) -> Result<Fidelity<T>> {
    if users.len() < 2 {
        return invalid("need at least 2 users");
    }
    if branches.is_empty() {
        return invalid("route has no branches");
    }
    let mut frags = Vec::with_capacity(branches.len());
    for b in branches {
        let mut links = b.links.iter();
        let first = links.next().ok_or_else(|| {
            crate::Error::InvalidArgument(format!("branch {:?} has no links", b.ends))
        })?;
        let bell = links.fold(werner_state(*first), |acc, &w| swap(&acc, &werner_state(w)));
        frags.push(Fragment { state: bell.into(), holders: vec![b.ends.0, b.ends.1] });
    }

    let mut nodes: Vec<NodeId> = frags.iter().flat_map(|f| f.holders.iter().copied()).collect();
    nodes.sort_unstable();
    nodes.dedup();
    for node in nodes {
        loop {
            let mut hits = frags
                .iter()
                .enumerate()
                .filter(|(_, f)| f.holders.contains(&node))
                .map(|(i, _)| i);
            let (Some(i), Some(j)) = (hits.next(), hits.next()) else { break };
            let b = frags.remove(j);
            let a = &mut frags[i];
            let qa = position(&a.holders, node);
            let qb = position(&b.holders, node);
            a.state = fuse(&a.state, qa, &b.state, qb)?;
            a.holders.extend(b.holders.iter().enumerate().filter(|&(k, _)| k != qb).map(|(_, &h)| h));
        }
        if frags.iter().any(|f| f.holders.iter().filter(|&&h| h == node).count() > 1) {
            return invalid(format!("route contains a cycle through node {node}"));
        }
    }

    if frags.len() != 1 {
        return invalid("route is not connected");
    }
    let mut frag = frags.pop().unwrap();
    if let Some(u) = users.iter().find(|u| !frag.holders.contains(u)) {
        return invalid(format!("user {u} is not spanned by the route"));
    }
    while let Some(q) = frag.holders.iter().position(|h| !users.contains(h)) {
        frag.state = remove_qubit(&frag.state, q)?;
        frag.holders.remove(q);
    }
    Ok(frag.state.fidelity())
}

/// Exact GHZ fidelity produced by a routing solution given the Werner
/// parameter of each of its links at use time.
pub fn tree_ghz_fidelity<T: Scalar>(
    solution: &RoutingSolution,
    werner_of: impl Fn(EdgeId) -> WernerParam<T>,
    users: &UserSet,
) -> Result<Fidelity<T>> {
    solution.check_spans(users)?;
    let branches: Vec<BranchLinks<T>> = solution
        .branches
        .iter()
        .map(|b| BranchLinks {
            ends: (b.nodes[0], *b.nodes.last().unwrap()),
            links: b.edges.iter().map(|&e| werner_of(e)).collect(),
        })
        .collect();
    ghz_fidelity_from_branches(&branches, users.as_slice())
}

fn position(holders: &[NodeId], node: NodeId) -> usize {
    holders.iter().position(|&h| h == node).expect("holder present")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{star_ghz_fidelity, werner_to_fidelity};

    fn w(x: f64) -> WernerParam<f64> {
        WernerParam::new(x).unwrap()
    }

    fn branch(a: NodeId, b: NodeId, ws: &[f64]) -> BranchLinks<f64> {
        BranchLinks { ends: (a, b), links: ws.iter().map(|&x| w(x)).collect() }
    }

    #[test]
    fn two_user_path() {
        let f = ghz_fidelity_from_branches(&[branch(0, 5, &[0.9, 0.8])], &[0, 5]).unwrap();
        assert!((f.value() - (3.0 * 0.72 + 1.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn star_matches_closed_form() {
        let wb = [0.9 * 0.95, 0.97, 0.88 * 0.99 * 0.93, 0.91];
        let branches = vec![
            branch(10, 1, &[0.9, 0.95]),
            branch(10, 2, &[0.97]),
            branch(10, 3, &[0.88, 0.99, 0.93]),
            branch(10, 4, &[0.91]),
        ];
        let got = ghz_fidelity_from_branches(&branches, &[1, 2, 3, 4]).unwrap().value();
        let fs: Vec<_> = wb.iter().map(|&x| werner_to_fidelity(w(x))).collect();
        let want = star_ghz_fidelity(&fs).unwrap().value();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn perfect_star() {
        let branches: Vec<_> = (1..5).map(|u| branch(0, u, &[1.0])).collect();
        assert_eq!(ghz_fidelity_from_branches(&branches, &[1, 2, 3, 4]).unwrap().value(), 1.0);
    }

    #[test]
    fn fusion_order_does_not_matter() {
        // H-shaped tree: users 0,1 on fork 8, users 2,3 on fork 9, forks joined.
        let a = vec![
            branch(0, 8, &[0.93]),
            branch(1, 8, &[0.97, 0.9]),
            branch(8, 9, &[0.95]),
            branch(9, 2, &[0.91]),
            branch(9, 3, &[0.89, 0.99]),
        ];
        let mut b = a.clone();
        b.reverse();
        let fa = ghz_fidelity_from_branches(&a, &[0, 1, 2, 3]).unwrap().value();
        let fb = ghz_fidelity_from_branches(&b, &[3, 2, 1, 0]).unwrap().value();
        assert!((fa - fb).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_routes() {
        assert!(ghz_fidelity_from_branches(&[branch(0, 1, &[0.9])], &[0, 2]).is_err());
        let disconnected = [branch(0, 1, &[0.9]), branch(2, 3, &[0.9])];
        assert!(ghz_fidelity_from_branches(&disconnected, &[0, 1, 2, 3]).is_err());
        let cycle = [branch(0, 1, &[0.9]), branch(1, 2, &[0.9]), branch(2, 0, &[0.9])];
        assert!(ghz_fidelity_from_branches(&cycle, &[0, 1, 2]).is_err());
        assert!(ghz_fidelity_from_branches(&[branch(0, 1, &[])], &[0, 1]).is_err());
    }
}
