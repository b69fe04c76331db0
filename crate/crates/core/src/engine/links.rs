use serde::Serialize;

use crate::noise::DecoherenceModel;
use crate::topology::{EdgeId, NetworkGraph, NodeId};

/// A live shared Bell pair on one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EntanglementLink {
    pub edge: EdgeId,
    /// Timeslots stored since generation.
    pub age: u32,
}

/// Live links, at most one per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkStateGraph {
    ages: Vec<Option<u32>>,
}

impl LinkStateGraph {
    pub fn new(edge_count: usize) -> Self {
        Self { ages: vec![None; edge_count] }
    }

    pub fn age(&self, e: EdgeId) -> Option<u32> {
        self.ages[e]
    }

    pub fn is_live(&self, e: EdgeId) -> bool {
        self.ages[e].is_some()
    }

    /// Stores a fresh link on `e`, replacing nothing: the edge must be free.
    pub fn create(&mut self, e: EdgeId) {
        debug_assert!(self.ages[e].is_none(), "edge {e} already occupied");
        self.ages[e] = Some(0);
    }

    pub fn consume(&mut self, e: EdgeId) {
        self.ages[e] = None;
    }

    pub fn clear(&mut self) {
        self.ages.iter_mut().for_each(|a| *a = None);
    }

    /// Ages every link by one slot and drops those reaching `cutoff`.
    /// Returns the number dropped.
    pub fn advance(&mut self, cutoff: u32) -> usize {
        let mut dropped = 0;
        for slot in &mut self.ages {
            if let Some(a) = slot {
                *a += 1;
                if *a >= cutoff {
                    *slot = None;
                    dropped += 1;
                }
            }
        }
        dropped
    }

    pub fn live_count(&self) -> usize {
        self.ages.iter().filter(|a| a.is_some()).count()
    }

    pub fn links(&self) -> impl Iterator<Item = EntanglementLink> + '_ {
        self.ages.iter().enumerate().filter_map(|(edge, a)| a.map(|age| EntanglementLink { edge, age }))
    }

    pub fn live_degree(&self, g: &NetworkGraph, x: NodeId) -> usize {
        g.neighbors(x).iter().filter(|&&(_, e)| self.is_live(e)).count()
    }

    /// Current `w0_e Δ^τ_e` per edge, `None` where no link is stored.
    pub fn werner_values(&self, g: &NetworkGraph, model: &DecoherenceModel<f64>) -> Vec<Option<f64>> {
        self.ages
            .iter()
            .enumerate()
            .map(|(e, a)| a.map(|age| g.edge(e).w0 * model.delta().powi(age as i32)))
            .collect()
    }
}
