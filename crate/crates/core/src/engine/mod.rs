//! Timeslot simulation: link lifecycle, trials, and per-experiment
//! aggregation.
//!
//! Each timeslot runs three phases: live links age by one slot and links
//! reaching the cutoff are discarded; every tracked, unoccupied edge makes
//! one generation attempt; the protocol then checks whether a GHZ state can
//! be produced. A trial ends at its first success.

mod links;
pub mod rng;
mod stats;

use log::{debug, info};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use links::{EntanglementLink, LinkStateGraph};
pub use stats::dr_confidence_interval;

use crate::error::{invalid, Error, Result};
use crate::noise::DecoherenceModel;
use crate::protocols::{realize_ghz, ProtocolKind, ProtocolState, Realized};
use crate::routing::RoutingSolution;
use crate::topology::{grid_corners, make_grid, GraphJson, NetworkGraph, NodeId, UserSet};

/// Confidence level of every reported rate interval.
pub const CI_LEVEL: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum GraphSpec {
    /// `m × m` grid with uniform `p` and `w0` from the config.
    Grid { m: usize },
    /// Explicit graph; its per-edge values are used as given.
    Custom { graph: GraphJson },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum UsersSpec {
    /// A fresh uniformly random set of `count` nodes per user set.
    Random { count: usize },
    /// The four grid corners; a single user set.
    Corners,
    /// A fixed list; a single user set.
    Explicit { nodes: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub graph: GraphSpec,
    pub users: UsersSpec,
    pub protocol: ProtocolKind,
    pub p: f64,
    pub w0: f64,
    pub delta: f64,
    pub q_c: u32,
    /// Timeslot budget per user set, shared by its trials.
    pub max_timeslots: u64,
    pub target_successes: u64,
    pub user_sets: usize,
    /// Pooled results with fewer successes than this are omitted.
    pub min_total_successes: u64,
    pub seed: u64,
    /// Keep every trial record in the outcome.
    pub record_trials: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            graph: GraphSpec::Grid { m: 6 },
            users: UsersSpec::Random { count: 4 },
            protocol: ProtocolKind::MpT,
            p: 0.1,
            w0: 0.987,
            delta: 0.99,
            q_c: 10,
            max_timeslots: 1_000_000,
            target_successes: 100,
            user_sets: 20,
            min_total_successes: 200,
            seed: 1,
            record_trials: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q_c < 1 {
            return invalid("cutoff Q_c must be at least 1");
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return invalid(format!("generation probability {} outside (0,1]", self.p));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return invalid(format!("decoherence constant {} outside (0,1]", self.delta));
        }
        if !(0.0..=1.0).contains(&self.w0) {
            return invalid(format!("Werner parameter {} outside [0,1]", self.w0));
        }
        if self.max_timeslots == 0 || self.target_successes == 0 || self.user_sets == 0 {
            return invalid("timeslot budget, target successes and user sets must be positive");
        }
        Ok(())
    }

    pub fn build_graph(&self) -> Result<NetworkGraph> {
        match &self.graph {
            GraphSpec::Grid { m } => make_grid(*m, self.p, self.w0),
            GraphSpec::Custom { graph } => NetworkGraph::from_json(graph),
        }
    }

    /// Number of distinct user sets the experiment will run. A fixed user
    /// list runs as one set carrying the combined target and budget of
    /// `user_sets` identical sets.
    pub fn effective_user_sets(&self) -> usize {
        match self.users {
            UsersSpec::Random { .. } => self.user_sets,
            _ => 1,
        }
    }

    fn per_set_scale(&self) -> u64 {
        (self.user_sets / self.effective_user_sets()) as u64
    }

    /// Success target of each effective user set.
    pub fn set_target(&self) -> u64 {
        self.target_successes.saturating_mul(self.per_set_scale())
    }

    /// Timeslot budget of each effective user set.
    pub fn set_budget(&self) -> u64 {
        self.max_timeslots.saturating_mul(self.per_set_scale())
    }

    /// The `index`-th user set. Random sets depend only on the seed and the
    /// index, so every protocol and cutoff sees the same sets.
    pub fn user_set(&self, g: &NetworkGraph, index: usize) -> Result<UserSet> {
        match &self.users {
            UsersSpec::Random { count } => {
                if *count > g.node_count() {
                    return invalid(format!("{count} users on a {}-node graph", g.node_count()));
                }
                let mut r = rng::stream(self.seed, &[rng::USERS_STREAM, index as u64]);
                let mut nodes = sample(&mut r, g.node_count(), *count).into_vec();
                nodes.sort_unstable();
                UserSet::new(g, nodes)
            }
            UsersSpec::Corners => {
                let m = g.grid_side().ok_or_else(|| Error::InvalidArgument("corner users need a square grid".into()))?;
                UserSet::new(g, grid_corners(m))
            }
            UsersSpec::Explicit { nodes } => UserSet::new(g, nodes.clone()),
        }
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub user_set: usize,
    pub trial: usize,
    /// Slots elapsed: the 1-based success slot, or the censored length.
    pub timeslots: u64,
    pub success: bool,
    pub realized: Option<Realized>,
    pub route: Option<RoutingSolution>,
}

/// One timeslot's link phases (aging/discard, then generation).
pub fn step<R: Rng>(links: &mut LinkStateGraph, state: &ProtocolState, g: &NetworkGraph, q_c: u32, rng: &mut R) {
    links.advance(q_c);
    for &e in &state.tracked_edges {
        if !links.is_live(e) && rng.random::<f64>() < g.edge(e).gen_prob {
            links.create(e);
        }
    }
}

/// Runs one trial for at most `max_timeslots` slots.
pub fn simulate_trial<R: Rng>(
    g: &NetworkGraph,
    state: &ProtocolState,
    model: &DecoherenceModel<f64>,
    q_c: u32,
    max_timeslots: u64,
    rng: &mut R,
) -> Result<(u64, Option<(RoutingSolution, Realized)>)> {
    let mut links = LinkStateGraph::new(g.edge_count());
    for t in 1..=max_timeslots {
        step(&mut links, state, g, q_c, rng);
        if let Some(route) = state.try_complete(g, &links, model) {
            let realized = realize_ghz(g, &links, &route, &state.users, model)?;
            for &e in &realized.consumed {
                links.consume(e);
            }
            return Ok((t, Some((route, realized))));
        }
    }
    Ok((max_timeslots, None))
}

/// Single trial of `config` on user set 0 with the given stream seed.
pub fn run_trial(config: &SimConfig, seed: u64) -> Result<TrialResult> {
    config.validate()?;
    let g = config.build_graph()?;
    let users = config.user_set(&g, 0)?;
    let state = ProtocolState::initialize(config.protocol, &g, &users)?;
    let model = DecoherenceModel::new(config.delta)?;
    let mut r = rng::stream(seed, &[]);
    let (timeslots, done) = simulate_trial(&g, &state, &model, config.q_c, config.max_timeslots, &mut r)?;
    Ok(TrialResult {
        user_set: 0,
        trial: 0,
        timeslots,
        success: done.is_some(),
        route: done.as_ref().map(|(r, _)| r.clone()),
        realized: done.map(|(_, x)| x),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetStatus {
    Ok,
    /// No success within the budget.
    NoSuccess,
    /// The protocol admits no route for these users.
    Infeasible,
    /// Pooled only: dropped by the omission rule.
    Omitted,
}

impl SetStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SetStatus::Ok => "ok",
            SetStatus::NoSuccess => "no_success",
            SetStatus::Infeasible => "infeasible",
            SetStatus::Omitted => "omitted",
        }
    }
}

/// Rate, fidelity and route statistics of one user set or a pooled point.
/// Means over successes are NaN when there are none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateMetrics {
    pub dr: f64,
    pub dr_lo: f64,
    pub dr_hi: f64,
    pub mean_fidelity: f64,
    pub mean_r_size: f64,
    pub mean_age: f64,
    pub successes: u64,
    pub timeouts: u64,
    pub timeslots: u64,
    /// Mean of `(F - w_R) / F` over successes.
    pub mean_werner_gap: f64,
    /// Mean of `(F - ∏F_B) / F` over successes.
    pub mean_branch_gap: f64,
    pub status: SetStatus,
}

impl AggregateMetrics {
    fn empty(status: SetStatus) -> Self {
        Self {
            dr: 0.0,
            dr_lo: 0.0,
            dr_hi: 0.0,
            mean_fidelity: f64::NAN,
            mean_r_size: f64::NAN,
            mean_age: f64::NAN,
            successes: 0,
            timeouts: 0,
            timeslots: 0,
            mean_werner_gap: f64::NAN,
            mean_branch_gap: f64::NAN,
            status,
        }
    }

    fn from_trials(trials: &[TrialResult]) -> Result<Self> {
        let timeslots: u64 = trials.iter().map(|t| t.timeslots).sum();
        let done: Vec<&Realized> = trials.iter().filter_map(|t| t.realized.as_ref()).collect();
        let successes = done.len() as u64;
        let timeouts = trials.len() as u64 - successes;
        if timeslots == 0 {
            return Ok(Self::empty(SetStatus::NoSuccess));
        }
        let (dr_lo, dr_hi) = dr_confidence_interval(successes, timeslots, CI_LEVEL)?;
        let mean = |f: &dyn Fn(&Realized) -> f64| {
            if done.is_empty() {
                f64::NAN
            } else {
                done.iter().map(|r| f(r)).sum::<f64>() / done.len() as f64
            }
        };
        Ok(Self {
            dr: successes as f64 / timeslots as f64,
            dr_lo,
            dr_hi,
            mean_fidelity: mean(&|r| r.fidelity),
            mean_r_size: mean(&|r| r.r_size as f64),
            mean_age: mean(&|r| r.mean_age),
            successes,
            timeouts,
            timeslots,
            mean_werner_gap: mean(&|r| (r.fidelity - r.werner_product) / r.fidelity),
            mean_branch_gap: mean(&|r| (r.fidelity - r.branch_fidelity_product) / r.fidelity),
            status: if successes > 0 { SetStatus::Ok } else { SetStatus::NoSuccess },
        })
    }

    /// Averages per-set values; the interval is the mean of the per-set
    /// bounds.
    fn pooled(sets: &[AggregateMetrics], min_total_successes: u64) -> Self {
        let n = sets.len() as f64;
        let avg = |f: &dyn Fn(&AggregateMetrics) -> f64| sets.iter().map(f).sum::<f64>() / n;
        let with_success: Vec<&AggregateMetrics> = sets.iter().filter(|s| s.successes > 0).collect();
        let avg_ok = |f: &dyn Fn(&AggregateMetrics) -> f64| {
            if with_success.is_empty() {
                f64::NAN
            } else {
                with_success.iter().map(|s| f(s)).sum::<f64>() / with_success.len() as f64
            }
        };
        let successes = sets.iter().map(|s| s.successes).sum();
        let omitted = sets.iter().any(|s| s.successes == 0) || successes < min_total_successes;
        Self {
            dr: avg(&|s| s.dr),
            dr_lo: avg(&|s| s.dr_lo),
            dr_hi: avg(&|s| s.dr_hi),
            mean_fidelity: avg_ok(&|s| s.mean_fidelity),
            mean_r_size: avg_ok(&|s| s.mean_r_size),
            mean_age: avg_ok(&|s| s.mean_age),
            successes,
            timeouts: sets.iter().map(|s| s.timeouts).sum(),
            timeslots: sets.iter().map(|s| s.timeslots).sum(),
            mean_werner_gap: avg_ok(&|s| s.mean_werner_gap),
            mean_branch_gap: avg_ok(&|s| s.mean_branch_gap),
            status: if omitted { SetStatus::Omitted } else { SetStatus::Ok },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserSetOutcome {
    pub index: usize,
    pub users: Vec<NodeId>,
    pub center: Option<NodeId>,
    pub metrics: AggregateMetrics,
    pub trials: Vec<TrialResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub config: SimConfig,
    pub per_set: Vec<UserSetOutcome>,
    pub pooled: AggregateMetrics,
}

impl ExperimentOutcome {
    pub fn trials(&self) -> impl Iterator<Item = &TrialResult> {
        self.per_set.iter().flat_map(|s| s.trials.iter())
    }
}

/// Runs trials on one user set until `target_successes` or the shared
/// timeslot budget is reached.
fn run_user_set(config: &SimConfig, g: &NetworkGraph, model: &DecoherenceModel<f64>, index: usize) -> Result<UserSetOutcome> {
    let users = config.user_set(g, index)?;
    let state = match ProtocolState::initialize(config.protocol, g, &users) {
        Ok(s) => s,
        Err(Error::NoRoute(msg)) => {
            info!("{} user set {index} {:?}: {msg}", config.protocol, users.as_slice());
            return Ok(UserSetOutcome {
                index,
                users: users.as_slice().to_vec(),
                center: None,
                metrics: AggregateMetrics::empty(SetStatus::Infeasible),
                trials: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    let mut trials = Vec::new();
    let mut used = 0u64;
    let mut successes = 0u64;
    let (target, budget) = (config.set_target(), config.set_budget());
    while successes < target && used < budget {
        let trial = trials.len();
        let mut r = rng::stream(config.seed, &[rng::TRIAL_STREAM, index as u64, trial as u64]);
        let (t, done) = simulate_trial(g, &state, model, config.q_c, budget - used, &mut r)?;
        used += t;
        successes += done.is_some() as u64;
        trials.push(TrialResult {
            user_set: index,
            trial,
            timeslots: t,
            success: done.is_some(),
            route: done.as_ref().map(|(r, _)| r.clone()),
            realized: done.map(|(_, x)| x),
        });
    }
    let metrics = AggregateMetrics::from_trials(&trials)?;
    debug!(
        "{} Qc={} set {index}: {} successes in {} slots",
        config.protocol, config.q_c, metrics.successes, metrics.timeslots
    );
    Ok(UserSetOutcome {
        index,
        users: users.as_slice().to_vec(),
        center: state.center,
        metrics,
        trials: if config.record_trials { trials } else { Vec::new() },
    })
}

/// Runs every user set (in parallel) and pools the results in index order.
pub fn run_experiment(config: &SimConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let g = config.build_graph()?;
    g.require_connected()?;
    let model = DecoherenceModel::new(config.delta)?;
    let per_set = (0..config.effective_user_sets())
        .into_par_iter()
        .map(|i| run_user_set(config, &g, &model, i))
        .collect::<Result<Vec<_>>>()?;
    let metrics: Vec<AggregateMetrics> = per_set.iter().map(|s| s.metrics.clone()).collect();
    let pooled = AggregateMetrics::pooled(&metrics, config.min_total_successes);
    Ok(ExperimentOutcome { config: config.clone(), per_set, pooled })
}
