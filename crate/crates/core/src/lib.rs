//! Discrete-timeslot Monte Carlo simulation of multipartite GHZ-state
//! distribution over noisy quantum networks.
//!
//! The crate is layered bottom-up:
//!
//! * [`topology`]: static network graphs, grids, user sets, graph distances.
//! * [`noise`]: closed-form Werner-parameter algebra.
//! * [`statesim`]: exact GHZ-diagonal simulation of swap/fusion/removal, plus a
//!   dense density-matrix oracle.
//! * [`routing`]: max-product paths, Steiner trees, min-cost max-flow stars.
//! * [`protocols`]: the sp-s, sp-t, mp-s and mp-t state machines.
//! * [`engine`]: link lifecycle, trial loop, experiment aggregation.
//!
//! The noise algebra and the state simulator are generic over the scalar
//! type (see [`Scalar`]); the aliases below fix them to `f64`, which is what
//! the routing and simulation layers use.

pub mod engine;
pub mod error;
pub mod noise;
pub mod oracle;
pub mod protocols;
pub mod routing;
pub mod scalar;
pub mod statesim;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use engine::{
    dr_confidence_interval, run_experiment, run_trial, AggregateMetrics, EntanglementLink,
    ExperimentOutcome, GraphSpec, LinkStateGraph, SimConfig, TrialResult, UsersSpec,
};
pub use protocols::{ProtocolKind, ProtocolState};
pub use routing::{RouteKind, RoutingSolution};
pub use topology::{EdgeId, NetworkGraph, NodeId, UserSet};

/// Werner parameter in double precision.
pub type Werner = noise::WernerParam<f64>;
/// Fidelity in double precision.
pub type Fid = noise::Fidelity<f64>;
/// Memory decoherence model in double precision.
pub type Decoherence = noise::DecoherenceModel<f64>;
/// Bell-diagonal two-qubit state in double precision.
pub type BellState = statesim::BellDiagonalState<f64>;
/// GHZ-diagonal n-qubit state in double precision.
pub type GhzState = statesim::GhzDiagonalState<f64>;
