//! Runs one experiment per sweep point in a fixed order.

use ghznetsim::engine::ExperimentOutcome;
use ghznetsim::{run_experiment, ProtocolKind};
use log::info;

use crate::{CliError, ExperimentSpec};

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub protocol: ProtocolKind,
    pub p: f64,
    pub m: Option<usize>,
    pub q_c: u32,
    pub outcome: ExperimentOutcome,
}

/// Sweep order: protocol, then p, then grid side, then Q_c.
pub fn sweep_axes(spec: &ExperimentSpec) -> Vec<(ProtocolKind, f64, Option<usize>, u32)> {
    let mut out = Vec::new();
    for &protocol in &spec.protocols {
        for &p in &spec.p {
            for m in spec.grid_axis() {
                for &q in &spec.q_c {
                    out.push((protocol, p, m, q));
                }
            }
        }
    }
    out
}

pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepPoint>, CliError> {
    let axes = sweep_axes(spec);
    let total = axes.len();
    let mut points = Vec::with_capacity(total);
    for (i, (protocol, p, m, q_c)) in axes.into_iter().enumerate() {
        let mut config = spec.point(protocol, p, m, q_c);
        config.record_trials = spec.write_trials;
        let outcome = run_experiment(&config)?;
        let pooled = &outcome.pooled;
        info!(
            "[{}/{total}] {protocol} p={p} M={} Qc={q_c}: dr={:.3e} F={:.4} successes={} ({})",
            i + 1,
            m.map_or("-".to_string(), |m| m.to_string()),
            pooled.dr,
            pooled.mean_fidelity,
            pooled.successes,
            pooled.status.as_str()
        );
        points.push(SweepPoint { protocol, p, m, q_c, outcome });
    }
    Ok(points)
}
