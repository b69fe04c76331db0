//! Rate versus user separation: corner users on growing grids, with the
//! cutoff chosen per grid to maximise the rate under a fidelity floor.

use std::collections::BTreeMap;
use std::path::Path;

use ghznetsim::engine::UsersSpec;
use ghznetsim::ProtocolKind;
use serde::{Deserialize, Serialize};

use crate::output::{fmt_float, Row};
use crate::svg::{Plot, Point, Series};
use crate::{CliError, ExperimentSpec};

pub const DISTANCE_CSV: &str = "distance.csv";

/// Defaults of the distance experiment: corner users on 3x3 to 6x6 grids,
/// p = 0.3, every cutoff in 1..=20.
pub fn default_spec() -> ExperimentSpec {
    let mut spec = ExperimentSpec { grid: vec![3, 4, 5, 6], p: vec![0.3], ..ExperimentSpec::default() };
    spec.base.users = UsersSpec::Corners;
    spec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub protocol: ProtocolKind,
    pub p: f64,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    /// Chosen cutoff; empty when no cutoff meets the floor.
    #[serde(rename = "Qc")]
    pub q_c: Option<u32>,
    pub dr: f64,
    pub dr_lo: f64,
    pub dr_hi: f64,
    pub mean_fidelity: f64,
    pub successes: u64,
    pub status: String,
}

impl DistanceRow {
    pub fn is_feasible(&self) -> bool {
        self.q_c.is_some()
    }
}

/// For every (protocol, p, M) present in `rows`, the reported point of
/// highest rate whose mean fidelity is at least `floor`; ties go to the
/// smaller cutoff.
pub fn select(rows: &[Row], floor: f64) -> Vec<DistanceRow> {
    let mut best: BTreeMap<(ProtocolKind, u64, Option<usize>), Option<&Row>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.is_pooled()) {
        let slot = best.entry((r.protocol, r.p.to_bits(), r.m)).or_default();
        if !(r.is_reported() && r.mean_fidelity >= floor) {
            continue;
        }
        let better = match slot {
            None => true,
            Some(b) => r.dr > b.dr || (r.dr == b.dr && r.q_c < b.q_c),
        };
        if better {
            *slot = Some(r);
        }
    }
    best.into_iter()
        .map(|((protocol, p, m), r)| match r {
            Some(r) => DistanceRow {
                protocol,
                p: r.p,
                m,
                q_c: Some(r.q_c),
                dr: r.dr,
                dr_lo: r.dr_lo,
                dr_hi: r.dr_hi,
                mean_fidelity: r.mean_fidelity,
                successes: r.successes,
                status: "ok".into(),
            },
            None => DistanceRow {
                protocol,
                p: f64::from_bits(p),
                m,
                q_c: None,
                dr: f64::NAN,
                dr_lo: f64::NAN,
                dr_hi: f64::NAN,
                mean_fidelity: f64::NAN,
                successes: 0,
                status: "infeasible".into(),
            },
        })
        .collect()
}

pub fn write_csv(path: &Path, rows: &[DistanceRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["protocol", "p", "M", "Qc", "dr", "dr_lo", "dr_hi", "mean_fidelity", "successes", "status"])?;
    for r in rows {
        w.write_record([
            r.protocol.to_string(),
            fmt_float(r.p),
            r.m.map_or(String::new(), |m| m.to_string()),
            r.q_c.map_or(String::new(), |q| q.to_string()),
            fmt_float(r.dr),
            fmt_float(r.dr_lo),
            fmt_float(r.dr_hi),
            fmt_float(r.mean_fidelity),
            r.successes.to_string(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<DistanceRow>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

pub fn plot(rows: &[DistanceRow], floor: f64) -> Plot {
    let mut by: BTreeMap<(ProtocolKind, u64), Vec<Point>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.is_feasible()) {
        let Some(m) = r.m else { continue };
        by.entry((r.protocol, r.p.to_bits())).or_default().push(Point {
            x: m as f64,
            y: r.dr,
            label: r.q_c.map(|q| format!("Qc={q}")),
            y_err: Some((r.dr_lo, r.dr_hi)),
        });
    }
    let many_p = by.keys().map(|k| k.1).collect::<std::collections::BTreeSet<_>>().len() > 1;
    let series = by
        .into_iter()
        .map(|((k, p), points)| Series {
            name: if many_p { format!("{k} p={}", f64::from_bits(p)) } else { k.to_string() },
            points,
            connect: true,
        })
        .collect();
    Plot {
        title: format!("Rate vs grid size, corner users, mean fidelity >= {floor:.3}"),
        x_label: "grid side M".into(),
        y_label: "distribution rate (99.9% CI)".into(),
        log_x: false,
        log_y: true,
        series,
    }
}
