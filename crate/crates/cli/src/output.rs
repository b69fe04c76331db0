//! Result files.
//!
//! `results.csv` holds one pooled row per sweep point and `results_sets.csv`
//! one row per user set, both with the columns
//!
//! ```text
//! protocol,p,Qc,M,user_set,dr,dr_lo,dr_hi,mean_fidelity,mean_r_size,mean_age,successes,timeouts,status
//! ```
//!
//! `user_set` is `pooled` or the set index, `M` is empty for custom graphs,
//! and `status` is `ok`, `no_success`, `infeasible` or `omitted`. Floats are
//! written with 17 significant digits; means over zero successes are `NaN`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ghznetsim::engine::AggregateMetrics;
use ghznetsim::ProtocolKind;
use serde::{Deserialize, Serialize, Serializer};

use crate::sweep::SweepPoint;
use crate::{CliError, ExperimentSpec};

pub const RESULTS_CSV: &str = "results.csv";
pub const SETS_CSV: &str = "results_sets.csv";
pub const POINTS_JSONL: &str = "points.jsonl";
pub const TRIALS_JSONL: &str = "trials.jsonl";
pub const SUMMARY_JSON: &str = "summary.json";

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn ser_float<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_float(*x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub protocol: ProtocolKind,
    #[serde(serialize_with = "ser_float")]
    pub p: f64,
    #[serde(rename = "Qc")]
    pub q_c: u32,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub user_set: String,
    #[serde(serialize_with = "ser_float")]
    pub dr: f64,
    #[serde(serialize_with = "ser_float")]
    pub dr_lo: f64,
    #[serde(serialize_with = "ser_float")]
    pub dr_hi: f64,
    #[serde(serialize_with = "ser_float")]
    pub mean_fidelity: f64,
    #[serde(serialize_with = "ser_float")]
    pub mean_r_size: f64,
    #[serde(serialize_with = "ser_float")]
    pub mean_age: f64,
    pub successes: u64,
    pub timeouts: u64,
    pub status: String,
}

impl Row {
    fn new(pt: &SweepPoint, user_set: String, m: &AggregateMetrics) -> Self {
        Row {
            protocol: pt.protocol,
            p: pt.p,
            q_c: pt.q_c,
            m: pt.m,
            user_set,
            dr: m.dr,
            dr_lo: m.dr_lo,
            dr_hi: m.dr_hi,
            mean_fidelity: m.mean_fidelity,
            mean_r_size: m.mean_r_size,
            mean_age: m.mean_age,
            successes: m.successes,
            timeouts: m.timeouts,
            status: m.status.as_str().to_string(),
        }
    }

    pub fn pooled(pt: &SweepPoint) -> Self {
        Row::new(pt, "pooled".into(), &pt.outcome.pooled)
    }

    pub fn is_pooled(&self) -> bool {
        self.user_set == "pooled"
    }

    /// Pooled, not dropped by the omission rule.
    pub fn is_reported(&self) -> bool {
        self.is_pooled() && self.status == "ok"
    }
}

pub fn pooled_rows(points: &[SweepPoint]) -> Vec<Row> {
    points.iter().map(Row::pooled).collect()
}

pub fn set_rows(points: &[SweepPoint]) -> Vec<Row> {
    points
        .iter()
        .flat_map(|pt| pt.outcome.per_set.iter().map(move |s| Row::new(pt, s.index.to_string(), &s.metrics)))
        .collect()
}

pub fn write_rows(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<Row>, CliError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::InsufficientData(format!("cannot read {}: {e}", path.display())))?;
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

#[derive(Serialize)]
struct PointRecord<'a> {
    protocol: ProtocolKind,
    p: f64,
    #[serde(rename = "Qc")]
    q_c: u32,
    #[serde(rename = "M")]
    m: Option<usize>,
    pooled: &'a AggregateMetrics,
    sets: Vec<SetRecord<'a>>,
}

#[derive(Serialize)]
struct SetRecord<'a> {
    index: usize,
    users: &'a [usize],
    center: Option<usize>,
    metrics: &'a AggregateMetrics,
}

#[derive(Serialize)]
struct Summary<'a> {
    spec: &'a ExperimentSpec,
    points: usize,
    reported: usize,
    omitted: usize,
    total_successes: u64,
    total_timeslots: u64,
    files: Vec<&'static str>,
}

/// Writes every result file of a sweep into `dir`.
pub fn write_sweep(dir: &Path, spec: &ExperimentSpec, points: &[SweepPoint]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let pooled = pooled_rows(points);
    write_rows(&dir.join(RESULTS_CSV), &pooled)?;
    write_rows(&dir.join(SETS_CSV), &set_rows(points))?;

    let mut jl = BufWriter::new(File::create(dir.join(POINTS_JSONL))?);
    for pt in points {
        let rec = PointRecord {
            protocol: pt.protocol,
            p: pt.p,
            q_c: pt.q_c,
            m: pt.m,
            pooled: &pt.outcome.pooled,
            sets: pt
                .outcome
                .per_set
                .iter()
                .map(|s| SetRecord { index: s.index, users: &s.users, center: s.center, metrics: &s.metrics })
                .collect(),
        };
        serde_json::to_writer(&mut jl, &rec)?;
        writeln!(jl)?;
    }
    jl.flush()?;

    let mut files = vec![RESULTS_CSV, SETS_CSV, POINTS_JSONL, SUMMARY_JSON];
    if spec.write_trials {
        let mut tl = BufWriter::new(File::create(dir.join(TRIALS_JSONL))?);
        for pt in points {
            for t in pt.outcome.trials() {
                let rec = serde_json::json!({
                    "protocol": pt.protocol, "p": pt.p, "Qc": pt.q_c, "M": pt.m, "trial": t,
                });
                serde_json::to_writer(&mut tl, &rec)?;
                writeln!(tl)?;
            }
        }
        tl.flush()?;
        files.push(TRIALS_JSONL);
    }

    let reported = pooled.iter().filter(|r| r.is_reported()).count();
    let summary = Summary {
        spec,
        points: points.len(),
        reported,
        omitted: points.len() - reported,
        total_successes: points.iter().map(|p| p.outcome.pooled.successes).sum(),
        total_timeslots: points.iter().map(|p| p.outcome.pooled.timeslots).sum(),
        files,
    };
    let mut f = BufWriter::new(File::create(dir.join(SUMMARY_JSON))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> Row {
        Row {
            protocol: ProtocolKind::MpT,
            p: 0.1,
            q_c: 3,
            m: Some(6),
            user_set: "pooled".into(),
            dr: 1.0 / 3.0,
            dr_lo: 0.25,
            dr_hi: 0.4,
            mean_fidelity: f64::NAN,
            mean_r_size: 9.5,
            mean_age: 0.0,
            successes: 12,
            timeouts: 1,
            status: "ok".into(),
        }
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        let x = 1.0 / 3.0;
        assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut custom = row();
        custom.m = None;
        write_rows(&path, &[row(), custom.clone()]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(
            "protocol,p,Qc,M,user_set,dr,dr_lo,dr_hi,mean_fidelity,mean_r_size,mean_age,successes,timeouts,status\n"
        ));
        assert!(text.contains("mp-t,1.0000000000000001e-1,3,6,pooled,"));
        let back = read_rows(&path).unwrap();
        assert_eq!(back[0].dr, 1.0 / 3.0);
        assert!(back[0].mean_fidelity.is_nan());
        assert_eq!(back[1].m, None);
        assert!(back[0].is_reported());
    }
}
