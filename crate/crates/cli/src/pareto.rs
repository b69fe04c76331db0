//! Rate/fidelity trade-off analysis over a Q_c sweep.

use std::collections::BTreeMap;
use std::path::Path;

use ghznetsim::ProtocolKind;
use serde::Serialize;

use crate::output::{fmt_float, Row};
use crate::svg::{Plot, Point, Series};
use crate::CliError;

/// One reported sweep point of one protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoPoint {
    pub protocol: ProtocolKind,
    #[serde(rename = "Qc")]
    pub q_c: u32,
    pub dr: f64,
    pub fidelity: f64,
}

impl ParetoPoint {
    pub fn from_row(r: &Row) -> Self {
        ParetoPoint { protocol: r.protocol, q_c: r.q_c, dr: r.dr, fidelity: r.mean_fidelity }
    }

    /// At least as good in both metrics.
    pub fn weakly_dominates(&self, o: &ParetoPoint) -> bool {
        self.dr >= o.dr && self.fidelity >= o.fidelity
    }

    fn strictly_dominates(&self, o: &ParetoPoint) -> bool {
        self.weakly_dominates(o) && (self.dr > o.dr || self.fidelity > o.fidelity)
    }
}

/// Points not strictly dominated by any other, in order of increasing rate.
pub fn frontier(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut f: Vec<ParetoPoint> =
        points.iter().filter(|p| !points.iter().any(|o| o.strictly_dominates(p))).copied().collect();
    f.sort_by(|a, b| a.dr.total_cmp(&b.dr).then(b.fidelity.total_cmp(&a.fidelity)).then(a.q_c.cmp(&b.q_c)));
    f
}

/// True if every point of `b` is weakly dominated by some point of `a`.
pub fn dominates(a: &[ParetoPoint], b: &[ParetoPoint]) -> bool {
    !a.is_empty() && b.iter().all(|y| a.iter().any(|x| x.weakly_dominates(y)))
}

/// Best ratio found by the matched comparison and the Q_c pair attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratio {
    pub value: f64,
    pub better_qc: u32,
    pub baseline_qc: u32,
}

/// Improvement of `better` over `baseline`: the largest rate ratio among
/// pairs where `better` has equal or higher fidelity, and the largest
/// relative fidelity gain among pairs where it has equal or higher rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Matched {
    pub speedup: Option<Ratio>,
    pub fidelity_gain: Option<Ratio>,
}

pub fn matched_comparison(better: &[ParetoPoint], baseline: &[ParetoPoint]) -> Matched {
    let mut speedup: Option<Ratio> = None;
    let mut gain: Option<Ratio> = None;
    for s in baseline {
        for m in better {
            let pair = |value| Ratio { value, better_qc: m.q_c, baseline_qc: s.q_c };
            if m.fidelity >= s.fidelity && s.dr > 0.0 {
                let r = m.dr / s.dr;
                if speedup.is_none_or(|b| r > b.value) {
                    speedup = Some(pair(r));
                }
            }
            if m.dr >= s.dr && s.fidelity > 0.0 {
                let r = m.fidelity / s.fidelity - 1.0;
                if gain.is_none_or(|b| r > b.value) {
                    gain = Some(pair(r));
                }
            }
        }
    }
    Matched { speedup, fidelity_gain: gain }
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub better: ProtocolKind,
    pub baseline: ProtocolKind,
    pub dominates: bool,
    #[serde(flatten)]
    pub matched: Matched,
}

/// Analysis of one (p, M) slice of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ParetoGroup {
    pub p: f64,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub points: BTreeMap<ProtocolKind, Vec<ParetoPoint>>,
    pub frontiers: BTreeMap<ProtocolKind, Vec<ParetoPoint>>,
    pub overall_frontier: Vec<ParetoPoint>,
    pub comparisons: Vec<Comparison>,
}

impl ParetoGroup {
    pub fn comparison(&self, better: ProtocolKind, baseline: ProtocolKind) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.better == better && c.baseline == baseline)
    }
}

const PAIRS: [(ProtocolKind, ProtocolKind); 2] = [(ProtocolKind::MpT, ProtocolKind::SpT), (ProtocolKind::MpS, ProtocolKind::SpS)];

/// Groups reported pooled rows by (p, M) and analyses each group. Fails
/// with insufficient data if no row survived the omission rule.
pub fn analyse(rows: &[Row]) -> Result<Vec<ParetoGroup>, CliError> {
    let mut groups: Vec<ParetoGroup> = Vec::new();
    for r in rows.iter().filter(|r| r.is_reported() && r.mean_fidelity.is_finite()) {
        let idx = match groups.iter().position(|g| g.p == r.p && g.m == r.m) {
            Some(i) => i,
            None => {
                groups.push(ParetoGroup {
                    p: r.p,
                    m: r.m,
                    points: BTreeMap::new(),
                    frontiers: BTreeMap::new(),
                    overall_frontier: Vec::new(),
                    comparisons: Vec::new(),
                });
                groups.len() - 1
            }
        };
        groups[idx].points.entry(r.protocol).or_default().push(ParetoPoint::from_row(r));
    }
    if groups.is_empty() {
        return Err(CliError::InsufficientData("no sweep point survived the omission rule".into()));
    }
    for g in &mut groups {
        for (k, pts) in &g.points {
            g.frontiers.insert(*k, frontier(pts));
        }
        let all: Vec<ParetoPoint> = g.points.values().flatten().copied().collect();
        g.overall_frontier = frontier(&all);
        for (better, baseline) in PAIRS {
            if let (Some(a), Some(b)) = (g.points.get(&better), g.points.get(&baseline)) {
                g.comparisons.push(Comparison {
                    better,
                    baseline,
                    dominates: dominates(&frontier(a), b),
                    matched: matched_comparison(a, b),
                });
            }
        }
    }
    Ok(groups)
}

fn group_suffix(g: &ParetoGroup, many: bool) -> String {
    if !many {
        return String::new();
    }
    match g.m {
        Some(m) => format!("_p{}_M{m}", g.p),
        None => format!("_p{}", g.p),
    }
}

pub fn plot(g: &ParetoGroup, rows: &[Row]) -> Plot {
    let series = rows
        .iter()
        .filter(|r| r.is_pooled() && r.p == g.p && r.m == g.m)
        .fold(BTreeMap::<ProtocolKind, Vec<Point>>::new(), |mut acc, r| {
            if r.is_reported() {
                acc.entry(r.protocol).or_default().push(Point {
                    x: r.dr,
                    y: r.mean_fidelity,
                    label: Some(r.q_c.to_string()),
                    y_err: None,
                });
            }
            acc
        })
        .into_iter()
        .map(|(k, mut points)| {
            points.sort_by(|a, b| a.x.total_cmp(&b.x));
            Series { name: k.to_string(), points, connect: true }
        })
        .collect();
    let m = g.m.map_or("custom graph".to_string(), |m| format!("{m}x{m} grid"));
    Plot {
        title: format!("Rate vs fidelity, p = {}, {m}", g.p),
        x_label: "distribution rate (GHZ states per timeslot)".into(),
        y_label: "mean GHZ fidelity".into(),
        log_x: true,
        log_y: false,
        series,
    }
}

/// Writes `pareto*.svg`, `frontier.csv` and `pareto.json` into `dir`.
pub fn write_outputs(dir: &Path, groups: &[ParetoGroup], rows: &[Row]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let many = groups.len() > 1;
    for g in groups {
        std::fs::write(dir.join(format!("pareto{}.svg", group_suffix(g, many))), plot(g, rows).render())?;
    }
    let mut w = csv::Writer::from_path(dir.join("frontier.csv"))?;
    w.write_record(["p", "M", "frontier", "protocol", "Qc", "dr", "mean_fidelity"])?;
    for g in groups {
        let m = g.m.map_or(String::new(), |m| m.to_string());
        let named = g.frontiers.iter().map(|(k, f)| (k.to_string(), f));
        for (name, f) in named.chain(std::iter::once(("all".to_string(), &g.overall_frontier))) {
            for pt in f {
                w.write_record([
                    fmt_float(g.p),
                    m.clone(),
                    name.clone(),
                    pt.protocol.to_string(),
                    pt.q_c.to_string(),
                    fmt_float(pt.dr),
                    fmt_float(pt.fidelity),
                ])?;
            }
        }
    }
    w.flush()?;
    std::fs::write(dir.join("pareto.json"), serde_json::to_string_pretty(groups)? + "\n")?;
    Ok(())
}

/// One human-readable line per comparison.
pub fn describe(groups: &[ParetoGroup]) -> Vec<String> {
    let fmt = |r: Option<Ratio>, pct: bool| match r {
        Some(r) if pct => format!("{:.1}% (Qc {} vs {})", 100.0 * r.value, r.better_qc, r.baseline_qc),
        Some(r) => format!("x{:.2} (Qc {} vs {})", r.value, r.better_qc, r.baseline_qc),
        None => "n/a".into(),
    };
    groups
        .iter()
        .flat_map(|g| {
            g.comparisons.iter().map(move |c| {
                format!(
                    "p={} M={}: {} vs {}: speedup {}, fidelity gain {}, frontier dominates: {}",
                    g.p,
                    g.m.map_or("-".into(), |m| m.to_string()),
                    c.better,
                    c.baseline,
                    fmt(c.matched.speedup, false),
                    fmt(c.matched.fidelity_gain, true),
                    c.dominates
                )
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(protocol: ProtocolKind, q_c: u32, dr: f64, fidelity: f64) -> ParetoPoint {
        ParetoPoint { protocol, q_c, dr, fidelity }
    }

    fn series(k: ProtocolKind) -> Vec<ParetoPoint> {
        vec![pt(k, 3, 0.001, 0.88), pt(k, 5, 0.01, 0.8), pt(k, 8, 0.05, 0.7), pt(k, 13, 0.1, 0.6)]
    }

    #[test]
    fn identical_series_give_unit_ratios() {
        let m = matched_comparison(&series(ProtocolKind::MpT), &series(ProtocolKind::SpT));
        assert_eq!(m.speedup.unwrap().value, 1.0);
        assert_eq!(m.fidelity_gain.unwrap().value, 0.0);
        assert!(dominates(&series(ProtocolKind::MpT), &series(ProtocolKind::SpT)));
    }

    #[test]
    fn trade_off_series_is_its_own_frontier() {
        let s = series(ProtocolKind::SpT);
        assert_eq!(frontier(&s), s);
    }

    #[test]
    fn dominated_points_leave_the_frontier() {
        let mut s = series(ProtocolKind::SpT);
        s.push(pt(ProtocolKind::SpT, 20, 0.04, 0.65));
        assert_eq!(frontier(&s).len(), 4);
    }

    #[test]
    fn matched_rule_respects_the_other_metric() {
        let sp = vec![pt(ProtocolKind::SpT, 3, 0.001, 0.9), pt(ProtocolKind::SpT, 8, 0.01, 0.7)];
        let mp = vec![pt(ProtocolKind::MpT, 3, 0.02, 0.85), pt(ProtocolKind::MpT, 8, 0.1, 0.65)];
        let m = matched_comparison(&mp, &sp);
        // Only mp Qc 3 matches sp Qc 8 in fidelity: 0.02 / 0.01.
        assert_eq!(m.speedup.unwrap(), Ratio { value: 2.0, better_qc: 3, baseline_qc: 8 });
        // mp Qc 3 has a higher rate than sp Qc 3 and loses fidelity; against
        // sp Qc 8 it gains 0.85 / 0.7 - 1.
        let g = m.fidelity_gain.unwrap();
        assert!((g.value - (0.85 / 0.7 - 1.0)).abs() < 1e-12);
        assert!(!dominates(&mp, &sp));
    }

    #[test]
    fn no_reported_rows_is_insufficient() {
        assert!(matches!(analyse(&[]), Err(CliError::InsufficientData(_))));
    }
}
