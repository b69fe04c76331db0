//! Subcommand bodies. Each returns after writing its files; messages for the
//! user go to stdout.

use std::path::Path;

use crate::distance::{self, DISTANCE_CSV};
use crate::output::{self, read_rows, Row};
use crate::pareto;
use crate::sweep::run_sweep;
use crate::validate::all_suites;
use crate::{CliError, ExperimentSpec};

/// Runs the sweep and writes the result files into `spec.out`.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<Row>, CliError> {
    let points = run_sweep(spec)?;
    output::write_sweep(&spec.out, spec, &points)?;
    let rows = output::pooled_rows(&points);
    let reported = rows.iter().filter(|r| r.is_reported()).count();
    println!(
        "{} sweep points ({} reported, {} omitted or infeasible) written to {}",
        rows.len(),
        reported,
        rows.len() - reported,
        spec.out.display()
    );
    Ok(rows)
}

fn rows_from(spec: &ExperimentSpec, input: Option<&Path>) -> Result<Vec<Row>, CliError> {
    match input {
        Some(path) => Ok(read_rows(path)?.into_iter().filter(Row::is_pooled).collect()),
        None => run(spec),
    }
}

pub fn pareto(spec: &ExperimentSpec, input: Option<&Path>) -> Result<Vec<pareto::ParetoGroup>, CliError> {
    let rows = rows_from(spec, input)?;
    let groups = pareto::analyse(&rows)?;
    pareto::write_outputs(&spec.out, &groups, &rows)?;
    for line in pareto::describe(&groups) {
        println!("{line}");
    }
    for g in &groups {
        for pt in &g.overall_frontier {
            println!("frontier p={} {} Qc={} dr={:.4e} F={:.4}", g.p, pt.protocol, pt.q_c, pt.dr, pt.fidelity);
        }
    }
    Ok(groups)
}

pub fn distance(spec: &ExperimentSpec, input: Option<&Path>) -> Result<Vec<distance::DistanceRow>, CliError> {
    let rows = rows_from(spec, input)?;
    let sel = distance::select(&rows, spec.fidelity_floor);
    if sel.is_empty() {
        return Err(CliError::InsufficientData("no pooled rows to select from".into()));
    }
    std::fs::create_dir_all(&spec.out)?;
    distance::write_csv(&spec.out.join(DISTANCE_CSV), &sel)?;
    std::fs::write(spec.out.join("distance.svg"), distance::plot(&sel, spec.fidelity_floor).render())?;
    for r in &sel {
        let m = r.m.map_or("-".to_string(), |m| m.to_string());
        match r.q_c {
            Some(q) => println!(
                "{} p={} M={m}: Qc={q} dr={:.4e} [{:.4e}, {:.4e}] F={:.4}",
                r.protocol, r.p, r.dr, r.dr_lo, r.dr_hi, r.mean_fidelity
            ),
            None => println!("{} p={} M={m}: infeasible (no cutoff meets the fidelity floor)", r.protocol, r.p),
        }
    }
    Ok(sel)
}

pub fn validate() -> Result<(), CliError> {
    let suites = all_suites();
    for s in &suites {
        println!("{}", s.line());
    }
    let failed: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}
