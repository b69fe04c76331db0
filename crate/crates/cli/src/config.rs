//! Experiment specification: a TOML file merged with command-line flags
//! (flags win).

use std::path::{Path, PathBuf};

use ghznetsim::engine::{GraphSpec, SimConfig, UsersSpec};
use ghznetsim::topology::GraphJson;
use ghznetsim::ProtocolKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a subcommand needs: the base simulation config and the sweep
/// axes laid over it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub base: SimConfig,
    pub protocols: Vec<ProtocolKind>,
    pub q_c: Vec<u32>,
    pub p: Vec<f64>,
    /// Grid sides; empty when a custom graph is given.
    pub grid: Vec<usize>,
    pub out: PathBuf,
    pub fidelity_floor: f64,
    pub write_trials: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            base: SimConfig::default(),
            protocols: ProtocolKind::ALL.to_vec(),
            q_c: (1..=20).collect(),
            p: vec![0.1],
            grid: vec![6],
            out: PathBuf::from("results"),
            fidelity_floor: 2.0 / 3.0,
            write_trials: false,
        }
    }
}

/// Optional settings shared by the config file and the flags. List-valued
/// fields take the same string syntax in both places.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub protocol: Option<String>,
    pub grid: Option<String>,
    pub graph: Option<PathBuf>,
    pub p: Option<String>,
    pub w0: Option<f64>,
    pub delta: Option<f64>,
    #[serde(rename = "Qc", alias = "qc")]
    pub qc: Option<String>,
    pub users: Option<String>,
    pub user_sets: Option<usize>,
    pub successes: Option<u64>,
    pub max_timeslots: Option<u64>,
    pub min_total_successes: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub fidelity_floor: Option<f64>,
    pub trials: Option<bool>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `self` with every field of `over` that is set taking precedence.
    pub fn merged(self, over: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            protocol, grid, graph, p, w0, delta, qc, users, user_sets, successes, max_timeslots,
            min_total_successes, seed, out, fidelity_floor, trials
        )
    }

    pub fn resolve(self, defaults: ExperimentSpec) -> Result<ExperimentSpec, CliError> {
        let mut spec = defaults;
        if let Some(s) = &self.protocol {
            spec.protocols = parse_protocols(s)?;
        }
        if let Some(s) = &self.grid {
            spec.grid = parse_list(s, "grid size")?;
        }
        if let Some(s) = &self.p {
            spec.p = parse_list(s, "generation probability")?;
        }
        if let Some(s) = &self.qc {
            spec.q_c = parse_qc(s)?;
        }
        let b = &mut spec.base;
        if let Some(path) = &self.graph {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let graph: GraphJson = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            b.graph = GraphSpec::Custom { graph };
            spec.grid.clear();
        }
        if let Some(s) = &self.users {
            b.users = parse_users(s)?;
        }
        b.w0 = self.w0.unwrap_or(b.w0);
        b.delta = self.delta.unwrap_or(b.delta);
        b.user_sets = self.user_sets.unwrap_or(b.user_sets);
        b.target_successes = self.successes.unwrap_or(b.target_successes);
        b.max_timeslots = self.max_timeslots.unwrap_or(b.max_timeslots);
        b.min_total_successes = self.min_total_successes.unwrap_or(b.min_total_successes);
        b.seed = self.seed.unwrap_or(b.seed);
        spec.out = self.out.unwrap_or(spec.out);
        spec.fidelity_floor = self.fidelity_floor.unwrap_or(spec.fidelity_floor);
        spec.write_trials = self.trials.unwrap_or(spec.write_trials);
        spec.validate()?;
        Ok(spec)
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.protocols.is_empty() || self.q_c.is_empty() || self.p.is_empty() {
            return Err(CliError::Config("protocol, Qc and p lists must be nonempty".into()));
        }
        if matches!(self.base.graph, GraphSpec::Grid { .. }) && self.grid.is_empty() {
            return Err(CliError::Config("grid size list must be nonempty".into()));
        }
        if !(0.0..=1.0).contains(&self.fidelity_floor) {
            return Err(CliError::Config(format!("fidelity floor {} outside [0,1]", self.fidelity_floor)));
        }
        for &q in &self.q_c {
            for &p in &self.p {
                self.point(ProtocolKind::MpT, p, self.grid.first().copied(), q)
                    .validate()
                    .map_err(|e| CliError::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Config of one sweep point.
    pub fn point(&self, protocol: ProtocolKind, p: f64, m: Option<usize>, q_c: u32) -> SimConfig {
        let mut c = self.base.clone();
        c.protocol = protocol;
        c.p = p;
        c.q_c = q_c;
        if let Some(m) = m {
            c.graph = GraphSpec::Grid { m };
        }
        c
    }

    /// Grid sides to sweep, or a single `None` for a custom graph.
    pub fn grid_axis(&self) -> Vec<Option<usize>> {
        match self.base.graph {
            GraphSpec::Grid { .. } => self.grid.iter().map(|&m| Some(m)).collect(),
            GraphSpec::Custom { .. } => vec![None],
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Config(format!("bad {what} '{t}'"))))
        .collect()
}

pub fn parse_protocols(s: &str) -> Result<Vec<ProtocolKind>, CliError> {
    if s.trim() == "all" {
        return Ok(ProtocolKind::ALL.to_vec());
    }
    s.split(',')
        .map(|t| t.parse().map_err(|e: ghznetsim::Error| CliError::Config(e.to_string())))
        .collect()
}

/// `5`, `1,2,5,8`, `1-20` or `1..=20` (ranges inclusive), or a mix.
pub fn parse_qc(s: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Config(format!("bad Qc list '{s}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let range = part.split_once("..=").or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(CliError::Config(format!("Qc values must be at least 1: '{s}'")));
    }
    Ok(out)
}

/// `random:N`, `corners`, or a node list `0,5,17`.
pub fn parse_users(s: &str) -> Result<UsersSpec, CliError> {
    let s = s.trim();
    if s == "corners" {
        return Ok(UsersSpec::Corners);
    }
    if let Some(n) = s.strip_prefix("random:") {
        let count = n.trim().parse().map_err(|_| CliError::Config(format!("bad user count '{n}'")))?;
        return Ok(UsersSpec::Random { count });
    }
    Ok(UsersSpec::Explicit { nodes: parse_list(s, "user node")? })
}
