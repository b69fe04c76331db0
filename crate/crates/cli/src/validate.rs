//! Self-checks against independent reference computations.

use ghznetsim::engine::SimConfig;
use ghznetsim::noise::{
    decohere, percolation_min_rounds, star_ghz_fidelity, swap_chain, werner_to_fidelity, DecoherenceModel, Fidelity,
    WernerParam,
};
use ghznetsim::oracle::{brute_force_star_cost, brute_force_steiner_cost, random_connected_graph, random_tree};
use ghznetsim::routing::{exact_steiner_tree, star_route_with_cost, EdgeWeighting, WeightMode};
use ghznetsim::statesim::dense::{dense_fidelity_from_branches, dense_oracle_fidelity};
use ghznetsim::statesim::tree_ghz_fidelity;
use ghznetsim::topology::{make_grid, UserSet};
use ghznetsim::{run_experiment, ProtocolKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteResult {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn werner(w: f64) -> WernerParam<f64> {
    WernerParam::new(w).expect("w in [0,1]")
}

fn run(name: &'static str, f: impl FnOnce() -> ghznetsim::Result<(bool, String)>) -> SuiteResult {
    match f() {
        Ok((passed, detail)) => SuiteResult { name, passed, detail },
        Err(e) => SuiteResult { name, passed: false, detail: format!("error: {e}") },
    }
}

/// GHZ-diagonal simulator against the dense density matrix on random trees.
pub fn statesim_vs_dense(trees: usize) -> SuiteResult {
    run("statesim-vs-dense", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let mut worst: f64 = 0.0;
        for _ in 0..trees {
            let t = random_tree(&mut rng, 7, 4, 0.5);
            let fast = tree_ghz_fidelity(&t.solution, |e| werner(t.werner[e]), &t.users)?.value();
            let dense = dense_oracle_fidelity(&t.solution, |e| t.werner[e], &t.users)?;
            worst = worst.max((fast - dense).abs());
        }
        Ok((worst < 1e-10, format!("{trees} random trees, max |diff| = {worst:.3e} (limit 1e-10)")))
    })
}

/// Star closed form against the dense density matrix.
pub fn star_formula_vs_dense(samples: usize) -> SuiteResult {
    run("star-formula-vs-dense", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        let mut worst: f64 = 0.0;
        for branches in [3usize, 4] {
            for _ in 0..samples {
                let ws: Vec<f64> = (0..branches).map(|_| rng.random_range(0.0..=1.0)).collect();
                let spec: Vec<_> = ws.iter().enumerate().map(|(i, &w)| (0, i + 1, vec![w])).collect();
                let users: Vec<usize> = (1..=branches).collect();
                let dense = dense_fidelity_from_branches(&spec, &users)?;
                let fs: Vec<Fidelity<f64>> = ws.iter().map(|&w| werner_to_fidelity(werner(w))).collect();
                worst = worst.max((star_ghz_fidelity(&fs)?.value() - dense).abs());
            }
        }
        Ok((worst < 1e-12, format!("3 and 4 branches x {samples}, max |diff| = {worst:.3e} (limit 1e-12)")))
    })
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Exact Steiner trees on every 3x3-grid instance with 3 or 4 terminals and
/// min-cost flow stars on random small graphs, against exhaustive search.
pub fn routing_vs_brute_force(star_graphs: usize) -> SuiteResult {
    run("routing-vs-brute-force", || {
        let g = make_grid(3, 0.5, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
        let vals: Vec<Option<f64>> = (0..g.edge_count()).map(|_| Some(rng.random_range(0.3..1.0))).collect();
        let mut steiner = (0, 0);
        for w in [EdgeWeighting::unit(&g), EdgeWeighting::from_values(WeightMode::Werner, &vals)] {
            for k in [3, 4] {
                for s in subsets(9, k) {
                    let users = UserSet::new(&g, s)?;
                    let t = exact_steiner_tree(&g, &w, &users)?;
                    let brute = brute_force_steiner_cost(&g, &w, &users)?;
                    steiner.0 += 1;
                    if brute.is_none_or(|b| (w.total(&t.edges).primary - b).abs() > 1e-9) {
                        steiner.1 += 1;
                    }
                }
            }
        }
        let mut star = (0, 0);
        for _ in 0..star_graphs {
            let n = rng.random_range(5..=8);
            let m = rng.random_range(n..=12.min(n * (n - 1) / 2));
            let g = random_connected_graph(&mut rng, n, m);
            let k = rng.random_range(2..=3.min(n - 2));
            let mut nodes: Vec<usize> = (0..n).collect();
            for i in 0..=k {
                let j = rng.random_range(i..n);
                nodes.swap(i, j);
            }
            let users = UserSet::new(&g, nodes[..k].to_vec())?;
            let w = EdgeWeighting::generation(&g);
            let brute = brute_force_star_cost(&g, &w, &users, nodes[k])?;
            let flow = star_route_with_cost(&g, &w, &users, nodes[k]).ok().map(|(_, c)| c.primary);
            star.0 += 1;
            let agree = match (flow, brute) {
                (Some(a), Some(b)) => (a - b).abs() < 1e-9,
                (None, None) => true,
                _ => false,
            };
            star.1 += usize::from(!agree);
        }
        Ok((
            steiner.1 == 0 && star.1 == 0,
            format!(
                "Steiner {} instances, {} mismatches; star {} graphs, {} mismatches",
                steiner.0, steiner.1, star.0, star.1
            ),
        ))
    })
}

/// Closed-form identities of the noise algebra.
pub fn noise_identities() -> SuiteResult {
    run("noise-identities", || {
        let mut failures = Vec::new();
        for (p, want) in [(0.5, 1), (0.3, 2), (0.1, 7)] {
            let k = percolation_min_rounds(p, 0.5)?;
            if k != want {
                failures.push(format!("k_t({p}) = {k}, expected {want}"));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
        let model = DecoherenceModel::new(0.99)?;
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let w = rng.random_range(0.0..=1.0);
            let f = werner_to_fidelity(werner(w));
            worst = worst.max((f.value() - (3.0 * w + 1.0) / 4.0).abs());
            worst = worst.max((f.to_werner()?.value() - w).abs());
            let tau = rng.random_range(0..30);
            worst = worst.max((decohere(werner(w), &model, tau).value() - w * 0.99f64.powi(tau as i32)).abs());
            let ws: Vec<f64> = (0..rng.random_range(1..6)).map(|_| rng.random_range(0.0..=1.0)).collect();
            let chain = swap_chain(&ws.iter().map(|&x| werner(x)).collect::<Vec<_>>())?.value();
            worst = worst.max((chain - ws.iter().product::<f64>()).abs());
        }
        if worst > 1e-12 {
            failures.push(format!("identity deviation {worst:.3e}"));
        }
        let detail = if failures.is_empty() {
            format!("k_t(0.5, 0.3, 0.1) = 1, 2, 7; max identity deviation {worst:.3e}")
        } else {
            failures.join("; ")
        };
        Ok((failures.is_empty(), detail))
    })
}

/// Bound chain on simulated GHZ states at the default parameters. The
/// suite fails only on a violated inequality; the mean gaps are reported.
pub fn lower_bound_chain() -> SuiteResult {
    run("lower-bound-chain", || {
        let mut checked = 0usize;
        let mut violations = 0usize;
        let (mut gap_w, mut gap_b) = (0.0, 0.0);
        for protocol in ProtocolKind::ALL {
            let cfg = SimConfig {
                protocol,
                q_c: 13,
                user_sets: 4,
                target_successes: 15,
                record_trials: true,
                min_total_successes: 0,
                ..SimConfig::default()
            };
            let out = run_experiment(&cfg)?;
            for r in out.trials().filter_map(|t| t.realized.as_ref()) {
                checked += 1;
                let tol = 1e-12;
                if r.fidelity + tol < r.branch_fidelity_product
                    || r.branch_fidelity_product + tol < r.werner_product
                    || r.fidelity + tol < r.floor
                {
                    violations += 1;
                }
                gap_w += (r.fidelity - r.werner_product) / r.fidelity;
                gap_b += (r.fidelity - r.branch_fidelity_product) / r.fidelity;
            }
        }
        let n = checked.max(1) as f64;
        Ok((
            violations == 0 && checked > 0,
            format!(
                "{checked} GHZ states, {violations} violations; mean relative gap to exact: \
                 w_R {:.3}%, product of branch fidelities {:.3}%",
                100.0 * gap_w / n,
                100.0 * gap_b / n
            ),
        ))
    })
}

pub fn all_suites() -> Vec<SuiteResult> {
    vec![
        statesim_vs_dense(200),
        star_formula_vs_dense(100),
        routing_vs_brute_force(150),
        noise_identities(),
        lower_bound_chain(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for s in [statesim_vs_dense(20), star_formula_vs_dense(10), noise_identities()] {
            assert!(s.passed, "{}", s.line());
        }
    }
}
