//! Invariant suite run over a graph corpus: energy zeros against the
//! independent-perfect-domination predicate, the state-change bound for
//! integer networks, and distributed against centralized execution.

use std::fmt::Write as _;

use rand::Rng;

use crate::cost::state_change_bound;
use crate::dynamics::{
    episode_init, run_episode, run_episode_observed, ConvergenceCriterion, Engine, HopfieldMode,
    TemperatureSchedule, UnitKind, UpdateOrder,
};
use crate::energy::{compile_mcds, mcds_energy, CompiledProblem, EnergyConfig, HopfieldParams};
use crate::graph::corpus::{connected_graphs_up_to, named_families};
use crate::graph::{Graph, VertexSet};
use crate::oracle::{OracleError, OracleLimit};
use crate::rng::seeded;
use crate::wpn::{embed, simulate, Dissemination, Placement, SimConfig, Trigger};

/// Largest connected graphs in the default corpus.
pub const DEFAULT_CORPUS_MAX_N: usize = 6;
/// Integer weights of flip-bound instances lie in `[-W, W]`.
pub const FLIP_WEIGHT_RANGE: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub graphs: Vec<(String, Graph)>,
}

impl Corpus {
    /// All connected graphs up to `max_n` vertices plus the named
    /// instances P3, C4, K1,3 and K1,5.
    pub fn standard(max_n: usize) -> Self {
        let mut graphs: Vec<(String, Graph)> = connected_graphs_up_to(max_n)
            .into_iter()
            .enumerate()
            .map(|(i, g)| (format!("connected-{}-{i}", g.n()), g))
            .collect();
        graphs.push(("P3".into(), Graph::path(3)));
        graphs.push(("C4".into(), Graph::cycle(4)));
        graphs.push(("K1,3".into(), Graph::star(3)));
        graphs.push(("K1,5".into(), Graph::star(5)));
        Self { graphs }
    }

    /// Named path, edgeless, complete, cycle and star graphs up to `max_n`.
    pub fn named(max_n: usize) -> Self {
        Self {
            graphs: named_families(max_n),
        }
    }

    pub fn empty() -> Self {
        Self { graphs: Vec::new() }
    }

    pub fn max_vertices(&self) -> usize {
        self.graphs.iter().map(|(_, g)| g.n()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    EnergyIpds,
    FlipBound,
    DistributedCentralized,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::EnergyIpds => "energy-ipds",
            Check::FlipBound => "flip-bound",
            Check::DistributedCentralized => "distributed-centralized",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: Check,
    pub graph: String,
    /// Self-contained description: the edge list and the failing input.
    pub reproducer: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifySummary {
    pub checks: u64,
    pub per_check: [u64; 3],
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "result = {}",
            if self.passed() { "pass" } else { "fail" }
        );
        let _ = writeln!(s, "checks = {}", self.checks);
        for (c, n) in [
            Check::EnergyIpds,
            Check::FlipBound,
            Check::DistributedCentralized,
        ]
        .iter()
        .zip(self.per_check)
        {
            let _ = writeln!(s, "checks.{} = {n}", c.name());
        }
        let _ = writeln!(s, "violations = {}", self.violations.len());
        for w in &self.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        // the first violation is the minimal reproducer
        if let Some(v) = self.violations.first() {
            let _ = writeln!(s, "\n# reproducer: {} on {}", v.check.name(), v.graph);
            s.push_str(&v.reproducer);
        }
        s
    }
}

type SetPredicate = dyn Fn(&Graph, &VertexSet) -> bool;

/// The predicate the suite checks energies against. Tests swap in broken
/// ones to confirm that violations are caught.
pub struct Validators {
    pub ipds: Box<SetPredicate>,
}

impl Default for Validators {
    fn default() -> Self {
        Self {
            ipds: Box::new(|g: &Graph, s: &VertexSet| g.is_independent_perfect_dominating(s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub limit: OracleLimit,
    pub energy: EnergyConfig,
    /// Seeds per graph for the flip-bound and distributed checks.
    pub seeds: u64,
    /// Rounds per lockstep comparison.
    pub max_steps: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            limit: OracleLimit::default(),
            energy: EnergyConfig::default(),
            seeds: 3,
            max_steps: 300,
        }
    }
}

/// Integer weights in `[-3, 3]` on `edges` and biases `-1/2 sum_j w_ij`,
/// the unipolar form of a zero-threshold network. Redrawn until
/// `sum_{j<i} |w_ij| >= k` so the flip bound applies; `None` without edges.
pub fn flip_bound_instance(
    k: usize,
    edges: &[(usize, usize)],
    rng: &mut impl Rng,
) -> Option<HopfieldParams> {
    if edges.is_empty() || FLIP_WEIGHT_RANGE as usize * edges.len() < k {
        return None;
    }
    loop {
        let mut w = vec![0.0; k * k];
        let mut total = 0;
        for &(i, j) in edges {
            let v = rng.gen_range(-FLIP_WEIGHT_RANGE..=FLIP_WEIGHT_RANGE);
            total += v.unsigned_abs() as usize;
            w[i * k + j] = f64::from(v);
            w[j * k + i] = f64::from(v);
        }
        if total < k {
            continue;
        }
        let bias = (0..k)
            .map(|i| -0.5 * w[i * k..(i + 1) * k].iter().sum::<f64>())
            .collect();
        return Some(HopfieldParams::new(w, bias, 1.0).expect("symmetric integer weights"));
    }
}

pub struct FlipRun {
    pub flips: u64,
    pub bound: u128,
    /// Largest increase of the quadratic energy across one update.
    pub max_rise: f64,
}

/// Asynchronous memoryless hard-limit run, tracking flips and energy.
pub fn binary_async_run(p: &HopfieldParams, seed: u64) -> FlipRun {
    let prob = CompiledProblem::from_params(p.clone());
    let engine = Engine::Hopfield {
        mode: HopfieldMode::Memoryless,
        unit: UnitKind::Binary,
    };
    let mut prev: Option<f64> = None;
    let mut max_rise = f64::NEG_INFINITY;
    let init = episode_init(&prob, &engine, seed);
    let start = p.quadratic_form(&init.z).expect("dimension");
    let ep = run_episode_observed(
        &engine,
        &prob,
        init,
        &ConvergenceCriterion::default(),
        &TemperatureSchedule::default(),
        UpdateOrder::Async { seed },
        |ev| {
            let e = p.quadratic_form(ev.z).expect("dimension");
            max_rise = max_rise.max(e - prev.unwrap_or(start));
            prev = Some(e);
        },
    )
    .expect("hard-limit runs stay finite");
    FlipRun {
        flips: ep.flips,
        bound: state_change_bound(p).expect("integer weights"),
        max_rise,
    }
}

fn reproducer(g: &Graph, detail: &str) -> String {
    format!("{}{detail}\n", g.to_edge_list())
}

/// Runs every check over the corpus.
pub fn run_suite(
    corpus: &Corpus,
    opts: &VerifyOptions,
    validators: &Validators,
) -> Result<VerifySummary, OracleError> {
    let cap = opts.limit.max_vertices.min(opts.limit.max_neurons);
    if corpus.max_vertices() > cap {
        return Err(OracleError::TooLarge {
            size: corpus.max_vertices(),
            cap,
        });
    }
    let mut summary = VerifySummary::default();
    if corpus.graphs.is_empty() {
        summary
            .warnings
            .push("empty corpus: zero checks run".into());
        return Ok(summary);
    }
    let record =
        |summary: &mut VerifySummary, check: Check, name: &str, failure: Option<String>| {
            summary.checks += 1;
            summary.per_check[check as usize] += 1;
            if let Some(reproducer) = failure {
                summary.violations.push(Violation {
                    check,
                    graph: name.to_string(),
                    reproducer,
                });
            }
        };

    for (name, g) in &corpus.graphs {
        let n = g.n();
        for mask in 0u64..1 << n {
            let s = VertexSet::from_mask(mask);
            let e = mcds_energy(g, &s.indicator(n), &opts.energy).expect("dimension");
            let valid = (validators.ipds)(g, &s);
            let failure = ((e == 0.0) != valid)
                .then(|| reproducer(g, &format!("set {s}\nenergy {e}\nvalidator {valid}")));
            record(&mut summary, Check::EnergyIpds, name, failure);
        }

        let edges: Vec<(usize, usize)> = g.edges().collect();
        for seed in 0..opts.seeds {
            let mut rng = seeded(seed);
            let Some(p) = flip_bound_instance(n, &edges, &mut rng) else {
                break;
            };
            let run = binary_async_run(&p, seed);
            let failure = (u128::from(run.flips) > run.bound || run.max_rise > 0.0).then(|| {
                format!(
                    "{}seed {seed}\nflips {}\nbound {}\nmax_rise {}\n",
                    p.to_text(None),
                    run.flips,
                    run.bound,
                    run.max_rise
                )
            });
            record(&mut summary, Check::FlipBound, name, failure);
        }

        let engine = Engine::default();
        let prob = compile_mcds(g, &opts.energy);
        let wpn = embed(
            &prob,
            g,
            Placement::Identity,
            &engine,
            Dissemination::Coupled,
        )
        .expect("connected corpus");
        let max_deg = (0..n).map(|v| g.degree(v)).max().unwrap_or(0) as u64;
        let cfg = SimConfig {
            trigger: Trigger::Periodic {
                period: 4 * max_deg + 8,
                synchronized: true,
            },
            delta: 0.0,
            ..SimConfig::default()
        };
        let crit = ConvergenceCriterion {
            max_steps: opts.max_steps,
            ..ConvergenceCriterion::default()
        };
        for seed in 0..opts.seeds {
            let central = run_episode(
                &engine,
                &prob,
                episode_init(&prob, &engine, seed),
                &crit,
                &TemperatureSchedule::default(),
                UpdateOrder::Synchronous,
            );
            let dist = simulate(&wpn, &cfg, &crit, seed);
            let failure = match (central, dist) {
                (Ok(c), Ok(d)) => {
                    let gap = c
                        .state
                        .z
                        .iter()
                        .zip(&d.final_z)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    (gap > 1e-12 || c.trajectory.energy != d.energy_trajectory.energy)
                        .then(|| reproducer(g, &format!("seed {seed}\nmax_gap {gap}")))
                }
                (c, d) => Some(reproducer(
                    g,
                    &format!(
                        "seed {seed}\ncentral {:?}\ndistributed {:?}",
                        c.err(),
                        d.err()
                    ),
                )),
            };
            record(&mut summary, Check::DistributedCentralized, name, failure);
        }
    }
    Ok(summary)
}
