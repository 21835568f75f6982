use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use wpn_core::cost::{CostInputs, CostTable};
use wpn_core::dynamics::{
    run_multistart, ConvergenceCriterion, DynamicsError, Engine, HopfieldMode, MultistartResult,
    OrderKind, TemperatureSchedule, UnitKind,
};
use wpn_core::energy::{compile_mcds, CompiledProblem, EnergyConfig, EnergyError};
use wpn_core::graph::corpus::MAX_EXHAUSTIVE_N;
use wpn_core::graph::Graph;
use wpn_core::oracle::{OracleError, OracleLimit};
use wpn_core::verify::{run_suite, Corpus, Validators, VerifyOptions};
use wpn_core::wpn::{
    embed, simulate_multistart, Dissemination, MacConfig, MacKind, Placement, RunReport, SimConfig,
    Trigger, WpnError,
};

use crate::config::{
    Config, CorpusKind, DisseminationKind, EngineKind, Generator, HopfieldModeKind, MacKindName,
    Mode, Order, TriggerKind, Unit,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
    #[error("verification failed")]
    Violations,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) | CliError::Violations => 1,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn is_divergence(e: &DynamicsError) -> bool {
    match e {
        DynamicsError::Divergence { .. } | DynamicsError::OutOfRange { .. } => true,
        DynamicsError::Episode { source, .. } => is_divergence(source),
        _ => false,
    }
}

fn from_dynamics(e: DynamicsError) -> CliError {
    if is_divergence(&e) {
        CliError::Numeric(e.to_string())
    } else {
        CliError::Config(e.to_string())
    }
}

fn from_wpn(e: WpnError) -> CliError {
    match e {
        WpnError::Divergence { .. } => CliError::Numeric(e.to_string()),
        WpnError::Dynamics(d) => from_dynamics(d),
        WpnError::Energy(EnergyError::Domain { .. }) => CliError::Numeric(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

pub fn load_graph(cfg: &Config) -> Result<Graph, CliError> {
    let p = &cfg.problem;
    if !p.edge_list.as_os_str().is_empty() {
        let text = fs::read_to_string(&p.edge_list)
            .map_err(|e| config_err(format!("{}: {e}", p.edge_list.display())))?;
        return Graph::parse_edge_list(&text).map_err(config_err);
    }
    if p.vertices == 0 {
        return Err(config_err("problem.vertices must be at least 1"));
    }
    Ok(match p.generator {
        Generator::RandomGeometric => {
            Graph::random_geometric(p.vertices, p.radius, p.seed).map_err(config_err)?
        }
        Generator::Path => Graph::path(p.vertices),
        Generator::Cycle => Graph::cycle(p.vertices),
        Generator::Star => Graph::star(p.vertices),
        Generator::Complete => Graph::complete(p.vertices),
    })
}

pub fn build_engine(cfg: &Config) -> Result<Engine, CliError> {
    let d = &cfg.dynamics;
    let engine = match d.engine {
        EngineKind::Gradient => Engine::Gradient { dt: d.dt },
        EngineKind::Hopfield => Engine::Hopfield {
            mode: match d.hopfield_mode {
                HopfieldModeKind::EulerMemory => HopfieldMode::EulerMemory { dt: d.dt },
                HopfieldModeKind::Memoryless => HopfieldMode::Memoryless,
            },
            unit: match d.unit {
                Unit::Analog => UnitKind::Analog,
                Unit::Binary => UnitKind::Binary,
            },
        },
        EngineKind::Mfa => Engine::Mfa {
            mu: d.mu,
            tau: d.tau,
        },
    };
    engine.validate().map_err(config_err)?;
    Ok(engine)
}

fn build_problem(cfg: &Config, g: &Graph) -> Result<CompiledProblem, CliError> {
    let energy = EnergyConfig::new(cfg.energy.ga, cfg.energy.gb).map_err(config_err)?;
    compile_mcds(g, &energy)
        .with_lambda(cfg.energy.lambda)
        .map_err(config_err)
}

fn build_sim(cfg: &Config) -> Result<SimConfig, CliError> {
    let s = &cfg.sim;
    let sim = SimConfig {
        mac: MacConfig {
            kind: match cfg.mac.kind {
                MacKindName::IdealTdma => MacKind::IdealTdma,
                MacKindName::SlottedAloha => MacKind::SlottedAloha,
            },
            slot_time: cfg.mac.slot_time,
            channels: cfg.mac.channels,
            p_transmit: cfg.mac.p_transmit,
        },
        trigger: match s.trigger {
            TriggerKind::OnReceive => Trigger::OnReceive,
            TriggerKind::Periodic => Trigger::Periodic {
                period: s.period,
                synchronized: s.synchronized,
            },
        },
        delta: s.delta,
        max_slots: s.max_slots,
        schedule: schedule(cfg)?,
        record_trace: s.trace,
    };
    sim.validate().map_err(config_err)?;
    Ok(sim)
}

fn schedule(cfg: &Config) -> Result<TemperatureSchedule, CliError> {
    let d = &cfg.dynamics;
    TemperatureSchedule::new(d.t0, d.alpha, d.t_min).map_err(config_err)
}

fn criterion(cfg: &Config) -> Result<ConvergenceCriterion, CliError> {
    let r = &cfg.run;
    if !(r.epsilon >= 0.0 && r.epsilon.is_finite()) {
        return Err(config_err(format!(
            "run.epsilon must be non-negative, got {}",
            r.epsilon
        )));
    }
    if r.max_steps == 0 || r.max_episodes == 0 || r.episodes == 0 {
        return Err(config_err(
            "run.max_steps, run.max_episodes and run.episodes must be at least 1",
        ));
    }
    if r.episodes > r.max_episodes as u64 {
        return Err(config_err(format!(
            "run.episodes = {} exceeds run.max_episodes = {}",
            r.episodes, r.max_episodes
        )));
    }
    Ok(ConvergenceCriterion {
        epsilon: r.epsilon,
        max_steps: r.max_steps,
        max_episodes: r.max_episodes,
    })
}

fn centralized_text(g: &Graph, res: &MultistartResult) -> String {
    let best = &res.best;
    let readout = best.readout();
    let solved = res
        .episodes
        .iter()
        .filter(|e| g.is_independent_perfect_dominating(&e.readout))
        .count();
    let z: Vec<String> = best.state.z.iter().map(|v| v.to_string()).collect();
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "centralized.{k} = {v}");
    };
    kv("episodes", res.episodes.len().to_string());
    kv("solved_episodes", solved.to_string());
    kv("best_seed", res.best_seed.to_string());
    kv("steps", best.steps.to_string());
    kv("converged", best.converged.to_string());
    kv("state_changes", best.flips.to_string());
    kv(
        "validity.ipds",
        g.is_independent_perfect_dominating(&readout).to_string(),
    );
    kv(
        "validity.dominating",
        g.is_dominating_set(&readout).to_string(),
    );
    kv(
        "validity.connected",
        g.is_connected_in_graph(&readout).to_string(),
    );
    kv("final_energy", best.energy().to_string());
    kv("readout", readout.to_string());
    kv("final_z", z.join(" "));
    s
}

pub fn solve(cfg: &Config, out: &Path) -> Result<String, CliError> {
    let g = load_graph(cfg)?;
    let prob = build_problem(cfg, &g)?;
    let engine = build_engine(cfg)?;
    let crit = criterion(cfg)?;
    let sim = build_sim(cfg)?;
    let seeds: Vec<u64> = (0..cfg.run.episodes).map(|i| cfg.run.seed + i).collect();
    let (centralized, distributed) = match cfg.run.mode {
        Mode::Centralized => (true, false),
        Mode::Distributed => (false, true),
        Mode::Both => (true, true),
    };

    let mut report = String::new();
    let mut energy_tsv = None;
    let mut episodes_used = seeds.len() as u64;
    let mut distributed_report: Option<RunReport> = None;
    if distributed {
        let placement = Placement::Identity;
        let dissemination = match cfg.sim.dissemination {
            DisseminationKind::Coupled => Dissemination::Coupled,
            DisseminationKind::AllMotes => Dissemination::AllMotes,
        };
        let wpn = embed(&prob, &g, placement, &engine, dissemination).map_err(from_wpn)?;
        let r = simulate_multistart(&wpn, &sim, &crit, &seeds).map_err(from_wpn)?;
        report.push_str(&r.to_text());
        energy_tsv = Some(r.energy_trajectory.to_tsv());
        episodes_used = r.episodes_used;
        distributed_report = Some(r);
    }
    if centralized {
        let order = match cfg.dynamics.order {
            Order::Async => OrderKind::Async,
            Order::Synchronous => OrderKind::Synchronous,
        };
        let res = run_multistart(&engine, &prob, &crit, &schedule(cfg)?, order, &seeds)
            .map_err(from_dynamics)?;
        report.push_str(&centralized_text(&g, &res));
        energy_tsv.get_or_insert_with(|| res.best.trajectory.to_tsv());
    }

    let costs = CostTable::compute(
        CostInputs {
            n_neurons: g.n() as u64,
            episodes: episodes_used,
            bytes_per_real: cfg.costs.bytes_per_real,
            group_size: cfg.costs.group_size,
            msg_time: cfg.mac.slot_time,
            channels: cfg.mac.channels as u64,
        },
        Some(prob.params()),
    )
    .map_err(config_err)?;

    create_dir(out)?;
    write_artifact(out, "report.txt", &report)?;
    write_artifact(out, "energy.tsv", energy_tsv.as_deref().unwrap_or_default())?;
    write_artifact(out, "costs.tsv", &costs.to_tsv())?;
    if let Some(r) = distributed_report.as_ref().filter(|_| cfg.sim.trace) {
        write_artifact(out, "trace.tsv", &r.trace_tsv())?;
    }
    Ok(report)
}

pub fn costs(inputs: CostInputs, out: Option<&Path>) -> Result<String, CliError> {
    let table = CostTable::compute(inputs, None).map_err(config_err)?;
    let tsv = table.to_tsv();
    if let Some(dir) = out {
        create_dir(dir)?;
        write_artifact(dir, "costs.tsv", &tsv)?;
    }
    Ok(tsv)
}

pub fn verify(cfg: &Config, out: Option<&Path>) -> Result<String, CliError> {
    let v = &cfg.verify;
    let limit = OracleLimit::default();
    let cap = limit.max_vertices.min(limit.max_neurons);
    if v.corpus != CorpusKind::Empty && v.max_vertices > cap {
        return Err(config_err(OracleError::TooLarge {
            size: v.max_vertices,
            cap,
        }));
    }
    if v.corpus == CorpusKind::Standard && v.max_vertices > MAX_EXHAUSTIVE_N {
        return Err(config_err(format!(
            "the standard corpus enumerates connected graphs up to {MAX_EXHAUSTIVE_N} vertices, got verify.max_vertices = {}",
            v.max_vertices
        )));
    }
    let corpus = match v.corpus {
        CorpusKind::Standard => Corpus::standard(v.max_vertices),
        CorpusKind::Named => Corpus::named(v.max_vertices),
        CorpusKind::Empty => Corpus::empty(),
    };
    if v.seeds == 0 || v.max_steps == 0 {
        return Err(config_err(
            "verify.seeds and verify.max_steps must be at least 1",
        ));
    }
    let opts = VerifyOptions {
        energy: EnergyConfig::new(cfg.energy.ga, cfg.energy.gb).map_err(config_err)?,
        seeds: v.seeds,
        max_steps: v.max_steps,
        limit,
    };
    let summary = run_suite(&corpus, &opts, &Validators::default()).map_err(|e| match e {
        OracleError::TooLarge { .. } => config_err(e),
        other => CliError::Io(other.to_string()),
    })?;
    let text = summary.to_text();
    if let Some(dir) = out {
        create_dir(dir)?;
        write_artifact(dir, "verify.txt", &text)?;
    }
    if summary.passed() {
        Ok(text)
    } else {
        print!("{text}");
        Err(CliError::Violations)
    }
}
