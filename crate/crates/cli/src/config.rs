//! Experiment configuration: `key = value` lines grouped into `[section]`s.
//! Every key is optional and unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Every config key with its default and meaning, in help-text order.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "problem.edge_list",
        "\"\"",
        "edge-list file; empty means use the generator",
    ),
    (
        "problem.generator",
        "\"random_geometric\"",
        "random_geometric, path, cycle, star or complete",
    ),
    (
        "problem.vertices",
        "20",
        "vertex count (leaf count for star)",
    ),
    (
        "problem.radius",
        "0.35",
        "radio range in the unit square (random_geometric)",
    ),
    ("problem.seed", "1", "placement seed (random_geometric)"),
    ("energy.ga", "1.0", "independence penalty gain"),
    ("energy.gb", "1.0", "domination penalty gain"),
    ("energy.lambda", "50.0", "sigmoid slope"),
    (
        "dynamics.engine",
        "\"gradient\"",
        "gradient, hopfield or mfa",
    ),
    (
        "dynamics.dt",
        "0.01",
        "integration step (gradient, hopfield euler_memory)",
    ),
    (
        "dynamics.hopfield_mode",
        "\"euler_memory\"",
        "euler_memory or memoryless",
    ),
    ("dynamics.unit", "\"analog\"", "analog or binary (hopfield)"),
    ("dynamics.mu", "1.0", "annealing gain (mfa)"),
    ("dynamics.tau", "0.1", "annealing step (mfa)"),
    ("dynamics.t0", "10.0", "initial temperature (mfa)"),
    ("dynamics.alpha", "0.95", "cooling factor per step (mfa)"),
    ("dynamics.t_min", "0.01", "temperature floor (mfa)"),
    (
        "dynamics.order",
        "\"async\"",
        "async or synchronous (centralized runs)",
    ),
    (
        "run.mode",
        "\"distributed\"",
        "centralized, distributed or both",
    ),
    ("run.seed", "0", "first episode seed; --seed overrides"),
    (
        "run.episodes",
        "10",
        "episodes per run, seeded seed, seed+1, ...",
    ),
    ("run.epsilon", "1e-9", "convergence tolerance on max |dz|"),
    (
        "run.max_steps",
        "100000",
        "update cap per neuron and episode",
    ),
    ("run.max_episodes", "100", "episode cap"),
    (
        "run.out_dir",
        "\"wpnann-out\"",
        "artifact directory; --out overrides",
    ),
    ("mac.kind", "\"ideal_tdma\"", "ideal_tdma or slotted_aloha"),
    ("mac.slot_time", "1e-6", "seconds per slot and per message"),
    ("mac.channels", "1", "radio channels"),
    (
        "mac.p_transmit",
        "0.5",
        "per-slot transmit probability (slotted_aloha)",
    ),
    ("sim.trigger", "\"on_receive\"", "on_receive or periodic"),
    ("sim.period", "10", "slots between periodic updates"),
    ("sim.synchronized", "true", "periodic motes share one phase"),
    ("sim.delta", "1e-4", "broadcast threshold on output change"),
    ("sim.max_slots", "50000000", "slot cap per episode"),
    ("sim.dissemination", "\"coupled\"", "coupled or all_motes"),
    ("sim.trace", "false", "write trace.tsv"),
    ("costs.n_neurons", "100000", "neuron count N"),
    ("costs.episodes", "1", "episode count m"),
    ("costs.bytes_per_real", "4", "bytes per stored real"),
    ("costs.group_size", "10", "motes per cluster"),
    ("costs.msg_time", "1e-6", "seconds per message"),
    ("costs.channels", "1", "parallel channels"),
    ("verify.corpus", "\"standard\"", "standard, named or empty"),
    ("verify.max_vertices", "6", "largest corpus graph"),
    (
        "verify.seeds",
        "3",
        "episodes per graph in the equivalence check",
    ),
    ("verify.max_steps", "300", "steps per equivalence episode"),
];

/// Help text listing every key with its default.
pub fn keys_help() -> String {
    let width = KEYS
        .iter()
        .map(|(k, d, _)| k.len() + d.len())
        .max()
        .unwrap_or(0)
        + 3;
    let mut s = String::from("Config keys (section.key = default):\n");
    for (key, default, about) in KEYS {
        let lhs = format!("{key} = {default}");
        s.push_str(&format!("  {lhs:<width$}  {about}\n"));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub problem: ProblemSection,
    pub energy: EnergySection,
    pub dynamics: DynamicsSection,
    pub run: RunSection,
    pub mac: MacSection,
    pub sim: SimSection,
    pub costs: CostsSection,
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    RandomGeometric,
    Path,
    Cycle,
    Star,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub edge_list: PathBuf,
    pub generator: Generator,
    pub vertices: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            edge_list: PathBuf::new(),
            generator: Generator::RandomGeometric,
            vertices: 20,
            radius: 0.35,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub ga: f64,
    pub gb: f64,
    pub lambda: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self {
            ga: 1.0,
            gb: 1.0,
            lambda: wpn_core::energy::DEFAULT_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Gradient,
    Hopfield,
    Mfa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopfieldModeKind {
    EulerMemory,
    Memoryless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Analog,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Async,
    Synchronous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    pub engine: EngineKind,
    pub dt: f64,
    pub hopfield_mode: HopfieldModeKind,
    pub unit: Unit,
    pub mu: f64,
    pub tau: f64,
    pub t0: f64,
    pub alpha: f64,
    pub t_min: f64,
    pub order: Order,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            engine: EngineKind::Gradient,
            dt: wpn_core::dynamics::DEFAULT_DT,
            hopfield_mode: HopfieldModeKind::EulerMemory,
            unit: Unit::Analog,
            mu: 1.0,
            tau: 0.1,
            t0: 10.0,
            alpha: 0.95,
            t_min: 0.01,
            order: Order::Async,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Centralized,
    Distributed,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub mode: Mode,
    pub seed: u64,
    pub episodes: u64,
    pub epsilon: f64,
    pub max_steps: usize,
    pub max_episodes: usize,
    pub out_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            mode: Mode::Distributed,
            seed: 0,
            episodes: 10,
            epsilon: wpn_core::dynamics::DEFAULT_EPSILON,
            max_steps: wpn_core::dynamics::DEFAULT_MAX_STEPS,
            max_episodes: wpn_core::dynamics::DEFAULT_MAX_EPISODES,
            out_dir: PathBuf::from("wpnann-out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacKindName {
    IdealTdma,
    SlottedAloha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacSection {
    pub kind: MacKindName,
    pub slot_time: f64,
    pub channels: usize,
    pub p_transmit: f64,
}

impl Default for MacSection {
    fn default() -> Self {
        Self {
            kind: MacKindName::IdealTdma,
            slot_time: wpn_core::wpn::DEFAULT_SLOT_TIME,
            channels: 1,
            p_transmit: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerKind {
    OnReceive,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisseminationKind {
    Coupled,
    AllMotes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub trigger: TriggerKind,
    pub period: u64,
    pub synchronized: bool,
    pub delta: f64,
    pub max_slots: u64,
    pub dissemination: DisseminationKind,
    pub trace: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            trigger: TriggerKind::OnReceive,
            period: 10,
            synchronized: true,
            delta: wpn_core::wpn::DEFAULT_BROADCAST_THRESHOLD,
            max_slots: 50_000_000,
            dissemination: DisseminationKind::Coupled,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostsSection {
    pub n_neurons: u64,
    pub episodes: u64,
    pub bytes_per_real: u64,
    pub group_size: u64,
    pub msg_time: f64,
    pub channels: u64,
}

impl Default for CostsSection {
    fn default() -> Self {
        Self {
            n_neurons: 100_000,
            episodes: 1,
            bytes_per_real: 4,
            group_size: 10,
            msg_time: 1e-6,
            channels: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Standard,
    Named,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub corpus: CorpusKind,
    pub max_vertices: usize,
    pub seeds: u64,
    pub max_steps: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            corpus: CorpusKind::Standard,
            max_vertices: wpn_core::verify::DEFAULT_CORPUS_MAX_N,
            seeds: 3,
            max_steps: 300,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn flatten(cfg: &Config) -> BTreeMap<String, toml::Value> {
        let value = toml::Value::try_from(cfg).unwrap();
        let mut out = BTreeMap::new();
        for (section, table) in value.as_table().unwrap() {
            for (key, v) in table.as_table().unwrap() {
                out.insert(format!("{section}.{key}"), v.clone());
            }
        }
        out
    }

    fn literal(text: &str) -> toml::Value {
        let doc: toml::Table = toml::from_str(&format!("v = {text}")).unwrap();
        doc["v"].clone()
    }

    #[test]
    fn help_table_matches_schema() {
        let schema = flatten(&Config::default());
        let table: BTreeMap<String, toml::Value> = KEYS
            .iter()
            .map(|(k, d, _)| (k.to_string(), literal(d)))
            .collect();
        assert_eq!(KEYS.len(), table.len(), "duplicate help entries");
        assert_eq!(
            schema.keys().collect::<Vec<_>>(),
            table.keys().collect::<Vec<_>>()
        );
        for (key, v) in &schema {
            assert_eq!(&table[key], v, "default of {key}");
        }
    }

    #[test]
    fn every_key_is_in_help() {
        let help = keys_help();
        for (key, default, _) in KEYS {
            assert!(help.contains(&format!("{key} = {default}")), "{key}");
        }
    }

    #[test]
    fn empty_text_is_all_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = Config::parse(
            "[problem]\ngenerator = \"path\"\nvertices = 3\n\n[mac]\nkind = \"slotted_aloha\"\n",
        )
        .unwrap();
        assert_eq!(cfg.problem.generator, Generator::Path);
        assert_eq!(cfg.problem.vertices, 3);
        assert_eq!(cfg.mac.kind, MacKindName::SlottedAloha);
        assert_eq!(cfg.energy, EnergySection::default());
    }

    #[test]
    fn unknown_keys_are_named() {
        for text in ["[run]\nsede = 3\n", "[radio]\nkind = 1\n", "top = 1\n"] {
            let err = Config::parse(text).unwrap_err().to_string();
            let key = text
                .lines()
                .find(|l| l.contains('='))
                .and_then(|l| l.split('=').next())
                .unwrap()
                .trim();
            let named = if text.starts_with("[radio]") {
                "radio"
            } else {
                key
            };
            assert!(err.contains(named), "{err}");
        }
    }

    #[test]
    fn bad_enum_value_is_rejected() {
        assert!(Config::parse("[dynamics]\nengine = \"simplex\"\n").is_err());
    }
}
