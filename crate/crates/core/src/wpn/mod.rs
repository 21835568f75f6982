//! Discrete-event simulation of a wireless processor network in which every
//! mote hosts one neuron.
//!
//! Motes keep only their own weight row, bias and a cache of the outputs
//! they read. Outputs travel as radio frames through a MAC layer and,
//! when the coupled neuron is not a radio neighbor, over multi-hop routes.

mod mac;
mod mote;
mod report;
mod routing;
mod sim;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dynamics::{DynamicsError, Engine};
use crate::energy::{CompiledProblem, EnergyError, ExactEnergy};
use crate::graph::Graph;

pub use mac::{mac_arbitrate, MacConfig, MacKind, Transmission, BACKOFF_SLOTS, DEFAULT_SLOT_TIME};
pub use mote::{CacheEntry, Frame, LocalEnergy, LocalTopology, Mote, MoteStorage, Payload};
pub use report::{measure_messages, MessageStats, Outcome, RunReport, TraceRow, Validity};
pub use routing::{route, RoutingTable};
pub use sim::{
    simulate, simulate_multistart, simulate_observed, MoteUpdate, SimConfig, Trigger,
    DEFAULT_BROADCAST_THRESHOLD,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WpnError {
    #[error("problem has {problem} neurons but the topology has {motes} motes")]
    Dimension { problem: usize, motes: usize },
    #[error("mote {dst} is unreachable from mote {src}")]
    Unreachable { src: usize, dst: usize },
    #[error("invalid simulation setting: {0}")]
    InvalidConfig(String),
    #[error("non-finite neuron value at mote {mote}, t = {time} s")]
    Divergence { mote: usize, time: f64 },
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Neuron-to-mote assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Mote `i` hosts neuron `i`.
    #[default]
    Identity,
}

/// Who receives a mote's new output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dissemination {
    /// Only motes whose neuron reads the output.
    #[default]
    Coupled,
    /// Every other mote.
    AllMotes,
}

/// Receivers and relays for one origin's announcements.
#[derive(Debug, Clone, PartialEq)]
struct Forwarding {
    targets: Vec<bool>,
    relays: Vec<bool>,
}

/// An embedded network, ready to simulate.
#[derive(Debug, Clone)]
pub struct WpnState {
    motes: Vec<Mote>,
    topology: Graph,
    /// Graph the readout is validated against.
    problem_graph: Graph,
    exact: ExactEnergy,
    engine: Engine,
    dissemination: Dissemination,
    forwarding: Vec<Forwarding>,
}

impl WpnState {
    pub fn motes(&self) -> &[Mote] {
        &self.motes
    }

    pub fn topology(&self) -> &Graph {
        &self.topology
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn dissemination(&self) -> Dissemination {
        self.dissemination
    }

    /// Motes that relay announcements of `origin`.
    pub fn relays(&self, origin: usize) -> Vec<usize> {
        ones(&self.forwarding[origin].relays)
    }

    /// Motes that need announcements of `origin`.
    pub fn targets(&self, origin: usize) -> Vec<usize> {
        ones(&self.forwarding[origin].targets)
    }

    /// Radio receivers of a frame from `src` carrying `origin`'s output.
    fn receivers(&self, src: usize, origin: usize) -> Vec<usize> {
        let f = &self.forwarding[origin];
        self.topology
            .neighbors(src)
            .iter()
            .copied()
            .filter(|&r| r != origin && (f.targets[r] || f.relays[r]))
            .collect()
    }
}

fn ones(flags: &[bool]) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect()
}

/// Places one neuron per mote and loads each mote with its weight row,
/// bias and cache layout.
///
/// Under exact-gradient and annealing engines a domination-energy neuron
/// reads outputs up to two hops away, so its mote also keeps the adjacency
/// lists of its neighbors.
pub fn embed(
    prob: &CompiledProblem,
    topology: &Graph,
    placement: Placement,
    engine: &Engine,
    dissemination: Dissemination,
) -> Result<WpnState, WpnError> {
    let Placement::Identity = placement;
    engine.validate()?;
    let n = topology.n();
    if prob.k() != n {
        return Err(WpnError::Dimension {
            problem: prob.k(),
            motes: n,
        });
    }
    let params = prob.params();
    let gradient_coupled = !matches!(engine, Engine::Hopfield { .. });
    let mut motes = Vec::with_capacity(n);
    for i in 0..n {
        let weights: Vec<(usize, f64)> = params
            .row(i)
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w != 0.0)
            .map(|(j, &w)| (j, w))
            .collect();
        let mut coupled: Vec<usize> = weights.iter().map(|&(j, _)| j).collect();
        let energy = match prob.exact() {
            ExactEnergy::Mcds { graph, cfg } if gradient_coupled => {
                coupled.extend(graph.within_two_hops(i));
                let adj: BTreeMap<usize, Vec<usize>> = std::iter::once(i)
                    .chain(graph.neighbors(i).iter().copied())
                    .map(|v| (v, graph.neighbors(v).to_vec()))
                    .collect();
                LocalEnergy::Mcds {
                    cfg: *cfg,
                    topology: LocalTopology::new(adj),
                }
            }
            _ => LocalEnergy::Quadratic,
        };
        coupled.sort_unstable();
        coupled.dedup();
        let position = topology.positions().map(|p| p[i]);
        motes.push(Mote::new(
            i,
            position,
            params.lambda(),
            weights,
            params.bias()[i],
            energy,
            coupled,
        ));
    }

    let table = RoutingTable::new(topology);
    let mut forwarding = Vec::with_capacity(n);
    for origin in 0..n {
        let mut targets = vec![false; n];
        match dissemination {
            Dissemination::Coupled => {
                for m in &motes {
                    if m.is_coupled_to(origin) {
                        targets[m.id] = true;
                    }
                }
            }
            Dissemination::AllMotes => {
                targets.iter_mut().for_each(|t| *t = true);
                targets[origin] = false;
            }
        }
        let mut relays = vec![false; n];
        for dst in ones(&targets) {
            let path = table.route(topology, origin, dst);
            if path.is_empty() {
                return Err(WpnError::Unreachable { src: origin, dst });
            }
            for &hop in &path[1..path.len() - 1] {
                relays[hop] = true;
            }
        }
        forwarding.push(Forwarding { targets, relays });
    }

    let problem_graph = prob.graph().cloned().unwrap_or_else(|| topology.clone());
    Ok(WpnState {
        motes,
        topology: topology.clone(),
        problem_graph,
        exact: prob.exact().clone(),
        engine: engine.clone(),
        dissemination,
        forwarding,
    })
}
