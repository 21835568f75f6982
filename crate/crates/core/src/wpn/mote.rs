use std::collections::{BTreeMap, VecDeque};

use crate::dynamics::{gradient_activation, mfa_relax, sigmoid, Engine, TemperatureSchedule};
use crate::energy::{mcds_partial, EnergyConfig, Neighborhood};
use crate::graph::Point;

/// What a frame carries: a neuron's output and its update index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Payload {
    pub origin: usize,
    pub z: f64,
    pub k: u64,
    /// Change since the origin's previous announcement; infinite for the
    /// first one.
    pub delta: f64,
}

/// A queued frame. Times are slot indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub payload: Payload,
    pub receivers: Vec<usize>,
    pub enqueued: u64,
    pub attempts: u32,
    pub backoff_until: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheEntry {
    pub z: f64,
    pub k: u64,
    /// Slot at which the value arrived.
    pub delivered_at: u64,
}

/// Adjacency lists of a mote and its neighbors, enough to evaluate the
/// domination-energy gradient locally.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTopology {
    adj: BTreeMap<usize, Vec<usize>>,
}

impl LocalTopology {
    pub fn new(adj: BTreeMap<usize, Vec<usize>>) -> Self {
        Self { adj }
    }

    pub fn entries(&self) -> usize {
        self.adj.values().map(Vec::len).sum()
    }
}

impl Neighborhood for LocalTopology {
    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[&v]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocalEnergy {
    /// Energy is the quadratic form of the weights.
    Quadratic,
    Mcds {
        cfg: EnergyConfig,
        topology: LocalTopology,
    },
}

/// Reals and indices a mote holds, reported to storage hooks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoteStorage {
    pub weight_entries: usize,
    pub cache_entries: usize,
    pub topology_entries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mote {
    pub id: usize,
    pub position: Option<Point>,
    pub u: f64,
    pub z: f64,
    pub k: u64,
    lambda: f64,
    /// Nonzero entries of this mote's weight row, ascending by column.
    weights: Vec<(usize, f64)>,
    bias: f64,
    energy: LocalEnergy,
    /// Neurons whose outputs this mote reads, ascending.
    coupled: Vec<usize>,
    neighbor_cache: BTreeMap<usize, CacheEntry>,
    pub(crate) outbox: VecDeque<Frame>,
    pub(crate) last_broadcast: f64,
    pub(crate) relayed: BTreeMap<usize, u64>,
    pub(crate) dirty: bool,
}

impl Mote {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        id: usize,
        position: Option<Point>,
        lambda: f64,
        weights: Vec<(usize, f64)>,
        bias: f64,
        energy: LocalEnergy,
        coupled: Vec<usize>,
    ) -> Self {
        Self {
            id,
            position,
            u: 0.0,
            z: 0.5,
            k: 0,
            lambda,
            weights,
            bias,
            energy,
            coupled,
            neighbor_cache: BTreeMap::new(),
            outbox: VecDeque::new(),
            last_broadcast: f64::NAN,
            relayed: BTreeMap::new(),
            dirty: true,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weights(&self) -> &[(usize, f64)] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn coupled(&self) -> &[usize] {
        &self.coupled
    }

    pub fn neighbor_cache(&self) -> &BTreeMap<usize, CacheEntry> {
        &self.neighbor_cache
    }

    pub fn cache_complete(&self) -> bool {
        self.neighbor_cache.len() == self.coupled.len()
    }

    pub fn is_coupled_to(&self, j: usize) -> bool {
        self.coupled.binary_search(&j).is_ok()
    }

    pub fn storage(&self) -> MoteStorage {
        MoteStorage {
            weight_entries: self.weights.len(),
            cache_entries: self.neighbor_cache.len(),
            topology_entries: match &self.energy {
                LocalEnergy::Quadratic => 0,
                LocalEnergy::Mcds { topology, .. } => topology.entries(),
            },
        }
    }

    /// Latest delivery slot among cached values.
    pub fn newest_input(&self) -> Option<u64> {
        self.neighbor_cache.values().map(|e| e.delivered_at).max()
    }

    pub(crate) fn reset(&mut self, u: f64, z: f64) {
        self.u = u;
        self.z = z;
        self.k = 0;
        self.neighbor_cache.clear();
        self.outbox.clear();
        self.last_broadcast = f64::NAN;
        self.relayed.clear();
        self.dirty = true;
    }

    /// Stores a newer value of a coupled neuron. Returns whether the cache
    /// changed.
    pub(crate) fn receive(&mut self, p: &Payload, now: u64) -> bool {
        if !self.is_coupled_to(p.origin) {
            return false;
        }
        match self.neighbor_cache.get(&p.origin) {
            Some(e) if e.k >= p.k => false,
            _ => {
                self.neighbor_cache.insert(
                    p.origin,
                    CacheEntry {
                        z: p.z,
                        k: p.k,
                        delivered_at: now,
                    },
                );
                true
            }
        }
    }

    /// Queues a frame, merging it into a pending frame from the same origin.
    pub(crate) fn enqueue(&mut self, payload: Payload, receivers: Vec<usize>, now: u64) {
        if let Some(f) = self
            .outbox
            .iter_mut()
            .find(|f| f.payload.origin == payload.origin)
        {
            if payload.k > f.payload.k {
                f.payload = Payload {
                    delta: f.payload.delta + payload.delta,
                    ..payload
                };
            }
            return;
        }
        self.outbox.push_back(Frame {
            payload,
            receivers,
            enqueued: now,
            attempts: 0,
            backoff_until: now,
        });
    }

    fn z_of(&self, j: usize) -> f64 {
        if j == self.id {
            self.z
        } else {
            self.neighbor_cache[&j].z
        }
    }

    /// Weighted input plus bias, accumulated in ascending column order.
    fn local_field(&self) -> f64 {
        let dot: f64 = self.weights.iter().map(|&(j, w)| w * self.z_of(j)).sum();
        dot + self.bias
    }

    fn partial(&self) -> f64 {
        match &self.energy {
            LocalEnergy::Quadratic => -self.local_field(),
            LocalEnergy::Mcds { cfg, topology } => {
                mcds_partial(topology, cfg, self.id, |j| self.z_of(j))
            }
        }
    }

    /// Next `(u, z)` from the cached inputs. Requires a complete cache.
    pub(crate) fn compute(&self, engine: &Engine, sched: &TemperatureSchedule) -> (f64, f64) {
        match *engine {
            Engine::Hopfield { mode, unit } => {
                let u = mode.next_activation(self.u, self.local_field());
                (u, unit.output(u, self.lambda))
            }
            Engine::Gradient { dt } => {
                let u = gradient_activation(self.u, self.partial(), dt);
                (u, sigmoid(u, self.lambda))
            }
            Engine::Mfa { mu, tau } => {
                let field = -0.5 * self.partial();
                let v = mfa_relax(self.u, field, tau * mu, sched.at(self.k));
                (v, (1.0 + v) / 2.0)
            }
        }
    }
}
