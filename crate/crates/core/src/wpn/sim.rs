use rand::Rng;

use crate::dynamics::{
    entropy_weight, episode_init_sized, ConvergenceCriterion, EnergyTrajectory, TemperatureSchedule,
};
use crate::energy::{logit_integral_closed, mcds_energy, ExactEnergy};
use crate::graph::VertexSet;
use crate::rng::seeded;

use super::mac::{mac_arbitrate, MacConfig, MacKind, Transmission, BACKOFF_SLOTS};
use super::mote::{Mote, MoteStorage, Payload};
use super::report::{Outcome, RunReport, TraceRow, Validity};
use super::{WpnError, WpnState};

/// Minimum output change that makes a mote announce its new value.
pub const DEFAULT_BROADCAST_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_MAX_SLOTS: u64 = 50_000_000;

/// When a mote recomputes its neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    /// In the slot after a coupled value changes, and again while its own
    /// output is still moving.
    OnReceive,
    /// Every `period` slots. Synchronized motes share the tick; otherwise
    /// each mote gets a seeded random phase.
    Periodic { period: u64, synchronized: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mac: MacConfig,
    pub trigger: Trigger,
    /// Broadcast threshold on `|z - last announced z|`.
    pub delta: f64,
    pub max_slots: u64,
    /// Temperatures for annealing engines, indexed by each mote's update
    /// count.
    pub schedule: TemperatureSchedule,
    pub record_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mac: MacConfig::default(),
            trigger: Trigger::OnReceive,
            delta: DEFAULT_BROADCAST_THRESHOLD,
            max_slots: DEFAULT_MAX_SLOTS,
            schedule: TemperatureSchedule::default(),
            record_trace: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), WpnError> {
        self.mac.validate()?;
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(WpnError::InvalidConfig(format!(
                "broadcast threshold must be non-negative, got {}",
                self.delta
            )));
        }
        if let Trigger::Periodic { period: 0, .. } = self.trigger {
            return Err(WpnError::InvalidConfig(
                "trigger period must be at least 1 slot".into(),
            ));
        }
        Ok(())
    }
}

/// A single mote update, reported to observers.
#[derive(Debug, Clone, PartialEq)]
pub struct MoteUpdate {
    pub slot: u64,
    pub mote: usize,
    pub old_z: f64,
    pub new_z: f64,
    pub storage: MoteStorage,
    /// Latest delivery slot of any cached value the update read.
    pub newest_input: Option<u64>,
}

struct InFlight {
    payload: Payload,
    receivers: Vec<usize>,
}

/// Global observer of the problem energy; reads mote-local rows only.
fn observed_energy(wpn: &WpnState, motes: &[Mote], z: &[f64]) -> Result<f64, WpnError> {
    match &wpn.exact {
        ExactEnergy::Quadratic => {
            let mut pair = 0.0;
            let mut linear = 0.0;
            for (i, m) in motes.iter().enumerate() {
                let dot: f64 = m.weights().iter().map(|&(j, w)| w * z[j]).sum();
                pair += z[i] * dot;
                linear += m.bias() * z[i];
            }
            Ok(-0.5 * pair - linear)
        }
        ExactEnergy::Mcds { graph, cfg } => Ok(mcds_energy(graph, z, cfg)?),
    }
}

fn push_energy(
    wpn: &WpnState,
    motes: &[Mote],
    weight: f64,
    traj: &mut EnergyTrajectory,
) -> Result<(), WpnError> {
    let z: Vec<f64> = motes.iter().map(|m| m.z).collect();
    let e = observed_energy(wpn, motes, &z)?;
    let l = if weight == 0.0 {
        e
    } else {
        e + weight * z.iter().map(|&v| logit_integral_closed(v)).sum::<f64>()
    };
    traj.push(e, l);
    Ok(())
}

/// Runs one episode from the initial state identified by `seed`.
pub fn simulate(
    wpn: &WpnState,
    cfg: &SimConfig,
    crit: &ConvergenceCriterion,
    seed: u64,
) -> Result<RunReport, WpnError> {
    simulate_observed(wpn, cfg, crit, seed, |_| {})
}

/// [`simulate`] with a callback after every mote update.
pub fn simulate_observed(
    wpn: &WpnState,
    cfg: &SimConfig,
    crit: &ConvergenceCriterion,
    seed: u64,
    mut observe: impl FnMut(&MoteUpdate),
) -> Result<RunReport, WpnError> {
    cfg.validate()?;
    let n = wpn.motes.len();
    let lambda = wpn.motes.first().map_or(1.0, |m| m.lambda());
    let engine = &wpn.engine;
    let eps = crit.epsilon;
    let max_updates = crit.max_steps as u64;
    let slot_time = cfg.mac.slot_time;

    let init = episode_init_sized(n, lambda, engine, seed);
    let mut motes = wpn.motes.clone();
    for (i, m) in motes.iter_mut().enumerate() {
        m.reset(init.u[i], init.z[i]);
    }
    let mut rng = seeded(seed);
    rng.set_stream(1);
    let phases: Vec<u64> = match cfg.trigger {
        Trigger::Periodic {
            period,
            synchronized: false,
        } => (0..n).map(|_| rng.gen_range(0..period)).collect(),
        _ => vec![0; n],
    };
    let is_tick = |i: usize, t: u64| match cfg.trigger {
        Trigger::Periodic { period, .. } => {
            t >= phases[i] + period && (t - phases[i]).is_multiple_of(period)
        }
        Trigger::OnReceive => false,
    };
    let next_tick = |i: usize, t: u64| match cfg.trigger {
        Trigger::Periodic { period, .. } => {
            let first = phases[i] + period;
            if t < first {
                first
            } else {
                t + period - (t - phases[i]) % period
            }
        }
        Trigger::OnReceive => u64::MAX,
    };

    let mut report = RunReport {
        total_messages: 0,
        delivered: 0,
        collided: 0,
        retransmissions: 0,
        undelivered: 0,
        state_changes: 0,
        updates: 0,
        simulated_time: 0.0,
        energy_trajectory: EnergyTrajectory::default(),
        final_z: Vec::new(),
        validity: Validity {
            ipds: false,
            dominating: false,
            connected: false,
        },
        episodes_used: 1,
        converged: false,
        seed,
        per_mote_transmissions: vec![0; n],
        trace: cfg.record_trace.then(Vec::new),
    };
    push_energy(
        wpn,
        &motes,
        entropy_weight(engine, lambda, &cfg.schedule, 0),
        &mut report.energy_trajectory,
    )?;

    // initial announcements
    for i in 0..n {
        let receivers = wpn.receivers(i, i);
        let m = &mut motes[i];
        m.last_broadcast = m.z;
        if !receivers.is_empty() {
            let payload = Payload {
                origin: i,
                z: m.z,
                k: 0,
                delta: f64::INFINITY,
            };
            m.enqueue(payload, receivers, 0);
        }
    }

    let mut in_flight: Vec<InFlight> = Vec::new();
    let mut stopped = false;
    let mut t: u64 = 0;
    loop {
        // deliveries stamped with this slot
        for msg in std::mem::take(&mut in_flight) {
            let origin = msg.payload.origin;
            for &r in &msg.receivers {
                let changed = motes[r].receive(&msg.payload, t);
                if changed && msg.payload.delta >= eps {
                    motes[r].dirty = true;
                }
                let relay = wpn.forwarding[origin].relays[r]
                    && motes[r]
                        .relayed
                        .get(&origin)
                        .is_none_or(|&k| msg.payload.k > k);
                if relay {
                    motes[r].relayed.insert(origin, msg.payload.k);
                    let receivers = wpn.receivers(r, origin);
                    if !receivers.is_empty() {
                        motes[r].enqueue(msg.payload, receivers, t);
                    }
                }
            }
        }

        // neuron updates; each mote reads only its own state and cache
        if !stopped {
            let triggered: Vec<usize> = (0..n)
                .filter(|&i| {
                    let m = &motes[i];
                    m.k < max_updates
                        && m.cache_complete()
                        && match cfg.trigger {
                            Trigger::OnReceive => m.dirty,
                            Trigger::Periodic { .. } => is_tick(i, t),
                        }
                })
                .collect();
            for &i in &triggered {
                let (u, z) = motes[i].compute(engine, &cfg.schedule);
                if !(u.is_finite() && z.is_finite()) {
                    return Err(WpnError::Divergence {
                        mote: i,
                        time: t as f64 * slot_time,
                    });
                }
                let m = &mut motes[i];
                let old_z = m.z;
                m.u = u;
                m.z = z;
                m.k += 1;
                m.dirty = (z - old_z).abs() >= eps;
                report.updates += 1;
                if (old_z > 0.5) != (z > 0.5) {
                    report.state_changes += 1;
                }
                let change = (z - m.last_broadcast).abs();
                if change > cfg.delta {
                    m.last_broadcast = z;
                    let payload = Payload {
                        origin: i,
                        z,
                        k: m.k,
                        delta: change,
                    };
                    let receivers = wpn.receivers(i, i);
                    if !receivers.is_empty() {
                        motes[i].enqueue(payload, receivers, t);
                    }
                }
                observe(&MoteUpdate {
                    slot: t,
                    mote: i,
                    old_z,
                    new_z: z,
                    storage: motes[i].storage(),
                    newest_input: motes[i].newest_input(),
                });
            }
            if !triggered.is_empty() {
                let round = motes
                    .iter()
                    .map(|m| m.k)
                    .min()
                    .unwrap_or(0)
                    .saturating_sub(1);
                push_energy(
                    wpn,
                    &motes,
                    entropy_weight(engine, lambda, &cfg.schedule, round),
                    &mut report.energy_trajectory,
                )?;
            }
            let quiet = motes.iter().all(|m| !m.dirty)
                && motes
                    .iter()
                    .all(|m| m.outbox.iter().all(|f| f.payload.delta < eps));
            if quiet {
                report.converged = true;
                stopped = true;
            } else if motes.iter().all(|m| m.k >= max_updates) {
                stopped = true;
            }
        }

        // medium access
        let mut txs: Vec<Transmission> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for (i, m) in motes.iter().enumerate() {
            match cfg.mac.kind {
                MacKind::IdealTdma => {
                    let c = m.outbox.len().min(cfg.mac.channels);
                    for (ch, f) in m.outbox.iter().take(c).enumerate() {
                        txs.push(Transmission {
                            mote: i,
                            channel: ch,
                            receivers: f.receivers.clone(),
                        });
                    }
                    counts.push(c);
                }
                MacKind::SlottedAloha => {
                    let ready = m.outbox.front().is_some_and(|f| f.backoff_until <= t);
                    if ready && rng.gen_bool(cfg.mac.p_transmit) {
                        let channel = rng.gen_range(0..cfg.mac.channels);
                        txs.push(Transmission {
                            mote: i,
                            channel,
                            receivers: m.outbox[0].receivers.clone(),
                        });
                        counts.push(1);
                    } else {
                        counts.push(0);
                    }
                }
            }
        }
        let outcomes = mac_arbitrate(&txs, &wpn.topology, &cfg.mac);
        let mut cursor = 0;
        for (i, &c) in counts.iter().enumerate() {
            let mut delivered_frames = 0;
            for slot_index in 0..c {
                let tx = &txs[cursor + slot_index];
                let ok = outcomes[cursor + slot_index];
                let frame = &mut motes[i].outbox[slot_index];
                if frame.attempts == 0 {
                    report.total_messages += 1;
                } else {
                    report.retransmissions += 1;
                }
                report.per_mote_transmissions[i] += 1;
                if let Some(trace) = report.trace.as_mut() {
                    for &r in &tx.receivers {
                        trace.push(TraceRow {
                            time: t as f64 * slot_time,
                            src: i,
                            dst: r,
                            channel: tx.channel,
                            outcome: if ok {
                                Outcome::Delivered
                            } else {
                                Outcome::Collided
                            },
                        });
                    }
                }
                if ok {
                    report.delivered += 1;
                    in_flight.push(InFlight {
                        payload: frame.payload,
                        receivers: tx.receivers.clone(),
                    });
                    delivered_frames += 1;
                } else {
                    report.collided += 1;
                    frame.attempts += 1;
                    frame.backoff_until = t + rng.gen_range(BACKOFF_SLOTS.0..=BACKOFF_SLOTS.1);
                }
            }
            // delivered frames are a prefix: TDMA delivers all, ALOHA sends one
            for _ in 0..delivered_frames {
                motes[i].outbox.pop_front();
            }
            cursor += c;
        }

        // next slot with something to do
        let mut next = u64::MAX;
        if !in_flight.is_empty() {
            next = t + 1;
        }
        for m in &motes {
            if let Some(f) = m.outbox.front() {
                let ready = match cfg.mac.kind {
                    MacKind::IdealTdma => t + 1,
                    MacKind::SlottedAloha => f.backoff_until.max(t + 1),
                };
                next = next.min(ready);
            }
        }
        if !stopped {
            for (i, m) in motes.iter().enumerate() {
                if m.k >= max_updates {
                    continue;
                }
                match cfg.trigger {
                    Trigger::OnReceive if m.dirty && m.cache_complete() => next = next.min(t + 1),
                    Trigger::OnReceive => {}
                    Trigger::Periodic { .. } => next = next.min(next_tick(i, t)),
                }
            }
        }
        if next == u64::MAX || next > cfg.max_slots {
            break;
        }
        t = next;
    }

    report.undelivered =
        in_flight.len() as u64 + motes.iter().map(|m| m.outbox.len() as u64).sum::<u64>();
    report.simulated_time = t as f64 * slot_time;
    report.final_z = motes.iter().map(|m| m.z).collect();
    let readout = VertexSet::from_indicator(&report.final_z);
    let g = &wpn.problem_graph;
    report.validity = Validity {
        ipds: g.is_independent_perfect_dominating(&readout),
        dominating: g.is_dominating_set(&readout),
        connected: g.is_connected_in_graph(&readout),
    };
    Ok(report)
}

/// One episode per seed until a run is accepted: a valid readout for
/// domination problems, convergence otherwise. Message and update counters
/// cover every episode run; the remaining fields describe the accepted
/// episode, or the lowest-energy one when none was accepted.
pub fn simulate_multistart(
    wpn: &WpnState,
    cfg: &SimConfig,
    crit: &ConvergenceCriterion,
    seeds: &[u64],
) -> Result<RunReport, WpnError> {
    if seeds.is_empty() {
        return Err(WpnError::InvalidConfig("no seeds given".into()));
    }
    if seeds.len() > crit.max_episodes {
        return Err(WpnError::InvalidConfig(format!(
            "{} seeds exceed the episode cap of {}",
            seeds.len(),
            crit.max_episodes
        )));
    }
    let accepted = |r: &RunReport| match wpn.exact {
        ExactEnergy::Mcds { .. } => r.validity.ipds,
        ExactEnergy::Quadratic => r.converged,
    };
    let final_energy = |r: &RunReport| r.energy_trajectory.last().unwrap_or(f64::INFINITY);
    let mut best: Option<RunReport> = None;
    let mut totals = [0u64; 7];
    let mut per_mote = vec![0u64; wpn.motes.len()];
    let mut used = 0;
    for &seed in seeds {
        let r = simulate(wpn, cfg, crit, seed)?;
        used += 1;
        for (acc, v) in totals.iter_mut().zip([
            r.total_messages,
            r.delivered,
            r.collided,
            r.retransmissions,
            r.undelivered,
            r.state_changes,
            r.updates,
        ]) {
            *acc += v;
        }
        for (acc, v) in per_mote.iter_mut().zip(&r.per_mote_transmissions) {
            *acc += v;
        }
        let done = accepted(&r);
        if done
            || best
                .as_ref()
                .is_none_or(|b| final_energy(&r) < final_energy(b))
        {
            best = Some(r);
        }
        if done {
            break;
        }
    }
    let mut best = best.expect("at least one seed");
    [
        best.total_messages,
        best.delivered,
        best.collided,
        best.retransmissions,
        best.undelivered,
        best.state_changes,
        best.updates,
    ] = totals;
    best.per_mote_transmissions = per_mote;
    best.episodes_used = used;
    Ok(best)
}
