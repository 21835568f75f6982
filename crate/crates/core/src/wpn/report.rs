use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cost::message_complexity;
use crate::dynamics::EnergyTrajectory;
use crate::graph::VertexSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Validity {
    pub ipds: bool,
    pub dominating: bool,
    pub connected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Delivered,
    Collided,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Delivered => "delivered",
            Outcome::Collided => "collided",
        }
    }
}

/// One (transmission, intended receiver) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub src: usize,
    pub dst: usize,
    pub channel: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Distinct frames put on the air (first attempts).
    pub total_messages: u64,
    pub delivered: u64,
    pub collided: u64,
    pub retransmissions: u64,
    /// Frames still queued or in flight when the run stopped.
    pub undelivered: u64,
    /// Neuron updates that flipped the binary readout.
    pub state_changes: u64,
    /// All neuron updates.
    pub updates: u64,
    /// Seconds.
    pub simulated_time: f64,
    /// Recorded after every slot in which some neuron updated.
    pub energy_trajectory: EnergyTrajectory,
    pub final_z: Vec<f64>,
    pub validity: Validity,
    pub episodes_used: u64,
    pub converged: bool,
    /// Seed of the reported episode.
    pub seed: u64,
    pub per_mote_transmissions: Vec<u64>,
    pub trace: Option<Vec<TraceRow>>,
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl RunReport {
    pub fn readout(&self) -> VertexSet {
        VertexSet::from_indicator(&self.final_z)
    }

    pub fn attempts(&self) -> u64 {
        self.total_messages + self.retransmissions
    }

    /// `key = value` lines in a fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("total_messages", self.total_messages.to_string());
        kv("delivered", self.delivered.to_string());
        kv("collided", self.collided.to_string());
        kv("retransmissions", self.retransmissions.to_string());
        kv("undelivered", self.undelivered.to_string());
        kv("state_changes", self.state_changes.to_string());
        kv("updates", self.updates.to_string());
        kv("simulated_time", self.simulated_time.to_string());
        kv("episodes_used", self.episodes_used.to_string());
        kv("seed", self.seed.to_string());
        kv("converged", self.converged.to_string());
        kv("validity.ipds", self.validity.ipds.to_string());
        kv("validity.dominating", self.validity.dominating.to_string());
        kv("validity.connected", self.validity.connected.to_string());
        kv(
            "final_energy",
            self.energy_trajectory
                .last()
                .unwrap_or(f64::NAN)
                .to_string(),
        );
        kv("readout", self.readout().to_string());
        kv("final_z", join(&self.final_z));
        kv("per_mote_transmissions", join(&self.per_mote_transmissions));
        kv("energy_trajectory", join(&self.energy_trajectory.energy));
        s
    }

    /// Tab-separated `time`, `src`, `dst`, `channel`, `outcome` rows with a
    /// header; just the header when tracing was off.
    pub fn trace_tsv(&self) -> String {
        let mut s = String::from("time\tsrc\tdst\tchannel\toutcome\n");
        for r in self.trace.iter().flatten() {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}",
                r.time,
                r.src,
                r.dst,
                r.channel,
                r.outcome.as_str()
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessageStats {
    pub total_messages: u64,
    /// Delivered plus collided transmissions.
    pub attempts: u64,
    pub delivered: u64,
    pub collided: u64,
    pub undelivered: u64,
    pub per_mote: Vec<u64>,
    /// Transmission count -> number of motes with that count.
    pub histogram: BTreeMap<u64, usize>,
    /// `m * N^3` for the report's episode count.
    pub envelope: u128,
    pub envelope_ratio: f64,
}

pub fn measure_messages(report: &RunReport) -> MessageStats {
    let mut histogram = BTreeMap::new();
    for &c in &report.per_mote_transmissions {
        *histogram.entry(c).or_insert(0) += 1;
    }
    let envelope = message_complexity(report.final_z.len() as u64, report.episodes_used);
    MessageStats {
        total_messages: report.total_messages,
        attempts: report.attempts(),
        delivered: report.delivered,
        collided: report.collided,
        undelivered: report.undelivered,
        per_mote: report.per_mote_transmissions.clone(),
        histogram,
        envelope,
        envelope_ratio: report.total_messages as f64 / envelope as f64,
    }
}
