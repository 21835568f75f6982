//! Closed-form space, message and time cost calculators.
//!
//! Counts are returned as `u128`, which holds `m * N^3` and `y * N^4`
//! exactly for `N` up to 10^7. Times are `f64` seconds.

use thiserror::Error;

use crate::energy::HopfieldParams;

/// Factor in the bound `3 * sum_{j<i} |w_ij|` on state changes of an
/// asynchronous integer-weight network.
pub const STATE_CHANGE_FACTOR: u128 = 3;

/// Messages per neuron update when every new output is broadcast to all
/// neurons: at least `N`, giving `N^2 * N` per episode.
pub const BROADCAST_MESSAGES_PER_UPDATE: &str = "N";

/// Episodes beyond this count are unusual for convergence.
pub const TYPICAL_MAX_EPISODES: u64 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("weight ({i}, {j}) = {value} is not an integer")]
    NonInteger { i: usize, j: usize, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

/// `3 * sum_{j<i} |w_ij|` for an integer weight matrix.
pub fn state_change_bound(p: &HopfieldParams) -> Result<u128, CostError> {
    let mut total: u128 = 0;
    for i in 0..p.k() {
        for j in 0..i {
            let value = p.weight(i, j);
            if value.fract() != 0.0 || !value.is_finite() {
                return Err(CostError::NonInteger { i, j, value });
            }
            total += value.abs() as u128;
        }
    }
    Ok(STATE_CHANGE_FACTOR * total)
}

/// `m * N^3`.
pub fn message_complexity(n: u64, episodes: u64) -> u128 {
    let n = u128::from(n);
    u128::from(episodes) * n * n * n
}

/// Worst-case per-mote storage `2 * y * (N - 1)` bytes: a weight vector and
/// an output cache, each with `N - 1` entries.
pub fn memory_per_mote(n: u64, bytes_per_real: u64) -> u128 {
    2 * u128::from(bytes_per_real) * u128::from(n.saturating_sub(1))
}

/// Weight matrix of an `N x N` neuron array for a `v`-vertex problem:
/// `y * v^4` bytes.
pub fn centralized_weight_matrix_bytes(vertices: u64, bytes_per_real: u64) -> u128 {
    u128::from(bytes_per_real) * u128::from(vertices).pow(4)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostInputs {
    pub n_neurons: u64,
    pub episodes: u64,
    pub bytes_per_real: u64,
    pub group_size: u64,
    /// Seconds per message.
    pub msg_time: f64,
    pub channels: u64,
}

impl CostInputs {
    pub fn validate(&self) -> Result<(), CostError> {
        let ints = [
            ("n_neurons", self.n_neurons),
            ("episodes", self.episodes),
            ("bytes_per_real", self.bytes_per_real),
            ("group_size", self.group_size),
            ("channels", self.channels),
        ];
        for (name, v) in ints {
            if v == 0 {
                return Err(CostError::NonPositive { name, value: 0.0 });
            }
        }
        if !(self.msg_time > 0.0 && self.msg_time.is_finite()) {
            return Err(CostError::NonPositive {
                name: "msg_time",
                value: self.msg_time,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalabilityEstimate {
    /// `N / group_size`, at least one.
    pub clusters: u64,
    /// Motes left over by the integer division.
    pub cluster_remainder: u64,
    /// Messages that still go one after another once clusters talk in
    /// parallel.
    pub sequential_messages: u128,
    pub wall_seconds: f64,
}

/// Clusters communicate concurrently; what remains is serialized and then
/// spread over the channels.
pub fn scalability_estimate(inputs: &CostInputs) -> ScalabilityEstimate {
    let clusters = (inputs.n_neurons / inputs.group_size).max(1);
    let cluster_remainder = inputs.n_neurons % inputs.group_size;
    let sequential_messages =
        message_complexity(inputs.n_neurons, inputs.episodes) / u128::from(clusters);
    let wall_seconds = sequential_messages as f64 * inputs.msg_time / inputs.channels as f64;
    ScalabilityEstimate {
        clusters,
        cluster_remainder,
        sequential_messages,
        wall_seconds,
    }
}

/// All cost outputs for one set of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    pub inputs: CostInputs,
    pub message_complexity: u128,
    pub memory_per_mote: u128,
    pub centralized_weight_bytes: u128,
    pub scalability: ScalabilityEstimate,
    /// Present when the run had an integer weight matrix.
    pub state_change_bound: Option<u128>,
}

impl CostTable {
    pub fn compute(
        inputs: CostInputs,
        weights: Option<&HopfieldParams>,
    ) -> Result<Self, CostError> {
        inputs.validate()?;
        let state_change_bound = match weights {
            Some(p) => state_change_bound(p).ok(),
            None => None,
        };
        Ok(Self {
            message_complexity: message_complexity(inputs.n_neurons, inputs.episodes),
            memory_per_mote: memory_per_mote(inputs.n_neurons, inputs.bytes_per_real),
            centralized_weight_bytes: centralized_weight_matrix_bytes(
                inputs.n_neurons,
                inputs.bytes_per_real,
            ),
            scalability: scalability_estimate(&inputs),
            state_change_bound,
            inputs,
        })
    }

    pub const HEADER: &'static str =
        "n_neurons\tepisodes\tbytes_per_real\tgroup_size\tmsg_time\tchannels\t\
message_complexity\tmemory_per_mote\tcentralized_weight_bytes\tclusters\tcluster_remainder\t\
sequential_messages\twall_seconds\tstate_change_bound";

    pub fn row(&self) -> String {
        let i = &self.inputs;
        let s = &self.scalability;
        let bound = self
            .state_change_bound
            .map_or_else(|| "NA".to_string(), |b| b.to_string());
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i.n_neurons,
            i.episodes,
            i.bytes_per_real,
            i.group_size,
            i.msg_time,
            i.channels,
            self.message_complexity,
            self.memory_per_mote,
            self.centralized_weight_bytes,
            s.clusters,
            s.cluster_remainder,
            s.sequential_messages,
            s.wall_seconds,
            bound
        )
    }

    pub fn to_tsv(&self) -> String {
        format!("{}\n{}\n", Self::HEADER, self.row())
    }
}
