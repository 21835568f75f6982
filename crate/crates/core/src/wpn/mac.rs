use crate::graph::Graph;

use super::WpnError;

/// Default per-slot (and per-message) transmission time in seconds.
pub const DEFAULT_SLOT_TIME: f64 = 1e-6;
/// Collided frames wait a uniform number of slots in this range.
pub const BACKOFF_SLOTS: (u64, u64) = (1, 8);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacKind {
    /// Perfect schedule: every transmission is delivered.
    IdealTdma,
    SlottedAloha,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacConfig {
    pub kind: MacKind,
    pub slot_time: f64,
    pub channels: usize,
    /// Per-slot transmit probability; only used by slotted ALOHA.
    pub p_transmit: f64,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self {
            kind: MacKind::IdealTdma,
            slot_time: DEFAULT_SLOT_TIME,
            channels: 1,
            p_transmit: 0.5,
        }
    }
}

impl MacConfig {
    pub fn validate(&self) -> Result<(), WpnError> {
        if self.channels == 0 {
            return Err(WpnError::InvalidConfig(
                "channels must be at least 1".into(),
            ));
        }
        if !(self.slot_time > 0.0 && self.slot_time.is_finite()) {
            return Err(WpnError::InvalidConfig(format!(
                "slot_time must be positive, got {}",
                self.slot_time
            )));
        }
        if !(self.p_transmit > 0.0 && self.p_transmit <= 1.0) {
            return Err(WpnError::InvalidConfig(format!(
                "p_transmit must lie in (0, 1], got {}",
                self.p_transmit
            )));
        }
        Ok(())
    }
}

/// One radio transmission within a slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub mote: usize,
    pub channel: usize,
    pub receivers: Vec<usize>,
}

/// Delivered (`true`) or collided (`false`) for each transmission.
///
/// Under slotted ALOHA a transmission collides when another same-channel
/// transmitter in the slot is one of its receivers or is in radio range of
/// one. Ideal TDMA delivers everything.
pub fn mac_arbitrate(
    transmissions: &[Transmission],
    topology: &Graph,
    cfg: &MacConfig,
) -> Vec<bool> {
    match cfg.kind {
        MacKind::IdealTdma => vec![true; transmissions.len()],
        MacKind::SlottedAloha => transmissions
            .iter()
            .enumerate()
            .map(|(a, tx)| {
                !transmissions.iter().enumerate().any(|(b, other)| {
                    a != b
                        && other.channel == tx.channel
                        && other.mote != tx.mote
                        && tx
                            .receivers
                            .iter()
                            .any(|&r| r == other.mote || topology.has_edge(other.mote, r))
                })
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aloha() -> MacConfig {
        MacConfig {
            kind: MacKind::SlottedAloha,
            ..MacConfig::default()
        }
    }

    fn broadcast(g: &Graph, mote: usize, channel: usize) -> Transmission {
        Transmission {
            mote,
            channel,
            receivers: g.neighbors(mote).to_vec(),
        }
    }

    #[test]
    fn single_transmitter_is_delivered() {
        let g = Graph::path(3);
        for cfg in [MacConfig::default(), aloha()] {
            assert_eq!(mac_arbitrate(&[broadcast(&g, 1, 0)], &g, &cfg), vec![true]);
        }
    }

    #[test]
    fn adjacent_transmitters_collide() {
        let g = Graph::path(2);
        let txs = [broadcast(&g, 0, 0), broadcast(&g, 1, 0)];
        assert_eq!(mac_arbitrate(&txs, &g, &aloha()), vec![false, false]);
        assert_eq!(
            mac_arbitrate(&txs, &g, &MacConfig::default()),
            vec![true, true]
        );
    }

    #[test]
    fn distant_transmitters_coexist() {
        // 0-1 and 4-5 with a gap: receiver sets {1} and {4} are out of range
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let txs = [broadcast(&g, 0, 0), broadcast(&g, 5, 0)];
        assert_eq!(mac_arbitrate(&txs, &g, &aloha()), vec![true, true]);
    }

    #[test]
    fn hidden_terminal_and_channels() {
        // 0 and 2 cannot hear each other but share receiver 1
        let g = Graph::path(3);
        let same = [broadcast(&g, 0, 0), broadcast(&g, 2, 0)];
        assert_eq!(mac_arbitrate(&same, &g, &aloha()), vec![false, false]);
        let split = [broadcast(&g, 0, 0), broadcast(&g, 2, 1)];
        assert_eq!(mac_arbitrate(&split, &g, &aloha()), vec![true, true]);
    }

    #[test]
    fn config_validation() {
        assert!(MacConfig::default().validate().is_ok());
        for bad in [
            MacConfig {
                channels: 0,
                ..MacConfig::default()
            },
            MacConfig {
                slot_time: 0.0,
                ..MacConfig::default()
            },
            MacConfig {
                p_transmit: 0.0,
                ..MacConfig::default()
            },
            MacConfig {
                p_transmit: 1.5,
                ..MacConfig::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
