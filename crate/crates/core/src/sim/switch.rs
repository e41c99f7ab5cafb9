use serde::{Deserialize, Serialize};

use super::SUBSTEPS_PER_MS;
use crate::agents::SuppressionPolicy;
use crate::metrics::MIN_IPG_BITS;
use crate::NodeId;

/// Frames that fit in one tick: `floor(link_rate·tick / (8·frame_size + 96))`.
pub fn saturation_cap(link_rate: u64, frame_size: u32, tick_ms: f64) -> u64 {
    let wire_bits = 8 * frame_size as u128 + MIN_IPG_BITS as u128;
    let substeps = tick_ms * SUBSTEPS_PER_MS as f64;
    if (substeps - substeps.round()).abs() <= 1e-9 * substeps.max(1.0) {
        // Exact integer path: link_rate bits/s over tick = link_rate·n / 10^5 bits.
        let num = link_rate as u128 * substeps.round() as u128;
        let den = 1000 * SUBSTEPS_PER_MS as u128 * wire_bits;
        (num / den) as u64
    } else {
        (link_rate as f64 * tick_ms / 1000.0 / wire_bits as f64).floor() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frame {
    pub src: NodeId,
    pub ipid: u32,
    pub is_broadcast: bool,
    pub size: u32,
    /// Birth time in substeps of 0.01 ms.
    pub born: u64,
}

/// Ingress filter on a switch port.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortFilter {
    #[default]
    Open,
    BroadcastBlocked,
    AllBlocked,
}

impl PortFilter {
    pub fn for_policy(policy: SuppressionPolicy) -> Self {
        match policy {
            SuppressionPolicy::PacketBased => PortFilter::AllBlocked,
            SuppressionPolicy::BandwidthBased => PortFilter::BroadcastBlocked,
            SuppressionPolicy::None => PortFilter::Open,
        }
    }

    pub fn admits(self, is_broadcast: bool) -> bool {
        match self {
            PortFilter::Open => true,
            PortFilter::BroadcastBlocked => !is_broadcast,
            PortFilter::AllBlocked => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchState {
    ports: Vec<PortFilter>,
}

impl SwitchState {
    pub fn new(node_count: u32) -> Self {
        Self {
            ports: vec![PortFilter::Open; node_count as usize],
        }
    }

    pub fn node_count(&self) -> u32 {
        self.ports.len() as u32
    }

    pub fn port(&self, node: NodeId) -> PortFilter {
        self.ports[node as usize]
    }

    pub fn set_port(&mut self, node: NodeId, filter: PortFilter) {
        self.ports[node as usize] = filter;
    }

    pub fn admits(&self, src: NodeId, is_broadcast: bool) -> bool {
        self.port(src).admits(is_broadcast)
    }
}

/// Nodes that receive a copy of a broadcast frame: everyone but the ingress
/// port, and nobody if the ingress filters it. Ports filtering broadcasts
/// get no copy either.
pub fn flood(frame: &Frame, switch: &SwitchState) -> Vec<NodeId> {
    debug_assert!(frame.is_broadcast);
    if !switch.admits(frame.src, true) {
        return Vec::new();
    }
    (0..switch.node_count())
        .filter(|&n| n != frame.src && switch.admits(n, true))
        .collect()
}

/// Copies a broadcast from `src` produces, without building the list.
pub(crate) fn flood_copies(src: NodeId, switch: &SwitchState) -> u64 {
    if !switch.admits(src, true) {
        return 0;
    }
    (0..switch.node_count())
        .filter(|&n| n != src && switch.admits(n, true))
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bcast(src: NodeId) -> Frame {
        Frame {
            src,
            ipid: 1,
            is_broadcast: true,
            size: 512,
            born: 0,
        }
    }

    #[test]
    fn cap_hand_values() {
        assert_eq!(saturation_cap(10_000_000, 512, 1.0), 2);
        assert_eq!(saturation_cap(2_432_000_000_000, 64, 0.1), 400_000);
        assert_eq!(saturation_cap(10_000_000_000, 1250, 10.0), 9904);
        assert_eq!(saturation_cap(10_000_000, u32::MAX, 1.0), 0);
    }

    #[test]
    fn cap_scales_with_rate() {
        for rate in [1_000_000u64, 10_000_000, 123_456_789] {
            let one = saturation_cap(rate, 512, 1.0);
            let two = saturation_cap(2 * rate, 512, 1.0);
            assert!(two == 2 * one || two == 2 * one + 1);
        }
    }

    #[test]
    fn flood_skips_ingress_and_blocked() {
        let mut sw = SwitchState::new(5);
        assert_eq!(flood(&bcast(2), &sw), vec![0, 1, 3, 4]);
        sw.set_port(2, PortFilter::AllBlocked);
        assert!(flood(&bcast(2), &sw).is_empty());
        assert_eq!(flood_copies(2, &sw), 0);
        assert_eq!(flood(&bcast(0), &sw), vec![1, 3, 4]);
        sw.set_port(2, PortFilter::BroadcastBlocked);
        assert!(sw.admits(2, false));
        assert!(!sw.admits(2, true));
    }
}
