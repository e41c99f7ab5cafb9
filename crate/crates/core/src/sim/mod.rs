//! Deterministic simulation of one Ethernet broadcast domain.
//!
//! Time advances in integer substeps of 0.01 ms; channel statistics and
//! agents run once per tick. All frame accounting is by count.

mod engine;
mod generator;
mod scenario;
mod summary;
mod switch;

pub use engine::{run, run_with, RunOptions};
pub use generator::jitter_bounds;
pub use scenario::{Amplitude, BurstShape, Injector, InjectorKind, NormalBroadcastProfile, Scenario, SCHEMA_VERSION};
pub use summary::{SimSummary, StageSpan};
pub use switch::{flood, saturation_cap, Frame, PortFilter, SwitchState};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Calibration, StormAction, TroubleTicket};
use crate::metrics::{ChannelStats, StormClassification};
use crate::NodeId;

/// Substeps per millisecond.
pub const SUBSTEPS_PER_MS: u64 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("unsupported scenario schema {0}")]
    Schema(u32),
    #[error("invalid scenario: {0}")]
    Invalid(&'static str),
    #[error("agent setup failed: {0}")]
    Agent(String),
    #[error("agent calibration failed: {0}")]
    Calibration(String),
}

/// Frame accounting for one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameLedger {
    /// New frames: normal traffic, injector output, loop seeds, replies.
    pub generated: u64,
    /// Loop passes after the seed.
    pub replicated: u64,
    /// Dropped at a filtered port.
    pub suppressed: u64,
    /// Dropped over the saturation cap.
    pub capped: u64,
    pub delivered: u64,
}

impl FrameLedger {
    pub fn balanced(&self) -> bool {
        self.generated + self.replicated == self.suppressed + self.capped + self.delivered
    }

    pub fn add(&mut self, other: &FrameLedger) {
        self.generated += other.generated;
        self.replicated += other.replicated;
        self.suppressed += other.suppressed;
        self.capped += other.capped;
        self.delivered += other.delivered;
    }
}

/// Frames a node got onto the channel during one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTraffic {
    pub node: NodeId,
    pub broadcast_pkts: u64,
    pub total_pkts: u64,
    pub broadcast_bytes: u64,
    pub total_bytes: u64,
    /// Broadcast frames the node emitted, delivered or not.
    pub broadcast_emitted: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub index: u64,
    /// Tick start, ms.
    pub t: f64,
    pub channel: ChannelStats,
    pub classification: StormClassification,
    pub nodes: Vec<NodeTraffic>,
    pub ledger: FrameLedger,
    /// Copies handed to receiving ports by flooding.
    pub flooded_copies: u64,
    /// Sightings of frames carrying a reused IPID, at most `ipid_k` per IPID per tick.
    pub ipid_sightings: Vec<(u32, f64)>,
    pub spoofs_delivered: u64,
    pub replies_generated: u64,
}

/// Everything a run produced. Immutable once returned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub scenario: Scenario,
    pub saturation_cap: u64,
    pub agents_enabled: bool,
    pub calibration: Option<Calibration>,
    pub ticks: Vec<TickRecord>,
    pub tickets: Vec<TroubleTicket>,
    /// Storm handler actions with the tick they happened in.
    pub actions: Vec<(u64, StormAction)>,
}

impl SimTrace {
    /// Broadcast megabytes (10^6 bytes) on the channel per tick.
    pub fn broadcast_mb(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ticks.iter().map(|r| (r.t, r.channel.broadcast_bytes as f64 / 1e6))
    }

    /// Tick index of the first ticket, if any.
    pub fn first_ticket_tick(&self) -> Option<u64> {
        self.actions
            .iter()
            .find(|(_, a)| matches!(a, StormAction::Suppress { .. }))
            .map(|(k, _)| *k)
    }

    pub fn summary(&self) -> SimSummary {
        SimSummary::from_trace(self)
    }
}
