//! Channel metrics: node bandwidth, inter-packet gap, utilization, broadcast
//! share and IPID repetition, plus the per-tick storm verdict built from them.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum Ethernet inter-packet gap in bit times.
pub const MIN_IPG_BITS: u64 = 96;

/// Broadcast share of total traffic above which the channel is unhealthy.
pub const BROADCAST_RULE: f64 = 0.20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("transmission interval must be positive, got {0}")]
    NonPositiveInterval(f64),
    #[error("packet size must be non-negative, got {0}")]
    NegativePacketSize(f64),
    #[error("link rate must be positive")]
    ZeroRate,
    #[error("maximum capacity must be positive, got {0}")]
    ZeroCapacity(f64),
    #[error("current traffic must be non-negative, got {0}")]
    NegativeTraffic(f64),
    #[error("invalid IPID loop parameters: k = {k}, window = {window_ms} ms")]
    InvalidLoopParams { k: usize, window_ms: f64 },
    #[error("inconsistent channel stats: {0}")]
    InvalidStats(&'static str),
}

/// Per-node bandwidth `N_BW = P · I`.
pub fn node_bandwidth(packet_size: f64, interval: f64) -> Result<f64, MetricsError> {
    if !(interval > 0.0) {
        return Err(MetricsError::NonPositiveInterval(interval));
    }
    if !(packet_size >= 0.0) {
        return Err(MetricsError::NegativePacketSize(packet_size));
    }
    Ok(packet_size * interval)
}

/// Permissible node bandwidth and the factor above it that counts as storming.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbwLimit {
    pub permissible: f64,
    pub factor: f64,
}

impl NbwLimit {
    pub const DEFAULT_FACTOR: f64 = 2.0;

    pub fn new(permissible: f64) -> Self {
        Self {
            permissible,
            factor: Self::DEFAULT_FACTOR,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.factor * self.permissible
    }

    pub fn is_storming(&self, nbw: f64) -> bool {
        nbw > self.threshold()
    }
}

/// Minimum inter-packet gap in nanoseconds for a link of `link_rate` bit/s.
pub fn min_ipg(link_rate: u64) -> Result<f64, MetricsError> {
    if link_rate == 0 {
        return Err(MetricsError::ZeroRate);
    }
    Ok(MIN_IPG_BITS as f64 * 1e9 / link_rate as f64)
}

/// True when the observed gap is below `shrink_factor` times the minimum gap.
pub fn ipg_shrinkage(observed_ns: f64, link_rate: u64, shrink_factor: f64) -> Result<bool, MetricsError> {
    Ok(observed_ns < shrink_factor * min_ipg(link_rate)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilizationBand {
    Idle,
    Normal,
    Storm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Utilization {
    pub fraction: f64,
    pub band: UtilizationBand,
}

/// `current / max_capacity`, capped at 1.
pub fn utilization(current: f64, max_capacity: f64) -> Result<Utilization, MetricsError> {
    if !(max_capacity > 0.0) {
        return Err(MetricsError::ZeroCapacity(max_capacity));
    }
    if !(current >= 0.0) {
        return Err(MetricsError::NegativeTraffic(current));
    }
    let fraction = (current / max_capacity).min(1.0);
    let band = if fraction < Thresholds::default().idle {
        UtilizationBand::Idle
    } else if fraction > Thresholds::default().storm_utilization {
        UtilizationBand::Storm
    } else {
        UtilizationBand::Normal
    };
    Ok(Utilization { fraction, band })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BroadcastRatio {
    /// No frames in the interval; the ratio is undefined.
    NoTraffic,
    Measured {
        ratio: f64,
        exceeds_rule: bool,
    },
}

impl BroadcastRatio {
    pub fn value(&self) -> Option<f64> {
        match self {
            BroadcastRatio::NoTraffic => None,
            BroadcastRatio::Measured { ratio, .. } => Some(*ratio),
        }
    }

    pub fn exceeds_rule(&self) -> bool {
        matches!(self, BroadcastRatio::Measured { exceeds_rule: true, .. })
    }
}

pub fn broadcast_ratio(broadcast_pkts: u64, total_pkts: u64) -> BroadcastRatio {
    if total_pkts == 0 {
        return BroadcastRatio::NoTraffic;
    }
    let ratio = (broadcast_pkts as f64 / total_pkts as f64).min(1.0);
    BroadcastRatio::Measured {
        ratio,
        exceeds_rule: ratio > BROADCAST_RULE,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IpidLoop {
    pub detected: bool,
    /// Repeating IPIDs, ascending.
    pub offenders: Vec<u32>,
}

/// Finds IPIDs seen at least `k` times inside some window `[s, s + window_ms)`.
pub fn detect_ipid_loop(observations: &[(u32, f64)], k: usize, window_ms: f64) -> Result<IpidLoop, MetricsError> {
    if k < 2 || !(window_ms > 0.0) {
        return Err(MetricsError::InvalidLoopParams { k, window_ms });
    }
    let mut by_ipid: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for &(ipid, t) in observations {
        by_ipid.entry(ipid).or_default().push(t);
    }
    let mut offenders = Vec::new();
    for (ipid, mut times) in by_ipid {
        if times.len() < k {
            continue;
        }
        times.sort_by(f64::total_cmp);
        if times.windows(k).any(|w| w[k - 1] - w[0] < window_ms) {
            offenders.push(ipid);
        }
    }
    Ok(IpidLoop {
        detected: !offenders.is_empty(),
        offenders,
    })
}

/// Channel-wide counters for one sampling tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    /// Start of the tick, ms.
    pub tick: f64,
    /// Tick length, ms.
    pub interval_ms: f64,
    pub broadcast_pkts: u64,
    pub total_pkts: u64,
    pub broadcast_bytes: u64,
    pub total_bytes: u64,
    pub observed_ipg: f64,
    pub link_rate: u64,
}

impl ChannelStats {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.broadcast_pkts > self.total_pkts {
            return Err(MetricsError::InvalidStats("broadcast_pkts exceeds total_pkts"));
        }
        if self.broadcast_bytes > self.total_bytes {
            return Err(MetricsError::InvalidStats("broadcast_bytes exceeds total_bytes"));
        }
        if self.link_rate == 0 {
            return Err(MetricsError::ZeroRate);
        }
        if !(self.interval_ms > 0.0) {
            return Err(MetricsError::NonPositiveInterval(self.interval_ms));
        }
        Ok(())
    }

    /// Bits on the wire including one minimum gap per frame.
    pub fn wire_bits(&self) -> f64 {
        (self.total_bytes * 8 + self.total_pkts * MIN_IPG_BITS) as f64
    }

    pub fn capacity_bits(&self) -> f64 {
        self.link_rate as f64 * self.interval_ms / 1000.0
    }

    pub fn utilization(&self) -> Result<Utilization, MetricsError> {
        utilization(self.wire_bits(), self.capacity_bits())
    }

    pub fn broadcast_ratio(&self) -> BroadcastRatio {
        broadcast_ratio(self.broadcast_pkts, self.total_pkts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Idle,
    Normal,
    Busy,
    Storm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StormStage {
    Initial,
    Buildup,
    Final,
}

macro_rules! text_enum {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    other => Err(format!("unknown {}: {other:?}", stringify!($ty))),
                }
            }
        }
    };
}

text_enum!(Verdict { Idle => "idle", Normal => "normal", Busy => "busy", Storm => "storm" });
text_enum!(StormStage { Initial => "initial", Buildup => "buildup", Final => "final" });

/// Classification thresholds. Comparisons are strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub idle: f64,
    pub storm_utilization: f64,
    pub broadcast_rule: f64,
    pub ipg_shrink_factor: f64,
    pub ipid_k: usize,
    pub ipid_window_ms: f64,
    pub buildup_from: f64,
    pub final_from: f64,
    /// Ticks kept for the broadcast-ratio trend.
    pub trend_ticks: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            idle: 0.10,
            storm_utilization: 0.60,
            broadcast_rule: BROADCAST_RULE,
            ipg_shrink_factor: 0.5,
            ipid_k: 3,
            ipid_window_ms: 100.0,
            buildup_from: 0.40,
            final_from: 0.90,
            trend_ticks: 10,
        }
    }
}

impl Thresholds {
    pub fn stage_for(&self, utilization: f64) -> StormStage {
        if utilization >= self.final_from {
            StormStage::Final
        } else if utilization >= self.buildup_from {
            StormStage::Buildup
        } else {
            StormStage::Initial
        }
    }
}

/// Recent observations feeding the trend and IPID checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    ratios: VecDeque<f64>,
    ipids: VecDeque<(u32, f64)>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    /// Mean broadcast ratio over the retained ticks.
    pub fn rolling_ratio(&self) -> Option<f64> {
        if self.ratios.is_empty() {
            None
        } else {
            Some(self.ratios.iter().sum::<f64>() / self.ratios.len() as f64)
        }
    }

    pub fn ipids(&self) -> impl Iterator<Item = &(u32, f64)> {
        self.ipids.iter()
    }

    pub fn push_ratio(&mut self, ratio: f64, keep: usize) {
        self.ratios.push_back(ratio);
        while self.ratios.len() > keep {
            self.ratios.pop_front();
        }
    }

    /// Adds IPID sightings at time `now` and forgets those older than the window.
    pub fn observe_ipids(&mut self, sightings: impl IntoIterator<Item = (u32, f64)>, now: f64, window_ms: f64) {
        self.ipids.extend(sightings);
        while self.ipids.front().is_some_and(|&(_, t)| now - t >= window_ms) {
            self.ipids.pop_front();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StormClassification {
    pub utilization: f64,
    pub broadcast_ratio: f64,
    pub rising: bool,
    pub ipg_shrunk: bool,
    pub ipid_loop: bool,
    pub verdict: Verdict,
    /// Storm stage, present only for a storm verdict.
    pub stage: Option<StormStage>,
}

/// Combines the channel metrics into a verdict.
///
/// `history` holds the ratios of earlier ticks and the IPID sightings up to
/// and including this tick.
pub fn classify(stats: &ChannelStats, history: &History, thresholds: &Thresholds) -> StormClassification {
    let utilization = stats.utilization().map(|u| u.fraction).unwrap_or(0.0);
    let ratio = stats.broadcast_ratio().value().unwrap_or(0.0);
    let rising = history.rolling_ratio().is_some_and(|mean| ratio > mean);
    let ipg_shrunk = ipg_shrinkage(stats.observed_ipg, stats.link_rate, thresholds.ipg_shrink_factor).unwrap_or(false);
    let sightings: Vec<(u32, f64)> = history.ipids().copied().collect();
    let ipid_loop = detect_ipid_loop(&sightings, thresholds.ipid_k, thresholds.ipid_window_ms)
        .map(|l| l.detected)
        .unwrap_or(false);
    let over_rule = ratio > thresholds.broadcast_rule;

    let verdict = if utilization > thresholds.storm_utilization || (over_rule && rising) || ipid_loop {
        Verdict::Storm
    } else if utilization < thresholds.idle {
        Verdict::Idle
    } else if over_rule || ipg_shrunk {
        Verdict::Busy
    } else {
        Verdict::Normal
    };
    StormClassification {
        utilization,
        broadcast_ratio: ratio,
        rising,
        ipg_shrunk,
        ipid_loop,
        verdict,
        stage: (verdict == Verdict::Storm).then(|| thresholds.stage_for(utilization)),
    }
}

/// Stateful wrapper that keeps [`History`] in step with [`classify`].
#[derive(Debug, Clone, Default)]
pub struct Classifier {
    pub thresholds: Thresholds,
    history: History,
}

impl Classifier {
    pub fn new(thresholds: Thresholds) -> Self {
        Self {
            thresholds,
            history: History::new(),
        }
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn step(&mut self, stats: &ChannelStats, ipids: impl IntoIterator<Item = (u32, f64)>) -> StormClassification {
        self.history
            .observe_ipids(ipids, stats.tick, self.thresholds.ipid_window_ms);
        let out = classify(stats, &self.history, &self.thresholds);
        if let Some(r) = stats.broadcast_ratio().value() {
            self.history.push_ratio(r, self.thresholds.trend_ticks);
        }
        out
    }
}
