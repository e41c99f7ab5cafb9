use serde::{Deserialize, Serialize};

use super::AgentError;

/// How a blocked port is filtered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuppressionPolicy {
    /// Software suppression: all traffic from the port is dropped.
    #[default]
    PacketBased,
    /// Hardware suppression: only broadcast frames from the port are dropped.
    BandwidthBased,
    /// Detect and ticket only.
    None,
}

/// Where the reference PTR array comes from at calibration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    /// The measured normal bursts, as an envelope over all of them.
    #[default]
    Empirical,
    /// The fitted growth model sampled over the first burst's rise.
    Model,
}

/// Which checks may raise a trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Detectors {
    pub ptr: bool,
    pub utilization: bool,
    pub nbw: bool,
    pub ipid: bool,
    pub volume: bool,
}

impl Default for Detectors {
    fn default() -> Self {
        Self {
            ptr: true,
            utilization: true,
            nbw: true,
            ipid: true,
            volume: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub sample_period_ms: f64,
    pub deviation_threshold: f64,
    pub consecutive_required: usize,
    pub suppression_window_ms: f64,
    /// Clean suppression windows required before an automatic reconnect.
    pub reconnect_windows: u32,
    pub policy: SuppressionPolicy,
    pub reference: ReferenceSource,
    pub detectors: Detectors,
    pub utilization_max: f64,
    pub nbw_factor: f64,
    pub nbw_window_ticks: usize,
    pub ipid_k: usize,
    pub ipid_window_ms: f64,
    /// Per-interval broadcast volume ceiling, megabytes (10^6 bytes).
    pub byte_threshold_mb: Option<f64>,
    /// Burst periods replayed for calibration inside the simulator.
    pub calibration_periods: u32,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            sample_period_ms: 1.0,
            deviation_threshold: 0.05,
            consecutive_required: 3,
            suppression_window_ms: 1000.0,
            reconnect_windows: 2,
            policy: SuppressionPolicy::PacketBased,
            reference: ReferenceSource::Empirical,
            detectors: Detectors::default(),
            utilization_max: 0.60,
            nbw_factor: 2.0,
            nbw_window_ticks: 10,
            ipid_k: 3,
            ipid_window_ms: 100.0,
            byte_threshold_mb: None,
            calibration_periods: 4,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |field: &'static str| Err(AgentError::InvalidConfig(field));
        if !(self.sample_period_ms > 0.0) {
            return bad("sample_period_ms must be positive");
        }
        if !(self.deviation_threshold > 0.0) {
            return bad("deviation_threshold must be positive");
        }
        if self.consecutive_required == 0 {
            return bad("consecutive_required must be at least 1");
        }
        if !(self.suppression_window_ms > 0.0) {
            return bad("suppression_window_ms must be positive");
        }
        if self.nbw_window_ticks == 0 {
            return bad("nbw_window_ticks must be at least 1");
        }
        if self.ipid_k < 2 || !(self.ipid_window_ms > 0.0) {
            return bad("ipid_k must be >= 2 and ipid_window_ms positive");
        }
        if self.byte_threshold_mb.is_some_and(|mb| !(mb > 0.0)) {
            return bad("byte_threshold_mb must be positive");
        }
        if self.calibration_periods == 0 {
            return bad("calibration_periods must be at least 1");
        }
        Ok(())
    }

    /// End of the suppression window containing `t`.
    pub fn window_end(&self, t: f64) -> f64 {
        let w = self.suppression_window_ms;
        ((t / w).floor() + 1.0) * w
    }
}

/// Safe operating values gathered during calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDb {
    /// Safe PTR threshold: the highest normal burst peak.
    pub pe: f64,
    pub ipg_floor_ns: Option<f64>,
    pub utilization_max: f64,
    /// Normal per-node broadcast bytes per N_BW window.
    pub nbw_permissible: Option<f64>,
    pub byte_threshold_mb: Option<f64>,
}
