use serde::{Deserialize, Serialize};

use super::{SimError, SUBSTEPS_PER_MS};
use crate::agents::{AgentConfig, SuppressionPolicy};
use crate::model::TracePoint;
use crate::NodeId;

pub const SCHEMA_VERSION: u32 = 1;

fn default_frame_size() -> u32 {
    512
}

fn default_tick() -> f64 {
    1.0
}

/// A broadcast domain and what happens on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    pub node_count: u32,
    /// Bits per second.
    pub link_rate: u64,
    #[serde(default = "default_frame_size")]
    pub frame_size: u32,
    #[serde(default = "default_tick")]
    pub tick_ms: f64,
    pub duration_ms: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub generator: Option<NormalBroadcastProfile>,
    #[serde(default)]
    pub injectors: Vec<Injector>,
    #[serde(default)]
    pub agent_config: Option<AgentConfig>,
    /// Overrides the policy in `agent_config`.
    #[serde(default)]
    pub suppression_policy: SuppressionPolicy,
}

/// Per-tick broadcast count shape of normal operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurstShape {
    /// The 0–3 ms hump of the bundled normal operation table.
    Table4,
    /// `(t_ms, count)` pairs, time ordered, starting at 0.
    Points(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitude {
    /// Shape values are frames per tick as written.
    Tabulated,
    /// Shape peak maps to this fraction of the saturation cap.
    CapFraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalBroadcastProfile {
    pub burst_period_ms: f64,
    pub burst_shape: BurstShape,
    pub jitter: f64,
    pub amplitude: Amplitude,
    /// Unicast frames per tick as a fraction of the saturation cap.
    pub unicast_fraction: f64,
    /// Stretches shape and period in time.
    pub time_scale: f64,
}

impl Default for NormalBroadcastProfile {
    fn default() -> Self {
        Self {
            burst_period_ms: 3.0,
            burst_shape: BurstShape::Table4,
            jitter: 0.05,
            amplitude: Amplitude::Tabulated,
            unicast_fraction: 0.0,
            time_scale: 1.0,
        }
    }
}

impl NormalBroadcastProfile {
    pub fn shape_points(&self) -> Vec<TracePoint> {
        match &self.burst_shape {
            BurstShape::Table4 => crate::datasets::normal_hump(),
            BurstShape::Points(p) => p.iter().map(|&(t, c)| TracePoint::new(t, c)).collect(),
        }
    }
}

fn default_fps() -> f64 {
    500.0
}

fn default_factor() -> u32 {
    2
}

fn default_true() -> bool {
    true
}

fn default_seed_frames() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InjectorKind {
    /// Jabbering NIC emitting broadcasts at a constant rate plus a linear ramp.
    FaultyNic {
        #[serde(default = "default_fps")]
        frames_per_second: f64,
        /// Rate increase, frames per second per second.
        #[serde(default)]
        ramp_fps_per_s: f64,
        /// Quiet time before emission starts, and again after each unblock.
        #[serde(default)]
        ramp_delay_ms: f64,
    },
    /// Switching loop: each pass through the loop multiplies the circulating frames.
    Loop {
        #[serde(default = "default_factor")]
        replication_factor: u32,
        #[serde(default = "default_true")]
        reuse_ipid: bool,
        #[serde(default = "default_seed_frames")]
        seed_frames: u32,
    },
    /// Spoofed broadcast echo requests that every other node answers.
    Smurf { spoof_rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injector {
    pub start_ms: f64,
    #[serde(default)]
    pub end_ms: Option<f64>,
    pub origin: NodeId,
    #[serde(flatten)]
    pub kind: InjectorKind,
}

/// Converts ms to whole substeps, rejecting times off the substep grid.
pub(crate) fn to_substeps(ms: f64, what: &'static str) -> Result<u64, SimError> {
    let raw = ms * SUBSTEPS_PER_MS as f64;
    let n = raw.round();
    if !ms.is_finite() || ms < 0.0 || (raw - n).abs() > 1e-6 {
        return Err(SimError::Invalid(what));
    }
    Ok(n as u64)
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn tick_substeps(&self) -> u64 {
        (self.tick_ms * SUBSTEPS_PER_MS as f64).round() as u64
    }

    pub fn tick_count(&self) -> u64 {
        let d = (self.duration_ms * SUBSTEPS_PER_MS as f64).round() as u64;
        d.div_ceil(self.tick_substeps())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what| Err(SimError::Invalid(what));
        if self.schema != SCHEMA_VERSION {
            return Err(SimError::Schema(self.schema));
        }
        if self.node_count < 2 {
            return bad("node_count must be at least 2");
        }
        if self.link_rate == 0 {
            return bad("link_rate must be positive");
        }
        if self.frame_size == 0 {
            return bad("frame_size must be positive");
        }
        if !(self.tick_ms > 0.0) || to_substeps(self.tick_ms, "tick_ms must be a positive multiple of 0.01 ms")? == 0 {
            return bad("tick_ms must be a positive multiple of 0.01 ms");
        }
        if !(self.duration_ms > 0.0) {
            return bad("duration_ms must be positive");
        }
        to_substeps(self.duration_ms, "duration_ms must be a multiple of 0.01 ms")?;
        if let Some(g) = &self.generator {
            if !(g.time_scale > 0.0) || !g.time_scale.is_finite() {
                return bad("time_scale must be positive");
            }
            if to_substeps(
                g.burst_period_ms * g.time_scale,
                "scaled burst period must be a multiple of 0.01 ms",
            )? == 0
            {
                return bad("burst_period_ms must be positive");
            }
            if !(0.0..1.0).contains(&g.jitter) {
                return bad("jitter must be in [0, 1)");
            }
            if !(0.0..=1.0).contains(&g.unicast_fraction) {
                return bad("unicast_fraction must be in [0, 1]");
            }
            if let Amplitude::CapFraction(f) = g.amplitude {
                if !(0.0..=1.0).contains(&f) {
                    return bad("cap fraction must be in [0, 1]");
                }
            }
            let shape = g.shape_points();
            if shape.len() < 2 || shape[0].t != 0.0 {
                return bad("burst shape needs at least two points starting at t=0");
            }
            crate::model::validate_trace(&shape)
                .map_err(|_| SimError::Invalid("burst shape must be time ordered with non-negative counts"))?;
            if g.burst_period_ms < shape[shape.len() - 1].t {
                return bad("burst_period_ms is shorter than the burst shape");
            }
        }
        for inj in &self.injectors {
            if inj.origin >= self.node_count {
                return bad("injector origin is not a node");
            }
            if !(inj.start_ms < self.duration_ms) {
                return bad("injector start_ms must be before duration_ms");
            }
            to_substeps(
                inj.start_ms,
                "injector start_ms must be a non-negative multiple of 0.01 ms",
            )?;
            if let Some(end) = inj.end_ms {
                if !(end > inj.start_ms) {
                    return bad("injector end_ms must be after start_ms");
                }
                to_substeps(end, "injector end_ms must be a multiple of 0.01 ms")?;
            }
            match inj.kind {
                InjectorKind::FaultyNic {
                    frames_per_second,
                    ramp_fps_per_s,
                    ramp_delay_ms,
                } => {
                    if !(frames_per_second >= 0.0 && ramp_fps_per_s >= 0.0) || frames_per_second + ramp_fps_per_s == 0.0
                    {
                        return bad("faulty NIC needs a positive rate or ramp");
                    }
                    to_substeps(
                        ramp_delay_ms,
                        "ramp_delay_ms must be a non-negative multiple of 0.01 ms",
                    )?;
                }
                InjectorKind::Loop {
                    replication_factor,
                    seed_frames,
                    ..
                } => {
                    if replication_factor < 1 || seed_frames < 1 {
                        return bad("loop needs replication_factor and seed_frames of at least 1");
                    }
                }
                InjectorKind::Smurf { spoof_rate } => {
                    if !(spoof_rate > 0.0) || !spoof_rate.is_finite() {
                        return bad("smurf spoof_rate must be positive");
                    }
                }
            }
        }
        if let Some(cfg) = &self.agent_config {
            cfg.validate().map_err(|e| SimError::Agent(e.to_string()))?;
            if (cfg.sample_period_ms - self.tick_ms).abs() > 1e-9 * self.tick_ms {
                return bad("agent sample_period_ms must equal tick_ms");
            }
        }
        Ok(())
    }
}
