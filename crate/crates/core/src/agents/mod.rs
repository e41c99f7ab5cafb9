//! Per-node static agents: channel sampling, PTR comparison against a
//! calibrated reference, and the storm handler that suppresses and tickets.

mod config;
pub mod offline;
mod reference;
mod ticket;

pub use config::{AgentConfig, Detectors, ReferenceSource, SuppressionPolicy, ThresholdDb};
pub use reference::{burst_rises, deviation, resample, Reference};
pub use ticket::{read_jsonl, write_jsonl, TicketLog, Trigger, TriggerCause, TroubleTicket};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{fit_model, validate_trace, FitResult, ModelError, PtrArray, TracePoint};
use crate::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum AgentError {
    #[error("sample at t={t} ms arrived before calibration")]
    NotCalibrated { t: f64 },
    #[error("sample at t={t} ms is not after the previous sample at t={last} ms")]
    OutOfOrder { t: f64, last: f64 },
    #[error("calibration failed: {0}")]
    Calibration(#[from] ModelError),
    #[error("calibration trace contains no broadcast burst")]
    NoBurst,
    #[error("invalid agent config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMode {
    Calibrating,
    Armed,
    Suppressing,
}

/// Outcome of [`AgentState::calibrate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub reference: Reference,
    /// Growth-model fit of the first normal burst. Absent when the rise is
    /// too short to fit and the reference does not need it.
    pub fit: Option<FitResult>,
    pub thresholds: ThresholdDb,
}

/// What the communication model recorded for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficSample {
    pub t: f64,
    pub count: f64,
    /// Index from the current burst anchor, if a burst is being tracked.
    pub j: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PtrDecision {
    Normal,
    Deviating,
    TriggerStorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtrComparison {
    pub t: f64,
    pub j: usize,
    /// Past the end of the reference, measured against its final value.
    pub deviation: f64,
    pub decision: PtrDecision,
    /// Set with `TriggerStorm`.
    pub trigger: Option<Trigger>,
}

/// What the storm handler did with a trigger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "action")]
pub enum StormAction {
    Suppress {
        node: NodeId,
        until: f64,
        policy: SuppressionPolicy,
        ticket_id: u64,
    },
    /// Already suppressing: the breach is noted, no ticket.
    Coalesced { node: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconnectReason {
    Operator,
    Auto,
}

/// Index of the largest emitter; ties go to the lowest id.
pub fn attribute_origin(emissions: &[u64]) -> NodeId {
    let mut best = 0;
    for (i, &e) in emissions.iter().enumerate() {
        if e > emissions[best] {
            best = i;
        }
    }
    best as NodeId
}

/// Agent embedded at one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    node: NodeId,
    config: AgentConfig,
    mode: AgentMode,
    reference: Option<Reference>,
    thresholds: Option<ThresholdDb>,
    compare: Vec<f64>,
    burst_anchor: Option<f64>,
    last_t: Option<f64>,
    last_count: Option<f64>,
    pending: Option<(TrafficSample, Option<f64>)>,
    run: usize,
    overrun_fired: bool,
    /// End of the current one-second handling window.
    window_until: Option<f64>,
    last_breach: Option<f64>,
    open_tickets: Vec<u64>,
}

impl AgentState {
    pub fn new(node: NodeId, config: AgentConfig) -> Result<Self, AgentError> {
        config.validate()?;
        Ok(Self {
            node,
            config,
            mode: AgentMode::Calibrating,
            reference: None,
            thresholds: None,
            compare: Vec::new(),
            burst_anchor: None,
            last_t: None,
            last_count: None,
            pending: None,
            run: 0,
            overrun_fired: false,
            window_until: None,
            last_breach: None,
            open_tickets: Vec::new(),
        })
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    pub fn thresholds(&self) -> Option<&ThresholdDb> {
        self.thresholds.as_ref()
    }

    pub fn compare(&self) -> &[f64] {
        &self.compare
    }

    pub fn burst_anchor(&self) -> Option<f64> {
        self.burst_anchor
    }

    /// End of the running suppression, if the policy suppresses at all.
    pub fn suppress_until(&self) -> Option<f64> {
        self.window_until
            .filter(|_| self.config.policy != SuppressionPolicy::None)
    }

    /// True while tickets for this node are open.
    pub fn is_blocked(&self) -> bool {
        !self.open_tickets.is_empty()
    }

    pub fn mode_at(&self, t: f64) -> AgentMode {
        if self.mode == AgentMode::Calibrating {
            AgentMode::Calibrating
        } else if self.is_suppressing(t) {
            AgentMode::Suppressing
        } else {
            AgentMode::Armed
        }
    }

    pub fn is_suppressing(&self, t: f64) -> bool {
        self.suppress_until().is_some_and(|until| t < until)
    }

    fn in_window(&self, t: f64) -> bool {
        self.window_until.is_some_and(|until| t < until)
    }

    /// Builds the reference from a normal trace and arms the agent.
    pub fn calibrate(&mut self, normal_trace: &[TracePoint]) -> Result<Calibration, AgentError> {
        validate_trace(normal_trace)?;
        let step = self.config.sample_period_ms;
        let grid = resample(normal_trace, step);
        let values: Vec<f64> = grid.iter().map(|p| p.count).collect();
        let rises: Vec<Vec<f64>> = burst_rises(&values).into_iter().map(|r| values[r].to_vec()).collect();
        let Some(first) = rises.first() else {
            return Err(AgentError::NoBurst);
        };
        let first_pts: Vec<TracePoint> = first
            .iter()
            .enumerate()
            .map(|(j, &c)| TracePoint::new(j as f64 * step, c))
            .collect();
        let pe = rises.iter().flat_map(|r| r.iter().copied()).fold(0.0, f64::max);

        let (reference, fit) = match self.config.reference {
            ReferenceSource::Model => {
                let fit = fit_model(&first_pts)?;
                // Clamped at the observed peak; the fitted p_end is only a shape parameter.
                let values = (0..first.len())
                    .map(|j| fit.params.eval(j as f64 * step).map(|v| v.min(pe)))
                    .collect::<Result<Vec<_>, _>>()?;
                let nominal = PtrArray::new(0.0, step, values)?;
                (Reference::from_array(nominal), Some(fit))
            }
            ReferenceSource::Empirical => {
                let fit = match fit_model(&first_pts) {
                    Ok(fit) => Some(fit),
                    Err(e) => {
                        log::warn!("node {}: growth fit skipped: {e}", self.node);
                        None
                    }
                };
                let reference = Reference::from_rises(&rises, step, pe).ok_or(AgentError::NoBurst)?;
                (reference, fit)
            }
        };
        let thresholds = ThresholdDb {
            pe,
            ipg_floor_ns: None,
            utilization_max: self.config.utilization_max,
            nbw_permissible: None,
            byte_threshold_mb: self.config.byte_threshold_mb,
        };
        self.install(Some(reference.clone()), thresholds);
        Ok(Calibration {
            reference,
            fit,
            thresholds,
        })
    }

    /// Arms with the given thresholds and no PTR reference; only the metric
    /// checks can trigger.
    pub fn arm_without_reference(&mut self, thresholds: ThresholdDb) {
        self.install(None, thresholds);
    }

    /// Arms from a calibration computed elsewhere, e.g. by another agent
    /// sharing the same channel view.
    pub fn arm_with(&mut self, calibration: &Calibration) {
        self.install(Some(calibration.reference.clone()), calibration.thresholds);
    }

    /// Adds the metric-side thresholds learned outside the PTR calibration.
    pub fn update_thresholds(&mut self, f: impl FnOnce(&mut ThresholdDb)) {
        if let Some(db) = self.thresholds.as_mut() {
            f(db);
        }
    }

    fn install(&mut self, reference: Option<Reference>, thresholds: ThresholdDb) {
        self.reference = reference;
        self.thresholds = Some(thresholds);
        self.mode = AgentMode::Armed;
        self.compare.clear();
        self.burst_anchor = None;
        self.run = 0;
        self.overrun_fired = false;
        self.pending = None;
    }

    /// Records one broadcast count. A zero count anchors a new burst.
    pub fn sample_channel(&mut self, t: f64, broadcast_count: f64) -> Result<TrafficSample, AgentError> {
        if self.mode == AgentMode::Calibrating {
            return Err(AgentError::NotCalibrated { t });
        }
        if let Some(last) = self.last_t {
            if !(t > last) {
                return Err(AgentError::OutOfOrder { t, last });
            }
        }
        self.last_t = Some(t);
        let j = if broadcast_count <= 0.0 {
            self.compare.clear();
            self.compare.push(0.0);
            self.burst_anchor = Some(t);
            self.run = 0;
            self.overrun_fired = false;
            Some(0)
        } else if self.burst_anchor.is_some() {
            self.compare.push(broadcast_count);
            Some(self.compare.len() - 1)
        } else {
            None
        };
        if let Some(len) = self.reference.as_ref().map(Reference::len) {
            // Only the part that lines up with the reference is kept.
            self.compare.truncate(len);
        }
        let sample = TrafficSample {
            t,
            count: broadcast_count,
            j,
        };
        self.pending = Some((sample, self.last_count.replace(broadcast_count)));
        Ok(sample)
    }

    /// Compares the latest sample with the reference. `emissions` holds the
    /// broadcast frames each node emitted during the sample.
    pub fn compare_ptr(&mut self, emissions: &[u64]) -> Option<PtrComparison> {
        let (sample, previous) = self.pending.take()?;
        let j = sample.j?;
        let reference = self.reference.as_ref()?;
        let floor = 0.01 * self.thresholds.map_or(0.0, |db| db.pe);
        let threshold = self.config.deviation_threshold;

        let (deviation, fire, expected) = if j < reference.len() {
            let d = reference.deviation(j, sample.count, floor);
            if d > threshold {
                self.run += 1;
            } else {
                self.run = 0;
            }
            let expected = if sample.count > reference.upper[j] {
                reference.upper[j]
            } else {
                reference.lower[j]
            };
            (d, self.run >= self.config.consecutive_required, expected)
        } else {
            // Past the reference: only growth beyond its final value counts.
            let last = reference.upper[reference.len() - 1];
            let d = deviation(sample.count, 0.0, last, floor);
            let growing = previous.is_some_and(|p| sample.count > p);
            let fire = growing && d > threshold && !self.overrun_fired;
            if fire {
                self.overrun_fired = true;
            }
            (d, fire, last)
        };

        let decision = if fire {
            self.run = 0;
            PtrDecision::TriggerStorm
        } else if deviation > threshold {
            PtrDecision::Deviating
        } else {
            PtrDecision::Normal
        };
        let trigger = fire.then(|| Trigger {
            t: sample.t,
            origin: attribute_origin(emissions),
            cause: TriggerCause::PtrDeviation,
            observed: sample.count,
            threshold: expected,
        });
        Some(PtrComparison {
            t: sample.t,
            j,
            deviation,
            decision,
            trigger,
        })
    }

    /// Storm handler: suppress for the rest of the current window and ticket,
    /// or coalesce when a window is already running.
    pub fn handle_storm(&mut self, trigger: &Trigger, log: &mut TicketLog) -> StormAction {
        self.last_breach = Some(self.last_breach.map_or(trigger.t, |b| b.max(trigger.t)));
        if self.in_window(trigger.t) {
            return StormAction::Coalesced { node: self.node };
        }
        let until = self.config.window_end(trigger.t);
        let ticket_id = log.issue(trigger);
        self.open_tickets.push(ticket_id);
        self.window_until = Some(until);
        log::info!(
            "node {} storm ({}) at t={} ms, ticket {ticket_id}, suppress until {until} ms",
            self.node,
            trigger.cause,
            trigger.t
        );
        StormAction::Suppress {
            node: self.node,
            until,
            policy: self.config.policy,
            ticket_id,
        }
    }

    /// Auto-reconnects once `reconnect_windows` full windows have passed with
    /// no breach. Returns true if the node was reconnected.
    pub fn refresh(&mut self, t: f64, log: &mut TicketLog) -> bool {
        let Some(breach) = self.last_breach else {
            return false;
        };
        if !self.is_blocked() {
            return false;
        }
        let due =
            self.config.window_end(breach) + self.config.reconnect_windows as f64 * self.config.suppression_window_ms;
        if t >= due {
            self.reconnect(t, ReconnectReason::Auto, log)
        } else {
            false
        }
    }

    /// Unblocks the node and closes its tickets. A no-op for an unblocked node.
    pub fn reconnect(&mut self, t: f64, reason: ReconnectReason, log: &mut TicketLog) -> bool {
        if !self.is_blocked() && !self.in_window(t) {
            log::warn!("node {} is not blocked; reconnect ignored", self.node);
            return false;
        }
        for id in self.open_tickets.drain(..) {
            log.close(id, t);
        }
        self.window_until = None;
        self.last_breach = None;
        log::info!("node {} reconnected at t={t} ms ({reason:?})", self.node);
        true
    }
}
