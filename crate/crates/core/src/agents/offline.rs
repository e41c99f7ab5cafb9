//! Replay of a recorded PTR trace through a single agent.

use serde::Serialize;

use super::{resample, AgentConfig, AgentError, AgentState, Calibration, PtrComparison, TicketLog, TroubleTicket};
use crate::model::{validate_trace, ModelError, TracePoint};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfflineReport {
    /// Sample period both traces were resampled to, ms.
    pub step: f64,
    pub calibration: Calibration,
    pub comparisons: Vec<PtrComparison>,
    pub tickets: Vec<TroubleTicket>,
}

impl OfflineReport {
    pub fn storm_found(&self) -> bool {
        !self.tickets.is_empty()
    }

    /// First sample at which a trigger fired.
    pub fn first_trigger(&self) -> Option<&PtrComparison> {
        self.comparisons.iter().find(|c| c.trigger.is_some())
    }
}

/// Smallest spacing between consecutive sample times, rounded to the
/// nanosecond so that `0.3 - 0.2` reads as `0.1`.
pub fn min_spacing(trace: &[TracePoint]) -> Option<f64> {
    trace
        .windows(2)
        .map(|w| ((w[1].t - w[0].t) * 1e6).round() / 1e6)
        .filter(|&d| d > 0.0)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
}

/// Calibrates on `reference`, then replays `trace` on the reference's finest
/// sample spacing. The single agent stands for node 0.
pub fn detect(
    trace: &[TracePoint],
    reference: &[TracePoint],
    config: &AgentConfig,
) -> Result<OfflineReport, AgentError> {
    validate_trace(trace)?;
    validate_trace(reference)?;
    let step = min_spacing(reference).ok_or(ModelError::InsufficientPoints {
        needed: 2,
        got: reference.len(),
    })?;
    let config = AgentConfig {
        sample_period_ms: step,
        ..config.clone()
    };
    let mut agent = AgentState::new(0, config)?;
    let calibration = agent.calibrate(reference)?;
    let mut log = TicketLog::new();
    let mut comparisons = Vec::new();
    for p in resample(trace, step) {
        agent.refresh(p.t, &mut log);
        agent.sample_channel(p.t, p.count)?;
        if let Some(cmp) = agent.compare_ptr(&[1]) {
            if let Some(trigger) = &cmp.trigger {
                agent.handle_storm(trigger, &mut log);
            }
            comparisons.push(cmp);
        }
    }
    Ok(OfflineReport {
        step,
        calibration,
        comparisons,
        tickets: log.into_tickets(),
    })
}
