use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FrameLedger, SimTrace};
use crate::metrics::{StormStage, Verdict};

/// Consecutive ticks sharing a verdict and stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpan {
    pub from_ms: f64,
    pub to_ms: f64,
    pub verdict: Verdict,
    pub stage: Option<StormStage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub scenario: String,
    pub seed: u64,
    pub ticks: u64,
    pub saturation_cap: u64,
    pub agents_enabled: bool,
    /// Largest per-tick channel broadcast volume, MB.
    pub max_tnbp_mb: f64,
    pub max_tnbp_t_ms: f64,
    pub max_utilization: f64,
    pub threshold_mb: Option<f64>,
    /// Ticks from the first ticket on whose broadcast volume exceeds the threshold.
    pub violations_after_engage: Option<u64>,
    pub first_ticket_t_ms: Option<f64>,
    pub tickets_total: usize,
    pub tickets_per_node: BTreeMap<String, usize>,
    pub tickets_per_cause: BTreeMap<String, usize>,
    pub stage_timeline: Vec<StageSpan>,
    pub ledger: FrameLedger,
}

impl SimSummary {
    pub fn from_trace(trace: &SimTrace) -> Self {
        let mut max_tnbp = (0.0, 0.0);
        let mut max_util: f64 = 0.0;
        let mut ledger = FrameLedger::default();
        let mut timeline: Vec<StageSpan> = Vec::new();
        for r in &trace.ticks {
            let mb = r.channel.broadcast_bytes as f64 / 1e6;
            if mb > max_tnbp.0 {
                max_tnbp = (mb, r.t);
            }
            max_util = max_util.max(r.classification.utilization);
            ledger.add(&r.ledger);
            let end = r.t + trace.scenario.tick_ms;
            let (verdict, stage) = (r.classification.verdict, r.classification.stage);
            match timeline.last_mut() {
                Some(span) if span.verdict == verdict && span.stage == stage => span.to_ms = end,
                _ => timeline.push(StageSpan {
                    from_ms: r.t,
                    to_ms: end,
                    verdict,
                    stage,
                }),
            }
        }
        let threshold_mb = trace
            .scenario
            .agent_config
            .as_ref()
            .and_then(|c| c.byte_threshold_mb)
            .filter(|_| trace.agents_enabled);
        let first = trace.first_ticket_tick();
        let violations_after_engage = threshold_mb.zip(first).map(|(mb, k0)| {
            let limit = (mb * 1e6).round() as u64;
            trace.ticks[k0 as usize..]
                .iter()
                .filter(|r| r.channel.broadcast_bytes > limit)
                .count() as u64
        });
        let mut per_node = BTreeMap::new();
        let mut per_cause = BTreeMap::new();
        for t in &trace.tickets {
            *per_node.entry(t.node.to_string()).or_insert(0) += 1;
            *per_cause.entry(t.cause.to_string()).or_insert(0) += 1;
        }
        Self {
            scenario: trace.scenario.name.clone(),
            seed: trace.scenario.seed,
            ticks: trace.ticks.len() as u64,
            saturation_cap: trace.saturation_cap,
            agents_enabled: trace.agents_enabled,
            max_tnbp_mb: max_tnbp.0,
            max_tnbp_t_ms: max_tnbp.1,
            max_utilization: max_util,
            threshold_mb,
            violations_after_engage,
            first_ticket_t_ms: trace.tickets.first().map(|t| t.t),
            tickets_total: trace.tickets.len(),
            tickets_per_node: per_node,
            tickets_per_cause: per_cause,
            stage_timeline: timeline,
            ledger,
        }
    }
}
