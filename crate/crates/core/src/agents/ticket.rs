use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::NodeId;

/// What tripped the storm handler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerCause {
    PtrDeviation,
    UtilizationExceeded,
    NbwExceeded,
    IpidLoop,
    BroadcastVolumeExceeded,
}

impl fmt::Display for TriggerCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriggerCause::PtrDeviation => "ptr_deviation",
            TriggerCause::UtilizationExceeded => "utilization_exceeded",
            TriggerCause::NbwExceeded => "nbw_exceeded",
            TriggerCause::IpidLoop => "ipid_loop",
            TriggerCause::BroadcastVolumeExceeded => "broadcast_volume_exceeded",
        })
    }
}

/// A storm notification raised by the control model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trigger {
    pub t: f64,
    pub origin: NodeId,
    pub cause: TriggerCause,
    pub observed: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TroubleTicket {
    pub ticket_id: u64,
    pub node: NodeId,
    pub t: f64,
    pub cause: TriggerCause,
    pub observed: f64,
    pub threshold: f64,
    /// Time the node was reconnected, if it has been.
    pub closed_t: Option<f64>,
}

/// Issued tickets in id order. Ids start at 1 and increase strictly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TicketLog {
    tickets: Vec<TroubleTicket>,
}

impl TicketLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn issue(&mut self, trigger: &Trigger) -> u64 {
        let ticket_id = self.tickets.len() as u64 + 1;
        self.tickets.push(TroubleTicket {
            ticket_id,
            node: trigger.origin,
            t: trigger.t,
            cause: trigger.cause,
            observed: trigger.observed,
            threshold: trigger.threshold,
            closed_t: None,
        });
        ticket_id
    }

    pub fn close(&mut self, ticket_id: u64, t: f64) {
        if let Some(ticket) = ticket_id.checked_sub(1).and_then(|i| self.tickets.get_mut(i as usize)) {
            ticket.closed_t.get_or_insert(t);
        }
    }

    pub fn tickets(&self) -> &[TroubleTicket] {
        &self.tickets
    }

    pub fn len(&self) -> usize {
        self.tickets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickets.is_empty()
    }

    pub fn into_tickets(self) -> Vec<TroubleTicket> {
        self.tickets
    }
}

/// Writes one JSON record per line.
pub fn write_jsonl<W: Write>(mut out: W, tickets: &[TroubleTicket]) -> io::Result<()> {
    for ticket in tickets {
        serde_json::to_writer(&mut out, ticket)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl(text: &str) -> Result<Vec<TroubleTicket>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
