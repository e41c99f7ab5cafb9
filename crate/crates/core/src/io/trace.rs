use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{field, reader, IoError};
use crate::metrics::{StormStage, Verdict};
use crate::sim::SimTrace;
use crate::NodeId;

pub const TRACE_HEADER: &str =
    "t_ms,node_id,bcast_pkts,total_pkts,bcast_bytes,total_bytes,ipg_ns,utilization,verdict,stage";

/// One trace CSV row; `node` is `None` for the channel-wide row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t_ms: f64,
    pub node: Option<NodeId>,
    pub bcast_pkts: u64,
    pub total_pkts: u64,
    pub bcast_bytes: u64,
    pub total_bytes: u64,
    pub ipg_ns: f64,
    pub utilization: f64,
    pub verdict: Option<Verdict>,
    pub stage: Option<StormStage>,
}

/// Channel row then one row per node, for every tick.
pub fn trace_rows(trace: &SimTrace) -> Vec<TraceRow> {
    let capacity = |r: &crate::sim::TickRecord| r.channel.capacity_bits();
    let mut rows = Vec::with_capacity(trace.ticks.len() * (trace.scenario.node_count as usize + 1));
    for r in &trace.ticks {
        rows.push(TraceRow {
            t_ms: r.t,
            node: None,
            bcast_pkts: r.channel.broadcast_pkts,
            total_pkts: r.channel.total_pkts,
            bcast_bytes: r.channel.broadcast_bytes,
            total_bytes: r.channel.total_bytes,
            ipg_ns: r.channel.observed_ipg,
            utilization: r.classification.utilization,
            verdict: Some(r.classification.verdict),
            stage: r.classification.stage,
        });
        for n in &r.nodes {
            let bits = (n.total_bytes * 8 + n.total_pkts * crate::metrics::MIN_IPG_BITS) as f64;
            rows.push(TraceRow {
                t_ms: r.t,
                node: Some(n.node),
                bcast_pkts: n.broadcast_pkts,
                total_pkts: n.total_pkts,
                bcast_bytes: n.broadcast_bytes,
                total_bytes: n.total_bytes,
                ipg_ns: r.channel.observed_ipg,
                utilization: bits / capacity(r),
                verdict: None,
                stage: None,
            });
        }
    }
    rows
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn write_trace<W: Write>(mut out: W, rows: &[TraceRow]) -> Result<(), IoError> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t_ms,
            r.node.map_or_else(|| "*".to_string(), |n| n.to_string()),
            r.bcast_pkts,
            r.total_pkts,
            r.bcast_bytes,
            r.total_bytes,
            r.ipg_ns,
            r.utilization,
            opt(r.verdict),
            opt(r.stage),
        )?;
    }
    Ok(())
}

fn opt_field<T: std::str::FromStr<Err = String>>(
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<Option<T>, IoError> {
    let raw: String = field(record, idx, name)?;
    if raw == "-" {
        return Ok(None);
    }
    let line = record.position().map_or(0, |p| p.line());
    raw.parse().map(Some).map_err(|e| IoError::parse(line, e))
}

/// Reads a trace CSV; the header must match exactly.
pub fn read_trace(text: &str) -> Result<Vec<TraceRow>, IoError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(IoError::from_csv)?;
    let got = headers.iter().collect::<Vec<_>>().join(",");
    if got != TRACE_HEADER {
        return Err(IoError::Header {
            expected: TRACE_HEADER.to_string(),
            got,
        });
    }
    let mut rows = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for record in rdr.records() {
        let r = record.map_err(IoError::from_csv)?;
        let line = r.position().map_or(0, |p| p.line());
        let node_raw: String = field(&r, 1, "node_id")?;
        let node = if node_raw == "*" {
            None
        } else {
            Some(
                node_raw
                    .parse()
                    .map_err(|e| IoError::parse(line, format!("bad node_id {node_raw:?}: {e}")))?,
            )
        };
        let row = TraceRow {
            t_ms: field(&r, 0, "t_ms")?,
            node,
            bcast_pkts: field(&r, 2, "bcast_pkts")?,
            total_pkts: field(&r, 3, "total_pkts")?,
            bcast_bytes: field(&r, 4, "bcast_bytes")?,
            total_bytes: field(&r, 5, "total_bytes")?,
            ipg_ns: field(&r, 6, "ipg_ns")?,
            utilization: field(&r, 7, "utilization")?,
            verdict: opt_field(&r, 8, "verdict")?,
            stage: opt_field(&r, 9, "stage")?,
        };
        if row.t_ms < last_t {
            return Err(IoError::parse(line, "rows are not time ordered"));
        }
        last_t = row.t_ms;
        rows.push(row);
    }
    Ok(rows)
}
