use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{column, field, reader, IoError};
use crate::model::TracePoint;

/// A point with the threshold in force at that time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub t: f64,
    pub count: f64,
    pub threshold: f64,
}

/// Reads a `t_ms,count` CSV. Extra columns are ignored.
pub fn read_points(text: &str) -> Result<Vec<TracePoint>, IoError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(IoError::from_csv)?.clone();
    let (ti, ci) = (column(&headers, "t_ms")?, column(&headers, "count")?);
    rdr.records()
        .map(|r| {
            let r = r.map_err(IoError::from_csv)?;
            Ok(TracePoint::new(field(&r, ti, "t_ms")?, field(&r, ci, "count")?))
        })
        .collect()
}

pub fn read_threshold_points(text: &str) -> Result<Vec<ThresholdPoint>, IoError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(IoError::from_csv)?.clone();
    let ti = column(&headers, "t_ms")?;
    let ci = column(&headers, "count")?;
    let hi = column(&headers, "threshold")?;
    rdr.records()
        .map(|r| {
            let r = r.map_err(IoError::from_csv)?;
            Ok(ThresholdPoint {
                t: field(&r, ti, "t_ms")?,
                count: field(&r, ci, "count")?,
                threshold: field(&r, hi, "threshold")?,
            })
        })
        .collect()
}

pub fn write_points<W: Write>(mut out: W, points: &[TracePoint]) -> Result<(), IoError> {
    writeln!(out, "t_ms,count")?;
    for p in points {
        writeln!(out, "{},{}", p.t, p.count)?;
    }
    Ok(())
}

pub fn write_threshold_points<W: Write>(mut out: W, points: &[ThresholdPoint]) -> Result<(), IoError> {
    writeln!(out, "t_ms,count,threshold")?;
    for p in points {
        writeln!(out, "{},{},{}", p.t, p.count, p.threshold)?;
    }
    Ok(())
}
