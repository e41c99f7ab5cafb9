//! Reference PTR curves and the deviation measure used against them.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::model::{sample_count, PtrArray, TracePoint};

/// Resamples a time-ordered trace onto `t0, t0 + step, …` by linear
/// interpolation, reusing tabulated values where a grid time hits one.
pub fn resample(trace: &[TracePoint], step: f64) -> Vec<TracePoint> {
    let (Some(first), Some(last)) = (trace.first(), trace.last()) else {
        return Vec::new();
    };
    let n = sample_count(first.t, last.t, step);
    let snap = 1e-9 * step;
    let mut seg = 0;
    (0..n)
        .map(|k| {
            let t = first.t + k as f64 * step;
            while seg + 1 < trace.len() && trace[seg + 1].t <= t + snap {
                seg += 1;
            }
            let p = trace[seg];
            let count = if (t - p.t).abs() <= snap || seg + 1 == trace.len() {
                p.count
            } else {
                let q = trace[seg + 1];
                p.count + (q.count - p.count) * (t - p.t) / (q.t - p.t)
            };
            TracePoint::new(t, count)
        })
        .collect()
}

/// Index ranges `anchor..=peak` of every burst: a zero sample followed by a
/// run of positive samples, up to the first maximum of that run.
pub fn burst_rises(values: &[f64]) -> Vec<RangeInclusive<usize>> {
    let mut rises = Vec::new();
    let mut i = 0;
    while i + 1 < values.len() {
        if values[i] <= 0.0 && values[i + 1] > 0.0 {
            let anchor = i;
            let mut peak = i + 1;
            let mut j = i + 1;
            while j < values.len() && values[j] > 0.0 {
                if values[j] > values[peak] {
                    peak = j;
                }
                j += 1;
            }
            rises.push(anchor..=peak);
            i = j;
        } else {
            i += 1;
        }
    }
    rises
}

/// Normal growth envelope. With a single calibration burst `lower` and
/// `upper` coincide with `nominal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub nominal: PtrArray,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Reference {
    pub fn from_array(nominal: PtrArray) -> Self {
        let values = nominal.values().to_vec();
        Self {
            nominal,
            lower: values.clone(),
            upper: values,
        }
    }

    /// Envelope over several rises sampled with the same `step`, each
    /// starting at its anchor, clamped at `pe`.
    pub fn from_rises(rises: &[Vec<f64>], step: f64, pe: f64) -> Option<Self> {
        let first = rises.first()?;
        let len = rises.iter().map(Vec::len).max()?;
        let mut lower = vec![f64::INFINITY; len];
        let mut upper = vec![f64::NEG_INFINITY; len];
        for rise in rises {
            for (j, &v) in rise.iter().enumerate() {
                let v = v.min(pe);
                lower[j] = lower[j].min(v);
                upper[j] = upper[j].max(v);
            }
        }
        let nominal = PtrArray::new(0.0, step, first.iter().map(|v| v.min(pe)).collect()).ok()?;
        Some(Self { nominal, lower, upper })
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    /// Deviation of `observed` from the envelope at index `j`.
    pub fn deviation(&self, j: usize, observed: f64, floor: f64) -> f64 {
        deviation(observed, self.lower[j], self.upper[j], floor)
    }
}

/// Relative distance of `observed` outside `[lower, upper]`; the denominator
/// is the exceeded bound, floored at `floor`.
pub fn deviation(observed: f64, lower: f64, upper: f64, floor: f64) -> f64 {
    if observed > upper {
        (observed - upper) / upper.max(floor)
    } else if observed < lower {
        (lower - observed) / lower.max(floor)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[(f64, f64)]) -> Vec<TracePoint> {
        raw.iter().map(|&(t, c)| TracePoint::new(t, c)).collect()
    }

    #[test]
    fn resample_fills_gaps_linearly() {
        let out = resample(&pts(&[(0.0, 0.0), (0.1, 10.0), (0.4, 40.0)]), 0.1);
        let counts: Vec<f64> = out.iter().map(|p| p.count).collect();
        assert_eq!(counts.len(), 5);
        assert_eq!(counts[0], 0.0);
        assert_eq!(counts[1], 10.0);
        assert!((counts[2] - 20.0).abs() < 1e-9);
        assert!((counts[3] - 30.0).abs() < 1e-9);
        assert_eq!(counts[4], 40.0);
    }

    #[test]
    fn rises_need_a_zero_anchor() {
        let v = [3.0, 2.0, 0.0, 1.0, 5.0, 4.0, 0.0, 0.0, 2.0, 2.0];
        assert_eq!(burst_rises(&v), vec![2..=4, 7..=8]);
        assert!(burst_rises(&[0.0, 0.0, 0.0]).is_empty());
    }

    #[test]
    fn single_rise_deviation_is_relative_error() {
        let r = Reference::from_rises(&[vec![0.0, 10000.0]], 0.1, 40000.0).unwrap();
        assert!((r.deviation(1, 10400.0, 400.0) - 0.04).abs() < 1e-12);
        assert!((r.deviation(1, 9000.0, 400.0) - 0.1).abs() < 1e-12);
        assert_eq!(r.deviation(0, 0.0, 400.0), 0.0);
        assert_eq!(r.deviation(0, 200.0, 400.0), 0.5);
    }

    #[test]
    fn envelope_covers_every_rise() {
        let r = Reference::from_rises(&[vec![0.0, 400.0, 1400.0], vec![0.0, 800.0]], 0.1, 1e9).unwrap();
        assert_eq!(r.lower, vec![0.0, 400.0, 1400.0]);
        assert_eq!(r.upper, vec![0.0, 800.0, 1400.0]);
        assert_eq!(r.deviation(1, 600.0, 10.0), 0.0);
        assert_eq!(r.nominal.values(), &[0.0, 400.0, 1400.0]);
    }
}
