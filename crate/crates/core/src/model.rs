//! Broadcast growth model.
//!
//! The packet transmission rate (PTR) during a broadcast build-up is modelled as
//!
//! ```text
//! P(t) = a·t + b·t·e^(m·t),   a = 2π(Pe − Ps)/m,   b = 2π·Ps
//! ```
//!
//! with `t` in milliseconds and rates in packets (or megabytes) per sampling
//! interval. The formula is implemented literally; units are documentation only.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default spacing between PTR array samples, in milliseconds.
pub const DEFAULT_STEP_MS: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("growth constant m must be finite and non-zero, got {0}")]
    ZeroGrowth(f64),
    #[error("{name} must be finite and non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("time must be finite and non-negative, got {0}")]
    NegativeTime(f64),
    #[error("empty range: t_end {t_end} is before t_start {t_start}")]
    EmptyRange { t_start: f64, t_end: f64 },
    #[error("step must be finite and positive, got {0}")]
    NonPositiveStep(f64),
    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("trace time is not strictly increasing at point {index}")]
    NonMonotoneTime { index: usize },
    #[error("invalid count {value} at point {index}")]
    InvalidCount { index: usize, value: f64 },
    #[error("degenerate trace: no growth to fit")]
    Degenerate,
}

/// Parameters of the growth model. `a` and `b` are always derived from
/// `(p_start, p_end, m)` on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct PtrModelParams {
    p_start: f64,
    p_end: f64,
    m: f64,
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawParams {
    p_start: f64,
    p_end: f64,
    m: f64,
}

impl TryFrom<RawParams> for PtrModelParams {
    type Error = ModelError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        PtrModelParams::new(raw.p_start, raw.p_end, raw.m)
    }
}

fn check_rate(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::NegativeRate { name, value })
    }
}

impl PtrModelParams {
    pub fn new(p_start: f64, p_end: f64, m: f64) -> Result<Self, ModelError> {
        if !m.is_finite() || m == 0.0 {
            return Err(ModelError::ZeroGrowth(m));
        }
        check_rate("p_start", p_start)?;
        check_rate("p_end", p_end)?;
        Ok(Self {
            p_start,
            p_end,
            m,
            a: 2.0 * PI * (p_end - p_start) / m,
            b: 2.0 * PI * p_start,
        })
    }

    pub fn p_start(&self) -> f64 {
        self.p_start
    }

    /// Safe threshold rate.
    pub fn p_end(&self) -> f64 {
        self.p_end
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Instantaneous PTR at `t` milliseconds.
    pub fn eval(&self, t: f64) -> Result<f64, ModelError> {
        if !t.is_finite() || t < 0.0 {
            return Err(ModelError::NegativeTime(t));
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        self.a * t + self.b * t * (self.m * t).exp()
    }

    /// Samples the model from `t_start` to `t_end` every `step` ms, clamping
    /// every value at `p_end`.
    pub fn build_array(&self, t_start: f64, t_end: f64, step: f64) -> Result<PtrArray, ModelError> {
        if !step.is_finite() || step <= 0.0 {
            return Err(ModelError::NonPositiveStep(step));
        }
        if !t_start.is_finite() || t_start < 0.0 {
            return Err(ModelError::NegativeTime(t_start));
        }
        if !t_end.is_finite() || t_end < t_start {
            return Err(ModelError::EmptyRange { t_start, t_end });
        }
        let n = sample_count(t_start, t_end, step);
        let values = (0..n)
            .map(|k| {
                let t = t_start + k as f64 * step;
                self.eval_unchecked(t).min(self.p_end)
            })
            .collect();
        Ok(PtrArray { t_start, step, values })
    }
}

/// Number of samples `t_start + k·step` that fall inside `[t_start, t_end]`.
pub(crate) fn sample_count(t_start: f64, t_end: f64, step: f64) -> usize {
    // Slack absorbs representation error such as (1.9 - 0.0) / 0.1 = 18.999…
    ((t_end - t_start) / step + 1e-9).floor() as usize + 1
}

/// Uniformly sampled rate curve: `values[k]` is the rate at `t_start + k·step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtrArray {
    t_start: f64,
    step: f64,
    values: Vec<f64>,
}

impl PtrArray {
    pub fn new(t_start: f64, step: f64, values: Vec<f64>) -> Result<Self, ModelError> {
        if !step.is_finite() || step <= 0.0 {
            return Err(ModelError::NonPositiveStep(step));
        }
        if values.is_empty() {
            return Err(ModelError::InsufficientPoints { needed: 1, got: 0 });
        }
        Ok(Self { t_start, step, values })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_at(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = TracePoint> + '_ {
        self.values.iter().enumerate().map(|(k, &count)| TracePoint {
            t: self.time_at(k),
            count,
        })
    }
}

/// One observation of a trace: time in ms and a per-interval count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub count: f64,
}

impl TracePoint {
    pub fn new(t: f64, count: f64) -> Self {
        Self { t, count }
    }
}

/// Checks time ordering and counts.
pub fn validate_trace(trace: &[TracePoint]) -> Result<(), ModelError> {
    for (index, p) in trace.iter().enumerate() {
        if !p.count.is_finite() || p.count < 0.0 {
            return Err(ModelError::InvalidCount { index, value: p.count });
        }
        if !p.t.is_finite() || (index > 0 && p.t <= trace[index - 1].t) {
            return Err(ModelError::NonMonotoneTime { index });
        }
    }
    Ok(())
}

/// Portion of the trace up to and including its first maximum.
pub fn rise_segment(trace: &[TracePoint]) -> &[TracePoint] {
    let mut peak = 0;
    for (i, p) in trace.iter().enumerate() {
        if p.count > trace[peak].count {
            peak = i;
        }
    }
    &trace[..trace.len().min(peak + 1)]
}

/// Search settings for [`fit_model_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Grid points per sign of `m`.
    pub grid_points: usize,
    /// Smallest `|m|·T` on the grid, `T` being the time span of the rise.
    pub min_span: f64,
    /// Largest `|m|·T` on the grid.
    pub max_span: f64,
    /// Golden-section iterations around the best grid point.
    pub refine_iterations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            grid_points: 1600,
            min_span: 0.005,
            max_span: 8.0,
            refine_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(flatten)]
    pub params: PtrModelParams,
    pub rmse: f64,
}

/// Fits the model to the rise of `trace` with the default [`FitConfig`].
pub fn fit_model(trace: &[TracePoint]) -> Result<FitResult, ModelError> {
    fit_model_with(trace, &FitConfig::default())
}

/// Least-squares fit of `(Ps, Pe, m)` over the rise segment of `trace`.
///
/// For a fixed `m` the model is linear in `(Ps, Pe)`, so each candidate `m`
/// is scored by an exact two-variable non-negative least-squares solve. `m`
/// is searched on a log-spaced grid of both signs and then refined by golden
/// section between the neighbours of the best grid point.
pub fn fit_model_with(trace: &[TracePoint], config: &FitConfig) -> Result<FitResult, ModelError> {
    const MIN_POINTS: usize = 4;
    if trace.len() < MIN_POINTS {
        return Err(ModelError::InsufficientPoints {
            needed: MIN_POINTS,
            got: trace.len(),
        });
    }
    validate_trace(trace)?;
    let mut points = Vec::with_capacity(trace.len() + 1);
    if trace[0].t > 0.0 {
        points.push(TracePoint::new(0.0, 0.0));
    }
    points.extend_from_slice(trace);
    if points.iter().all(|p| p.count == 0.0) {
        return Err(ModelError::Degenerate);
    }
    let rise = rise_segment(&points);
    if rise.len() < MIN_POINTS {
        return Err(ModelError::InsufficientPoints {
            needed: MIN_POINTS,
            got: rise.len(),
        });
    }
    let span = rise[rise.len() - 1].t;

    let grid: Vec<f64> = [1.0, -1.0]
        .iter()
        .flat_map(|&sign| {
            let n = config.grid_points.max(2);
            let ratio = config.max_span / config.min_span;
            (0..n).map(move |i| {
                let s = config.min_span * ratio.powf(i as f64 / (n - 1) as f64);
                sign * s / span
            })
        })
        .collect();

    let mut best_index = 0;
    let mut best = solve_fixed_m(rise, grid[0]);
    for (i, &m) in grid.iter().enumerate().skip(1) {
        let candidate = solve_fixed_m(rise, m);
        if candidate.sse < best.sse {
            best = candidate;
            best_index = i;
        }
    }

    // Refine within the bracket formed by the neighbouring grid points of
    // the same sign, in log |m|.
    let per_sign = config.grid_points.max(2);
    let sign_base = (best_index / per_sign) * per_sign;
    let lo_index = best_index.saturating_sub(1).max(sign_base);
    let hi_index = (best_index + 1).min(sign_base + per_sign - 1);
    let sign = grid[best_index].signum();
    let mut lo = grid[lo_index].abs().ln();
    let mut hi = grid[hi_index].abs().ln();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = solve_fixed_m(rise, sign * x1.exp());
    let mut f2 = solve_fixed_m(rise, sign * x2.exp());
    for _ in 0..config.refine_iterations {
        if f1.sse <= f2.sse {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = solve_fixed_m(rise, sign * x1.exp());
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = solve_fixed_m(rise, sign * x2.exp());
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    for candidate in [f1, f2] {
        if candidate.sse < best.sse {
            best = candidate;
        }
    }

    if best.p_start == 0.0 && best.p_end == 0.0 {
        return Err(ModelError::Degenerate);
    }
    let params = PtrModelParams::new(best.p_start, best.p_end, best.m)?;
    Ok(FitResult {
        params,
        rmse: (best.sse / rise.len() as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    p_start: f64,
    p_end: f64,
    m: f64,
    sse: f64,
}

/// Non-negative least squares for `(Ps, Pe)` at a fixed `m`.
///
/// The model is rewritten as `P = Ps·U + D·V` with `U = 2π·t·e^(mt)`,
/// `V = 2π·t/m` and `D = Pe − Ps`, which keeps the Gram matrix better
/// conditioned than the `(Ps, Pe)` basis when `|m|` is small.
fn solve_fixed_m(points: &[TracePoint], m: f64) -> Candidate {
    let (mut uu, mut uv, mut vv, mut uc, mut vc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let u = 2.0 * PI * p.t * (m * p.t).exp();
        let v = 2.0 * PI * p.t / m;
        uu += u * u;
        uv += u * v;
        vv += v * v;
        uc += u * p.count;
        vc += v * p.count;
    }

    let mut candidates = Vec::with_capacity(3);
    let det = uu * vv - uv * uv;
    if det.abs() > f64::EPSILON * uu * vv {
        let ps = (vv * uc - uv * vc) / det;
        let d = (uu * vc - uv * uc) / det;
        if ps >= 0.0 && ps + d >= 0.0 {
            candidates.push((ps, ps + d));
        }
    }
    if candidates.is_empty() {
        // Ps = 0: P = Pe·V.
        let pe = if vv > 0.0 { (vc / vv).max(0.0) } else { 0.0 };
        candidates.push((0.0, pe));
        // Pe = 0: P = Ps·(U − V).
        let xx = uu - 2.0 * uv + vv;
        let xc = uc - vc;
        let ps = if xx > 0.0 { (xc / xx).max(0.0) } else { 0.0 };
        candidates.push((ps, 0.0));
    }

    candidates
        .into_iter()
        .map(|(p_start, p_end)| Candidate {
            p_start,
            p_end,
            m,
            sse: residual_sse(points, p_start, p_end, m),
        })
        .fold(None::<Candidate>, |acc, c| match acc {
            Some(a) if a.sse <= c.sse => Some(a),
            _ => Some(c),
        })
        .expect("at least one candidate")
}

fn residual_sse(points: &[TracePoint], p_start: f64, p_end: f64, m: f64) -> f64 {
    let a = 2.0 * PI * (p_end - p_start) / m;
    let b = 2.0 * PI * p_start;
    points
        .iter()
        .map(|p| {
            let r = a * p.t + b * p.t * (m * p.t).exp() - p.count;
            r * r
        })
        .sum()
}
