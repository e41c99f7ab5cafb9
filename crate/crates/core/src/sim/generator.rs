use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::scenario::{Amplitude, NormalBroadcastProfile};
use super::SUBSTEPS_PER_MS;
use crate::model::TracePoint;

/// Integer range a jittered count may take: every value `c` in it satisfies
/// `|c - base| / base <= jitter` when evaluated in floating point.
pub fn jitter_bounds(base: u64, jitter: f64) -> (u64, u64) {
    if base == 0 || jitter <= 0.0 {
        return (base, base);
    }
    let b = base as f64;
    let within = |c: u64| (c as f64 - b).abs() / b <= jitter;
    let mut hi = (b * (1.0 + jitter)).floor() as u64;
    while hi > base && !within(hi) {
        hi -= 1;
    }
    while within(hi + 1) {
        hi += 1;
    }
    let mut lo = (b * (1.0 - jitter)).ceil().max(0.0) as u64;
    while lo < base && !within(lo) {
        lo += 1;
    }
    while lo > 0 && within(lo - 1) {
        lo -= 1;
    }
    (lo, hi)
}

/// Periodic normal broadcast source.
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    shape: Vec<TracePoint>,
    period_sub: u64,
    time_scale: f64,
    jitter: f64,
    scale: f64,
    pub unicast_per_tick: u64,
}

impl Generator {
    pub fn new(profile: &NormalBroadcastProfile, cap: u64) -> Self {
        let shape = profile.shape_points();
        let peak = shape.iter().map(|p| p.count).fold(0.0, f64::max);
        let scale = match profile.amplitude {
            Amplitude::Tabulated => 1.0,
            Amplitude::CapFraction(f) if peak > 0.0 => f * cap as f64 / peak,
            Amplitude::CapFraction(_) => 0.0,
        };
        let period_sub = (profile.burst_period_ms * profile.time_scale * SUBSTEPS_PER_MS as f64).round() as u64;
        Self {
            shape,
            period_sub,
            time_scale: profile.time_scale,
            jitter: profile.jitter,
            scale,
            unicast_per_tick: (profile.unicast_fraction * cap as f64).round() as u64,
        }
    }

    fn shape_at(&self, phase_ms: f64) -> f64 {
        let s = &self.shape;
        if phase_ms >= s[s.len() - 1].t {
            return if phase_ms == s[s.len() - 1].t {
                s[s.len() - 1].count
            } else {
                0.0
            };
        }
        let i = s.partition_point(|p| p.t <= phase_ms);
        let (p, q) = (s[i - 1], s[i]);
        if phase_ms == p.t {
            p.count
        } else {
            p.count + (q.count - p.count) * (phase_ms - p.t) / (q.t - p.t)
        }
    }

    /// Noiseless broadcast frames for the tick starting at substep `t_sub`.
    pub fn base_count(&self, t_sub: u64) -> u64 {
        let phase = (t_sub % self.period_sub) as f64 / SUBSTEPS_PER_MS as f64 / self.time_scale;
        (self.shape_at(phase) * self.scale).round().max(0.0) as u64
    }

    /// One uniform draw per call, whether or not the base is zero.
    pub fn jittered(&self, base: u64, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = rng.random();
        if base == 0 || self.jitter <= 0.0 {
            return base;
        }
        let scaled = (base as f64 * (1.0 - self.jitter + 2.0 * self.jitter * u)).round() as u64;
        let (lo, hi) = jitter_bounds(base, self.jitter);
        scaled.clamp(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn bounds_hold_exactly() {
        for base in [1u64, 7, 19, 20, 400, 14650, 40000] {
            for j in [0.01, 0.05, 0.1] {
                let (lo, hi) = jitter_bounds(base, j);
                let b = base as f64;
                assert!((hi as f64 - b) / b <= j && (b - lo as f64) / b <= j);
                assert!((hi as f64 + 1.0 - b) / b > j);
                assert!(lo == 0 || (b - (lo as f64 - 1.0)) / b > j);
            }
        }
        assert_eq!(jitter_bounds(40000, 0.05), (38000, 42000));
        assert_eq!(jitter_bounds(0, 0.05), (0, 0));
    }

    #[test]
    fn tabulated_hump_reproduces_table_points() {
        let g = Generator::new(&NormalBroadcastProfile::default(), 400_000);
        assert_eq!(g.base_count(0), 0);
        assert_eq!(g.base_count(100), 14650);
        assert_eq!(g.base_count(180), 40000);
        assert_eq!(g.base_count(300), 0);
        assert_eq!(g.base_count(480), 40000);
        // Interpolated between 1.9 (32000) and 2.2 (25000).
        assert_eq!(g.base_count(200), 29667);
    }

    #[test]
    fn jitter_stays_in_band() {
        let g = Generator::new(&NormalBroadcastProfile::default(), 400_000);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let c = g.jittered(40000, &mut rng);
            assert!((38000..=42000).contains(&c));
        }
    }

    #[test]
    fn cap_fraction_scales_peak() {
        let p = NormalBroadcastProfile {
            amplitude: Amplitude::CapFraction(0.5),
            ..NormalBroadcastProfile::default()
        };
        assert_eq!(Generator::new(&p, 1000).base_count(180), 500);
    }
}
