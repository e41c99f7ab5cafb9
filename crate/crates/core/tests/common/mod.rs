//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::{BigInt, Sign};

/// Fractional bits of the fixed-point oracle arithmetic.
const FRAC: u32 = 320;

fn one() -> BigInt {
    BigInt::from(1) << FRAC
}

fn fixed_from_f64(x: f64) -> BigInt {
    assert!(x.is_finite());
    if x == 0.0 {
        return BigInt::from(0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let v = BigInt::from(mant) * sign;
    let shift = e + FRAC as i64;
    if shift >= 0 {
        v << shift as u32
    } else {
        v >> (-shift) as u32
    }
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    let (sign, mag) = (v.sign(), v.magnitude());
    if mag.bits() == 0 {
        return 0.0;
    }
    let shift = mag.bits() as i64 - 64;
    let top = if shift > 0 {
        mag >> shift as u64
    } else {
        mag << (-shift) as u64
    };
    let digit = top.to_u64_digits().first().copied().unwrap_or(0);
    let out = digit as f64 * 2f64.powi((shift - FRAC as i64) as i32);
    if sign == Sign::Minus {
        -out
    } else {
        out
    }
}

fn mul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> FRAC
}

fn div(a: &BigInt, b: &BigInt) -> BigInt {
    (a << FRAC) / b
}

fn atan_inv(n: u32) -> BigInt {
    let n = BigInt::from(n);
    let n2 = &n * &n;
    let mut power = one() / &n;
    let mut sum = BigInt::from(0);
    let mut k = 0u32;
    while power != BigInt::from(0) {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &n2;
        k += 1;
    }
    sum
}

fn pi() -> BigInt {
    atan_inv(5) * 16 - atan_inv(239) * 4
}

fn exp(x: &BigInt) -> BigInt {
    if x.sign() == Sign::Minus {
        return div(&one(), &exp(&-x));
    }
    // Halve until below 2^-8, sum the series, square back up.
    let mut r = 0u32;
    let mut y = x.clone();
    while y > (one() >> 8) {
        y >>= 1;
        r += 1;
    }
    let mut sum = one();
    let mut term = one();
    let mut k = 1u32;
    loop {
        term = mul(&term, &y) / BigInt::from(k);
        if term == BigInt::from(0) {
            break;
        }
        sum += &term;
        k += 1;
    }
    for _ in 0..r {
        sum = mul(&sum, &sum);
    }
    sum
}

/// `(2π(pe−ps)/m)·t + 2π·ps·t·e^(m·t)` in fixed point with 320 fractional bits.
/// Returns the value and the sum of the two terms' magnitudes.
pub fn growth_oracle(ps: f64, pe: f64, m: f64, t: f64) -> (f64, f64) {
    let (ps, pe, m, t) = (
        fixed_from_f64(ps),
        fixed_from_f64(pe),
        fixed_from_f64(m),
        fixed_from_f64(t),
    );
    let two_pi = pi() * 2;
    let a = div(&mul(&two_pi, &(&pe - &ps)), &m);
    let b = mul(&two_pi, &ps);
    let linear = mul(&a, &t);
    let growth = mul(&mul(&b, &t), &exp(&mul(&m, &t)));
    let scale = fixed_to_f64(&linear).abs() + fixed_to_f64(&growth).abs();
    (fixed_to_f64(&(linear + growth)), scale)
}

/// Exhaustive search over `Ps, Pe ∈ {0, 100, …, 20000}` and
/// `m ∈ {0.01, 0.02, …, 3.00}`. Returns `(rmse, ps, pe, m)`.
pub fn grid_fit(points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    for mi in 1..=300 {
        let m = mi as f64 / 100.0;
        let growth: Vec<f64> = points.iter().map(|&(t, _)| t * (m * t).exp()).collect();
        for psi in 0..=200 {
            let ps = psi as f64 * 100.0;
            for pei in 0..=200 {
                let pe = pei as f64 * 100.0;
                let a = two_pi * (pe - ps) / m;
                let b = two_pi * ps;
                let sse: f64 = points
                    .iter()
                    .zip(&growth)
                    .map(|(&(t, c), &g)| {
                        let r = a * t + b * g - c;
                        r * r
                    })
                    .sum();
                let rmse = (sse / points.len() as f64).sqrt();
                if rmse < best.0 {
                    best = (rmse, ps, pe, m);
                }
            }
        }
    }
    best
}

/// Linear interpolation of a tabulated trace onto `0, step, 2·step, …`.
pub fn on_grid(points: &[(f64, f64)], step: f64) -> Vec<f64> {
    let t_end = points.last().unwrap().0;
    let n = (t_end / step).round() as usize + 1;
    (0..n)
        .map(|k| {
            let t = k as f64 * step;
            let i = points.partition_point(|p| p.0 <= t + 1e-9).max(1) - 1;
            let (t0, c0) = points[i];
            if (t - t0).abs() < 1e-9 || i + 1 == points.len() {
                c0
            } else {
                let (t1, c1) = points[i + 1];
                c0 + (c1 - c0) * (t - t0) / (t1 - t0)
            }
        })
        .collect()
}

/// Envelope over the rises of a gridded normal trace: each rise runs from a
/// zero sample to the first maximum of the positive run that follows.
pub fn envelope(normal: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let mut rises: Vec<&[f64]> = Vec::new();
    let mut i = 0;
    while i + 1 < normal.len() {
        if normal[i] == 0.0 && normal[i + 1] > 0.0 {
            let mut end = i + 1;
            while end < normal.len() && normal[end] > 0.0 {
                end += 1;
            }
            let run = &normal[i..end];
            let peak = (0..run.len()).fold(0, |p, k| if run[k] > run[p] { k } else { p });
            rises.push(&run[..=peak]);
            i = end;
        } else {
            i += 1;
        }
    }
    let pe = rises.iter().flat_map(|r| r.iter()).fold(0.0f64, |a, &b| a.max(b));
    let len = rises.iter().map(|r| r.len()).max().unwrap();
    let lower = (0..len)
        .map(|j| {
            rises
                .iter()
                .filter_map(|r| r.get(j))
                .fold(f64::INFINITY, |a, &b| a.min(b))
        })
        .collect();
    let upper = (0..len)
        .map(|j| {
            rises
                .iter()
                .filter_map(|r| r.get(j))
                .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        })
        .collect();
    (lower, upper, pe)
}

/// First index of `live` at which three consecutive in-reference samples
/// deviate from the envelope by more than 5% (floor 1% of the peak).
pub fn first_trigger_index(live: &[f64], lower: &[f64], upper: &[f64], pe: f64) -> Option<usize> {
    let floor = 0.01 * pe;
    let mut anchor: Option<usize> = None;
    let mut run = 0;
    for (i, &c) in live.iter().enumerate() {
        if c == 0.0 {
            anchor = Some(i);
            run = 0;
            continue;
        }
        let Some(a) = anchor else { continue };
        let j = i - a;
        if j >= upper.len() {
            continue;
        }
        let dev = if c > upper[j] {
            (c - upper[j]) / upper[j].max(floor)
        } else if c < lower[j] {
            (lower[j] - c) / lower[j].max(floor)
        } else {
            0.0
        };
        if dev > 0.05 {
            run += 1;
            if run == 3 {
                return Some(i);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Parses a `t,count` CSV with a header line.
pub fn parse_pairs(csv: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut f = l.split(',');
            let t = f.next().unwrap().trim().parse().unwrap();
            let c = f.next().unwrap().trim().parse().unwrap();
            (t, c)
        })
        .collect()
}

pub const TABLE1: &str = include_str!("../../data/table1.csv");
pub const TABLE3: &str = include_str!("../../data/table3.csv");
pub const TABLE4: &str = include_str!("../../data/table4.csv");
