mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stormctl_core::agents::{offline, AgentConfig, TriggerCause};
use stormctl_core::datasets::Dataset;
use stormctl_core::model::{fit_model, rise_segment, PtrModelParams};

#[test]
fn eval_matches_fixed_point_oracle_on_growing_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..1000 {
        let ps = rng.random_range(0.0..1e5);
        let pe = ps + rng.random_range(0.0..1e6);
        let m = rng.random_range(1e-3..6.0);
        let t = rng.random_range(0.0..4.0);
        let p = PtrModelParams::new(ps, pe, m).unwrap();
        let got = p.eval(t).unwrap();
        let (want, _) = growth_oracle(ps, pe, m, t);
        let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
        assert!(rel <= 1e-9, "ps={ps} pe={pe} m={m} t={t}: {got} vs {want}");
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
    }
}

#[test]
fn eval_error_is_bounded_by_term_magnitudes_for_any_sign() {
    // With m < 0 or pe < ps the two terms can cancel, so the error is
    // measured against their combined magnitude.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let ps = rng.random_range(0.0..1e5);
        let pe = rng.random_range(0.0..1e5);
        let mut m = rng.random_range(-6.0..6.0);
        if m == 0.0 {
            m = 1.0;
        }
        let t = rng.random_range(0.0..4.0);
        let got = PtrModelParams::new(ps, pe, m).unwrap().eval(t).unwrap();
        let (want, scale) = growth_oracle(ps, pe, m, t);
        assert!(
            (got - want).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE),
            "{got} vs {want}"
        );
    }
}

#[test]
fn oracle_knows_pi_and_e() {
    // ps = 1/(2π) makes b = 1: P(1) = a + e with a = (pe - ps)·2π/m.
    let ps = 1.0 / (2.0 * std::f64::consts::PI);
    let (v, _) = growth_oracle(ps, ps, 1.0, 1.0);
    assert!((v - std::f64::consts::E).abs() < 1e-14);
}

#[test]
fn table3_fit_is_as_good_as_exhaustive_grid() {
    let points = Dataset::Table3.points();
    let rise = rise_segment(&points);
    let pairs: Vec<(f64, f64)> = rise.iter().map(|p| (p.t, p.count)).collect();
    let (grid_rmse, ..) = grid_fit(&pairs);
    let fit = fit_model(&points).unwrap();
    assert!(
        (fit.rmse - grid_rmse).abs() <= 0.01 * grid_rmse,
        "{} vs {grid_rmse}",
        fit.rmse
    );
    assert_eq!(fit, fit_model(&points).unwrap());
}

#[test]
fn synthetic_curve_is_recovered() {
    let truth = PtrModelParams::new(1500.0, 9000.0, 1.3).unwrap();
    let points: Vec<_> = (0..=20)
        .map(|k| {
            let t = k as f64 * 0.1;
            stormctl_core::model::TracePoint::new(t, truth.eval(t).unwrap())
        })
        .collect();
    let fit = fit_model(&points).unwrap().params;
    for (got, want) in [
        (fit.p_start(), truth.p_start()),
        (fit.p_end(), truth.p_end()),
        (fit.m(), truth.m()),
    ] {
        assert!((got - want).abs() <= 0.01 * want, "{got} vs {want}");
    }
}

#[test]
fn table1_trigger_index_matches_brute_force_scan() {
    let table1 = parse_pairs(TABLE1);
    let table4 = parse_pairs(TABLE4);
    let live = on_grid(&table1, 0.1);
    let (lower, upper, pe) = envelope(&on_grid(&table4, 0.1));
    let want = first_trigger_index(&live, &lower, &upper, pe).expect("oracle finds a trigger");

    let report = offline::detect(
        &Dataset::Table1.points(),
        &Dataset::Table4.points(),
        &AgentConfig::default(),
    )
    .unwrap();
    let first = report.first_trigger().unwrap();
    let index = (first.t / report.step).round() as usize;
    assert_eq!(index, want);
    assert_eq!(first.trigger.as_ref().unwrap().cause, TriggerCause::PtrDeviation);
    let r = &report.calibration.reference;
    assert_eq!(r.len(), upper.len());
    for (got, want) in r.upper.iter().zip(&upper).chain(r.lower.iter().zip(&lower)) {
        assert!((got - want).abs() <= 1e-6 * want.max(1.0), "{got} vs {want}");
    }
}

#[test]
fn table4_replay_is_quiet() {
    let report = offline::detect(
        &Dataset::Table4.points(),
        &Dataset::Table4.points(),
        &AgentConfig::default(),
    )
    .unwrap();
    assert!(report.tickets.is_empty());
    assert!(report.comparisons.iter().all(|c| c.deviation == 0.0));
}
