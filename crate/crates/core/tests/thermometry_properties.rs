//! Calibration, inversion and refinement on the forward model.

use proptest::prelude::*;
use stokes_core::thermometry::{
    calibrate, calibrate_trimmed, forward_fwhm, log_spaced, refine_temperature, CalibrationCurve,
};
use stokes_core::{Apparatus, Error, ScanSettings};

fn app() -> Apparatus {
    Apparatus::rubidium_pencil_cell()
}

/// Coarser than the defaults to keep the suite quick; widths still resolve
/// to well under a percent.
fn quick() -> ScanSettings {
    ScanSettings {
        n_points: 401,
        nodes_per_axis: 128,
        ..ScanSettings::default()
    }
}

#[test]
fn longer_pulses_assign_lower_temperatures_at_equal_width() {
    let grid = log_spaced(1e-3, 300.0, 10).unwrap();
    let short = calibrate(&app(), 10e-6, &grid, &quick()).unwrap();
    let long = calibrate(&app(), 100e-6, &grid, &quick()).unwrap();
    let (lo, hi) = (
        short.fwhm_range().0.max(long.fwhm_range().0),
        short.fwhm_range().1.min(long.fwhm_range().1),
    );
    assert!(lo < hi, "overlapping width ranges");
    for k in 1..10 {
        let f = lo * (hi / lo).powf(k as f64 / 10.0);
        let (ts, tl) = (short.invert(f).unwrap(), long.invert(f).unwrap());
        assert!(tl < ts, "width {f}: τ=100 µs gives {tl}, τ=10 µs gives {ts}");
    }
}

#[test]
fn flat_regime_names_the_offending_temperature() {
    let grid = log_spaced(1e-4, 300.0, 8).unwrap();
    let err = calibrate(&app(), 10e-9, &grid, &quick()).unwrap_err();
    assert_eq!(err, Error::FlatRegime { temperature: 1e-4 });
    assert!(err.to_string().contains("0.0001"), "{err}");

    let grid = log_spaced(1e-4, 300.0, 24).unwrap();
    let (curve, dropped) = calibrate_trimmed(&app(), 10e-9, &grid, &quick()).unwrap();
    assert!(dropped.contains(&1e-4));
    assert_eq!(curve.temperatures().len() + dropped.len(), 24);
}

#[test]
fn refinement_recovers_a_forward_temperature() {
    let target = forward_fwhm(&app(), 10e-6, 1.0, &quick()).unwrap();
    let t = refine_temperature(&app(), 10e-6, target, (0.3, 3.0), 1e-4, &quick()).unwrap();
    assert!((t - 1.0).abs() < 2e-4, "{t}");
    let coarse = refine_temperature(&app(), 10e-6, target, (0.3, 3.0), 1e-3, &quick()).unwrap();
    assert!((coarse / t - 1.0).abs() < 1e-3, "{coarse} vs {t}");
}

#[test]
fn refinement_rejects_a_bracket_that_misses_the_target() {
    let target = forward_fwhm(&app(), 10e-6, 1.0, &quick()).unwrap();
    for bracket in [(2.0, 5.0), (0.1, 0.5), (1.0, 1.0), (3.0, 0.3)] {
        let err = refine_temperature(&app(), 10e-6, target, bracket, 1e-3, &quick()).unwrap_err();
        assert!(matches!(err, Error::BracketInvalid { .. }), "{bracket:?}: {err}");
    }
}

#[test]
fn calibration_is_deterministic_and_round_trips() {
    let grid = log_spaced(1e-2, 10.0, 8).unwrap();
    let a = calibrate(&app(), 10e-6, &grid, &quick()).unwrap();
    let b = calibrate(&app(), 10e-6, &grid, &quick()).unwrap();
    let (mut sa, mut sb) = (Vec::new(), Vec::new());
    a.save(&mut sa).unwrap();
    b.save(&mut sb).unwrap();
    assert_eq!(sa, sb);
    let loaded = CalibrationCurve::load(&sa[..], Some(&app().fingerprint(10e-6))).unwrap();
    assert_eq!(loaded, a);
    let err = CalibrationCurve::load(&sa[..], Some(&app().fingerprint(100e-6))).unwrap_err();
    assert!(matches!(err, Error::FingerprintMismatch { .. }));
}

fn synthetic_curve(exponent: f64) -> CalibrationCurve {
    let pts: Vec<(f64, f64)> = log_spaced(1e-3, 300.0, 16)
        .unwrap()
        .into_iter()
        .map(|t| (t, 0.05 * t.powf(-exponent)))
        .collect();
    CalibrationCurve::from_points(1e-5, "synthetic".into(), &pts).unwrap()
}

proptest! {
    #[test]
    fn inversion_is_monotone_and_bounded(exponent in 0.1f64..1.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let curve = synthetic_curve(exponent);
        let (lo, hi) = curve.fwhm_range();
        let f1 = lo * (hi / lo).powf(u.min(v));
        let f2 = lo * (hi / lo).powf(u.max(v));
        let (t1, t2) = (curve.invert(f1).unwrap(), curve.invert(f2).unwrap());
        prop_assert!(t1 >= t2, "wider cone must not be hotter");
        prop_assert!((1e-3..=300.0).contains(&t1) && (1e-3..=300.0).contains(&t2));
    }

    #[test]
    fn power_laws_invert_accurately(exponent in 0.1f64..1.0, u in 0.0f64..1.0) {
        let curve = synthetic_curve(exponent);
        let t = 1e-3 * (300.0f64 / 1e-3).powf(u);
        let back = curve.invert(0.05 * t.powf(-exponent)).unwrap();
        prop_assert!((back / t - 1.0).abs() < 1e-9, "{} vs {}", back, t);
    }

    #[test]
    fn widths_outside_the_table_are_rejected(exponent in 0.1f64..1.0, s in 1.0001f64..10.0) {
        let curve = synthetic_curve(exponent);
        let (lo, hi) = curve.fwhm_range();
        let out_of_range = |r: Result<f64, Error>| matches!(r, Err(Error::OutOfCalibrationRange { .. }));
        prop_assert!(out_of_range(curve.invert(lo / s)));
        prop_assert!(out_of_range(curve.invert(hi * s)));
    }
}
