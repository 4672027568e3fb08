//! End-to-end runs of the `stokes-thermo` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const FAST: &str = "scan.points = 401\nquadrature.nodes_per_axis = 128\n\
                    thermometry.t_min_K = 0.01\nthermometry.t_max_K = 10\nthermometry.n_points = 8\n";

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_stokes-thermo"))
        .arg("--config")
        .arg(&cfg)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Half width (degrees) read off a distribution CSV by linear interpolation.
fn csv_fwhm(csv: &str) -> f64 {
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let i = rows.iter().position(|r| r.1 <= 0.5).expect("half crossing");
    let ((t0, p0), (t1, p1)) = (rows[i - 1], rows[i]);
    2.0 * (t0 + (p0 - 0.5) / (p0 - p1) * (t1 - t0))
}

#[test]
fn hotter_clouds_emit_narrower_cones() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "pump.tau_s = 1e-8\nscan.theta_max_deg = 90\nscan.points = 361\nquadrature.nodes_per_axis = 64\n";
    let widths: Vec<f64> = ["1K", "300K"]
        .iter()
        .map(|t| {
            let o = run(dir.path(), cfg, &["distribution", "--temperature", t]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
            csv_fwhm(&String::from_utf8(o.stdout).unwrap())
        })
        .collect();
    assert!(widths[1] < widths[0], "{widths:?}");
}

#[test]
fn calibrate_then_invert() {
    let dir = tempfile::tempdir().unwrap();
    let cal = dir.path().join("cal.csv");
    let o = run(dir.path(), FAST, &["--output", cal.to_str().unwrap(), "calibrate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&cal).unwrap();
    assert!(text.contains("# schema=stokes-thermo-cal-v1"));

    // A tabulated width inverts to exactly its temperature.
    let knot = text.lines().filter(|l| !l.starts_with('#')).nth(3).unwrap();
    let (t, f) = knot.split_once(',').unwrap();
    let o = run(dir.path(), FAST, &["invert", "--calibration", cal.to_str().unwrap(), "--fwhm-deg", f]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let printed: f64 = String::from_utf8(o.stdout).unwrap().trim().strip_prefix("temperature_K=").unwrap().parse().unwrap();
    assert_eq!(printed, t.parse::<f64>().unwrap());

    // Refinement stays inside the bracketing knots.
    let o = run(dir.path(), FAST, &["invert", "--calibration", cal.to_str().unwrap(), "--fwhm-deg", f, "--refine"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let refined: f64 = String::from_utf8(o.stdout).unwrap().trim().strip_prefix("temperature_K=").unwrap().parse().unwrap();
    assert!((refined / printed - 1.0).abs() < 0.05, "{refined} vs {printed}");

    // Out of range.
    let o = run(dir.path(), FAST, &["invert", "--calibration", cal.to_str().unwrap(), "--fwhm-deg", "80"]);
    assert_eq!(code(&o), 6);
    assert!(stderr(&o).contains("OutOfCalibrationRange"));

    // Same file, different pulse: the fingerprint no longer matches.
    let other = format!("{FAST}pump.tau_s = 2e-5\n");
    let o = run(dir.path(), &other, &["invert", "--calibration", cal.to_str().unwrap(), "--fwhm-deg", f]);
    assert_eq!(code(&o), 7);
    assert!(stderr(&o).contains("FingerprintMismatch"));
}

#[test]
fn flat_grid_exits_with_the_flat_regime_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "pump.tau_s = 1e-8\nscan.points = 201\nquadrature.nodes_per_axis = 64\n\
               thermometry.t_min_K = 1e-5\nthermometry.t_max_K = 1e-4\nthermometry.n_points = 8\n";
    let o = run(dir.path(), cfg, &["calibrate"]);
    assert_eq!(code(&o), 5, "{}", stderr(&o));
    assert!(stderr(&o).contains("FlatRegime"));
}

#[test]
fn configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in ["cell.depth = 1\n", "cell.lx_m = -2\n", "scan.points = 3\nscan.points = 4\n"] {
        let o = run(dir.path(), cfg, &["distribution", "--temperature", "1K"]);
        assert_eq!(code(&o), 3, "{cfg}: {}", stderr(&o));
    }
    let o = Command::new(env!("CARGO_BIN_EXE_stokes-thermo"))
        .args(["--config", "/nonexistent/run.cfg", "calibrate"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["overlap"][..],
        &["overlap", "--temperature", "1K", "--motion-radius-m", "0.1"],
        &["distribution", "--temperature", "warm"],
        &["overlap", "--motion-radius-m", "-1"],
    ] {
        let o = run(dir.path(), FAST, args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn overlap_marks_the_cone_width() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "scan.theta_max_deg = 0.05\nscan.points = 201\nquadrature.nodes_per_axis = 64\n";
    let o = run(dir.path(), cfg, &["overlap", "--motion-radius-m", "0.1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let marker: f64 = lines.next().unwrap().strip_prefix("# fwhm_deg=").unwrap().parse().unwrap();
    assert_eq!(lines.next(), Some("theta_deg,symmetric_weight"));
    for l in lines {
        let (t, w) = l.split_once(',').unwrap();
        let (t, w): (f64, f64) = (t.parse().unwrap(), w.parse().unwrap());
        if t <= 0.5 * marker {
            assert!(w >= 0.99, "θ={t}°: W={w}");
        }
    }
}
