//! Temperature from the width of the emission cone.
//!
//! The forward model maps a temperature to the FWHM of the Stokes emission
//! cone; it depends on `(T, τ)` only through the motion radius `A = v_a·τ`.
//! A [`CalibrationCurve`] tabulates the map on a temperature grid and inverts
//! it by monotone interpolation of `ln T`; [`refine_temperature`] bisects on
//! the forward model itself.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::emission::{measure_fwhm, ScanSettings};
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::model::Apparatus;

pub const SCHEMA: &str = "stokes-thermo-cal-v1";
pub const MIN_CURVE_POINTS: usize = 8;
pub const DEFAULT_REL_TOL: f64 = 1e-3;

/// `n` log-spaced temperatures over `[t_min, t_max]`, endpoints exact.
pub fn log_spaced(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(Error::invalid("t_grid", format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
    }
    if n < 2 {
        return Err(Error::invalid("t_grid", "need at least two points"));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| match i {
            0 => t_min,
            _ if i == n - 1 => t_max,
            _ => (a + (b - a) * i as f64 / last).exp(),
        })
        .collect())
}

/// 32 log-spaced temperatures over [1 mK, 300 K].
pub fn default_temperature_grid() -> Vec<f64> {
    log_spaced(1e-3, 300.0, 32).expect("valid constant grid")
}

/// FWHM of the emission cone at one temperature, with the flat regime
/// reported as [`Error::FlatRegime`].
pub fn forward_fwhm(
    apparatus: &Apparatus,
    tau: f64,
    temperature: f64,
    settings: &ScanSettings,
) -> Result<f64> {
    let model = apparatus.model(tau, temperature)?;
    measure_fwhm(&model, settings).map_err(|e| match e {
        Error::NoHalfCrossing { .. } => Error::FlatRegime { temperature },
        other => other,
    })
}

/// The `r` with an exact degree preimage, so that writing degrees and reading
/// them back reproduces the radians bit for bit.
fn canonical_radians(r: f64) -> f64 {
    let mut r = r;
    for _ in 0..4 {
        if exact_degrees(r).is_some() {
            return r;
        }
        r = r.to_degrees().to_radians();
    }
    r
}

fn exact_degrees(r: f64) -> Option<f64> {
    let d0 = r.to_degrees();
    let bits = d0.to_bits() as i64;
    (-4i64..=4)
        .map(|k| f64::from_bits((bits + k) as u64))
        .find(|d| d.to_radians() == r)
}

/// Tabulated FWHM(T), bound to one apparatus and pulse duration.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationCurve {
    tau: f64,
    fingerprint: String,
    temperatures: Vec<f64>,
    fwhm: Vec<f64>,
    interp: MonotoneCubic,
}

impl CalibrationCurve {
    /// Validates the invariants: at least [`MIN_CURVE_POINTS`] points,
    /// temperatures strictly increasing, FWHM strictly decreasing.
    pub fn from_points(tau: f64, fingerprint: String, points: &[(f64, f64)]) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid("tau", format!("must be positive, got {tau}")));
        }
        if points.len() < MIN_CURVE_POINTS {
            return Err(Error::invalid(
                "calibration",
                format!("need at least {MIN_CURVE_POINTS} points, got {}", points.len()),
            ));
        }
        if points.iter().any(|&(t, f)| !(t > 0.0 && t.is_finite() && f > 0.0 && f.is_finite())) {
            return Err(Error::invalid("calibration", "temperatures and widths must be positive"));
        }
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::invalid("calibration", "temperatures must be strictly increasing"));
        }
        let bad: Vec<usize> = (1..points.len())
            .filter(|&i| !(points[i].1 < points[i - 1].1))
            .collect();
        if !bad.is_empty() {
            return Err(Error::NonMonotoneCurve { indices: bad });
        }
        let temperatures: Vec<f64> = points.iter().map(|p| p.0).collect();
        let fwhm: Vec<f64> = points.iter().map(|p| canonical_radians(p.1)).collect();
        if fwhm.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::NonMonotoneCurve { indices: vec![] });
        }
        // Interpolate ln T against ln FWHM, both reversed so the abscissa increases.
        let xs = fwhm.iter().rev().map(|f| f.ln()).collect();
        let ys = temperatures.iter().rev().map(|t| t.ln()).collect();
        let interp = MonotoneCubic::new(xs, ys)?;
        Ok(CalibrationCurve {
            tau,
            fingerprint,
            temperatures,
            fwhm,
            interp,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    /// Widths in radians, one per temperature.
    pub fn fwhm(&self) -> &[f64] {
        &self.fwhm
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.temperatures.iter().copied().zip(self.fwhm.iter().copied())
    }

    /// `(narrowest, widest)` calibrated width, radians.
    pub fn fwhm_range(&self) -> (f64, f64) {
        (self.fwhm[self.fwhm.len() - 1], self.fwhm[0])
    }

    /// Interpolated temperature for a measured width (radians).
    pub fn invert(&self, fwhm_measured: f64) -> Result<f64> {
        let (lo, hi) = self.fwhm_range();
        if !(fwhm_measured >= lo && fwhm_measured <= hi) {
            return Err(Error::OutOfCalibrationRange {
                fwhm_deg: fwhm_measured.to_degrees(),
                min_deg: lo.to_degrees(),
                max_deg: hi.to_degrees(),
            });
        }
        if let Some(i) = self.fwhm.iter().position(|&f| f == fwhm_measured) {
            return Ok(self.temperatures[i]);
        }
        let ln_t = self
            .interp
            .eval(fwhm_measured.ln())
            .ok_or(Error::OutOfCalibrationRange {
                fwhm_deg: fwhm_measured.to_degrees(),
                min_deg: lo.to_degrees(),
                max_deg: hi.to_degrees(),
            })?;
        let (t_min, t_max) = (self.temperatures[0], self.temperatures[self.temperatures.len() - 1]);
        Ok(ln_t.exp().clamp(t_min, t_max))
    }

    /// Knot temperatures bracketing a measured width, for [`refine_temperature`].
    pub fn bracket(&self, fwhm_measured: f64) -> Result<(f64, f64)> {
        self.invert(fwhm_measured)?;
        let n = self.fwhm.len();
        let i = (1..n).find(|&i| self.fwhm[i] <= fwhm_measured).unwrap_or(n - 1);
        Ok((self.temperatures[i - 1], self.temperatures[i]))
    }

    /// Comment header, then `temperature_K,fwhm_deg` rows.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# fingerprint={}", self.fingerprint)?;
        writeln!(out, "# tau_s={:.16e}", self.tau)?;
        writeln!(out, "# schema={SCHEMA}")?;
        writeln!(out, "temperature_K,fwhm_deg")?;
        for (t, f) in self.points() {
            let deg = exact_degrees(f).unwrap_or_else(|| f.to_degrees());
            writeln!(out, "{t:.16e},{deg:.16e}")?;
        }
        Ok(())
    }

    /// Parses a saved curve. With `expected_fingerprint`, a curve made for a
    /// different apparatus or pulse is rejected.
    pub fn load<R: BufRead>(source: R, expected_fingerprint: Option<&str>) -> Result<Self> {
        let mut fingerprint = None;
        let mut tau = None;
        let mut schema = None;
        let mut header_seen = false;
        let mut points = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            let n = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if header_seen {
                    return Err(Error::format(n, "comment after the column header"));
                }
                let (key, value) = meta
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| Error::format(n, "expected `# key=value`"))?;
                let slot = match key.trim() {
                    "fingerprint" => &mut fingerprint,
                    "tau_s" => &mut tau,
                    "schema" => &mut schema,
                    other => return Err(Error::format(n, format!("unknown header key `{other}`"))),
                };
                if slot.replace(value.trim().to_string()).is_some() {
                    return Err(Error::format(n, format!("duplicate header key `{}`", key.trim())));
                }
                continue;
            }
            if !header_seen {
                if line != "temperature_K,fwhm_deg" {
                    return Err(Error::format(n, "expected column header `temperature_K,fwhm_deg`"));
                }
                header_seen = true;
                continue;
            }
            let (t, f) = line
                .split_once(',')
                .ok_or_else(|| Error::format(n, "expected two comma-separated values"))?;
            let t: f64 = t.trim().parse().map_err(|_| Error::format(n, "bad temperature"))?;
            let f: f64 = f.trim().parse().map_err(|_| Error::format(n, "bad fwhm"))?;
            points.push((t, f.to_radians()));
        }
        let fingerprint = fingerprint.ok_or_else(|| Error::format(0, "missing `# fingerprint=`"))?;
        let tau = tau.ok_or_else(|| Error::format(0, "missing `# tau_s=`"))?;
        let schema = schema.ok_or_else(|| Error::format(0, "missing `# schema=`"))?;
        if schema != SCHEMA {
            return Err(Error::format(0, format!("unsupported schema `{schema}`")));
        }
        if !header_seen {
            return Err(Error::format(0, "missing column header"));
        }
        let tau: f64 = tau.parse().map_err(|_| Error::format(0, "bad tau_s"))?;
        if let Some(expected) = expected_fingerprint {
            if expected != fingerprint {
                return Err(Error::FingerprintMismatch {
                    expected: expected.to_string(),
                    found: fingerprint,
                });
            }
        }
        Self::from_points(tau, fingerprint, &points)
    }
}

/// Forward widths for every grid temperature, computed concurrently.
fn forward_widths(
    apparatus: &Apparatus,
    tau: f64,
    t_grid: &[f64],
    settings: &ScanSettings,
) -> Result<Vec<Result<f64>>> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("t_grid", "temperatures must be positive"));
    }
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("t_grid", "must be strictly increasing"));
    }
    Ok(t_grid
        .par_iter()
        .map(|&t| forward_fwhm(apparatus, tau, t, settings))
        .collect())
}

/// Builds the calibration curve; any flat-regime temperature is an error.
pub fn calibrate(
    apparatus: &Apparatus,
    tau: f64,
    t_grid: &[f64],
    settings: &ScanSettings,
) -> Result<CalibrationCurve> {
    let widths = forward_widths(apparatus, tau, t_grid, settings)?;
    let mut points = Vec::with_capacity(t_grid.len());
    for (&t, w) in t_grid.iter().zip(widths) {
        points.push((t, w?));
    }
    CalibrationCurve::from_points(tau, apparatus.fingerprint(tau), &points)
}

/// Like [`calibrate`], but drops flat-regime temperatures and returns them.
pub fn calibrate_trimmed(
    apparatus: &Apparatus,
    tau: f64,
    t_grid: &[f64],
    settings: &ScanSettings,
) -> Result<(CalibrationCurve, Vec<f64>)> {
    let widths = forward_widths(apparatus, tau, t_grid, settings)?;
    let mut points = Vec::with_capacity(t_grid.len());
    let mut dropped = Vec::new();
    let mut coldest_flat = None;
    for (&t, w) in t_grid.iter().zip(widths) {
        match w {
            Ok(f) => points.push((t, f)),
            Err(Error::FlatRegime { temperature }) => {
                dropped.push(temperature);
                coldest_flat = Some(temperature);
            }
            Err(e) => return Err(e),
        }
    }
    if points.len() < MIN_CURVE_POINTS {
        return Err(Error::FlatRegime {
            temperature: coldest_flat.unwrap_or(t_grid[0]),
        });
    }
    let curve = CalibrationCurve::from_points(tau, apparatus.fingerprint(tau), &points)?;
    Ok((curve, dropped))
}

/// Interpolated temperature for a measured width (radians).
pub fn invert_temperature(curve: &CalibrationCurve, fwhm_measured: f64) -> Result<f64> {
    curve.invert(fwhm_measured)
}

/// Bisection in `ln T` on the forward model until the bracket's relative
/// width is at most `rel_tol`; returns the bracket's geometric midpoint.
///
/// The forward width at `bracket.0` must exceed `fwhm_measured` (a flat cone
/// counts as infinitely wide) and the width at `bracket.1` must not.
pub fn refine_temperature(
    apparatus: &Apparatus,
    tau: f64,
    fwhm_measured: f64,
    bracket: (f64, f64),
    rel_tol: f64,
    settings: &ScanSettings,
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    let invalid = Error::BracketInvalid { lo, hi };
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(invalid);
    }
    if !(rel_tol > 0.0) {
        return Err(Error::invalid("rel_tol", format!("must be positive, got {rel_tol}")));
    }
    // Width above the target means "too cold".
    let too_cold = |t: f64| -> Result<bool> {
        match forward_fwhm(apparatus, tau, t, settings) {
            Ok(f) => Ok(f > fwhm_measured),
            Err(Error::FlatRegime { .. }) => Ok(true),
            Err(e) => Err(e),
        }
    };
    if !too_cold(lo)? || too_cold(hi)? {
        return Err(invalid);
    }
    while hi / lo - 1.0 > rel_tol {
        let mid = (lo * hi).sqrt();
        if too_cold(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}
