//! `section.key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment. Unknown or repeated keys
//! are rejected; missing keys take the ⁸⁷Rb pencil-cell defaults.

use stokes_core::emission::{DEFAULT_NODES_PER_AXIS, DEFAULT_SCAN_POINTS};
use stokes_core::thermometry::DEFAULT_REL_TOL;
use stokes_core::{Apparatus, AtomSpecies, CloudGeometry, ScanSettings};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Validation(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub mass_kg: f64,
    pub wavelength_m: f64,
    pub lx_m: f64,
    pub ly_m: f64,
    pub lz_m: f64,
    pub waist_m: f64,
    pub tau_s: f64,
    pub phi_deg: f64,
    pub theta_max_deg: f64,
    pub points: usize,
    pub nodes_per_axis: usize,
    pub t_min_k: f64,
    pub t_max_k: f64,
    pub n_points: usize,
    pub rel_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cell = CloudGeometry::pencil_cell();
        RunConfig {
            mass_kg: AtomSpecies::RB87_MASS,
            wavelength_m: AtomSpecies::RB87_WAVELENGTH,
            lx_m: cell.lx(),
            ly_m: cell.ly(),
            lz_m: cell.lz(),
            waist_m: 2e-3,
            tau_s: 10e-6,
            phi_deg: 0.0,
            theta_max_deg: 20.0,
            points: DEFAULT_SCAN_POINTS,
            nodes_per_axis: DEFAULT_NODES_PER_AXIS,
            t_min_k: 1e-3,
            t_max_k: 300.0,
            n_points: 32,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

enum Slot<'a> {
    Real(&'a mut f64),
    Count(&'a mut usize),
}

impl RunConfig {
    fn slot(&mut self, key: &str) -> Option<Slot<'_>> {
        use Slot::{Count, Real};
        Some(match key {
            "species.mass_kg" => Real(&mut self.mass_kg),
            "species.wavelength_m" => Real(&mut self.wavelength_m),
            "cell.lx_m" => Real(&mut self.lx_m),
            "cell.ly_m" => Real(&mut self.ly_m),
            "cell.lz_m" => Real(&mut self.lz_m),
            "pump.waist_m" => Real(&mut self.waist_m),
            "pump.tau_s" => Real(&mut self.tau_s),
            "scan.phi_deg" => Real(&mut self.phi_deg),
            "scan.theta_max_deg" => Real(&mut self.theta_max_deg),
            "scan.points" => Count(&mut self.points),
            "quadrature.nodes_per_axis" => Count(&mut self.nodes_per_axis),
            "thermometry.t_min_K" => Real(&mut self.t_min_k),
            "thermometry.t_max_K" => Real(&mut self.t_max_k),
            "thermometry.n_points" => Count(&mut self.n_points),
            "thermometry.rel_tol" => Real(&mut self.rel_tol),
            _ => return None,
        })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Validation(m));
        for (name, v) in [
            ("species.mass_kg", self.mass_kg),
            ("species.wavelength_m", self.wavelength_m),
            ("cell.lx_m", self.lx_m),
            ("cell.ly_m", self.ly_m),
            ("cell.lz_m", self.lz_m),
            ("pump.waist_m", self.waist_m),
            ("pump.tau_s", self.tau_s),
            ("thermometry.t_min_K", self.t_min_k),
            ("thermometry.t_max_K", self.t_max_k),
            ("thermometry.rel_tol", self.rel_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if !self.phi_deg.is_finite() {
            return fail("scan.phi_deg must be finite".into());
        }
        if !(self.theta_max_deg > 0.0 && self.theta_max_deg <= 180.0) {
            return fail(format!("scan.theta_max_deg must lie in (0, 180], got {}", self.theta_max_deg));
        }
        if self.points < 3 {
            return fail(format!("scan.points must be at least 3, got {}", self.points));
        }
        if self.nodes_per_axis < 8 {
            return fail(format!("quadrature.nodes_per_axis must be at least 8, got {}", self.nodes_per_axis));
        }
        if self.t_min_k >= self.t_max_k {
            return fail(format!(
                "thermometry.t_min_K ({}) must be below thermometry.t_max_K ({})",
                self.t_min_k, self.t_max_k
            ));
        }
        if self.n_points < stokes_core::thermometry::MIN_CURVE_POINTS {
            return fail(format!(
                "thermometry.n_points must be at least {}, got {}",
                stokes_core::thermometry::MIN_CURVE_POINTS,
                self.n_points
            ));
        }
        if self.rel_tol >= 1.0 {
            return fail(format!("thermometry.rel_tol must be below 1, got {}", self.rel_tol));
        }
        Ok(())
    }

    pub fn apparatus(&self) -> Result<Apparatus, stokes_core::Error> {
        Apparatus::new(
            AtomSpecies::new(self.mass_kg, self.wavelength_m)?,
            CloudGeometry::new(self.lx_m, self.ly_m, self.lz_m)?,
            self.waist_m,
        )
    }

    pub fn scan_settings(&self) -> ScanSettings {
        ScanSettings {
            phi: self.phi_deg.to_radians(),
            theta_max: self.theta_max_deg.to_radians(),
            n_points: self.points,
            nodes_per_axis: self.nodes_per_axis,
        }
    }
}

pub fn parse_config(source: &str) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let parse_err = |message: String| ConfigError::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err("expected `section.key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(parse_err(format!("duplicate key `{key}`")));
        }
        let slot = config
            .slot(key)
            .ok_or_else(|| parse_err(format!("unknown key `{key}`")))?;
        match slot {
            Slot::Real(r) => {
                *r = value
                    .parse()
                    .map_err(|_| parse_err(format!("`{key}` expects a number, got `{value}`")))?
            }
            Slot::Count(c) => {
                *c = value.parse().map_err(|_| {
                    parse_err(format!("`{key}` expects a non-negative integer, got `{value}`"))
                })?
            }
        }
        seen.push(key.to_string());
    }
    config.validate()?;
    Ok(config)
}

/// Temperature literal in kelvin, optionally suffixed: `300K`, `1mK`,
/// `100uK` (or `µK`), `5nK`, or a bare number.
pub fn parse_temperature(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (number, exponent) = [("nK", -9), ("uK", -6), ("µK", -6), ("mK", -3), ("K", 0)]
        .iter()
        .find_map(|(suffix, e)| t.strip_suffix(suffix).map(|n| (n.trim(), *e)))
        .unwrap_or((t, 0));
    let bad = || format!("invalid temperature `{text}` (examples: 300K, 1mK, 100uK)");
    if number.is_empty() {
        return Err(bad());
    }
    // Shift the decimal exponent textually so `100uK` is exactly 1e-4.
    let value: f64 = if exponent == 0 || number.contains(['e', 'E']) {
        number.parse::<f64>().map_err(|_| bad())? * 10f64.powi(exponent)
    } else {
        format!("{number}e{exponent}").parse().map_err(|_| bad())?
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(format!("temperature must be positive, got `{text}`"));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.lx_m, c.ly_m, c.lz_m, c.waist_m), (2e-3, 2e-3, 30e-3, 2e-3));
    }

    #[test]
    fn values_and_comments() {
        let c = parse_config("# header\npump.tau_s = 1e-8   # ns pulse\n\nscan.points=11\n").unwrap();
        assert_eq!(c.tau_s, 1e-8);
        assert_eq!(c.points, 11);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_config("cell.lx_m = -1"), Err(ConfigError::Validation(_))));
        assert_eq!(
            parse_config("\ncell.depth = 3"),
            Err(ConfigError::Parse { line: 2, message: "unknown key `cell.depth`".into() })
        );
        assert!(matches!(parse_config("pump.tau_s = 1\npump.tau_s = 2"), Err(ConfigError::Parse { line: 2, .. })));
        assert!(matches!(parse_config("scan.points = 2"), Err(ConfigError::Validation(_))));
        assert!(matches!(parse_config("scan.points = x"), Err(ConfigError::Parse { .. })));
        assert!(matches!(parse_config("just text"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_config("thermometry.t_min_K = 5\nthermometry.t_max_K = 1"),
            Err(ConfigError::Validation(_))
        ));
    }

    #[test]
    fn temperature_literals() {
        assert_eq!(parse_temperature("100uK"), Ok(1e-4));
        assert_eq!(parse_temperature("100µK"), Ok(1e-4));
        assert_eq!(parse_temperature("1mK"), Ok(1e-3));
        assert_eq!(parse_temperature("300K"), Ok(300.0));
        assert_eq!(parse_temperature("2.5"), Ok(2.5));
        assert_eq!(parse_temperature("3nK"), Ok(3e-9));
        assert!(parse_temperature("K").is_err());
        assert!(parse_temperature("-1K").is_err());
        assert!(parse_temperature("warm").is_err());
    }
}
