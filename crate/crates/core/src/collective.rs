//! Weight of the symmetric collective state in the heralded atomic state.
//!
//! Detecting a Stokes photon with wavevector `k` leaves the ensemble in
//! `Σᵢ S(rᵢ, k)|g…sᵢ…g⟩`, up to normalization. Its squared overlap with the
//! symmetric state `(1/√N) Σᵢ |g…sᵢ…g⟩` is
//! `|Σᵢ S|² / (N Σᵢ |S|²)`, which under the continuum substitution becomes
//!
//! ```text
//! W(k) = |∫_V S dV|² / (V ∫_V |S|² dV)
//! ```
//!
//! The atom number cancels. By Cauchy–Schwarz `0 ≤ W ≤ 1`, with equality
//! exactly when `S` does not depend on the atom position.

use std::io::Write;

use crate::emission::{
    angular_scan_with, fwhm, scan_map, theta_grid, EmissionIntegrator, DEFAULT_NODES_PER_AXIS,
};
use crate::error::{Error, Result};
use crate::model::{ExperimentModel, StokesDirection};

/// Rounding slack allowed above 1 before a weight is rejected.
pub const WEIGHT_SLACK: f64 = 1e-10;

impl EmissionIntegrator {
    /// `|∫_V S dV|² / (V ∫_V |S|² dV)`.
    pub fn symmetric_weight(&self, dir: StokesDirection) -> Result<f64> {
        let (mean, intensity) = self.mean_and_intensity(dir)?;
        if intensity <= 0.0 {
            return Err(Error::OverflowUnrepresentable);
        }
        Ok(mean.norm_sqr() / (self.model().cell().volume() * intensity))
    }
}

pub fn symmetric_weight(model: &ExperimentModel, dir: StokesDirection) -> Result<f64> {
    EmissionIntegrator::new(model, DEFAULT_NODES_PER_AXIS)?.symmetric_weight(dir)
}

/// Symmetric-state weight along one azimuth.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightProfile {
    thetas: Vec<f64>,
    weights: Vec<f64>,
    fwhm_marker: Option<f64>,
}

impl WeightProfile {
    pub fn new(thetas: Vec<f64>, weights: Vec<f64>, fwhm_marker: Option<f64>) -> Result<Self> {
        if thetas.len() != weights.len() {
            return Err(Error::invalid("weights", "length differs from the angle grid"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && **w <= 1.0 + WEIGHT_SLACK)) {
            return Err(Error::invalid("weights", format!("weight {w} outside [0, 1]")));
        }
        Ok(WeightProfile {
            thetas,
            weights,
            fwhm_marker,
        })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// FWHM of the emission cone on the same grid, if it has one.
    pub fn fwhm_marker(&self) -> Option<f64> {
        self.fwhm_marker
    }

    /// CSV with header `theta_deg,symmetric_weight`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta_deg,symmetric_weight")?;
        for (t, w) in self.thetas.iter().zip(&self.weights) {
            writeln!(out, "{:.15e},{:.15e}", t.to_degrees(), w)?;
        }
        Ok(())
    }
}

pub fn weight_scan(
    model: &ExperimentModel,
    phi: f64,
    theta_max: f64,
    n_points: usize,
) -> Result<WeightProfile> {
    weight_scan_with(&EmissionIntegrator::new(model, DEFAULT_NODES_PER_AXIS)?, phi, theta_max, n_points)
}

pub fn weight_scan_with(
    integrator: &EmissionIntegrator,
    phi: f64,
    theta_max: f64,
    n_points: usize,
) -> Result<WeightProfile> {
    let thetas = theta_grid(theta_max, n_points)?;
    let weights = scan_map(phi, &thetas, |d| integrator.symmetric_weight(d))?;
    let marker = match fwhm(&angular_scan_with(integrator, phi, theta_max, n_points)?) {
        Ok(width) => Some(width),
        Err(Error::NoHalfCrossing { .. }) => None,
        Err(e) => return Err(e),
    };
    WeightProfile::new(thetas, weights, marker)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Apparatus;

    #[test]
    fn position_independent_amplitude_gives_unit_weight() {
        let model = Apparatus::rubidium_pencil_cell().model_with_radius(1e-5, 3.0).unwrap();
        let w = symmetric_weight(&model, StokesDirection::new(0.0, 0.0).unwrap()).unwrap();
        assert!((w - 1.0).abs() < 1e-6, "{w}");
    }

    #[test]
    fn cold_atoms_off_axis_have_small_weight() {
        let model = Apparatus::rubidium_pencil_cell().model_with_radius(1e-5, 1e-6).unwrap();
        let w0 = symmetric_weight(&model, StokesDirection::new(0.0, 0.0).unwrap()).unwrap();
        let w1 = symmetric_weight(&model, StokesDirection::new(0.05, 0.0).unwrap()).unwrap();
        assert!(w0 <= 1.0 + WEIGHT_SLACK && w1 < w0, "{w0} {w1}");
    }

    #[test]
    fn profile_validates_weights() {
        assert!(WeightProfile::new(vec![0.0], vec![1.5], None).is_err());
        assert!(WeightProfile::new(vec![0.0, 1.0], vec![0.5], None).is_err());
        let p = WeightProfile::new(vec![0.0, 0.1], vec![1.0, 0.25], Some(0.2)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta_deg,symmetric_weight\n0.000000000000000e0,1.000000000000000e0\n"));
    }
}
