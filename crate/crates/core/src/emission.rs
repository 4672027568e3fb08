//! Angular distribution of the emitted Stokes photons and its cone width.
//!
//! With uniformly distributed mean positions the emission probability toward
//! `k` is `∫_V |S(r, k)|² dV`, and since `S` factorizes over the cell axes so
//! does the volume integral: `P(k) = Π_axes ∫_{-L/2}^{L/2} |G(c)|² dc`. Each
//! mean-position integral uses a fixed Gauss–Legendre rule. When the motion
//! radius is small against the cell, `|G|²` has edge layers of width ~A at
//! the cell walls, so the rule is split into two narrow edge panels and one
//! interior panel.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    beam_intensity_integral, windowed_beam_fourier, AxisKernel, ExperimentModel, StokesDirection,
    INFINITE_BEAM,
};
use crate::quadrature::GaussLegendre;

/// Mean-position quadrature order per axis.
pub const DEFAULT_NODES_PER_AXIS: usize = 256;
/// Default scan range, 20°.
pub const DEFAULT_THETA_MAX: f64 = 20.0 * PI / 180.0;
pub const DEFAULT_SCAN_POINTS: usize = 2001;

/// Edge panels span this many motion radii.
const EDGE_PANEL_RADII: f64 = 10.0;
/// Upper bound on automatic range changes in [`measure_fwhm`].
const MAX_RANGE_ADJUSTMENTS: usize = 16;

/// Gauss–Legendre nodes and weights over one cell edge, adapted to the
/// motion radius.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanPositionRule {
    nodes: Vec<(f64, f64)>,
    /// Width of each edge panel, zero for a single-panel rule.
    edge_width: f64,
}

impl MeanPositionRule {
    /// `n` nodes in total over `[-L/2, L/2]`: a single panel when the edge
    /// layers cover a sizeable part of the window, otherwise `n/4` nodes in
    /// each of two edge panels of width 10·A and `n/2` in the interior.
    pub fn new(motion_radius: f64, edge: f64, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::invalid("nodes_per_axis", format!("must be at least 8, got {n}")));
        }
        let half = 0.5 * edge;
        let edge_width = EDGE_PANEL_RADII * motion_radius;
        if edge_width >= 0.25 * edge {
            let rule = GaussLegendre::new(n);
            return Ok(MeanPositionRule {
                nodes: rule.mapped(-half, half).collect(),
                edge_width: 0.0,
            });
        }
        let side = GaussLegendre::new(n / 4);
        let middle = GaussLegendre::new(n - 2 * (n / 4));
        let inner = half - edge_width;
        let nodes = side
            .mapped(-half, -inner)
            .chain(middle.mapped(-inner, inner))
            .chain(side.mapped(inner, half))
            .collect();
        Ok(MeanPositionRule { nodes, edge_width })
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// `(c, weight)` pairs restricted to the edge panels (all nodes for a
    /// single-panel rule).
    fn edge_nodes(&self) -> impl Iterator<Item = &(f64, f64)> + '_ {
        let all = self.edge_width == 0.0;
        let n = self.nodes.len();
        let quarter = n / 4;
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(i, _)| all || *i < quarter || *i >= n - quarter)
            .map(|(_, p)| p)
    }
}

/// `∫ |G(c)|² dc` over one axis.
pub(crate) fn axis_intensity(kernel: &AxisKernel, rule: &MeanPositionRule) -> Result<f64> {
    let mut sum = 0.0;
    for &(c, w) in rule.nodes() {
        sum += w * kernel.at(c)?.norm_sqr();
    }
    Ok(sum)
}

/// `∫ G(c) dc` over one axis: the oscillating main term in closed form, the
/// smooth edge correction by quadrature over the edge panels.
pub(crate) fn axis_mean(kernel: &AxisKernel, rule: &MeanPositionRule) -> Result<Complex64> {
    let mut edge = Complex64::new(0.0, 0.0);
    for &(c, w) in rule.edge_nodes() {
        edge += w * kernel.edge_term(c)?;
    }
    Ok(kernel.main_integral()? - edge)
}

/// Per-axis quadrature rules for one model, reused across directions.
#[derive(Clone, Debug)]
pub struct EmissionIntegrator {
    model: ExperimentModel,
    rules: [MeanPositionRule; 3],
}

impl EmissionIntegrator {
    pub fn new(model: &ExperimentModel, nodes_per_axis: usize) -> Result<Self> {
        let a = model.motion().radius();
        let [lx, ly, lz] = model.cell().edges();
        let rules = [
            MeanPositionRule::new(a, lx, nodes_per_axis)?,
            MeanPositionRule::new(a, ly, nodes_per_axis)?,
            MeanPositionRule::new(a, lz, nodes_per_axis)?,
        ];
        Ok(EmissionIntegrator {
            model: *model,
            rules,
        })
    }

    pub fn model(&self) -> &ExperimentModel {
        &self.model
    }

    /// `∫_V |S(r, k)|² dV`.
    pub fn emission_probability(&self, dir: StokesDirection) -> Result<f64> {
        let kernels = self.model.axis_kernels(dir)?;
        let mut p = 1.0;
        for (kernel, rule) in kernels.iter().zip(&self.rules) {
            p *= axis_intensity(kernel, rule)?;
        }
        Ok(p)
    }

    /// `(∫_V S dV, ∫_V |S|² dV)`.
    pub fn mean_and_intensity(&self, dir: StokesDirection) -> Result<(Complex64, f64)> {
        let kernels = self.model.axis_kernels(dir)?;
        let mut mean = Complex64::new(1.0, 0.0);
        let mut intensity = 1.0;
        for (kernel, rule) in kernels.iter().zip(&self.rules) {
            mean *= axis_mean(kernel, rule)?;
            intensity *= axis_intensity(kernel, rule)?;
        }
        Ok((mean, intensity))
    }
}

/// `∫_V |S(r, k)|² dV` with the default quadrature order.
pub fn emission_probability(model: &ExperimentModel, dir: StokesDirection) -> Result<f64> {
    EmissionIntegrator::new(model, DEFAULT_NODES_PER_AXIS)?.emission_probability(dir)
}

/// Cold limit `∫_V |u(r⊥)|² dV`: the atoms stay put, every phase is known,
/// and the emission loses all directionality.
pub fn cold_limit_distribution(model: &ExperimentModel, _dir: StokesDirection) -> f64 {
    let w = model.pump().waist();
    let cell = model.cell();
    beam_intensity_integral(w, cell.lx()) * beam_intensity_integral(w, cell.ly()) * cell.lz()
}

/// Hot limit `|∫_V u(r⊥) exp(-iΔk·r) dV|²`: each atom samples the whole cell
/// and the emission is the diffraction pattern of the pumped volume.
pub fn hot_limit_distribution(model: &ExperimentModel, dir: StokesDirection) -> Result<f64> {
    let dk = model.delta_k(dir);
    let w = model.pump().waist();
    let [lx, ly, lz] = model.cell().edges();
    let fx = windowed_beam_fourier(dk[0], w, lx)?;
    let fy = windowed_beam_fourier(dk[1], w, ly)?;
    let fz = windowed_beam_fourier(dk[2], INFINITE_BEAM, lz)?;
    Ok(fx.norm_sqr() * fy.norm_sqr() * fz.norm_sqr())
}

/// Uniform polar-angle grid `[0, theta_max]` with `n` points.
pub fn theta_grid(theta_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(theta_max > 0.0 && theta_max <= PI) {
        return Err(Error::invalid("theta_max", format!("must lie in (0, π], got {theta_max}")));
    }
    if n < 3 {
        return Err(Error::invalid("n_points", format!("must be at least 3, got {n}")));
    }
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { theta_max } else { theta_max * i as f64 / last })
        .collect())
}

/// Evaluates `f` at each direction of the scan plane, in parallel, keeping
/// grid order.
pub(crate) fn scan_map<F>(phi: f64, thetas: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(StokesDirection) -> Result<f64> + Sync,
{
    thetas
        .par_iter()
        .map(|&t| f(StokesDirection::new(t, phi)?))
        .collect()
}

/// Peak-normalized `P(θ)` along one azimuth.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularDistribution {
    phi: f64,
    thetas: Vec<f64>,
    values: Vec<f64>,
}

impl AngularDistribution {
    /// Validates the grid and normalizes `raw` so that its maximum is 1.
    pub fn from_raw(phi: f64, thetas: Vec<f64>, raw: Vec<f64>) -> Result<Self> {
        if thetas.len() != raw.len() || thetas.len() < 3 {
            return Err(Error::invalid(
                "distribution",
                format!("need ≥ 3 matching samples, got {} and {}", thetas.len(), raw.len()),
            ));
        }
        if thetas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("thetas", "must be strictly increasing"));
        }
        if raw.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("values", "must be finite and non-negative"));
        }
        let peak = raw.iter().copied().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::invalid("values", "all samples are zero"));
        }
        let values = raw
            .iter()
            .map(|&v| if v == peak { 1.0 } else { (v / peak).min(1.0) })
            .collect();
        Ok(AngularDistribution { phi, thetas, values })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// CSV with header `theta_deg,p_normalized`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta_deg,p_normalized")?;
        for (t, v) in self.thetas.iter().zip(&self.values) {
            writeln!(out, "{:.15e},{:.15e}", t.to_degrees(), v)?;
        }
        Ok(())
    }
}

/// Scans `P(θ)` on a uniform grid and peak-normalizes it.
pub fn angular_scan(
    model: &ExperimentModel,
    phi: f64,
    theta_max: f64,
    n_points: usize,
) -> Result<AngularDistribution> {
    angular_scan_with(&EmissionIntegrator::new(model, DEFAULT_NODES_PER_AXIS)?, phi, theta_max, n_points)
}

pub fn angular_scan_with(
    integrator: &EmissionIntegrator,
    phi: f64,
    theta_max: f64,
    n_points: usize,
) -> Result<AngularDistribution> {
    let thetas = theta_grid(theta_max, n_points)?;
    let raw = scan_map(phi, &thetas, |d| integrator.emission_probability(d))?;
    AngularDistribution::from_raw(phi, thetas, raw)
}

/// Half-maximum crossing angle: the first grid interval where the
/// distribution drops to 0.5, interpolated linearly.
fn half_crossing(dist: &AngularDistribution) -> Result<f64> {
    let v = &dist.values;
    let t = &dist.thetas;
    if v[0] != 1.0 {
        return Err(Error::invalid("distribution", "peak is not at θ = 0"));
    }
    for i in 1..v.len() {
        if v[i] <= 0.5 {
            let f = (v[i - 1] - 0.5) / (v[i - 1] - v[i]);
            return Ok(t[i - 1] + f * (t[i] - t[i - 1]));
        }
    }
    Err(Error::NoHalfCrossing {
        min_value: v.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Full width at half maximum, `2·θ_half`, using `P(θ) = P(-θ)`.
pub fn fwhm(dist: &AngularDistribution) -> Result<f64> {
    Ok(2.0 * half_crossing(dist)?)
}

/// Settings for [`measure_fwhm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanSettings {
    pub phi: f64,
    pub theta_max: f64,
    pub n_points: usize,
    pub nodes_per_axis: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            phi: 0.0,
            theta_max: DEFAULT_THETA_MAX,
            n_points: DEFAULT_SCAN_POINTS,
            nodes_per_axis: DEFAULT_NODES_PER_AXIS,
        }
    }
}

/// FWHM of the emission cone with automatic range control.
///
/// The range is doubled (up to π) while no half crossing is found; when the
/// crossing falls in the first eighth of the range the scan is repeated over
/// four half-widths so that the crossing is resolved by many grid points.
pub fn measure_fwhm(model: &ExperimentModel, settings: &ScanSettings) -> Result<f64> {
    let integrator = EmissionIntegrator::new(model, settings.nodes_per_axis)?;
    let mut range = settings.theta_max;
    let mut last_error = None;
    for _ in 0..MAX_RANGE_ADJUSTMENTS {
        let dist = angular_scan_with(&integrator, settings.phi, range, settings.n_points)?;
        match half_crossing(&dist) {
            Ok(half) if half < range / 8.0 && half > 0.0 => range = 4.0 * half,
            Ok(half) => return Ok(2.0 * half),
            Err(e @ Error::NoHalfCrossing { .. }) => {
                if range >= PI {
                    return Err(e);
                }
                range = (2.0 * range).min(PI);
                last_error = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_error.unwrap_or(Error::QuadratureNonConvergence { evaluations: 0 }))
}
