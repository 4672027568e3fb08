//! Physical parameters and the Stokes emission amplitude.
//!
//! An atom with mean position `rᵢ` smears over a Gaussian of radius
//! `A = v_a·τ` during the pump pulse. Its emission amplitude toward wavevector
//! `k` is the overlap of that smear with the pump profile and the phase
//! `exp(-iΔk·r)`, clipped to the cell. The integral factorizes over the three
//! cell axes; each factor is the windowed Gaussian Fourier integral
//!
//! ```text
//! G(c, q) = ∫_{-L/2}^{L/2} dx (1/(√π A)) exp(-(x-c)²/A²) exp(-x²/w²) exp(-iqx)
//!         = (σ/2A) exp(C) [erf((L/2 - b)/σ) + erf((L/2 + b)/σ)]
//! ```
//!
//! with `σ⁻² = A⁻² + w⁻²`, `b = σ²(c/A² - iq/2)` and `C = b²/σ² - c²/A²`.
//! The transverse axes use the pump waist `w = r₀`; the propagation axis has
//! no beam envelope (`w = ∞`).

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::cerf::{erf_real, pair_erf_diff_scaled, ErfEndpoint};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_kronrod;

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Beam waist value meaning "no transverse envelope".
pub const INFINITE_BEAM: f64 = f64::INFINITY;

/// Models colder than this are rejected; the cold limit is reached with small
/// but finite motion radii.
pub const MIN_TEMPERATURE: f64 = 1e-9;

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite and positive, got {value}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomSpecies {
    mass: f64,
    transition_wavelength: f64,
}

impl AtomSpecies {
    pub const RB87_MASS: f64 = 1.443_16e-25;
    /// D1 line.
    pub const RB87_WAVELENGTH: f64 = 794.98e-9;

    pub fn new(mass: f64, transition_wavelength: f64) -> Result<Self> {
        Ok(AtomSpecies {
            mass: require_positive("mass", mass)?,
            transition_wavelength: require_positive("transition_wavelength", transition_wavelength)?,
        })
    }

    pub fn rubidium87() -> Self {
        AtomSpecies {
            mass: Self::RB87_MASS,
            transition_wavelength: Self::RB87_WAVELENGTH,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn transition_wavelength(&self) -> f64 {
        self.transition_wavelength
    }

    /// Pump (and Stokes) wavenumber `k₀ = 2π/λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.transition_wavelength
    }
}

impl Default for AtomSpecies {
    fn default() -> Self {
        Self::rubidium87()
    }
}

/// Rectangular cell `[-lx/2, lx/2] × [-ly/2, ly/2] × [-lz/2, lz/2]`, pump along z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloudGeometry {
    lx: f64,
    ly: f64,
    lz: f64,
}

impl CloudGeometry {
    pub fn new(lx: f64, ly: f64, lz: f64) -> Result<Self> {
        Ok(CloudGeometry {
            lx: require_positive("lx", lx)?,
            ly: require_positive("ly", ly)?,
            lz: require_positive("lz", lz)?,
        })
    }

    /// 2 mm × 2 mm × 30 mm pencil cell.
    pub fn pencil_cell() -> Self {
        CloudGeometry {
            lx: 2e-3,
            ly: 2e-3,
            lz: 30e-3,
        }
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn lz(&self) -> f64 {
        self.lz
    }

    pub fn edges(&self) -> [f64; 3] {
        [self.lx, self.ly, self.lz]
    }

    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.lz
    }

    pub fn max_edge(&self) -> f64 {
        self.lx.max(self.ly).max(self.lz)
    }
}

impl Default for CloudGeometry {
    fn default() -> Self {
        Self::pencil_cell()
    }
}

/// Gaussian pump `u(r⊥) = exp(-(x² + y²)/r₀²)` of duration τ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpPulse {
    waist: f64,
    duration: f64,
}

impl PumpPulse {
    pub fn new(waist: f64, duration: f64) -> Result<Self> {
        Ok(PumpPulse {
            waist: require_positive("waist_r0", waist)?,
            duration: require_positive("duration_tau", duration)?,
        })
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }
}

/// Most probable Maxwell–Boltzmann speed `√(2 k_B T / m)`.
pub fn most_probable_speed(species: &AtomSpecies, temperature: f64) -> Result<f64> {
    if temperature.is_nan() || temperature < 0.0 {
        return Err(Error::NegativeTemperature(temperature));
    }
    if !temperature.is_finite() {
        return Err(Error::invalid("temperature", "must be finite"));
    }
    Ok((2.0 * BOLTZMANN * temperature / species.mass).sqrt())
}

/// Distance `A = v_a·τ` an atom covers during the pulse.
pub fn motion_radius(species: &AtomSpecies, temperature: f64, tau: f64) -> Result<f64> {
    let tau = require_positive("tau", tau)?;
    Ok(most_probable_speed(species, temperature)? * tau)
}

/// Thermal smearing of each atom during the pulse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalMotion {
    radius: f64,
    temperature: f64,
    tau: f64,
}

impl ThermalMotion {
    pub fn from_temperature(species: &AtomSpecies, temperature: f64, tau: f64) -> Result<Self> {
        let radius = motion_radius(species, temperature, tau)?;
        if temperature < MIN_TEMPERATURE {
            return Err(Error::invalid(
                "temperature",
                format!("must be at least {MIN_TEMPERATURE} K, got {temperature}"),
            ));
        }
        Ok(ThermalMotion {
            radius,
            temperature,
            tau,
        })
    }

    /// Motion specified directly by its radius; the temperature is the one
    /// that would produce it.
    pub fn from_radius(species: &AtomSpecies, radius: f64, tau: f64) -> Result<Self> {
        let radius = require_positive("motion_radius", radius)?;
        let tau = require_positive("tau", tau)?;
        let speed = radius / tau;
        let temperature = species.mass * speed * speed / (2.0 * BOLTZMANN);
        if !(temperature >= MIN_TEMPERATURE) || !temperature.is_finite() {
            return Err(Error::invalid(
                "motion_radius",
                format!("implies temperature {temperature} K outside [{MIN_TEMPERATURE}, ∞)"),
            ));
        }
        Ok(ThermalMotion {
            radius,
            temperature,
            tau,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Stokes emission direction: polar angle from the pump axis and azimuth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesDirection {
    theta: f64,
    phi: f64,
}

impl StokesDirection {
    /// `phi` is wrapped into `[0, 2π)`; `theta` must lie in `[0, π]`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid("theta", format!("must lie in [0, π], got {theta}")));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("phi", "must be finite"));
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Ok(StokesDirection { theta, phi })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// `Δk = k - k₀ẑ` with `|k| = k₀`.
pub fn delta_k(species: &AtomSpecies, dir: StokesDirection) -> [f64; 3] {
    let k0 = species.wavenumber();
    let (sin_t, _) = dir.theta.sin_cos();
    let (sin_p, cos_p) = dir.phi.sin_cos();
    let half = (0.5 * dir.theta).sin();
    [
        k0 * sin_t * cos_p,
        k0 * sin_t * sin_p,
        // k₀(cos θ - 1) without the cancellation at small θ
        -2.0 * k0 * half * half,
    ]
}

/// Everything except the temperature: species, cell and pump waist.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Apparatus {
    pub species: AtomSpecies,
    pub cell: CloudGeometry,
    pub beam_waist: f64,
}

impl Apparatus {
    pub fn new(species: AtomSpecies, cell: CloudGeometry, beam_waist: f64) -> Result<Self> {
        Ok(Apparatus {
            species,
            cell,
            beam_waist: require_positive("waist_r0", beam_waist)?,
        })
    }

    /// ⁸⁷Rb in the 2 × 2 × 30 mm cell with a 2 mm pump waist.
    pub fn rubidium_pencil_cell() -> Self {
        Apparatus {
            species: AtomSpecies::rubidium87(),
            cell: CloudGeometry::pencil_cell(),
            beam_waist: 2e-3,
        }
    }

    pub fn model(&self, tau: f64, temperature: f64) -> Result<ExperimentModel> {
        let pump = PumpPulse::new(self.beam_waist, tau)?;
        let motion = ThermalMotion::from_temperature(&self.species, temperature, tau)?;
        Ok(ExperimentModel::from_parts(self.species, self.cell, pump, motion))
    }

    pub fn model_with_radius(&self, tau: f64, radius: f64) -> Result<ExperimentModel> {
        let pump = PumpPulse::new(self.beam_waist, tau)?;
        let motion = ThermalMotion::from_radius(&self.species, radius, tau)?;
        Ok(ExperimentModel::from_parts(self.species, self.cell, pump, motion))
    }

    /// SHA-256 over the exact bit patterns of every parameter and `tau`.
    pub fn fingerprint(&self, tau: f64) -> String {
        let mut canon = String::new();
        for (key, value) in [
            ("mass_kg", self.species.mass),
            ("wavelength_m", self.species.transition_wavelength),
            ("lx_m", self.cell.lx),
            ("ly_m", self.cell.ly),
            ("lz_m", self.cell.lz),
            ("waist_m", self.beam_waist),
            ("tau_s", tau),
        ] {
            let _ = write!(canon, "{key}={:016x};", value.to_bits());
        }
        hex::encode(Sha256::digest(canon.as_bytes()))
    }
}

/// Complete parameter set for one emission calculation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentModel {
    species: AtomSpecies,
    cell: CloudGeometry,
    pump: PumpPulse,
    motion: ThermalMotion,
}

impl ExperimentModel {
    pub fn new(
        species: AtomSpecies,
        cell: CloudGeometry,
        pump: PumpPulse,
        temperature: f64,
    ) -> Result<Self> {
        let motion = ThermalMotion::from_temperature(&species, temperature, pump.duration)?;
        Ok(Self::from_parts(species, cell, pump, motion))
    }

    fn from_parts(
        species: AtomSpecies,
        cell: CloudGeometry,
        pump: PumpPulse,
        motion: ThermalMotion,
    ) -> Self {
        ExperimentModel {
            species,
            cell,
            pump,
            motion,
        }
    }

    pub fn species(&self) -> &AtomSpecies {
        &self.species
    }

    pub fn cell(&self) -> &CloudGeometry {
        &self.cell
    }

    pub fn pump(&self) -> &PumpPulse {
        &self.pump
    }

    pub fn motion(&self) -> &ThermalMotion {
        &self.motion
    }

    pub fn apparatus(&self) -> Apparatus {
        Apparatus {
            species: self.species,
            cell: self.cell,
            beam_waist: self.pump.waist,
        }
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        self.apparatus().model(self.pump.duration, temperature)
    }

    pub fn delta_k(&self, dir: StokesDirection) -> [f64; 3] {
        delta_k(&self.species, dir)
    }

    /// The three 1-D amplitude factors for direction `dir`.
    pub fn axis_kernels(&self, dir: StokesDirection) -> Result<[AxisKernel; 3]> {
        let dk = self.delta_k(dir);
        let a = self.motion.radius;
        let w = self.pump.waist;
        Ok([
            AxisKernel::new(dk[0], a, w, self.cell.lx)?,
            AxisKernel::new(dk[1], a, w, self.cell.ly)?,
            AxisKernel::new(dk[2], a, INFINITE_BEAM, self.cell.lz)?,
        ])
    }
}

/// One axis of the amplitude: `G(c)` for fixed frequency, motion radius, beam
/// waist and window, as a function of the mean position `c`.
///
/// Inside the window `G = M - T`, where the main term `M(c) = (σ/A)·exp(C)`
/// is the unclipped Gaussian overlap and the edge term `T` collects the two
/// window corrections. `M` oscillates in `c`; `T` is smooth and decays away
/// from the window edges on the scale `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisKernel {
    freq: f64,
    edge: f64,
    radius: f64,
    inv_a2: f64,
    inv_w2: f64,
    s2: f64,
    sigma: f64,
}

impl AxisKernel {
    pub fn new(freq: f64, motion_radius: f64, beam_waist: f64, edge: f64) -> Result<Self> {
        if !freq.is_finite() {
            return Err(Error::invalid("freq_q", "must be finite"));
        }
        let radius = require_positive("motion_A", motion_radius)?;
        let edge = require_positive("window_L", edge)?;
        if beam_waist != INFINITE_BEAM {
            require_positive("beam_w", beam_waist)?;
        }
        let inv_a2 = 1.0 / (radius * radius);
        let inv_w2 = if beam_waist == INFINITE_BEAM {
            0.0
        } else {
            1.0 / (beam_waist * beam_waist)
        };
        // σ² = A²w²/(A² + w²), arranged to stay finite for extreme ratios.
        let s2 = if inv_w2 == 0.0 {
            radius * radius
        } else {
            let r = radius * beam_waist.recip();
            radius * radius / (1.0 + r * r)
        };
        Ok(AxisKernel {
            freq,
            edge,
            radius,
            inv_a2,
            inv_w2,
            s2,
            sigma: s2.sqrt(),
        })
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    pub fn edge(&self) -> f64 {
        self.edge
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Gaussian exponent `C(c) = b²/σ² - c²/A²`, in a cancellation-free form.
    fn log_main(&self, c: f64) -> Complex64 {
        Complex64::new(
            -self.s2 * self.inv_a2 * self.inv_w2 * c * c - 0.25 * self.s2 * self.freq * self.freq,
            -self.s2 * self.freq * c * self.inv_a2,
        )
    }

    fn endpoints(&self, c: f64) -> (ErfEndpoint, ErfEndpoint) {
        let half = 0.5 * self.edge;
        let shift = self.s2 * c * self.inv_a2;
        let im = 0.5 * self.sigma * self.freq;
        let beam_loss = -half * half * self.inv_w2;
        let upper = ErfEndpoint {
            arg: Complex64::new((half - shift) / self.sigma, im),
            tail: Complex64::new(
                beam_loss - (c - half) * (c - half) * self.inv_a2,
                -half * self.freq,
            ),
        };
        let lower = ErfEndpoint {
            arg: Complex64::new(-(half + shift) / self.sigma, im),
            tail: Complex64::new(
                beam_loss - (c + half) * (c + half) * self.inv_a2,
                half * self.freq,
            ),
        };
        (upper, lower)
    }

    /// `G(c)`.
    pub fn at(&self, c: f64) -> Result<Complex64> {
        let (upper, lower) = self.endpoints(c);
        let diff = pair_erf_diff_scaled(upper, lower, self.log_main(c))?;
        Ok(0.5 * self.sigma / self.radius * diff)
    }

    /// `M(c) = (σ/A)·exp(C(c))`.
    pub fn main_term(&self, c: f64) -> Complex64 {
        let e = self.log_main(c);
        if e.re < -745.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (s, co) = e.im.sin_cos();
        self.sigma / self.radius * e.re.exp() * Complex64::new(co, s)
    }

    /// `T(c) = M(c) - G(c)` for `c` inside the window.
    pub fn edge_term(&self, c: f64) -> Result<Complex64> {
        let (upper, lower) = self.endpoints(c);
        let lp = self.log_main(c);
        let hi = scaled_erfc(upper, true, lp)?;
        let lo = scaled_erfc(lower, false, lp)?;
        Ok(0.5 * self.sigma / self.radius * (hi + lo))
    }

    /// `∫ M(c) dc` over the window, in closed form.
    pub fn main_integral(&self) -> Result<Complex64> {
        // M(c) = (σ/A) exp(-σ²q²/4) exp(-βc² - iγc) with β = 1/(A² + w²).
        let beta = self.s2 * self.inv_a2 * self.inv_w2;
        let gamma = self.s2 * self.freq * self.inv_a2;
        let envelope = -0.25 * self.s2 * self.freq * self.freq;
        if envelope < -745.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let waist = if beta == 0.0 { INFINITE_BEAM } else { beta.sqrt().recip() };
        let f = windowed_beam_fourier(gamma, waist, self.edge)?;
        Ok(self.sigma / self.radius * envelope.exp() * f)
    }
}

/// `exp(tail)·w(±i·arg)`: the erfc-like remainder at one window edge.
fn scaled_erfc(end: ErfEndpoint, upper: bool, log_prefactor: Complex64) -> Result<Complex64> {
    // pair_erf_diff_scaled(end, far, ·) with `far` saturated on the same side
    // reduces to exactly this term; call the kernel through a saturated
    // partner so the overflow handling is shared.
    let sign = if upper { 1.0 } else { -1.0 };
    let far = ErfEndpoint {
        arg: Complex64::new(sign * 1e3, 0.0),
        tail: Complex64::new(-1e6, 0.0),
    };
    let d = pair_erf_diff_scaled(far, end, log_prefactor)?;
    // For the upper edge: erf(∞) - erf(u₁) → exp(E₁)w(iu₁).
    // For the lower edge: erf(-∞) - erf(u₂) → -exp(E₂)w(-iu₂).
    Ok(sign * d)
}

/// `∫_{-L/2}^{L/2} exp(-(x-c)²/A²)/(√π A) · exp(-x²/w²) · exp(-iqx) dx` in closed form.
pub fn windowed_gaussian_fourier(
    center: f64,
    freq: f64,
    motion_radius: f64,
    beam_waist: f64,
    edge: f64,
) -> Result<Complex64> {
    AxisKernel::new(freq, motion_radius, beam_waist, edge)?.at(center)
}

/// `∫_{-L/2}^{L/2} exp(-x²/w²) exp(-iqx) dx`: one axis of the pump profile's
/// Fourier transform over the cell, i.e. the uniform-density (`A → ∞`) limit.
pub fn windowed_beam_fourier(freq: f64, beam_waist: f64, edge: f64) -> Result<Complex64> {
    let edge = require_positive("window_L", edge)?;
    let half = 0.5 * edge;
    if beam_waist == INFINITE_BEAM {
        if freq == 0.0 {
            return Ok(Complex64::new(edge, 0.0));
        }
        return Ok(Complex64::new(2.0 * (freq * half).sin() / freq, 0.0));
    }
    let w = require_positive("beam_w", beam_waist)?;
    let im = 0.5 * freq * w;
    let beam_loss = -(half / w) * (half / w);
    let upper = ErfEndpoint {
        arg: Complex64::new(half / w, im),
        tail: Complex64::new(beam_loss, -freq * half),
    };
    let lower = ErfEndpoint {
        arg: Complex64::new(-half / w, im),
        tail: Complex64::new(beam_loss, freq * half),
    };
    let d = pair_erf_diff_scaled(upper, lower, Complex64::new(-im * im, 0.0))?;
    Ok(0.5 * SQRT_PI * w * d)
}

/// `∫_{-L/2}^{L/2} exp(-2x²/w²) dx`.
pub fn beam_intensity_integral(beam_waist: f64, edge: f64) -> f64 {
    if beam_waist == INFINITE_BEAM {
        return edge;
    }
    beam_waist * (0.5 * PI).sqrt() * erf_real(edge / (SQRT_2 * beam_waist))
}

/// Absolute tolerance of [`windowed_gaussian_fourier_quadrature`].
pub const REFERENCE_TOLERANCE: f64 = 1e-13;

/// Direct adaptive quadrature of the integral that
/// [`windowed_gaussian_fourier`] evaluates in closed form. Slow; meant as a
/// reference.
pub fn windowed_gaussian_fourier_quadrature(
    center: f64,
    freq: f64,
    motion_radius: f64,
    beam_waist: f64,
    edge: f64,
) -> Result<Complex64> {
    let k = AxisKernel::new(freq, motion_radius, beam_waist, edge)?;
    let norm = 1.0 / (SQRT_PI * k.radius);
    // The integrand envelope is a Gaussian of width σ about x₀ = σ²c/A².
    let peak = k.s2 * center * k.inv_a2;
    let reach = 40.0 * k.sigma;
    let lo = (-0.5 * edge).max(peak - reach);
    let hi = (0.5 * edge).min(peak + reach);
    if lo >= hi {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut step = 0.5 * k.sigma;
    if freq != 0.0 {
        step = step.min(PI / freq.abs());
    }
    let panels = ((hi - lo) / step).ceil().clamp(1.0, 4e5) as usize;
    let breaks: Vec<f64> = (0..=panels)
        .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
        .collect();
    let integrand = |x: f64| {
        let d = x - center;
        let e = Complex64::new(-d * d * k.inv_a2 - x * x * k.inv_w2, -freq * x);
        norm * e.exp()
    };
    adaptive_kronrod(integrand, &breaks, REFERENCE_TOLERANCE, 200_000_000)
}

/// Stokes amplitude `S(rᵢ, k)` for an atom with mean position `mean_pos`.
pub fn amplitude(
    model: &ExperimentModel,
    mean_pos: [f64; 3],
    dir: StokesDirection,
) -> Result<Complex64> {
    let [gx, gy, gz] = model.axis_kernels(dir)?;
    Ok(gx.at(mean_pos[0])? * gy.at(mean_pos[1])? * gz.at(mean_pos[2])?)
}
