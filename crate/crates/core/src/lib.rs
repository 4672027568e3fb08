//! Thermometry of atomic ensembles from the angular width of spontaneously
//! emitted Stokes light.
//!
//! Modules, bottom-up: [`cerf`] (complex error function), [`quadrature`],
//! [`model`] (parameters and the closed-form emission amplitude),
//! [`emission`] (angular distribution and cone width), [`collective`]
//! (symmetric-state weight), [`interp`] and [`thermometry`] (calibration and
//! inversion).

pub mod cerf;
pub mod collective;
pub mod emission;
pub mod error;
pub mod interp;
pub mod model;
pub mod quadrature;
pub mod thermometry;

pub use collective::{symmetric_weight, weight_scan, WeightProfile};
pub use emission::{
    angular_scan, cold_limit_distribution, emission_probability, fwhm, hot_limit_distribution,
    measure_fwhm, AngularDistribution, EmissionIntegrator, ScanSettings,
};
pub use error::{Error, Result};
pub use model::{
    Apparatus, AtomSpecies, CloudGeometry, ExperimentModel, PumpPulse, StokesDirection,
    ThermalMotion,
};
pub use thermometry::{
    calibrate, invert_temperature, refine_temperature, CalibrationCurve,
};
