//! Complex error function kernel built on the Faddeeva function
//! `w(z) = exp(-z²)·erfc(-iz)`.
//!
//! In the closed upper half-plane `w` is evaluated with Weideman's rational
//! expansion (40 terms) for `|z| ≤ 8` and with the Laplace continued fraction
//! beyond. Everything else (lower half-plane, `erf`, scaled erf differences)
//! is reduced to upper-half-plane evaluations, where `|w| ≤ 1` and no
//! overflow can occur.
//!
//! Functions are total on finite input. A result whose true magnitude exceeds
//! the f64 range comes back with infinite components, never NaN.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};
use std::sync::OnceLock;

pub use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const WEIDEMAN_TERMS: usize = 40;
const CONTINUED_FRACTION_RADIUS: f64 = 8.0;
const SERIES_RADIUS: f64 = 1.0;
/// Short erf differences inside this radius are integrated along the segment.
const SEGMENT_RADIUS: f64 = 4.0;
const SEGMENT_MAX_LENGTH: f64 = 2.0;
/// `exp(x)` is exactly zero below this.
const UNDERFLOW_EXPONENT: f64 = -750.0;
/// Largest exponent for which `exp` stays finite, with a little margin.
const OVERFLOW_EXPONENT: f64 = 709.0;

struct Weideman {
    scale: f64,
    coeffs: [f64; WEIDEMAN_TERMS],
}

fn weideman_table() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_TERMS;
        let m = 2 * n;
        let scale = (n as f64 / std::f64::consts::SQRT_2).sqrt();
        // Samples of exp(-t²)(L² + t²) on t = L tan(θ/2), θ = kπ/M; the
        // coefficients are the cosine transform of this even sequence.
        let samples: Vec<f64> = (1..m)
            .map(|k| {
                let t = scale * (k as f64 * PI / (2 * m) as f64).tan();
                (-t * t).exp() * (scale * scale + t * t)
            })
            .collect();
        let mut coeffs = [0.0; WEIDEMAN_TERMS];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let order = (j + 1) as f64;
            let tail: f64 = samples
                .iter()
                .enumerate()
                .map(|(i, f)| f * (PI * (i + 1) as f64 * order / m as f64).cos())
                .sum();
            *c = (scale * scale + 2.0 * tail) / (2 * m) as f64;
        }
        Weideman { scale, coeffs }
    })
}

fn weideman(z: Complex64) -> Complex64 {
    let table = weideman_table();
    let l = Complex64::new(table.scale, 0.0);
    let iz = Complex64::new(-z.im, z.re);
    let denom = l - iz;
    let ratio = (l + iz) / denom;
    let poly = table
        .coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * ratio + c);
    2.0 * poly / (denom * denom) + FRAC_1_SQRT_PI / denom
}

fn continued_fraction(z: Complex64) -> Complex64 {
    let depth = if z.norm_sqr() < 400.0 { 40 } else { 20 };
    let mut tail = Complex64::new(0.0, 0.0);
    for k in (1..=depth).rev() {
        tail = (0.5 * k as f64) / (z - tail);
    }
    Complex64::new(0.0, FRAC_1_SQRT_PI) / (z - tail)
}

/// `w(z)` for `Im z ≥ 0`.
fn faddeeva_upper(z: Complex64) -> Complex64 {
    debug_assert!(z.im >= 0.0);
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if z.norm_sqr() > CONTINUED_FRACTION_RADIUS * CONTINUED_FRACTION_RADIUS {
        continued_fraction(z)
    } else {
        weideman(z)
    }
}

/// `-z²`, with the real part formed as a product so it keeps full relative
/// accuracy near the diagonals.
fn neg_square(z: Complex64) -> Complex64 {
    Complex64::new((z.im - z.re) * (z.im + z.re), -2.0 * z.re * z.im)
}

/// `exp(exponent)·factor` without intermediate overflow or NaN from `∞·0`.
fn exp_mul(exponent: Complex64, factor: Complex64) -> Complex64 {
    if exponent.re < UNDERFLOW_EXPONENT && factor.norm() <= 1e300 {
        return Complex64::new(0.0, 0.0);
    }
    if exponent.re < OVERFLOW_EXPONENT {
        let (s, c) = exponent.im.sin_cos();
        return exponent.re.exp() * Complex64::new(c, s) * factor;
    }
    let mag = factor.norm();
    if mag == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let log_mag = exponent.re + mag.ln();
    let phase = exponent.im + factor.arg();
    let (s, c) = phase.sin_cos();
    if log_mag < OVERFLOW_EXPONENT {
        log_mag.exp() * Complex64::new(c, s)
    } else {
        Complex64::new(saturate(c), saturate(s))
    }
}

fn saturate(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(x)
    }
}

/// The Faddeeva function `w(z) = exp(-z²)·erfc(-iz)`.
///
/// Lower half-plane values use `w(z) = 2·exp(-z²) - w(-z)`.
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        faddeeva_upper(z)
    } else {
        exp_mul(neg_square(z), Complex64::new(2.0, 0.0)) - faddeeva_upper(-z)
    }
}

/// Scaled complementary error function `erfcx(x) = exp(x²)·erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x >= 0.0 {
        faddeeva_upper(Complex64::new(0.0, x)).re
    } else {
        // erfc(x) = 2 - erfc(-x)
        let neg = exp_mul(
            Complex64::new(x * x, 0.0),
            Complex64::new(2.0, 0.0),
        );
        neg.re - faddeeva_upper(Complex64::new(0.0, -x)).re
    }
}

fn erf_series(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..64 {
        term *= -z2 / n as f64;
        let contrib = term / (2 * n + 1) as f64;
        sum += contrib;
        if contrib.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

/// Real error function.
pub fn erf_real(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    let value = if ax < SERIES_RADIUS {
        erf_series(Complex64::new(ax, 0.0)).re
    } else {
        1.0 - (-ax * ax).exp() * erfcx(ax)
    };
    value.copysign(x)
}

/// `erf(iy)/i = erfi(y)` for `y ≥ 0`.
fn erfi_nonneg(y: f64) -> f64 {
    let dawson_like = faddeeva_upper(Complex64::new(y, 0.0)).im;
    if y * y < OVERFLOW_EXPONENT {
        (y * y).exp() * dawson_like
    } else {
        (y * y + dawson_like.ln()).exp()
    }
}

/// Complex error function.
///
/// Evaluated in the closed first quadrant and extended by the exact
/// symmetries `erf(-z) = -erf(z)` and `erf(z*) = erf(z)*`.
pub fn erf(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    if y == 0.0 {
        return Complex64::new(erf_real(x), y);
    }
    if x == 0.0 {
        return Complex64::new(x, erfi_nonneg(y.abs()).copysign(y));
    }
    if x < 0.0 {
        return -erf(-z);
    }
    if y < 0.0 {
        return erf(z.conj()).conj();
    }
    if z.norm() < SERIES_RADIUS {
        return erf_series(z);
    }
    let iz = Complex64::new(-y, x);
    Complex64::new(1.0, 0.0) - exp_mul(neg_square(z), faddeeva_upper(iz))
}

/// `erf(b) - erf(a) = (2/√π)∫ exp(-t²) dt` along the straight segment from
/// `a` to `b`; free of the cancellation that subtracting two nearly equal
/// erf values suffers.
fn erf_segment(a: Complex64, b: Complex64) -> Complex64 {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(32));
    let delta = b - a;
    let sum: Complex64 = rule
        .mapped(0.0, 1.0)
        .map(|(s, w)| w * (-(a + delta * s) * (a + delta * s)).exp())
        .sum();
    FRAC_2_SQRT_PI * delta * sum
}

/// An error-function argument paired with its tail exponent
/// `log_prefactor - arg²`.
///
/// Callers that know the tail exponent in closed form should supply it
/// directly: when `log_prefactor` and `arg²` are both large and nearly
/// cancel, forming the difference numerically loses all precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErfEndpoint {
    pub arg: Complex64,
    pub tail: Complex64,
}

impl ErfEndpoint {
    pub fn new(arg: Complex64, log_prefactor: Complex64) -> Self {
        ErfEndpoint {
            arg,
            tail: log_prefactor + neg_square(arg),
        }
    }

    /// `exp(tail)·w(i·s·arg)` where `s` is the sign of `Re arg`, so the
    /// Faddeeva argument always lies in the upper half-plane.
    fn tail_term(&self, positive: bool) -> Complex64 {
        if self.tail.re < UNDERFLOW_EXPONENT {
            return Complex64::new(0.0, 0.0);
        }
        let iz = Complex64::new(-self.arg.im, self.arg.re);
        let w = faddeeva_upper(if positive { iz } else { -iz });
        exp_mul(self.tail, w)
    }
}

/// `exp(log_prefactor)·(erf(a) - erf(b))`, evaluated jointly so that a
/// decaying prefactor absorbs the growth of the error functions.
pub fn pair_erf_diff(a: Complex64, b: Complex64, log_prefactor: Complex64) -> Result<Complex64> {
    pair_erf_diff_scaled(
        ErfEndpoint::new(a, log_prefactor),
        ErfEndpoint::new(b, log_prefactor),
        log_prefactor,
    )
}

/// As [`pair_erf_diff`], with caller-supplied tail exponents.
///
/// With `s = sign(Re u)`, `exp(p)·erf(u) = s·(exp(p) - exp(p - u²)·w(i s u))`;
/// the `exp(p)` pieces cancel exactly when both signs agree.
pub fn pair_erf_diff_scaled(
    a: ErfEndpoint,
    b: ErfEndpoint,
    log_prefactor: Complex64,
) -> Result<Complex64> {
    if a.arg == b.arg {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let short = (a.arg - b.arg).norm() <= SEGMENT_MAX_LENGTH
        && a.arg.norm() <= SEGMENT_RADIUS
        && b.arg.norm() <= SEGMENT_RADIUS;
    let value = if short {
        exp_mul(log_prefactor, erf_segment(b.arg, a.arg))
    } else {
        let pos_a = a.arg.re >= 0.0;
        let pos_b = b.arg.re >= 0.0;
        let ta = a.tail_term(pos_a);
        let tb = b.tail_term(pos_b);
        match (pos_a, pos_b) {
            (true, true) => tb - ta,
            (false, false) => ta - tb,
            (true, false) => exp_mul(log_prefactor, Complex64::new(2.0, 0.0)) - ta - tb,
            (false, true) => ta + tb - exp_mul(log_prefactor, Complex64::new(2.0, 0.0)),
        }
    };
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::OverflowUnrepresentable)
    }
}
