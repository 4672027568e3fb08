//! Monotone piecewise-cubic Hermite interpolation (PCHIP: weighted
//! harmonic-mean slopes, zero at local extrema).

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` strictly increasing, at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::invalid("knots", "need at least two (x, y) pairs"));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::invalid("knots", "x must be finite and strictly increasing"));
        }
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            if a * b <= 0.0 {
                continue;
            }
            // Weighted harmonic mean keeps each cubic piece monotone.
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let w0 = 2.0 * h1 + h0;
            let w1 = h1 + 2.0 * h0;
            slopes[i] = (w0 + w1) / (w0 / a + w1 / b);
        }
        if n > 2 {
            slopes[0] = end_slope(xs[1] - xs[0], xs[2] - xs[1], secants[0], secants[1]);
            slopes[n - 1] = end_slope(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                secants[n - 2],
                secants[n - 3],
            );
        }
        Ok(MonotoneCubic { xs, ys, slopes })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value at `x`; `None` outside the knot range. Knots return their
    /// ordinate exactly.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let i = match self.xs.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => return Some(self.ys[i]),
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(
            h00 * self.ys[i]
                + h10 * h * self.slopes[i]
                + h01 * self.ys[i + 1]
                + h11 * h * self.slopes[i + 1],
        )
    }
}

/// Three-point one-sided end slope, limited so the end piece stays monotone.
/// `h0`, `d0` belong to the end interval, `h1`, `d1` to its neighbour.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_knots_and_lines() {
        let m = MonotoneCubic::new(vec![0.0, 1.0, 3.0], vec![1.0, 3.0, 7.0]).unwrap();
        assert_eq!(m.eval(1.0), Some(3.0));
        assert!((m.eval(2.0).unwrap() - 5.0).abs() < 1e-15);
        assert_eq!(m.eval(3.5), None);
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn flat_segments_stay_flat() {
        let m = MonotoneCubic::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        for k in 0..=100 {
            assert_eq!(m.eval(1.0 + k as f64 / 100.0), Some(1.0));
        }
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in prop::collection::vec((0.01f64..5.0, 0.0f64..5.0), 2..12)
        ) {
            let mut xs = vec![0.0];
            let mut ys = vec![0.0];
            for (dx, dy) in steps {
                xs.push(xs.last().unwrap() + dx);
                ys.push(ys.last().unwrap() + dy);
            }
            let m = MonotoneCubic::new(xs.clone(), ys).unwrap();
            let (lo, hi) = m.domain();
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=500 {
                let v = m.eval((lo + (hi - lo) * k as f64 / 500.0).min(hi)).unwrap();
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
