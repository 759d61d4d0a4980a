//! Monotone cubic Hermite interpolation with Steffen-limited slopes.
//!
//! Used in two places: resampling tabulated pulse shapes on arbitrary node
//! spacings, and the semi-Lagrangian advection kernel on uniform grids.
//! Steffen's slope limiter is strictly local (each slope depends only on the
//! two neighboring secants), keeps the interpolant monotone wherever the data
//! is, and reproduces node values exactly.

use num_complex::Complex64;

/// Steffen-limited slope from the two neighboring secants.
fn limited_slope(s_left: f64, s_right: f64) -> f64 {
    if s_left * s_right <= 0.0 {
        return 0.0;
    }
    let p = 0.5 * (s_left + s_right);
    let bound = 2.0 * s_left.abs().min(s_right.abs());
    p.signum() * p.abs().min(bound)
}

/// One-sided endpoint slope (parabolic estimate, clamped).
fn endpoint_slope(s_near: f64, s_far: f64) -> f64 {
    let p = 1.5 * s_near - 0.5 * s_far;
    if p * s_near <= 0.0 {
        0.0
    } else if p.abs() > 2.0 * s_near.abs() {
        2.0 * s_near
    } else {
        p
    }
}

/// Cubic Hermite basis on the unit interval; exact at u = 0 and u = 1.
#[inline]
fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, u: f64) -> f64 {
    let um1 = u - 1.0;
    let h00 = (1.0 + 2.0 * u) * um1 * um1;
    let h10 = u * um1 * um1;
    let h01 = u * u * (3.0 - 2.0 * u);
    let h11 = u * u * um1;
    h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1
}

/// Monotone cubic interpolant over strictly increasing nodes `xs`.
///
/// Evaluation outside the node range returns zero (pulse shapes vanish
/// outside their support).
#[derive(Debug, Clone)]
pub(crate) struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing with `xs.len() == ys.len() >= 2`.
    pub(crate) fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        debug_assert!(xs.len() == ys.len() && xs.len() >= 2);
        debug_assert!(xs.windows(2).all(|w| w[0] < w[1]));
        let n = xs.len();
        let secant =
            |i: usize| -> f64 { (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) };
        let mut slopes = vec![0.0; n];
        slopes[0] = if n == 2 { secant(0) } else { endpoint_slope(secant(0), secant(1)) };
        slopes[n - 1] =
            if n == 2 { secant(0) } else { endpoint_slope(secant(n - 2), secant(n - 3)) };
        for i in 1..n - 1 {
            // Steffen's weighted parabolic slope for non-uniform spacing.
            let h_left = xs[i] - xs[i - 1];
            let h_right = xs[i + 1] - xs[i];
            let s_left = secant(i - 1);
            let s_right = secant(i);
            if s_left * s_right <= 0.0 {
                slopes[i] = 0.0;
            } else {
                let p = (s_left * h_right + s_right * h_left) / (h_left + h_right);
                let bound = 2.0 * s_left.abs().min(s_right.abs());
                slopes[i] = p.signum() * p.abs().min(bound);
            }
        }
        Self { xs, ys, slopes }
    }

    /// Evaluate at `x`; node queries return the node value exactly.
    pub(crate) fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let i = i.min(n - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let u = (x - self.xs[i]) / h;
        hermite(self.ys[i], self.ys[i + 1], self.slopes[i] * h, self.slopes[i + 1] * h, u)
    }
}

/// Sample a complex field on a uniform grid at `index + u` (0 <= u < 1),
/// with component-wise Steffen limiting. Out-of-range stencil points clamp
/// to one-sided slopes at the edges.
#[inline]
pub(crate) fn sample_uniform_complex(values: &[Complex64], index: usize, u: f64) -> Complex64 {
    debug_assert!(index + 1 < values.len());
    if u == 0.0 {
        return values[index];
    }
    let y0 = values[index];
    let y1 = values[index + 1];
    let d = y1 - y0;
    let d_left = if index > 0 { y0 - values[index - 1] } else { d };
    let d_right = if index + 2 < values.len() { values[index + 2] - y1 } else { d };
    let re = hermite(
        y0.re,
        y1.re,
        limited_slope(d_left.re, d.re),
        limited_slope(d.re, d_right.re),
        u,
    );
    let im = hermite(
        y0.im,
        y1.im,
        limited_slope(d_left.im, d.im),
        limited_slope(d.im, d_right.im),
        u,
    );
    Complex64::new(re, im)
}
