//! Bessel functions of the first kind, built in-crate for the synchrotron
//! Mössbauer source profile.
//!
//! `J1` is evaluated by the ascending power series for small arguments and by
//! Miller's normalized downward recurrence beyond, which keeps the relative
//! error below 1e-10 over the range of interest (0 to ~50). The low orders
//! `J0` and `J2` fall out of the same recurrence and back the internal
//! consistency checks.

/// Arguments at or below this use the ascending series; the alternating terms
/// stay small enough there that cancellation costs at most ~4 digits.
const SERIES_CUTOFF: f64 = 12.0;

/// Bessel function of the first kind, order one.
///
/// Accepts any real argument via the odd symmetry `J1(-x) = -J1(x)`.
pub fn bessel_j1(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let val = if ax <= SERIES_CUTOFF { j_series(1, ax) } else { j_low_orders(ax).1 };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

/// Ascending series J_n(x) = sum_k (-1)^k (x/2)^(n+2k) / (k! (n+k)!).
pub(crate) fn j_series(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() * 0.25 {
            break;
        }
    }
    sum
}

/// `(J0, J1, J2)` by Miller's downward recurrence with the normalization
/// `J0 + 2 (J2 + J4 + ...) = 1`. Requires `x > 0`; stable for all x of
/// interest because the recurrence is run from well above the turning point.
pub(crate) fn j_low_orders(x: f64) -> (f64, f64, f64) {
    debug_assert!(x > 0.0);
    let n = x.ceil() as usize;
    let start = n + n / 2 + 40;
    let start = start + (start & 1); // even start keeps the normalization sum aligned
    let mut jp = 0.0_f64; // J_{n+1}
    let mut jc = 1e-30_f64; // J_n
    let mut norm = 0.0_f64;
    let (mut j0, mut j1, mut j2) = (0.0, 0.0, 0.0);
    for n in (1..=start).rev() {
        let jm = (2.0 * n as f64 / x) * jc - jp;
        jp = jc;
        jc = jm;
        match n - 1 {
            0 => j0 = jc,
            1 => j1 = jc,
            2 => j2 = jc,
            _ => {}
        }
        if (n - 1) % 2 == 0 && n - 1 > 0 {
            norm += 2.0 * jc;
        }
        // Rescale before the growing iterates overflow.
        if jc.abs() > 1e100 {
            let scale = 1e-100;
            jp *= scale;
            jc *= scale;
            norm *= scale;
            j0 *= scale;
            j1 *= scale;
            j2 *= scale;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm, j2 / norm)
}
