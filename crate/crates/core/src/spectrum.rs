//! Steady-state coherence sum and cavity reflectivity spectrum versus x-ray
//! detuning, with extraction of the transparency-dip geometry.

use num_complex::Complex64;
use thiserror::Error;

use crate::params::{derive_collective, CavityParams, HyperfineField, NaturalUnits};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("denominator magnitude {0:.3e} below 1e-30; coherence sum is singular")]
    Singular(f64),
    #[error("scan needs at least 2 points (got {0})")]
    TooFewPoints(usize),
    #[error("scan range [{0}, {1}] is empty or not finite")]
    BadRange(f64, f64),
    #[error("spectrum has no interior transparency dip")]
    NoDip,
    #[error("no local maximum found {0} of the dip")]
    NoFlank(&'static str),
}

/// Steady-state sum of the two relevant collective coherences at x-ray
/// detuning `delta` \[gamma\]:
///
/// ```text
/// i sqrt(16/3) g sqrt(N) Omega (gamma - 2i delta)
/// -----------------------------------------------------------------
/// (gamma - 2i delta)(gamma' - 2i delta') + (2 phi)^2
/// ```
///
/// with `delta' = delta - (2/3) g^2 N delta_ls` and the collective
/// quantities from [`derive_collective`].
pub fn coherence_sum(
    delta: f64,
    params: &CavityParams,
    field: &HyperfineField,
) -> Result<Complex64, SpectrumError> {
    let collective = derive_collective(params);
    coherence_sum_with(delta, params.g_sqrt_n(), field.phi(), &collective)
}

fn coherence_sum_with(
    delta: f64,
    g_sqrt_n: f64,
    phi: f64,
    collective: &crate::params::CollectiveQuantities,
) -> Result<Complex64, SpectrumError> {
    let gamma = NaturalUnits::GAMMA;
    let delta_prime = delta - collective.delta_prime_offset;
    let a = Complex64::new(gamma, -2.0 * delta);
    let b = Complex64::new(collective.gamma_prime, -2.0 * delta_prime);
    let denom = a * b + 2.0 * phi * (2.0 * phi);
    if denom.norm() < 1e-30 {
        return Err(SpectrumError::Singular(denom.norm()));
    }
    let numer = Complex64::i() * (16.0f64 / 3.0).sqrt() * g_sqrt_n * collective.omega_drive * a;
    Ok(numer / denom)
}

/// Empty-cavity reflection amplitude `2 kappa_r / (kappa + i delta_c) - 1`
/// (one-sided cavity input-output background).
pub fn cavity_background(params: &CavityParams) -> Complex64 {
    2.0 * params.kappa_r / Complex64::new(params.kappa, params.delta_c) - 1.0
}

/// Default complex constant coupling the coherence sum into the reflection
/// amplitude: `i sqrt(2 kappa_r) (sqrt(3)/4) g sqrt(N) / (kappa + i delta_c)`.
/// With this choice the nuclear contribution reduces to
/// `-2 kappa_r g^2 N (gamma - 2i delta) / ((kappa + i delta_c)^2 D(delta))`,
/// the form expected from eliminating the cavity mode once on the drive side
/// and once on the out-coupling side.
pub fn default_coupling_const(params: &CavityParams) -> Complex64 {
    Complex64::i() * (2.0 * params.kappa_r).sqrt() * (3.0f64.sqrt() / 4.0) * params.g_sqrt_n()
        / Complex64::new(params.kappa, params.delta_c)
}

/// Cavity reflection amplitude at detuning `delta`:
/// `r = r_cav + coupling_const * coherence_sum / a_in`.
pub fn reflectivity_amplitude(
    delta: f64,
    params: &CavityParams,
    field: &HyperfineField,
    coupling_const: Complex64,
) -> Result<Complex64, SpectrumError> {
    let sum = coherence_sum(delta, params, field)?;
    Ok(cavity_background(params) + coupling_const * sum / params.a_in)
}

/// Reflectivity spectrum sampled on a uniform detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumScan {
    /// Strictly increasing detunings \[gamma\].
    pub detunings: Vec<f64>,
    pub coherence_sum: Vec<Complex64>,
    pub reflectivity_amplitude: Vec<Complex64>,
    /// `|r|^2` per detuning.
    pub reflectivity: Vec<f64>,
}

/// Scan the reflectivity over `detuning_range` with the default coupling
/// constant.
pub fn scan(
    detuning_range: (f64, f64),
    n_points: usize,
    params: &CavityParams,
    field: &HyperfineField,
) -> Result<SpectrumScan, SpectrumError> {
    scan_with(detuning_range, n_points, params, field, default_coupling_const(params))
}

/// Scan with an explicit coupling constant.
pub fn scan_with(
    (lo, hi): (f64, f64),
    n_points: usize,
    params: &CavityParams,
    field: &HyperfineField,
    coupling_const: Complex64,
) -> Result<SpectrumScan, SpectrumError> {
    if n_points < 2 {
        return Err(SpectrumError::TooFewPoints(n_points));
    }
    if hi <= lo || !lo.is_finite() || !hi.is_finite() {
        return Err(SpectrumError::BadRange(lo, hi));
    }
    let collective = derive_collective(params);
    let g_sqrt_n = params.g_sqrt_n();
    let phi = field.phi();
    let r_cav = cavity_background(params);
    let step = (hi - lo) / (n_points - 1) as f64;

    let mut detunings = Vec::with_capacity(n_points);
    let mut sums = Vec::with_capacity(n_points);
    let mut amplitudes = Vec::with_capacity(n_points);
    let mut reflectivity = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let delta = lo + i as f64 * step;
        let sum = coherence_sum_with(delta, g_sqrt_n, phi, &collective)?;
        let r = r_cav + coupling_const * sum / params.a_in;
        detunings.push(delta);
        sums.push(sum);
        amplitudes.push(r);
        reflectivity.push(r.norm_sqr());
    }
    Ok(SpectrumScan { detunings, coherence_sum: sums, reflectivity_amplitude: amplitudes, reflectivity })
}

/// Geometry of the transparency dip extracted from a scan.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DipReport {
    /// Detuning of the reflectivity minimum \[gamma\] (parabolic refined).
    pub dip_position: f64,
    /// Reflectivity at the minimum.
    pub dip_depth: f64,
    /// Positions of the two local maxima bracketing the dip \[gamma\].
    pub flank_peaks: [f64; 2],
    /// Transparency-window full width at half depth \[gamma\].
    pub fwhm: f64,
}

/// Locate the dip, its bracketing flank maxima, and the half-depth width.
/// Fails with a shape error when the scan has no interior minimum (flat or
/// monotone spectra).
pub fn analyze_dip(scan: &SpectrumScan) -> Result<DipReport, SpectrumError> {
    let r = &scan.reflectivity;
    let x = &scan.detunings;
    let n = r.len();
    if n < 3 {
        return Err(SpectrumError::NoDip);
    }
    let (i_min, _) = r
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    if i_min == 0 || i_min + 1 == n || !(r[i_min] < r[i_min - 1] && r[i_min] < r[i_min + 1]) {
        return Err(SpectrumError::NoDip);
    }
    let step = x[1] - x[0];
    let (d, dip_depth) = refine_extremum(r[i_min - 1], r[i_min], r[i_min + 1]);
    let dip_position = x[i_min] + d * step;

    let left = nearest_local_max(r, i_min, -1).ok_or(SpectrumError::NoFlank("left"))?;
    let right = nearest_local_max(r, i_min, 1).ok_or(SpectrumError::NoFlank("right"))?;
    let (dl, peak_l) = refine_extremum(r[left - 1], r[left], r[left + 1]);
    let (dr, peak_r) = refine_extremum(r[right - 1], r[right], r[right + 1]);
    let flank_peaks = [x[left] + dl * step, x[right] + dr * step];

    // Half depth per side, crossings located by linear interpolation.
    let half_cross = |peak: f64, dir: i64| -> f64 {
        let level = 0.5 * (dip_depth + peak);
        let mut i = i_min as i64;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= n {
                return x[i as usize];
            }
            if r[next as usize] >= level {
                let (r0, r1) = (r[i as usize], r[next as usize]);
                let frac = if r1 == r0 { 0.0 } else { (level - r0) / (r1 - r0) };
                return x[i as usize] + frac * (x[next as usize] - x[i as usize]);
            }
            i = next;
        }
    };
    let fwhm = half_cross(peak_r, 1) - half_cross(peak_l, -1);

    Ok(DipReport { dip_position, dip_depth, flank_peaks, fwhm })
}

fn nearest_local_max(r: &[f64], from: usize, dir: i64) -> Option<usize> {
    let n = r.len() as i64;
    let mut i = from as i64 + dir;
    while i >= 1 && i + 1 < n {
        let u = i as usize;
        if r[u] > r[u - 1] && r[u] > r[u + 1] {
            return Some(u);
        }
        i += dir;
    }
    None
}

/// Parabolic vertex through three equidistant samples: offset from the
/// center (in sample units) and refined extremum value.
fn refine_extremum(ym: f64, y0: f64, yp: f64) -> (f64, f64) {
    let denom = ym - 2.0 * y0 + yp;
    if denom == 0.0 {
        return (0.0, y0);
    }
    let d = 0.5 * (ym - yp) / denom;
    (d, y0 - 0.25 * (ym - yp) * d)
}
